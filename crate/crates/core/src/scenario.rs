//! Scenario configuration: one JSON document holding the phone mix, station
//! timings, perception model, routing switches and economic inputs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::line::{RoutingParams, StationParams};
use crate::model::{self, Catalog, ComponentClass, Family, PhoneModel};
use crate::perception::ConfusionMatrix;
use crate::tea::{self, AssetLine, EconParams};

/// Largest manifest a model may declare; item ids reserve one byte per phone.
pub const MAX_MANIFEST: usize = 254;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub id: String,
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_lb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<Vec<ComponentClass>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub battery_host: Option<ComponentClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_fractions: Option<Vec<f64>>,
}

impl ModelSpec {
    pub fn new(id: &str, family: Family) -> Self {
        ModelSpec {
            id: id.to_string(),
            family,
            mass_lb: None,
            manifest: None,
            battery_host: None,
            mass_fractions: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfusionSource {
    /// Diagonal 0.989 with uniform errors.
    Reference,
    Identity,
    UniformDiagonal(f64),
    Matrix(ConfusionMatrix),
}

impl ConfusionSource {
    pub fn matrix(&self) -> Result<ConfusionMatrix> {
        match self {
            ConfusionSource::Reference => Ok(ConfusionMatrix::reference()),
            ConfusionSource::Identity => Ok(ConfusionMatrix::identity()),
            ConfusionSource::UniformDiagonal(d) => ConfusionMatrix::uniform_diagonal(*d)
                .map_err(|e| Error::config("perception.confusion.uniform_diagonal", e.to_string())),
            ConfusionSource::Matrix(m) => Ok(m.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerceptionConfig {
    pub confusion: ConfusionSource,
    pub confidence_threshold: f64,
    /// Probability that a scan comes back below the confidence threshold.
    pub low_confidence_rate: f64,
}

impl Default for PerceptionConfig {
    fn default() -> Self {
        PerceptionConfig {
            confusion: ConfusionSource::Reference,
            confidence_threshold: 0.8,
            low_confidence_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EconomicsConfig {
    pub params: EconParams,
    pub assets: Vec<AssetLine>,
}

impl Default for EconomicsConfig {
    fn default() -> Self {
        EconomicsConfig {
            params: EconParams::default(),
            assets: tea::reference_assets(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub models: Vec<ModelSpec>,
    /// Model id → share of the lot.
    pub mix: BTreeMap<String, f64>,
    pub lot_size: u64,
    pub stations: StationParams,
    pub perception: PerceptionConfig,
    pub routing: RoutingParams,
    pub economics: EconomicsConfig,
    pub seed: u64,
    pub replications: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let models: Vec<ModelSpec> = model::reference_models()
            .into_iter()
            .map(|m| ModelSpec::new(&m.id, m.family))
            .collect();
        let share = 1.0 / models.len() as f64;
        ScenarioConfig {
            mix: models.iter().map(|m| (m.id.clone(), share)).collect(),
            models,
            lot_size: 100,
            stations: StationParams::default(),
            perception: PerceptionConfig::default(),
            routing: RoutingParams::default(),
            economics: EconomicsConfig::default(),
            seed: 42,
            replications: 1,
        }
    }
}

/// How to treat keys the schema does not know.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownKeys {
    Reject,
    Warn,
}

impl ScenarioConfig {
    /// Parses a scenario document. Unknown keys are an error under
    /// [`UnknownKeys::Reject`]; otherwise their paths are returned as warnings.
    pub fn from_json(text: &str, unknown: UnknownKeys) -> Result<(ScenarioConfig, Vec<String>)> {
        let mut ignored = Vec::new();
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ScenarioConfig = {
            let mut record = |path: serde_ignored::Path<'_>| ignored.push(path.to_string());
            let tracked = serde_ignored::Deserializer::new(de, &mut record);
            serde_path_to_error::deserialize(tracked).map_err(|e| {
                let path = e.path().to_string();
                Error::config(if path == "." { "<root>".to_string() } else { path }, e.into_inner().to_string())
            })?
        };
        if unknown == UnknownKeys::Reject {
            if let Some(first) = ignored.first() {
                return Err(Error::config(first.clone(), "unknown key"));
            }
        }
        Ok((cfg, ignored))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks every invariant and resolves model defaults.
    pub fn resolve(&self) -> Result<Scenario> {
        let models = self
            .models
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let pm = PhoneModel::new(
                    &m.id,
                    m.family,
                    m.mass_lb.unwrap_or(self.economics.params.phone_mass),
                    m.manifest.clone(),
                    m.battery_host,
                    m.mass_fractions.clone(),
                )
                .map_err(|e| match e {
                    Error::Config { path, message } => {
                        Error::config(path.replacen(&format!("models[{}]", m.id), &format!("models[{i}]"), 1), message)
                    }
                    other => other,
                })?;
                if pm.manifest.len() > MAX_MANIFEST {
                    return Err(Error::config(format!("models[{i}].manifest"), "too many components"));
                }
                Ok(pm)
            })
            .collect::<Result<Vec<_>>>()?;
        let catalog = Catalog::new(models)?;
        if self.mix.is_empty() {
            return Err(Error::config("mix", "no phone models in the mix"));
        }
        let mut mix = Vec::with_capacity(self.mix.len());
        for (id, &share) in &self.mix {
            let idx = catalog
                .index_of(id)
                .map_err(|_| Error::config(format!("mix.{id}"), "unknown model id"))?;
            if !(share >= 0.0 && share.is_finite()) {
                return Err(Error::config(format!("mix.{id}"), "share must be non-negative"));
            }
            mix.push((idx, share));
        }
        let total: f64 = mix.iter().map(|(_, s)| s).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config("mix", format!("shares sum to {total}, expected 1")));
        }
        if self.lot_size < 1 {
            return Err(Error::config("lot_size", "must be at least 1"));
        }
        if self.replications < 1 {
            return Err(Error::config("replications", "must be at least 1"));
        }
        self.stations.validate()?;
        self.routing.validate()?;
        self.economics.params.validate()?;
        let p = &self.perception;
        if !(0.0..=1.0).contains(&p.confidence_threshold) {
            return Err(Error::config("perception.confidence_threshold", "must lie in [0,1]"));
        }
        if !(0.0..=1.0).contains(&p.low_confidence_rate) {
            return Err(Error::config("perception.low_confidence_rate", "must lie in [0,1]"));
        }
        let confusion = p.confusion.matrix()?;
        Ok(Scenario {
            catalog,
            mix,
            lot_size: self.lot_size,
            stations: self.stations.clone(),
            confusion,
            confidence_threshold: p.confidence_threshold,
            low_confidence_rate: p.low_confidence_rate,
            routing: self.routing.clone(),
            economics: self.economics.clone(),
            seed: self.seed,
            replications: self.replications,
        })
    }
}

/// A validated scenario, ready to simulate.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub catalog: Catalog,
    /// (catalog index, share) in model-id order.
    pub mix: Vec<(usize, f64)>,
    pub lot_size: u64,
    pub stations: StationParams,
    pub confusion: ConfusionMatrix,
    pub confidence_threshold: f64,
    pub low_confidence_rate: f64,
    pub routing: RoutingParams,
    pub economics: EconomicsConfig,
    pub seed: u64,
    pub replications: u64,
}

impl Scenario {
    /// Picks a model by inverting the cumulative mix at `u`.
    pub fn pick_model(&self, u: f64) -> usize {
        let mut cum = 0.0;
        for &(idx, share) in &self.mix {
            cum += share;
            if share > 0.0 && u < cum {
                return idx;
            }
        }
        self.mix.iter().rev().find(|(_, s)| *s > 0.0).map(|(i, _)| *i).unwrap_or(self.mix[0].0)
    }

    /// Set a station or economic parameter by name.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if crate::line::STATION_FIELDS.contains(&name) {
            self.stations.set(name, value)?;
            self.stations.validate()
        } else if tea::ECON_FIELDS.contains(&name) {
            self.economics.params.set(name, value)?;
            self.economics.params.validate()
        } else {
            Err(Error::config(format!("axis.{name}"), "unknown parameter"))
        }
    }
}
