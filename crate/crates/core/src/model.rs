//! Domain types shared by the line model: phone families, component classes,
//! entities flowing through the line, and output bins.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Yearly throughput of the automated line (lb).
pub const AUTO_YEARLY_LBS: f64 = 106_546.55;
/// Hourly throughput of the automated line (phones/h).
pub const AUTO_PHONES_PER_HOUR: f64 = 120.0;
/// Yearly throughput of the manual baseline (lb).
pub const MANUAL_YEARLY_LBS: f64 = 5755.0;
/// Hourly throughput of the manual baseline as printed (phones/h).
pub const MANUAL_PHONES_PER_HOUR: f64 = 6.16;
pub const HOURS_PER_DAY: f64 = 8.0;
pub const DAYS_PER_YEAR: f64 = 300.0;

/// Per-phone mass implied by a yearly tonnage and an operating schedule.
pub fn implied_phone_mass(
    yearly_lbs: f64,
    phones_per_hour: f64,
    hours_per_day: f64,
    days_per_year: f64,
) -> Result<f64> {
    let phones = phones_per_hour * hours_per_day * days_per_year;
    if !(phones > 0.0) || !phones.is_finite() {
        return Err(Error::Undefined("annual phone throughput is zero"));
    }
    Ok(yearly_lbs / phones)
}

/// Mass of one phone implied by the automated row of the economic table (≈ 0.36995 lb).
pub fn default_phone_mass() -> f64 {
    AUTO_YEARLY_LBS / (AUTO_PHONES_PER_HOUR * HOURS_PER_DAY * DAYS_PER_YEAR)
}

/// Mass of one phone implied by the manual row (≈ 0.38928 lb). Kept separate
/// from [`default_phone_mass`]: the two rows do not agree.
pub fn manual_phone_mass() -> f64 {
    MANUAL_YEARLY_LBS / (MANUAL_PHONES_PER_HOUR * HOURS_PER_DAY * DAYS_PER_YEAR)
}

/// Component layers after cutting. The first five are what the detector can
/// output; `Battery` and `ExtractedFrame` only exist after extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentClass {
    NormalCase,
    MiddleLayer,
    Screen,
    Film,
    IphoneCase,
    Battery,
    ExtractedFrame,
}

impl ComponentClass {
    pub const DETECTABLE: [ComponentClass; 5] = [
        ComponentClass::NormalCase,
        ComponentClass::MiddleLayer,
        ComponentClass::Screen,
        ComponentClass::Film,
        ComponentClass::IphoneCase,
    ];

    /// Row/column index in a 5×5 confusion matrix.
    pub fn index(self) -> Option<usize> {
        Self::DETECTABLE.iter().position(|&c| c == self)
    }

    pub fn from_index(i: usize) -> Option<ComponentClass> {
        Self::DETECTABLE.get(i).copied()
    }

    pub fn is_detectable(self) -> bool {
        self.index().is_some()
    }

    pub fn name(self) -> &'static str {
        match self {
            ComponentClass::NormalCase => "normal_case",
            ComponentClass::MiddleLayer => "middle_layer",
            ComponentClass::Screen => "screen",
            ComponentClass::Film => "film",
            ComponentClass::IphoneCase => "iphone_case",
            ComponentClass::Battery => "battery",
            ComponentClass::ExtractedFrame => "extracted_frame",
        }
    }
}

impl fmt::Display for ComponentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueClass {
    HighValue,
    LowValue,
}

/// Value grade of a detectable class. Metal layers that carry electronics are
/// high value; plastic cases, glass screens and films are low value.
pub fn value_class(c: ComponentClass) -> Result<ValueClass> {
    match c {
        ComponentClass::MiddleLayer | ComponentClass::IphoneCase => Ok(ValueClass::HighValue),
        ComponentClass::NormalCase | ComponentClass::Screen | ComponentClass::Film => {
            Ok(ValueClass::LowValue)
        }
        ComponentClass::Battery | ComponentClass::ExtractedFrame => Err(Error::NotDetectable(c)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "iphone_like")]
    IphoneLike,
    #[serde(rename = "android_like")]
    AndroidLike,
}

impl Family {
    pub fn default_manifest(self) -> Vec<ComponentClass> {
        use ComponentClass::*;
        match self {
            Family::AndroidLike => vec![NormalCase, MiddleLayer, Screen, Film],
            Family::IphoneLike => vec![IphoneCase, Screen, Film],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::IphoneLike => "iphone_like",
            Family::AndroidLike => "android_like",
        }
    }
}

/// A registered phone model after defaults have been applied.
#[derive(Debug, Clone, PartialEq)]
pub struct PhoneModel {
    pub id: String,
    pub family: Family,
    pub mass_lb: f64,
    pub manifest: Vec<ComponentClass>,
    pub battery_host: Option<ComponentClass>,
    /// Share of the phone mass carried by each manifest entry, same order.
    pub mass_fractions: Vec<f64>,
}

impl PhoneModel {
    /// Builds a model from its family defaults.
    pub fn from_family(id: impl Into<String>, family: Family, mass_lb: f64) -> Result<Self> {
        Self::new(id, family, mass_lb, None, None, None)
    }

    pub fn new(
        id: impl Into<String>,
        family: Family,
        mass_lb: f64,
        manifest: Option<Vec<ComponentClass>>,
        battery_host: Option<ComponentClass>,
        mass_fractions: Option<Vec<f64>>,
    ) -> Result<Self> {
        let id = id.into();
        let path = |f: &str| format!("models[{id}].{f}");
        if !(mass_lb > 0.0 && mass_lb.is_finite()) {
            return Err(Error::config(path("mass_lb"), "mass must be positive"));
        }
        let manifest = manifest.unwrap_or_else(|| family.default_manifest());
        if manifest.is_empty() {
            return Err(Error::config(path("manifest"), "manifest is empty"));
        }
        if let Some(c) = manifest.iter().find(|c| !c.is_detectable()) {
            return Err(Error::config(
                path("manifest"),
                format!("{c} cannot appear in a cutting manifest"),
            ));
        }
        let battery_host = match battery_host {
            Some(h) => {
                if !manifest.contains(&h) {
                    return Err(Error::config(path("battery_host"), format!("{h} not in manifest")));
                }
                if value_class(h)? != ValueClass::HighValue {
                    return Err(Error::config(path("battery_host"), format!("{h} is not high value")));
                }
                if manifest.iter().filter(|&&c| c == h).count() > 1 {
                    return Err(Error::config(path("battery_host"), "host class appears twice"));
                }
                Some(h)
            }
            None => {
                let hosts: Vec<_> = manifest
                    .iter()
                    .copied()
                    .filter(|&c| matches!(value_class(c), Ok(ValueClass::HighValue)))
                    .collect();
                if hosts.len() > 1 {
                    return Err(Error::config(
                        path("battery_host"),
                        "several high-value layers; name the battery host explicitly",
                    ));
                }
                hosts.first().copied()
            }
        };
        let mass_fractions = match mass_fractions {
            Some(f) => {
                if f.len() != manifest.len() {
                    return Err(Error::config(
                        path("mass_fractions"),
                        "length differs from manifest",
                    ));
                }
                if f.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                    return Err(Error::config(path("mass_fractions"), "fraction outside [0,1]"));
                }
                let sum: f64 = f.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::config(
                        path("mass_fractions"),
                        format!("fractions sum to {sum}, expected 1"),
                    ));
                }
                f
            }
            None => default_mass_fractions(&manifest, battery_host),
        };
        Ok(PhoneModel {
            id,
            family,
            mass_lb,
            manifest,
            battery_host,
            mass_fractions,
        })
    }

    /// Components produced by cutting, in stacking order.
    pub fn manifest(&self) -> &[ComponentClass] {
        &self.manifest
    }
}

/// Battery host 0.5, screen 0.3, the remaining layers share what is left. If
/// nothing is left to share with, the assigned weights are rescaled to 1.
pub fn default_mass_fractions(
    manifest: &[ComponentClass],
    battery_host: Option<ComponentClass>,
) -> Vec<f64> {
    let fixed = |c: ComponentClass| {
        if Some(c) == battery_host {
            Some(0.5)
        } else if c == ComponentClass::Screen {
            Some(0.3)
        } else {
            None
        }
    };
    let assigned: f64 = manifest.iter().filter_map(|&c| fixed(c)).sum();
    let rest = manifest.iter().filter(|&&c| fixed(c).is_none()).count();
    if rest == 0 {
        return manifest.iter().map(|&c| fixed(c).unwrap() / assigned).collect();
    }
    // subtract one weight at a time so 1 − 0.5 − 0.3 lands on 0.2 exactly
    let left = manifest.iter().filter_map(|&c| fixed(c)).fold(1.0, |acc, w| acc - w);
    let share = left.max(0.0) / rest as f64;
    manifest.iter().map(|&c| fixed(c).unwrap_or(share)).collect()
}

/// The five handsets of the reference dataset.
pub fn reference_models() -> Vec<PhoneModel> {
    let m = default_phone_mass();
    [
        ("iphone_se", Family::IphoneLike),
        ("iphone_11", Family::IphoneLike),
        ("galaxy_a03s", Family::AndroidLike),
        ("moto_g_pure", Family::AndroidLike),
        ("tcl_30e", Family::AndroidLike),
    ]
    .into_iter()
    .map(|(id, fam)| PhoneModel::from_family(id, fam, m).expect("reference model is valid"))
    .collect()
}

/// Registered models, looked up by id.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    models: Vec<PhoneModel>,
}

impl Catalog {
    pub fn new(models: Vec<PhoneModel>) -> Result<Self> {
        for (i, m) in models.iter().enumerate() {
            if models[..i].iter().any(|o| o.id == m.id) {
                return Err(Error::config(format!("models[{i}].id"), format!("duplicate id `{}`", m.id)));
            }
        }
        Ok(Catalog { models })
    }

    pub fn models(&self) -> &[PhoneModel] {
        &self.models
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.models
            .iter()
            .position(|m| m.id == id)
            .ok_or_else(|| Error::UnknownModel(id.to_string()))
    }

    pub fn get(&self, idx: usize) -> &PhoneModel {
        &self.models[idx]
    }

    pub fn manifest_for(&self, id: &str) -> Result<&[ComponentClass]> {
        Ok(self.models[self.index_of(id)?].manifest())
    }

    /// Models that will never send a battery to extraction.
    pub fn hostless(&self) -> impl Iterator<Item = &PhoneModel> {
        self.models.iter().filter(|m| m.battery_host.is_none())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhoneState {
    Collected,
    Cut,
    Sorting,
    Chilling,
    Extracted,
    Done,
}

#[derive(Debug, Clone)]
pub struct PhoneUnit {
    pub uid: u64,
    /// Index into the scenario [`Catalog`].
    pub model: usize,
    pub arrival_time: f64,
    pub state: PhoneState,
}

impl PhoneUnit {
    /// Moves the phone forward along Collected→Cut→Sorting→[Chilling→Extracted→]Done.
    ///
    /// A phone can have several items in the battery path at once, so asking
    /// for a stage the phone has already passed is a no-op.
    pub fn advance(&mut self, to: PhoneState) -> Result<()> {
        use PhoneState::*;
        let ok = match (self.state, to) {
            (a, b) if b <= a && a != Done => return Ok(()),
            (Collected, Cut) | (Cut, Sorting) | (Sorting, Chilling) | (Chilling, Extracted) => true,
            (Sorting | Extracted, Done) => true,
            _ => false,
        };
        if !ok {
            return Err(Error::Transition {
                uid: self.uid,
                from: self.state,
                to,
            });
        }
        self.state = to;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    FaceDown,
    FaceUp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentItem {
    pub uid: u64,
    pub parent_phone: u64,
    pub true_class: ComponentClass,
    pub perceived_class: Option<ComponentClass>,
    pub confidence: f64,
    pub contains_battery: bool,
    pub orientation: Orientation,
    pub mass_fraction: f64,
    pub mass_lb: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bin {
    LowValue,
    HighValue,
    BatterySafe,
    ManualException,
}

impl Bin {
    pub const ALL: [Bin; 4] = [Bin::LowValue, Bin::HighValue, Bin::BatterySafe, Bin::ManualException];
}

#[cfg(test)]
mod tests {
    use super::*;
    use ComponentClass::*;

    #[test]
    fn android_manifest_hosts_battery_in_middle_layer() {
        let m = PhoneModel::from_family("a", Family::AndroidLike, 0.4).unwrap();
        assert!(m.manifest.contains(&MiddleLayer));
        assert!(!m.manifest.contains(&IphoneCase));
        assert_eq!(m.battery_host, Some(MiddleLayer));
        assert_eq!(m.mass_fractions, vec![0.1, 0.5, 0.3, 0.1]);
    }

    #[test]
    fn iphone_manifest_hosts_battery_in_case() {
        let m = PhoneModel::from_family("i", Family::IphoneLike, 0.4).unwrap();
        assert_eq!(m.battery_host, Some(IphoneCase));
        assert_eq!(m.manifest, vec![IphoneCase, Screen, Film]);
        let sum: f64 = m.mass_fractions.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hostless_override_is_accepted_and_flagged() {
        let m = PhoneModel::new("s", Family::AndroidLike, 0.3, Some(vec![Screen]), None, None).unwrap();
        assert_eq!(m.battery_host, None);
        assert_eq!(m.mass_fractions, vec![1.0]);
        let cat = Catalog::new(vec![m]).unwrap();
        assert_eq!(cat.hostless().count(), 1);
    }

    #[test]
    fn bad_models_rejected() {
        assert!(PhoneModel::new("x", Family::AndroidLike, 0.3, Some(vec![]), None, None).is_err());
        assert!(PhoneModel::new("x", Family::AndroidLike, 0.0, None, None, None).is_err());
        assert!(PhoneModel::new("x", Family::AndroidLike, 0.3, None, Some(Screen), None).is_err());
        assert!(PhoneModel::new("x", Family::AndroidLike, 0.3, Some(vec![Battery]), None, None).is_err());
        assert!(PhoneModel::new(
            "x",
            Family::AndroidLike,
            0.3,
            Some(vec![MiddleLayer, IphoneCase]),
            None,
            None
        )
        .is_err());
        assert!(
            PhoneModel::new("x", Family::IphoneLike, 0.3, None, None, Some(vec![0.5, 0.5, 0.5])).is_err()
        );
    }

    #[test]
    fn unknown_model_is_config_error() {
        let cat = Catalog::new(reference_models()).unwrap();
        assert!(matches!(cat.manifest_for("nokia"), Err(Error::UnknownModel(_))));
        assert_eq!(cat.manifest_for("iphone_se").unwrap().len(), 3);
    }

    #[test]
    fn phone_masses() {
        let auto = 106_546.55 / (120.0 * 8.0 * 300.0);
        assert_eq!(default_phone_mass(), auto);
        assert!((default_phone_mass() - 0.36995).abs() < 5e-6);
        assert!((manual_phone_mass() - 0.389272).abs() < 5e-7);
        assert!(implied_phone_mass(100.0, 0.0, 8.0, 300.0).is_err());
    }

    #[test]
    fn value_classes() {
        assert_eq!(value_class(Film).unwrap(), ValueClass::LowValue);
        assert_eq!(value_class(MiddleLayer).unwrap(), ValueClass::HighValue);
        assert!(value_class(Battery).is_err());
        assert!(!ExtractedFrame.is_detectable());
    }

    #[test]
    fn phone_state_machine() {
        let mut p = PhoneUnit { uid: 1, model: 0, arrival_time: 0.0, state: PhoneState::Collected };
        assert!(p.advance(PhoneState::Sorting).is_err());
        for s in [PhoneState::Cut, PhoneState::Sorting, PhoneState::Chilling, PhoneState::Extracted] {
            p.advance(s).unwrap();
        }
        // a second item of the same phone entering the chiller later
        p.advance(PhoneState::Chilling).unwrap();
        assert_eq!(p.state, PhoneState::Extracted);
        p.advance(PhoneState::Done).unwrap();
        assert!(p.advance(PhoneState::Done).is_err());
    }
}
