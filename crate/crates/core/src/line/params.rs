use serde::{Deserialize, Serialize};

use crate::des::RngStream;
use crate::error::{Error, Result};

/// A processing time: a constant, or a triangular distribution for
/// sensitivity runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Duration {
    Fixed(f64),
    Triangular { min: f64, mode: f64, max: f64 },
}

impl Duration {
    pub fn validate(&self, path: &str) -> Result<()> {
        let ok = match *self {
            Duration::Fixed(t) => t >= 0.0 && t.is_finite(),
            Duration::Triangular { min, mode, max } => {
                min >= 0.0 && min <= mode && mode <= max && max.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(path, format!("invalid duration {self:?}")))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Duration::Fixed(t) => t,
            Duration::Triangular { min, mode, max } => (min + mode + max) / 3.0,
        }
    }

    /// Fixed durations do not consume a draw.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match *self {
            Duration::Fixed(t) => t,
            Duration::Triangular { min, mode, max } => {
                if max == min {
                    return min;
                }
                let u = rng.draw_uniform();
                let split = (mode - min) / (max - min);
                if u < split {
                    min + (u * (max - min) * (mode - min)).sqrt()
                } else {
                    max - ((1.0 - u) * (max - min) * (max - mode)).sqrt()
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StationParams {
    /// Two saw pairs treated as one stage.
    pub cutting_cycle: Duration,
    /// Robot time per component, detection included.
    pub pick_time: Duration,
    pub flip_time: Duration,
    pub chill_time: Duration,
    pub chill_batch_capacity: usize,
    pub extract_time: Duration,
    pub transfer_time: f64,
    pub cutter_capacity: usize,
    pub robot_capacity: usize,
    pub chiller_chambers: usize,
    pub extractor_capacity: usize,
    /// Detector latency per scan (s); overlaps the pick motion.
    pub inference_time: f64,
    // Recorded for reference only.
    pub cut_edge_offset_mm: f64,
    pub chill_air_temp_c: f64,
    pub chill_airflow_scfm: f64,
}

impl Default for StationParams {
    fn default() -> Self {
        StationParams {
            cutting_cycle: Duration::Fixed(30.0),
            pick_time: Duration::Fixed(7.0),
            flip_time: Duration::Fixed(6.0),
            chill_time: Duration::Fixed(30.0),
            chill_batch_capacity: 4,
            extract_time: Duration::Fixed(3.0),
            transfer_time: 0.0,
            cutter_capacity: 1,
            robot_capacity: 1,
            chiller_chambers: 1,
            extractor_capacity: 1,
            inference_time: 0.0197,
            cut_edge_offset_mm: 2.0,
            chill_air_temp_c: -80.0,
            chill_airflow_scfm: 24.0,
        }
    }
}

/// Station fields that can be set by name (sweep axes).
pub const STATION_FIELDS: [&str; 11] = [
    "cutting_cycle",
    "pick_time",
    "flip_time",
    "chill_time",
    "chill_batch_capacity",
    "extract_time",
    "transfer_time",
    "cutter_capacity",
    "robot_capacity",
    "chiller_chambers",
    "extractor_capacity",
];

impl StationParams {
    pub fn validate(&self) -> Result<()> {
        self.cutting_cycle.validate("stations.cutting_cycle")?;
        self.pick_time.validate("stations.pick_time")?;
        self.flip_time.validate("stations.flip_time")?;
        self.chill_time.validate("stations.chill_time")?;
        self.extract_time.validate("stations.extract_time")?;
        if !(self.transfer_time >= 0.0 && self.transfer_time.is_finite()) {
            return Err(Error::config("stations.transfer_time", "must be non-negative"));
        }
        if !(self.inference_time >= 0.0 && self.inference_time.is_finite()) {
            return Err(Error::config("stations.inference_time", "must be non-negative"));
        }
        for (name, v) in [
            ("chill_batch_capacity", self.chill_batch_capacity),
            ("cutter_capacity", self.cutter_capacity),
            ("robot_capacity", self.robot_capacity),
            ("chiller_chambers", self.chiller_chambers),
            ("extractor_capacity", self.extractor_capacity),
        ] {
            if v == 0 {
                return Err(Error::config(format!("stations.{name}"), "must be at least 1"));
            }
        }
        Ok(())
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::config(format!("axis.{name}"), format!("{v} is not a count")))
            }
        };
        match name {
            "cutting_cycle" => self.cutting_cycle = Duration::Fixed(value),
            "pick_time" => self.pick_time = Duration::Fixed(value),
            "flip_time" => self.flip_time = Duration::Fixed(value),
            "chill_time" => self.chill_time = Duration::Fixed(value),
            "extract_time" => self.extract_time = Duration::Fixed(value),
            "transfer_time" => self.transfer_time = value,
            "chill_batch_capacity" => self.chill_batch_capacity = count(value)?,
            "cutter_capacity" => self.cutter_capacity = count(value)?,
            "robot_capacity" => self.robot_capacity = count(value)?,
            "chiller_chambers" => self.chiller_chambers = count(value)?,
            "extractor_capacity" => self.extractor_capacity = count(value)?,
            _ => return Err(Error::config(format!("axis.{name}"), "unknown station parameter")),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoutingParams {
    /// Send battery-bearing items headed for the low-value bin to manual
    /// inspection instead.
    pub xray_audit: bool,
    /// Share of a host layer's mass that leaves as the battery.
    pub battery_mass_fraction: f64,
}

impl Default for RoutingParams {
    fn default() -> Self {
        RoutingParams {
            xray_audit: false,
            battery_mass_fraction: 0.2,
        }
    }
}

impl RoutingParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.battery_mass_fraction) {
            return Err(Error::config("routing.battery_mass_fraction", "must lie in [0,1]"));
        }
        Ok(())
    }
}
