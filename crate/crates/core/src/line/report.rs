use std::collections::BTreeMap;

use serde::Serialize;

use crate::des::EventKind;
use crate::error::Result;
use crate::fmt::sig6;
use crate::model::{Bin, Family};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct BinEntry {
    pub count: u64,
    #[serde(serialize_with = "sig6")]
    pub mass_lb: f64,
}

/// Item counts and masses per output bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BinTally(pub BTreeMap<Bin, BinEntry>);

impl Default for BinTally {
    fn default() -> Self {
        BinTally(Bin::ALL.iter().map(|&b| (b, BinEntry::default())).collect())
    }
}

impl BinTally {
    pub fn deposit(&mut self, bin: Bin, mass_lb: f64) {
        let e = self.0.entry(bin).or_default();
        e.count += 1;
        e.mass_lb += mass_lb;
    }

    pub fn get(&self, bin: Bin) -> BinEntry {
        self.0.get(&bin).copied().unwrap_or_default()
    }

    pub fn total_mass(&self) -> f64 {
        self.0.values().map(|e| e.mass_lb).sum()
    }

    pub fn total_count(&self) -> u64 {
        self.0.values().map(|e| e.count).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HazardEntry {
    #[serde(serialize_with = "sig6")]
    pub time: f64,
    pub uid: u64,
    pub phone: u64,
    pub description: String,
}

/// Battery-bearing items that went somewhere unsafe.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct HazardLog(pub Vec<HazardEntry>);

impl HazardLog {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["time", "uid", "phone", "description"])?;
        for h in &self.0 {
            w.write_record([format!("{}", h.time), h.uid.to_string(), h.phone.to_string(), h.description.clone()])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationStats {
    pub name: String,
    pub capacity: usize,
    #[serde(serialize_with = "sig6")]
    pub busy_time_s: f64,
    #[serde(serialize_with = "sig6")]
    pub utilization: f64,
    pub jobs: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpanStats {
    pub n: u64,
    #[serde(serialize_with = "sig6")]
    pub min: f64,
    #[serde(serialize_with = "sig6")]
    pub mean: f64,
    #[serde(serialize_with = "sig6")]
    pub max: f64,
}

impl SpanStats {
    pub fn of(xs: &[f64]) -> Option<SpanStats> {
        if xs.is_empty() {
            return None;
        }
        Some(SpanStats {
            n: xs.len() as u64,
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            mean: xs.iter().sum::<f64>() / xs.len() as f64,
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// Summary statistics of one replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub replication: u64,
    pub seed: u64,
    pub phones_in: u64,
    pub phones_done: u64,
    pub items_created: u64,
    #[serde(serialize_with = "sig6")]
    pub makespan_s: f64,
    /// phones_done × 3600 / makespan, fill and drain included.
    #[serde(serialize_with = "sig6")]
    pub throughput_per_hour: f64,
    /// Long-run rate set by the busiest station: 3600 × phones / max(busy / capacity).
    #[serde(serialize_with = "sig6")]
    pub steady_state_throughput_per_hour: f64,
    pub bottleneck: String,
    pub stations: Vec<StationStats>,
    pub bins: BinTally,
    #[serde(serialize_with = "sig6")]
    pub input_mass_lb: f64,
    #[serde(serialize_with = "sig6")]
    pub binned_mass_lb: f64,
    pub hazard_count: u64,
    #[serde(serialize_with = "sig6")]
    pub hazard_rate: f64,
    #[serde(serialize_with = "sig6")]
    pub component_accuracy: f64,
    pub phones_all_correct: u64,
    #[serde(serialize_with = "sig6")]
    pub per_phone_success_rate: f64,
    pub rescans: u64,
    pub manual_exceptions: u64,
    pub extraction_discrepancies: u64,
    pub audit_intercepts: u64,
    pub chill_batches: u64,
    /// Robot time spent per phone, by family.
    pub sort_time_s: BTreeMap<String, SpanStats>,
    pub hazards: HazardLog,
}

impl SimReport {
    pub fn station(&self, name: &str) -> Option<&StationStats> {
        self.stations.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// One line of the optional event trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub time: f64,
    pub seq: u64,
    pub kind: EventKind,
    pub uid: u64,
    pub station: String,
}

pub fn trace_csv(trace: &[TraceRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["time", "seq", "kind", "uid", "station"])?;
    for r in trace {
        w.write_record([format!("{}", r.time), r.seq.to_string(), r.kind.name().to_string(), r.uid.to_string(), r.station.clone()])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8"))
}

/// Per-phone timeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhoneLog {
    pub uid: u64,
    pub model: String,
    pub family: Family,
    pub cut_done: f64,
    pub sort_start: f64,
    pub sort_end: f64,
    /// Robot busy time attributed to this phone.
    pub sort_time: f64,
    pub done_at: f64,
    pub all_correct: bool,
    pub hazards: u64,
}

/// Everything a run produces; `report` is what gets serialized.
#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub report: SimReport,
    pub trace: Vec<TraceRecord>,
    pub phones: Vec<PhoneLog>,
}

impl SimOutcome {
    pub fn trace_csv(&self) -> Result<String> {
        trace_csv(&self.trace)
    }
}
