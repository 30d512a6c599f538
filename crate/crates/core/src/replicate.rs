//! Independent replications run in parallel and reduced in replication order.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::fmt::sig6;
use crate::line::{simulate, RunOptions, SimReport};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSd {
    #[serde(serialize_with = "sig6")]
    pub mean: f64,
    /// Sample standard deviation; zero for a single replication.
    #[serde(serialize_with = "sig6")]
    pub sd: f64,
}

impl MeanSd {
    pub fn of(xs: &[f64]) -> MeanSd {
        let n = xs.len() as f64;
        if xs.is_empty() {
            return MeanSd { mean: 0.0, sd: 0.0 };
        }
        let mean = xs.iter().sum::<f64>() / n;
        let sd = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MeanSd { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub replications: u64,
    pub phones: u64,
    pub throughput_per_hour: MeanSd,
    pub steady_state_throughput_per_hour: MeanSd,
    pub hazard_rate: MeanSd,
    pub per_phone_success_rate: MeanSd,
    pub component_accuracy: MeanSd,
    pub hazard_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Replications {
    pub aggregate: Aggregate,
    pub runs: Vec<SimReport>,
}

/// Runs `scn.replications` replications of `scn.lot_size` phones.
pub fn replicate(scn: &Scenario) -> Result<Replications> {
    let runs = (0..scn.replications)
        .into_par_iter()
        .map(|rep| simulate(scn, scn.lot_size, RunOptions { replication: rep, trace: false }).map(|o| o.report))
        .collect::<Result<Vec<_>>>()?;
    Ok(Replications {
        aggregate: aggregate(&runs),
        runs,
    })
}

pub fn aggregate(runs: &[SimReport]) -> Aggregate {
    let col = |f: fn(&SimReport) -> f64| MeanSd::of(&runs.iter().map(f).collect::<Vec<_>>());
    Aggregate {
        replications: runs.len() as u64,
        phones: runs.iter().map(|r| r.phones_in).sum(),
        throughput_per_hour: col(|r| r.throughput_per_hour),
        steady_state_throughput_per_hour: col(|r| r.steady_state_throughput_per_hour),
        hazard_rate: col(|r| r.hazard_rate),
        per_phone_success_rate: col(|r| r.per_phone_success_rate),
        component_accuracy: col(|r| r.component_accuracy),
        hazard_count: runs.iter().map(|r| r.hazard_count).sum(),
    }
}

/// Hazard log of every replication, tagged with its index.
pub fn hazards_csv(runs: &[SimReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["replication", "time", "uid", "phone", "description"])?;
    for r in runs {
        for h in &r.hazards.0 {
            w.write_record([
                r.replication.to_string(),
                format!("{}", h.time),
                h.uid.to_string(),
                h.phone.to_string(),
                h.description.clone(),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_sd() {
        let m = MeanSd::of(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m.mean, 5.0);
        // sample variance 32/7
        assert!((m.sd - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(MeanSd::of(&[3.0]).sd, 0.0);
    }
}
