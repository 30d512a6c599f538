//! Sensitivity grids over economic and station parameters.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::line::{simulate, RunOptions, STATION_FIELDS};
use crate::money::Cents;
use crate::scenario::Scenario;
use crate::tea::{self, ECON_FIELDS};

/// One evaluated grid cell. Simulation columns are present only when a
/// station parameter is swept.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub values: Vec<(String, f64)>,
    pub cost_per_lb: Cents,
    pub profit_per_lb: Cents,
    pub annual_profit: Cents,
    pub annual_profit_unrounded: Cents,
    pub steady_state_throughput_per_hour: Option<f64>,
    pub throughput_per_hour: Option<f64>,
    pub hazard_rate: Option<f64>,
}

/// Parses `name=v1,v2,...`.
pub fn parse_axis(spec: &str) -> Result<(String, Vec<f64>)> {
    let (name, values) = spec
        .split_once('=')
        .ok_or_else(|| Error::config(format!("axis.{spec}"), "expected name=v1,v2,..."))?;
    let name = name.trim().to_string();
    if !STATION_FIELDS.contains(&name.as_str()) && !ECON_FIELDS.contains(&name.as_str()) {
        return Err(Error::config(format!("axis.{name}"), "unknown parameter"));
    }
    let values = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::config(format!("axis.{name}"), format!("`{v}` is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::config(format!("axis.{name}"), "no values"));
    }
    Ok((name, values))
}

/// Evaluates every combination of the axis values (last axis fastest).
/// Station cells simulate replication 0 of the scenario's lot.
pub fn sweep(scn: &Scenario, axes: &[(String, Vec<f64>)]) -> Result<Vec<SweepRow>> {
    if axes.is_empty() {
        return Err(Error::config("axis", "at least one axis is required"));
    }
    let simulate_cells = axes.iter().any(|(n, _)| STATION_FIELDS.contains(&n.as_str()));
    tea::grid(axes)
        .into_par_iter()
        .map(|values| {
            let mut cell = scn.clone();
            for (name, v) in &values {
                cell.set(name, *v)?;
            }
            let e = tea::automated_economics(&cell.economics.assets, &cell.economics.params)?;
            let sim = if simulate_cells {
                Some(simulate(&cell, cell.lot_size, RunOptions::default())?.report)
            } else {
                None
            };
            Ok(SweepRow {
                values,
                cost_per_lb: e.cost_per_lb,
                profit_per_lb: e.profit_per_lb,
                annual_profit: e.annual_profit,
                annual_profit_unrounded: e.annual_profit_unrounded,
                steady_state_throughput_per_hour: sim.as_ref().map(|r| r.steady_state_throughput_per_hour),
                throughput_per_hour: sim.as_ref().map(|r| r.throughput_per_hour),
                hazard_rate: sim.as_ref().map(|r| r.hazard_rate),
            })
        })
        .collect()
}

fn metrics(r: &SweepRow) -> Vec<(&'static str, String)> {
    let mut m = vec![
        ("cost_per_lb", r.cost_per_lb.to_string()),
        ("profit_per_lb", r.profit_per_lb.to_string()),
        ("annual_profit", r.annual_profit.to_string()),
        ("annual_profit_unrounded", r.annual_profit_unrounded.to_string()),
    ];
    if let (Some(s), Some(t), Some(h)) = (r.steady_state_throughput_per_hour, r.throughput_per_hour, r.hazard_rate) {
        m.push(("steady_state_throughput_per_hour", format!("{}", crate::fmt::round_sig(s, 6))));
        m.push(("throughput_per_hour", format!("{}", crate::fmt::round_sig(t, 6))));
        m.push(("hazard_rate", format!("{}", crate::fmt::round_sig(h, 6))));
    }
    m
}

fn write_csv(header: Vec<String>, rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// The grid, one row per cell.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let Some(first) = rows.first() else {
        return write_csv(Vec::new(), Vec::new());
    };
    let mut header: Vec<String> = first.values.iter().map(|(n, _)| n.clone()).collect();
    header.extend(metrics(first).into_iter().map(|(n, _)| n.to_string()));
    let body = rows
        .iter()
        .map(|r| {
            let mut cells: Vec<String> = r.values.iter().map(|(_, v)| format!("{v}")).collect();
            cells.extend(metrics(r).into_iter().map(|(_, v)| v));
            cells
        })
        .collect();
    write_csv(header, body)
}

/// Long-format plot data: x is the first axis, one series per metric and
/// combination of the remaining axes.
pub fn plot_csv(rows: &[SweepRow]) -> Result<String> {
    let header = ["x", "y", "series"].map(String::from).to_vec();
    let mut body = Vec::new();
    for r in rows {
        let Some((_, x)) = r.values.first() else { continue };
        let rest: Vec<String> = r.values[1..].iter().map(|(n, v)| format!("{n}={v}")).collect();
        for (metric, y) in metrics(r) {
            let series = std::iter::once(metric.to_string()).chain(rest.iter().cloned()).collect::<Vec<_>>().join(" ");
            body.push(vec![format!("{x}"), y, series]);
        }
    }
    write_csv(header, body)
}
