//! Self-check of the reproduction targets, as run by `phoneline validate`.
//! Each check lists expected and observed values with the tolerance used.

use nalgebra::{Point3, Rotation3, Vector3};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::des::RngStream;
use crate::error::Result;
use crate::line::{simulate, RunOptions};
use crate::model::{ComponentClass, Family};
use crate::money::Cents;
use crate::perception::{
    average_precision, base_to_pixel, f1, iou_boxes, iou_masks, pixel_to_base, polygon_area, sample_perceived,
    BBox, CameraIntrinsics, ConfusionMatrix, DetectionRecord, Overlap, Polygon, RigidTransform,
};
use crate::scenario::{ConfusionSource, EconomicsConfig, ScenarioConfig};
use crate::tea::{self, AssetLine, Breakeven, EconParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub quantity: String,
    pub expected: String,
    pub observed: String,
    pub tolerance: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub rows: Vec<CheckRow>,
}

impl Check {
    fn new(id: u8, title: &str) -> Self {
        Check {
            id,
            title: title.to_string(),
            passed: true,
            rows: Vec::new(),
        }
    }

    fn row(&mut self, quantity: impl Into<String>, expected: String, observed: String, tolerance: &str, passed: bool) {
        self.passed &= passed;
        self.rows.push(CheckRow {
            quantity: quantity.into(),
            expected,
            observed,
            tolerance: tolerance.to_string(),
            passed,
        });
    }

    fn cents(&mut self, quantity: &str, expected: &str, observed: Cents) {
        let ok = observed.to_string() == expected;
        self.row(quantity, expected.to_string(), observed.to_string(), "0", ok);
    }

    fn close(&mut self, quantity: &str, expected: f64, observed: f64, tol: f64) {
        let ok = (observed - expected).abs() <= tol;
        self.row(quantity, format!("{expected}"), format!("{observed}"), &format!("{tol}"), ok);
    }

    fn at_least(&mut self, quantity: &str, bound: f64, observed: f64) {
        self.row(quantity, format!(">= {bound}"), format!("{observed}"), "-", observed >= bound);
    }

    fn at_most(&mut self, quantity: &str, bound: f64, observed: f64) {
        self.row(quantity, format!("<= {bound}"), format!("{observed}"), "-", observed <= bound);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Validation {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Validation {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One line per check, then the failing rows.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!("[{}] {:>2} {}\n", if c.passed { "PASS" } else { "FAIL" }, c.id, c.title));
            for r in c.rows.iter().filter(|r| !r.passed) {
                s.push_str(&format!(
                    "       {}: expected {}, observed {} (tol {})\n",
                    r.quantity, r.expected, r.observed, r.tolerance
                ));
            }
        }
        s
    }
}

/// Runs every check. `seed` drives the Monte Carlo checks; the economic
/// checks use `econ` (the reference inputs unless a scenario overrides them).
pub fn validate_all(seed: u64, econ: &EconomicsConfig) -> Result<Validation> {
    let (a, p) = (&econ.assets[..], &econ.params);
    let checks = vec![
        table_costs(a, p)?,
        automated(a, p)?,
        manual(p)?,
        unsupervised(a, p)?,
        breakeven(a, p)?,
        metric_oracles()?,
        confusion_sampling(seed)?,
        throughput(seed)?,
        end_to_end(seed)?,
        determinism_and_geometry(seed)?,
    ];
    Ok(Validation {
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

pub fn table_costs(assets: &[AssetLine], p: &EconParams) -> Result<Check> {
    let mut c = Check::new(1, "capital and operating cost table, cents-exact");
    let r = tea::tea_report(assets, p)?;
    let golden: Vec<(&str, String)> = tea::GOLDEN_TABLES[..1].iter().map(|(n, s)| (*n, s.to_string())).collect();
    let mismatches = tea::compare_with_golden(&r, &golden)?;
    c.row("mismatching cells", "0".into(), mismatches.len().to_string(), "0", mismatches.is_empty());
    for m in mismatches {
        c.row(format!("row {} {}", m.row, m.column), m.expected, m.actual, "0", false);
    }
    c.cents("total capital", "83412.00", r.total_capital);
    c.close("total power (W)", 5550.0, r.total_power_w, 0.0);
    c.cents("total maintenance", "1668.24", r.fixed.maintenance);
    c.cents("total energy (unrounded sum)", "2281.71", r.fixed.energy);
    c.cents("sum of truncated energy rows", "2281.68", r.fixed.energy_row_sum);
    Ok(c)
}

pub fn automated(assets: &[AssetLine], p: &EconParams) -> Result<Check> {
    let mut c = Check::new(2, "automated line economics");
    let e = tea::automated_economics(assets, p)?;
    c.row("yearly lbs", "106546.55".into(), e.yearly_lbs.to_string(), "0.01", e.yearly_lbs.to_string() == "106546.55");
    c.cents("revenue", "147034.24", e.revenue);
    c.cents("cost per lb", "0.86", e.cost_per_lb);
    c.cents("profit per lb", "0.52", e.profit_per_lb);
    c.cents("annual profit", "55404.21", e.annual_profit);
    c.cents("annual profit, unrounded", "54913.69", e.annual_profit_unrounded);
    Ok(c)
}

pub fn manual(p: &EconParams) -> Result<Check> {
    let mut c = Check::new(3, "manual baseline economics");
    let e = tea::manual_economics(p)?;
    c.cents("revenue", "7941.90", e.revenue);
    c.cents("cost per lb", "14.60", e.cost_per_lb);
    c.cents("profit per lb", "-13.22", e.profit_per_lb);
    c.cents("annual profit", "-76058.10", e.annual_profit_unrounded);
    Ok(c)
}

pub fn unsupervised(a: &[AssetLine], p: &EconParams) -> Result<Check> {
    let mut c = Check::new(4, "unsupervised operation");
    let fixed = tea::unsupervised_economics(a, p, 3.0, false)?;
    let scaled = tea::unsupervised_economics(a, p, 3.0, true)?;
    c.cents("profit per lb, fixed OPEX", "1.35", fixed.profit_per_lb);
    let v = scaled.profit_per_lb.to_decimal();
    let ok = v >= rust_decimal::Decimal::new(133, 2) && v <= rust_decimal::Decimal::new(134, 2);
    c.row("profit per lb, scaled OPEX", "[1.33, 1.34]".into(), v.to_string(), "-", ok);
    Ok(c)
}

pub fn breakeven(assets: &[AssetLine], p: &EconParams) -> Result<Check> {
    let mut c = Check::new(5, "breakeven labor rate");
    let mut p = p.clone();
    match tea::breakeven_labor_rate(assets, &p)? {
        Breakeven::Rate { usd_per_hour } => {
            let rate: f64 = rust_decimal::prelude::ToPrimitive::to_f64(&usd_per_hour).unwrap_or(f64::NAN);
            c.close("rate (USD/h)", 57.88, rate, 0.005);
            p.labor_rate = rate;
            let profit = tea::exact_annual_profit(assets, &p)?;
            let profit = rust_decimal::prelude::ToPrimitive::to_f64(&profit).unwrap_or(f64::NAN);
            c.close("annual profit at that rate", 0.0, profit, 0.01);
        }
        other => c.row("rate (USD/h)", "57.88".into(), format!("{other:?}"), "-", false),
    }
    Ok(c)
}

/// Polygon pairs with hand-computed intersection areas.
pub fn mask_fixtures() -> Result<Vec<(Polygon, Polygon, f64)>> {
    Ok(vec![
        // offset squares: 25 / 175
        (Polygon::rect(0.0, 0.0, 10.0, 10.0)?, Polygon::rect(5.0, 5.0, 10.0, 10.0)?, 1.0 / 7.0),
        // square inside a right triangle: 100 / 200
        (
            Polygon::new(vec![[0.0, 0.0], [20.0, 0.0], [0.0, 20.0]])?,
            Polygon::rect(0.0, 0.0, 10.0, 10.0)?,
            0.5,
        ),
        // diamond against a square corner: 50 / 250
        (
            Polygon::new(vec![[10.0, 0.0], [20.0, 10.0], [10.0, 20.0], [0.0, 10.0]])?,
            Polygon::rect(10.0, 0.0, 10.0, 10.0)?,
            0.2,
        ),
    ])
}

pub fn metric_oracles() -> Result<Check> {
    let mut c = Check::new(6, "detection metric oracles");
    let iou = iou_boxes(&BBox::new(0.0, 0.0, 2.0, 2.0), &BBox::new(1.0, 1.0, 2.0, 2.0))?;
    c.close("box IoU", 1.0 / 7.0, iou, 1e-12);
    let rec = |conf: f64, x: f64| DetectionRecord::new("s", ComponentClass::MiddleLayer, conf, BBox::new(x, x, 10.0, 10.0));
    let truths = [rec(1.0, 0.0), rec(1.0, 50.0)];
    let preds = [rec(0.9, 0.0), rec(0.8, 100.0), rec(0.7, 50.0)];
    let ap = average_precision(&preds, &truths, ComponentClass::MiddleLayer, 0.5, Overlap::Box)?.unwrap_or(f64::NAN);
    c.close("staircase AP", 0.8333, ap, 1e-4);
    let f = f1(0.988, 0.988);
    c.row("F1(0.988, 0.988)", "0.988".into(), format!("{f}"), "0", f == 0.988);
    for (i, (a, b, exact)) in mask_fixtures()?.iter().enumerate() {
        let area = polygon_area(a.vertices()).min(polygon_area(b.vertices()));
        let got = iou_masks(a, b, 0.1)?;
        c.close(&format!("mask IoU fixture {}", i + 1), *exact, got, 2.0 / area);
    }
    Ok(c)
}

pub fn confusion_sampling(seed: u64) -> Result<Check> {
    let mut c = Check::new(7, "confusion-matrix sampling");
    let m = ConfusionMatrix::reference();
    let n = 100_000u64;
    for (i, &truth) in ComponentClass::DETECTABLE.iter().enumerate() {
        let mut rng = RngStream::new(seed, 0x5eed_0000 + i as u64);
        let mut counts = [0u64; 5];
        for _ in 0..n {
            let k = sample_perceived(truth, &m, &mut rng)?.index().unwrap_or(0);
            counts[k] += 1;
        }
        let diag = counts[i] as f64 / n as f64;
        c.close(&format!("{truth} diagonal"), m.rows()[i][i], diag, 0.005);
        let stat: f64 = counts
            .iter()
            .zip(m.rows()[i].iter())
            .filter(|(_, &p)| p > 0.0)
            .map(|(&o, &p)| {
                let e = p * n as f64;
                (o as f64 - e).powi(2) / e
            })
            .sum();
        let p_value = ChiSquared::new(4.0).map(|d| 1.0 - d.cdf(stat)).unwrap_or(f64::NAN);
        c.row(format!("{truth} chi-square p"), "> 0.001".into(), format!("{p_value:.4}"), "-", p_value > 0.001);
    }
    Ok(c)
}

pub fn throughput(seed: u64) -> Result<Check> {
    let mut c = Check::new(8, "throughput and per-phone sorting time");
    let mut cfg = ScenarioConfig::default();
    cfg.perception.confusion = ConfusionSource::Identity;
    cfg.seed = seed;
    let scn = cfg.resolve()?;
    let out = simulate(&scn, 200, RunOptions::default())?;
    let r = &out.report;
    c.at_least("steady-state phones/h", 120.0, r.steady_state_throughput_per_hour);
    for family in [Family::AndroidLike, Family::IphoneLike] {
        let times: Vec<f64> = out.phones.iter().filter(|p| p.family == family).map(|p| p.sort_time).collect();
        let expected = if family == Family::AndroidLike { 28.0 } else { 27.0 };
        let max = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = times.iter().copied().fold(f64::INFINITY, f64::min);
        c.close(&format!("{} sort time max (s)", family.name()), expected, max, 0.0);
        c.close(&format!("{} sort time min (s)", family.name()), expected, min, 0.0);
        c.at_most(&format!("{} sort time (s)", family.name()), 30.0, max);
    }
    c.row("bottleneck", "cutter".into(), r.bottleneck.clone(), "-", r.bottleneck == "cutter");
    Ok(c)
}

pub fn end_to_end(seed: u64) -> Result<Check> {
    let mut c = Check::new(9, "end-to-end success and hazard rate");
    let mut cfg = ScenarioConfig::default();
    let android: Vec<String> = cfg.models.iter().filter(|m| m.family == Family::AndroidLike).map(|m| m.id.clone()).collect();
    cfg.mix = android.iter().map(|id| (id.clone(), 1.0 / android.len() as f64)).collect();
    // equal thirds need not sum to 1 exactly in binary
    let total: f64 = cfg.mix.values().sum();
    if let Some(v) = cfg.mix.values_mut().next() {
        *v += 1.0 - total;
    }
    cfg.seed = seed;
    let scn = cfg.resolve()?;
    let n = 10_000u64;
    let r = simulate(&scn, n, RunOptions::default())?.report;
    let d = scn.confusion.rows()[1][1];
    c.close("all-components-correct rate", d.powi(4), r.per_phone_success_rate, 0.01);
    // a middle layer read as any of the three low-value classes
    let p: f64 = [0, 2, 3].iter().map(|&k| scn.confusion.rows()[1][k]).sum();
    let sd = (p * (1.0 - p) / n as f64).sqrt();
    c.close("hazard rate per phone", p, r.hazard_rate, 3.0 * sd);
    Ok(c)
}

pub fn determinism_and_geometry(seed: u64) -> Result<Check> {
    let mut c = Check::new(10, "determinism and pick-point geometry");
    let mut identical = 0;
    for k in 0..100u64 {
        let mut cfg = ScenarioConfig::default();
        cfg.seed = seed.wrapping_add(k);
        let scn = cfg.resolve()?;
        let a = simulate(&scn, 20, RunOptions::default())?.report.to_json()?;
        let b = simulate(&scn, 20, RunOptions::default())?.report.to_json()?;
        identical += usize::from(a == b);
    }
    c.row("identical report pairs", "100".into(), identical.to_string(), "0", identical == 100);
    let worst = worst_round_trip(seed, 1000)?;
    c.row("pixel round-trip error (px)", "< 1e-6".into(), format!("{worst:e}"), "-", worst < 1e-6);
    Ok(c)
}

/// Largest pixel error of pixel → base → pixel over random cameras and poses.
pub fn worst_round_trip(seed: u64, samples: u64) -> Result<f64> {
    let mut rng = RngStream::new(seed, 0x6e0_0000);
    let mut u = || rng.draw_uniform();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let k = CameraIntrinsics::new(500.0 + 1500.0 * u(), 500.0 + 1500.0 * u(), 800.0 + 300.0 * u(), 400.0 + 300.0 * u())?;
        let axis = Vector3::new(u() - 0.5, u() - 0.5, u() - 0.5) * 2.0 * std::f64::consts::PI;
        let rot = Rotation3::from_scaled_axis(axis).into_inner();
        let t = RigidTransform::new(rot, Vector3::new(u() - 0.5, u() - 0.5, u() - 0.5))?;
        let (px, py, depth) = (u() * 1919.0, u() * 1079.0, 0.2 + 1.5 * u());
        let p: Point3<f64> = pixel_to_base(px, py, depth, &k, &t)?;
        let (bu, bv, _) = base_to_pixel(&p, &k, &t)?;
        worst = worst.max((bu - px).abs().max((bv - py).abs()));
    }
    Ok(worst)
}
