//! Techno-economic assessment: per-asset energy and maintenance, straight-line
//! CAPEX, the automated/manual/unsupervised comparisons, sensitivity grids
//! and the breakeven labor rate.
//!
//! Rounding pipeline: quantities are exact decimals until displayed. Row
//! energy and maintenance are truncated to cents; the energy total is the
//! truncated unrounded sum; per-lb figures are rounded half-up to cents before
//! profit per lb is formed.

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model;
use crate::money::{dec, round2, Cents};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetLine {
    pub name: String,
    /// Serialized in USD.
    #[serde(rename = "capital_usd")]
    pub capital: Cents,
    pub power_w: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maintenance_rate: Option<f64>,
}

impl AssetLine {
    pub fn new(name: &str, capital_usd: i64, power_w: f64) -> Self {
        AssetLine {
            name: name.to_string(),
            capital: Cents(capital_usd * 100),
            power_w,
            maintenance_rate: None,
        }
    }
}

/// The eleven equipment rows of the reference line.
pub fn reference_assets() -> Vec<AssetLine> {
    [
        ("Structural Equipment", 10_000, 500.0),
        ("Compressor", 820, 1050.0),
        ("Stepper Motors", 1000, 1050.0),
        ("Chiller", 25_000, 200.0),
        ("Cutting System", 5500, 2400.0),
        ("Working Area", 1000, 0.0),
        ("Battery Remover", 2000, 0.0),
        ("Gripper", 3700, 0.0),
        ("UR5e", 31_062, 200.0),
        ("Computer", 2996, 100.0),
        ("Camera", 334, 50.0),
    ]
    .into_iter()
    .map(|(n, c, w)| AssetLine::new(n, c, w))
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EconParams {
    /// USD/kWh. Implied by every powered row: energy / (kW × 2400 h).
    pub electricity_rate: f64,
    pub hours_per_day: f64,
    pub days_per_year: f64,
    pub amortization_years: f64,
    /// Fraction of capital per year.
    pub maintenance_rate: f64,
    /// USD/h per operator.
    pub labor_rate: f64,
    pub operators: f64,
    pub revenue_per_lb: f64,
    pub phone_mass: f64,
    pub auto_phones_per_hour: f64,
    pub manual_minutes_per_phone: f64,
    /// As printed; 60/9.6 would give 6.25.
    pub manual_phones_per_hour: f64,
    pub manual_yearly_lbs: f64,
    pub unsupervised_multiplier: f64,
    /// Scale energy and maintenance with the unsupervised duty cycle.
    pub scale_opex_unsupervised: bool,
}

impl Default for EconParams {
    fn default() -> Self {
        EconParams {
            electricity_rate: 0.1713,
            hours_per_day: model::HOURS_PER_DAY,
            days_per_year: model::DAYS_PER_YEAR,
            amortization_years: 20.0,
            maintenance_rate: 0.02,
            labor_rate: 35.0,
            operators: 1.0,
            revenue_per_lb: 1.38,
            phone_mass: model::default_phone_mass(),
            auto_phones_per_hour: model::AUTO_PHONES_PER_HOUR,
            manual_minutes_per_phone: 9.6,
            manual_phones_per_hour: model::MANUAL_PHONES_PER_HOUR,
            manual_yearly_lbs: model::MANUAL_YEARLY_LBS,
            unsupervised_multiplier: 3.0,
            scale_opex_unsupervised: false,
        }
    }
}

/// Names accepted by [`EconParams::set`] and sweep axes.
pub const ECON_FIELDS: [&str; 14] = [
    "electricity_rate",
    "hours_per_day",
    "days_per_year",
    "amortization_years",
    "maintenance_rate",
    "labor_rate",
    "operators",
    "revenue_per_lb",
    "phone_mass",
    "auto_phones_per_hour",
    "manual_minutes_per_phone",
    "manual_phones_per_hour",
    "manual_yearly_lbs",
    "unsupervised_multiplier",
];

impl EconParams {
    pub fn validate(&self) -> Result<()> {
        for name in ECON_FIELDS {
            let v = self.get(name).expect("listed field");
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(format!("economics.params.{name}"), format!("{v} must be a non-negative number")));
            }
        }
        if self.hours_per_day > 24.0 {
            return Err(Error::config("economics.params.hours_per_day", "more than 24 hours a day"));
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "electricity_rate" => self.electricity_rate,
            "hours_per_day" => self.hours_per_day,
            "days_per_year" => self.days_per_year,
            "amortization_years" => self.amortization_years,
            "maintenance_rate" => self.maintenance_rate,
            "labor_rate" => self.labor_rate,
            "operators" => self.operators,
            "revenue_per_lb" => self.revenue_per_lb,
            "phone_mass" => self.phone_mass,
            "auto_phones_per_hour" => self.auto_phones_per_hour,
            "manual_minutes_per_phone" => self.manual_minutes_per_phone,
            "manual_phones_per_hour" => self.manual_phones_per_hour,
            "manual_yearly_lbs" => self.manual_yearly_lbs,
            "unsupervised_multiplier" => self.unsupervised_multiplier,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "electricity_rate" => &mut self.electricity_rate,
            "hours_per_day" => &mut self.hours_per_day,
            "days_per_year" => &mut self.days_per_year,
            "amortization_years" => &mut self.amortization_years,
            "maintenance_rate" => &mut self.maintenance_rate,
            "labor_rate" => &mut self.labor_rate,
            "operators" => &mut self.operators,
            "revenue_per_lb" => &mut self.revenue_per_lb,
            "phone_mass" => &mut self.phone_mass,
            "auto_phones_per_hour" => &mut self.auto_phones_per_hour,
            "manual_minutes_per_phone" => &mut self.manual_minutes_per_phone,
            "manual_phones_per_hour" => &mut self.manual_phones_per_hour,
            "manual_yearly_lbs" => &mut self.manual_yearly_lbs,
            "unsupervised_multiplier" => &mut self.unsupervised_multiplier,
            _ => return Err(Error::config(format!("axis.{name}"), "unknown economic parameter")),
        };
        *slot = value;
        Ok(())
    }

    fn operating_hours(&self) -> Decimal {
        dec(self.hours_per_day) * dec(self.days_per_year)
    }
}

/// Yearly energy cost of one asset, unrounded.
pub fn energy_cost_exact(a: &AssetLine, p: &EconParams) -> Decimal {
    dec(a.power_w) / Decimal::ONE_THOUSAND * p.operating_hours() * dec(p.electricity_rate)
}

/// Yearly energy cost of one asset as displayed (truncated to cents).
pub fn energy_cost(a: &AssetLine, p: &EconParams) -> Cents {
    Cents::truncate(energy_cost_exact(a, p))
}

pub fn maintenance_cost_exact(a: &AssetLine, p: &EconParams) -> Decimal {
    dec(a.maintenance_rate.unwrap_or(p.maintenance_rate)) * a.capital.to_decimal()
}

pub fn maintenance_cost(a: &AssetLine, p: &EconParams) -> Cents {
    Cents::truncate(maintenance_cost_exact(a, p))
}

pub fn annual_capex_exact(assets: &[AssetLine], p: &EconParams) -> Result<Decimal> {
    if !(p.amortization_years > 0.0) {
        return Err(Error::Undefined("amortization period is zero"));
    }
    let capital: Cents = assets.iter().map(|a| a.capital).sum();
    Ok(capital.to_decimal() / dec(p.amortization_years))
}

/// Straight-line capital charge per year, no discounting.
pub fn annual_capex(assets: &[AssetLine], p: &EconParams) -> Result<Cents> {
    Ok(Cents::round(annual_capex_exact(assets, p)?))
}

/// Cost lines shared by every scenario, exact and as displayed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedCosts {
    pub capex: Cents,
    /// Truncation of the unrounded row sum.
    pub energy: Cents,
    /// Sum of the truncated rows (differs from `energy` by a few cents).
    pub energy_row_sum: Cents,
    pub maintenance: Cents,
    #[serde(skip)]
    pub capex_exact: Decimal,
    #[serde(skip)]
    pub energy_exact: Decimal,
    #[serde(skip)]
    pub maintenance_exact: Decimal,
}

impl FixedCosts {
    pub fn compute(assets: &[AssetLine], p: &EconParams) -> Result<Self> {
        let capex_exact = annual_capex_exact(assets, p)?;
        let energy_exact: Decimal = assets.iter().map(|a| energy_cost_exact(a, p)).sum();
        let maintenance_exact: Decimal = assets.iter().map(|a| maintenance_cost_exact(a, p)).sum();
        Ok(FixedCosts {
            capex: Cents::round(capex_exact),
            energy: Cents::truncate(energy_exact),
            energy_row_sum: assets.iter().map(|a| energy_cost(a, p)).sum(),
            maintenance: Cents::truncate(maintenance_exact),
            capex_exact,
            energy_exact,
            maintenance_exact,
        })
    }

    pub fn total(&self) -> Cents {
        self.capex + self.energy + self.maintenance
    }
}

/// One row of the annual and per-lb comparisons.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Economics {
    pub phones_per_hour: f64,
    /// Rounded to 0.01 lb.
    pub yearly_lbs: Decimal,
    pub revenue: Cents,
    pub labor: Cents,
    pub total_cost: Cents,
    pub cost_per_lb: Cents,
    pub revenue_per_lb: Cents,
    pub profit_per_lb: Cents,
    /// Rounded profit per lb times yearly lbs.
    pub annual_profit: Cents,
    /// Revenue minus total cost.
    pub annual_profit_unrounded: Cents,
}

fn economics(phones_per_hour: f64, lbs: Decimal, revenue_per_lb: f64, total_cost: Cents, labor: Cents) -> Result<Economics> {
    if lbs <= Decimal::ZERO {
        return Err(Error::Undefined("yearly throughput is zero"));
    }
    let revenue = Cents::round(dec(revenue_per_lb) * lbs);
    let cost_per_lb = Cents::round(total_cost.to_decimal() / lbs);
    let revenue_per_lb = Cents::round(dec(revenue_per_lb));
    let profit_per_lb = revenue_per_lb - cost_per_lb;
    Ok(Economics {
        phones_per_hour,
        yearly_lbs: round2(lbs),
        revenue,
        labor,
        total_cost,
        cost_per_lb,
        revenue_per_lb,
        profit_per_lb,
        annual_profit: Cents::round(profit_per_lb.to_decimal() * lbs),
        annual_profit_unrounded: revenue - total_cost,
    })
}

fn automated_lbs(p: &EconParams) -> Decimal {
    dec(p.auto_phones_per_hour) * p.operating_hours() * dec(p.phone_mass)
}

fn labor_exact(p: &EconParams) -> Decimal {
    dec(p.labor_rate) * p.operating_hours() * dec(p.operators)
}

/// The automated line with one supervising operator.
pub fn automated_economics(assets: &[AssetLine], p: &EconParams) -> Result<Economics> {
    let fixed = FixedCosts::compute(assets, p)?;
    let labor = Cents::round(labor_exact(p));
    economics(p.auto_phones_per_hour, automated_lbs(p), p.revenue_per_lb, fixed.total() + labor, labor)
}

/// Manual disassembly: labor is the only cost.
pub fn manual_economics(p: &EconParams) -> Result<Economics> {
    let labor = Cents::round(labor_exact(p));
    economics(p.manual_phones_per_hour, dec(p.manual_yearly_lbs), p.revenue_per_lb, labor, labor)
}

/// Annual profit of the automated line with no rounding anywhere.
pub fn exact_annual_profit(assets: &[AssetLine], p: &EconParams) -> Result<Decimal> {
    let fixed = FixedCosts::compute(assets, p)?;
    let revenue = dec(p.revenue_per_lb) * automated_lbs(p);
    Ok(revenue - fixed.capex_exact - fixed.energy_exact - fixed.maintenance_exact - labor_exact(p))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Unsupervised {
    pub multiplier: f64,
    pub scaled_opex: bool,
    pub yearly_lbs: Decimal,
    pub cost_per_lb: Cents,
    pub profit_per_lb: Cents,
    pub profit_per_lb_unrounded: f64,
}

/// No operator, throughput × `multiplier`. Energy and maintenance stay fixed
/// unless `scale_opex`, in which case they scale with the multiplier.
pub fn unsupervised_economics(
    assets: &[AssetLine],
    p: &EconParams,
    multiplier: f64,
    scale_opex: bool,
) -> Result<Unsupervised> {
    if !(multiplier > 0.0) {
        return Err(Error::config("economics.params.unsupervised_multiplier", "must be positive"));
    }
    let fixed = FixedCosts::compute(assets, p)?;
    let lbs = automated_lbs(p) * dec(multiplier);
    if lbs <= Decimal::ZERO {
        return Err(Error::Undefined("yearly throughput is zero"));
    }
    let opex_scale = if scale_opex { dec(multiplier) } else { Decimal::ONE };
    let cost = fixed.capex.to_decimal() + (fixed.energy + fixed.maintenance).to_decimal() * opex_scale;
    let cost_exact = fixed.capex_exact + (fixed.energy_exact + fixed.maintenance_exact) * opex_scale;
    let cost_per_lb = Cents::round(cost / lbs);
    let profit_per_lb = Cents::round(dec(p.revenue_per_lb)) - cost_per_lb;
    let unrounded = dec(p.revenue_per_lb) - cost_exact / lbs;
    Ok(Unsupervised {
        multiplier,
        scaled_opex: scale_opex,
        yearly_lbs: round2(lbs),
        cost_per_lb,
        profit_per_lb,
        profit_per_lb_unrounded: rust_decimal::prelude::ToPrimitive::to_f64(&unrounded).unwrap_or(f64::NAN),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Breakeven {
    /// Labor rate (USD/h) at which the unrounded annual profit is zero.
    Rate { usd_per_hour: Decimal },
    /// Profitable at any labor rate (no labor hours are charged).
    AlwaysProfitable,
    /// Unprofitable even with free labor; `root` is the negative solution if one exists.
    NeverProfitable { root: Option<Decimal> },
}

pub fn breakeven_labor_rate(assets: &[AssetLine], p: &EconParams) -> Result<Breakeven> {
    if !(p.auto_phones_per_hour * p.phone_mass > 0.0) {
        return Err(Error::Undefined("yearly throughput is zero"));
    }
    let mut free = p.clone();
    free.labor_rate = 0.0;
    let margin = exact_annual_profit(assets, &free)?;
    let labor_hours = p.operating_hours() * dec(p.operators);
    if labor_hours.is_zero() {
        return Ok(if margin > Decimal::ZERO {
            Breakeven::AlwaysProfitable
        } else {
            Breakeven::NeverProfitable { root: None }
        });
    }
    let root = margin / labor_hours;
    Ok(if root < Decimal::ZERO {
        Breakeven::NeverProfitable { root: Some(root) }
    } else {
        Breakeven::Rate { usd_per_hour: root }
    })
}

/// Asset row as shown in the capital/operating cost table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssetRow {
    pub name: String,
    pub capital: Cents,
    pub power_w: f64,
    pub energy: Cents,
    pub maintenance: Cents,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeaReport {
    pub assets: Vec<AssetRow>,
    pub total_capital: Cents,
    pub total_power_w: f64,
    pub fixed: FixedCosts,
    pub automated: Economics,
    pub manual: Economics,
    pub unsupervised: Unsupervised,
    /// The other duty-cycle convention, reported for comparison.
    pub unsupervised_alt: Unsupervised,
    pub breakeven: Breakeven,
}

pub fn tea_report(assets: &[AssetLine], p: &EconParams) -> Result<TeaReport> {
    p.validate()?;
    let rows = assets
        .iter()
        .map(|a| AssetRow {
            name: a.name.clone(),
            capital: a.capital,
            power_w: a.power_w,
            energy: energy_cost(a, p),
            maintenance: maintenance_cost(a, p),
        })
        .collect();
    let m = p.unsupervised_multiplier;
    Ok(TeaReport {
        assets: rows,
        total_capital: assets.iter().map(|a| a.capital).sum(),
        total_power_w: assets.iter().map(|a| a.power_w).sum(),
        fixed: FixedCosts::compute(assets, p)?,
        automated: automated_economics(assets, p)?,
        manual: manual_economics(p)?,
        unsupervised: unsupervised_economics(assets, p, m, p.scale_opex_unsupervised)?,
        unsupervised_alt: unsupervised_economics(assets, p, m, !p.scale_opex_unsupervised)?,
        breakeven: breakeven_labor_rate(assets, p)?,
    })
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// File names of the three table mirrors, in order.
pub const TABLE_FILES: [&str; 3] = ["table1_capex_opex.csv", "table1_annual.csv", "table1_per_lb.csv"];

impl TeaReport {
    /// CSV mirrors of the three economic tables, keyed by [`TABLE_FILES`].
    /// Costs in the per-lb table carry a negative sign, as in the source table.
    /// The manual row's annual profit is revenue minus cost; the automated
    /// row's is the rounded per-lb profit times yearly lbs.
    pub fn tables(&self) -> Result<Vec<(&'static str, String)>> {
        let mut capex_rows: Vec<Vec<String>> = self
            .assets
            .iter()
            .map(|r| {
                vec![
                    r.name.clone(),
                    r.capital.to_string(),
                    num(r.power_w),
                    r.energy.to_string(),
                    r.maintenance.to_string(),
                ]
            })
            .collect();
        capex_rows.push(vec![
            "Total".into(),
            self.total_capital.to_string(),
            num(self.total_power_w),
            self.fixed.energy.to_string(),
            self.fixed.maintenance.to_string(),
        ]);
        let capex = csv_string(
            &["category", "capital_usd", "power_w", "energy_usd_per_year", "maintenance_usd_per_year"],
            capex_rows,
        )?;
        let (a, m) = (&self.automated, &self.manual);
        let annual = csv_string(
            &["category", "hourly_throughput_pcs", "yearly_throughput_lbs", "total_revenue_usd", "total_profit_usd"],
            vec![
                vec![
                    "Proposed System".into(),
                    num(a.phones_per_hour),
                    a.yearly_lbs.to_string(),
                    a.revenue.to_string(),
                    a.annual_profit.to_string(),
                ],
                vec![
                    "Traditional Process".into(),
                    num(m.phones_per_hour),
                    m.yearly_lbs.to_string(),
                    m.revenue.to_string(),
                    m.annual_profit_unrounded.to_string(),
                ],
            ],
        )?;
        let per_lb = csv_string(
            &[
                "category",
                "cost_usd_per_lb",
                "revenue_usd_per_lb",
                "profit_supervised_usd_per_lb",
                "profit_unsupervised_usd_per_lb",
            ],
            vec![
                vec![
                    "Proposed System".into(),
                    (-a.cost_per_lb).to_string(),
                    a.revenue_per_lb.to_string(),
                    a.profit_per_lb.to_string(),
                    self.unsupervised.profit_per_lb.to_string(),
                ],
                vec![
                    "Traditional Process".into(),
                    (-m.cost_per_lb).to_string(),
                    m.revenue_per_lb.to_string(),
                    m.profit_per_lb.to_string(),
                    String::new(),
                ],
            ],
        )?;
        Ok(vec![(TABLE_FILES[0], capex), (TABLE_FILES[1], annual), (TABLE_FILES[2], per_lb)])
    }
}

/// One differing cell between a produced table and its golden copy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellMismatch {
    pub table: String,
    pub row: usize,
    pub column: String,
    pub expected: String,
    pub actual: String,
}

/// Parses a table cell: `(x)` is negative, thousands separators are
/// ignored, and `N/A` or an empty cell is "no value".
fn parse_cell(s: &str) -> std::result::Result<Option<Decimal>, String> {
    use std::str::FromStr;
    let t = s.trim().replace(',', "");
    if t.is_empty() || t.eq_ignore_ascii_case("n/a") {
        return Ok(None);
    }
    let (neg, body) = match t.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        Some(inner) => (true, inner.to_string()),
        None => (false, t.clone()),
    };
    let v = Decimal::from_str(&body).map_err(|e| format!("{s}: {e}"))?;
    Ok(Some(if neg { -v } else { v }))
}

/// Cell-by-cell comparison. Numeric cells must be equal as decimals, text
/// cells must match exactly.
pub fn compare_table(name: &str, golden: &str, actual: &str) -> Result<Vec<CellMismatch>> {
    let read = |s: &str| -> Result<Vec<csv::StringRecord>> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(s.as_bytes());
        r.records().collect::<std::result::Result<_, _>>().map_err(Error::from)
    };
    let (g, a) = (read(golden)?, read(actual)?);
    let header: Vec<String> = g.first().map(|h| h.iter().map(String::from).collect()).unwrap_or_default();
    let mut out = Vec::new();
    for row in 0..g.len().max(a.len()) {
        let cols = g.get(row).map_or(0, |r| r.len()).max(a.get(row).map_or(0, |r| r.len()));
        for col in 0..cols {
            let ge = g.get(row).and_then(|r| r.get(col)).unwrap_or("");
            let ac = a.get(row).and_then(|r| r.get(col)).unwrap_or("");
            let same = if row == 0 || col == 0 {
                ge.trim() == ac.trim()
            } else {
                match (parse_cell(ge), parse_cell(ac)) {
                    (Ok(x), Ok(y)) => x == y,
                    _ => false,
                }
            };
            if !same {
                out.push(CellMismatch {
                    table: name.to_string(),
                    row,
                    column: header.get(col).cloned().unwrap_or_else(|| col.to_string()),
                    expected: ge.to_string(),
                    actual: ac.to_string(),
                });
            }
        }
    }
    Ok(out)
}

/// Golden copies of the three tables as printed in the source publication.
pub const GOLDEN_TABLES: [(&str, &str); 3] = [
    (TABLE_FILES[0], include_str!("../golden/table1_capex_opex.csv")),
    (TABLE_FILES[1], include_str!("../golden/table1_annual.csv")),
    (TABLE_FILES[2], include_str!("../golden/table1_per_lb.csv")),
];

/// Compares a report against golden tables given as (file name, contents).
pub fn compare_with_golden(report: &TeaReport, golden: &[(&str, String)]) -> Result<Vec<CellMismatch>> {
    let tables = report.tables()?;
    let mut out = Vec::new();
    for (name, contents) in golden {
        let ours = tables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_str())
            .unwrap_or("");
        out.extend(compare_table(name, contents, ours)?);
    }
    Ok(out)
}

/// Every combination of the axis values (last axis varies fastest).
pub fn grid(axes: &[(String, Vec<f64>)]) -> Vec<Vec<(String, f64)>> {
    axes.iter().fold(vec![Vec::new()], |acc, (name, values)| {
        acc.into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut row = prefix.clone();
                    row.push((name.clone(), *v));
                    row
                })
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> EconParams {
        EconParams::default()
    }

    #[test]
    fn energy_rows() {
        let p = p();
        assert_eq!(energy_cost(&AssetLine::new("s", 10_000, 500.0), &p), Cents(20556));
        assert_eq!(energy_cost(&AssetLine::new("c", 5500, 2400.0), &p), Cents(98668));
        assert_eq!(energy_cost(&AssetLine::new("w", 1000, 0.0), &p), Cents(0));
        let fixed = FixedCosts::compute(&reference_assets(), &p).unwrap();
        assert_eq!(fixed.energy, Cents(228171));
        assert_eq!(fixed.energy_row_sum, Cents(228168));
        assert_eq!(fixed.energy_exact, dec(2281.716));
    }

    #[test]
    fn maintenance_rows() {
        let p = p();
        assert_eq!(maintenance_cost(&AssetLine::new("u", 31_062, 200.0), &p), Cents(62124));
        assert_eq!(maintenance_cost(&AssetLine::new("c", 334, 50.0), &p), Cents(668));
        let mut a = AssetLine::new("o", 1000, 0.0);
        a.maintenance_rate = Some(0.05);
        assert_eq!(maintenance_cost(&a, &p), Cents(5000));
    }

    #[test]
    fn capex() {
        let p = p();
        assert_eq!(annual_capex(&reference_assets(), &p).unwrap(), Cents(417060));
        assert_eq!(annual_capex(&[AssetLine::new("x", 100, 0.0)], &p).unwrap(), Cents(500));
        assert_eq!(annual_capex(&[], &p).unwrap(), Cents::ZERO);
        let mut z = p.clone();
        z.amortization_years = 0.0;
        assert!(annual_capex(&[], &z).is_err());
    }

    #[test]
    fn manual_row() {
        let m = manual_economics(&p()).unwrap();
        assert_eq!(m.revenue, Cents(794190));
        assert_eq!(m.cost_per_lb, Cents(1460));
        assert_eq!(m.profit_per_lb, Cents(-1322));
        assert_eq!(m.annual_profit_unrounded, Cents(-7605810));
    }

    #[test]
    fn zero_throughput_errors() {
        let mut q = p();
        q.auto_phones_per_hour = 0.0;
        assert!(automated_economics(&reference_assets(), &q).is_err());
        assert!(breakeven_labor_rate(&reference_assets(), &q).is_err());
        assert!(unsupervised_economics(&reference_assets(), &p(), 0.0, false).is_err());
    }

    #[test]
    fn breakeven_sign_cases() {
        let assets = reference_assets();
        let mut q = p();
        q.revenue_per_lb = 0.0;
        assert!(matches!(
            breakeven_labor_rate(&assets, &q).unwrap(),
            Breakeven::NeverProfitable { root: Some(r) } if r < Decimal::ZERO
        ));
        let mut q = p();
        q.operators = 0.0;
        assert_eq!(breakeven_labor_rate(&assets, &q).unwrap(), Breakeven::AlwaysProfitable);
    }

    #[test]
    fn grid_shapes() {
        assert_eq!(grid(&[]), vec![Vec::<(String, f64)>::new()]);
        let g = grid(&[("a".into(), vec![1.0, 2.0]), ("b".into(), vec![3.0])]);
        assert_eq!(g.len(), 2);
        assert_eq!(g[1], vec![("a".to_string(), 2.0), ("b".to_string(), 3.0)]);
    }

    #[test]
    fn cell_parsing() {
        assert_eq!(parse_cell("(76058.1)").unwrap(), Some(dec(-76058.1)));
        assert_eq!(parse_cell("106,546.55").unwrap(), Some(dec(106546.55)));
        assert_eq!(parse_cell("N/A").unwrap(), None);
        assert_eq!(parse_cell("").unwrap(), None);
        assert!(parse_cell("abc").is_err());
    }

    #[test]
    fn params_validate() {
        let mut q = p();
        q.hours_per_day = 25.0;
        assert!(q.validate().is_err());
        let mut q = p();
        q.labor_rate = -1.0;
        assert!(q.validate().is_err());
        assert!(p().validate().is_ok());
    }
}
