use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use phoneline::perception::{evaluate, read_records, Overlap};
use phoneline::replicate::{hazards_csv, replicate};
use phoneline::scenario::{ScenarioConfig, UnknownKeys};
use phoneline::{sweep, tea, validate};

/// Simulation and cost model of a robotic phone-disassembly line.
#[derive(Debug, Parser)]
#[command(name = "phoneline", version)]
struct Cli {
    /// Root seed; overrides the scenario's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = "PHONELINE_OUT", default_value = "phoneline-out")]
    out: PathBuf,
    /// Print the main result as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Scenario JSON; the built-in defaults when omitted.
    scenario: Option<PathBuf>,
    /// Warn about unknown keys instead of rejecting them.
    #[arg(long)]
    lenient: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the line simulation for one or more replications.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Number of replications (default: the scenario's).
        #[arg(long)]
        reps: Option<u64>,
        /// Phones per replication (default: the scenario's lot size).
        #[arg(long)]
        lot: Option<u64>,
        /// Also write the event trace of replication 0.
        #[arg(long)]
        trace: bool,
    },
    /// Compute the capital/operating, annual and per-lb cost tables.
    Tea {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Directory of golden tables to diff against.
        #[arg(long)]
        compare: Option<PathBuf>,
    },
    /// Evaluate detections against ground truth (JSON lines).
    Metrics {
        preds: PathBuf,
        truths: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        iou: f64,
        #[arg(long, default_value_t = 0.8)]
        conf: f64,
        /// Match on rasterized masks with this cell size (px) instead of boxes.
        #[arg(long)]
        mask_grid: Option<f64>,
    },
    /// Evaluate a grid over economic and station parameters.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// `name=v1,v2,...`; repeat for more axes.
        #[arg(long = "axis")]
        axes: Vec<String>,
    },
    /// Check every reproduction target; exit 3 on any failure.
    Validate {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
}

/// Exit-code classes.
#[derive(Debug)]
enum Failure {
    /// Runtime failure (1).
    Runtime(anyhow::Error),
    /// Bad input or configuration (2).
    Config(anyhow::Error),
    /// Output does not match the reference (3).
    Mismatch(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Config(_) => 2,
            Failure::Mismatch(_) => 3,
        }
    }
}

impl From<phoneline::Error> for Failure {
    fn from(e: phoneline::Error) -> Self {
        match e {
            phoneline::Error::Config { .. } | phoneline::Error::UnknownModel(_) => Failure::Config(e.into()),
            other => Failure::Runtime(other.into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type CmdResult = Result<(), Failure>;

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    scenario: Option<String>,
    seed: u64,
    replications: u64,
    out_dir: String,
    version: &'static str,
    /// sha256 of the scenario bytes (of the default scenario's JSON when none was given).
    config_hash: String,
}

struct Loaded {
    config: ScenarioConfig,
    path: Option<PathBuf>,
    hash: String,
}

fn load_scenario(args: &ScenarioArgs, seed: Option<u64>) -> Result<Loaded, Failure> {
    let (text, path) = match &args.scenario {
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("cannot read scenario {}", p.display()))
                .map_err(Failure::Config)?;
            (text, Some(p.clone()))
        }
        None => (ScenarioConfig::default().to_json()?, None),
    };
    let mode = if args.lenient { UnknownKeys::Warn } else { UnknownKeys::Reject };
    let (mut config, warnings) = ScenarioConfig::from_json(&text, mode)?;
    for w in warnings {
        eprintln!("warning: ignoring unknown key `{w}`");
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    Ok(Loaded {
        config,
        path,
        hash: hex(&Sha256::digest(text.as_bytes())),
    })
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes through a temporary file in the same directory, then renames.
fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(dir.join(name)).map_err(|e| Failure::Runtime(e.error.into()))?;
    Ok(())
}

fn write_manifest(cli: &Cli, command: &str, loaded: Option<&Loaded>, replications: u64) -> CmdResult {
    let m = RunManifest {
        command,
        scenario: loaded.and_then(|l| l.path.as_ref()).map(|p| p.display().to_string()),
        seed: loaded.map(|l| l.config.seed).or(cli.seed).unwrap_or(0),
        replications,
        out_dir: cli.out.display().to_string(),
        version: env!("CARGO_PKG_VERSION"),
        config_hash: loaded.map(|l| l.hash.clone()).unwrap_or_default(),
    };
    write_atomic(&cli.out, "manifest.json", &serde_json::to_string_pretty(&m)?)
}

fn emit(cli: &Cli, json: &str, human: impl FnOnce() -> String) {
    if cli.json {
        println!("{json}");
    } else {
        print!("{}", human());
    }
}

fn cmd_simulate(cli: &Cli, scenario: &ScenarioArgs, reps: Option<u64>, lot: Option<u64>, trace: bool) -> CmdResult {
    let mut loaded = load_scenario(scenario, cli.seed)?;
    if let Some(r) = reps {
        loaded.config.replications = r;
    }
    if let Some(n) = lot {
        loaded.config.lot_size = n;
    }
    let scn = loaded.config.resolve()?;
    let result = replicate(&scn)?;
    let json = serde_json::to_string_pretty(&result)?;
    write_atomic(&cli.out, "simulation.json", &json)?;
    write_atomic(&cli.out, "aggregate.json", &serde_json::to_string_pretty(&result.aggregate)?)?;
    write_atomic(&cli.out, "hazards.csv", &hazards_csv(&result.runs)?)?;
    if trace {
        let out = phoneline::line::simulate(&scn, scn.lot_size, phoneline::line::RunOptions { replication: 0, trace: true })?;
        write_atomic(&cli.out, "trace.csv", &out.trace_csv()?)?;
    }
    write_manifest(cli, "simulate", Some(&loaded), scn.replications)?;
    let a = &result.aggregate;
    emit(cli, &serde_json::to_string_pretty(a)?, || {
        format!(
            "{} replication(s) of {} phones\n\
             throughput (steady state)  {:.2} ± {:.2} phones/h\n\
             throughput (lot)           {:.2} ± {:.2} phones/h\n\
             hazard rate                {:.5} ± {:.5} per phone\n\
             per-phone success          {:.4} ± {:.4}\n",
            a.replications,
            scn.lot_size,
            a.steady_state_throughput_per_hour.mean,
            a.steady_state_throughput_per_hour.sd,
            a.throughput_per_hour.mean,
            a.throughput_per_hour.sd,
            a.hazard_rate.mean,
            a.hazard_rate.sd,
            a.per_phone_success_rate.mean,
            a.per_phone_success_rate.sd,
        )
    });
    Ok(())
}

fn cmd_tea(cli: &Cli, scenario: &ScenarioArgs, compare: Option<&Path>) -> CmdResult {
    let loaded = load_scenario(scenario, cli.seed)?;
    let econ = &loaded.config.economics;
    let report = tea::tea_report(&econ.assets, &econ.params)?;
    let tables = report.tables()?;
    for (name, contents) in &tables {
        write_atomic(&cli.out, name, contents)?;
    }
    let json = serde_json::to_string_pretty(&report)?;
    write_atomic(&cli.out, "tea_report.json", &json)?;
    write_manifest(cli, "tea", Some(&loaded), 0)?;
    emit(cli, &json, || {
        tables
            .iter()
            .map(|(name, c)| format!("== {name}\n{c}"))
            .collect::<Vec<_>>()
            .join("\n")
    });
    if let Some(dir) = compare {
        let golden = tea::TABLE_FILES
            .iter()
            .map(|name| {
                fs::read_to_string(dir.join(name))
                    .map(|s| (*name, s))
                    .with_context(|| format!("cannot read golden table {}", dir.join(name).display()))
                    .map_err(Failure::Config)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mismatches = tea::compare_with_golden(&report, &golden)?;
        if !mismatches.is_empty() {
            let list = mismatches
                .iter()
                .map(|m| format!("{} row {} {}: expected {}, got {}", m.table, m.row, m.column, m.expected, m.actual))
                .collect::<Vec<_>>()
                .join("\n");
            return Err(Failure::Mismatch(list));
        }
        eprintln!("golden tables match");
    }
    Ok(())
}

fn read_jsonl(path: &Path) -> Result<Vec<phoneline::perception::DetectionRecord>, Failure> {
    let f = fs::File::open(path)
        .with_context(|| format!("cannot open {}", path.display()))
        .map_err(Failure::Config)?;
    read_records(BufReader::new(f)).map_err(|e| Failure::Config(anyhow!("{}: {e}", path.display())))
}

fn cmd_metrics(cli: &Cli, preds: &Path, truths: &Path, iou: f64, conf: f64, mask_grid: Option<f64>) -> CmdResult {
    if !(0.0..=1.0).contains(&iou) {
        return Err(Failure::Config(anyhow!("--iou must lie in [0, 1]")));
    }
    let overlap = match mask_grid {
        Some(g) if g > 0.0 => Overlap::Mask { grid_px: g },
        Some(_) => return Err(Failure::Config(anyhow!("--mask-grid must be positive"))),
        None => Overlap::Box,
    };
    let p = read_jsonl(preds)?;
    let t = read_jsonl(truths)?;
    let report = evaluate(&p, &t, iou, conf, overlap)?;
    let json = serde_json::to_string_pretty(&report)?;
    write_atomic(&cli.out, "metrics.json", &json)?;
    let mut confusion = String::from("truth,normal_case,middle_layer,screen,film,iphone_case,missed\n");
    for (i, row) in report.confusion.counts.iter().enumerate() {
        let class = phoneline::model::ComponentClass::DETECTABLE[i];
        let cells: Vec<String> = row.iter().map(u64::to_string).collect();
        confusion.push_str(&format!("{class},{},{}\n", cells.join(","), report.confusion.missed[i]));
    }
    write_atomic(&cli.out, "confusion.csv", &confusion)?;
    write_manifest(cli, "metrics", None, 0)?;
    emit(cli, &json, || {
        let mut s = format!("{:<14}{:>7}{:>7}{:>7}{:>9}{:>9}{:>9}{:>9}\n", "class", "tp", "fp", "fn", "P", "R", "F1", "AP50");
        for c in &report.per_class {
            s.push_str(&format!(
                "{:<14}{:>7}{:>7}{:>7}{:>9.4}{:>9.4}{:>9.4}{:>9}\n",
                c.class.to_string(),
                c.counts.tp,
                c.counts.fp,
                c.counts.fn_,
                c.precision,
                c.recall,
                c.f1,
                c.ap50.map(|a| format!("{a:.4}")).unwrap_or_else(|| "-".into()),
            ));
        }
        s.push_str(&format!(
            "overall P {:.4} R {:.4} F1 {:.4}  mAP50 {:.4}  mAP50-95 {:.4}  accuracy {:.4}\n",
            report.precision,
            report.recall,
            report.f1,
            report.map50,
            report.map50_95,
            report.confusion.accuracy,
        ));
        s
    });
    Ok(())
}

fn cmd_sweep(cli: &Cli, scenario: &ScenarioArgs, axes: &[String]) -> CmdResult {
    if axes.is_empty() {
        return Err(Failure::Config(anyhow!("at least one --axis name=v1,v2,... is required")));
    }
    let loaded = load_scenario(scenario, cli.seed)?;
    let scn = loaded.config.resolve()?;
    let axes = axes.iter().map(|a| sweep::parse_axis(a)).collect::<Result<Vec<_>, _>>()?;
    let rows = sweep::sweep(&scn, &axes)?;
    let grid = sweep::sweep_csv(&rows)?;
    write_atomic(&cli.out, "sweep.csv", &grid)?;
    write_atomic(&cli.out, "sweep_plot.csv", &sweep::plot_csv(&rows)?)?;
    write_manifest(cli, "sweep", Some(&loaded), 1)?;
    emit(cli, &serde_json::to_string_pretty(&rows)?, || grid.clone());
    Ok(())
}

fn cmd_validate(cli: &Cli, scenario: &ScenarioArgs) -> CmdResult {
    let loaded = load_scenario(scenario, cli.seed)?;
    let v = validate::validate_all(loaded.config.seed, &loaded.config.economics)?;
    let json = v.to_json()?;
    write_atomic(&cli.out, "validation.json", &json)?;
    write_manifest(cli, "validate", Some(&loaded), 1)?;
    emit(cli, &json, || {
        let mut s = format!("{:<4}{:<40}{:>22}{:>22}{:>12}  ok\n", "#", "quantity", "expected", "observed", "tol");
        for c in &v.checks {
            for r in &c.rows {
                s.push_str(&format!(
                    "{:<4}{:<40}{:>22}{:>22}{:>12}  {}\n",
                    c.id,
                    r.quantity,
                    r.expected,
                    r.observed,
                    r.tolerance,
                    if r.passed { "yes" } else { "NO" }
                ));
            }
        }
        s.push('\n');
        s.push_str(&v.summary());
        s
    });
    if v.passed {
        Ok(())
    } else {
        let failed: Vec<String> = v.checks.iter().filter(|c| !c.passed).map(|c| c.id.to_string()).collect();
        Err(Failure::Mismatch(format!("failed checks: {}", failed.join(", "))))
    }
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Simulate { scenario, reps, lot, trace } => cmd_simulate(cli, scenario, *reps, *lot, *trace),
        Command::Tea { scenario, compare } => cmd_tea(cli, scenario, compare.as_deref()),
        Command::Metrics { preds, truths, iou, conf, mask_grid } => cmd_metrics(cli, preds, truths, *iou, *conf, *mask_grid),
        Command::Sweep { scenario, axes } => cmd_sweep(cli, scenario, axes),
        Command::Validate { scenario } => cmd_validate(cli, scenario),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Runtime(e) | Failure::Config(e) => eprintln!("error: {e:#}"),
                Failure::Mismatch(m) => eprintln!("mismatch:\n{m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
