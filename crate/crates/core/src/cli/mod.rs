//! Command-line front end: experiment files, artifact emission and the
//! `spread-detect` verbs.
//!
//! An experiment file is JSON:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "scenario": { "n_dim": 10, "k_cells": 4, "p_sig": 7, "q_intf": 3,
//!                 "l_train": 12, "eta": 14, "sigma2": 1.0, "rho": 0.9,
//!                 "inr_db": 10.0, "snr_db": 10.0, "seed": 20240417 },
//!   "detectors": ["GLRT-I", "2S-GLRT-I", "B-GLRT-I", "B-2S-GLRT-I", "B-Rao-I"],
//!   "snr_grid_db": [0, 5, 10, 15, 20, 25],
//!   "pfa": 0.01,
//!   "n_threshold_trials": 10000,
//!   "n_pd_trials": 2000,
//!   "output_dir": "out",
//!   "emit_plots": true
//! }
//! ```
//!
//! Unknown keys are rejected. The `manifest.json` written by a sweep embeds
//! the effective experiment and is itself accepted wherever an experiment
//! file is.

pub mod matrix_file;
pub mod plot;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::detect::{self, DetectorInput, DetectorKind};
use crate::error::{ConfigIssue, Error, Result};
use crate::linalg::CMatrix;
use crate::mc::{self, CfarScan, CfarSettings, SkippedDetector, SweepResult, SweepSettings, ThresholdRecord};
use crate::model::{Scenario, ScenarioConfig};
use crate::selftest;

pub use matrix_file::{format_complex_matrix, parse_complex_matrix, read_complex_matrix, write_complex_matrix};

pub const SCHEMA_VERSION: u32 = 1;
pub const SEED_ENV: &str = "DETECT_SEED";
pub const RESULTS_CSV: &str = "results.csv";
pub const THRESHOLDS_JSON: &str = "thresholds.json";
pub const MANIFEST_JSON: &str = "manifest.json";
pub const PLOT_SVG: &str = "pd_vs_snr.svg";
pub const CSV_HEADER: &str = "detector,snr_db,pd,ci_half,threshold,n_trials,pfa_target,seed";

fn default_pfa() -> f64 {
    1e-2
}
fn default_threshold_trials() -> usize {
    10_000
}
fn default_pd_trials() -> usize {
    2_000
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub schema_version: u32,
    pub scenario: ScenarioConfig,
    pub detectors: Vec<DetectorKind>,
    pub snr_grid_db: Vec<f64>,
    #[serde(default = "default_pfa")]
    pub pfa: f64,
    #[serde(default = "default_threshold_trials")]
    pub n_threshold_trials: usize,
    #[serde(default = "default_pd_trials")]
    pub n_pd_trials: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub emit_plots: bool,
}

impl ExperimentSpec {
    /// Desk-scale sweep of the five compared detectors over 0..25 dB.
    pub fn desk(scenario: ScenarioConfig) -> Self {
        ExperimentSpec {
            schema_version: SCHEMA_VERSION,
            scenario,
            detectors: DetectorKind::COMPARED.to_vec(),
            snr_grid_db: (0..=5).map(|i| 5.0 * i as f64).collect(),
            pfa: default_pfa(),
            n_threshold_trials: default_threshold_trials(),
            n_pd_trials: default_pd_trials(),
            output_dir: default_output_dir(),
            emit_plots: false,
        }
    }

    pub fn settings(&self) -> SweepSettings {
        SweepSettings {
            pfa: self.pfa,
            n_threshold_trials: self.n_threshold_trials,
            n_pd_trials: self.n_pd_trials,
            seed: self.scenario.seed,
        }
    }

    /// Checks every field, reporting all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            issues.push(ConfigIssue::new(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        if self.detectors.is_empty() {
            issues.push(ConfigIssue::new("detectors", "at least one detector is required"));
        }
        if self.snr_grid_db.is_empty() {
            issues.push(ConfigIssue::new("snr_grid_db", "grid must not be empty for a sweep"));
        }
        if self.snr_grid_db.iter().any(|s| s.is_nan() || *s == f64::INFINITY) {
            issues.push(ConfigIssue::new("snr_grid_db", "grid values must be finite or -inf"));
        }
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            issues.push(ConfigIssue::new("pfa", format!("must lie in (0, 1), got {}", self.pfa)));
        } else if (self.n_threshold_trials as f64) * self.pfa < mc::MIN_EXCEEDANCES {
            issues.push(ConfigIssue::new(
                "n_threshold_trials",
                format!("n_threshold_trials * pfa must be at least {}", mc::MIN_EXCEEDANCES),
            ));
        }
        if self.n_pd_trials == 0 {
            issues.push(ConfigIssue::new("n_pd_trials", "must be positive"));
        }
        match Scenario::new(&self.scenario) {
            Err(Error::InvalidConfig(more)) => issues.extend(more),
            Err(e) => return Err(e),
            Ok(_) => {}
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(issues))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    /// The experiment as run, with the effective seed and output directory.
    pub experiment: ExperimentSpec,
    pub git_describe: String,
    pub crate_version: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ThresholdFile {
    pub thresholds: Vec<ThresholdRecord>,
    #[serde(default)]
    pub skipped: Vec<SkippedDetector>,
}

impl ThresholdFile {
    pub fn lookup(&self, kind: DetectorKind) -> Option<&ThresholdRecord> {
        self.thresholds.iter().find(|r| r.detector == kind)
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(io_error(path))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(io_error(path))
}

/// Parses an experiment file or a manifest written by a previous sweep.
pub fn parse_experiment(text: &str) -> Result<ExperimentSpec> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let spec = if value.get("experiment").is_some() {
        serde_json::from_value::<Manifest>(value)?.experiment
    } else {
        serde_json::from_value::<ExperimentSpec>(value)?
    };
    if spec.schema_version != SCHEMA_VERSION {
        return Err(Error::config(
            "schema_version",
            format!("unsupported version {}, expected {SCHEMA_VERSION}", spec.schema_version),
        ));
    }
    Ok(spec)
}

pub fn load_experiment(path: &Path) -> Result<ExperimentSpec> {
    parse_experiment(&read_text(path)?)
}

pub fn load_thresholds(path: &Path) -> Result<ThresholdFile> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

/// Effective seed: command-line flag, then the environment override, then the config.
pub fn resolve_seed(config_seed: u64, flag: Option<u64>, env: Option<&str>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match env {
        Some(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| Error::config("seed", format!("{SEED_ENV}=`{v}` is not a u64"))),
        _ => Ok(config_seed),
    }
}

fn env_seed() -> Option<String> {
    std::env::var(SEED_ENV).ok()
}

/// `git describe` of the working directory, or `"unknown"` outside a repository.
pub fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

/// CSV with columns `detector,snr_db,pd,ci_half,threshold,n_trials,pfa_target,seed`.
/// Floats use shortest round-trip formatting.
pub fn results_csv(result: &SweepResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.detector, r.snr_db, r.pd, r.ci_half, r.threshold, r.n_trials, result.pfa_target, result.seed
        );
    }
    out
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub result: SweepResult,
    pub results_csv: PathBuf,
    pub thresholds_json: PathBuf,
    pub manifest_json: PathBuf,
    pub plot_svg: Option<PathBuf>,
}

/// Runs a validated sweep and writes its artifacts into `spec.output_dir`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let result = mc::sweep_snr(&spec.detectors, &spec.scenario, &spec.snr_grid_db, &spec.settings())?;
    let dir = &spec.output_dir;
    std::fs::create_dir_all(dir).map_err(io_error(dir))?;

    let results_path = dir.join(RESULTS_CSV);
    write_text(&results_path, &results_csv(&result))?;

    let thresholds_path = dir.join(THRESHOLDS_JSON);
    let thresholds = ThresholdFile {
        thresholds: result.thresholds.clone(),
        skipped: result.skipped.clone(),
    };
    write_text(&thresholds_path, &serde_json::to_string_pretty(&thresholds)?)?;

    let manifest_path = dir.join(MANIFEST_JSON);
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        experiment: spec.clone(),
        git_describe: git_describe(),
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    write_text(&manifest_path, &serde_json::to_string_pretty(&manifest)?)?;

    let plot_svg = if spec.emit_plots {
        let path = dir.join(PLOT_SVG);
        write_text(&path, &plot::pd_vs_snr_svg(&result))?;
        Some(path)
    } else {
        None
    };
    Ok(ExperimentOutcome {
        result,
        results_csv: results_path,
        thresholds_json: thresholds_path,
        manifest_json: manifest_path,
        plot_svg,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleShot {
    pub detector: DetectorKind,
    pub statistic: f64,
    pub threshold: Option<f64>,
    /// `"H1"` when the statistic strictly exceeds the threshold, `"H0"` otherwise.
    pub decision: Option<String>,
}

fn check_shape(what: &'static str, m: &CMatrix, rows: usize, cols: usize) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::DimensionMismatch {
            what,
            expected: format!("{rows}x{cols}"),
            got: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(())
}

/// Evaluates one detector on user-supplied test (`N×K`) and training (`N×L`) data.
pub fn run_single(
    kind: DetectorKind,
    z: CMatrix,
    z_l: &CMatrix,
    cfg: &ScenarioConfig,
    thresholds: Option<&ThresholdFile>,
) -> Result<SingleShot> {
    let scenario = Scenario::new(cfg)?;
    let c = &scenario.cfg;
    check_shape("test data Z", &z, c.n_dim, c.k_cells)?;
    check_shape("training data Z_L", z_l, c.n_dim, c.l_train)?;
    let input = DetectorInput::new(
        z,
        z_l,
        scenario.sigma.clone(),
        c.eta,
        scenario.subspaces.phi.clone(),
        scenario.subspaces.upsilon.clone(),
    )?;
    let statistic = detect::evaluate(kind, &input)?;
    let threshold = match thresholds {
        None => None,
        Some(file) => Some(
            file.lookup(kind)
                .ok_or_else(|| Error::Precondition(format!("threshold file has no record for {kind}")))?
                .threshold,
        ),
    };
    Ok(SingleShot {
        detector: kind,
        statistic,
        threshold,
        decision: threshold.map(|t| if statistic > t { "H1" } else { "H0" }.to_string()),
    })
}

/// Machine-readable error report printed on stderr by the binary.
pub fn error_json(err: &Error) -> String {
    serde_json::json!({ "error": err.kind(), "message": err.to_string() }).to_string()
}

#[derive(Debug, Parser)]
#[command(name = "spread-detect", version, about = "Adaptive range-spread target detection simulator")]
pub struct Cli {
    /// Worker threads for Monte Carlo trials (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides the seed from the config and from DETECT_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a PD-vs-SNR sweep from an experiment file or manifest.
    Sweep(SweepArgs),
    /// Calibrate detection thresholds at the configured scenario.
    Calibrate(CalibrateArgs),
    /// Evaluate one detector on matrix files.
    Detect(DetectArgs),
    /// Check PFA flatness over a (σ², ρ) grid with a fixed threshold.
    CfarScan(CfarArgs),
    /// Run the algebraic identity and MAP optimality checks.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub pfa: Option<f64>,
    /// PD trials per grid point.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub threshold_trials: Option<usize>,
    #[arg(long)]
    pub plots: bool,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Detectors to calibrate (default: those in the config).
    #[arg(long, value_delimiter = ',')]
    pub detector: Vec<DetectorKind>,
    #[arg(long)]
    pub pfa: Option<f64>,
    /// Calibration trials.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Directory for thresholds.json (default: print to stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "B-Rao-I")]
    pub detector: DetectorKind,
    /// N×K test data.
    #[arg(long)]
    pub data: PathBuf,
    /// N×L training data.
    #[arg(long)]
    pub training: PathBuf,
    /// thresholds.json from `calibrate` or `sweep`.
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CfarArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "B-Rao-I")]
    pub detector: Vec<DetectorKind>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 1.0, 10.0])]
    pub sigma2: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.5, 0.9])]
    pub rho: Vec<f64>,
    #[arg(long)]
    pub pfa: Option<f64>,
    /// False-alarm trials per grid point.
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Calibration trials (default: max(trials, 100/pfa)).
    #[arg(long)]
    pub calibration_trials: Option<usize>,
    /// Directory for cfar.json (default: print to stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    #[arg(long, default_value_t = 20)]
    pub map_instances: usize,
    #[arg(long, default_value_t = 50)]
    pub perturbations: usize,
}

fn experiment_with_seed(path: &Path, seed_flag: Option<u64>) -> Result<ExperimentSpec> {
    let mut spec = load_experiment(path)?;
    spec.scenario.seed = resolve_seed(spec.scenario.seed, seed_flag, env_seed().as_deref())?;
    Ok(spec)
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    writeln!(out, "{text}").map_err(io_error(Path::new("<stdout>")))
}

/// Executes a parsed command line, writing reports to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let threads = cli.threads;
    let seed = cli.seed;
    match cli.command {
        Command::Sweep(a) => {
            let mut spec = experiment_with_seed(&a.config, seed)?;
            if let Some(dir) = a.out {
                spec.output_dir = dir;
            }
            if let Some(p) = a.pfa {
                spec.pfa = p;
            }
            if let Some(n) = a.trials {
                spec.n_pd_trials = n;
            }
            if let Some(n) = a.threshold_trials {
                spec.n_threshold_trials = n;
            }
            spec.emit_plots |= a.plots;
            let outcome = mc::with_threads(threads, || run_experiment(&spec))??;
            for s in &outcome.result.skipped {
                eprintln!("skipped {}: {}", s.detector, s.reason);
            }
            writeln!(out, "{}", outcome.results_csv.display()).map_err(io_error(Path::new("<stdout>")))
        }
        Command::Calibrate(a) => {
            let spec = experiment_with_seed(&a.config, seed)?;
            let kinds = if a.detector.is_empty() { spec.detectors.clone() } else { a.detector };
            let pfa = a.pfa.unwrap_or(spec.pfa);
            let n = a.trials.unwrap_or(spec.n_threshold_trials);
            let scenario = Scenario::new(&spec.scenario)?;
            let thresholds = mc::with_threads(threads, || {
                mc::calibrate_thresholds(&kinds, &scenario, pfa, n, spec.scenario.seed)
            })??;
            let file = ThresholdFile {
                thresholds,
                skipped: Vec::new(),
            };
            match a.out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(io_error(&dir))?;
                    write_text(&dir.join(THRESHOLDS_JSON), &serde_json::to_string_pretty(&file)?)
                }
                None => emit_json(out, &file),
            }
        }
        Command::Detect(a) => {
            let spec = load_experiment(&a.config)?;
            let z = read_complex_matrix(&a.data)?;
            let z_l = read_complex_matrix(&a.training)?;
            let thresholds = a.thresholds.as_deref().map(load_thresholds).transpose()?;
            let shot = run_single(a.detector, z, &z_l, &spec.scenario, thresholds.as_ref())?;
            emit_json(out, &shot)
        }
        Command::CfarScan(a) => {
            let spec = experiment_with_seed(&a.config, seed)?;
            let pfa = a.pfa.unwrap_or(spec.pfa);
            let settings = CfarSettings {
                pfa,
                n_calibration_trials: a
                    .calibration_trials
                    .unwrap_or_else(|| a.trials.max((100.0 / pfa).ceil() as usize)),
                n_trials: a.trials,
                seed: spec.scenario.seed,
            };
            let scans = mc::with_threads(threads, || {
                a.detector
                    .iter()
                    .map(|&k| mc::cfar_scan(k, &spec.scenario, &a.sigma2, &a.rho, &settings))
                    .collect::<Result<Vec<CfarScan>>>()
            })??;
            match a.out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(io_error(&dir))?;
                    write_text(&dir.join("cfar.json"), &serde_json::to_string_pretty(&scans)?)
                }
                None => emit_json(out, &scans),
            }
        }
        Command::Selftest(a) => {
            let s = seed.unwrap_or(1);
            let identities = mc::with_threads(threads, || selftest::run_identity_suite(a.instances, s))??;
            let map = selftest::run_map_optimality(a.map_instances, a.perturbations, 1e-2, s)?;
            let passed = identities.passed() && map.violations == 0;
            emit_json(
                out,
                &serde_json::json!({ "passed": passed, "identities": identities, "map_optimality": map }),
            )?;
            if passed {
                Ok(())
            } else {
                Err(Error::Precondition("selftest failed".into()))
            }
        }
    }
}
