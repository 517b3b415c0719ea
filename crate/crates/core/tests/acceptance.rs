//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use spread_detect::cli::{self, ExperimentSpec, MANIFEST_JSON, RESULTS_CSV};
use spread_detect::detect::{self, DetectorInput, DetectorKind};
use spread_detect::mc::{self, CfarSettings, Purpose, SweepSettings};
use spread_detect::model::{build_scale_matrix, Scenario, ScenarioConfig};
use spread_detect::selftest;
use spread_detect::synth::{sample_inverse_wishart, synthesize_trial, Hypothesis, RngStream};
use spread_detect::Error;

const SEED: u64 = 20240417;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn within_budget(elapsed: Duration, budget_s: u64) -> bool {
    elapsed <= Duration::from_secs(budget_s)
}

fn identity_suite() -> Outcome {
    let start = Instant::now();
    let report = selftest::run_identity_suite(100, SEED).expect("identity suite runs");
    let elapsed = start.elapsed();
    let worst: Vec<String> = report
        .checks
        .iter()
        .map(|c| format!("{}: {:.1e}/{:.0e}", c.name, c.max_error, c.tolerance))
        .collect();
    outcome(
        report.passed() && within_budget(elapsed, 10),
        format!("{:.2}s; {}", elapsed.as_secs_f64(), worst.join("; ")),
    )
}

fn map_optimality() -> Outcome {
    let start = Instant::now();
    let report = selftest::run_map_optimality(20, 50, 1e-2, SEED).expect("MAP check runs");
    let elapsed = start.elapsed();
    outcome(
        report.violations == 0 && report.perturbations == 1000 && within_budget(elapsed, 30),
        format!(
            "{} violations in {} perturbations, smallest margin {:.3e}, {:.2}s",
            report.violations,
            report.perturbations,
            report.min_margin,
            elapsed.as_secs_f64()
        ),
    )
}

/// Oracle: E[R] = η/(η−N) · σ² ρ^|i−j|, written out entry by entry.
fn inverse_wishart_mean() -> Outcome {
    let start = Instant::now();
    let (eta, sigma2, rho, draws) = (100usize, 2.0, 0.6, 10_000usize);
    let mut worst = 0.0f64;
    for n in 1..=3usize {
        let scale = build_scale_matrix(sigma2, rho, n).unwrap();
        let mut rng = RngStream::new(SEED, n as u64);
        let mut sum = vec![Complex64::new(0.0, 0.0); n * n];
        for _ in 0..draws {
            let r = sample_inverse_wishart(eta, &scale, &mut rng).unwrap();
            for i in 0..n {
                for j in 0..n {
                    sum[i * n + j] += r[(i, j)];
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let expected = eta as f64 / (eta - n) as f64 * sigma2 * rho.powi((i as i32 - j as i32).abs());
                let mean = sum[i * n + j] / draws as f64;
                worst = worst.max((mean - expected).norm() / expected);
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 0.05 && within_budget(elapsed, 10),
        format!("max entrywise rel. error {worst:.4}, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn threshold_self_consistency() -> Outcome {
    let start = Instant::now();
    let (pfa, n) = (1e-2, 10_000usize);
    let scenario = Scenario::new(&ScenarioConfig::reference()).unwrap();
    let records = mc::calibrate_thresholds(&DetectorKind::ALL, &scenario, pfa, n, SEED).unwrap();
    let pairs: Vec<_> = records.iter().map(|r| (r.detector, r.threshold)).collect();
    let rates = mc::estimate_rates(&scenario, &pairs, Hypothesis::H0, n, SEED, Purpose::FalseAlarm, 0).unwrap();
    let sigma = mc::binomial_sigma(pfa, n);
    let mut ok = true;
    let mut parts = Vec::new();
    for ((kind, _), rate) in pairs.iter().zip(&rates) {
        let z = (rate.rate - pfa) / sigma;
        ok &= z.abs() <= 3.0;
        parts.push(format!("{kind} {:.4} ({z:+.2}σ)", rate.rate));
    }
    let elapsed = start.elapsed();
    outcome(
        ok && within_budget(elapsed, 120),
        format!("{}; {:.1}s", parts.join(", "), elapsed.as_secs_f64()),
    )
}

fn cfar_flatness() -> Outcome {
    let start = Instant::now();
    let mut cfg = ScenarioConfig::reference();
    cfg.sigma2 = 1.0;
    cfg.rho = 0.9;
    let settings = CfarSettings {
        pfa: 1e-2,
        // Calibration noise adds to every grid point, so calibrate with ten
        // times the per-point trial count.
        n_calibration_trials: 100_000,
        n_trials: 10_000,
        seed: SEED,
    };
    let scan = mc::cfar_scan(DetectorKind::BRaoI, &cfg, &[0.1, 1.0, 10.0], &[0.1, 0.5, 0.9], &settings).unwrap();
    let parts: Vec<String> = scan
        .points
        .iter()
        .map(|p| format!("({},{})={:.4}", p.sigma2, p.rho, p.pfa_hat))
        .collect();
    outcome(
        scan.all_within_3_sigma(),
        format!(
            "threshold from {} trials; {}; 3σ = {:.4}; {:.1}s",
            scan.threshold.n_trials,
            parts.join(" "),
            3.0 * mc::binomial_sigma(1e-2, 10_000),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn detection_ordering() -> Vec<(String, Outcome)> {
    let grid: Vec<f64> = (0..=5).map(|i| 5.0 * i as f64).collect();
    let settings = SweepSettings::desk(SEED);
    let cfg = ScenarioConfig::reference();
    let sweep = mc::sweep_snr(&DetectorKind::COMPARED, &cfg, &grid, &settings).unwrap();

    let mut monotone = true;
    let mut worst_drop = 0.0f64;
    for kind in DetectorKind::COMPARED {
        let curve = sweep.curve(kind);
        for w in curve.windows(2) {
            let drop = w[0].pd - w[1].pd;
            worst_drop = worst_drop.max(drop);
            if drop > 2.0 * w[1].ci_half.max(w[0].ci_half) {
                monotone = false;
            }
        }
    }
    let mut results = vec![(
        "6a PD monotone in SNR".to_string(),
        outcome(monotone, format!("largest PD drop between grid points {worst_drop:.4}")),
    )];

    let rao = sweep.curve(DetectorKind::BRaoI);
    let mid = rao
        .iter()
        .enumerate()
        .filter(|(_, r)| (0.2..=0.8).contains(&r.pd))
        .min_by(|a, b| (a.1.pd - 0.5).abs().total_cmp(&(b.1.pd - 0.5).abs()))
        .map(|(i, _)| i);
    let Some(mid) = mid else {
        let pds: Vec<String> = rao.iter().map(|r| format!("{:.3}", r.pd)).collect();
        let fail = || outcome(false, format!("no grid point with B-Rao-I PD in [0.2, 0.8]: {}", pds.join(" ")));
        results.push(("6b B-Rao-I vs B-GLRT-I".into(), fail()));
        results.push(("6c Bayesian vs ordinary".into(), fail()));
        results.push(("6d eta 14 -> 22".into(), fail()));
        return results;
    };
    let snr = grid[mid];
    let at = |kind: DetectorKind| sweep.curve(kind)[mid];

    let (r, g) = (at(DetectorKind::BRaoI), at(DetectorKind::BGlrtI));
    let tol = 2.0 * r.ci_half.max(g.ci_half);
    results.push((
        "6b B-Rao-I vs B-GLRT-I".into(),
        outcome(
            r.pd >= g.pd - tol,
            format!("SNR {snr} dB: B-Rao-I {:.4}, B-GLRT-I {:.4}, tol {tol:.4}", r.pd, g.pd),
        ),
    ));

    let mut ok = true;
    let mut parts = Vec::new();
    for kind in [DetectorKind::BGlrtI, DetectorKind::B2sGlrtI] {
        let ord = kind.ordinary_counterpart().unwrap();
        let (b, o) = (at(kind), at(ord));
        let tol = 2.0 * b.ci_half.max(o.ci_half);
        ok &= b.pd >= o.pd - tol;
        parts.push(format!("{kind} {:.4} vs {ord} {:.4} (tol {tol:.4})", b.pd, o.pd));
    }
    results.push((
        "6c Bayesian vs ordinary".into(),
        outcome(ok, format!("SNR {snr} dB: {}", parts.join(", "))),
    ));

    let mut cfg22 = cfg.clone();
    cfg22.eta = 22;
    let sweep22 = mc::sweep_snr(&[DetectorKind::BRaoI], &cfg22, &[snr], &settings).unwrap();
    let r22 = sweep22.rows[0].clone();
    let tol = 2.0 * r.ci_half.max(r22.ci_half);
    results.push((
        "6d eta 14 -> 22".into(),
        outcome(
            r22.pd >= r.pd - tol,
            format!("SNR {snr} dB: B-Rao-I PD {:.4} at eta=14, {:.4} at eta=22, tol {tol:.4}", r.pd, r22.pd),
        ),
    ));
    results
}

fn sample_starved() -> Outcome {
    let mut cfg = ScenarioConfig::reference();
    cfg.l_train = 8;
    let scenario = Scenario::new(&cfg).unwrap();
    let mut rng = RngStream::new(SEED, 0);
    let trial = synthesize_trial(&scenario, Hypothesis::H1, &mut rng).unwrap();
    let input = DetectorInput::from_trial(&trial, &scenario).unwrap();

    let mut ok = true;
    let mut parts = Vec::new();
    for kind in [DetectorKind::GlrtI, DetectorKind::TwoStepGlrtI] {
        let starved = matches!(detect::evaluate(kind, &input), Err(Error::SampleStarved { .. }));
        ok &= starved;
        parts.push(format!("{kind} starved={starved}"));
    }
    for kind in DetectorKind::ALL.into_iter().filter(|k| k.is_bayesian()) {
        let finite = detect::evaluate(kind, &input).map(f64::is_finite).unwrap_or(false);
        ok &= finite;
        parts.push(format!("{kind} finite={finite}"));
    }

    let grid: Vec<f64> = (0..=5).map(|i| 5.0 * i as f64).collect();
    let settings = SweepSettings {
        n_pd_trials: 500,
        ..SweepSettings::desk(SEED)
    };
    let sweep = mc::sweep_snr(&DetectorKind::COMPARED, &cfg, &grid, &settings).unwrap();
    let skipped: Vec<_> = sweep.skipped.iter().map(|s| s.detector).collect();
    ok &= skipped == [DetectorKind::GlrtI, DetectorKind::TwoStepGlrtI];
    for kind in DetectorKind::COMPARED.into_iter().filter(|k| k.is_bayesian()) {
        let curve = sweep.curve(kind);
        ok &= curve.len() == grid.len() && curve.iter().all(|r| r.pd.is_finite());
    }
    ok &= sweep.rows.iter().all(|r| r.detector.is_bayesian());
    parts.push(format!("sweep rows {}, skipped {:?}", sweep.rows.len(), skipped));
    outcome(ok, parts.join(", "))
}

fn run_sweep(config: &Path, out: &Path, threads: usize) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_spread-detect"))
        .args(["sweep", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--threads", &threads.to_string()])
        .env_remove(cli::SEED_ENV)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(String::from_utf8_lossy(&status.stderr).into_owned());
    }
    std::fs::read(out.join(RESULTS_CSV)).map_err(|e| e.to_string())
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = ExperimentSpec::desk(ScenarioConfig::reference());
    spec.n_threshold_trials = 2_000;
    spec.pfa = 0.01;
    spec.n_pd_trials = 500;
    let config = dir.path().join("experiment.json");
    std::fs::write(&config, serde_json::to_string_pretty(&spec).unwrap()).unwrap();

    let first_dir = dir.path().join("first");
    let first = match run_sweep(&config, &first_dir, 1) {
        Ok(b) => b,
        Err(e) => return outcome(false, format!("first sweep failed: {e}")),
    };
    let manifest = first_dir.join(MANIFEST_JSON);
    let mut runs = Vec::new();
    for (name, threads) in [("t1", 1), ("t8", 8)] {
        match run_sweep(&manifest, &dir.path().join(name), threads) {
            Ok(b) => runs.push(b),
            Err(e) => return outcome(false, format!("rerun from manifest failed: {e}")),
        }
    }
    let identical = runs.iter().all(|r| *r == first);
    outcome(
        identical,
        format!(
            "results.csv ({} bytes) identical across config run and manifest reruns at 1 and 8 threads: {identical}",
            first.len()
        ),
    )
}

fn main() {
    let mut results: Vec<(String, Outcome)> = vec![
        ("1 algebraic identities".into(), identity_suite()),
        ("2 MAP optimality".into(), map_optimality()),
        ("3 inverse-Wishart mean".into(), inverse_wishart_mean()),
        ("4 threshold self-consistency".into(), threshold_self_consistency()),
        ("5 CFAR flatness".into(), cfar_flatness()),
    ];
    results.extend(detection_ordering());
    results.push(("7 sample-starved behavior".into(), sample_starved()));
    results.push(("8 reproducibility".into(), reproducibility()));

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
