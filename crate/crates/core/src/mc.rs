//! Monte Carlo engine: threshold calibration at a target PFA, PD/PFA
//! estimation with binomial confidence intervals, SNR sweeps and CFAR scans.
//!
//! Trial `i` of a run always draws from the stream
//! `(seed, purpose << 56 | block << 32 | i)`, so results do not depend on
//! the number of worker threads, and calibration trials never reuse the
//! draws of detection or false-alarm trials.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detect::{self, DetectorInput, DetectorKind};
use crate::error::{Error, Result};
use crate::model::{Scenario, ScenarioConfig};
use crate::synth::{synthesize_trial, Hypothesis, RngStream};

/// z-score of the two-sided 95% binomial interval.
pub const Z95: f64 = 1.96;
/// Minimum expected number of calibration exceedances.
pub const MIN_EXCEEDANCES: f64 = 10.0;

/// What a block of trials is used for; part of every stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Calibration = 1,
    Detection = 2,
    FalseAlarm = 3,
}

pub fn stream_id(purpose: Purpose, block: u32, trial: u32) -> u64 {
    ((purpose as u64) << 56) | ((block as u64) << 32) | trial as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRecord {
    pub detector: DetectorKind,
    pub pfa_target: f64,
    pub n_trials: usize,
    pub threshold: f64,
    pub seed: u64,
}

impl ThresholdRecord {
    /// Whether the record used at least `100 / PFA` trials.
    pub fn meets_protocol(&self) -> bool {
        self.n_trials as f64 * self.pfa_target >= 100.0 - 1e-9
    }
}

/// A Bernoulli rate (PD or PFA) with its 95% Wald half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub rate: f64,
    pub ci_half: f64,
    pub n_trials: usize,
    pub hits: usize,
}

impl RateEstimate {
    pub fn from_counts(hits: usize, n_trials: usize) -> Self {
        let rate = if n_trials == 0 {
            0.0
        } else {
            hits as f64 / n_trials as f64
        };
        RateEstimate {
            rate,
            ci_half: ci_half(rate, n_trials),
            n_trials,
            hits,
        }
    }
}

/// `1.96 · sqrt(p(1−p)/n)`.
pub fn ci_half(p: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    Z95 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Binomial standard deviation of an empirical rate at true rate `p`.
pub fn binomial_sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn check_pfa(pfa: f64, n_trials: usize) -> Result<()> {
    if !(pfa > 0.0 && pfa < 1.0) {
        return Err(Error::Precondition(format!("pfa must lie in (0, 1), got {pfa}")));
    }
    if (n_trials as f64) * pfa < MIN_EXCEEDANCES - 1e-9 {
        return Err(Error::Precondition(format!(
            "n_trials * pfa = {} is below {MIN_EXCEEDANCES}; too few exceedances for a stable threshold",
            n_trials as f64 * pfa
        )));
    }
    Ok(())
}

/// Threshold from a sample of H₀ statistics: the order statistic of rank
/// `⌈n · pfa⌉` counted from the largest. Detection uses strict exceedance.
pub fn threshold_from_statistics(stats: &[f64], pfa: f64) -> Result<f64> {
    check_pfa(pfa, stats.len())?;
    if stats.iter().any(|s| s.is_nan()) {
        return Err(Error::Precondition("NaN statistic in calibration sample".into()));
    }
    let mut sorted = stats.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let rank = ((stats.len() as f64 * pfa) - 1e-9).ceil().max(1.0) as usize;
    Ok(sorted[rank - 1])
}

/// Calibrates a threshold from an arbitrary per-trial statistic `stat(trial_index)`.
pub fn calibrate_with<F>(n_trials: usize, pfa: f64, stat: F) -> Result<f64>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    check_pfa(pfa, n_trials)?;
    let stats = (0..n_trials as u64)
        .into_par_iter()
        .map(&stat)
        .collect::<Result<Vec<f64>>>()?;
    threshold_from_statistics(&stats, pfa)
}

fn starved_check(kinds: &[DetectorKind], scenario: &Scenario) -> Result<()> {
    let cfg = &scenario.cfg;
    if cfg.l_train < cfg.n_dim && kinds.iter().any(|k| !k.is_bayesian()) {
        return Err(Error::SampleStarved {
            l_train: cfg.l_train,
            n_dim: cfg.n_dim,
        });
    }
    Ok(())
}

/// Statistics of every detector in `kinds` over `n_trials` synthesized trials;
/// result is indexed `[kind][trial]`.
pub fn simulate_statistics(
    scenario: &Scenario,
    kinds: &[DetectorKind],
    hypothesis: Hypothesis,
    n_trials: usize,
    seed: u64,
    purpose: Purpose,
    block: u32,
) -> Result<Vec<Vec<f64>>> {
    starved_check(kinds, scenario)?;
    if n_trials > u32::MAX as usize {
        return Err(Error::Precondition("too many trials for one block".into()));
    }
    let per_trial = (0..n_trials as u32)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed, stream_id(purpose, block, i));
            let trial = synthesize_trial(scenario, hypothesis, &mut rng)?;
            let input = DetectorInput::from_trial(&trial, scenario)?;
            detect::evaluate_many(kinds, &input)
                .into_iter()
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let mut by_kind = vec![Vec::with_capacity(n_trials); kinds.len()];
    for trial in per_trial {
        for (slot, t) in by_kind.iter_mut().zip(trial) {
            slot.push(t);
        }
    }
    Ok(by_kind)
}

/// Calibrates several detectors on one shared set of H₀ trials.
pub fn calibrate_thresholds(
    kinds: &[DetectorKind],
    scenario: &Scenario,
    pfa: f64,
    n_trials: usize,
    seed: u64,
) -> Result<Vec<ThresholdRecord>> {
    check_pfa(pfa, n_trials)?;
    let stats = simulate_statistics(
        scenario,
        kinds,
        Hypothesis::H0,
        n_trials,
        seed,
        Purpose::Calibration,
        0,
    )?;
    kinds
        .iter()
        .zip(stats)
        .map(|(&detector, s)| {
            Ok(ThresholdRecord {
                detector,
                pfa_target: pfa,
                n_trials,
                threshold: threshold_from_statistics(&s, pfa)?,
                seed,
            })
        })
        .collect()
}

pub fn calibrate_threshold(
    kind: DetectorKind,
    cfg: &ScenarioConfig,
    pfa: f64,
    n_trials: usize,
    seed: u64,
) -> Result<ThresholdRecord> {
    let scenario = Scenario::new(cfg)?;
    Ok(calibrate_thresholds(&[kind], &scenario, pfa, n_trials, seed)?.remove(0))
}

fn check_threshold(t: f64) -> Result<()> {
    if t.is_nan() {
        return Err(Error::Precondition("threshold is NaN".into()));
    }
    Ok(())
}

/// Exceedance rates of several detectors, each against its own threshold,
/// on one shared set of trials.
pub fn estimate_rates(
    scenario: &Scenario,
    thresholds: &[(DetectorKind, f64)],
    hypothesis: Hypothesis,
    n_trials: usize,
    seed: u64,
    purpose: Purpose,
    block: u32,
) -> Result<Vec<RateEstimate>> {
    for (_, t) in thresholds {
        check_threshold(*t)?;
    }
    let kinds: Vec<DetectorKind> = thresholds.iter().map(|(k, _)| *k).collect();
    let stats = simulate_statistics(scenario, &kinds, hypothesis, n_trials, seed, purpose, block)?;
    Ok(thresholds
        .iter()
        .zip(stats)
        .map(|((_, t), s)| RateEstimate::from_counts(s.iter().filter(|&&x| x > *t).count(), n_trials))
        .collect())
}

/// Fraction of H₁ trials (at `cfg.snr_db`) whose statistic exceeds `threshold`.
pub fn estimate_pd(
    kind: DetectorKind,
    cfg: &ScenarioConfig,
    threshold: f64,
    n_trials: usize,
    seed: u64,
) -> Result<RateEstimate> {
    let scenario = Scenario::new(cfg)?;
    Ok(estimate_rates(
        &scenario,
        &[(kind, threshold)],
        Hypothesis::H1,
        n_trials,
        seed,
        Purpose::Detection,
        0,
    )?[0])
}

/// Fraction of H₀ trials whose statistic exceeds `threshold`.
pub fn estimate_pfa(
    kind: DetectorKind,
    cfg: &ScenarioConfig,
    threshold: f64,
    n_trials: usize,
    seed: u64,
) -> Result<RateEstimate> {
    let scenario = Scenario::new(cfg)?;
    Ok(estimate_rates(
        &scenario,
        &[(kind, threshold)],
        Hypothesis::H0,
        n_trials,
        seed,
        Purpose::FalseAlarm,
        0,
    )?[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub pfa: f64,
    pub n_threshold_trials: usize,
    pub n_pd_trials: usize,
    pub seed: u64,
}

impl SweepSettings {
    /// PFA = 10⁻², 100/PFA calibration trials, 2000 PD trials.
    pub fn desk(seed: u64) -> Self {
        SweepSettings {
            pfa: 1e-2,
            n_threshold_trials: 10_000,
            n_pd_trials: 2_000,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub detector: DetectorKind,
    pub snr_db: f64,
    pub pd: f64,
    pub ci_half: f64,
    pub threshold: f64,
    pub n_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedDetector {
    pub detector: DetectorKind,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub pfa_target: f64,
    pub seed: u64,
    /// Rows grouped by detector (in request order), then by grid point.
    pub rows: Vec<SweepRow>,
    pub thresholds: Vec<ThresholdRecord>,
    pub skipped: Vec<SkippedDetector>,
}

impl SweepResult {
    pub fn curve(&self, kind: DetectorKind) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.detector == kind).collect()
    }
}

/// PD-vs-SNR curves. One threshold per detector (H₀ does not depend on SNR);
/// every grid point reuses the same detection streams, so PD differences
/// between points come from the SNR alone.
pub fn sweep_snr(
    kinds: &[DetectorKind],
    cfg: &ScenarioConfig,
    snr_grid: &[f64],
    settings: &SweepSettings,
) -> Result<SweepResult> {
    let scenario = Scenario::new(cfg)?;
    let mut active = Vec::new();
    let mut skipped = Vec::new();
    for &kind in kinds {
        if active.contains(&kind) {
            continue;
        }
        if !kind.is_bayesian() && scenario.cfg.l_train < scenario.cfg.n_dim {
            skipped.push(SkippedDetector {
                detector: kind,
                reason: Error::SampleStarved {
                    l_train: scenario.cfg.l_train,
                    n_dim: scenario.cfg.n_dim,
                }
                .to_string(),
            });
        } else {
            active.push(kind);
        }
    }
    let mut result = SweepResult {
        pfa_target: settings.pfa,
        seed: settings.seed,
        rows: Vec::new(),
        thresholds: Vec::new(),
        skipped,
    };
    if snr_grid.is_empty() || active.is_empty() {
        return Ok(result);
    }
    result.thresholds = calibrate_thresholds(
        &active,
        &scenario,
        settings.pfa,
        settings.n_threshold_trials,
        settings.seed,
    )?;
    let pairs: Vec<(DetectorKind, f64)> = result
        .thresholds
        .iter()
        .map(|r| (r.detector, r.threshold))
        .collect();

    let mut per_point = Vec::with_capacity(snr_grid.len());
    for &snr in snr_grid {
        let mut point = scenario.clone();
        point.cfg.snr_db = snr;
        per_point.push(estimate_rates(
            &point,
            &pairs,
            Hypothesis::H1,
            settings.n_pd_trials,
            settings.seed,
            Purpose::Detection,
            0,
        )?);
    }
    for (ki, &(detector, threshold)) in pairs.iter().enumerate() {
        for (gi, &snr_db) in snr_grid.iter().enumerate() {
            let est = per_point[gi][ki];
            result.rows.push(SweepRow {
                detector,
                snr_db,
                pd: est.rate,
                ci_half: est.ci_half,
                threshold,
                n_trials: est.n_trials,
            });
        }
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfarSettings {
    pub pfa: f64,
    pub n_calibration_trials: usize,
    /// False-alarm trials per grid point.
    pub n_trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfarPoint {
    pub sigma2: f64,
    pub rho: f64,
    pub pfa_hat: f64,
    pub ci_half: f64,
    /// Binomial standard deviation at the target PFA.
    pub sigma_at_target: f64,
    pub within_3_sigma: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfarScan {
    pub reference_sigma2: f64,
    pub reference_rho: f64,
    pub threshold: ThresholdRecord,
    pub points: Vec<CfarPoint>,
}

impl CfarScan {
    /// `max / min` of the estimated PFA over the grid (infinite if any point is zero).
    pub fn spread_ratio(&self) -> f64 {
        let max = self.points.iter().map(|p| p.pfa_hat).fold(0.0, f64::max);
        let min = self.points.iter().map(|p| p.pfa_hat).fold(f64::INFINITY, f64::min);
        max / min
    }

    pub fn all_within_3_sigma(&self) -> bool {
        self.points.iter().all(|p| p.within_3_sigma)
    }
}

/// Calibrates at the config's own (σ², ρ) and re-estimates the PFA with that
/// fixed threshold at every grid point of `sigma2_grid × rho_grid`.
pub fn cfar_scan(
    kind: DetectorKind,
    cfg: &ScenarioConfig,
    sigma2_grid: &[f64],
    rho_grid: &[f64],
    settings: &CfarSettings,
) -> Result<CfarScan> {
    let reference = Scenario::new(cfg)?;
    let threshold = calibrate_thresholds(
        &[kind],
        &reference,
        settings.pfa,
        settings.n_calibration_trials,
        settings.seed,
    )?
    .remove(0);

    let mut points = Vec::new();
    let mut block = 1u32;
    for &sigma2 in sigma2_grid {
        for &rho in rho_grid {
            let mut point_cfg = cfg.clone();
            point_cfg.sigma2 = sigma2;
            point_cfg.rho = rho;
            let scenario = Scenario::new(&point_cfg)?;
            let est = estimate_rates(
                &scenario,
                &[(kind, threshold.threshold)],
                Hypothesis::H0,
                settings.n_trials,
                settings.seed,
                Purpose::FalseAlarm,
                block,
            )?[0];
            let sigma = binomial_sigma(settings.pfa, settings.n_trials);
            points.push(CfarPoint {
                sigma2,
                rho,
                pfa_hat: est.rate,
                ci_half: est.ci_half,
                sigma_at_target: sigma,
                within_3_sigma: (est.rate - settings.pfa).abs() <= 3.0 * sigma,
            });
            block += 1;
        }
    }
    Ok(CfarScan {
        reference_sigma2: cfg.sigma2,
        reference_rho: cfg.rho,
        threshold,
        points,
    })
}

/// Runs `f` on a dedicated pool of `threads` workers (`None`: rayon's default pool).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn small_cfg() -> ScenarioConfig {
        ScenarioConfig {
            n_dim: 6,
            k_cells: 2,
            p_sig: 2,
            q_intf: 2,
            l_train: 8,
            eta: 8,
            sigma2: 1.0,
            rho: 0.5,
            inr_db: 10.0,
            snr_db: 10.0,
            sig_freqs: vec![],
            intf_freqs: vec![],
            seed: 42,
        }
    }

    #[test]
    fn uniform_mock_threshold() {
        let t = calibrate_with(100_000, 0.1, |i| {
            Ok(RngStream::new(3, i).random::<f64>())
        })
        .unwrap();
        assert!((0.895..=0.905).contains(&t), "threshold {t}");
    }

    #[test]
    fn rank_convention() {
        // n = 10⁵, pfa = 10⁻³: the 100th largest value
        let stats: Vec<f64> = (0..100_000).map(|i| i as f64).collect();
        let t = threshold_from_statistics(&stats, 1e-3).unwrap();
        assert_eq!(t, (100_000 - 100) as f64);
        let stats: Vec<f64> = (0..10_000).map(|i| i as f64).collect();
        assert_eq!(threshold_from_statistics(&stats, 1e-2).unwrap(), 9_900.0);
    }

    #[test]
    fn too_few_exceedances_rejected() {
        let stats = vec![0.0; 999];
        assert!(matches!(
            threshold_from_statistics(&stats, 1e-2),
            Err(Error::Precondition(_))
        ));
        assert!(calibrate_threshold(DetectorKind::BRaoI, &small_cfg(), 1e-2, 500, 1).is_err());
    }

    #[test]
    fn stream_ids_are_partitioned() {
        let a = stream_id(Purpose::Calibration, 0, 7);
        let b = stream_id(Purpose::Detection, 0, 7);
        let d = stream_id(Purpose::FalseAlarm, 3, 7);
        assert!(a != b && b != d && a != d);
    }

    #[test]
    fn infinite_thresholds() {
        let cfg = small_cfg();
        let pd = estimate_pd(DetectorKind::BRaoI, &cfg, f64::NEG_INFINITY, 50, 1).unwrap();
        assert_eq!(pd.rate, 1.0);
        let pd = estimate_pd(DetectorKind::BRaoI, &cfg, f64::INFINITY, 50, 1).unwrap();
        assert_eq!(pd.rate, 0.0);
        let pfa = estimate_pfa(DetectorKind::GlrtI, &cfg, f64::INFINITY, 50, 1).unwrap();
        assert_eq!(pfa.rate, 0.0);
        assert!(estimate_pd(DetectorKind::BRaoI, &cfg, f64::NAN, 50, 1).is_err());
    }

    #[test]
    fn starved_ordinary_calibration_fails() {
        let mut cfg = small_cfg();
        cfg.l_train = 4;
        assert!(matches!(
            calibrate_threshold(DetectorKind::TwoStepGlrtI, &cfg, 0.1, 200, 1),
            Err(Error::SampleStarved { .. })
        ));
        assert!(calibrate_threshold(DetectorKind::BGlrtI, &cfg, 0.1, 200, 1).is_ok());
    }

    #[test]
    fn ci_half_formula() {
        let est = RateEstimate::from_counts(25, 100);
        assert!((est.ci_half - 1.96 * (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sweep_edge_cases_and_determinism() {
        let cfg = small_cfg();
        let settings = SweepSettings {
            pfa: 0.1,
            n_threshold_trials: 200,
            n_pd_trials: 100,
            seed: 5,
        };
        let empty = sweep_snr(&DetectorKind::COMPARED, &cfg, &[], &settings).unwrap();
        assert!(empty.rows.is_empty());

        let r = sweep_snr(&DetectorKind::COMPARED, &cfg, &[5.0, 5.0, 15.0], &settings).unwrap();
        assert_eq!(r.rows.len(), 15);
        for kind in DetectorKind::COMPARED {
            let curve = r.curve(kind);
            assert_eq!(curve[0].pd, curve[1].pd);
            assert_eq!(curve[0].threshold, curve[2].threshold);
        }
        let again = with_threads(Some(3), || {
            sweep_snr(&DetectorKind::COMPARED, &cfg, &[5.0, 5.0, 15.0], &settings)
        })
        .unwrap()
        .unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn sweep_skips_starved_ordinary_detectors() {
        let mut cfg = small_cfg();
        cfg.l_train = 3;
        let settings = SweepSettings {
            pfa: 0.1,
            n_threshold_trials: 100,
            n_pd_trials: 50,
            seed: 5,
        };
        let r = sweep_snr(&DetectorKind::COMPARED, &cfg, &[10.0], &settings).unwrap();
        assert_eq!(r.skipped.len(), 2);
        assert!(r.rows.iter().all(|row| row.detector.is_bayesian()));
        assert_eq!(r.rows.len(), 3);
    }

    #[test]
    fn cfar_scan_reference_point() {
        let cfg = small_cfg();
        let settings = CfarSettings {
            pfa: 0.1,
            n_calibration_trials: 2_000,
            n_trials: 2_000,
            seed: 8,
        };
        let scan = cfar_scan(DetectorKind::BRaoI, &cfg, &[1.0], &[0.5], &settings).unwrap();
        assert_eq!(scan.points.len(), 1);
        assert!(scan.points[0].within_3_sigma, "{:?}", scan.points[0]);
    }
}
