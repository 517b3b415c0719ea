//! Scenario configuration, the exponentially correlated scale matrix and the
//! Doppler steering subspaces for signal and interference.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigIssue, Error, Result};
use crate::linalg::{self, c, CMatrix};

/// Smallest singular value `[Φ, Υ]` must exceed for a config to validate.
pub const MIN_SINGULAR_VALUE: f64 = 1e-8;

/// Full description of one simulated scenario.
///
/// `sig_freqs` / `intf_freqs` may be left empty in a config file, in which
/// case [`validate_config`] fills in the default layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_dim: usize,
    pub k_cells: usize,
    pub p_sig: usize,
    pub q_intf: usize,
    pub l_train: usize,
    pub eta: usize,
    pub sigma2: f64,
    pub rho: f64,
    pub inr_db: f64,
    pub snr_db: f64,
    #[serde(default)]
    pub sig_freqs: Vec<f64>,
    #[serde(default)]
    pub intf_freqs: Vec<f64>,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Simulated-data scenario with η = 14 and default frequency layout:
    /// N = 10, p = 7, q = 3, K = 4, L = 12, σ² = 1, ρ = 0.9, INR = 10 dB.
    pub fn reference() -> Self {
        ScenarioConfig {
            n_dim: 10,
            k_cells: 4,
            p_sig: 7,
            q_intf: 3,
            l_train: 12,
            eta: 14,
            sigma2: 1.0,
            rho: 0.9,
            inr_db: 10.0,
            snr_db: 10.0,
            sig_freqs: Vec::new(),
            intf_freqs: Vec::new(),
            seed: 20240417,
        }
    }

    /// η = N leaves the prior mean `η/(η−N) Σ` undefined; draws are still valid.
    pub fn is_degenerate_prior(&self) -> bool {
        self.eta == self.n_dim
    }
}

/// Σ, an N×N Hermitian positive definite matrix, with its lower Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleMatrix {
    sigma: CMatrix,
    chol_lower: CMatrix,
}

impl ScaleMatrix {
    /// Wraps a user-supplied Hermitian PD matrix.
    pub fn from_matrix(sigma: CMatrix) -> Result<Self> {
        let sigma = linalg::hermitize(&sigma);
        let chol_lower = linalg::cholesky_lower(&sigma, "scale matrix Σ")?;
        Ok(ScaleMatrix { sigma, chol_lower })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.sigma
    }

    /// Lower factor `F` with `F Fᴴ = Σ`.
    pub fn cholesky_lower(&self) -> &CMatrix {
        &self.chol_lower
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }
}

/// Signal basis Φ (N×p), interference basis Υ (N×q) and `B = [Φ, Υ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceModel {
    pub phi: CMatrix,
    pub upsilon: CMatrix,
    pub b: CMatrix,
}

impl SubspaceModel {
    pub fn new(phi: CMatrix, upsilon: CMatrix) -> Result<Self> {
        if phi.nrows() != upsilon.nrows() {
            return Err(Error::DimensionMismatch {
                what: "Φ and Υ row count",
                expected: phi.nrows().to_string(),
                got: upsilon.nrows().to_string(),
            });
        }
        let n = phi.nrows();
        let (p, q) = (phi.ncols(), upsilon.ncols());
        let mut b = CMatrix::zeros(n, p + q);
        b.columns_mut(0, p).copy_from(&phi);
        b.columns_mut(p, q).copy_from(&upsilon);
        for (what, m) in [("Φ", &phi), ("Υ", &upsilon), ("B = [Φ, Υ]", &b)] {
            let ratio = linalg::column_rank_ratio(m);
            if !(ratio > linalg::RANK_TOL) {
                return Err(Error::RankDeficient { what, ratio });
            }
        }
        Ok(SubspaceModel { phi, upsilon, b })
    }

    pub fn from_frequencies(sig_freqs: &[f64], intf_freqs: &[f64], n: usize) -> Result<Self> {
        Self::new(
            build_steering_subspace(sig_freqs, n)?,
            build_steering_subspace(intf_freqs, n)?,
        )
    }
}

/// Signal and interference coordinates `A` (p×K) and `W` (q×K).
#[derive(Debug, Clone, PartialEq)]
pub struct Coordinates {
    pub a: CMatrix,
    pub w: CMatrix,
}

/// One Monte Carlo trial: test data, training data and the realized covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialData {
    pub z: CMatrix,
    pub z_l: CMatrix,
    /// Realized `R`; diagnostics only, detectors never see it.
    pub true_r: CMatrix,
}

/// `Σ(i, j) = σ² ρ^|i−j|`.
pub fn build_scale_matrix(sigma2: f64, rho: f64, n: usize) -> Result<ScaleMatrix> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::config("sigma2", format!("must be positive, got {sigma2}")));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::config("rho", format!("must lie in [0, 1), got {rho}")));
    }
    if n == 0 {
        return Err(Error::config("n_dim", "must be positive"));
    }
    let sigma = CMatrix::from_fn(n, n, |i, j| {
        c(sigma2 * rho.powi(i.abs_diff(j) as i32), 0.0)
    });
    ScaleMatrix::from_matrix(sigma)
}

/// Columns `exp(j2π f k) / √N`, k = 0..N−1, one per frequency.
pub fn build_steering_subspace(freqs: &[f64], n: usize) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::config("n_dim", "must be positive"));
    }
    for (i, a) in freqs.iter().enumerate() {
        if freqs[..i].iter().any(|b| b == a) {
            return Err(Error::config("freqs", format!("duplicate frequency {a}")));
        }
    }
    let norm = 1.0 / (n as f64).sqrt();
    Ok(CMatrix::from_fn(n, freqs.len(), |k, m| {
        let phase = 2.0 * PI * freqs[m] * k as f64;
        c(phase.cos() * norm, phase.sin() * norm)
    }))
}

/// `count` points evenly spaced on `[lo, hi]`; a single point sits at the midpoint.
fn even_layout(count: usize, lo: f64, hi: f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

pub fn default_signal_freqs(p: usize) -> Vec<f64> {
    even_layout(p, 0.05, 0.30)
}

pub fn default_interference_freqs(q: usize) -> Vec<f64> {
    even_layout(q, -0.35, -0.10)
}

/// Checks every config invariant and returns a normalized copy (default
/// frequencies filled in, frequencies sorted). All violations are reported
/// together.
pub fn validate_config(cfg: &ScenarioConfig) -> Result<ScenarioConfig> {
    let mut out = cfg.clone();
    let mut issues = Vec::new();

    for (field, v) in [
        ("n_dim", cfg.n_dim),
        ("k_cells", cfg.k_cells),
        ("p_sig", cfg.p_sig),
        ("q_intf", cfg.q_intf),
    ] {
        if v == 0 {
            issues.push(ConfigIssue::new(field, "must be positive"));
        }
    }
    if cfg.p_sig + cfg.q_intf > cfg.n_dim {
        issues.push(ConfigIssue::new(
            "q_intf",
            format!(
                "p+q exceeds N ({} + {} > {})",
                cfg.p_sig, cfg.q_intf, cfg.n_dim
            ),
        ));
    }
    if cfg.eta < cfg.n_dim {
        issues.push(ConfigIssue::new(
            "eta",
            format!("eta below data dimension ({} < {})", cfg.eta, cfg.n_dim),
        ));
    }
    if !(cfg.sigma2 > 0.0) || !cfg.sigma2.is_finite() {
        issues.push(ConfigIssue::new("sigma2", "must be positive and finite"));
    }
    if !(0.0..1.0).contains(&cfg.rho) {
        issues.push(ConfigIssue::new("rho", "must lie in [0, 1)"));
    }
    if cfg.inr_db.is_nan() || cfg.inr_db == f64::INFINITY {
        issues.push(ConfigIssue::new("inr_db", "must be a number below +inf"));
    }
    if cfg.snr_db.is_nan() || cfg.snr_db == f64::INFINITY {
        issues.push(ConfigIssue::new("snr_db", "must be a number below +inf"));
    }

    if out.sig_freqs.is_empty() {
        out.sig_freqs = default_signal_freqs(cfg.p_sig);
    }
    if out.intf_freqs.is_empty() {
        out.intf_freqs = default_interference_freqs(cfg.q_intf);
    }
    for (field, freqs, want) in [
        ("sig_freqs", &out.sig_freqs, cfg.p_sig),
        ("intf_freqs", &out.intf_freqs, cfg.q_intf),
    ] {
        if freqs.len() != want {
            issues.push(ConfigIssue::new(
                field,
                format!("expected {want} frequencies, got {}", freqs.len()),
            ));
        }
        if let Some(f) = freqs.iter().find(|f| !(-0.5..0.5).contains(*f)) {
            issues.push(ConfigIssue::new(field, format!("{f} outside [-0.5, 0.5)")));
        }
    }
    out.sig_freqs.sort_by(f64::total_cmp);
    out.intf_freqs.sort_by(f64::total_cmp);
    let mut all: Vec<f64> = out.sig_freqs.iter().chain(&out.intf_freqs).cloned().collect();
    all.sort_by(f64::total_cmp);
    if all.windows(2).any(|w| w[0] == w[1]) {
        issues.push(ConfigIssue::new(
            "intf_freqs",
            "signal and interference frequencies must be pairwise distinct",
        ));
    }

    if issues.is_empty() {
        let b = SubspaceModel::from_frequencies(&out.sig_freqs, &out.intf_freqs, cfg.n_dim)
            .map(|s| s.b);
        match b {
            Ok(b) => {
                let smin = linalg::min_singular_value(&b);
                if !(smin > MIN_SINGULAR_VALUE) {
                    issues.push(ConfigIssue::new(
                        "intf_freqs",
                        format!("[Φ, Υ] is numerically rank deficient (σ_min = {smin:e})"),
                    ));
                }
            }
            Err(e) => issues.push(ConfigIssue::new("intf_freqs", e.to_string())),
        }
    }

    if issues.is_empty() {
        Ok(out)
    } else {
        Err(Error::InvalidConfig(issues))
    }
}

/// A validated config together with the matrices every trial needs.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub cfg: ScenarioConfig,
    pub subspaces: SubspaceModel,
    pub sigma: ScaleMatrix,
}

impl Scenario {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        let cfg = validate_config(cfg)?;
        let subspaces = SubspaceModel::from_frequencies(&cfg.sig_freqs, &cfg.intf_freqs, cfg.n_dim)?;
        let sigma = build_scale_matrix(cfg.sigma2, cfg.rho, cfg.n_dim)?;
        Ok(Scenario {
            cfg,
            subspaces,
            sigma,
        })
    }
}

/// `10^(dB/10)`; `−∞` maps to zero.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
