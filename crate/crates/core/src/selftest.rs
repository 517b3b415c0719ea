//! Algebraic identity suite and MAP-optimality check on random instances.
//!
//! Each check evaluates one identity two ways and records the worst error
//! seen over all instances. The CLI `selftest` verb and the acceptance tests
//! both run this suite.

use rand::Rng;
use serde::Serialize;

use crate::detect::{self, DetectorInput, DetectorKind, WhiteningFactor, WhiteningMode};
use crate::error::Result;
use crate::linalg::{self, c, rel_diff, rel_diff_scalar};
use crate::model::ScaleMatrix;
use crate::synth::RngStream;

/// Pure algebra, compared relatively.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Cross-checks that go through an explicit inverse or determinant.
pub const INVERSE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceDims {
    pub n: usize,
    pub k: usize,
    pub p: usize,
    pub q: usize,
    pub eta: usize,
    pub l: usize,
}

impl InstanceDims {
    /// N ∈ [4, 10], K ∈ [1, 6], p, q ≥ 1 with p + q ≤ N, η ∈ [N, 2N], L ∈ [0, 2N].
    pub fn random(rng: &mut RngStream) -> Self {
        let n = rng.random_range(4..=10);
        let k = rng.random_range(1..=6);
        let p = rng.random_range(1..=n - 1);
        let q = rng.random_range(1..=n - p);
        let eta = rng.random_range(n..=2 * n);
        let l = rng.random_range(0..=2 * n);
        InstanceDims { n, k, p, q, eta, l }
    }
}

/// Random detector input: Gaussian Φ, Υ, Z and Z_L, and a generic complex
/// Hermitian positive definite Σ.
pub fn random_instance(rng: &mut RngStream, d: InstanceDims) -> DetectorInput {
    let g = rng.complex_normal_matrix(d.n, d.n);
    let sigma = &g * g.adjoint() / c(d.n as f64, 0.0) + linalg::identity(d.n) * c(0.5, 0.0);
    let sigma = ScaleMatrix::from_matrix(sigma).expect("Σ is PD by construction");
    let phi = rng.complex_normal_matrix(d.n, d.p);
    let upsilon = rng.complex_normal_matrix(d.n, d.q);
    let z = rng.complex_normal_matrix(d.n, d.k) * c(2.0, 0.0);
    let z_l = rng.complex_normal_matrix(d.n, d.l);
    DetectorInput::new(z, &z_l, sigma, d.eta, phi, upsilon).expect("dimensions are consistent")
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub tolerance: f64,
    pub max_error: f64,
    pub evaluated: usize,
}

impl IdentityCheck {
    fn new(name: &'static str, tolerance: f64) -> Self {
        IdentityCheck {
            name,
            tolerance,
            max_error: 0.0,
            evaluated: 0,
        }
    }

    fn record(&mut self, err: f64) {
        self.evaluated += 1;
        if !(err <= self.max_error) {
            self.max_error = err;
        }
    }

    pub fn passed(&self) -> bool {
        self.max_error < self.tolerance
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub instances: usize,
    pub seed: u64,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }

    pub fn check(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const CHECK_PROJECTORS: &str = "projector idempotence and hermiticity";
pub const CHECK_DECOMPOSITION: &str = "P⊥_B = P⊥_Υ − P_{P⊥_Υ Φ}";
pub const CHECK_RESOLVENT: &str = "resolvent identity behind the compact B-Rao-I";
pub const CHECK_RAO_FORMS: &str = "B-Rao-I compact vs unsplit form";
pub const CHECK_WOODBURY: &str = "Woodbury inverse of R̂₀";
pub const CHECK_PUSHTHROUGH: &str = "R̂₀⁻¹Υ = α(S+ηΣ)⁻¹Υ";
pub const CHECK_DETERMINANT: &str = "|Z₀Z₀ᴴ+S+ηΣ| = |S+ηΣ|·|I+(Z̆−ῨW)ᴴ(Z̆−ῨW)|";
pub const CHECK_WALD: &str = "t_B-Wald = α · t_B-2S-GLRT-I";
pub const CHECK_FACTOR: &str = "whitening-factor invariance of all statistics";

/// Runs every identity on `instances` random inputs.
pub fn run_identity_suite(instances: usize, seed: u64) -> Result<IdentityReport> {
    let mut projectors = IdentityCheck::new(CHECK_PROJECTORS, IDENTITY_TOL);
    let mut decomposition = IdentityCheck::new(CHECK_DECOMPOSITION, IDENTITY_TOL);
    let mut resolvent = IdentityCheck::new(CHECK_RESOLVENT, IDENTITY_TOL);
    let mut rao_forms = IdentityCheck::new(CHECK_RAO_FORMS, IDENTITY_TOL);
    let mut woodbury = IdentityCheck::new(CHECK_WOODBURY, INVERSE_TOL);
    let mut pushthrough = IdentityCheck::new(CHECK_PUSHTHROUGH, INVERSE_TOL);
    let mut determinant = IdentityCheck::new(CHECK_DETERMINANT, INVERSE_TOL);
    let mut wald = IdentityCheck::new(CHECK_WALD, IDENTITY_TOL);
    let mut factor = IdentityCheck::new(CHECK_FACTOR, IDENTITY_TOL);

    for i in 0..instances {
        let mut rng = RngStream::new(seed, i as u64);
        let dims = InstanceDims::random(&mut rng);
        let input = random_instance(&mut rng, dims);
        let b = detect::whiten(&input, WhiteningMode::Bayesian)?;
        let n = input.n();

        for p in [&b.p_perp_upsilon, &b.p_perp_b, &b.p_proj_phi_given_upsilon] {
            let idem = linalg::frobenius(&(p * p - p));
            let herm = linalg::frobenius(&(p - p.adjoint()));
            projectors.record(idem.max(herm));
        }
        // P⊥_B vanishes when p + q = N, so scale by the ‖P⊥_Υ‖ term instead.
        decomposition.record(
            linalg::frobenius(&(&b.p_perp_b - (&b.p_perp_upsilon - &b.p_proj_phi_given_upsilon)))
                / linalg::frobenius(&b.p_perp_upsilon),
        );

        let g_u = b.data_gram(&b.p_perp_upsilon);
        let g_s = b.data_gram(&b.p_proj_phi_given_upsilon);
        let eye_k = linalg::identity(input.k());
        let inner = &eye_k + &g_u - &g_s;
        let lhs = &eye_k + linalg::hpd_solve(&inner, &g_s, "resolvent")?;
        let rhs = linalg::hpd_solve(&inner, &(&eye_k + &g_u), "resolvent")?;
        resolvent.record(rel_diff(&lhs, &rhs));

        rao_forms.record(rel_diff_scalar(
            detect::rao_trace_unsplit(&b)?,
            detect::rao_trace(&b)?,
        ));

        let r0 = detect::map_r0(&input)?;
        woodbury.record(rel_diff(
            &detect::map_r0_inverse(&input)?,
            &linalg::hpd_inverse(&r0, "R̂₀")?,
        ));
        let m = input.regularized_covariance();
        pushthrough.record(rel_diff(
            &linalg::hpd_solve(&r0, &input.upsilon, "R̂₀")?,
            &(linalg::hpd_solve(&m, &input.upsilon, "S + ηΣ")? * c(input.alpha(), 0.0)),
        ));

        let w = rng.complex_normal_matrix(dims.q, dims.k);
        let z0 = &input.z - &input.upsilon * &w;
        let full = linalg::log_det_hpd(&(&z0 * z0.adjoint() + &m), "Z₀Z₀ᴴ + S + ηΣ")?;
        let resid = &b.z_w - &b.upsilon_w * &w;
        let split = linalg::log_det_hpd(&m, "S + ηΣ")?
            + linalg::log_det_hpd(&(&eye_k + resid.adjoint() * &resid), "I + residual Gram")?;
        determinant.record((full - split).exp_m1().abs());

        wald.record(rel_diff_scalar(
            detect::t_b_wald(&input)? / input.alpha(),
            detect::two_step_trace(&b)?,
        ));

        let modes: &[WhiteningMode] = if dims.l >= n {
            &[WhiteningMode::Bayesian, WhiteningMode::Ordinary]
        } else {
            &[WhiteningMode::Bayesian]
        };
        for &mode in modes {
            let chol = detect::whiten_with(&input, mode, WhiteningFactor::Cholesky)?;
            let eig = detect::whiten_with(&input, mode, WhiteningFactor::HermitianSqrt)?;
            type Stat = fn(&detect::WhitenedBundle) -> Result<f64>;
            let stats: [Stat; 3] = [detect::glrt_ratio, detect::two_step_trace, detect::rao_trace];
            for f in stats {
                factor.record(rel_diff_scalar(f(&eig)?, f(&chol)?));
            }
        }
    }

    Ok(IdentityReport {
        instances,
        seed,
        checks: vec![
            projectors,
            decomposition,
            resolvent,
            rao_forms,
            woodbury,
            pushthrough,
            determinant,
            wald,
            factor,
        ],
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MapOptimalityReport {
    pub instances: usize,
    pub perturbations: usize,
    pub violations: usize,
    /// Smallest observed drop `log_joint(MAP) − log_joint(perturbed)`.
    pub min_margin: f64,
}

/// Compares the H₀ log joint density at `(R̂₀, Ŵ)` with `perturbations`
/// random nearby points per instance, each perturbation of relative size `rel`.
pub fn run_map_optimality(
    instances: usize,
    perturbations: usize,
    rel: f64,
    seed: u64,
) -> Result<MapOptimalityReport> {
    let mut violations = 0;
    let mut min_margin = f64::INFINITY;
    for i in 0..instances {
        let mut rng = RngStream::new(seed, i as u64);
        let dims = InstanceDims::random(&mut rng);
        let input = random_instance(&mut rng, dims);
        let r0 = detect::map_r0(&input)?;
        let w0 = detect::map_w(&input)?;
        let best = detect::log_joint_h0(&r0, &w0, &input)?;
        let f = linalg::cholesky_lower(&r0, "R̂₀")?;
        let w_scale = linalg::frobenius(&w0).max(1e-12);

        for j in 0..perturbations {
            // 0: R only, 1: W only, 2: both
            let which = j % 3;
            let mut r = r0.clone();
            let mut w = w0.clone();
            if which != 1 {
                let g = rng.complex_normal_matrix(dims.n, dims.n);
                let h = linalg::hermitize(&g);
                let h = &h / c(linalg::frobenius(&h), 0.0);
                let bump = linalg::identity(dims.n) + h * c(rel, 0.0);
                r = linalg::hermitize(&(&f * bump * f.adjoint()));
            }
            if which != 0 {
                let g = rng.complex_normal_matrix(dims.q, dims.k);
                w += &g * c(rel * w_scale / linalg::frobenius(&g), 0.0);
            }
            let value = detect::log_joint_h0(&r, &w, &input)?;
            let margin = best - value;
            min_margin = min_margin.min(margin);
            if !(margin > 0.0) {
                violations += 1;
            }
        }
    }
    Ok(MapOptimalityReport {
        instances,
        perturbations: instances * perturbations,
        violations,
        min_margin,
    })
}

/// Detectors whose statistic is checked by the suite (all six).
pub fn covered_detectors() -> &'static [DetectorKind] {
    &DetectorKind::ALL
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_small_batch() {
        let report = run_identity_suite(10, 99).unwrap();
        for check in &report.checks {
            assert!(check.passed(), "{}: {:e}", check.name, check.max_error);
            assert!(check.evaluated >= 10);
        }
    }

    #[test]
    fn map_point_is_optimal() {
        let report = run_map_optimality(3, 12, 1e-2, 5).unwrap();
        assert_eq!(report.violations, 0);
        assert!(report.min_margin > 0.0);
    }

    #[test]
    fn random_dims_respect_bounds() {
        let mut rng = RngStream::new(1, 1);
        for _ in 0..200 {
            let d = InstanceDims::random(&mut rng);
            assert!((4..=10).contains(&d.n) && (1..=6).contains(&d.k));
            assert!(d.p >= 1 && d.q >= 1 && d.p + d.q <= d.n);
            assert!(d.eta >= d.n && d.eta <= 2 * d.n && d.l <= 2 * d.n);
        }
    }
}
