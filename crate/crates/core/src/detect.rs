//! Detection statistics for a range-spread target in subspace interference.
//!
//! Two whitening modes feed the statistics:
//!
//! - *ordinary*: data are whitened by the sample covariance `S = Z_L Z_Lᴴ`
//!   (GLRT-I, 2S-GLRT-I). Requires `L ≥ N`.
//! - *Bayesian*: data are whitened by `S + ηΣ`, the posterior-regularized
//!   covariance under an inverse-Wishart prior (B-GLRT-I, B-2S-GLRT-I,
//!   B-Rao-I). Works for any `L`, including `L = 0`.
//!
//! A [`WhitenedBundle`] holds every whitened quantity and projector a
//! statistic needs; it can be built once per trial and shared by all
//! detectors of the same mode.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::model::{ScaleMatrix, Scenario, TrialData};

/// The six detection statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DetectorKind {
    #[serde(rename = "GLRT-I")]
    GlrtI,
    #[serde(rename = "2S-GLRT-I")]
    TwoStepGlrtI,
    #[serde(rename = "B-GLRT-I")]
    BGlrtI,
    #[serde(rename = "B-2S-GLRT-I")]
    B2sGlrtI,
    #[serde(rename = "B-Rao-I")]
    BRaoI,
    #[serde(rename = "B-Wald")]
    BWald,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 6] = [
        DetectorKind::GlrtI,
        DetectorKind::TwoStepGlrtI,
        DetectorKind::BGlrtI,
        DetectorKind::B2sGlrtI,
        DetectorKind::BRaoI,
        DetectorKind::BWald,
    ];

    /// The five detectors compared on PD curves; the Wald form is a scaled
    /// copy of B-2S-GLRT-I and is only kept for the equivalence check.
    pub const COMPARED: [DetectorKind; 5] = [
        DetectorKind::GlrtI,
        DetectorKind::TwoStepGlrtI,
        DetectorKind::BGlrtI,
        DetectorKind::B2sGlrtI,
        DetectorKind::BRaoI,
    ];

    pub fn label(self) -> &'static str {
        match self {
            DetectorKind::GlrtI => "GLRT-I",
            DetectorKind::TwoStepGlrtI => "2S-GLRT-I",
            DetectorKind::BGlrtI => "B-GLRT-I",
            DetectorKind::B2sGlrtI => "B-2S-GLRT-I",
            DetectorKind::BRaoI => "B-Rao-I",
            DetectorKind::BWald => "B-Wald",
        }
    }

    pub fn is_bayesian(self) -> bool {
        !matches!(self, DetectorKind::GlrtI | DetectorKind::TwoStepGlrtI)
    }

    /// Value of the statistic for all-zero test data.
    pub fn null_floor(self) -> f64 {
        match self {
            DetectorKind::GlrtI | DetectorKind::BGlrtI => 1.0,
            _ => 0.0,
        }
    }

    /// The ordinary detector a Bayesian one regularizes, if any.
    pub fn ordinary_counterpart(self) -> Option<DetectorKind> {
        match self {
            DetectorKind::BGlrtI => Some(DetectorKind::GlrtI),
            DetectorKind::B2sGlrtI => Some(DetectorKind::TwoStepGlrtI),
            _ => None,
        }
    }

    pub fn whitening_mode(self) -> WhiteningMode {
        if self.is_bayesian() {
            WhiteningMode::Bayesian
        } else {
            WhiteningMode::Ordinary
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        let kind = match norm.as_str() {
            "glrti" => DetectorKind::GlrtI,
            "2sglrti" | "twostepglrti" => DetectorKind::TwoStepGlrtI,
            "bglrti" => DetectorKind::BGlrtI,
            "b2sglrti" => DetectorKind::B2sGlrtI,
            "braoi" => DetectorKind::BRaoI,
            "bwald" => DetectorKind::BWald,
            _ => {
                return Err(Error::config(
                    "detectors",
                    format!("unknown detector `{s}`"),
                ))
            }
        };
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WhiteningMode {
    /// Whitening by `S + ηΣ`.
    Bayesian,
    /// Whitening by `S`.
    Ordinary,
}

/// How the whitening factor `F` (with `F Fᴴ = M`) is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WhiteningFactor {
    Cholesky,
    /// Hermitian square root `M^{1/2}` from an eigendecomposition.
    HermitianSqrt,
}

/// Everything a detector sees: test data, the training Gram matrix, the
/// prior (Σ, η) and the two subspaces.
#[derive(Debug, Clone)]
pub struct DetectorInput {
    pub z: CMatrix,
    /// `S = Z_L Z_Lᴴ`.
    pub s: CMatrix,
    /// Number of training columns `L` behind `s`.
    pub l_train: usize,
    pub sigma: ScaleMatrix,
    pub eta: usize,
    pub phi: CMatrix,
    pub upsilon: CMatrix,
}

impl DetectorInput {
    /// Builds the input from raw training data.
    pub fn new(
        z: CMatrix,
        z_l: &CMatrix,
        sigma: ScaleMatrix,
        eta: usize,
        phi: CMatrix,
        upsilon: CMatrix,
    ) -> Result<Self> {
        let s = linalg::hermitize(&(z_l * z_l.adjoint()));
        Self::from_parts(z, s, z_l.ncols(), sigma, eta, phi, upsilon)
    }

    pub fn from_parts(
        z: CMatrix,
        s: CMatrix,
        l_train: usize,
        sigma: ScaleMatrix,
        eta: usize,
        phi: CMatrix,
        upsilon: CMatrix,
    ) -> Result<Self> {
        let n = sigma.dim();
        let check = |what: &'static str, got: (usize, usize), rows: usize| {
            if got.0 != rows {
                Err(Error::DimensionMismatch {
                    what,
                    expected: format!("{rows} rows"),
                    got: format!("{}x{}", got.0, got.1),
                })
            } else {
                Ok(())
            }
        };
        check("test data Z", z.shape(), n)?;
        check("Φ", phi.shape(), n)?;
        check("Υ", upsilon.shape(), n)?;
        if s.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                what: "training Gram matrix S",
                expected: format!("{n}x{n}"),
                got: format!("{}x{}", s.nrows(), s.ncols()),
            });
        }
        if phi.ncols() + upsilon.ncols() > n {
            return Err(Error::Precondition(format!(
                "p + q = {} exceeds N = {n}",
                phi.ncols() + upsilon.ncols()
            )));
        }
        Ok(DetectorInput {
            z,
            s,
            l_train,
            sigma,
            eta,
            phi,
            upsilon,
        })
    }

    pub fn from_trial(trial: &TrialData, scenario: &Scenario) -> Result<Self> {
        Self::new(
            trial.z.clone(),
            &trial.z_l,
            scenario.sigma.clone(),
            scenario.cfg.eta,
            scenario.subspaces.phi.clone(),
            scenario.subspaces.upsilon.clone(),
        )
    }

    pub fn n(&self) -> usize {
        self.z.nrows()
    }

    pub fn k(&self) -> usize {
        self.z.ncols()
    }

    /// `α = η + N + L + K`.
    pub fn alpha(&self) -> f64 {
        (self.eta + self.n() + self.l_train + self.k()) as f64
    }

    /// `S + ηΣ`.
    pub fn regularized_covariance(&self) -> CMatrix {
        &self.s + self.sigma.matrix() * c(self.eta as f64, 0.0)
    }

    /// `[Φ, Υ]`.
    pub fn b(&self) -> CMatrix {
        let (n, p, q) = (self.n(), self.phi.ncols(), self.upsilon.ncols());
        let mut b = CMatrix::zeros(n, p + q);
        b.columns_mut(0, p).copy_from(&self.phi);
        b.columns_mut(p, q).copy_from(&self.upsilon);
        b
    }

    fn whitening_matrix(&self, mode: WhiteningMode) -> Result<CMatrix> {
        match mode {
            WhiteningMode::Bayesian => Ok(self.regularized_covariance()),
            WhiteningMode::Ordinary => {
                if self.l_train < self.n() {
                    return Err(Error::SampleStarved {
                        l_train: self.l_train,
                        n_dim: self.n(),
                    });
                }
                Ok(self.s.clone())
            }
        }
    }
}

/// Whitened data and subspaces with their cached projectors.
#[derive(Debug, Clone)]
pub struct WhitenedBundle {
    pub mode: WhiteningMode,
    /// `F` with `F Fᴴ = M`; whitened quantities are `F⁻¹ X`.
    pub factor: CMatrix,
    pub z_w: CMatrix,
    pub phi_w: CMatrix,
    pub upsilon_w: CMatrix,
    pub b_w: CMatrix,
    pub p_perp_upsilon: CMatrix,
    pub p_perp_b: CMatrix,
    /// Projector onto `P⊥_Υ Φ` (whitened).
    pub p_proj_phi_given_upsilon: CMatrix,
}

impl WhitenedBundle {
    /// `Zᴴ P Z` for one of the cached projectors.
    pub fn data_gram(&self, p: &CMatrix) -> CMatrix {
        linalg::hermitize(&(self.z_w.adjoint() * (p * &self.z_w)))
    }

    pub fn k(&self) -> usize {
        self.z_w.ncols()
    }
}

pub fn whiten(input: &DetectorInput, mode: WhiteningMode) -> Result<WhitenedBundle> {
    whiten_with(input, mode, WhiteningFactor::Cholesky)
}

type WhitenFn = Box<dyn Fn(&CMatrix) -> Result<CMatrix>>;

pub fn whiten_with(
    input: &DetectorInput,
    mode: WhiteningMode,
    factor_kind: WhiteningFactor,
) -> Result<WhitenedBundle> {
    let m = input.whitening_matrix(mode)?;
    let context = match mode {
        WhiteningMode::Bayesian => "S + ηΣ (Bayesian whitening)",
        WhiteningMode::Ordinary => "S (ordinary whitening; needs L >= N)",
    };
    let (factor, apply): (CMatrix, WhitenFn) = match factor_kind {
        WhiteningFactor::Cholesky => {
            let f = linalg::cholesky_lower(&m, context)?;
            let fc = f.clone();
            (f, Box::new(move |x| linalg::solve_lower(&fc, x)))
        }
        WhiteningFactor::HermitianSqrt => {
            let root = linalg::hermitian_power(&m, 0.5, context)?;
            let inv_root = linalg::hermitian_power(&m, -0.5, context)?;
            (root, Box::new(move |x| Ok(&inv_root * x)))
        }
    };
    let z_w = apply(&input.z)?;
    let phi_w = apply(&input.phi)?;
    let upsilon_w = apply(&input.upsilon)?;
    let b_w = apply(&input.b())?;

    let q_u = linalg::orthonormal_basis(&upsilon_w, "whitened interference subspace")?;
    let q_b = linalg::orthonormal_basis(&b_w, "whitened [Φ, Υ]")?;
    let p_perp_upsilon = linalg::complement_from_basis(&q_u);
    let p_perp_b = linalg::complement_from_basis(&q_b);
    let q_s = linalg::orthonormal_basis(
        &(&p_perp_upsilon * &phi_w),
        "whitened signal subspace after interference rejection",
    )?;
    let p_proj_phi_given_upsilon = linalg::projector_from_basis(&q_s);

    Ok(WhitenedBundle {
        mode,
        factor,
        z_w,
        phi_w,
        upsilon_w,
        b_w,
        p_perp_upsilon,
        p_perp_b,
        p_proj_phi_given_upsilon,
    })
}

fn eye_plus(g: &CMatrix) -> CMatrix {
    linalg::identity(g.nrows()) + g
}

/// Determinant ratio `|I + Zᴴ P⊥_Υ Z| / |I + Zᴴ P⊥_B Z|` on a whitened bundle.
pub fn glrt_ratio(b: &WhitenedBundle) -> Result<f64> {
    let num = linalg::log_det_hpd(&eye_plus(&b.data_gram(&b.p_perp_upsilon)), "I + ZᴴP⊥_ΥZ")?;
    let den = linalg::log_det_hpd(&eye_plus(&b.data_gram(&b.p_perp_b)), "I + ZᴴP⊥_BZ")?;
    Ok((num - den).exp())
}

/// `tr[Zᴴ P⊥_Υ Φ (Φᴴ P⊥_Υ Φ)⁻¹ Φᴴ P⊥_Υ Z]` on a whitened bundle.
pub fn two_step_trace(b: &WhitenedBundle) -> Result<f64> {
    let pu_phi = &b.p_perp_upsilon * &b.phi_w;
    let x = pu_phi.adjoint() * &b.z_w;
    let gram = linalg::hermitize(&(b.phi_w.adjoint() * &pu_phi));
    let solved = linalg::hpd_solve(&gram, &x, "ΦᴴP⊥_ΥΦ")?;
    Ok(linalg::trace_re(&(x.adjoint() * solved)))
}

/// B-Rao-I in its compact form
/// `tr[(I + ZᴴP⊥_Υ Z)⁻¹ Zᴴ P_{P⊥_Υ Φ} Z (I + ZᴴP⊥_B Z)⁻¹]`.
pub fn rao_trace(b: &WhitenedBundle) -> Result<f64> {
    let g_u = b.data_gram(&b.p_perp_upsilon);
    let g_s = b.data_gram(&b.p_proj_phi_given_upsilon);
    let g_b = b.data_gram(&b.p_perp_b);
    let t = rao_resolvent_trace(&g_u, &g_s, &eye_plus(&g_b))?;
    debug_assert!({
        let alt = rao_trace_unsplit(b)?;
        (alt - t).abs() <= 1e-6 * t.abs().max(1e-12)
    });
    Ok(t)
}

/// B-Rao-I with the second resolvent written as `I + ZᴴP⊥_Υ Z − Zᴴ P_{P⊥_Υ Φ} Z`,
/// i.e. before the projector decomposition `P⊥_B = P⊥_Υ − P_{P⊥_Υ Φ}` is applied.
pub fn rao_trace_unsplit(b: &WhitenedBundle) -> Result<f64> {
    let g_u = b.data_gram(&b.p_perp_upsilon);
    let g_s = b.data_gram(&b.p_proj_phi_given_upsilon);
    let second = eye_plus(&g_u) - &g_s;
    rao_resolvent_trace(&g_u, &g_s, &second)
}

fn rao_resolvent_trace(g_u: &CMatrix, g_s: &CMatrix, second: &CMatrix) -> Result<f64> {
    // tr(A⁻¹ G B⁻¹) = tr(B⁻¹ (A⁻¹ G))
    let left = linalg::hpd_solve(&eye_plus(g_u), g_s, "I + ZᴴP⊥_ΥZ")?;
    let both = linalg::hpd_solve(second, &left, "I + ZᴴP⊥_BZ")?;
    Ok(linalg::trace_re(&both))
}

/// GLRT-I, whitened by the sample covariance.
pub fn t_glrt_i(input: &DetectorInput) -> Result<f64> {
    glrt_ratio(&whiten(input, WhiteningMode::Ordinary)?)
}

/// 2S-GLRT-I, whitened by the sample covariance.
pub fn t_2s_glrt_i(input: &DetectorInput) -> Result<f64> {
    two_step_trace(&whiten(input, WhiteningMode::Ordinary)?)
}

pub fn t_b_glrt_i(input: &DetectorInput) -> Result<f64> {
    glrt_ratio(&whiten(input, WhiteningMode::Bayesian)?)
}

pub fn t_b_2s_glrt_i(input: &DetectorInput) -> Result<f64> {
    two_step_trace(&whiten(input, WhiteningMode::Bayesian)?)
}

pub fn t_b_rao_i(input: &DetectorInput) -> Result<f64> {
    rao_trace(&whiten(input, WhiteningMode::Bayesian)?)
}

/// Bayesian Wald statistic `tr(Δᴴ Λ Δ)` evaluated at the H₁ MAP covariance
/// `R̂₁`, using `R̂₁⁻¹Φ = α(S+ηΣ)⁻¹Φ` and `R̂₁⁻¹Υ = α(S+ηΣ)⁻¹Υ`.
///
/// Works on the unwhitened data; equals `α · t_b_2s_glrt_i` in exact arithmetic.
pub fn t_b_wald(input: &DetectorInput) -> Result<f64> {
    let m = input.regularized_covariance();
    let chol = linalg::cholesky(&m, "S + ηΣ (Bayesian whitening)")?;
    let alpha = c(input.alpha(), 0.0);
    let ri_phi = chol.solve(&input.phi) * alpha;
    let ri_ups = chol.solve(&input.upsilon) * alpha;
    wald_given_inverse_products(input, &ri_phi, &ri_ups)
}

/// Wald statistic for a given covariance `R`, with `R⁻¹Φ` and `R⁻¹Υ` formed by
/// solving against `R` directly.
pub fn wald_statistic_for(r: &CMatrix, input: &DetectorInput) -> Result<f64> {
    let chol = linalg::cholesky(r, "covariance R")?;
    let ri_phi = chol.solve(&input.phi);
    let ri_ups = chol.solve(&input.upsilon);
    wald_given_inverse_products(input, &ri_phi, &ri_ups)
}

/// `Δ = ΦᴴR⁻¹[Z − Υ(ΥᴴR⁻¹Υ)⁻¹ΥᴴR⁻¹Z]`,
/// `Λ = [ΦᴴR⁻¹Φ − ΦᴴR⁻¹Υ(ΥᴴR⁻¹Υ)⁻¹ΥᴴR⁻¹Φ]⁻¹`, statistic `tr(ΔᴴΛΔ)`.
fn wald_given_inverse_products(
    input: &DetectorInput,
    ri_phi: &CMatrix,
    ri_ups: &CMatrix,
) -> Result<f64> {
    let z = &input.z;
    let ups_gram = linalg::hermitize(&(input.upsilon.adjoint() * ri_ups));
    let ups_chol = linalg::cholesky(&ups_gram, "ΥᴴR⁻¹Υ")?;
    // (ΥᴴR⁻¹Υ)⁻¹ ΥᴴR⁻¹ applied to Z and Φ
    let w_z = ups_chol.solve(&(ri_ups.adjoint() * z));
    let w_phi = ups_chol.solve(&(ri_ups.adjoint() * &input.phi));
    let delta = ri_phi.adjoint() * (z - &input.upsilon * w_z);
    let lambda_inv = linalg::hermitize(
        &(ri_phi.adjoint() * &input.phi - ri_phi.adjoint() * &input.upsilon * w_phi),
    );
    let solved = linalg::hpd_solve(&lambda_inv, &delta, "Λ⁻¹")?;
    Ok(linalg::trace_re(&(delta.adjoint() * solved)))
}

/// MAP estimate of the interference coordinates under H₀:
/// least squares of whitened `Z` on whitened `Υ`.
pub fn map_w(input: &DetectorInput) -> Result<CMatrix> {
    let b = whiten(input, WhiteningMode::Bayesian)?;
    map_w_from_bundle(&b)
}

pub fn map_w_from_bundle(b: &WhitenedBundle) -> Result<CMatrix> {
    let q = b.upsilon_w.ncols();
    if q == 0 {
        return Ok(CMatrix::zeros(0, b.k()));
    }
    let qr = b.upsilon_w.clone().qr();
    let rhs = qr.q().adjoint() * &b.z_w;
    qr.r()
        .solve_upper_triangular(&rhs)
        .ok_or(Error::RankDeficient {
            what: "whitened interference subspace",
            ratio: 0.0,
        })
}

/// `F (P Z Zᴴ P + I) Fᴴ / α` for a projector `P` on the Bayesian bundle.
fn map_covariance(input: &DetectorInput, b: &WhitenedBundle, p: &CMatrix) -> CMatrix {
    let pz = p * &b.z_w;
    let inner = &pz * pz.adjoint() + linalg::identity(input.n());
    linalg::hermitize(&(&b.factor * inner * b.factor.adjoint())) / c(input.alpha(), 0.0)
}

/// MAP estimate of `R` under H₀ at `W = Ŵ`.
pub fn map_r0(input: &DetectorInput) -> Result<CMatrix> {
    let b = whiten(input, WhiteningMode::Bayesian)?;
    Ok(map_covariance(input, &b, &b.p_perp_upsilon))
}

/// MAP estimate of `R` under H₁ at the MAP coordinates `Ĉ`.
pub fn map_r1(input: &DetectorInput) -> Result<CMatrix> {
    let b = whiten(input, WhiteningMode::Bayesian)?;
    Ok(map_covariance(input, &b, &b.p_perp_b))
}

/// `R̂₀⁻¹` in Woodbury form:
/// `α F⁻ᴴ [I − P⊥_Υ Z (I + Zᴴ P⊥_Υ Z)⁻¹ Zᴴ P⊥_Υ] F⁻¹`.
pub fn map_r0_inverse(input: &DetectorInput) -> Result<CMatrix> {
    let b = whiten(input, WhiteningMode::Bayesian)?;
    let pz = &b.p_perp_upsilon * &b.z_w;
    let resolvent = eye_plus(&b.data_gram(&b.p_perp_upsilon));
    let inner = linalg::identity(input.n()) - &pz * linalg::hpd_solve(&resolvent, &pz.adjoint(), "I + ZᴴP⊥_ΥZ")?;
    let f_inv = linalg::solve_lower(&b.factor, &linalg::identity(input.n()))?;
    Ok(linalg::hermitize(&(f_inv.adjoint() * inner * f_inv)) * c(input.alpha(), 0.0))
}

/// Logarithm of the H₀ joint density of `(Z, Z_L, R)` up to an additive constant:
/// `−α ln|R| − tr(R⁻¹ (Z₀Z₀ᴴ + S + ηΣ))`, `Z₀ = Z − ΥW`.
pub fn log_joint_h0(r: &CMatrix, w: &CMatrix, input: &DetectorInput) -> Result<f64> {
    if w.shape() != (input.upsilon.ncols(), input.k()) {
        return Err(Error::DimensionMismatch {
            what: "interference coordinates W",
            expected: format!("{}x{}", input.upsilon.ncols(), input.k()),
            got: format!("{}x{}", w.nrows(), w.ncols()),
        });
    }
    let z0 = &input.z - &input.upsilon * w;
    let t = &z0 * z0.adjoint() + input.regularized_covariance();
    let chol = linalg::cholesky(r, "covariance R")?;
    let log_det: f64 = chol
        .l_dirty()
        .diagonal()
        .iter()
        .map(|z| 2.0 * z.re.ln())
        .sum();
    Ok(-input.alpha() * log_det - linalg::trace_re(&chol.solve(&t)))
}

/// Evaluates one detector.
pub fn evaluate(kind: DetectorKind, input: &DetectorInput) -> Result<f64> {
    match kind {
        DetectorKind::GlrtI => t_glrt_i(input),
        DetectorKind::TwoStepGlrtI => t_2s_glrt_i(input),
        DetectorKind::BGlrtI => t_b_glrt_i(input),
        DetectorKind::B2sGlrtI => t_b_2s_glrt_i(input),
        DetectorKind::BRaoI => t_b_rao_i(input),
        DetectorKind::BWald => t_b_wald(input),
    }
}

/// Evaluates several detectors on one input, whitening at most once per mode.
pub fn evaluate_many(kinds: &[DetectorKind], input: &DetectorInput) -> Vec<Result<f64>> {
    let needs = |mode| kinds.iter().any(|k| k.whitening_mode() == mode && *k != DetectorKind::BWald);
    let bayes = needs(WhiteningMode::Bayesian).then(|| whiten(input, WhiteningMode::Bayesian));
    let ordinary = needs(WhiteningMode::Ordinary).then(|| whiten(input, WhiteningMode::Ordinary));
    let with = |bundle: &Option<Result<WhitenedBundle>>, f: fn(&WhitenedBundle) -> Result<f64>| {
        match bundle {
            Some(Ok(b)) => f(b),
            Some(Err(e)) => Err(clone_error(e)),
            None => unreachable!("bundle requested for a detector that needs it"),
        }
    };
    kinds
        .iter()
        .map(|kind| match kind {
            DetectorKind::GlrtI => with(&ordinary, glrt_ratio),
            DetectorKind::TwoStepGlrtI => with(&ordinary, two_step_trace),
            DetectorKind::BGlrtI => with(&bayes, glrt_ratio),
            DetectorKind::B2sGlrtI => with(&bayes, two_step_trace),
            DetectorKind::BRaoI => with(&bayes, rao_trace),
            DetectorKind::BWald => t_b_wald(input),
        })
        .collect()
}

fn clone_error(e: &Error) -> Error {
    match e {
        Error::SampleStarved { l_train, n_dim } => Error::SampleStarved {
            l_train: *l_train,
            n_dim: *n_dim,
        },
        Error::NotPositiveDefinite { context } => Error::NotPositiveDefinite {
            context: context.clone(),
        },
        Error::RankDeficient { what, ratio } => Error::RankDeficient {
            what,
            ratio: *ratio,
        },
        other => Error::Precondition(other.to_string()),
    }
}
