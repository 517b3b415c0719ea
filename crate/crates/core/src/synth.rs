//! Random sampling of the Bayesian data model.
//!
//! Every sampler is a pure function of its inputs and an [`RngStream`]; a
//! stream is identified by `(seed, stream_id)` so that trial `i` produces
//! the same draws no matter which worker runs it.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::model::{db_to_linear, Coordinates, ScaleMatrix, Scenario, TrialData};

/// Deterministic random stream keyed by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// One circularly symmetric complex Gaussian with unit variance.
    pub fn complex_normal(&mut self) -> num_complex::Complex64 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let re: f64 = StandardNormal.sample(&mut self.rng);
        let im: f64 = StandardNormal.sample(&mut self.rng);
        c(re * h, im * h)
    }

    /// `rows × cols` matrix of IID unit complex Gaussians, filled column by column.
    pub fn complex_normal_matrix(&mut self, rows: usize, cols: usize) -> CMatrix {
        let mut m = CMatrix::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = self.complex_normal();
            }
        }
        m
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    H0,
    H1,
}

/// Columns IID `CN(0, cov)`, built as `F G` with `F` the lower Cholesky factor of `cov`.
pub fn sample_complex_gaussian(
    rows: usize,
    cols: usize,
    cov: &CMatrix,
    rng: &mut RngStream,
) -> Result<CMatrix> {
    if cov.nrows() != rows || cov.ncols() != rows {
        return Err(Error::DimensionMismatch {
            what: "covariance",
            expected: format!("{rows}x{rows}"),
            got: format!("{}x{}", cov.nrows(), cov.ncols()),
        });
    }
    let f = linalg::cholesky_lower(cov, "complex Gaussian covariance")?;
    Ok(color(&f, cols, rng))
}

fn color(factor: &CMatrix, cols: usize, rng: &mut RngStream) -> CMatrix {
    let g = rng.complex_normal_matrix(factor.nrows(), cols);
    factor * g
}

/// Draws `R ~ CW⁻¹_N(η, ηΣ)`: `R⁻¹` is a sum of η outer products of
/// `CN(0, (ηΣ)⁻¹)` vectors.
pub fn sample_inverse_wishart(eta: usize, sigma: &ScaleMatrix, rng: &mut RngStream) -> Result<CMatrix> {
    let n = sigma.dim();
    if eta < n {
        return Err(Error::Precondition(format!(
            "inverse-Wishart needs eta >= N (eta = {eta}, N = {n})"
        )));
    }
    // With ηΣ = L Lᴴ, g = L⁻ᴴ x and x ~ CN(0, I): R⁻¹ = L⁻ᴴ X Xᴴ L⁻¹, so
    // R = L (X Xᴴ)⁻¹ Lᴴ = Yᴴ Y with Y = C⁻¹ Lᴴ, X Xᴴ = C Cᴴ.
    let l = sigma.cholesky_lower() * c((eta as f64).sqrt(), 0.0);
    let x = rng.complex_normal_matrix(n, eta);
    let gram = &x * x.adjoint();
    let chol = linalg::cholesky_lower(&gram, "Wishart Gram matrix")?;
    let y = linalg::solve_lower(&chol, &l.adjoint())?;
    Ok(linalg::hermitize(&(y.adjoint() * y)))
}

/// Rescales `raw` so that `tr(rawᴴ basisᴴ Σ⁻¹ basis raw)` equals the linear
/// power of `target_db`.
pub fn scale_coordinates(
    raw: &CMatrix,
    basis: &CMatrix,
    sigma: &ScaleMatrix,
    target_db: f64,
) -> Result<CMatrix> {
    if basis.ncols() != raw.nrows() || basis.nrows() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            what: "coordinate basis",
            expected: format!("{}x{}", sigma.dim(), raw.nrows()),
            got: format!("{}x{}", basis.nrows(), basis.ncols()),
        });
    }
    let target = db_to_linear(target_db);
    if target == 0.0 {
        return Ok(CMatrix::zeros(raw.nrows(), raw.ncols()));
    }
    let power = whitened_power(raw, basis, sigma)?;
    if !(power > 0.0) {
        return Err(Error::DegenerateScaling(
            "coordinate matrix has zero power".into(),
        ));
    }
    Ok(raw * c((target / power).sqrt(), 0.0))
}

/// `tr(Xᴴ basisᴴ Σ⁻¹ basis X)`.
pub fn whitened_power(x: &CMatrix, basis: &CMatrix, sigma: &ScaleMatrix) -> Result<f64> {
    let w = linalg::solve_lower(sigma.cholesky_lower(), &(basis * x))?;
    Ok(w.iter().map(|z| z.norm_sqr()).sum())
}

/// A synthesized trial together with the coordinates used to build it.
#[derive(Debug, Clone)]
pub struct SynthesizedTrial {
    pub data: TrialData,
    pub coords: Coordinates,
}

/// Draws one trial of the binary hypothesis model.
///
/// Draw order is fixed (R, N, N_L, A, W) and `A` is drawn under both
/// hypotheses, so H₀ and H₁ trials on the same stream share every draw.
pub fn synthesize_trial_detailed(
    scenario: &Scenario,
    hypothesis: Hypothesis,
    rng: &mut RngStream,
) -> Result<SynthesizedTrial> {
    let cfg = &scenario.cfg;
    let (n, k, l) = (cfg.n_dim, cfg.k_cells, cfg.l_train);
    let sub = &scenario.subspaces;

    let r = sample_inverse_wishart(cfg.eta, &scenario.sigma, rng)?;
    let f = linalg::cholesky_lower(&r, "realized covariance R")?;
    let noise = color(&f, k, rng);
    let z_l = color(&f, l, rng);

    let raw_a = rng.complex_normal_matrix(cfg.p_sig, k);
    let raw_w = rng.complex_normal_matrix(cfg.q_intf, k);
    let a = match hypothesis {
        Hypothesis::H1 => scale_coordinates(&raw_a, &sub.phi, &scenario.sigma, cfg.snr_db)?,
        Hypothesis::H0 => CMatrix::zeros(cfg.p_sig, k),
    };
    let w = scale_coordinates(&raw_w, &sub.upsilon, &scenario.sigma, cfg.inr_db)?;

    let mut z = noise;
    z += &sub.upsilon * &w;
    if hypothesis == Hypothesis::H1 {
        z += &sub.phi * &a;
    }
    debug_assert_eq!(z.shape(), (n, k));
    Ok(SynthesizedTrial {
        data: TrialData { z, z_l, true_r: r },
        coords: Coordinates { a, w },
    })
}

pub fn synthesize_trial(
    scenario: &Scenario,
    hypothesis: Hypothesis,
    rng: &mut RngStream,
) -> Result<TrialData> {
    Ok(synthesize_trial_detailed(scenario, hypothesis, rng)?.data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;
    use crate::model::{build_scale_matrix, ScenarioConfig};

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = RngStream::new(7, 3).complex_normal_matrix(3, 3);
        let b = RngStream::new(7, 3).complex_normal_matrix(3, 3);
        let d = RngStream::new(7, 4).complex_normal_matrix(3, 3);
        assert_eq!(a, b);
        assert_ne!(a, d);
    }

    #[test]
    fn gaussian_sample_covariance_identity() {
        let mut rng = RngStream::new(1, 0);
        let n = 100_000;
        let x = sample_complex_gaussian(2, n, &identity(2), &mut rng).unwrap();
        let cov = (&x * x.adjoint()) / c(n as f64, 0.0);
        let err = (cov - identity(2)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 0.02, "max entry error {err}");
    }

    #[test]
    fn gaussian_scalar_variance() {
        let mut rng = RngStream::new(2, 0);
        let n = 100_000;
        let cov = CMatrix::from_element(1, 1, c(4.0, 0.0));
        let x = sample_complex_gaussian(1, n, &cov, &mut rng).unwrap();
        let var = x.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        assert!((3.8..=4.2).contains(&var), "variance {var}");
    }

    #[test]
    fn gaussian_rejects_non_pd() {
        let mut rng = RngStream::new(3, 0);
        assert!(sample_complex_gaussian(2, 3, &CMatrix::zeros(2, 2), &mut rng).is_err());
    }

    #[test]
    fn inverse_wishart_mean_scalar() {
        let sigma = build_scale_matrix(1.0, 0.0, 1).unwrap();
        let mut rng = RngStream::new(11, 0);
        let draws = 10_000;
        let mean = (0..draws)
            .map(|_| sample_inverse_wishart(12, &sigma, &mut rng).unwrap()[(0, 0)].re)
            .sum::<f64>()
            / draws as f64;
        assert!((mean - 12.0 / 11.0).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn inverse_wishart_draws_are_pd() {
        let sigma = build_scale_matrix(1.0, 0.9, 10).unwrap();
        let mut rng = RngStream::new(5, 0);
        for _ in 0..200 {
            let r = sample_inverse_wishart(14, &sigma, &mut rng).unwrap();
            assert!(linalg::cholesky(&r, "draw").is_ok());
        }
        assert!(sample_inverse_wishart(9, &sigma, &mut rng).is_err());
    }

    #[test]
    fn scale_coordinate_examples() {
        let basis = CMatrix::from_column_slice(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]);
        let raw = CMatrix::from_element(1, 1, c(1.0, 0.0));
        let eye = build_scale_matrix(1.0, 0.0, 2).unwrap();
        let out = scale_coordinates(&raw, &basis, &eye, 10.0).unwrap();
        assert!((out[(0, 0)].re - 10f64.sqrt()).abs() < 1e-12);

        let diag = ScaleMatrix::from_matrix(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            vec![c(4.0, 0.0), c(1.0, 0.0)],
        )))
        .unwrap();
        let out = scale_coordinates(&raw, &basis, &diag, 0.0).unwrap();
        assert!((out[(0, 0)].re - 2.0).abs() < 1e-12);

        let out = scale_coordinates(&raw, &basis, &eye, f64::NEG_INFINITY).unwrap();
        assert_eq!(out[(0, 0)], c(0.0, 0.0));

        let zero = CMatrix::zeros(1, 1);
        assert!(matches!(
            scale_coordinates(&zero, &basis, &eye, 0.0),
            Err(Error::DegenerateScaling(_))
        ));
    }

    #[test]
    fn snr_trace_is_exact() {
        let mut cfg = ScenarioConfig::reference();
        cfg.snr_db = 15.0;
        let sc = Scenario::new(&cfg).unwrap();
        let mut rng = RngStream::new(cfg.seed, 0);
        let t = synthesize_trial_detailed(&sc, Hypothesis::H1, &mut rng).unwrap();
        let snr = whitened_power(&t.coords.a, &sc.subspaces.phi, &sc.sigma).unwrap();
        let inr = whitened_power(&t.coords.w, &sc.subspaces.upsilon, &sc.sigma).unwrap();
        assert!((snr / 10f64.powf(1.5) - 1.0).abs() < 1e-10);
        assert!((inr / 10.0 - 1.0).abs() < 1e-10);
        assert_eq!(t.data.z.shape(), (10, 4));
        assert_eq!(t.data.z_l.shape(), (10, 12));
    }

    #[test]
    fn h1_at_zero_snr_power_equals_h0() {
        let mut cfg = ScenarioConfig::reference();
        cfg.snr_db = f64::NEG_INFINITY;
        let sc = Scenario::new(&cfg).unwrap();
        let h0 = synthesize_trial(&sc, Hypothesis::H0, &mut RngStream::new(9, 1)).unwrap();
        let h1 = synthesize_trial(&sc, Hypothesis::H1, &mut RngStream::new(9, 1)).unwrap();
        assert_eq!(h0, h1);
    }
}
