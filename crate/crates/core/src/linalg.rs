//! Small dense complex linear-algebra helpers on top of `nalgebra`.
//!
//! Everything here works on `DMatrix<Complex64>`. Hermitian positive definite
//! systems are always solved through a Cholesky factor; explicit inverses are
//! only formed where a caller needs the matrix itself.

use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Relative rank tolerance: a matrix has full column rank when its smallest
/// singular value exceeds this fraction of the largest one.
pub const RANK_TOL: f64 = 1e-8;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// `(A + Aᴴ) / 2`.
pub fn hermitize(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖a − b‖_F / ‖b‖_F`, falling back to the absolute difference when `b` is zero.
pub fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = frobenius(&(a - b));
    let n = frobenius(b);
    if n > 0.0 {
        d / n
    } else {
        d
    }
}

pub fn rel_diff_scalar(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if b != 0.0 {
        d / b.abs()
    } else {
        d
    }
}

/// Real part of the trace; callers use it on matrices that are Hermitian in
/// exact arithmetic.
pub fn trace_re(a: &CMatrix) -> f64 {
    a.diagonal().iter().map(|z| z.re).sum()
}

/// Cholesky factorization of a Hermitian positive definite matrix.
pub fn cholesky(a: &CMatrix, context: &str) -> Result<Cholesky<Complex64, Dyn>> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            what: "cholesky input",
            expected: "square".into(),
            got: format!("{}x{}", a.nrows(), a.ncols()),
        });
    }
    let h = hermitize(a);
    if h.nrows() == 0 {
        return Cholesky::new(h).ok_or_else(|| Error::NotPositiveDefinite {
            context: context.to_string(),
        });
    }
    let chol = Cholesky::new(h).ok_or_else(|| Error::NotPositiveDefinite {
        context: context.to_string(),
    })?;
    // nalgebra accepts arbitrarily small positive pivots; reject numerically singular input.
    let diag = chol.l_dirty().diagonal();
    let max = diag.iter().map(|z| z.re).fold(0.0_f64, f64::max);
    let min = diag.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    if !(min > 0.0) || !min.is_finite() || min <= max * 1e-12 {
        return Err(Error::NotPositiveDefinite {
            context: context.to_string(),
        });
    }
    Ok(chol)
}

/// Lower Cholesky factor `F` with `F Fᴴ = A`.
pub fn cholesky_lower(a: &CMatrix, context: &str) -> Result<CMatrix> {
    Ok(cholesky(a, context)?.l())
}

/// `A⁻¹ B` for Hermitian positive definite `A`.
pub fn hpd_solve(a: &CMatrix, b: &CMatrix, context: &str) -> Result<CMatrix> {
    Ok(cholesky(a, context)?.solve(b))
}

/// Explicit inverse of a Hermitian positive definite matrix.
pub fn hpd_inverse(a: &CMatrix, context: &str) -> Result<CMatrix> {
    Ok(hermitize(&cholesky(a, context)?.inverse()))
}

/// `ln |A|` for Hermitian positive definite `A`.
pub fn log_det_hpd(a: &CMatrix, context: &str) -> Result<f64> {
    let chol = cholesky(a, context)?;
    Ok(chol
        .l_dirty()
        .diagonal()
        .iter()
        .map(|z| 2.0 * z.re.ln())
        .sum())
}

/// `F⁻¹ B` for lower-triangular `F`.
pub fn solve_lower(f: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    f.solve_lower_triangular(b)
        .ok_or_else(|| Error::NotPositiveDefinite {
            context: "singular triangular factor".into(),
        })
}

/// Ratio of smallest to largest singular value (1 for an empty matrix).
pub fn column_rank_ratio(x: &CMatrix) -> f64 {
    if x.ncols() == 0 {
        return 1.0;
    }
    if x.nrows() < x.ncols() {
        return 0.0;
    }
    let sv = x.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if max > 0.0 {
        min / max
    } else {
        0.0
    }
}

/// Smallest singular value.
pub fn min_singular_value(x: &CMatrix) -> f64 {
    if x.ncols() == 0 {
        return f64::INFINITY;
    }
    x.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Orthonormal basis (thin Q of a Householder QR) for the column space of a
/// full-column-rank matrix.
pub fn orthonormal_basis(x: &CMatrix, what: &'static str) -> Result<CMatrix> {
    let (n, m) = x.shape();
    if m == 0 {
        return Ok(CMatrix::zeros(n, 0));
    }
    let qr = x.clone().qr();
    let ratio = column_rank_ratio(&qr.r());
    if !(ratio > RANK_TOL) {
        return Err(Error::RankDeficient { what, ratio });
    }
    Ok(qr.q())
}

/// Orthogonal projector `Q Qᴴ` onto the span of an orthonormal basis.
pub fn projector_from_basis(q: &CMatrix) -> CMatrix {
    hermitize(&(q * q.adjoint()))
}

/// `I − Q Qᴴ`.
pub fn complement_from_basis(q: &CMatrix) -> CMatrix {
    identity(q.nrows()) - projector_from_basis(q)
}

/// Literal `X (Xᴴ X)⁻¹ Xᴴ`, kept for cross-checking the QR route.
pub fn projector_literal(x: &CMatrix) -> Result<CMatrix> {
    if x.ncols() == 0 {
        return Ok(CMatrix::zeros(x.nrows(), x.nrows()));
    }
    let gram = x.adjoint() * x;
    let solved = hpd_solve(&gram, &x.adjoint(), "Gram matrix XᴴX")?;
    Ok(hermitize(&(x * solved)))
}

/// Hermitian eigen-decomposition based power `A^t` for Hermitian PD `A`.
pub fn hermitian_power(a: &CMatrix, t: f64, context: &str) -> Result<CMatrix> {
    let eig = SymmetricEigen::new(hermitize(a));
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::NotPositiveDefinite {
            context: context.to_string(),
        });
    }
    let u = &eig.eigenvectors;
    let mut scaled = u.clone();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        let s = l.powf(t);
        scaled.column_mut(j).scale_mut(s);
    }
    Ok(hermitize(&(scaled * u.adjoint())))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    SymmetricEigen::new(hermitize(a))
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CMatrix {
        CMatrix::from_row_slice(
            3,
            2,
            &[c(1.0, 0.0), c(0.0, 1.0), c(2.0, -1.0), c(1.0, 0.5), c(0.0, 0.0), c(3.0, 0.0)],
        )
    }

    #[test]
    fn qr_projector_matches_literal() {
        let x = sample();
        let q = orthonormal_basis(&x, "x").unwrap();
        let p = projector_from_basis(&q);
        let lit = projector_literal(&x).unwrap();
        assert!(rel_diff(&p, &lit) < 1e-12);
        assert!(frobenius(&(&p * &p - &p)) < 1e-12);
    }

    #[test]
    fn rank_deficiency_detected() {
        let mut x = sample();
        let col = x.column(0).clone_owned();
        x.set_column(1, &(col * c(2.0, 0.0)));
        assert!(matches!(
            orthonormal_basis(&x, "x"),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn log_det_and_power() {
        let a = CMatrix::from_row_slice(2, 2, &[c(4.0, 0.0), c(1.0, 1.0), c(1.0, -1.0), c(3.0, 0.0)]);
        // det = 12 - 2 = 10
        assert!((log_det_hpd(&a, "a").unwrap() - 10f64.ln()).abs() < 1e-12);
        let h = hermitian_power(&a, 0.5, "a").unwrap();
        assert!(rel_diff(&(&h * &h), &a) < 1e-12);
    }

    #[test]
    fn cholesky_rejects_singular() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(cholesky(&a, "singular").is_err());
        assert!(cholesky(&CMatrix::zeros(2, 2), "zero").is_err());
    }
}
