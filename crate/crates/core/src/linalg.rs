//! Dense complex matrix helpers shared by the Clifford, Krein and torus code.
//!
//! Everything here works on `nalgebra::DMatrix<Complex64>`. The Hermitian
//! eigensolver wraps nalgebra's symmetric QR iteration and then verifies the
//! result against a residual contract, so callers can rely on the bounds
//! rather than on the algorithm.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

/// Dense complex matrix.
pub type CMat = DMatrix<Complex64>;
/// Dense real matrix.
pub type RMat = DMatrix<f64>;

/// Default relative tolerance of the eigensolver residual contract.
pub const TOL_EIG: f64 = 1e-11;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("eigensolver did not converge")]
    NoConvergence,
    #[error("eigen-decomposition violates its contract: residual {residual:.3e}, orthogonality {orthogonality:.3e}")]
    ResidualTooLarge { residual: f64, orthogonality: f64 },
    #[error("matrix is singular")]
    Singular,
}

/// `i^p` as an exact unit complex number.
pub fn i_pow(p: i64) -> Complex64 {
    match p.rem_euclid(4) {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// The three Pauli matrices.
pub fn pauli() -> [CMat; 3] {
    let s1 = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let s2 = CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]);
    let s3 = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
    [s1, s2, s3]
}

/// Kronecker product of a list of factors, left to right. Empty list gives the 1x1 identity.
pub fn kron_all(factors: &[CMat]) -> CMat {
    factors
        .iter()
        .fold(identity(1), |acc, f| acc.kronecker(f))
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_real(m: &RMat) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// `max |a - b|` entrywise.
pub fn max_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_diff");
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a * b + b * a
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn ensure_square(m: &CMat) -> Result<usize, LinalgError> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Relative Hermitian defect `‖H − H†‖_max / max(‖H‖_max, 1e-300)`.
pub fn hermitian_defect(h: &CMat) -> f64 {
    let scale = max_abs(h).max(1e-300);
    max_diff(h, &h.adjoint()) / scale
}

/// Result of [`hermitian_eigh`]: ascending eigenvalues and a unitary matrix
/// of eigenvectors (columns).
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Eigh {
    /// Rebuild `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let d = DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&x| Complex64::new(f(x), 0.0)),
        );
        let scaled = &self.vectors * CMat::from_diagonal(&d);
        scaled * self.vectors.adjoint()
    }
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// `tol` bounds the accepted relative Hermitian defect of the input. The
/// output satisfies `‖HV − VΛ‖ ≤ TOL_EIG·‖H‖` and `‖V†V − I‖ ≤ TOL_EIG`
/// (entrywise max norms, with the dimension folded into the bound).
pub fn hermitian_eigh(h: &CMat, tol: f64) -> Result<Eigh, LinalgError> {
    let n = ensure_square(h)?;
    if n == 0 {
        return Ok(Eigh {
            values: vec![],
            vectors: CMat::zeros(0, 0),
        });
    }
    let asymmetry = hermitian_defect(h);
    if asymmetry > tol {
        return Err(LinalgError::NotHermitian { asymmetry });
    }
    // symmetrize so the solver sees an exactly Hermitian matrix
    let hs = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::try_new(hs.clone(), 1e-15, 10_000).ok_or(LinalgError::NoConvergence)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }

    let scale = max_abs(&hs).max(1e-300);
    let lambda = CMat::from_diagonal(&DVector::from_iterator(
        n,
        values.iter().map(|&x| Complex64::new(x, 0.0)),
    ));
    let residual = max_diff(&(&hs * &vectors), &(&vectors * &lambda)) / scale;
    let orthogonality = max_diff(&(vectors.adjoint() * &vectors), &identity(n));
    let bound = TOL_EIG * (n as f64).sqrt().max(1.0);
    if residual > bound || orthogonality > bound {
        return Err(LinalgError::ResidualTooLarge {
            residual,
            orthogonality,
        });
    }
    Ok(Eigh { values, vectors })
}

/// Principal square root of a positive semi-definite Hermitian matrix.
/// Eigenvalues below zero (roundoff) are clamped.
pub fn hermitian_sqrt(h: &CMat, tol: f64) -> Result<CMat, LinalgError> {
    Ok(hermitian_eigh(h, tol)?.map(|x| x.max(0.0).sqrt()))
}

/// Hermitian positive-definite test via the smallest eigenvalue.
pub fn min_eigenvalue(h: &CMat, tol: f64) -> Result<f64, LinalgError> {
    let e = hermitian_eigh(h, tol)?;
    Ok(e.values.first().copied().unwrap_or(f64::INFINITY))
}

pub fn inverse(m: &CMat) -> Result<CMat, LinalgError> {
    ensure_square(m)?;
    m.clone().try_inverse().ok_or(LinalgError::Singular)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pauli_algebra() {
        let [s1, s2, s3] = pauli();
        assert!(max_diff(&(&s1 * &s2), &s3.scale(1.0).map(|z| z * I)) < 1e-15);
        for s in [&s1, &s2, &s3] {
            assert!(max_diff(&(s * s), &identity(2)) == 0.0);
        }
    }

    #[test]
    fn i_pow_cycles() {
        assert_eq!(i_pow(0), ONE);
        assert_eq!(i_pow(-1), -I);
        assert_eq!(i_pow(5), I);
        assert_eq!(i_pow(6), -ONE);
    }

    #[test]
    fn eigh_sigma3() {
        let [_, _, s3] = pauli();
        let e = hermitian_eigh(&s3, 1e-12).unwrap();
        assert_eq!(e.values, vec![-1.0, 1.0]);
    }

    #[test]
    fn eigh_diag_orders_ascending() {
        let m = CMat::from_diagonal(&DVector::from_vec(vec![c(3.5, 0.0), c(-2.0, 0.0)]));
        let e = hermitian_eigh(&m, 1e-12).unwrap();
        assert_eq!(e.values, vec![-2.0, 3.5]);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = CMat::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(matches!(
            hermitian_eigh(&m, 1e-12),
            Err(LinalgError::NotHermitian { .. })
        ));
    }

    #[test]
    fn sqrt_squares_back() {
        let m = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let r = hermitian_sqrt(&m, 1e-12).unwrap();
        assert!(max_diff(&(&r * &r), &m) < 1e-13);
    }
}
