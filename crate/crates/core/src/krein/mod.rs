//! Finite-dimensional Krein spaces.
//!
//! A Krein space here is `C^d` with a Hermitian invertible Gram matrix `G`,
//! `(u, v) = u† G v`. A fundamental symmetry `J` is an involution for which
//! `⟨u, v⟩_J = (u, J v)` is a scalar product, i.e. `G·J` is Hermitian positive
//! definite. Operator adjoints are taken in either product:
//!
//! * Krein adjoint `A⁺ = G⁻¹ A† G`,
//! * `J`-adjoint `A^{*J} = (GJ)⁻¹ A† (GJ)`,
//!
//! and they are related by `A⁺ = J A^{*J} J`.

mod sequence;

pub use sequence::{
    characteristic_sequence, convergence_table, dixmier_estimate, dixmier_estimate_sums,
    lp_plus_diagnostic, running_slopes, ComplexEstimate, ConvergenceRow, DixmierEstimate, Estimator,
    EstimatorMethod, SingularSequence, Window, CONVERGENCE_THRESHOLD, MIN_WINDOW,
};

use thiserror::Error;

pub use crate::linalg::{hermitian_eigh, Eigh};
use crate::linalg::{self, CMat, LinalgError};

/// Condition number above which a Gram matrix is rejected as degenerate.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KreinError {
    #[error("dimension mismatch: operator is {got}x{got}, space has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Gram matrix is degenerate (condition number {0:.3e})")]
    Degenerate(f64),
    #[error("not a fundamental symmetry: {0}")]
    NotFundamentalSymmetry(String),
    #[error("operator is not Krein-selfadjoint (defect {0:.3e})")]
    NotKreinSelfadjoint(f64),
    #[error("negative entry {0} in a singular-value sequence")]
    NegativeSingularValue(f64),
    #[error("p must be at least 1 (got {0})")]
    InvalidExponent(f64),
    #[error("estimation window holds {0} points; at least 8 are required")]
    WindowTooSmall(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `C^d` with the indefinite inner product `(u, v) = u† G v`.
#[derive(Debug, Clone)]
pub struct KreinSpace {
    gram: CMat,
    gram_inv: CMat,
}

impl KreinSpace {
    pub fn new(gram: CMat) -> Result<Self, KreinError> {
        linalg::ensure_square(&gram)?;
        let eig = hermitian_eigh(&gram, 1e-10)?;
        let (lo, hi) = eig
            .values
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), v| (lo.min(v.abs()), hi.max(v.abs())));
        let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if cond > MAX_CONDITION {
            return Err(KreinError::Degenerate(cond));
        }
        let gram_inv = linalg::inverse(&gram)?;
        Ok(Self { gram, gram_inv })
    }

    /// Hilbert space case `G = I`.
    pub fn euclidean(dim: usize) -> Self {
        Self {
            gram: linalg::identity(dim),
            gram_inv: linalg::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &CMat {
        &self.gram
    }

    fn check(&self, a: &CMat) -> Result<(), KreinError> {
        let d = linalg::ensure_square(a)?;
        if d != self.dim() {
            return Err(KreinError::DimensionMismatch {
                expected: self.dim(),
                got: d,
            });
        }
        Ok(())
    }

    /// `(u, v)`.
    pub fn inner(&self, u: &CMat, v: &CMat) -> CMat {
        u.adjoint() * &self.gram * v
    }
}

/// Krein adjoint `A⁺ = G⁻¹ A† G`, characterized by `(v, A w) = (A⁺ v, w)`.
pub fn krein_adjoint(a: &CMat, space: &KreinSpace) -> Result<CMat, KreinError> {
    space.check(a)?;
    Ok(&space.gram_inv * a.adjoint() * &space.gram)
}

pub fn is_krein_selfadjoint(a: &CMat, space: &KreinSpace, tol: f64) -> bool {
    match krein_adjoint(a, space) {
        Ok(plus) => linalg::max_diff(a, &plus) < tol,
        Err(_) => false,
    }
}

/// An involution `J` with `G·J` Hermitian positive definite.
#[derive(Debug, Clone)]
pub struct FundamentalSymmetry {
    j: CMat,
    /// `M = G J`, the Gram matrix of the `J`-scalar product.
    metric: CMat,
    metric_inv: CMat,
    metric_sqrt: CMat,
    metric_sqrt_inv: CMat,
}

impl FundamentalSymmetry {
    pub fn new(space: &KreinSpace, j: CMat, tol: f64) -> Result<Self, KreinError> {
        space.check(&j)?;
        let id = linalg::identity(space.dim());
        let inv = linalg::max_diff(&(&j * &j), &id);
        if inv > tol {
            return Err(KreinError::NotFundamentalSymmetry(format!("J² ≠ I (defect {inv:.3e})")));
        }
        let m = &space.gram * &j;
        let herm = linalg::hermitian_defect(&m);
        if herm > tol {
            return Err(KreinError::NotFundamentalSymmetry(format!(
                "G·J is not Hermitian (defect {herm:.3e})"
            )));
        }
        let m = (&m + m.adjoint()).scale(0.5);
        let eig = hermitian_eigh(&m, tol)?;
        let min = eig.values[0];
        if min <= tol {
            return Err(KreinError::NotFundamentalSymmetry(format!(
                "J-product is not positive definite (smallest eigenvalue {min:.3e})"
            )));
        }
        Ok(Self {
            j,
            metric_inv: eig.map(|x| 1.0 / x),
            metric_sqrt: eig.map(f64::sqrt),
            metric_sqrt_inv: eig.map(|x| 1.0 / x.sqrt()),
            metric: m,
        })
    }

    /// `J = 2P − I` for the `G`-orthogonal projection `P = V (V†GV)⁻¹ V† G`
    /// onto the span of the columns of `positive`, which must be a maximal
    /// positive subspace.
    pub fn from_positive_subspace(space: &KreinSpace, positive: &CMat) -> Result<Self, KreinError> {
        let d = space.dim();
        if positive.nrows() != d {
            return Err(KreinError::DimensionMismatch {
                expected: d,
                got: positive.nrows(),
            });
        }
        let small = positive.adjoint() * &space.gram * positive;
        let small_inv = linalg::inverse(&small)?;
        let p = positive * small_inv * positive.adjoint() * &space.gram;
        let j = p.scale(2.0) - linalg::identity(d);
        Self::new(space, j, 1e-10)
    }

    pub fn matrix(&self) -> &CMat {
        &self.j
    }

    /// Gram matrix `G·J` of the `J`-scalar product.
    pub fn metric(&self) -> &CMat {
        &self.metric
    }

    /// `A^{*J} = (GJ)⁻¹ A† (GJ)`.
    pub fn j_adjoint(&self, a: &CMat) -> CMat {
        &self.metric_inv * a.adjoint() * &self.metric
    }

    /// Conjugate into the `J`-orthonormal frame: `M^{1/2} A M^{-1/2}`. Operators
    /// that are `J`-selfadjoint become Hermitian.
    pub fn to_orthonormal(&self, a: &CMat) -> CMat {
        &self.metric_sqrt * a * &self.metric_sqrt_inv
    }

    pub fn from_orthonormal(&self, a: &CMat) -> CMat {
        &self.metric_sqrt_inv * a * &self.metric_sqrt
    }

    /// Diagonal entries `⟨ψ_i, A ψ_i⟩_J` in the `J`-orthonormal frame `ψ_i = M^{-1/2} e_i`.
    pub fn orthonormal_diagonal(&self, a: &CMat) -> Vec<num_complex::Complex64> {
        self.to_orthonormal(a).diagonal().iter().copied().collect()
    }
}

/// `J`-modulus `[A]_J = (½(A^{*J} A + A A^{*J}))^{1/2}` of a Krein-selfadjoint operator.
///
/// The square root is taken in the `J`-scalar product, so the result is
/// `J`-selfadjoint, `J`-positive and commutes with `J`.
pub fn j_modulus(a: &CMat, space: &KreinSpace, j: &FundamentalSymmetry) -> Result<CMat, KreinError> {
    let plus = krein_adjoint(a, space)?;
    let scale = linalg::max_abs(a).max(1.0);
    let defect = linalg::max_diff(a, &plus) / scale;
    if defect > 1e-10 {
        return Err(KreinError::NotKreinSelfadjoint(defect));
    }
    Ok(j.from_orthonormal(&linalg::hermitian_sqrt(&j.to_orthonormal(&j_square(a, j)), 1e-9)?))
}

/// `½(A^{*J} A + A A^{*J})`, the square of the `J`-modulus.
pub fn j_square(a: &CMat, j: &FundamentalSymmetry) -> CMat {
    let star = j.j_adjoint(a);
    (&star * a + a * &star).scale(0.5)
}

/// Eigenvalues of a `J`-selfadjoint operator (ascending), computed in the `J`-orthonormal frame.
pub fn j_selfadjoint_eigenvalues(a: &CMat, j: &FundamentalSymmetry) -> Result<Vec<f64>, KreinError> {
    Ok(hermitian_eigh(&j.to_orthonormal(a), 1e-9)?.values)
}

/// Operator modulus `|A|` of a `J`-selfadjoint operator, from the spectral
/// decomposition of `A` itself. For such `A` it agrees with [`j_modulus`].
pub fn j_selfadjoint_abs(a: &CMat, j: &FundamentalSymmetry) -> Result<CMat, KreinError> {
    let eig = hermitian_eigh(&j.to_orthonormal(a), 1e-9)?;
    Ok(j.from_orthonormal(&eig.map(f64::abs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{self, build_gamma, Signature};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut impl Rng, d: usize) -> CMat {
        CMat::from_fn(d, d, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    /// Krein space and fundamental symmetry from a random positive/negative split.
    fn random_structure(rng: &mut impl Rng, d: usize, neg: usize) -> (KreinSpace, FundamentalSymmetry) {
        // G = S† diag(±1) S for a random invertible S; J = S⁻¹ diag(±1) S
        let s = random_matrix(rng, d) + linalg::identity(d).scale(2.5);
        let signs = CMat::from_fn(d, d, |i, j| {
            if i != j {
                linalg::ZERO
            } else if i < neg {
                -linalg::ONE
            } else {
                linalg::ONE
            }
        });
        let gram = s.adjoint() * &signs * &s;
        let space = KreinSpace::new((&gram + gram.adjoint()).scale(0.5)).unwrap();
        let j = linalg::inverse(&s).unwrap() * &signs * &s;
        let fs = FundamentalSymmetry::new(&space, j, 1e-9).unwrap();
        (space, fs)
    }

    #[test]
    fn euclidean_adjoint_is_dagger() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_matrix(&mut rng, 4);
        let plus = krein_adjoint(&a, &KreinSpace::euclidean(4)).unwrap();
        assert!(linalg::max_diff(&plus, &a.adjoint()) < 1e-15);
    }

    #[test]
    fn gamma_adjoints_carry_the_signature_sign() {
        for (n, k) in [(2, 1), (3, 1), (4, 1), (4, 2), (5, 3)] {
            let rep = build_gamma(Signature::new(n, k).unwrap());
            let space = rep.krein_space().unwrap();
            let sign = rep.signature.parity();
            for g in &rep.gammas {
                let plus = krein_adjoint(g, &space).unwrap();
                assert!(linalg::max_diff(&plus, &g.map(|z| z * sign)) < 1e-12);
            }
        }
    }

    #[test]
    fn adjoint_defining_relation_and_j_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let (space, j) = random_structure(&mut rng, 5, 2);
            let a = random_matrix(&mut rng, 5);
            let plus = krein_adjoint(&a, &space).unwrap();
            let v = CMat::from_fn(5, 1, |_, _| Complex64::new(rng.gen(), rng.gen()));
            let w = CMat::from_fn(5, 1, |_, _| Complex64::new(rng.gen(), rng.gen()));
            let lhs = space.inner(&v, &(&a * &w));
            let rhs = space.inner(&(&plus * &v), &w);
            assert!((lhs[(0, 0)] - rhs[(0, 0)]).norm() < 1e-10);
            let via_j = j.matrix() * j.j_adjoint(&a) * j.matrix();
            assert!(linalg::max_diff(&plus, &via_j) < 1e-10 * linalg::max_abs(&plus).max(1.0));
        }
    }

    #[test]
    fn i_times_identity_is_not_selfadjoint() {
        let rep = build_gamma(Signature::new(2, 1).unwrap());
        let space = rep.krein_space().unwrap();
        let a = linalg::identity(2).map(|z| z * linalg::I);
        assert!(!is_krein_selfadjoint(&a, &space, 1e-12));
    }

    #[test]
    fn hermitian_matrices_selfadjoint_in_hilbert_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 6);
        let h = &a + a.adjoint();
        assert!(is_krein_selfadjoint(&h, &KreinSpace::euclidean(6), 1e-12));
    }

    #[test]
    fn degenerate_gram_rejected() {
        let g = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![linalg::ONE, Complex64::new(1e-14, 0.0)]));
        assert!(matches!(KreinSpace::new(g), Err(KreinError::Degenerate(_))));
    }

    #[test]
    fn modulus_of_j_selfadjoint_is_absolute_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let (space, j) = random_structure(&mut rng, 4, 1);
            // J-selfadjoint A = J·(Krein-selfadjoint) operators are hard to sample;
            // build A = M^{-1/2} H M^{1/2} with H Hermitian, then make it Krein-selfadjoint
            // by requiring it to commute with J as well.
            let h = random_matrix(&mut rng, 4);
            let h = &h + h.adjoint();
            let a0 = j.from_orthonormal(&h);
            let a = (&a0 + j.matrix() * &a0 * j.matrix()).scale(0.5);
            assert!(is_krein_selfadjoint(&a, &space, 1e-9));
            let m1 = j_modulus(&a, &space, &j).unwrap();
            let m2 = j_selfadjoint_abs(&a, &j).unwrap();
            assert!(linalg::max_diff(&m1, &m2) < 1e-10 * linalg::max_abs(&m1).max(1.0));
        }
    }

    #[test]
    fn modulus_commutes_with_j_and_is_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (n, k) in [(2, 1), (3, 1), (4, 2)] {
            let s = Signature::new(n, k).unwrap();
            let rep = build_gamma(s);
            let space = rep.krein_space().unwrap();
            for _ in 0..10 {
                let r = clifford::random_spacelike_reflection(s, &mut rng, 0.8);
                let jm = clifford::fundamental_symmetry_from_reflection(&rep, &r).unwrap();
                let j = FundamentalSymmetry::new(&space, jm, 1e-9).unwrap();
                let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect();
                let d = rep
                    .gamma_of(&y)
                    .map(|z| z * linalg::i_pow(k as i64) * (2.0 * std::f64::consts::PI));
                let m = j_modulus(&d, &space, &j).unwrap();
                let comm = linalg::commutator(&m, j.matrix());
                assert!(linalg::max_abs(&comm) < 1e-9 * linalg::max_abs(&m).max(1.0));
                let eig = j_selfadjoint_eigenvalues(&m, &j).unwrap();
                assert!(eig[0] >= -1e-9);
            }
        }
    }

    #[test]
    fn lorentzian_plane_modulus() {
        let s = Signature::new(2, 1).unwrap();
        let rep = build_gamma(s);
        let space = rep.krein_space().unwrap();
        let jm = clifford::fundamental_symmetry_from_reflection(&rep, &s.standard_reflection()).unwrap();
        let j = FundamentalSymmetry::new(&space, jm, 1e-12).unwrap();
        let d = rep.gamma_of(&[1.0, 0.0]).map(|z| z * linalg::I * (2.0 * std::f64::consts::PI));
        let m = j_modulus(&d, &space, &j).unwrap();
        let eig = j_selfadjoint_eigenvalues(&m, &j).unwrap();
        for e in eig {
            assert!((e - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        }
    }

    #[test]
    fn modulus_rejects_non_selfadjoint() {
        let rep = build_gamma(Signature::new(2, 1).unwrap());
        let space = rep.krein_space().unwrap();
        let j = FundamentalSymmetry::new(&space, -linalg::pauli()[0].clone(), 1e-12).unwrap();
        let a = linalg::identity(2).map(|z| z * linalg::I);
        assert!(matches!(j_modulus(&a, &space, &j), Err(KreinError::NotKreinSelfadjoint(_))));
    }

    /// Closed-form eigenvalues of a 3×3 Hermitian matrix (trigonometric cubic solution).
    fn cubic_eigenvalues(h: &CMat) -> [f64; 3] {
        let a = |i, j| h[(i, j)];
        let tr = (a(0, 0) + a(1, 1) + a(2, 2)).re;
        let q = tr / 3.0;
        let shifted = h - linalg::identity(3).map(|z| z * q);
        let b = |i, j| shifted[(i, j)];
        let p2 = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| b(i, j).norm_sqr())
            .sum::<f64>();
        let p = (p2 / 6.0).sqrt();
        let det = (b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
            - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
            + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0)))
        .re;
        let rr = (det / (2.0 * p * p * p)).clamp(-1.0, 1.0);
        let phi = rr.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let e2 = 3.0 * q - e1 - e3;
        let mut out = [e1, e2, e3];
        out.sort_by(f64::total_cmp);
        out
    }

    #[test]
    fn eigh_matches_cubic_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 3);
            let h = &a + a.adjoint();
            let e = hermitian_eigh(&h, 1e-12).unwrap();
            let oracle = cubic_eigenvalues(&h);
            for (x, y) in e.values.iter().zip(oracle) {
                assert!((x - y).abs() < 1e-10, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn eigh_contract_on_64() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_matrix(&mut rng, 64);
        let h = &a + a.adjoint();
        let e = hermitian_eigh(&h, 1e-12).unwrap();
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let lambda = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            64,
            e.values.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        let res = linalg::max_diff(&(&h * &e.vectors), &(&e.vectors * lambda));
        assert!(res < linalg::TOL_EIG * linalg::max_abs(&h) * 8.0);
    }

    proptest! {
        #[test]
        fn adjoint_involutive_and_antimultiplicative(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (space, _) = random_structure(&mut rng, 4, 2);
            let a = random_matrix(&mut rng, 4);
            let b = random_matrix(&mut rng, 4);
            let pp = krein_adjoint(&krein_adjoint(&a, &space).unwrap(), &space).unwrap();
            prop_assert!(linalg::max_diff(&pp, &a) < 1e-12 * linalg::max_abs(&a).max(1.0) * 1e2);
            let ab = krein_adjoint(&(&a * &b), &space).unwrap();
            let ba = krein_adjoint(&b, &space).unwrap() * krein_adjoint(&a, &space).unwrap();
            prop_assert!(linalg::max_diff(&ab, &ba) < 1e-12 * linalg::max_abs(&ab).max(1.0) * 1e2);
        }
    }
}
