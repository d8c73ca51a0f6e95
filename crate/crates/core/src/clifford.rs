//! Complexified Clifford algebras `Cl_{n,k}` on the spinor module `Δ_{n,k}`.
//!
//! The representation is built from tensor products of Pauli matrices. For the
//! generator `x_i` (1-based) of an even-dimensional signature `n = 2m`:
//!
//! ```text
//! γ_{2j+1} = τ(2j+1) · σ3^{⊗j}     ⊗ σ1 ⊗ 1^{⊗(m-j-1)}
//! γ_{2j}   = τ(2j)   · σ3^{⊗(j-1)} ⊗ σ2 ⊗ 1^{⊗(m-j)}
//! ```
//!
//! with `τ(i) = i` for `i ≤ k` (timelike directions) and `1` otherwise. For odd
//! `n = 2m + 1` the first `2m` generators are those of `n = 2m` and the last one
//! is `τ(n) · σ3^{⊗m}`, which is the first summand of the `Mat ⊕ Mat`
//! representation.
//!
//! The spinor module carries the indefinite inner product
//! `(u, v) = i^{k(k+1)/2} ⟨γ_1 ⋯ γ_k u, v⟩`, stored as a Gram matrix `G` with
//! `(u, v) = u† G v`. Spacelike reflections `r` of `(R^n, g)` induce
//! fundamental symmetries `J_r = i^{k(k+1)/2} γ(e_1) ⋯ γ(e_k)` where `e_i` is an
//! oriented `g`-orthonormal basis of the `(−1)`-eigenspace of `r`.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, i_pow, CMat, LinalgError, RMat, ONE};
use crate::report::Report;

/// Default upper bound on `n`; the spinor dimension is `2^{⌊n/2⌋}`.
pub const DEFAULT_MAX_DIM: usize = 12;
/// Tolerance for identities that only involve matrix products.
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance for results that pass through an eigenspace extraction.
pub const SPECTRAL_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliffordError {
    #[error("signature requires n ≥ 1 (got n = {0})")]
    EmptySignature(usize),
    #[error("dimension overflow: n = {n} exceeds the configured maximum {max}")]
    DimensionOverflow { n: usize, max: usize },
    #[error("k = {k} exceeds n = {n}")]
    InvalidIndex { n: usize, k: usize },
    #[error("matrix has shape {rows}x{cols}, expected {expected}x{expected}")]
    Shape {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("not a spacelike reflection: {0}")]
    NotSpacelikeReflection(String),
    #[error("subspace is not g-negative definite (smallest −g eigenvalue {0:.3e})")]
    NotNegativeDefinite(f64),
    #[error("subspace basis has {got} vectors, expected {expected}")]
    SubspaceDimension { expected: usize, got: usize },
    #[error("fundamental symmetry is not of reflection type: {}", format_violations(.0))]
    NotReflectionType(Vec<Violation>),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| format!("{:?} ({:.3e})", x.condition, x.value))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Preconditions of the fundamental-symmetry classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// `J² = I`.
    Involution,
    /// `G·J` Hermitian positive definite.
    PositiveProduct,
    /// `J` commutes or anticommutes with the grading (even `n`).
    GradingCompatible,
    /// `(Jγ(v))² + (γ(v)J)²` is proportional to the identity.
    ProportionalToIdentity,
    /// The extracted map on `R^n` is a spacelike reflection.
    ExtractedReflection,
    /// `J_r` rebuilt from the extracted `r` reproduces `J`.
    Reconstruction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: Condition,
    pub value: f64,
}

/// The pair `(n, k)` fixing `q_{n,k}(x) = −x_1² − … − x_k² + x_{k+1}² + … + x_n²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    n: usize,
    k: usize,
}

impl Signature {
    pub fn new(n: usize, k: usize) -> Result<Self, CliffordError> {
        Self::with_max_dim(n, k, DEFAULT_MAX_DIM)
    }

    pub fn with_max_dim(n: usize, k: usize, max: usize) -> Result<Self, CliffordError> {
        if n == 0 {
            return Err(CliffordError::EmptySignature(n));
        }
        if n > max {
            return Err(CliffordError::DimensionOverflow { n, max });
        }
        if k > n {
            return Err(CliffordError::InvalidIndex { n, k });
        }
        Ok(Self { n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `2^{⌊n/2⌋}`.
    pub fn spinor_dim(&self) -> usize {
        1 << (self.n / 2)
    }

    /// Diagonal entry `g_ii` (0-based `i`).
    pub fn metric_sign(&self, i: usize) -> f64 {
        if i < self.k {
            -1.0
        } else {
            1.0
        }
    }

    /// `(−1)^k`.
    pub fn parity(&self) -> f64 {
        if self.k.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn metric(&self) -> RMat {
        RMat::from_fn(self.n, self.n, |i, j| if i == j { self.metric_sign(i) } else { 0.0 })
    }

    /// `q_{n,k}(v)`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        v.iter()
            .enumerate()
            .map(|(i, x)| self.metric_sign(i) * x * x)
            .sum()
    }

    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter()
            .zip(v)
            .enumerate()
            .map(|(i, (a, b))| self.metric_sign(i) * a * b)
            .sum()
    }

    /// The standard reflection `r₀ = diag(−1,…,−1, 1,…,1)`.
    pub fn standard_reflection(&self) -> SpacelikeReflection {
        SpacelikeReflection {
            signature: *self,
            matrix: self.metric(),
        }
    }
}

/// Gamma matrices, grading and Krein form on `Δ_{n,k}`.
#[derive(Debug, Clone)]
pub struct GammaRep {
    pub signature: Signature,
    pub dim: usize,
    pub gammas: Vec<CMat>,
    /// Grading for even `n`; the identity for odd `n`.
    pub chi: CMat,
    /// Hermitian Gram matrix `G` of the indefinite inner product.
    pub krein_gram: CMat,
}

fn tau(i: usize, k: usize) -> Complex64 {
    // `i` is 1-based here
    if i <= k {
        linalg::I
    } else {
        ONE
    }
}

fn even_generators(m: usize, k: usize) -> Vec<CMat> {
    let [s1, s2, s3] = linalg::pauli();
    let id = linalg::identity(2);
    let mut out = Vec::with_capacity(2 * m);
    for j in 0..m {
        let mut odd_factors = vec![s3.clone(); j];
        odd_factors.push(s1.clone());
        odd_factors.extend(std::iter::repeat_n(id.clone(), m - j - 1));
        let mut even_factors = vec![s3.clone(); j];
        even_factors.push(s2.clone());
        even_factors.extend(std::iter::repeat_n(id.clone(), m - j - 1));
        out.push(linalg::kron_all(&odd_factors).map(|z| z * tau(2 * j + 1, k)));
        out.push(linalg::kron_all(&even_factors).map(|z| z * tau(2 * j + 2, k)));
    }
    out
}

fn product(mats: &[&CMat], dim: usize) -> CMat {
    mats.iter().fold(linalg::identity(dim), |acc, m| acc * *m)
}

/// Build `Φ_{n,k}` on `Δ_{n,k}` together with the grading and the Krein form.
pub fn build_gamma(sig: Signature) -> GammaRep {
    let (n, k) = (sig.n(), sig.k());
    let m = n / 2;
    let dim = sig.spinor_dim();
    let mut gammas = even_generators(m, k);
    if n % 2 == 1 {
        let [_, _, s3] = linalg::pauli();
        let last = linalg::kron_all(&vec![s3; m]).map(|z| z * tau(n, k));
        gammas.push(last);
    }

    let chi = if n % 2 == 0 {
        let refs: Vec<&CMat> = gammas.iter().collect();
        let exponent = (n * (n - 1) / 2 + k) as i64;
        product(&refs, dim).map(|z| z * i_pow(exponent))
    } else {
        linalg::identity(dim)
    };

    let phase = i_pow((k * (k + 1) / 2) as i64);
    let timelike: Vec<&CMat> = gammas[..k].iter().collect();
    let p = product(&timelike, dim);
    // (u, v) = phase · ⟨P u, v⟩ = u† (phase · P†) v
    let mut gram = p.adjoint().map(|z| z * phase);
    let j0 = p.map(|z| z * phase);
    // fix the free sign so that the standard reflection gives a positive product
    let gj = &gram * &j0;
    if linalg::trace(&gj).re < 0.0 {
        gram = -gram;
    }

    GammaRep {
        signature: sig,
        dim,
        gammas,
        chi,
        krein_gram: gram,
    }
}

impl GammaRep {
    pub fn n(&self) -> usize {
        self.signature.n()
    }

    /// `γ(v) = Σ v_i γ_i`.
    pub fn gamma_of(&self, v: &[f64]) -> CMat {
        assert_eq!(v.len(), self.n(), "vector length must equal n");
        let mut out = CMat::zeros(self.dim, self.dim);
        for (x, g) in v.iter().zip(&self.gammas) {
            if *x != 0.0 {
                out += g.map(|z| z * *x);
            }
        }
        out
    }

    /// `γ_i^{-1} = g_ii γ_i`.
    pub fn gamma_inverse(&self, i: usize) -> CMat {
        self.gammas[i].map(|z| z * self.signature.metric_sign(i))
    }

    /// Ordered product `γ_{s_1} ⋯ γ_{s_p}` for the set bits of `mask` (ascending).
    pub fn blade(&self, mask: u32) -> CMat {
        let mut out = linalg::identity(self.dim);
        for i in 0..self.n() {
            if mask & (1 << i) != 0 {
                out *= &self.gammas[i];
            }
        }
        out
    }

    pub fn krein_space(&self) -> Result<crate::krein::KreinSpace, crate::krein::KreinError> {
        crate::krein::KreinSpace::new(self.krein_gram.clone())
    }

    /// Krein adjoint `G^{-1} A† G` on the spinor module.
    pub fn krein_adjoint(&self, a: &CMat) -> CMat {
        let ginv = linalg::inverse(&self.krein_gram).expect("Krein form is invertible by construction");
        ginv * a.adjoint() * &self.krein_gram
    }

    fn expect_square(&self, m: &CMat) -> Result<(), CliffordError> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(CliffordError::Shape {
                rows: m.nrows(),
                cols: m.ncols(),
                expected: self.dim,
            });
        }
        Ok(())
    }
}

/// Max violation of each defining relation of a [`GammaRep`]; passes iff all are below `tol`.
pub fn verify_clifford_relations(rep: &GammaRep, tol: f64) -> Report {
    let sig = rep.signature;
    let n = rep.n();
    let id = linalg::identity(rep.dim);
    let mut report = Report::new();

    let mut anti = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let mut lhs = linalg::anticommutator(&rep.gammas[i], &rep.gammas[j]);
            if i == j {
                lhs -= id.map(|z| z * (2.0 * sig.metric_sign(i)));
            }
            anti = anti.max(linalg::max_abs(&lhs));
        }
    }
    report.push("anticommutator", anti, tol);

    if n.is_multiple_of(2) {
        report.push("chi_squared", linalg::max_diff(&(&rep.chi * &rep.chi), &id), tol);
        let chi_anti = rep
            .gammas
            .iter()
            .map(|g| linalg::max_abs(&linalg::anticommutator(&rep.chi, g)))
            .fold(0.0, f64::max);
        report.push("chi_anticommutes", chi_anti, tol);
    } else {
        report.push("chi_identity", linalg::max_diff(&rep.chi, &id), tol);
    }

    report.push(
        "gram_hermitian",
        linalg::max_diff(&rep.krein_gram, &rep.krein_gram.adjoint()),
        tol,
    );
    match linalg::inverse(&rep.krein_gram) {
        Ok(ginv) => {
            let parity = sig.parity();
            let adj = rep
                .gammas
                .iter()
                .map(|g| {
                    let plus = &ginv * g.adjoint() * &rep.krein_gram;
                    linalg::max_diff(&plus, &g.map(|z| z * parity))
                })
                .fold(0.0, f64::max);
            report.push("gamma_krein_adjoint", adj, tol);
            if n.is_multiple_of(2) {
                let plus = &ginv * rep.chi.adjoint() * &rep.krein_gram;
                report.push(
                    "chi_krein_adjoint",
                    linalg::max_diff(&plus, &rep.chi.map(|z| z * parity)),
                    tol,
                );
            }
        }
        Err(_) => report.push("gram_invertible", f64::INFINITY, tol),
    }
    report
}

/// A `g`-isometric involution of `R^n` whose associated form `g(·, r·)` is positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacelikeReflection {
    signature: Signature,
    matrix: RMat,
}

impl SpacelikeReflection {
    /// Validate `r² = I`, `rᵀ g r = g` and `g r` symmetric positive definite.
    pub fn new(signature: Signature, matrix: RMat) -> Result<Self, CliffordError> {
        Self::with_tolerance(signature, matrix, SPECTRAL_TOL)
    }

    pub fn with_tolerance(signature: Signature, matrix: RMat, tol: f64) -> Result<Self, CliffordError> {
        let n = signature.n();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(CliffordError::Shape {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                expected: n,
            });
        }
        let scale = linalg::max_abs_real(&matrix).powi(2).max(1.0);
        let g = signature.metric();
        let id = RMat::identity(n, n);
        let sq = linalg::max_abs_real(&(&matrix * &matrix - &id));
        if sq > tol * scale {
            return Err(CliffordError::NotSpacelikeReflection(format!(
                "r² ≠ I (defect {sq:.3e})"
            )));
        }
        let iso = linalg::max_abs_real(&(matrix.transpose() * &g * &matrix - &g));
        if iso > tol * scale {
            return Err(CliffordError::NotSpacelikeReflection(format!(
                "rᵀgr ≠ g (defect {iso:.3e})"
            )));
        }
        let gr = &g * &matrix;
        let asym = linalg::max_abs_real(&(&gr - gr.transpose()));
        if asym > tol * scale {
            return Err(CliffordError::NotSpacelikeReflection(format!(
                "g·r not symmetric (defect {asym:.3e})"
            )));
        }
        let sym = (&gr + gr.transpose()) * 0.5;
        let min = sym.symmetric_eigenvalues().min();
        if min <= tol {
            return Err(CliffordError::NotSpacelikeReflection(format!(
                "g(·, r·) not positive definite (smallest eigenvalue {min:.3e})"
            )));
        }
        Ok(Self { signature, matrix })
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    /// Gram matrix of the Riemannian form `g^r(u, v) = g(u, r v)`.
    pub fn riemannian_metric(&self) -> RMat {
        let gr = self.signature.metric() * &self.matrix;
        (&gr + gr.transpose()) * 0.5
    }

    /// `g^r(y, y)`.
    pub fn riemannian_norm_sq(&self, y: &[f64]) -> f64 {
        let gr = self.riemannian_metric();
        let v = DVector::from_column_slice(y);
        (v.transpose() * gr * &v)[(0, 0)]
    }

    /// Oriented `g`-orthonormal basis of the `(−1)`-eigenspace.
    ///
    /// The orientation is the one transported from `x_1, …, x_k` by the
    /// projection `(1 − r)/2`, followed by Gram–Schmidt for `−g`.
    pub fn negative_basis(&self) -> Vec<Vec<f64>> {
        let sig = self.signature;
        let n = sig.n();
        let proj = (RMat::identity(n, n) - &self.matrix) * 0.5;
        let start: Vec<Vec<f64>> = (0..sig.k())
            .map(|i| proj.column(i).iter().copied().collect())
            .collect();
        gram_schmidt_negative(sig, &start).expect("projection of the timelike frame is a basis")
    }
}

/// Gram–Schmidt with respect to `−g`; fails unless the span is negative definite.
fn gram_schmidt_negative(sig: Signature, vectors: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, CliffordError> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for e in &out {
            // ⟨e, w⟩_{−g} with ⟨e, e⟩_{−g} = 1
            let c = -sig.bilinear(e, &w);
            for (wi, ei) in w.iter_mut().zip(e) {
                *wi -= c * ei;
            }
        }
        let norm_sq = -sig.bilinear(&w, &w);
        let scale = v.iter().map(|x| x * x).sum::<f64>().max(1e-300);
        if norm_sq <= SPECTRAL_TOL * scale {
            return Err(CliffordError::NotNegativeDefinite(norm_sq / scale));
        }
        let norm = norm_sq.sqrt();
        out.push(w.iter().map(|x| x / norm).collect());
    }
    Ok(out)
}

/// Spacelike reflection whose `(−1)`-eigenspace is `span(basis)` and whose
/// `(+1)`-eigenspace is its `g`-orthocomplement.
pub fn spacelike_reflection_from_subspace(
    sig: Signature,
    basis: &[Vec<f64>],
) -> Result<SpacelikeReflection, CliffordError> {
    if basis.len() != sig.k() {
        return Err(CliffordError::SubspaceDimension {
            expected: sig.k(),
            got: basis.len(),
        });
    }
    if let Some(bad) = basis.iter().find(|v| v.len() != sig.n()) {
        return Err(CliffordError::SubspaceDimension {
            expected: sig.n(),
            got: bad.len(),
        });
    }
    // check definiteness of the −g Gram matrix before orthonormalizing
    let k = sig.k();
    if k > 0 {
        let gram = RMat::from_fn(k, k, |i, j| -sig.bilinear(&basis[i], &basis[j]));
        let min = gram.symmetric_eigenvalues().min();
        let scale = gram.diagonal().iter().fold(0.0_f64, |a, b| a.max(b.abs())).max(1e-300);
        if min <= SPECTRAL_TOL * scale {
            return Err(CliffordError::NotNegativeDefinite(min));
        }
    }
    let ortho = gram_schmidt_negative(sig, basis)?;
    let n = sig.n();
    let g = sig.metric();
    // P v = −Σ e_i g(e_i, v)
    let mut proj = RMat::zeros(n, n);
    for e in &ortho {
        let ev = DVector::from_column_slice(e);
        let ge = &g * &ev;
        proj -= &ev * ge.transpose();
    }
    let r = RMat::identity(n, n) - proj * 2.0;
    SpacelikeReflection::new(sig, r)
}

/// `i^{k(k+1)/2} γ(e_1) ⋯ γ(e_k)` for the given ordered basis, without any sign normalization.
pub fn fundamental_symmetry_from_basis(rep: &GammaRep, basis: &[Vec<f64>]) -> CMat {
    let k = basis.len();
    let prod = basis
        .iter()
        .fold(linalg::identity(rep.dim), |acc, e| acc * rep.gamma_of(e));
    prod.map(|z| z * i_pow((k * (k + 1) / 2) as i64))
}

fn positive_product_min(rep: &GammaRep, j: &CMat) -> Result<f64, LinalgError> {
    let gj = &rep.krein_gram * j;
    let herm = (&gj + gj.adjoint()).scale(0.5);
    let defect = linalg::max_diff(&gj, &gj.adjoint());
    if defect > SPECTRAL_TOL * linalg::max_abs(&gj).max(1.0) {
        return Ok(f64::NEG_INFINITY);
    }
    linalg::min_eigenvalue(&herm, SPECTRAL_TOL)
}

/// The fundamental symmetry `J_r` induced by a spacelike reflection.
///
/// The sign is normalized so that `G·J_r` is positive definite.
pub fn fundamental_symmetry_from_reflection(
    rep: &GammaRep,
    r: &SpacelikeReflection,
) -> Result<CMat, CliffordError> {
    if r.signature() != rep.signature {
        return Err(CliffordError::NotSpacelikeReflection(
            "reflection belongs to a different signature".into(),
        ));
    }
    let mut j = fundamental_symmetry_from_basis(rep, &r.negative_basis());
    if positive_product_min(rep, &j)? < 0.0 {
        j = -j;
    }
    let min = positive_product_min(rep, &j)?;
    if min <= SPECTRAL_TOL {
        return Err(CliffordError::NotSpacelikeReflection(format!(
            "induced J-product is not positive definite ({min:.3e})"
        )));
    }
    Ok(j)
}

/// `tr(γ_j^{-1} X) / dim` for each `j`: the coordinates of `X` along the gamma span.
pub(crate) fn gamma_coordinates(rep: &GammaRep, x: &CMat) -> Vec<Complex64> {
    (0..rep.n())
        .map(|j| linalg::trace(&(rep.gamma_inverse(j) * x)) / rep.dim as f64)
        .collect()
}

/// Recover the spacelike reflection `r` with `J = J_r`.
///
/// Checks the hypotheses of the classification (involution, positive
/// product, grading compatibility, and proportionality of
/// `(Jγ(v))² + (γ(v)J)²` to the identity on basis vectors and their pairwise
/// sums), then extracts `r` from `J γ_i J = (−1)^k Σ_j r_{ji} γ_j` by trace
/// projection and verifies that `J_r` reproduces `J`.
pub fn classify_fundamental_symmetry(rep: &GammaRep, j: &CMat) -> Result<SpacelikeReflection, CliffordError> {
    rep.expect_square(j)?;
    let sig = rep.signature;
    let n = rep.n();
    let dim = rep.dim;
    let id = linalg::identity(dim);
    let scale = linalg::max_abs(j).max(1.0);
    let tol = SPECTRAL_TOL * scale * scale;
    let mut violations = Vec::new();

    let inv = linalg::max_diff(&(j * j), &id);
    if inv > tol {
        violations.push(Violation {
            condition: Condition::Involution,
            value: inv,
        });
    }
    let min = positive_product_min(rep, j)?;
    if min <= SPECTRAL_TOL {
        violations.push(Violation {
            condition: Condition::PositiveProduct,
            value: min,
        });
    }
    if n.is_multiple_of(2) {
        let comm = linalg::max_abs(&linalg::commutator(j, &rep.chi));
        let anti = linalg::max_abs(&linalg::anticommutator(j, &rep.chi));
        let best = comm.min(anti);
        if best > tol {
            violations.push(Violation {
                condition: Condition::GradingCompatible,
                value: best,
            });
        }
    }
    let mut probes: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|l| if l == i { 1.0 } else { 0.0 }).collect())
        .collect();
    for a in 0..n {
        for b in a + 1..n {
            probes.push((0..n).map(|l| if l == a || l == b { 1.0 } else { 0.0 }).collect());
        }
    }
    let mut worst = 0.0_f64;
    for v in &probes {
        let gv = rep.gamma_of(v);
        let jg = j * &gv;
        let gj = &gv * j;
        let s = &jg * &jg + &gj * &gj;
        let lambda = linalg::trace(&s) / dim as f64;
        let defect = linalg::max_diff(&s, &id.map(|z| z * lambda));
        worst = worst.max(defect / linalg::max_abs(&s).max(1.0));
    }
    if worst > tol {
        violations.push(Violation {
            condition: Condition::ProportionalToIdentity,
            value: worst,
        });
    }
    if !violations.is_empty() {
        return Err(CliffordError::NotReflectionType(violations));
    }

    let parity = sig.parity();
    let mut r = RMat::zeros(n, n);
    for i in 0..n {
        let conj = j * &rep.gammas[i] * j;
        for (row, c) in gamma_coordinates(rep, &conj).into_iter().enumerate() {
            r[(row, i)] = parity * c.re;
        }
    }
    let reflection = match SpacelikeReflection::new(sig, r) {
        Ok(r) => r,
        Err(_) => {
            return Err(CliffordError::NotReflectionType(vec![Violation {
                condition: Condition::ExtractedReflection,
                value: f64::NAN,
            }]))
        }
    };
    let rebuilt = fundamental_symmetry_from_reflection(rep, &reflection)?;
    let mismatch = linalg::max_diff(&rebuilt, j);
    if mismatch > tol {
        return Err(CliffordError::NotReflectionType(vec![Violation {
            condition: Condition::Reconstruction,
            value: mismatch,
        }]));
    }
    Ok(reflection)
}

/// A random spacelike reflection: the `(−1)`-eigenspace is spanned by the
/// rows of `[I_k | B]` for a random `k×(n−k)` matrix `B` with spectral norm at
/// most `spread < 1`, then mixed by a random rotation inside the timelike block.
pub fn random_spacelike_reflection<R: Rng + ?Sized>(
    sig: Signature,
    rng: &mut R,
    spread: f64,
) -> SpacelikeReflection {
    assert!((0.0..1.0).contains(&spread), "spread must lie in [0, 1)");
    let (n, k) = (sig.n(), sig.k());
    if k == 0 || k == n {
        return sig.standard_reflection();
    }
    let b = RMat::from_fn(k, n - k, |_, _| rng.gen_range(-1.0..1.0));
    let norm = b.clone().svd(false, false).singular_values.max().max(1e-300);
    let b = b * (spread * rng.gen_range(0.0..1.0) / norm);
    let mix = RMat::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0)) + RMat::identity(k, k) * 2.0;
    let basis: Vec<Vec<f64>> = (0..k)
        .map(|row| {
            let mut v = vec![0.0; n];
            for t in 0..k {
                let w = mix[(row, t)];
                v[t] += w;
                for s in 0..n - k {
                    v[k + s] += w * b[(t, s)];
                }
            }
            v
        })
        .collect();
    spacelike_reflection_from_subspace(sig, &basis).expect("[I | B] with ‖B‖ < 1 spans a negative subspace")
}

/// Complex matrix from a real one (helper for callers mixing `r` and spinor matrices).
pub fn real_to_complex(m: &RMat) -> CMat {
    linalg::to_complex(m)
}
