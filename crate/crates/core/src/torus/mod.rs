//! Finite truncation of the semi-Riemannian (noncommutative) torus.
//!
//! The Hilbert space is `H_τ ⊗ Δ_{n,k}` with `H_τ` spanned by the modes
//! `u(y)`, `‖y‖_∞ ≤ M`. The Dirac operator acts on mode `y` by
//! `D_y = 2π i^k γ(y)`, the fundamental symmetry is `1 ⊗ J_r`, and
//! `Δ_J = ([D]_J² + 1)^{1/2}` has eigenvalue `√(1 + 4π² g^r(y, y))` on each mode.

mod algebra;
mod lattice;
mod shift;

pub use algebra::{AlgebraElement, Mode, Theta};
pub use lattice::{delta_from_norm, ModeLattice};
pub use shift::ShiftOperator;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clifford::{self, build_gamma, CliffordError, GammaRep, Signature, SpacelikeReflection};
use crate::krein::{self, ComplexEstimate, DixmierEstimate, Estimator, FundamentalSymmetry, KreinError, KreinSpace};
use crate::linalg::{self, i_pow, CMat};
use crate::report::Report;

/// Tolerance of the admissibility conditions.
pub const ADMISSIBILITY_TOL: f64 = 1e-10;
/// Fewest distinct eigenvalues the dimension fit accepts.
pub const MIN_DIMENSION_POINTS: usize = 8;

#[derive(Debug, Error)]
pub enum TorusError {
    #[error("theta must be square (got {rows}x{cols})")]
    ThetaShape { rows: usize, cols: usize },
    #[error("theta is not antisymmetric (defect {0:.3e})")]
    ThetaNotAntisymmetric(f64),
    #[error("theta has size {theta}, signature has n = {n}")]
    ThetaDimension { theta: usize, n: usize },
    #[error("mode {0:?} lies outside the cutoff box")]
    ModeOutsideCutoff(Vec<i64>),
    #[error("derivation index {j} out of range for n = {n}")]
    DerivationIndex { j: usize, n: usize },
    #[error("element has {got} coordinates per mode, model has n = {n}")]
    ElementDimension { got: usize, n: usize },
    #[error("too few distinct eigenvalues for a dimension fit ({0}); increase the cutoff")]
    TooFewEigenvalues(usize),
    #[error("cannot parse algebra element: {0}")]
    Parse(String),
    #[error(transparent)]
    Clifford(#[from] CliffordError),
    #[error(transparent)]
    Krein(#[from] KreinError),
}

/// `c(n) = 2^{n−⌊n/2⌋−1} π^{n/2} n Γ(n/2)`.
pub fn integration_constant(n: usize) -> f64 {
    let nf = n as f64;
    2f64.powi((n - n / 2) as i32 - 1) * PI.powf(nf / 2.0) * nf * statrs::function::gamma::gamma(nf / 2.0)
}

/// Limit of `Tr_ω(Δ_J^{−n})`, i.e. `1/c(n)`.
pub fn volume_target(n: usize) -> f64 {
    1.0 / integration_constant(n)
}

/// `(−1)^k (n − 2k) / n`.
pub fn signature_target(sig: Signature) -> f64 {
    let (n, k) = (sig.n() as f64, sig.k() as f64);
    sig.parity() * (n - 2.0 * k) / n
}

/// Spectral density entering a trace functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    /// `Δ_J^{−n}`.
    Volume,
    /// `D² Δ_J^{−n−2}`.
    Signature,
}

impl std::str::FromStr for Observable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "volume" => Ok(Self::Volume),
            "signature" => Ok(Self::Signature),
            other => Err(format!("unknown observable '{other}' (expected volume|signature)")),
        }
    }
}

/// The truncated spectral triple with a fixed admissible fundamental symmetry.
#[derive(Debug, Clone)]
pub struct TorusModel {
    theta: Theta,
    sig: Signature,
    rep: GammaRep,
    reflection: SpacelikeReflection,
    space: KreinSpace,
    j_tilde: FundamentalSymmetry,
    lattice: ModeLattice,
}

impl TorusModel {
    pub fn new(theta: Theta, reflection: SpacelikeReflection, cutoff: usize) -> Result<Self, TorusError> {
        let sig = reflection.signature();
        if theta.n() != sig.n() {
            return Err(TorusError::ThetaDimension {
                theta: theta.n(),
                n: sig.n(),
            });
        }
        let rep = build_gamma(sig);
        let space = rep.krein_space()?;
        let jm = clifford::fundamental_symmetry_from_reflection(&rep, &reflection)?;
        let j_tilde = FundamentalSymmetry::new(&space, jm, clifford::SPECTRAL_TOL)?;
        let lattice = ModeLattice::new(&reflection, cutoff);
        Ok(Self {
            theta,
            sig,
            rep,
            reflection,
            space,
            j_tilde,
            lattice,
        })
    }

    /// Commutative torus with the standard reflection.
    pub fn standard(sig: Signature, cutoff: usize) -> Result<Self, TorusError> {
        Self::new(Theta::zero(sig.n()), sig.standard_reflection(), cutoff)
    }

    pub fn theta(&self) -> &Theta {
        &self.theta
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn rep(&self) -> &GammaRep {
        &self.rep
    }

    pub fn reflection(&self) -> &SpacelikeReflection {
        &self.reflection
    }

    pub fn krein_space(&self) -> &KreinSpace {
        &self.space
    }

    /// Spinor factor `J̃ = J_r` of `J = 1 ⊗ J̃`.
    pub fn j_tilde(&self) -> &FundamentalSymmetry {
        &self.j_tilde
    }

    pub fn lattice(&self) -> &ModeLattice {
        &self.lattice
    }

    pub fn spinor_dim(&self) -> usize {
        self.rep.dim
    }

    fn check_mode(&self, y: &[i64]) -> Result<(), TorusError> {
        if self.lattice.contains(y) {
            Ok(())
        } else {
            Err(TorusError::ModeOutsideCutoff(y.to_vec()))
        }
    }

    /// `D_y = 2π i^k γ(y)`.
    pub fn dirac_block(&self, y: &[i64]) -> Result<CMat, TorusError> {
        self.check_mode(y)?;
        Ok(self.dirac_block_unchecked(y))
    }

    fn dirac_block_unchecked(&self, y: &[i64]) -> CMat {
        let v: Vec<f64> = y.iter().map(|&x| x as f64).collect();
        let phase = i_pow(self.sig.k() as i64) * (2.0 * PI);
        self.rep.gamma_of(&v).map(|z| z * phase)
    }

    /// `√(1 + 4π² g^r(y, y))`.
    pub fn delta_eigenvalue(&self, y: &[i64]) -> Result<f64, TorusError> {
        self.check_mode(y)?;
        let v: Vec<f64> = y.iter().map(|&x| x as f64).collect();
        Ok(delta_from_norm(self.reflection.riemannian_norm_sq(&v)))
    }

    /// `[D_y]_J²` computed through the `J`-modulus.
    pub fn modulus_squared_block(&self, y: &[i64]) -> Result<CMat, TorusError> {
        let d = self.dirac_block(y)?;
        let m = krein::j_modulus(&d, &self.space, &self.j_tilde)?;
        Ok(&m * &m)
    }

    /// `Δ_J` on mode `y`, computed from the `J`-modulus and a square root in the `J`-frame.
    pub fn delta_block(&self, y: &[i64]) -> Result<CMat, TorusError> {
        let sq = self.modulus_squared_block(y)? + linalg::identity(self.spinor_dim());
        let frame = self.j_tilde.to_orthonormal(&sq);
        let root = linalg::hermitian_sqrt(&frame, 1e-9).map_err(KreinError::from)?;
        Ok(self.j_tilde.from_orthonormal(&root))
    }

    /// Apply the truncated Dirac operator to `ψ` (`modes × spinor`, sorted mode order).
    pub fn apply_dirac(&self, psi: &CMat) -> CMat {
        assert_eq!(psi.nrows(), self.lattice.len());
        assert_eq!(psi.ncols(), self.spinor_dim());
        let rows: Vec<Vec<Complex64>> = (0..self.lattice.len())
            .into_par_iter()
            .map(|pos| {
                let y: Vec<i64> = self.lattice.mode(pos).iter().map(|&x| x as i64).collect();
                let d = self.dirac_block_unchecked(&y);
                let v = psi.row(pos).transpose();
                (d * v).iter().copied().collect()
            })
            .collect();
        CMat::from_fn(psi.nrows(), psi.ncols(), |r, c| rows[r][c])
    }

    pub fn u_operator(&self, y: &[i64]) -> ShiftOperator {
        ShiftOperator::new(&self.lattice, &self.theta, y)
    }

    /// Distinct-mode spectrum of `Δ_J`: `(mode, eigenvalue, multiplicity)` in sorted order.
    pub fn spectrum(&self) -> impl Iterator<Item = (&[i32], f64, usize)> + '_ {
        let dim = self.spinor_dim();
        self.lattice
            .modes()
            .zip(self.lattice.eigenvalues())
            .map(move |(y, &e)| (y, e, dim))
    }

    /// Per-mode density of the observable over the inscribed modes (one value per mode).
    pub fn density(&self, observable: Observable) -> Vec<f64> {
        let n = self.sig.n() as i32;
        let count = self.lattice.inscribed_count();
        let eig = &self.lattice.eigenvalues()[..count];
        match observable {
            Observable::Volume => eig.par_iter().map(|&l| l.powi(-n)).collect(),
            Observable::Signature => {
                let parity = self.sig.parity();
                (0..count)
                    .into_par_iter()
                    .map(|pos| {
                        let y: Vec<f64> = self.lattice.mode(pos).iter().map(|&x| x as f64).collect();
                        let q = self.sig.quadratic_form(&y);
                        parity * 4.0 * PI * PI * q * eig[pos].powi(-n - 2)
                    })
                    .collect()
            }
        }
    }

    /// Diagonal weight `⟨e_z, a e_z⟩` of `a` on each inscribed mode.
    ///
    /// Each `u(y)` enters through its compressed matrix diagonal, which vanishes
    /// identically for `y ≠ 0`.
    pub fn diagonal_weights(&self, a: &AlgebraElement) -> Result<Vec<Complex64>, TorusError> {
        if a.n() != self.sig.n() {
            return Err(TorusError::ElementDimension {
                got: a.n(),
                n: self.sig.n(),
            });
        }
        let count = self.lattice.inscribed_count();
        let mut w = vec![Complex64::new(0.0, 0.0); count];
        for (y, c) in a.terms() {
            let u = self.u_operator(y);
            for (pos, slot) in w.iter_mut().enumerate() {
                *slot += c * u.diagonal(pos);
            }
        }
        Ok(w)
    }

    /// Partial traces `Σ_{i≤N} ⟨φ_i, a·ρ φ_i⟩_J` over the `J`-orthonormal
    /// eigenbasis, modes in ascending `Δ_J` order and each mode repeated once
    /// per spinor component.
    pub fn partial_traces(&self, a: &AlgebraElement, observable: Observable) -> Result<Vec<Complex64>, TorusError> {
        let weights = self.diagonal_weights(a)?;
        let density = self.density(observable);
        let dim = self.spinor_dim();
        let mut out = Vec::with_capacity(density.len() * dim);
        let mut acc = Complex64::new(0.0, 0.0);
        for (w, rho) in weights.iter().zip(&density) {
            let term = w * rho;
            for _ in 0..dim {
                acc += term;
                out.push(acc);
            }
        }
        Ok(out)
    }

    /// Partial sums of the unit's observable (real).
    pub fn unit_partial_sums(&self, observable: Observable) -> Vec<f64> {
        let dim = self.spinor_dim();
        let density = self.density(observable);
        let mut out = Vec::with_capacity(density.len() * dim);
        let mut acc = 0.0;
        for rho in density {
            for _ in 0..dim {
                acc += rho;
                out.push(acc);
            }
        }
        out
    }

    /// Dixmier estimate of `Tr_ω(a Δ_J^{−n})` or `Tr_ω(a D² Δ_J^{−n−2})`.
    pub fn trace_functional(
        &self,
        a: &AlgebraElement,
        observable: Observable,
        estimator: Estimator,
    ) -> Result<ComplexEstimate, TorusError> {
        let sums = self.partial_traces(a, observable)?;
        Ok(estimator.estimate_complex(&sums)?)
    }

    /// Ratio `Tr_ω(D²Δ_J^{−n−2}) / Tr_ω(Δ_J^{−n})` for `a = 1`.
    pub fn signature_ratio(&self, estimator: Estimator) -> Result<RatioEstimate, TorusError> {
        let num = estimator.estimate(&self.unit_partial_sums(Observable::Signature))?;
        let den = estimator.estimate(&self.unit_partial_sums(Observable::Volume))?;
        Ok(RatioEstimate {
            value: num.value / den.value,
            converged: num.converged && den.converged,
            numerator: num,
            denominator: den,
        })
    }

    /// Log-log fit of the counting function `N(λ)` of `Δ_J` over the upper half
    /// `[λ*/2, λ*]` of the inscribed spectrum.
    pub fn dimension_estimate(&self) -> Result<DimensionEstimate, TorusError> {
        let count = self.lattice.inscribed_count();
        let eig = &self.lattice.eigenvalues()[..count];
        let dim = self.spinor_dim() as f64;
        let top = match eig.last() {
            Some(&t) => t,
            None => return Err(TorusError::TooFewEigenvalues(0)),
        };
        // (λ, N(λ)) at each distinct eigenvalue
        let mut points: Vec<(f64, f64)> = Vec::new();
        for (i, &l) in eig.iter().enumerate() {
            let last_of_group = i + 1 == eig.len() || eig[i + 1] != l;
            if last_of_group && l >= top / 2.0 {
                points.push((l.ln(), (((i + 1) as f64) * dim).ln()));
            }
        }
        if points.len() < MIN_DIMENSION_POINTS {
            return Err(TorusError::TooFewEigenvalues(points.len()));
        }
        let m = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
        let my = points.iter().map(|p| p.1).sum::<f64>() / m;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let rms = (points
            .iter()
            .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
            .sum::<f64>()
            / m)
            .sqrt();
        Ok(DimensionEstimate {
            value: slope,
            residual: rms,
            points: points.len(),
        })
    }

    /// Admissibility of `J = 1 ⊗ J̃` for a matrix `J̃` on the spinor module.
    pub fn admissibility_check(&self, j_tilde: &CMat) -> AdmissibilityReport {
        admissibility_check(self, j_tilde)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub value: f64,
    pub numerator: DixmierEstimate,
    pub denominator: DixmierEstimate,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub value: f64,
    /// RMS of the log-log fit.
    pub residual: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub report: Report,
    /// The reflection with `J̃ = J_r`, when every condition holds.
    pub reflection: Option<Vec<Vec<f64>>>,
    /// Whether `Θ` passed the genericity heuristic under which the
    /// classification of admissible symmetries is asserted.
    pub theta_generic: bool,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.report.passed()
    }
}

/// Check the admissibility conditions for `J = 1 ⊗ J̃`:
///
/// * (a) `J² = I` and `⟨·,·⟩_J` positive definite,
/// * (b) `J χ J = χ⁺`,
/// * (c) `J` commutes with the generators `u(e_j)`,
/// * (d) `J̃ γ_i J̃ ∈ span{γ_1, …, γ_n}`,
///
/// then classify `J̃` as `J_r`.
pub fn admissibility_check(model: &TorusModel, j_tilde: &CMat) -> AdmissibilityReport {
    let tol = ADMISSIBILITY_TOL;
    let rep = &model.rep;
    let dim = rep.dim;
    let mut report = Report::new();
    let theta_generic = model.theta.is_generic();
    if !theta_generic {
        log::warn!("theta failed the genericity heuristic; the classification of admissible symmetries is not asserted");
    }
    if j_tilde.nrows() != dim || j_tilde.ncols() != dim {
        report.push_flag("shape", false);
        return AdmissibilityReport {
            report,
            reflection: None,
            theta_generic,
        };
    }
    let id = linalg::identity(dim);

    report.push("a_involution", linalg::max_diff(&(j_tilde * j_tilde), &id), tol);
    let gj = &rep.krein_gram * j_tilde;
    report.push("a_hermitian_product", linalg::hermitian_defect(&gj), tol);
    let min = linalg::min_eigenvalue(&((&gj + gj.adjoint()).scale(0.5)), f64::INFINITY).unwrap_or(f64::NAN);
    report.push_min("a_positive_product", min, tol);

    let chi_plus = rep.krein_adjoint(&rep.chi);
    report.push("b_grading", linalg::max_diff(&(j_tilde * &rep.chi * j_tilde), &chi_plus), tol);

    report.push("c_algebra_commutation", algebra_commutation_defect(model, j_tilde), tol);

    let mut span = 0.0_f64;
    for g in &rep.gammas {
        let x = j_tilde * g * j_tilde;
        let coords = clifford::gamma_coordinates(rep, &x);
        let mut proj = CMat::zeros(dim, dim);
        for (c, gj) in coords.iter().zip(&rep.gammas) {
            proj += gj.map(|z| z * c);
        }
        span = span.max(linalg::max_diff(&x, &proj));
    }
    report.push("d_gamma_span", span, tol);

    let mut reflection = None;
    if report.passed() {
        match clifford::classify_fundamental_symmetry(rep, j_tilde) {
            Ok(r) => {
                let m = r.matrix();
                reflection = Some((0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect());
                report.push_flag("classification", true);
            }
            Err(_) => report.push_flag("classification", false),
        }
    }
    AdmissibilityReport {
        report,
        reflection,
        theta_generic,
    }
}

/// `max ‖[u(e_j) ⊗ 1, 1 ⊗ J̃] ψ‖` over generators, on a random state of a small box.
fn algebra_commutation_defect(model: &TorusModel, j_tilde: &CMat) -> f64 {
    let n = model.sig.n();
    let small = ModeLattice::new(&model.reflection, model.lattice.cutoff().min(2));
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    let psi = CMat::from_fn(small.len(), model.spinor_dim(), |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let apply_j = |m: &CMat| m * j_tilde.transpose();
    (0..n)
        .map(|j| {
            let mut e = vec![0i64; n];
            e[j] = 1;
            let u = ShiftOperator::new(&small, &model.theta, &e);
            let lhs = u.apply(&apply_j(&psi));
            let rhs = apply_j(&u.apply(&psi));
            linalg::max_diff(&lhs, &rhs)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests;
