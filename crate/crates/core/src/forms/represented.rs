//! Operator symbols `Σ_A γ_A ⊗ a_A` of represented forms.
//!
//! `γ_A` is the ordered product of the gammas in the bit set `A` (ascending).
//! Gammas act on the spinor factor and algebra elements on `H_τ`, so they
//! commute and a symbol is a map from blade masks to algebra elements. Blade
//! products are reduced in the abstract Clifford algebra: reorder with the
//! anticommutation sign and contract `γ_i² = g_ii`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use super::universal::UniversalForm;
use super::FormsError;
use crate::clifford::{GammaRep, Signature, SpacelikeReflection};
use crate::krein::{ComplexEstimate, Estimator};
use crate::linalg::{self, i_pow, CMat};
use crate::torus::{AlgebraElement, Theta, TorusModel};

/// `γ_A γ_B = sign · γ_{A △ B}`.
pub fn blade_product(a: u32, b: u32, sig: Signature) -> (f64, u32) {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        // elements of A strictly above j
        let above = if j >= 31 { 0 } else { a & !((1u32 << (j + 1)) - 1) };
        swaps += above.count_ones();
    }
    let mut sign = if swaps.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut common = a & b;
    while common != 0 {
        let i = common.trailing_zeros() as usize;
        common &= common - 1;
        sign *= sig.metric_sign(i);
    }
    (sign, a ^ b)
}

pub fn blade_degree(mask: u32) -> usize {
    mask.count_ones() as usize
}

/// Indices (0-based) in a blade mask, ascending.
pub fn blade_indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentedForm {
    sig: Signature,
    degree: usize,
    symbol: BTreeMap<u32, AlgebraElement>,
}

impl RepresentedForm {
    pub fn zero(sig: Signature, degree: usize) -> Self {
        Self {
            sig,
            degree,
            symbol: BTreeMap::new(),
        }
    }

    /// Multiplication operator of `a`.
    pub fn scalar(sig: Signature, a: &AlgebraElement) -> Self {
        let mut out = Self::zero(sig, 0);
        out.add_component(0, a.clone());
        out
    }

    /// `[D, a] = i^{k−1} Σ_j γ_j δ_j(a)`.
    pub fn commutator(sig: Signature, a: &AlgebraElement) -> Self {
        let unit = i_pow(sig.k() as i64 - 1);
        let mut out = Self::zero(sig, 1);
        for j in 0..sig.n() {
            let dj = a.derivation(j).expect("index below n");
            out.add_component(1 << j, dj.scale(unit));
        }
        out
    }

    /// Assemble from explicit components.
    pub fn from_components(sig: Signature, degree: usize, parts: impl IntoIterator<Item = (u32, AlgebraElement)>) -> Self {
        let mut out = Self::zero(sig, degree);
        for (mask, a) in parts {
            out.add_component(mask, a);
        }
        out
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> impl Iterator<Item = (&u32, &AlgebraElement)> {
        self.symbol.iter()
    }

    pub fn component(&self, mask: u32) -> AlgebraElement {
        self.symbol
            .get(&mask)
            .cloned()
            .unwrap_or_else(|| AlgebraElement::zero(self.sig.n()))
    }

    /// Exact symbolic zero (no nonzero coefficient left).
    pub fn is_zero(&self) -> bool {
        self.symbol.is_empty()
    }

    fn add_component(&mut self, mask: u32, a: AlgebraElement) {
        let sum = match self.symbol.remove(&mask) {
            Some(old) => old.add(&a),
            None => a,
        };
        if !sum.is_zero() {
            self.symbol.insert(mask, sum);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, a) in &other.symbol {
            out.add_component(*m, a.clone());
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero(self.sig, self.degree);
        for (m, a) in &self.symbol {
            out.add_component(*m, a.scale(s));
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// `(Σ γ_A a_A)(Σ γ_B b_B) = Σ γ_A γ_B (a_A b_B)`, Clifford-reduced.
    pub fn multiply(&self, other: &Self, theta: &Theta) -> Self {
        let mut out = Self::zero(self.sig, self.degree + other.degree);
        for (ma, a) in &self.symbol {
            for (mb, b) in &other.symbol {
                let (sign, mask) = blade_product(*ma, *mb, self.sig);
                out.add_component(mask, a.multiply(b, theta).scale(Complex64::new(sign, 0.0)));
            }
        }
        out
    }

    /// Component of blade degree exactly `d`.
    pub fn part_of_degree(&self, d: usize) -> Self {
        Self::from_components(
            self.sig,
            self.degree,
            self.symbol
                .iter()
                .filter(|(m, _)| blade_degree(**m) == d)
                .map(|(m, a)| (*m, a.clone())),
        )
    }

    /// Largest coefficient modulus.
    pub fn max_coefficient(&self) -> f64 {
        self.symbol
            .values()
            .flat_map(|a| a.terms().map(|(_, c)| c.norm()).collect::<Vec<_>>())
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.sub(other).max_coefficient()
    }

    /// Conjugation by `J_r ⊗ 1`: each `γ_i ↦ (−1)^k γ(r e_i)`, products expanded and reduced.
    pub fn conjugate_by_reflection(&self, r: &SpacelikeReflection) -> Self {
        let sig = self.sig;
        let n = sig.n();
        let parity = sig.parity();
        let rm = r.matrix();
        let mut out = Self::zero(sig, self.degree);
        for (mask, a) in &self.symbol {
            // scalar Clifford element image of γ_A
            let mut image: BTreeMap<u32, f64> = BTreeMap::from([(0u32, 1.0)]);
            for i in blade_indices(*mask) {
                let mut next: BTreeMap<u32, f64> = BTreeMap::new();
                for (m, c) in &image {
                    for j in 0..n {
                        let coef = parity * rm[(j, i)];
                        if coef == 0.0 {
                            continue;
                        }
                        let (s, p) = blade_product(*m, 1 << j, sig);
                        *next.entry(p).or_default() += c * coef * s;
                    }
                }
                image = next;
            }
            for (m, c) in image {
                if c != 0.0 {
                    out.add_component(m, a.scale(Complex64::new(c, 0.0)));
                }
            }
        }
        out
    }
}

impl fmt::Display for RepresentedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "represented form, degree {}", self.degree)?;
        for (mask, a) in &self.symbol {
            let idx: Vec<String> = blade_indices(*mask).iter().map(|i| (i + 1).to_string()).collect();
            for (y, c) in a.terms() {
                // `+ 0.0` folds -0 into +0
                writeln!(f, "  gamma[{}] u{:?} {:+.12e}{:+.12e}i", idx.join(","), y, c.re + 0.0, c.im + 0.0)?;
            }
        }
        Ok(())
    }
}

/// `π((a_0, …, a_m)) = a_0 [D, a_1] ⋯ [D, a_m]`.
pub fn pi_with(form: &UniversalForm, sig: Signature, theta: &Theta) -> RepresentedForm {
    let n = sig.n();
    let mut out = RepresentedForm::zero(sig, form.degree());
    for (tuple, c) in form.terms() {
        let mut acc = RepresentedForm::scalar(sig, &AlgebraElement::monomial(tuple[0].clone(), *c));
        for y in &tuple[1..] {
            let u = AlgebraElement::monomial(y.clone(), Complex64::new(1.0, 0.0));
            acc = acc.multiply(&RepresentedForm::commutator(sig, &u), theta);
        }
        out = out.add(&acc);
    }
    debug_assert!(out.components().all(|(m, _)| (*m as u64) < (1u64 << n)));
    out
}

pub fn pi(form: &UniversalForm, model: &TorusModel) -> RepresentedForm {
    pi_with(form, model.signature(), model.theta())
}

/// `ω = (u_l du_l − du_l u_l) du(y_1) ⋯`: a form killed by `π` whose
/// differential is junk (`l` 0-based, `tail` the remaining factors `f_i`).
pub fn junk_generator(theta: &Theta, l: usize, tail: &[AlgebraElement]) -> UniversalForm {
    let n = theta.n();
    let f0 = AlgebraElement::generator(n, l);
    let one = AlgebraElement::one(n);
    let left = UniversalForm::from_tuple(&[f0.clone(), f0.clone()]);
    let right = UniversalForm::from_tuple(&[one.clone(), f0.clone()]).product(&UniversalForm::from_element(&f0), theta);
    let mut w = left.sub(&right);
    for f in tail {
        w = w.product(&UniversalForm::from_tuple(&[one.clone(), f.clone()]), theta);
    }
    w
}

/// Junk subspace `π(d j_0 ∩ Ω^m)` of represented `m`-forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JunkSpace {
    /// `m < 2`.
    Zero,
    /// Blades of degree at most `max_degree = m − 2` (same parity as `m`).
    Blades { degree: usize, max_degree: usize },
    /// `m > n`: every represented form is junk.
    Everything,
}

pub fn junk_space(sig: Signature, m: usize) -> JunkSpace {
    if m < 2 {
        JunkSpace::Zero
    } else if m > sig.n() {
        JunkSpace::Everything
    } else {
        JunkSpace::Blades {
            degree: m,
            max_degree: m - 2,
        }
    }
}

impl JunkSpace {
    pub fn contains_blade(&self, mask: u32) -> bool {
        match *self {
            JunkSpace::Zero => false,
            JunkSpace::Everything => true,
            JunkSpace::Blades { degree, max_degree } => {
                let d = blade_degree(mask);
                d <= max_degree && d % 2 == degree % 2
            }
        }
    }

    /// Blade basis of the junk space over `A_θ` (empty for `Zero`; all blades for `Everything`).
    pub fn basis(&self, sig: Signature) -> Vec<u32> {
        (0..(1u32 << sig.n())).filter(|m| self.contains_blade(*m)).collect()
    }

    /// Largest coefficient outside the junk blades.
    pub fn defect(&self, form: &RepresentedForm) -> f64 {
        form.components()
            .filter(|(m, _)| !self.contains_blade(**m))
            .flat_map(|(_, a)| a.terms().map(|(_, c)| c.norm()).collect::<Vec<_>>())
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, form: &RepresentedForm, tol: f64) -> bool {
        self.defect(form) <= tol
    }

    pub fn junk_part(&self, form: &RepresentedForm) -> RepresentedForm {
        RepresentedForm::from_components(
            form.signature(),
            form.degree(),
            form.components()
                .filter(|(m, _)| self.contains_blade(**m))
                .map(|(m, a)| (*m, a.clone())),
        )
    }
}

/// Connes-form class of a represented `m`-form: its top (degree-`m`) blade component.
pub fn connes_projection(form: &RepresentedForm) -> RepresentedForm {
    form.part_of_degree(form.degree())
}

/// Rank over `A_θ` of the Connes forms of degree `m`, spanned by the classes of `du_{j_1} ⋯ du_{j_m}`.
pub fn connes_rank(sig: Signature, theta: &Theta, m: usize) -> usize {
    let rows = connes_rows(sig, theta, m);
    if rows.is_empty() || rows[0].is_empty() {
        return 0;
    }
    let mat = CMat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let sv = mat.svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > 1e-9 * top.max(1e-300)).count()
}

/// One row per generator `du_{j_1} ⋯ du_{j_m}`: the scalar coefficients of its
/// top-degree blades (columns in ascending mask order), with the common unit
/// monomial divided out.
pub fn connes_rows(sig: Signature, theta: &Theta, m: usize) -> Vec<Vec<Complex64>> {
    let n = sig.n();
    let columns: Vec<u32> = (0..(1u32 << n)).filter(|b| blade_degree(*b) == m).collect();
    let one = AlgebraElement::one(n);
    let scale = Complex64::new(0.0, 1.0) * i_pow(sig.k() as i64 - 1) * (2.0 * std::f64::consts::PI);
    let mut rows = Vec::new();
    for code in 0..n.pow(m as u32) {
        let mut idx = Vec::with_capacity(m);
        let mut c = code;
        for _ in 0..m {
            idx.push(c % n);
            c /= n;
        }
        let mut w = UniversalForm::from_element(&one);
        for &j in &idx {
            w = w.product(&UniversalForm::from_tuple(&[one.clone(), AlgebraElement::generator(n, j)]), theta);
        }
        let top = connes_projection(&pi_with(&w, sig, theta));
        let norm = scale.powi(m as i32);
        let row = columns
            .iter()
            .map(|b| {
                // a single monomial c·u(y), or zero
                let a = top.component(*b);
                let c = a.terms().next().map(|(_, c)| c / norm).unwrap_or_default();
                c
            })
            .collect();
        rows.push(row);
    }
    rows
}

/// Dense matrix of a symbol on the truncated `H_τ ⊗ Δ` (mode-major ordering,
/// compressed left multiplication).
pub fn realize(form: &RepresentedForm, model: &TorusModel) -> CMat {
    let rep = model.rep();
    let dim = rep.dim;
    let len = model.lattice().len();
    let mut out = CMat::zeros(len * dim, len * dim);
    for (mask, a) in form.components() {
        let blade = rep.blade(*mask);
        for (y, c) in a.terms() {
            let u = model.u_operator(y);
            for src in 0..len {
                if let Some((dst, phase)) = u.image(src) {
                    let w = c * phase;
                    for s1 in 0..dim {
                        for s2 in 0..dim {
                            out[(dst * dim + s1, src * dim + s2)] += w * blade[(s1, s2)];
                        }
                    }
                }
            }
        }
    }
    out
}

/// Krein adjoint on `H_τ ⊗ Δ` with Gram matrix `1 ⊗ G`.
pub fn full_krein_adjoint(rep: &GammaRep, m: &CMat) -> CMat {
    let dim = rep.dim;
    let modes = m.nrows() / dim;
    let gram = linalg::identity(modes).kronecker(&rep.krein_gram);
    let ginv = linalg::identity(modes).kronecker(&linalg::inverse(&rep.krein_gram).expect("invertible Krein form"));
    ginv * m.adjoint() * gram
}

/// Algebraic factor of the one-form pairing:
/// `Σ_{A,B} τ(a_A* b_B) tr(γ_A^{*J} γ_B) / dim`, so that the pairing tends to
/// this value times `1/c(n)`.
pub fn one_form_pairing(w1: &RepresentedForm, w2: &RepresentedForm, model: &TorusModel) -> Complex64 {
    let rep = model.rep();
    let theta = model.theta();
    let j = model.j_tilde();
    let mut total = Complex64::new(0.0, 0.0);
    for (ma, a) in w1.components() {
        let ga = j.j_adjoint(&rep.blade(*ma));
        for (mb, b) in w2.components() {
            let t = a.involution().multiply(b, theta).tau();
            if t == Complex64::new(0.0, 0.0) {
                continue;
            }
            total += t * linalg::trace(&(&ga * rep.blade(*mb))) / rep.dim as f64;
        }
    }
    total
}

/// Dixmier estimate of `Tr_ω(w₁^{*J} w₂ Δ_J^{−n})` from partial traces over the
/// sorted `J`-orthonormal eigenbasis.
pub fn one_form_inner_product(
    w1: &RepresentedForm,
    w2: &RepresentedForm,
    model: &TorusModel,
    estimator: Estimator,
) -> Result<ComplexEstimate, FormsError> {
    for w in [w1, w2] {
        if w.degree() != 1 {
            return Err(FormsError::Degree {
                expected: 1,
                got: w.degree(),
            });
        }
    }
    let sums = one_form_partial_traces(w1, w2, model)?;
    Ok(estimator.estimate_complex(&sums)?)
}

pub fn one_form_partial_traces(
    w1: &RepresentedForm,
    w2: &RepresentedForm,
    model: &TorusModel,
) -> Result<Vec<Complex64>, FormsError> {
    let rep = model.rep();
    let theta = model.theta();
    let j = model.j_tilde();
    let dim = rep.dim;
    let count = model.lattice().inscribed_count();
    // per pair (A, B): mode weights of a_A* b_B and spinor diagonals of γ_A^{*J} γ_B
    let mut pairs: Vec<(Vec<Complex64>, Vec<Complex64>)> = Vec::new();
    for (ma, a) in w1.components() {
        let ga = j.j_adjoint(&rep.blade(*ma));
        for (mb, b) in w2.components() {
            let c = a.involution().multiply(b, theta);
            if c.is_zero() {
                continue;
            }
            let weights = model.diagonal_weights(&c)?;
            let diag = j.orthonormal_diagonal(&(&ga * rep.blade(*mb)));
            pairs.push((weights, diag));
        }
    }
    let density = model.density(crate::torus::Observable::Volume);
    let mut out = Vec::with_capacity(count * dim);
    let mut acc = Complex64::new(0.0, 0.0);
    for pos in 0..count {
        for i in 0..dim {
            let mut v = Complex64::new(0.0, 0.0);
            for (w, d) in &pairs {
                v += w[pos] * d[i];
            }
            acc += v * density[pos];
            out.push(acc);
        }
    }
    Ok(out)
}
