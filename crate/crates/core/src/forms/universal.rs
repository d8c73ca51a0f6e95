//! Universal differential forms `Ω^m A = A ⊗ Ā^{⊗m}` over the rotation algebra.
//!
//! A form is stored in the monomial basis: the tuple `(y_0, …, y_m)` stands for
//! `u(y_0) du(y_1) ⋯ du(y_m)`. Tuples with `y_i = 0` for some `i ≥ 1` vanish
//! because `Ā` kills constants, so the representation is canonical.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::torus::{AlgebraElement, Mode, Theta};

#[derive(Debug, Clone, PartialEq)]
pub struct UniversalForm {
    n: usize,
    degree: usize,
    terms: BTreeMap<Vec<Mode>, Complex64>,
}

fn is_zero_mode(y: &[i64]) -> bool {
    y.iter().all(|&x| x == 0)
}

impl UniversalForm {
    pub fn zero(n: usize, degree: usize) -> Self {
        Self {
            n,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// Degree-0 form `a`.
    pub fn from_element(a: &AlgebraElement) -> Self {
        Self::from_tuple(std::slice::from_ref(a))
    }

    /// `a_0 da_1 ⋯ da_m`, expanded multilinearly.
    pub fn from_tuple(parts: &[AlgebraElement]) -> Self {
        assert!(!parts.is_empty(), "a form needs at least the coefficient a_0");
        let n = parts[0].n();
        let mut out = Self::zero(n, parts.len() - 1);
        let mut stack: Vec<(Vec<Mode>, Complex64)> = vec![(Vec::new(), Complex64::new(1.0, 0.0))];
        for a in parts {
            assert_eq!(a.n(), n, "all tuple entries must live in the same algebra");
            let mut next = Vec::new();
            for (prefix, c) in &stack {
                for (y, v) in a.terms() {
                    let mut t = prefix.clone();
                    t.push(y.clone());
                    next.push((t, c * v));
                }
            }
            stack = next;
        }
        for (t, c) in stack {
            out.add_term(t, c);
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Mode>, &Complex64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, tuple: Vec<Mode>, c: Complex64) {
        debug_assert_eq!(tuple.len(), self.degree + 1);
        if tuple.iter().skip(1).any(|y| is_zero_mode(y)) {
            return;
        }
        let zero = Complex64::new(0.0, 0.0);
        match self.terms.get_mut(&tuple) {
            Some(v) => {
                *v += c;
                if *v == zero {
                    self.terms.remove(&tuple);
                }
            }
            None if c != zero => {
                self.terms.insert(tuple, c);
            }
            None => {}
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.degree, other.degree, "forms of different degree");
        let mut out = self.clone();
        for (t, c) in &other.terms {
            out.add_term(t.clone(), *c);
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero(self.n, self.degree);
        for (t, c) in &self.terms {
            out.add_term(t.clone(), c * s);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// `d(a_0, …, a_m) = (1, a_0, …, a_m)`.
    pub fn d(&self) -> Self {
        let mut out = Self::zero(self.n, self.degree + 1);
        for (t, c) in &self.terms {
            let mut next = Vec::with_capacity(t.len() + 1);
            next.push(vec![0; self.n]);
            next.extend(t.iter().cloned());
            out.add_term(next, *c);
        }
        out
    }

    /// `(a_0, …, a_p)(a_{p+1}, …, a_q) = Σ_{i=0}^{p} (−1)^{p−i} (a_0, …, a_i a_{i+1}, …, a_q)`.
    pub fn product(&self, other: &Self, theta: &Theta) -> Self {
        let p = self.degree;
        let mut out = Self::zero(self.n, self.degree + other.degree);
        for (t1, c1) in &self.terms {
            for (t2, c2) in &other.terms {
                let joined: Vec<&Mode> = t1.iter().chain(t2.iter()).collect();
                for i in 0..=p {
                    let sign = if (p - i).is_multiple_of(2) { 1.0 } else { -1.0 };
                    let phase = theta.phase(joined[i], joined[i + 1]);
                    let merged: Mode = joined[i].iter().zip(joined[i + 1]).map(|(a, b)| a + b).collect();
                    let mut tuple: Vec<Mode> = Vec::with_capacity(joined.len() - 1);
                    tuple.extend(joined[..i].iter().map(|y| (*y).clone()));
                    tuple.push(merged);
                    tuple.extend(joined[i + 2..].iter().map(|y| (*y).clone()));
                    out.add_term(tuple, c1 * c2 * phase * sign);
                }
            }
        }
        out
    }

    /// `(a_0, …, a_m)* = (−1)^m (1, a_m*, …, a_1*) · a_0*`.
    pub fn star(&self, theta: &Theta) -> Self {
        let sign = if self.degree.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut out = Self::zero(self.n, self.degree);
        for (t, c) in &self.terms {
            let neg = |y: &Mode| -> Mode { y.iter().map(|x| -x).collect() };
            let mut head = Vec::with_capacity(t.len());
            head.push(vec![0; self.n]);
            head.extend(t[1..].iter().rev().map(neg));
            let left = Self::from_raw(self.n, head, Complex64::new(sign, 0.0));
            let right = Self::from_raw(self.n, vec![neg(&t[0])], c.conj());
            out = out.add(&left.product(&right, theta));
        }
        out
    }

    fn from_raw(n: usize, tuple: Vec<Mode>, c: Complex64) -> Self {
        let mut out = Self::zero(n, tuple.len() - 1);
        out.add_term(tuple, c);
        out
    }

    /// Max coefficient modulus of `self − other`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.sub(other).terms.values().fold(0.0, |m, c| m.max(c.norm()))
    }
}

impl fmt::Display for UniversalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "universal form, degree {}", self.degree)?;
        for (t, c) in &self.terms {
            let modes: Vec<String> = t.iter().map(|y| format!("{y:?}")).collect();
            writeln!(f, "  ({}) {:+.12e}{:+.12e}i", modes.join(", "), c.re + 0.0, c.im + 0.0)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_element(rng: &mut impl Rng, n: usize, terms: usize) -> AlgebraElement {
        AlgebraElement::from_terms(
            n,
            (0..terms).map(|_| {
                let y: Mode = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
                (y, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            }),
        )
    }

    fn random_form(rng: &mut impl Rng, n: usize, degree: usize, terms: usize) -> UniversalForm {
        let mut out = UniversalForm::zero(n, degree);
        for _ in 0..terms {
            let parts: Vec<AlgebraElement> = (0..=degree).map(|_| random_element(rng, n, 2)).collect();
            out = out.add(&UniversalForm::from_tuple(&parts));
        }
        out
    }

    #[test]
    fn d_of_constant_vanishes() {
        let one = UniversalForm::from_element(&AlgebraElement::one(2));
        assert!(one.d().is_zero());
        let five = UniversalForm::from_element(&AlgebraElement::one(2).scale(Complex64::new(5.0, 0.0)));
        assert!(five.d().is_zero());
    }

    #[test]
    fn degree_zero_product_is_algebra_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let th = Theta::plane(2, 0.3);
        let a = random_element(&mut rng, 2, 4);
        let b = random_element(&mut rng, 2, 4);
        let lhs = UniversalForm::from_element(&a).product(&UniversalForm::from_element(&b), &th);
        let rhs = UniversalForm::from_element(&a.multiply(&b, &th));
        assert!(lhs.distance(&rhs) < 1e-14);
    }

    #[test]
    fn leibniz_on_degree_zero() {
        // d(ab) = (da) b + a (db)
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let th = Theta::plane(2, 0.77);
        let a = UniversalForm::from_element(&random_element(&mut rng, 2, 4));
        let b = UniversalForm::from_element(&random_element(&mut rng, 2, 4));
        let lhs = a.product(&b, &th).d();
        let rhs = a.d().product(&b, &th).add(&a.product(&b.d(), &th));
        assert!(lhs.distance(&rhs) < 1e-13);
    }

    #[test]
    fn right_multiplication_by_function() {
        // (a_0, a_1) b = (a_0, a_1 b) − (a_0 a_1, b), checked term by term
        let th = Theta::plane(2, 0.41);
        let u1 = AlgebraElement::generator(2, 0);
        let u2 = AlgebraElement::generator(2, 1);
        let w = UniversalForm::from_tuple(&[u2.clone(), u1.clone()]);
        let b = UniversalForm::from_element(&u2);
        let lhs = w.product(&b, &th);
        let rhs = UniversalForm::from_tuple(&[u2.clone(), u1.multiply(&u2, &th)])
            .sub(&UniversalForm::from_tuple(&[u2.multiply(&u1, &th), u2.clone()]));
        assert!(lhs.distance(&rhs) < 1e-15);
    }

    #[test]
    fn textual_dump() {
        let u = AlgebraElement::generator(2, 0);
        let w = UniversalForm::from_element(&u).d();
        let expected = "universal form, degree 1\n  ([0, 0], [1, 0]) +1.000000000000e0+0.000000000000e0i\n";
        assert_eq!(w.to_string(), expected);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn d_squared_is_zero(seed in any::<u64>(), degree in 0usize..3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = random_form(&mut rng, 2, degree, 3);
            prop_assert!(w.d().d().is_zero());
        }

        #[test]
        fn graded_leibniz(seed in any::<u64>(), t in -1.0f64..1.0, p in 0usize..2, q in 0usize..2) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let th = Theta::plane(2, t);
            let w1 = random_form(&mut rng, 2, p, 2);
            let w2 = random_form(&mut rng, 2, q, 2);
            let lhs = w1.product(&w2, &th).d();
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            let rhs = w1.d().product(&w2, &th).add(&w1.product(&w2.d(), &th).scale(Complex64::new(sign, 0.0)));
            prop_assert!(lhs.distance(&rhs) < 1e-12);
        }

        #[test]
        fn associative(seed in any::<u64>(), t in -1.0f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let th = Theta::plane(2, t);
            let a = random_form(&mut rng, 2, 1, 2);
            let b = random_form(&mut rng, 2, 1, 2);
            let c = random_form(&mut rng, 2, 0, 2);
            let l = a.product(&b, &th).product(&c, &th);
            let r = a.product(&b.product(&c, &th), &th);
            prop_assert!(l.distance(&r) < 1e-12);
        }

        #[test]
        fn star_is_involution(seed in any::<u64>(), t in -1.0f64..1.0, degree in 0usize..3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let th = Theta::plane(2, t);
            let w = random_form(&mut rng, 2, degree, 2);
            prop_assert!(w.star(&th).star(&th).distance(&w) < 1e-12);
        }
    }
}
