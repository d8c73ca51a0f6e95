//! The rotation algebra `A_θ` on finitely supported Fourier coefficients.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::TorusError;
use crate::linalg::RMat;

/// Lattice mode `y ∈ Z^n`.
pub type Mode = Vec<i64>;

/// Antisymmetric matrix `Θ` with `θ(y₁, y₂) = y₁ᵀ Θ y₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct Theta {
    matrix: RMat,
}

impl Theta {
    pub fn new(matrix: RMat) -> Result<Self, TorusError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(TorusError::ThetaShape {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let asym = (&matrix + matrix.transpose()).amax();
        if asym > 1e-14 * matrix.amax().max(1.0) {
            return Err(TorusError::ThetaNotAntisymmetric(asym));
        }
        // store the exact antisymmetric part
        let matrix = (&matrix - matrix.transpose()) * 0.5;
        Ok(Self { matrix })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            matrix: RMat::zeros(n, n),
        }
    }

    /// Two-dimensional block `Θ₁₂ = t` (and `Θ₂₁ = −t`), zero elsewhere.
    pub fn plane(n: usize, t: f64) -> Self {
        let mut matrix = RMat::zeros(n, n);
        if n >= 2 {
            matrix[(0, 1)] = t;
            matrix[(1, 0)] = -t;
        }
        Self { matrix }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    pub fn form(&self, a: &[i64], b: &[i64]) -> f64 {
        let mut s = 0.0;
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if y != 0 {
                    s += x as f64 * self.matrix[(i, j)] * y as f64;
                }
            }
        }
        s
    }

    /// Cocycle `e^{iπθ(a, b)}`; exactly 1 when `θ(a, b) = 0`.
    pub fn phase(&self, a: &[i64], b: &[i64]) -> Complex64 {
        let t = self.form(a, b);
        if t == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::from_polar(1.0, PI * t)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|&x| x == 0.0)
    }

    /// Heuristic genericity test: every entry above the diagonal is farther than
    /// `1e-9` from each rational with denominator at most 1000.
    pub fn is_generic(&self) -> bool {
        let n = self.n();
        if n < 2 {
            return false;
        }
        (0..n).all(|i| (i + 1..n).all(|j| !near_rational(self.matrix[(i, j)], 1000, 1e-9)))
    }
}

fn near_rational(x: f64, max_den: u64, tol: f64) -> bool {
    (1..=max_den).any(|q| {
        let qx = x * q as f64;
        (qx - qx.round()).abs() < tol * q as f64
    })
}

/// Finite sum `Σ a(y) u(y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraElement {
    n: usize,
    coeffs: BTreeMap<Mode, Complex64>,
}

impl AlgebraElement {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(n: usize) -> Self {
        Self::monomial(vec![0; n], Complex64::new(1.0, 0.0))
    }

    /// `c · u(y)`.
    pub fn monomial(y: Mode, c: Complex64) -> Self {
        let n = y.len();
        let mut coeffs = BTreeMap::new();
        if c != Complex64::new(0.0, 0.0) {
            coeffs.insert(y, c);
        }
        Self { n, coeffs }
    }

    /// Generator `u_j = u(e_j)` (0-based `j`).
    pub fn generator(n: usize, j: usize) -> Self {
        let mut y = vec![0; n];
        y[j] = 1;
        Self::monomial(y, Complex64::new(1.0, 0.0))
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Mode, Complex64)>) -> Self {
        let mut out = Self::zero(n);
        for (y, c) in terms {
            assert_eq!(y.len(), n, "mode length must equal n");
            out.add_term(y, c);
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeff(&self, y: &[i64]) -> Complex64 {
        self.coeffs.get(y).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mode, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `u(0)` only, i.e. a scalar multiple of the unit.
    pub fn is_scalar(&self) -> bool {
        self.coeffs.keys().all(|y| y.iter().all(|&x| x == 0))
    }

    fn add_term(&mut self, y: Mode, c: Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        match self.coeffs.get_mut(&y) {
            Some(v) => {
                *v += c;
                if *v == zero {
                    self.coeffs.remove(&y);
                }
            }
            None if c != zero => {
                self.coeffs.insert(y, c);
            }
            None => {}
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (y, c) in &other.coeffs {
            out.add_term(y.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        if s == Complex64::new(0.0, 0.0) {
            return Self::zero(self.n);
        }
        Self {
            n: self.n,
            coeffs: self.coeffs.iter().map(|(y, c)| (y.clone(), c * s)).collect(),
        }
    }

    /// Twisted convolution `(ab)(z) = Σ_y a(y) b(z − y) e^{iπθ(y, z − y)}`.
    pub fn multiply(&self, other: &Self, theta: &Theta) -> Self {
        let mut out = Self::zero(self.n);
        for (y, a) in &self.coeffs {
            for (w, b) in &other.coeffs {
                let z: Mode = y.iter().zip(w).map(|(p, q)| p + q).collect();
                out.add_term(z, a * b * theta.phase(y, w));
            }
        }
        out
    }

    /// `a*(y) = conj(a(−y))`.
    pub fn involution(&self) -> Self {
        Self {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .map(|(y, c)| (y.iter().map(|x| -x).collect(), c.conj()))
                .collect(),
        }
    }

    /// Trace state `τ(a) = a(0)`.
    pub fn tau(&self) -> Complex64 {
        self.coeff(&vec![0; self.n])
    }

    /// Basic derivation `δ_j(a)(y) = 2πi y_j a(y)` (0-based `j`).
    pub fn derivation(&self, j: usize) -> Result<Self, TorusError> {
        if j >= self.n {
            return Err(TorusError::DerivationIndex { j, n: self.n });
        }
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(y, _)| y[j] != 0)
            .map(|(y, c)| (y.clone(), c * Complex64::new(0.0, 2.0 * PI * y[j] as f64)))
            .collect();
        Ok(Self { n: self.n, coeffs })
    }

    /// Max coefficient modulus of `self − other`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.sub(other).coeffs.values().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Parse a sum such as `3*u:0,0+u:1,0-0.5i*u:0,-1`.
    ///
    /// Each term is `[coef*]u:y_1,…,y_n`; the coefficient is a real number or a
    /// real number followed by `i`.
    pub fn parse(s: &str, n: usize) -> Result<Self, TorusError> {
        let bad = |msg: &str| TorusError::Parse(format!("{msg} in '{s}'"));
        let mut out = Self::zero(n);
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad("empty element"));
        }
        for term in split_terms(&compact) {
            let (sign, term) = match term.as_bytes().first() {
                Some(b'-') => (-1.0, &term[1..]),
                Some(b'+') => (1.0, &term[1..]),
                _ => (1.0, term),
            };
            if term.is_empty() {
                return Err(bad("empty term"));
            }
            let (coef, mode) = match term.split_once('*') {
                Some((c, m)) => (parse_coefficient(c).ok_or_else(|| bad("bad coefficient"))?, m),
                None => (Complex64::new(1.0, 0.0), term),
            };
            let mode = mode.strip_prefix("u:").ok_or_else(|| bad("term must be of the form u:y1,…,yn"))?;
            let y: Mode = mode
                .split(',')
                .map(|t| t.parse::<i64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad("bad mode"))?;
            if y.len() != n {
                return Err(bad(&format!("mode has {} entries, expected {n}", y.len())));
            }
            out.add_term(y, coef * sign);
        }
        Ok(out)
    }
}

/// Split before each `+`/`-` that follows the last digit of a mode list.
fn split_terms(s: &str) -> Vec<&str> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut start = 0;
    let mut in_mode = false;
    for i in 0..bytes.len() {
        match bytes[i] {
            b':' => in_mode = true,
            b'+' | b'-' if in_mode && bytes[i - 1].is_ascii_digit() => {
                out.push(&s[start..i]);
                start = i;
                in_mode = false;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn parse_coefficient(c: &str) -> Option<Complex64> {
    if let Some(im) = c.strip_suffix('i') {
        let v = if im.is_empty() { 1.0 } else { im.parse::<f64>().ok()? };
        Some(Complex64::new(0.0, v))
    } else {
        Some(Complex64::new(c.parse::<f64>().ok()?, 0.0))
    }
}
