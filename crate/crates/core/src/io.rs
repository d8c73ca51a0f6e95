//! File formats: JSON gamma representations, model configs and trace reports;
//! CSV spectra and convergence tables.
//!
//! Complex matrices are nested arrays of `[re, im]` pairs. Readers also accept
//! plain real entries. CSV floats use 17 significant digits.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clifford::{CliffordError, GammaRep, Signature, SpacelikeReflection};
use crate::krein::{ConvergenceRow, DixmierEstimate, EstimatorMethod};
use crate::linalg::{CMat, RMat};
use crate::report::Report;
use crate::torus::{Theta, TorusError, TorusModel};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid matrix: {0}")]
    Matrix(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Clifford(#[from] CliffordError),
    #[error(transparent)]
    Torus(#[from] TorusError),
}

/// A matrix entry: `[re, im]` or a bare real number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Complex([f64; 2]),
    Real(f64),
}

impl Entry {
    fn value(self) -> Complex64 {
        match self {
            Entry::Complex([re, im]) => Complex64::new(re, im),
            Entry::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

pub type MatrixJson = Vec<Vec<Entry>>;

pub fn matrix_to_json(m: &CMat) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Entry::Complex([m[(i, j)].re, m[(i, j)].im])).collect())
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<CMat, IoError> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(IoError::Matrix("empty matrix".into()));
    }
    let ncols = rows[0].len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(IoError::Matrix(format!("row {i} has {} entries, expected {ncols}", r.len())));
    }
    let m = CMat::from_fn(nrows, ncols, |i, j| rows[i][j].value());
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(IoError::Matrix("non-finite entry".into()));
    }
    Ok(m)
}

pub fn parse_matrix(text: &str) -> Result<CMat, IoError> {
    matrix_from_json(&serde_json::from_str(text)?)
}

fn real_matrix(rows: &[Vec<f64>], what: &str) -> Result<RMat, IoError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(IoError::Config(format!("{what} must be a non-empty rectangular matrix")));
    }
    Ok(RMat::from_fn(n, rows[0].len(), |i, j| rows[i][j]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaRepJson {
    pub n: usize,
    pub k: usize,
    pub dim: usize,
    pub gammas: Vec<MatrixJson>,
    pub chi: MatrixJson,
    pub krein_gram: MatrixJson,
}

impl From<&GammaRep> for GammaRepJson {
    fn from(rep: &GammaRep) -> Self {
        Self {
            n: rep.signature.n(),
            k: rep.signature.k(),
            dim: rep.dim,
            gammas: rep.gammas.iter().map(matrix_to_json).collect(),
            chi: matrix_to_json(&rep.chi),
            krein_gram: matrix_to_json(&rep.krein_gram),
        }
    }
}

impl GammaRepJson {
    pub fn to_rep(&self) -> Result<GammaRep, IoError> {
        let signature = Signature::new(self.n, self.k)?;
        let gammas = self.gammas.iter().map(matrix_from_json).collect::<Result<Vec<_>, _>>()?;
        if gammas.len() != self.n {
            return Err(IoError::Matrix(format!("{} gammas for n = {}", gammas.len(), self.n)));
        }
        Ok(GammaRep {
            signature,
            dim: self.dim,
            gammas,
            chi: matrix_from_json(&self.chi)?,
            krein_gram: matrix_from_json(&self.krein_gram)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Named(String),
    Matrix(Vec<Vec<f64>>),
}

impl MatrixSpec {
    fn named(&self, name: &str) -> bool {
        matches!(self, MatrixSpec::Named(s) if s == name)
    }
}

/// `{ "n", "k", "theta": [[..]] | "zero", "reflection": [[..]] | "standard", "cutoff" }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n: usize,
    pub k: usize,
    #[serde(default = "zero_spec")]
    pub theta: MatrixSpec,
    #[serde(default = "standard_spec")]
    pub reflection: MatrixSpec,
    pub cutoff: usize,
}

fn zero_spec() -> MatrixSpec {
    MatrixSpec::Named("zero".into())
}

fn standard_spec() -> MatrixSpec {
    MatrixSpec::Named("standard".into())
}

impl ModelConfig {
    pub fn standard(n: usize, k: usize, cutoff: usize) -> Self {
        Self {
            n,
            k,
            theta: zero_spec(),
            reflection: standard_spec(),
            cutoff,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn signature(&self) -> Result<Signature, IoError> {
        Ok(Signature::new(self.n, self.k)?)
    }

    pub fn theta(&self) -> Result<Theta, IoError> {
        match &self.theta {
            s if s.named("zero") => Ok(Theta::zero(self.n)),
            MatrixSpec::Matrix(rows) => Ok(Theta::new(real_matrix(rows, "theta")?)?),
            MatrixSpec::Named(other) => Err(IoError::Config(format!("unknown theta \"{other}\" (expected \"zero\" or a matrix)"))),
        }
    }

    pub fn reflection(&self) -> Result<SpacelikeReflection, IoError> {
        let sig = self.signature()?;
        match &self.reflection {
            s if s.named("standard") => Ok(sig.standard_reflection()),
            MatrixSpec::Matrix(rows) => Ok(SpacelikeReflection::new(sig, real_matrix(rows, "reflection")?)?),
            MatrixSpec::Named(other) => Err(IoError::Config(format!(
                "unknown reflection \"{other}\" (expected \"standard\" or a matrix)"
            ))),
        }
    }

    pub fn build(&self) -> Result<TorusModel, IoError> {
        Ok(TorusModel::new(self.theta()?, self.reflection()?, self.cutoff)?)
    }
}

pub fn format_float(x: f64) -> String {
    format!("{:.16e}", x)
}

/// One row per lattice mode in ascending `Δ_J` order: `mode,eigenvalue,multiplicity`,
/// the mode written as `;`-separated integers.
pub fn write_spectrum_csv<W: Write>(model: &TorusModel, mut out: W) -> Result<(), IoError> {
    writeln!(out, "mode,eigenvalue,multiplicity")?;
    for (mode, eig, mult) in model.spectrum() {
        let y: Vec<String> = mode.iter().map(|x| x.to_string()).collect();
        writeln!(out, "{},{},{}", y.join(";"), format_float(eig), mult)?;
    }
    Ok(())
}

/// `N,sigma,quotient,slope`.
pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], mut out: W) -> Result<(), IoError> {
    writeln!(out, "N,sigma,quotient,slope")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.n,
            format_float(r.sigma),
            format_float(r.quotient),
            format_float(r.slope)
        )?;
    }
    Ok(())
}

/// Dixmier estimate together with the value it should approach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub observable: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub imag: Option<f64>,
    pub target: f64,
    pub rel_error: f64,
    pub method: EstimatorMethod,
    pub window: (usize, usize),
    pub residual: f64,
    pub converged: bool,
}

impl TraceReport {
    pub fn new(observable: impl Into<String>, est: &DixmierEstimate, target: f64) -> Self {
        Self {
            observable: observable.into(),
            value: est.value,
            imag: None,
            target,
            rel_error: relative_error(est.value, target),
            method: est.method,
            window: est.window,
            residual: est.residual,
            converged: est.converged,
        }
    }
}

/// `|v − t| / |t|`, or the absolute error when `t = 0`.
pub fn relative_error(value: f64, target: f64) -> f64 {
    if target == 0.0 {
        (value - target).abs()
    } else {
        ((value - target) / target).abs()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaReport<'a> {
    pub n: usize,
    pub k: usize,
    pub dim: usize,
    pub passed: bool,
    pub report: &'a Report,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
