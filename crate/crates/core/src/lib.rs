//! Numerical workbench for semi-Riemannian spectral triples.
//!
//! Gamma matrices of any signature `(n, k)`, Krein-space linear algebra,
//! truncated (noncommutative) torus spectral triples with Dixmier-trace
//! estimation, and the symbol calculus of differential forms on the torus.

pub mod clifford;
pub mod forms;
pub mod io;
pub mod krein;
pub mod linalg;
pub mod report;
pub mod torus;

use thiserror::Error;

pub use clifford::{build_gamma, CliffordError, GammaRep, Signature, SpacelikeReflection};
pub use forms::{FormsError, RepresentedForm, UniversalForm};
pub use io::{IoError, ModelConfig};
pub use krein::{
    ComplexEstimate, DixmierEstimate, Estimator, EstimatorMethod, FundamentalSymmetry, KreinError, KreinSpace, Window,
};
pub use linalg::{CMat, LinalgError, RMat};
pub use report::{Check, Report};
pub use torus::{AlgebraElement, Observable, Theta, TorusError, TorusModel};

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Clifford(#[from] CliffordError),
    #[error(transparent)]
    Krein(#[from] KreinError),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Io(#[from] IoError),
}
