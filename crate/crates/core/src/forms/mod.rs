//! Universal and represented differential forms over the noncommutative torus.

mod represented;
mod universal;


use thiserror::Error;

use crate::krein::KreinError;
use crate::torus::TorusError;

pub use represented::{
    blade_degree, blade_indices, blade_product, connes_projection, connes_rank, connes_rows, full_krein_adjoint,
    junk_generator, junk_space, one_form_inner_product, one_form_pairing, one_form_partial_traces, pi, pi_with,
    realize, JunkSpace, RepresentedForm,
};
pub use universal::UniversalForm;

#[derive(Debug, Error)]
pub enum FormsError {
    #[error("expected a form of degree {expected}, got degree {got}")]
    Degree { expected: usize, got: usize },
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Krein(#[from] KreinError),
}
