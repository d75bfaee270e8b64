//! Truncated multivariate polynomial algebra over complex scalars.
//!
//! Every polynomial lives in centered coordinates `X = x - x0`; the center
//! itself is stored by whoever owns the polynomial. A [`GradedPolynomial`]
//! is kept as its decomposition into [`HomogeneousPolynomial`] layers, which
//! is the grading the counterimage construction walks through.

mod graded;
mod homogeneous;
mod multi_index;
mod serial;

pub use graded::GradedPolynomial;
pub use homogeneous::HomogeneousPolynomial;
pub use multi_index::{
    homogeneous_dimension, monomials_of_degree, monomials_up_to, polynomial_dimension, MultiIndex,
};
pub use serial::TermRecord;
pub(crate) use multi_index::factorial as factorial_f64;
