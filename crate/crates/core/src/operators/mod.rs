//! Quasi-Trefftz operators of concrete PDEs, exposed as [`OperatorSplit`]s.
//!
//! [`OperatorSplit`]: crate::frame::OperatorSplit

mod convected;
mod helmholtz;
mod jet;

pub use convected::{convected_apply_tstar, dispersion_root, make_convected_split, ConvectedSplit};
pub use helmholtz::{gradient_square, helmholtz_apply_n, make_helmholtz_split, HelmholtzSplit};
pub use jet::{principal_sqrt, CoefficientJet, FieldFn};
