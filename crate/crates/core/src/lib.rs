//! Generalized plane wave (GPW) quasi-Trefftz functions.
//!
//! A GPW is `exp(P(x - x0))` with `P` a polynomial chosen so that the
//! Taylor expansion of `L exp(P)` at `x0` vanishes to degree `p - 2`, where
//! `L` is a second-order wave operator with variable coefficients. The phase
//! is built layer by layer over homogeneous polynomial degrees by splitting
//! the nonlinear operator into its frozen principal part and a remainder
//! that only ever pushes information to higher layers.
//!
//! * [`poly`]: graded polynomial algebra in centered coordinates.
//! * [`frame`]: the operator-split contract and the counterimage construction.
//! * [`layer`]: inverse of an order-2 principal part on each layer.
//! * [`operators`]: Helmholtz and convected Helmholtz instantiations.
//! * [`basis`]: direction sets and GPW families.
//! * [`lab`]: rank, best-approximation and residual-order studies.

// `!(x <= tol)` is deliberate: NaN must fail every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod error;
pub mod frame;
pub mod lab;
pub mod layer;
pub mod operators;
pub mod poly;

pub use error::{Error, Result};
