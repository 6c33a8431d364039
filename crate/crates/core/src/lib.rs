//! Solvers and diagnostics for shocks in scalar balance laws
//! `u_t + f(u)_x = g(u)` with polynomial flux and source.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristics;
pub mod error;
pub mod extension;
pub mod fit;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod poly;
pub mod shocktracker;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{RiemannShockSpec, ScalarLaw};
pub use poly::Poly;
