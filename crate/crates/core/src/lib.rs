//! Lipschitz spaces on finite pointed metric spaces.
//!
//! The crate computes Lipschitz and Hölder norms, snowflake metrics,
//! McShane extensions, the de Leeuw embedding into functions on pairs, the
//! weighted sequence embedding with difference-quotient functionals, the
//! approximation of Hölder functions by smoother ones, and executable
//! M-ideal checks (L-projection identity, exact 3-ball optimum and the
//! averaging witness) in finite sup-norm models.
//!
//! `no_std` compatible with `alloc`; disable the default `std` feature.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is deliberate: it rejects NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod approx;
pub mod embed;
mod error;
pub mod lip;
mod math;
pub mod metric;
pub mod mideal;

pub use error::{Error, Result};
pub use lip::LipFunction;
pub use metric::{Enumeration, PointedMetricSpace};
