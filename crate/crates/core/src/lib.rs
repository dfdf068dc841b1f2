//! Eigen-data of the Ruelle transfer operator for a two-slope potential on
//! the full 3-shift, and the zero-temperature selection of its Gibbs states.
//!
//! The potential is `A = -d(x,0^∞)` on `[0]`, `-Γ d(x,1^∞)` on `[1]` and
//! `-α` on `[2]`. Its two maximizing measures are the Dirac masses at the
//! fixed points; the crate computes which combination the Gibbs measure at
//! inverse temperature β approaches as β grows.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closedform;
pub mod ergopt;
pub mod error;
pub mod gibbs;
pub mod ringspace;
pub mod signed_log;
pub mod xferop;

pub use error::{Error, Result};
pub use ringspace::{Params, Ring, Symbol, Word};
pub use signed_log::SignedLog;
