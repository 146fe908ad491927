//! Numerical laboratory for the real-analytic Eisenstein series E*_T on the
//! imaginary axis of the modular surface.

// Constants are kept at the precision they were computed to, and range
// checks are written `!(x > a)` on purpose so that NaN is rejected.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod corr;
pub mod eisen;
pub mod error;
pub mod golden;
pub mod par;
pub mod quad;
pub mod scs;
pub mod selftest;
pub mod specfun;
pub mod testfn;

pub use error::{Error, Result};
