//! Becker's Loewner-chain construction of quasiconformal extensions of
//! univalent maps of the unit disk, with the coefficient bounds, extremal
//! control and sufficient extendibility criteria that go with it.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod criteria;
pub mod drivers;
pub mod error;
pub mod expr;
pub mod extension;
pub mod extremal;
pub mod laurent;
pub mod loewner;
pub mod ode;
pub mod quad;
pub mod series;

pub use error::{Error, Result};
pub use num_complex::Complex64;
