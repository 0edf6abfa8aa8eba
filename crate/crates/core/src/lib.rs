// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops read closer to the stencil formulas.
#![allow(clippy::needless_range_loop)]

pub mod commands;
pub mod config;
pub mod error;
pub mod grid;
pub mod io;
pub mod mass;
pub mod par;
pub mod pde;

pub use error::{Error, Result};
pub mod foa;
pub mod metrics;
pub mod simulate;
pub mod verify;
