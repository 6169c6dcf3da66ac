// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod block;
pub mod cli;
pub mod construction;
pub mod error;
pub mod grid;
pub mod io;
pub mod landau;
pub mod menshov;
pub mod solver;
pub mod trigpoly;
pub mod verify;

pub use error::{Error, Result};
