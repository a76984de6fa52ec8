//! Coherent-state transforms and half-form quantization on compact Lie groups.

pub mod cli;
pub mod cst;
pub mod error;
pub mod group_model;
pub mod irreps;
pub mod quadrature;
pub mod quantization;
pub mod special;
pub mod su2;
pub mod summation;

pub use error::{CstError, Result};
