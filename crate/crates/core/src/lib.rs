//! Caputo fractional Volterra integrodifferential equations with
//! Riemann-Liouville integrable impulses.

pub mod analysis;
pub mod builtin;
pub mod cli;
pub mod config;
pub mod error;
pub mod expr;
pub mod fractional;
pub mod problem;
pub mod quadrature;
pub mod registry;
pub mod report;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
