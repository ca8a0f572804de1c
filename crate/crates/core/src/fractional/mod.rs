//! Sampled functions, fractional integrals and derivatives, Bielecki norms.

mod grid;
mod norm;
mod operators;
mod piecewise;

pub use grid::{Grid, SampledFunction};
pub use norm::{bielecki_norm, bielecki_norm_sampled, sup_norm, BieleckiWeight};
pub use operators::{
    caputo_derivative, caputo_derivative_nodes, round_trip_deviation, rl_integral, rl_integral_nodes,
};
pub use piecewise::{panels_for, PiecewiseFunction, Segment, DEFAULT_DENSITY};

pub(crate) use operators::ProductWeights;
