use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::grid::SampledFunction;
use crate::fractional::piecewise::PiecewiseFunction;

/// The θ of the Bielecki norm `sup |x(τ)| e^{−θτ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct BieleckiWeight(f64);

impl BieleckiWeight {
    pub fn new(theta: f64) -> Result<Self> {
        if theta > 0.0 && theta.is_finite() {
            Ok(Self(theta))
        } else {
            Err(Error::domain("BieleckiWeight", format!("theta = {theta} must be positive and finite")))
        }
    }

    pub fn theta(self) -> f64 {
        self.0
    }

    pub fn factor(self, tau: f64) -> f64 {
        (-self.0 * tau).exp()
    }
}

impl TryFrom<f64> for BieleckiWeight {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BieleckiWeight> for f64 {
    fn from(w: BieleckiWeight) -> f64 {
        w.0
    }
}

/// Discrete Bielecki norm: max over every stored node, both one-sided limits
/// at the breakpoints included.
pub fn bielecki_norm(x: &PiecewiseFunction, w: BieleckiWeight) -> f64 {
    x.nodes().map(|(_, _, t, v)| v.abs() * w.factor(t)).fold(0.0, f64::max)
}

pub fn bielecki_norm_sampled(g: &SampledFunction, w: BieleckiWeight) -> f64 {
    g.grid()
        .nodes()
        .iter()
        .zip(g.values())
        .map(|(&t, v)| v.abs() * w.factor(t))
        .fold(0.0, f64::max)
}

pub fn sup_norm(x: &PiecewiseFunction) -> f64 {
    x.nodes().map(|(_, _, _, v)| v.abs()).fold(0.0, f64::max)
}
