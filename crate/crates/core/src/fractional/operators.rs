//! Riemann-Liouville integrals by product trapezoid, Caputo derivatives by
//! the L1 scheme.
//!
//! Both read the samples as a piecewise-linear interpolant and integrate the
//! kernel `(τ − s)^{q−1}` exactly on every panel, so the weakly singular
//! panel next to τ needs no special casing.

use crate::error::{Error, Result};
use crate::fractional::grid::SampledFunction;
use crate::special::gamma_unchecked;

/// `u0^p − u1^p` for `u0 > u1 ≥ 0` without cancellation.
pub(crate) fn pow_diff(u0: f64, u1: f64, p: f64) -> f64 {
    if u1 <= 0.0 {
        u0.powf(p)
    } else {
        -u0.powf(p) * (p * (u1 / u0).ln()).exp_m1()
    }
}

/// Kernel moments of one panel, measured in `u = τ − s` with `u ∈ [u1, u0]`.
/// Returns the weights of the near endpoint (u = u1) and the far one (u = u0).
fn panel_weights(u0: f64, u1: f64, order: f64) -> (f64, f64) {
    let h = u0 - u1;
    let a0 = pow_diff(u0, u1, order) / order;
    let a1 = pow_diff(u0, u1, order + 1.0) / (order + 1.0);
    let m1 = a1 - u1 * a0;
    (a0 - m1 / h, m1 / h)
}

/// Product-trapezoid weights for a uniform grid with unit step, indexed by the
/// panel offset `d = k − j` (panel `[x_j, x_{j+1}]` seen from node `x_k`).
#[derive(Debug, Clone)]
pub(crate) struct ProductWeights {
    order: f64,
    near: Vec<f64>,
    far: Vec<f64>,
}

impl ProductWeights {
    pub(crate) fn new(order: f64, panels: usize) -> Self {
        let mut near = Vec::with_capacity(panels + 1);
        let mut far = Vec::with_capacity(panels + 1);
        near.push(0.0);
        far.push(0.0);
        for d in 1..=panels {
            let (wn, wf) = panel_weights(d as f64, (d - 1) as f64, order);
            near.push(wn);
            far.push(wf);
        }
        Self { order, near, far }
    }

    /// `Γ(q)·h^{-q}·I^q` at node `k` of `values`, with lower terminal at node 0.
    #[inline]
    pub(crate) fn raw_sum(&self, values: &[f64], k: usize) -> f64 {
        let mut acc = 0.0;
        for d in 1..=k {
            acc += self.near[d] * values[k - d + 1] + self.far[d] * values[k - d];
        }
        acc
    }

    /// Weight of the node at which the integral is evaluated.
    pub(crate) fn newest_weight(&self) -> f64 {
        self.near[1]
    }

    pub(crate) fn scale(&self, step: f64) -> f64 {
        step.powf(self.order) / gamma_unchecked(self.order)
    }
}

fn check_order(op: &'static str, order: f64, lo_open: f64, hi: f64, hi_closed: bool) -> Result<()> {
    let ok = order > lo_open && (order < hi || (hi_closed && order == hi));
    if ok {
        Ok(())
    } else {
        Err(Error::domain(op, format!("order {order} outside admissible range")))
    }
}

fn check_window(op: &'static str, g: &SampledFunction, a: f64, tau: f64) -> Result<()> {
    let (ga, gb) = (g.grid().a(), g.grid().b());
    let slack = 1e-12 * (gb - ga).abs().max(1.0);
    if !(a >= ga - slack) || !(tau <= gb + slack) || !(a <= tau) {
        return Err(Error::domain(
            op,
            format!("need {ga} <= a = {a} <= tau = {tau} <= {gb}"),
        ));
    }
    Ok(())
}

/// Breakpoints `a = s_0 < … < s_r = τ` with interpolated values.
fn window(g: &SampledFunction, a: f64, tau: f64) -> Vec<(f64, f64)> {
    let mut pts = vec![(a, g.interpolate(a))];
    for (&s, &v) in g.grid().nodes().iter().zip(g.values()) {
        if s > a && s < tau {
            pts.push((s, v));
        }
    }
    pts.push((tau, g.interpolate(tau)));
    pts
}

/// `I^β_{a,τ} g = (1/Γ(β)) ∫_a^τ (τ − s)^{β−1} g(s) ds`, β ∈ (0, 1].
pub fn rl_integral(g: &SampledFunction, beta: f64, a: f64, tau: f64) -> Result<f64> {
    check_order("rl_integral", beta, 0.0, 1.0, true)?;
    check_window("rl_integral", g, a, tau)?;
    Ok(rl_integral_any_order(g, beta, a, tau))
}

pub(crate) fn rl_integral_any_order(g: &SampledFunction, order: f64, a: f64, tau: f64) -> f64 {
    if tau <= a {
        return 0.0;
    }
    let pts = window(g, a, tau);
    let mut acc = 0.0;
    for w in pts.windows(2) {
        let ((s0, g0), (s1, g1)) = (w[0], w[1]);
        let (wn, wf) = panel_weights(tau - s0, tau - s1, order);
        acc += wn * g1 + wf * g0;
    }
    acc / gamma_unchecked(order)
}

/// `I^q_{x_0, x_k} g` at every node `x_k` (zero at the first node).
pub fn rl_integral_nodes(g: &SampledFunction, order: f64) -> Result<Vec<f64>> {
    if !(order > 0.0) || !order.is_finite() {
        return Err(Error::domain("rl_integral_nodes", format!("order {order} must be positive")));
    }
    let grid = g.grid();
    let a = grid.a();
    Ok(match grid.uniform_step() {
        Some(h) => {
            let w = ProductWeights::new(order, grid.panels());
            let scale = w.scale(h);
            (0..grid.len()).map(|k| scale * w.raw_sum(g.values(), k)).collect()
        }
        None => grid
            .nodes()
            .iter()
            .map(|&t| rl_integral_any_order(g, order, a, t))
            .collect(),
    })
}

/// Caputo derivative `(1/Γ(1−α)) ∫_a^τ (τ − s)^{−α} g'(s) ds` by the L1 scheme.
///
/// Needs at least three grid nodes in `[a, τ]`.
pub fn caputo_derivative(g: &SampledFunction, alpha: f64, a: f64, tau: f64) -> Result<f64> {
    check_order("caputo_derivative", alpha, 0.0, 1.0, false)?;
    check_window("caputo_derivative", g, a, tau)?;
    let inside = g.grid().nodes().iter().filter(|&&s| s >= a && s <= tau).count();
    if inside < 3 {
        return Err(Error::Resolution {
            op: "caputo_derivative",
            detail: format!("{inside} grid nodes in [{a}, {tau}], need at least 3"),
        });
    }
    Ok(caputo_unchecked(g, alpha, a, tau))
}

pub(crate) fn caputo_unchecked(g: &SampledFunction, alpha: f64, a: f64, tau: f64) -> f64 {
    if tau <= a {
        return 0.0;
    }
    let pts = window(g, a, tau);
    let q = 1.0 - alpha;
    let mut acc = 0.0;
    for w in pts.windows(2) {
        let ((s0, g0), (s1, g1)) = (w[0], w[1]);
        let slope = (g1 - g0) / (s1 - s0);
        acc += slope * pow_diff(tau - s0, tau - s1, q);
    }
    acc / gamma_unchecked(2.0 - alpha)
}

/// L1 Caputo derivative at every node, lower terminal at the first node.
/// The first node gets 0.
pub fn caputo_derivative_nodes(g: &SampledFunction, alpha: f64) -> Result<Vec<f64>> {
    check_order("caputo_derivative_nodes", alpha, 0.0, 1.0, false)?;
    let grid = g.grid();
    let a = grid.a();
    Ok(match grid.uniform_step() {
        Some(h) => {
            let q = 1.0 - alpha;
            let n = grid.panels();
            let c: Vec<f64> = (0..=n)
                .map(|d| if d == 0 { 0.0 } else { pow_diff(d as f64, (d - 1) as f64, q) })
                .collect();
            let scale = h.powf(-alpha) / gamma_unchecked(2.0 - alpha);
            let v = g.values();
            (0..=n)
                .map(|k| {
                    let mut acc = 0.0;
                    for d in 1..=k {
                        acc += (v[k - d + 1] - v[k - d]) * c[d];
                    }
                    scale * acc
                })
                .collect()
        }
        None => grid.nodes().iter().map(|&t| caputo_unchecked(g, alpha, a, t)).collect(),
    })
}

/// Round trip `I^α[ᶜD^α g](τ)` against `g(τ) − g(a)` over the nodes from `a`
/// on; returns the largest absolute deviation. `a` must be a grid node.
pub fn round_trip_deviation(g: &SampledFunction, alpha: f64, a: f64) -> Result<f64> {
    check_order("round_trip_deviation", alpha, 0.0, 1.0, false)?;
    let nodes = g.grid().nodes();
    let start = nodes
        .iter()
        .position(|&s| (s - a).abs() <= 1e-12 * s.abs().max(1.0))
        .ok_or_else(|| Error::domain("round_trip_deviation", format!("a = {a} is not a grid node")))?;
    if nodes.len() - start < 3 {
        return Err(Error::Resolution {
            op: "round_trip_deviation",
            detail: "fewer than 3 nodes after a".into(),
        });
    }
    let sub_grid = crate::fractional::Grid::new(nodes[start..].to_vec())?;
    let sub = SampledFunction::new(sub_grid, g.values()[start..].to_vec())?;
    let derivative = SampledFunction::new(sub.grid().clone(), caputo_derivative_nodes(&sub, alpha)?)?;
    let round_trip = rl_integral_nodes(&derivative, alpha)?;
    let g0 = sub.values()[0];
    Ok(round_trip
        .iter()
        .zip(sub.values())
        .map(|(r, v)| (r - (v - g0)).abs())
        .fold(0.0, f64::max))
}
