//! The fixed-point operator T and Picard iteration in the Bielecki norm.
//!
//! T maps x to
//!
//! ```text
//! x₀                                          τ = 0
//! x₀ + I^α_{0,τ} F                            τ ∈ (0, τ₁]
//! I^β_{τᵢ,τ} hᵢ(·, x)                         τ ∈ (τᵢ, σᵢ]
//! I^β_{τᵢ,σᵢ} hᵢ(·, x) + I^α_{σᵢ,τ} F         τ ∈ (σᵢ, τᵢ₊₁]
//! ```
//!
//! with `F(s) = f(s, x(s), ∫_{σᵢ}^s h(r, x(r)) dr)`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fractional::{bielecki_norm, sup_norm, BieleckiWeight, PiecewiseFunction, ProductWeights, Segment, DEFAULT_DENSITY};
use crate::problem::{Branch, ImpulsiveProblem};
use crate::registry::Registry;

#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialIterate {
    /// x₀ on differential intervals, 0 on impulse intervals.
    #[default]
    Default,
    Zero,
    Custom(PiecewiseFunction),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub theta: BieleckiWeight,
    /// Threshold on the Bielecki norm of the last step.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Panels per unit length.
    pub grid_density: f64,
    /// Also require the unweighted sup of the last step to meet `tolerance`.
    /// Large θ makes the Bielecki norm blind to late intervals.
    pub require_sup: bool,
    pub scheme: String,
    pub initial: InitialIterate,
}

impl SolverConfig {
    pub fn new(theta: f64) -> Result<Self> {
        Ok(Self {
            theta: BieleckiWeight::new(theta)?,
            tolerance: 1e-10,
            max_iterations: 200,
            grid_density: DEFAULT_DENSITY,
            require_sup: true,
            scheme: "picard".into(),
            initial: InitialIterate::Default,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::domain("SolverConfig", format!("tolerance {} must be positive", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::domain("SolverConfig", "max_iterations must be at least 1"));
        }
        if !(self.grid_density > 0.0) || !self.grid_density.is_finite() {
            return Err(Error::domain("SolverConfig", format!("grid density {} must be positive", self.grid_density)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveTrace {
    pub scheme: String,
    pub theta: f64,
    /// ‖x_{k+1} − x_k‖ in the Bielecki norm.
    pub steps: Vec<f64>,
    /// The same steps in the sup norm.
    pub sup_steps: Vec<f64>,
    /// Geometric-fit ratio of successive steps after the first.
    pub observed_ratio: f64,
    pub converged: bool,
    pub iterations: usize,
    /// ‖Tx − x‖ of the returned iterate.
    pub final_residual: f64,
}

/// One sweep of a fixed-point iteration for the problem.
pub trait IterationScheme: Send + Sync {
    fn description(&self) -> &'static str;
    fn step(&self, problem: &ImpulsiveProblem, x: &PiecewiseFunction) -> Result<PiecewiseFunction>;
}

/// The operator T applied literally: every branch reads the current iterate.
pub struct Picard;

/// Solves the implicit impulse equations node by node (damped fixed point,
/// warm started, left to right) and applies T on differential intervals.
pub struct PicardMarching {
    pub tolerance: f64,
    pub max_inner: usize,
}

impl Default for PicardMarching {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_inner: 200,
        }
    }
}

impl IterationScheme for Picard {
    fn description(&self) -> &'static str {
        "pure Picard iteration of T"
    }

    fn step(&self, problem: &ImpulsiveProblem, x: &PiecewiseFunction) -> Result<PiecewiseFunction> {
        apply_operator_t(problem, x)
    }
}

impl IterationScheme for PicardMarching {
    fn description(&self) -> &'static str {
        "Picard on differential intervals, implicit marching on impulse intervals"
    }

    fn step(&self, problem: &ImpulsiveProblem, x: &PiecewiseFunction) -> Result<PiecewiseFunction> {
        sweep(problem, x, Some(self))
    }
}

pub fn scheme_registry() -> Registry<dyn IterationScheme> {
    let mut r: Registry<dyn IterationScheme> = Registry::new("iteration scheme");
    r.register("picard", Arc::new(Picard));
    r.register("picard-marching", Arc::new(PicardMarching::default()));
    r
}

fn check_grid(problem: &ImpulsiveProblem, x: &PiecewiseFunction) -> Result<()> {
    if x.partition() != &problem.partition {
        return Err(Error::Structure("iterate lives on a different partition than the problem".into()));
    }
    let expected = PiecewiseFunction::zeros(&problem.partition, x.density())?;
    if !x.same_layout(&expected) {
        return Err(Error::Structure("iterate is not on the standard grid of its partition".into()));
    }
    Ok(())
}

/// `(Tx)` on the grid of `x`.
pub fn apply_operator_t(problem: &ImpulsiveProblem, x: &PiecewiseFunction) -> Result<PiecewiseFunction> {
    sweep(problem, x, None)
}

fn sweep(problem: &ImpulsiveProblem, x: &PiecewiseFunction, marching: Option<&PicardMarching>) -> Result<PiecewiseFunction> {
    check_grid(problem, x)?;
    let m = problem.partition.m();
    let mut impulse_end = vec![0.0; m + 1];
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(x.segments().len());
    for seg in x.segments() {
        let values = match seg.branch {
            Branch::Impulse(i) => {
                let v = match marching {
                    Some(mc) => impulse_marching(problem, seg, i, mc)?,
                    None => impulse_branch(problem, seg, i)?,
                };
                impulse_end[i] = *v.last().unwrap();
                v
            }
            Branch::Differential(i) => {
                let start = if i == 0 { problem.x0 } else { impulse_end[i] };
                differential_branch(problem, seg, start)?
            }
        };
        out.push(values);
    }
    PiecewiseFunction::from_values(&problem.partition, x.density(), out)
}

fn step_of(seg: &Segment) -> f64 {
    let g = seg.samples.grid();
    (g.b() - g.a()) / g.panels() as f64
}

fn impulse_branch(problem: &ImpulsiveProblem, seg: &Segment, i: usize) -> Result<Vec<f64>> {
    let map = problem.impulse_map(i);
    let nodes = seg.samples.grid().nodes();
    let xs = seg.samples.values();
    let hv = nodes
        .iter()
        .zip(xs)
        .map(|(&t, &xv)| map.eval_at(seg.branch, t, xv, 0.0))
        .collect::<Result<Vec<_>>>()?;
    let w = ProductWeights::new(problem.beta, nodes.len() - 1);
    let scale = w.scale(step_of(seg));
    Ok((0..nodes.len()).map(|k| scale * w.raw_sum(&hv, k)).collect())
}

fn impulse_marching(problem: &ImpulsiveProblem, seg: &Segment, i: usize, mc: &PicardMarching) -> Result<Vec<f64>> {
    let map = problem.impulse_map(i);
    let nodes = seg.samples.grid().nodes();
    let n = nodes.len() - 1;
    let w = ProductWeights::new(problem.beta, n);
    let scale = w.scale(step_of(seg));
    let mut xs = vec![0.0; n + 1];
    let mut hv = vec![0.0; n + 1];
    hv[0] = map.eval_at(seg.branch, nodes[0], 0.0, 0.0)?;
    for k in 1..=n {
        hv[k] = 0.0;
        let known = scale * w.raw_sum(&hv, k);
        let a = scale * w.newest_weight();
        let t = nodes[k];
        let mut y = xs[k - 1];
        let mut lambda = 1.0;
        let mut last = f64::INFINITY;
        for _ in 0..mc.max_inner {
            let target = known + a * map.eval_at(seg.branch, t, y, 0.0)?;
            let delta = target - y;
            if delta.abs() <= mc.tolerance * y.abs().max(1.0) {
                y = target;
                break;
            }
            if delta.abs() > last {
                lambda *= 0.5;
            }
            last = delta.abs();
            y += lambda * delta;
        }
        xs[k] = y;
        hv[k] = map.eval_at(seg.branch, t, y, 0.0)?;
    }
    Ok(xs)
}

fn differential_branch(problem: &ImpulsiveProblem, seg: &Segment, start: f64) -> Result<Vec<f64>> {
    let nodes = seg.samples.grid().nodes();
    let xs = seg.samples.values();
    let n = nodes.len() - 1;
    let hs = step_of(seg);
    let mut fv = Vec::with_capacity(n + 1);
    let mut volterra = 0.0;
    let mut h_prev = 0.0;
    for k in 0..=n {
        let h_here = problem.h.eval_at(seg.branch, nodes[k], xs[k], 0.0)?;
        if k > 0 {
            volterra += 0.5 * hs * (h_prev + h_here);
        }
        h_prev = h_here;
        fv.push(problem.f.eval_at(seg.branch, nodes[k], xs[k], volterra)?);
    }
    let w = ProductWeights::new(problem.alpha, n);
    let scale = w.scale(hs);
    Ok((0..=n).map(|k| start + scale * w.raw_sum(&fv, k)).collect())
}

/// `‖Tx − x‖` in the Bielecki norm.
pub fn fixed_point_residual(problem: &ImpulsiveProblem, x: &PiecewiseFunction, theta: BieleckiWeight) -> Result<f64> {
    let tx = apply_operator_t(problem, x)?;
    Ok(bielecki_norm(&tx.sub(x)?, theta))
}

pub fn initial_iterate(problem: &ImpulsiveProblem, config: &SolverConfig) -> Result<PiecewiseFunction> {
    match &config.initial {
        InitialIterate::Default => PiecewiseFunction::from_fn(&problem.partition, config.grid_density, |b, _| match b {
            Branch::Differential(_) => problem.x0,
            Branch::Impulse(_) => 0.0,
        }),
        InitialIterate::Zero => PiecewiseFunction::zeros(&problem.partition, config.grid_density),
        InitialIterate::Custom(x) => {
            check_grid(problem, x)?;
            Ok(x.clone())
        }
    }
}

/// Exponential of the least-squares slope of `ln step` against the index,
/// over positive steps after the first. 0 when a step vanished exactly.
pub fn geometric_ratio(steps: &[f64]) -> f64 {
    let tail: Vec<f64> = steps.iter().skip(1).copied().collect();
    if tail.contains(&0.0) {
        return 0.0;
    }
    // steps at or below rounding level carry no rate information
    let floor = steps.iter().copied().fold(0.0, f64::max) * 1e-13;
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > floor)
        .map(|(k, &s)| (k as f64, s.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxy / sxx).exp()
}

/// Iterate the configured scheme until the step meets the tolerance. On
/// exhaustion the last iterate is returned with `converged = false`.
pub fn solve_picard(problem: &ImpulsiveProblem, config: &SolverConfig) -> Result<(PiecewiseFunction, SolveTrace)> {
    problem.validate()?;
    config.validate()?;
    let scheme = scheme_registry().get(&config.scheme)?;
    let mut x = initial_iterate(problem, config)?;
    let (mut steps, mut sup_steps) = (Vec::new(), Vec::new());
    let mut converged = false;
    for _ in 0..config.max_iterations {
        let next = scheme.step(problem, &x)?;
        let diff = next.sub(&x)?;
        let step = bielecki_norm(&diff, config.theta);
        let sup = sup_norm(&diff);
        steps.push(step);
        sup_steps.push(sup);
        x = next;
        if step <= config.tolerance && (!config.require_sup || sup <= config.tolerance) {
            converged = true;
            break;
        }
    }
    let final_residual = fixed_point_residual(problem, &x, config.theta)?;
    let trace = SolveTrace {
        scheme: config.scheme.clone(),
        theta: config.theta.theta(),
        observed_ratio: geometric_ratio(&steps),
        iterations: steps.len(),
        steps,
        sup_steps,
        converged,
        final_residual,
    };
    Ok((x, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Func, Partition};
    use crate::special::gamma_fn;

    fn with_maps(partition: Partition, f: Func, impulses: Vec<Func>, x0: f64, alpha: f64) -> ImpulsiveProblem {
        ImpulsiveProblem::new(alpha, 0.5, partition, f, Func::zero(), impulses, x0).unwrap()
    }

    #[test]
    fn zero_maps_give_piecewise_constant() {
        let p = Partition::new(vec![1.0, 2.0, 3.0], vec![1.5, 2.5]).unwrap();
        let prob = with_maps(p, Func::zero(), vec![Func::zero(), Func::zero()], 1.0, 0.5);
        let x = PiecewiseFunction::from_fn(&prob.partition, 16.0, |_, t| t.sin()).unwrap();
        let tx = apply_operator_t(&prob, &x).unwrap();
        for (_, b, _, v) in tx.nodes() {
            let expected = if b == Branch::Differential(0) { 1.0 } else { 0.0 };
            assert_eq!(v, expected, "{b}");
        }
    }

    #[test]
    fn constant_forcing() {
        let prob = with_maps(Partition::single(2.0).unwrap(), Func::constant(3.0), vec![], 0.5, 0.4);
        let x = PiecewiseFunction::zeros(&prob.partition, 32.0).unwrap();
        let tx = apply_operator_t(&prob, &x).unwrap();
        let g = gamma_fn(1.4).unwrap();
        for (_, _, t, v) in tx.nodes() {
            assert!((v - (0.5 + 3.0 * t.powf(0.4) / g)).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_mismatch_is_structural() {
        let prob = with_maps(Partition::single(1.0).unwrap(), Func::zero(), vec![], 0.0, 0.5);
        let other = PiecewiseFunction::zeros(&Partition::single(2.0).unwrap(), 8.0).unwrap();
        assert!(matches!(apply_operator_t(&prob, &other), Err(Error::Structure(_))));
    }

    #[test]
    fn trivial_problem_converges_in_two_iterations() {
        let p = Partition::new(vec![1.0, 2.0], vec![1.5]).unwrap();
        let prob = with_maps(p, Func::zero(), vec![Func::zero()], 5.0, 0.5);
        let mut cfg = SolverConfig::new(1.0).unwrap();
        cfg.grid_density = 32.0;
        let (x, trace) = solve_picard(&prob, &cfg).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.iterations, 2);
        assert_eq!(x.eval(0.7).unwrap(), 5.0);
        assert_eq!(x.eval(1.7).unwrap(), 0.0);
    }

    #[test]
    fn half_order_unit_forcing() {
        let prob = with_maps(Partition::single(1.0).unwrap(), Func::constant(1.0), vec![], 0.0, 0.5);
        let cfg = SolverConfig::new(1.0).unwrap();
        let (x, trace) = solve_picard(&prob, &cfg).unwrap();
        assert!(trace.converged);
        let g = gamma_fn(1.5).unwrap();
        let err = x.nodes().map(|(_, _, t, v)| (v - t.sqrt() / g).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-4, "{err}");
    }

    #[test]
    fn evaluation_errors_name_the_branch() {
        let p = Partition::new(vec![1.0, 2.0], vec![1.5]).unwrap();
        let bad = Func::native("bad", |t, _, _| if t > 1.2 { f64::NAN } else { 0.0 });
        let prob = with_maps(p, Func::zero(), vec![bad], 0.0, 0.5);
        let x = PiecewiseFunction::zeros(&prob.partition, 8.0).unwrap();
        match apply_operator_t(&prob, &x) {
            Err(Error::Evaluation { branch, tau, .. }) => {
                assert_eq!(branch, "impulse interval 1");
                assert!(tau > 1.2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn marching_solves_the_impulse_equation() {
        // x = I^β_{1,τ}(0.5·x + 1) on (1, 2]
        let p = Partition::new(vec![1.0, 3.0], vec![2.0]).unwrap();
        let hi = Func::native("h1", |_, x, _| 0.5 * x + 1.0);
        let prob = with_maps(p, Func::zero(), vec![hi], 0.0, 0.5);
        let x = PiecewiseFunction::zeros(&prob.partition, 64.0).unwrap();
        let marched = PicardMarching::default().step(&prob, &x).unwrap();
        let seg = marched.segment(Branch::Impulse(1)).unwrap();
        let tx = apply_operator_t(&prob, &marched).unwrap();
        let seg_t = tx.segment(Branch::Impulse(1)).unwrap();
        for (a, b) in seg.samples.values().iter().zip(seg_t.samples.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn ratio_fit() {
        let steps: Vec<f64> = (0..10).map(|k| 0.3f64.powi(k)).collect();
        assert!((geometric_ratio(&steps) - 0.3).abs() < 1e-12);
        assert_eq!(geometric_ratio(&[1.0, 0.0]), 0.0);
        assert_eq!(geometric_ratio(&[1.0]), 0.0);
    }

    #[test]
    fn unknown_scheme() {
        let prob = with_maps(Partition::single(1.0).unwrap(), Func::zero(), vec![], 0.0, 0.5);
        let mut cfg = SolverConfig::new(1.0).unwrap();
        cfg.scheme = "newton".into();
        assert!(matches!(solve_picard(&prob, &cfg), Err(Error::Unknown { .. })));
    }
}
