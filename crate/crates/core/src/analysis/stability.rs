//! Residuals of approximate solutions, the stability constant and the
//! Bielecki-Ulam certificates.

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::analysis::bounds::{BoundInputs, IntervalTerms, Weighted};
use crate::error::{Error, Result};
use crate::fractional::{caputo_derivative_nodes, rl_integral_nodes, Grid, PiecewiseFunction, ProductWeights, SampledFunction, Segment};
use crate::problem::{Branch, CPhi, Comparison, HypothesisData, ImpulsiveProblem, StabilityConfig};
use crate::quadrature::integrate;
use crate::solver::{solve_picard, SolveTrace, SolverConfig};
use crate::special::gamma_unchecked;

/// Impulse residuals at or below this count as zero when ψ = 0.
pub const IMPULSE_EXACT_TOLERANCE: f64 = 1e-8;

/// `max_τ I^α_{0,τ}φ / φ(τ)` over the nodes of a grid starting at 0.
///
/// Nodes with φ = 0 and I^αφ = 0 are skipped; φ = 0 with I^αφ > 0 fails, as
/// does a negative or decreasing φ.
pub fn check_comparison(phi: &SampledFunction, alpha: f64) -> Result<f64> {
    let grid = phi.grid();
    if grid.a() != 0.0 {
        return Err(Error::domain("check_comparison", format!("grid must start at 0, starts at {}", grid.a())));
    }
    let (nodes, values) = (grid.nodes(), phi.values());
    if let Some(k) = values.iter().position(|&v| v < 0.0) {
        return Err(Error::ComparisonCondition(format!("φ({}) = {} is negative", nodes[k], values[k])));
    }
    for k in 1..values.len() {
        if values[k] < values[k - 1] - 1e-12 * values[k - 1].abs() {
            return Err(Error::ComparisonCondition(format!("φ decreases between τ = {} and τ = {}", nodes[k - 1], nodes[k])));
        }
    }
    let integral = rl_integral_nodes(phi, alpha)?;
    let mut worst = 0.0f64;
    for k in 1..values.len() {
        match (values[k], integral[k]) {
            (p, i) if p > 0.0 => worst = worst.max(i / p),
            (_, i) if i == 0.0 => {}
            (_, i) => {
                return Err(Error::ComparisonCondition(format!("φ({}) = 0 while I^α φ = {i}", nodes[k])));
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CPhiReport {
    /// The value used downstream.
    pub c_phi: f64,
    pub analytic: Option<f64>,
    pub grid_ratio: f64,
    /// The grid ratio does not exceed the analytic value.
    pub consistent: bool,
}

/// c_φ for φ on `[0, T]`: the closed form when there is one, else the grid
/// ratio of [`check_comparison`].
pub fn c_phi_for(phi: &Comparison, alpha: f64, t_end: f64, density: f64) -> Result<CPhiReport> {
    let panels = crate::fractional::panels_for(t_end, density);
    let grid = Grid::uniform(0.0, t_end, panels)?;
    let values = grid.nodes().iter().map(|&t| phi.eval(t)).collect::<Result<Vec<_>>>()?;
    let sampled = SampledFunction::new(grid, values)?;
    let grid_ratio = check_comparison(&sampled, alpha)?;
    let analytic = phi.analytic_c_phi(alpha, t_end);
    Ok(CPhiReport {
        c_phi: analytic.unwrap_or(grid_ratio),
        analytic,
        grid_ratio,
        consistent: analytic.is_none_or(|a| grid_ratio <= a * (1.0 + 1e-9)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureStrategy {
    /// Product trapezoid on the sampling grid, as in the solver.
    #[default]
    Grid,
    /// Adaptive Gauss-Kronrod on each panel of the interpolant, with the
    /// kernel singularity removed by substitution.
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualProfile {
    pub strategy: QuadratureStrategy,
    /// sup |ᶜD^α y − f(τ, y, ∫h)| on each differential interval, i = 0..m.
    pub differential_sups: Vec<f64>,
    /// |fine − coarse| of the same sups after dropping every other node.
    pub differential_bands: Vec<f64>,
    /// sup |y − I^β hᵢ(·, y)| on each impulse interval, i = 1..m.
    pub impulse_sups: Vec<f64>,
    pub impulse_bands: Vec<f64>,
    #[serde(skip)]
    pub differential_nodes: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum EpsilonOutcome {
    Value { epsilon: f64 },
    /// ψ = 0 but some impulse residual is nonzero.
    ImpulseExactRequired { impulse_sup: f64 },
    /// φ(τ) = 0 where the residual is positive.
    PhiVanishes { tau: f64 },
}

impl ResidualProfile {
    /// Smallest ε with `|H(τ)| ≤ ε φ(τ)` at every differential node and
    /// `|Hᵢ| ≤ ε ψ` on every impulse interval.
    pub fn epsilon_for(&self, phi: &Comparison, psi: f64) -> Result<EpsilonOutcome> {
        let mut eps = 0.0f64;
        for &(tau, r) in &self.differential_nodes {
            let p = phi.eval(tau)?;
            if p > 0.0 {
                eps = eps.max(r / p);
            } else if r > 0.0 {
                return Ok(EpsilonOutcome::PhiVanishes { tau });
            }
        }
        let impulse_sup = self.impulse_sups.iter().copied().fold(0.0, f64::max);
        if psi > 0.0 {
            eps = eps.max(impulse_sup / psi);
        } else if impulse_sup > IMPULSE_EXACT_TOLERANCE {
            return Ok(EpsilonOutcome::ImpulseExactRequired { impulse_sup });
        }
        Ok(EpsilonOutcome::Value { epsilon: eps })
    }
}

struct RawProfile {
    differential_sups: Vec<f64>,
    impulse_sups: Vec<f64>,
    differential_nodes: Vec<(f64, f64)>,
}

fn differential_residuals(problem: &ImpulsiveProblem, seg: &Segment) -> Result<Vec<(f64, f64)>> {
    let nodes = seg.samples.grid().nodes();
    let ys = seg.samples.values();
    let deriv = caputo_derivative_nodes(&seg.samples, problem.alpha)?;
    let hs = nodes[1] - nodes[0];
    let mut out = Vec::with_capacity(nodes.len());
    let mut volterra = 0.0;
    let mut h_prev = problem.h.eval_at(seg.branch, nodes[0], ys[0], 0.0)?;
    for k in 1..nodes.len() {
        let h_here = problem.h.eval_at(seg.branch, nodes[k], ys[k], 0.0)?;
        volterra += 0.5 * hs * (h_prev + h_here);
        h_prev = h_here;
        // the L1 derivative needs three nodes from the lower terminal
        if k >= 2 {
            let f = problem.f.eval_at(seg.branch, nodes[k], ys[k], volterra)?;
            out.push((nodes[k], (deriv[k] - f).abs()));
        }
    }
    Ok(out)
}

fn impulse_integrals(problem: &ImpulsiveProblem, seg: &Segment, i: usize, strategy: QuadratureStrategy) -> Result<Vec<f64>> {
    let map = problem.impulse_map(i);
    let beta = problem.beta;
    let nodes = seg.samples.grid().nodes();
    let ys = seg.samples.values();
    match strategy {
        QuadratureStrategy::Grid => {
            let hv = nodes
                .iter()
                .zip(ys)
                .map(|(&t, &y)| map.eval_at(seg.branch, t, y, 0.0))
                .collect::<Result<Vec<_>>>()?;
            let w = ProductWeights::new(beta, nodes.len() - 1);
            let scale = w.scale(nodes[1] - nodes[0]);
            Ok((0..nodes.len()).map(|k| scale * w.raw_sum(&hv, k)).collect())
        }
        QuadratureStrategy::Adaptive => {
            let failure: Cell<Option<Error>> = Cell::new(None);
            let integrand = |s: f64| match map.eval_at(seg.branch, s, seg.samples.interpolate(s), 0.0) {
                Ok(v) => v,
                Err(e) => {
                    failure.set(Some(e));
                    0.0
                }
            };
            let g = gamma_unchecked(beta);
            let mut out = vec![0.0];
            for k in 1..nodes.len() {
                let tau = nodes[k];
                let mut acc = 0.0;
                for j in 0..k - 1 {
                    acc += integrate(|s| (tau - s).powf(beta - 1.0) * integrand(s), nodes[j], nodes[j + 1], 1e-15, 1e-13);
                }
                // last panel in u = (τ − s)^β, which removes the kernel singularity
                let top = (tau - nodes[k - 1]).powf(beta);
                acc += integrate(|u| integrand(tau - u.powf(1.0 / beta)) / beta, 0.0, top, 1e-15, 1e-13);
                out.push(acc / g);
            }
            match failure.take() {
                Some(e) => Err(e),
                None => Ok(out),
            }
        }
    }
}

fn raw_profile(problem: &ImpulsiveProblem, y: &PiecewiseFunction, strategy: QuadratureStrategy) -> Result<RawProfile> {
    if y.partition() != &problem.partition {
        return Err(Error::Structure("candidate lives on a different partition than the problem".into()));
    }
    let m = problem.partition.m();
    let mut differential_sups = vec![0.0; m + 1];
    let mut impulse_sups = vec![0.0; m];
    let mut differential_nodes = Vec::new();
    for seg in y.segments() {
        match seg.branch {
            Branch::Differential(i) => {
                let r = differential_residuals(problem, seg)?;
                differential_sups[i] = r.iter().map(|p| p.1).fold(0.0, f64::max);
                differential_nodes.extend(r);
            }
            Branch::Impulse(i) => {
                let integral = impulse_integrals(problem, seg, i, strategy)?;
                impulse_sups[i - 1] = seg
                    .samples
                    .values()
                    .iter()
                    .zip(&integral)
                    .map(|(y, v)| (y - v).abs())
                    .fold(0.0, f64::max);
            }
        }
    }
    Ok(RawProfile {
        differential_sups,
        impulse_sups,
        differential_nodes,
    })
}

/// Residuals of y in both equations, interval by interval, with a
/// two-density uncertainty band.
pub fn residual_profile(problem: &ImpulsiveProblem, y: &PiecewiseFunction, strategy: QuadratureStrategy) -> Result<ResidualProfile> {
    let fine = raw_profile(problem, y, strategy)?;
    let band = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect::<Vec<_>>();
    let (differential_bands, impulse_bands) = match y.coarsen() {
        Some(c) => {
            let coarse = raw_profile(problem, &c, strategy)?;
            (
                band(&fine.differential_sups, &coarse.differential_sups),
                band(&fine.impulse_sups, &coarse.impulse_sups),
            )
        }
        None => (vec![f64::NAN; fine.differential_sups.len()], vec![f64::NAN; fine.impulse_sups.len()]),
    };
    Ok(ResidualProfile {
        strategy,
        differential_sups: fine.differential_sups,
        differential_bands,
        impulse_sups: fine.impulse_sups,
        impulse_bands,
        differential_nodes: fine.differential_nodes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Denominator {
    pub label: String,
    /// 1 minus the contraction terms of this piece.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityConstant {
    pub value: f64,
    pub theta: f64,
    pub c_phi: f64,
    pub psi: f64,
    pub denominators: Vec<Denominator>,
}

/// Denominators of the stability constant at θ: the first differential
/// interval, each impulse interval, and each later differential interval
/// together with its impulse.
pub fn stability_denominators(inputs: &BoundInputs, theta: f64) -> Result<Vec<Denominator>> {
    let terms = Weighted::terms(inputs, theta)?;
    let mut out = vec![Denominator {
        label: "differential interval 0".into(),
        value: 1.0 - (terms[0].kernel + terms[0].volterra),
    }];
    for t in &terms[1..] {
        out.push(Denominator {
            label: format!("impulse interval {}", t.index),
            value: 1.0 - t.impulse,
        });
    }
    for t in &terms[1..] {
        out.push(Denominator {
            label: format!("differential interval {} with impulse {}", t.index, t.index),
            value: 1.0 - IntervalTerms::total(t),
        });
    }
    Ok(out)
}

/// `C = c_φ/(1−D₀) + Σ ψ/(1−Eᵢ) + Σ (1+c_φ)/(1−Dᵢ)`, built from the weighted
/// contraction terms (basic hypotheses are read with zero weights).
pub fn stability_constant(inputs: &BoundInputs, theta: f64, c_phi: f64, psi: f64) -> Result<StabilityConstant> {
    let denominators = stability_denominators(inputs, theta)?;
    let failing: Vec<&Denominator> = denominators.iter().filter(|d| !(d.value > 0.0)).collect();
    if !failing.is_empty() {
        let worst = failing.iter().map(|d| d.value).fold(f64::INFINITY, f64::min);
        return Err(Error::ThetaTooSmall {
            interval: failing
                .iter()
                .map(|d| format!("{} ({:.6e})", d.label, d.value))
                .collect::<Vec<_>>()
                .join(", "),
            value: worst,
        });
    }
    let m = inputs.partition.m();
    let mut value = c_phi / denominators[0].value;
    for d in &denominators[1..=m] {
        value += psi / d.value;
    }
    for d in &denominators[m + 1..] {
        value += (1.0 + c_phi) / d.value;
    }
    Ok(StabilityConstant {
        value,
        theta,
        c_phi,
        psi,
        denominators,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StabilityMode {
    #[serde(rename = "BUH")]
    Buh,
    #[serde(rename = "generalized-BUH")]
    GeneralizedBuh,
    #[serde(rename = "BUHR")]
    Buhr,
    #[serde(rename = "generalized-BUHR")]
    GeneralizedBuhr,
}

impl StabilityMode {
    pub const ALL: [StabilityMode; 4] = [Self::Buh, Self::GeneralizedBuh, Self::Buhr, Self::GeneralizedBuhr];

    pub fn name(self) -> &'static str {
        match self {
            Self::Buh => "BUH",
            Self::GeneralizedBuh => "generalized-BUH",
            Self::Buhr => "BUHR",
            Self::GeneralizedBuhr => "generalized-BUHR",
        }
    }

    fn rassias(self) -> bool {
        matches!(self, Self::Buhr | Self::GeneralizedBuhr)
    }
}

impl fmt::Display for StabilityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StabilityMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown {
                kind: "stability mode",
                name: s.to_string(),
                known: Self::ALL.map(|m| m.name()).join(", "),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    /// θ for the stability constant, the solve and the weighted distance.
    pub theta: f64,
    /// Solver settings for the exact solution; θ and x₀ are overridden.
    pub solver: SolverConfig,
    pub strategy: QuadratureStrategy,
    /// Tolerated negative margin.
    pub slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertifyStatus {
    Certified,
    BoundViolated,
    ResidualExceedsEpsilon,
    ImpulseExactRequired,
    PhiVanishes,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub mode: StabilityMode,
    pub status: CertifyStatus,
    pub theta: f64,
    pub constant: f64,
    pub constant_source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub computed_constant: Option<StabilityConstant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub computed_constant_error: Option<String>,
    pub c_phi: CPhiReport,
    pub psi: f64,
    pub epsilon_required: EpsilonOutcome,
    pub epsilon_used: f64,
    pub residual_admissible: bool,
    pub bound_satisfied: bool,
    /// min over nodes of bound − |y − x| e^{−θτ}
    pub worst_margin: f64,
    pub worst_margin_tau: f64,
    pub max_weighted_distance: f64,
    pub profile: ResidualProfile,
    pub solve: SolveTrace,
}

fn buh_comparison() -> Comparison {
    Comparison::Constant(1.0)
}

/// Check the stability estimate for the approximate solution y: find the
/// admissible ε from its residuals, solve the problem from x(0) = y(0), and
/// compare `|y − x| e^{−θτ}` with the bound of the mode at every node.
///
/// Bounds: BUH and generalized BUH use `ε·C` with C the constant for φ ≡ 1,
/// ψ = 1 (so the Rassias constant is doubled); BUHR uses `ε·C·(ψ + φ(τ))`;
/// generalized BUHR uses `C·(ψ + φ(τ))` for y with residuals below φ and ψ.
pub fn certify(
    problem: &ImpulsiveProblem,
    hyp: Option<&HypothesisData>,
    y: &PiecewiseFunction,
    config: &StabilityConfig,
    mode: StabilityMode,
    opts: &CertifyOptions,
) -> Result<StabilityReport> {
    config.validate()?;
    let t_end = problem.partition.t_end();
    let (phi, psi) = if mode.rassias() {
        (config.phi.clone(), config.psi)
    } else {
        (buh_comparison(), 1.0)
    };
    let c_phi = match (mode.rassias(), config.c_phi) {
        (true, CPhi::Given(c)) => CPhiReport {
            c_phi: c,
            analytic: None,
            grid_ratio: f64::NAN,
            consistent: true,
        },
        _ => c_phi_for(&phi, problem.alpha, t_end, y.density())?,
    };

    let computed = match hyp {
        Some(h) => {
            let inputs = BoundInputs::new(&problem.partition, h, problem.alpha, problem.beta);
            Some(stability_constant(&inputs, opts.theta, c_phi.c_phi, psi))
        }
        None => None,
    };
    let doubling = if mode.rassias() { 1.0 } else { 2.0 };
    let (constant, constant_source) = match (config.constant, &computed) {
        (Some(c), _) => (c, "declared"),
        (None, Some(Ok(c))) => (doubling * c.value, "computed"),
        (None, Some(Err(e))) => return Err(e.clone()),
        (None, None) => {
            return Err(Error::domain("certify", "need hypothesis constants or a declared stability constant"));
        }
    };
    let (computed_constant, computed_constant_error) = match computed {
        Some(Ok(c)) => (Some(c), None),
        Some(Err(e)) => (None, Some(e.to_string())),
        None => (None, None),
    };

    let profile = residual_profile(problem, y, opts.strategy)?;
    let epsilon_required = profile.epsilon_for(&phi, psi)?;
    let generalized = mode == StabilityMode::GeneralizedBuhr;
    let (epsilon_used, mut status, residual_admissible) = match epsilon_required {
        EpsilonOutcome::Value { epsilon } => {
            let used = if generalized { 1.0 } else { config.epsilon.unwrap_or(epsilon) };
            let ok = epsilon <= used * (1.0 + 1e-12);
            let status = if ok { CertifyStatus::Certified } else { CertifyStatus::ResidualExceedsEpsilon };
            (used, status, ok)
        }
        EpsilonOutcome::ImpulseExactRequired { .. } => {
            let used = if generalized { 1.0 } else { config.epsilon.unwrap_or(0.0) };
            (used, CertifyStatus::ImpulseExactRequired, false)
        }
        EpsilonOutcome::PhiVanishes { .. } => (config.epsilon.unwrap_or(0.0), CertifyStatus::PhiVanishes, false),
    };

    let mut solver = opts.solver.clone();
    solver.theta = crate::fractional::BieleckiWeight::new(opts.theta)?;
    solver.grid_density = y.density();
    let mut exact_problem = problem.clone();
    exact_problem.x0 = y.eval(0.0)?;
    let (x, solve) = solve_picard(&exact_problem, &solver)?;

    let scale = if generalized { constant } else { epsilon_used * constant };
    let mut worst_margin = f64::INFINITY;
    let mut worst_margin_tau = 0.0;
    let mut max_weighted_distance = 0.0f64;
    for ((_, _, t, yv), (_, _, _, xv)) in y.nodes().zip(x.nodes()) {
        let distance = (yv - xv).abs() * (-opts.theta * t).exp();
        max_weighted_distance = max_weighted_distance.max(distance);
        let bound = if mode.rassias() { scale * (psi + phi.eval(t)?) } else { scale };
        if bound - distance < worst_margin {
            worst_margin = bound - distance;
            worst_margin_tau = t;
        }
    }
    let bound_satisfied = worst_margin >= -opts.slack;
    if status == CertifyStatus::Certified && !bound_satisfied {
        status = CertifyStatus::BoundViolated;
    }
    Ok(StabilityReport {
        mode,
        status,
        theta: opts.theta,
        constant,
        constant_source,
        computed_constant,
        computed_constant_error,
        c_phi,
        psi,
        epsilon_required,
        epsilon_used,
        residual_admissible,
        bound_satisfied,
        worst_margin,
        worst_margin_tau,
        max_weighted_distance,
        profile,
        solve,
    })
}
