//! Partition, problem data, hypothesis constants and sampled Lipschitz
//! estimates.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{Expression, Vars};

/// `0 = τ₀ = σ₀ < τ₁ ≤ σ₁ < τ₂ ≤ … ≤ σ_m < τ_{m+1} = T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    /// τ₁ … τ_{m+1}
    pub tau_points: Vec<f64>,
    /// σ₁ … σ_m
    pub sigma_points: Vec<f64>,
}

/// Which half-open subinterval a time belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "index", rename_all = "lowercase")]
pub enum Branch {
    /// `(σᵢ, τᵢ₊₁]`, i = 0..m
    Differential(usize),
    /// `(τᵢ, σᵢ]`, i = 1..m
    Impulse(usize),
}

impl Branch {
    pub fn index(self) -> usize {
        match self {
            Branch::Differential(i) | Branch::Impulse(i) => i,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Branch::Differential(_) => "differential",
            Branch::Impulse(_) => "impulse",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} interval {}", self.tag(), self.index())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub branch: Branch,
    pub start: f64,
    pub end: f64,
}

fn subscript(i: usize) -> String {
    const DIGITS: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    i.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap() as usize])
        .collect()
}

/// Check the ordering chain; the error names the first relation that fails.
pub fn validate_partition(p: &Partition) -> std::result::Result<(), String> {
    let m = p.sigma_points.len();
    if p.tau_points.len() != m + 1 {
        return Err(format!(
            "expected {} tau points for {} sigma points, got {}",
            m + 1,
            m,
            p.tau_points.len()
        ));
    }
    if let Some(v) = p.tau_points.iter().chain(&p.sigma_points).find(|v| !v.is_finite()) {
        return Err(format!("non-finite breakpoint {v}"));
    }
    if !(p.tau_points[0] > 0.0) {
        return Err("0 < τ₁ fails".into());
    }
    for i in 1..=m {
        let (t, s, next) = (p.tau_points[i - 1], p.sigma_points[i - 1], p.tau_points[i]);
        if !(t <= s) {
            return Err(format!("τ{0} ≤ σ{0} fails", subscript(i)));
        }
        if !(s < next) {
            return Err(format!("σ{} < τ{} fails", subscript(i), subscript(i + 1)));
        }
    }
    Ok(())
}

impl Partition {
    pub fn new(tau_points: Vec<f64>, sigma_points: Vec<f64>) -> Result<Self> {
        let p = Self {
            tau_points,
            sigma_points,
        };
        validate_partition(&p).map_err(Error::Partition)?;
        Ok(p)
    }

    /// Single differential interval `(0, T]`.
    pub fn single(t_end: f64) -> Result<Self> {
        Self::new(vec![t_end], vec![])
    }

    pub fn m(&self) -> usize {
        self.sigma_points.len()
    }

    pub fn t_end(&self) -> f64 {
        self.tau_points[self.m()]
    }

    /// τᵢ for i = 0..=m+1, with τ₀ = 0.
    pub fn tau(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.tau_points[i - 1]
        }
    }

    /// σᵢ for i = 0..=m, with σ₀ = 0.
    pub fn sigma(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.sigma_points[i - 1]
        }
    }

    pub fn classify(&self, tau: f64) -> Result<Branch> {
        if !(tau > 0.0) || tau > self.t_end() {
            return Err(Error::domain(
                "classify",
                format!("tau = {tau} outside (0, {}]", self.t_end()),
            ));
        }
        for i in 0..=self.m() {
            if i >= 1 && tau <= self.sigma(i) {
                return Ok(Branch::Impulse(i));
            }
            if tau <= self.tau(i + 1) {
                return Ok(Branch::Differential(i));
            }
        }
        unreachable!("tau <= T was checked")
    }

    /// Subintervals in time order; empty impulse intervals are left out.
    pub fn intervals(&self) -> Vec<Interval> {
        let mut out = Vec::with_capacity(2 * self.m() + 1);
        for i in 0..=self.m() {
            if i >= 1 && self.sigma(i) > self.tau(i) {
                out.push(Interval {
                    branch: Branch::Impulse(i),
                    start: self.tau(i),
                    end: self.sigma(i),
                });
            }
            out.push(Interval {
                branch: Branch::Differential(i),
                start: self.sigma(i),
                end: self.tau(i + 1),
            });
        }
        out
    }
}

type NativeFn = dyn Fn(f64, f64, f64) -> f64 + Send + Sync;

#[derive(Clone)]
enum FuncKind {
    Native(Arc<NativeFn>),
    Expr(Arc<Expression>),
}

/// A scalar map `(τ, x, v) ↦ ℝ`. Maps of fewer arguments ignore the rest.
/// `source` is what a config file would contain to reproduce it.
#[derive(Clone)]
pub struct Func {
    source: String,
    kind: FuncKind,
}

impl Func {
    pub fn native(source: impl Into<String>, f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            source: source.into(),
            kind: FuncKind::Native(Arc::new(f)),
        }
    }

    pub fn expression(expr: Expression) -> Self {
        Self {
            source: expr.source().to_string(),
            kind: FuncKind::Expr(Arc::new(expr)),
        }
    }

    pub fn parse(source: &str) -> Result<Self> {
        Ok(Self::expression(Expression::parse(source)?))
    }

    pub fn constant(c: f64) -> Self {
        Self::native(format!("{c:?}"), move |_, _, _| c)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Evaluate; non-finite results are errors.
    pub fn eval(&self, tau: f64, x: f64, v: f64) -> std::result::Result<f64, String> {
        let value = match &self.kind {
            FuncKind::Native(f) => f(tau, x, v),
            FuncKind::Expr(e) => e.eval(&Vars { tau, x, v }).map_err(|e| e.to_string())?,
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(format!("non-finite value {value}"))
        }
    }

    pub(crate) fn eval_at(&self, branch: Branch, tau: f64, x: f64, v: f64) -> Result<f64> {
        self.eval(tau, x, v).map_err(|detail| Error::Evaluation {
            branch: branch.to_string(),
            tau,
            detail: format!("{}: {detail}", self.source),
        })
    }
}

impl fmt::Debug for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Func({})", self.source)
    }
}

impl PartialEq for Func {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

/// ᶜD^α x = f(τ, x, ∫_{σᵢ}^τ h) on differential intervals,
/// x = I^β_{τᵢ,τ} hᵢ(τ, x) on impulse intervals, x(0) = x₀.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulsiveProblem {
    pub alpha: f64,
    pub beta: f64,
    pub partition: Partition,
    pub f: Func,
    pub h: Func,
    pub impulse_maps: Vec<Func>,
    pub x0: f64,
}

impl ImpulsiveProblem {
    pub fn new(
        alpha: f64,
        beta: f64,
        partition: Partition,
        f: Func,
        h: Func,
        impulse_maps: Vec<Func>,
        x0: f64,
    ) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            partition,
            f,
            h,
            impulse_maps,
            x0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::domain("ImpulsiveProblem", format!("{name} = {v} not in (0, 1)")));
            }
        }
        if !self.x0.is_finite() {
            return Err(Error::domain("ImpulsiveProblem", "x0 must be finite"));
        }
        validate_partition(&self.partition).map_err(Error::Partition)?;
        if self.impulse_maps.len() != self.partition.m() {
            return Err(Error::Structure(format!(
                "{} impulse maps for m = {}",
                self.impulse_maps.len(),
                self.partition.m()
            )));
        }
        Ok(())
    }

    /// hᵢ for i = 1..=m.
    pub fn impulse_map(&self, i: usize) -> &Func {
        &self.impulse_maps[i - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum HypothesisVariant {
    Basic,
    /// Lipschitz constants carry the weights τ^{γ_f} (for f) and τ^{γ} (for hᵢ).
    Weighted { gamma_f: f64, gamma_imp: f64 },
}

/// Lipschitz constants: |f(τ,x,v) − f(τ,x̄,v̄)| ≤ M_f|x−x̄| + N_f|v−v̄|,
/// |h(τ,x) − h(τ,x̄)| ≤ K_h|x−x̄|, |hᵢ(τ,x) − hᵢ(τ,x̄)| ≤ L_{hᵢ}|x−x̄|.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisData {
    pub m_f: f64,
    pub n_f: f64,
    pub k_h: f64,
    pub l_h: Vec<f64>,
    #[serde(flatten)]
    pub variant: HypothesisVariant,
}

impl HypothesisData {
    pub fn basic(m_f: f64, n_f: f64, k_h: f64, l_h: Vec<f64>) -> Self {
        Self {
            m_f,
            n_f,
            k_h,
            l_h,
            variant: HypothesisVariant::Basic,
        }
    }

    pub fn weighted(m_f: f64, n_f: f64, k_h: f64, l_h: Vec<f64>, gamma_f: f64, gamma_imp: f64) -> Self {
        Self {
            m_f,
            n_f,
            k_h,
            l_h,
            variant: HypothesisVariant::Weighted { gamma_f, gamma_imp },
        }
    }

    /// Weight exponents, zero for the basic variant.
    pub fn gammas(&self) -> (f64, f64) {
        match self.variant {
            HypothesisVariant::Basic => (0.0, 0.0),
            HypothesisVariant::Weighted { gamma_f, gamma_imp } => (gamma_f, gamma_imp),
        }
    }

    /// The same constants as a weighted hypothesis.
    pub fn as_weighted(&self) -> Self {
        let (gf, gi) = self.gammas();
        Self::weighted(self.m_f, self.n_f, self.k_h, self.l_h.clone(), gf, gi)
    }

    pub fn validate(&self, m: usize, alpha: f64, beta: f64) -> Result<()> {
        let all = [self.m_f, self.n_f, self.k_h].into_iter().chain(self.l_h.iter().copied());
        for c in all {
            if !(c >= 0.0) || !c.is_finite() {
                return Err(Error::domain("HypothesisData", format!("constant {c} must be finite and >= 0")));
            }
        }
        if self.l_h.len() != m {
            return Err(Error::Structure(format!("{} impulse constants for m = {m}", self.l_h.len())));
        }
        if let HypothesisVariant::Weighted { gamma_f, gamma_imp } = self.variant {
            if !(gamma_f > -alpha) {
                return Err(Error::domain("HypothesisData", format!("gamma_f = {gamma_f} must exceed -alpha = {}", -alpha)));
            }
            if !(gamma_imp > -beta) {
                return Err(Error::domain("HypothesisData", format!("gamma = {gamma_imp} must exceed -beta = {}", -beta)));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            m_f: self.m_f * factor,
            n_f: self.n_f * factor,
            k_h: self.k_h * factor,
            l_h: self.l_h.iter().map(|c| c * factor).collect(),
            variant: self.variant,
        }
    }
}

/// The comparison function φ of the Rassias-type inequalities.
#[derive(Debug, Clone, PartialEq)]
pub enum Comparison {
    Constant(f64),
    /// `scale · E_order(rate · τ^order)`
    MittagLeffler { scale: f64, order: f64, rate: f64 },
    Function(Func),
}

impl Comparison {
    pub fn eval(&self, tau: f64) -> Result<f64> {
        match self {
            Comparison::Constant(c) => Ok(*c),
            Comparison::MittagLeffler { scale, order, rate } => {
                Ok(scale * crate::special::mittag_leffler(*order, rate * tau.powf(*order))?)
            }
            Comparison::Function(f) => f.eval(tau, 0.0, 0.0).map_err(|detail| Error::Evaluation {
                branch: "comparison function".into(),
                tau,
                detail,
            }),
        }
    }

    /// c_φ with `I^α_{0,τ} φ ≤ c_φ φ(τ)` on `[0, T]` where it follows in
    /// closed form: `T^α/Γ(1+α)` for constants, `1/rate` for a Mittag-Leffler
    /// function of the same order, since `I^α E_α(λτ^α) = (E_α(λτ^α) − 1)/λ`.
    pub fn analytic_c_phi(&self, alpha: f64, t_end: f64) -> Option<f64> {
        match self {
            Comparison::Constant(c) if *c > 0.0 => Some(t_end.powf(alpha) / crate::special::gamma_unchecked(1.0 + alpha)),
            Comparison::MittagLeffler { scale, order, rate }
                if *scale > 0.0 && *rate > 0.0 && (order - alpha).abs() <= 1e-12 =>
            {
                Some(1.0 / rate)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CPhi {
    Given(f64),
    Compute,
}

/// ε, ψ and φ of the Ulam-type inequalities, plus an optional declared
/// stability constant that replaces the computed one.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityConfig {
    /// When absent the smallest admissible ε is used.
    pub epsilon: Option<f64>,
    pub psi: f64,
    pub phi: Comparison,
    pub c_phi: CPhi,
    pub constant: Option<f64>,
}

impl StabilityConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(e) = self.epsilon {
            if !(e > 0.0) || !e.is_finite() {
                return Err(Error::domain("StabilityConfig", format!("epsilon = {e} must be positive")));
            }
        }
        if !(self.psi >= 0.0) || !self.psi.is_finite() {
            return Err(Error::domain("StabilityConfig", format!("psi = {} must be >= 0", self.psi)));
        }
        if let CPhi::Given(c) = self.c_phi {
            if !(c > 0.0) {
                return Err(Error::domain("StabilityConfig", format!("c_phi = {c} must be positive")));
            }
        }
        if let Some(c) = self.constant {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::domain("StabilityConfig", format!("constant = {c} must be positive")));
            }
        }
        Ok(())
    }
}

/// Sampling box and budget for [`estimate_lipschitz`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    /// x, x̄, v, v̄ are drawn from `[−radius, radius]`.
    pub radius: f64,
    pub pairs: usize,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            radius: 10.0,
            pairs: 20_000,
            seed: 0x5eed,
        }
    }
}

/// Largest observed difference quotients; lower bounds on the true constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzEstimate {
    pub m_f: f64,
    pub n_f: f64,
    pub k_h: f64,
    pub l_h: Vec<f64>,
}

struct PairSampler {
    rng: ChaCha8Rng,
    radius: f64,
}

impl PairSampler {
    /// A point of the box; every other draw is cubed toward the origin, where
    /// saturating maps tend to be steepest.
    fn point(&mut self) -> f64 {
        let u: f64 = self.rng.gen_range(-1.0..=1.0);
        if self.rng.gen_bool(0.5) {
            self.radius * u
        } else {
            self.radius * u * u * u
        }
    }

    /// A second point, either independent or a small log-uniform offset.
    fn partner(&mut self, x: f64) -> f64 {
        if self.rng.gen_bool(0.5) {
            return self.point();
        }
        let step = 10f64.powf(self.rng.gen_range(-6.0..0.0)) * self.radius;
        let sign = if self.rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        (x + sign * step).clamp(-self.radius, self.radius)
    }
}

/// Difference quotient with the rounding error of the two evaluations taken
/// off the numerator, so that tiny offsets cannot overshoot the constant.
fn quotient(a: std::result::Result<f64, String>, b: std::result::Result<f64, String>, dx: f64) -> f64 {
    match (a, b) {
        (Ok(a), Ok(b)) if dx != 0.0 => {
            let noise = 8.0 * f64::EPSILON * (a.abs() + b.abs());
            ((a - b).abs() - noise).max(0.0) / dx.abs()
        }
        _ => 0.0,
    }
}

/// Sampled Lipschitz constants of f (in x and in v separately), h and each hᵢ.
/// τ ranges over `[0, T]` for f and h, over `[τᵢ, σᵢ]` for hᵢ.
pub fn estimate_lipschitz(problem: &ImpulsiveProblem, cfg: &SamplingConfig) -> LipschitzEstimate {
    let mut s = PairSampler {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        radius: cfg.radius,
    };
    let t_end = problem.partition.t_end();
    let (mut m_f, mut n_f, mut k_h) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..cfg.pairs {
        let tau = s.rng.gen_range(0.0..=t_end);
        let (x, v) = (s.point(), s.point());
        let (xb, vb) = (s.partner(x), s.partner(v));
        m_f = m_f.max(quotient(problem.f.eval(tau, x, v), problem.f.eval(tau, xb, v), x - xb));
        n_f = n_f.max(quotient(problem.f.eval(tau, x, v), problem.f.eval(tau, x, vb), v - vb));
        k_h = k_h.max(quotient(problem.h.eval(tau, x, 0.0), problem.h.eval(tau, xb, 0.0), x - xb));
    }
    let mut l_h = Vec::with_capacity(problem.partition.m());
    for i in 1..=problem.partition.m() {
        let (a, b) = (problem.partition.tau(i), problem.partition.sigma(i));
        let map = problem.impulse_map(i);
        let mut best = 0.0f64;
        if b > a {
            for _ in 0..cfg.pairs {
                let tau = s.rng.gen_range(a..=b);
                let x = s.point();
                let xb = s.partner(x);
                best = best.max(quotient(map.eval(tau, x, 0.0), map.eval(tau, xb, 0.0), x - xb));
            }
        }
        l_h.push(best);
    }
    LipschitzEstimate { m_f, n_f, k_h, l_h }
}
