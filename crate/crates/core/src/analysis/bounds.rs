//! Contraction constants of T in the Bielecki norm and the θ beyond which
//! they drop below 1.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::{HypothesisData, Partition};
use crate::registry::Registry;
use crate::special::{gamma_unchecked, weighted_power_integral, PowerIntegralArgs};

/// Hölder bound on the exponentially weighted kernel:
/// `∫_a^τ (τ−s)^{q−1} e^{θs} ds ≤ len^{q−1/2} / ((2q−1)^{1/2} (2θ)^{1/2}) · e^{θτ}`.
/// Returns the factor in front of `e^{θτ}`.
pub fn holder_kernel_bound(order: f64, theta: f64, interval_length: f64) -> Result<f64> {
    if !(order > 0.5) || !order.is_finite() {
        return Err(Error::domain("holder_kernel_bound", format!("order {order} must exceed 1/2")));
    }
    if !(theta > 0.0) || !(interval_length >= 0.0) {
        return Err(Error::domain(
            "holder_kernel_bound",
            format!("need theta > 0 and length >= 0, got theta = {theta}, length = {interval_length}"),
        ));
    }
    Ok(kernel_factor(order, interval_length) / (2.0 * theta).sqrt())
}

/// `len^{q−1/2} / (2q−1)^{1/2}`, the θ-free part of the Hölder bound.
fn kernel_factor(order: f64, len: f64) -> f64 {
    len.powf(order - 0.5) / (2.0 * order - 1.0).sqrt()
}

/// Hölder exponents for the weighted estimate: `p` pairs with α and γ_f,
/// `p1` with β and γ; the conjugates satisfy `1/p + 1/p* = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderExponents {
    pub p: f64,
    pub p_conj: f64,
    pub p1: f64,
    pub p1_conj: f64,
}

fn conj(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Largest admissible exponent for kernel order `q` and weight `gamma`,
/// capped at 10.
fn max_exponent(q: f64, gamma: f64) -> f64 {
    let mut cap: f64 = 10.0;
    cap = cap.min(1.0 / (1.0 - q));
    if gamma + q < 1.0 {
        cap = cap.min(1.0 / (1.0 - q - gamma));
    }
    if gamma < 0.0 {
        cap = cap.min(-1.0 / gamma);
    }
    cap
}

impl HolderExponents {
    pub fn new(p: f64, p1: f64) -> Result<Self> {
        if !(p > 1.0) || !(p1 > 1.0) {
            return Err(Error::domain("HolderExponents", format!("need p > 1 and p1 > 1, got {p}, {p1}")));
        }
        Ok(Self {
            p,
            p_conj: conj(p),
            p1,
            p1_conj: conj(p1),
        })
    }

    /// 90% of the way from 1 to the largest admissible exponent, but no more
    /// than 2. Exponents near 1 make `(θp*)^{1/p*}` grow only like θ^{0}.
    pub fn default_for(alpha: f64, beta: f64, gamma_f: f64, gamma_imp: f64) -> Result<Self> {
        let pick = |q: f64, g: f64| (1.0 + 0.9 * (max_exponent(q, g) - 1.0)).min(2.0);
        let e = Self::new(pick(alpha, gamma_f), pick(beta, gamma_imp))?;
        e.validate(alpha, beta, gamma_f, gamma_imp)?;
        Ok(e)
    }

    /// Check the four admissibility inequalities; the error names the first
    /// that fails.
    pub fn validate(&self, alpha: f64, beta: f64, gamma_f: f64, gamma_imp: f64) -> Result<()> {
        let checks = [
            (self.p * (alpha - 1.0) + 1.0 > 0.0, "p(α−1)+1 > 0"),
            (self.p * gamma_f > self.p * (1.0 - alpha) - 1.0, "p·γ_f > p(1−α)−1"),
            (self.p * gamma_f + 1.0 > 0.0, "p·γ_f+1 > 0"),
            (self.p1 * (beta - 1.0) + 1.0 > 0.0, "p1(β−1)+1 > 0"),
            (self.p1 * gamma_imp > self.p1 * (1.0 - beta) - 1.0, "p1·γ > p1(1−β)−1"),
            (self.p1 * gamma_imp + 1.0 > 0.0, "p1·γ+1 > 0"),
        ];
        for (ok, what) in checks {
            if !ok {
                return Err(Error::domain("HolderExponents", format!("{what} fails for p = {}, p1 = {}", self.p, self.p1)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedBounds {
    pub omega1: f64,
    pub omega2: f64,
}

/// `ω = (∫_0^T (T−s)^{p(q−1)} s^{pγ} ds)^{1/p}`.
pub fn omega(q: f64, gamma: f64, p: f64, t_end: f64) -> Result<f64> {
    let v = weighted_power_integral(PowerIntegralArgs {
        alpha_exp: 1.0,
        p,
        beta_exp: q,
        gamma_exp: gamma + 1.0,
        tau: t_end,
    })?;
    Ok(v.powf(1.0 / p))
}

/// The three contributions to the constant on one index i.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalTerms {
    pub index: usize,
    /// From I^β hᵢ on (τᵢ, σᵢ]; zero for i = 0 and empty impulse intervals.
    pub impulse: f64,
    /// From the x-dependence of f through I^α.
    pub kernel: f64,
    /// From the Volterra argument of f.
    pub volterra: f64,
}

impl IntervalTerms {
    pub fn total(&self) -> f64 {
        self.impulse + self.kernel + self.volterra
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub variant: String,
    pub constant: f64,
    pub theta_used: f64,
    pub theta_threshold: f64,
    pub per_interval_terms: Vec<IntervalTerms>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponents: Option<HolderExponents>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<WeightedBounds>,
}

/// Everything a contraction bound depends on apart from θ.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundInputs {
    pub partition: Partition,
    pub hyp: HypothesisData,
    pub alpha: f64,
    pub beta: f64,
    /// Used by the weighted bound; defaults are derived when absent.
    pub exponents: Option<HolderExponents>,
}

impl BoundInputs {
    pub fn new(partition: &Partition, hyp: &HypothesisData, alpha: f64, beta: f64) -> Self {
        Self {
            partition: partition.clone(),
            hyp: hyp.clone(),
            alpha,
            beta,
            exponents: None,
        }
    }

    fn impulse_length(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.partition.sigma(i) - self.partition.tau(i)
        }
    }

    fn differential_length(&self, i: usize) -> f64 {
        self.partition.tau(i + 1) - self.partition.sigma(i)
    }

    fn l_h(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.hyp.l_h[i - 1]
        }
    }

    fn check_basic(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.5 && v < 1.0) {
                return Err(Error::domain("contraction_constant_basic", format!("{name} = {v} not in (1/2, 1)")));
            }
        }
        self.hyp.validate(self.partition.m(), self.alpha, self.beta)
    }
}

/// A contraction estimate `L(θ)` for T in the Bielecki norm.
pub trait ContractionBound: Send + Sync {
    fn description(&self) -> &'static str;
    fn evaluate(&self, inputs: &BoundInputs, theta: f64) -> Result<AnalysisReport>;
    /// Smallest θ with `L(θ) < 1` (up to the method's resolution).
    fn threshold(&self, inputs: &BoundInputs) -> Result<f64>;
}

/// Bounds in which every term scales like `(2θ)^{−1/2}`; the closure returns
/// the terms at θ = 1/2.
struct SqrtScaling {
    name: &'static str,
    description: &'static str,
    terms: fn(&BoundInputs, usize) -> IntervalTerms,
}

impl SqrtScaling {
    fn terms_at(&self, inputs: &BoundInputs, theta: f64) -> Vec<IntervalTerms> {
        let s = 1.0 / (2.0 * theta).sqrt();
        (0..=inputs.partition.m())
            .map(|i| {
                let t = (self.terms)(inputs, i);
                IntervalTerms {
                    index: i,
                    impulse: t.impulse * s,
                    kernel: t.kernel * s,
                    volterra: t.volterra * s,
                }
            })
            .collect()
    }

    fn amplitude(&self, inputs: &BoundInputs) -> f64 {
        self.terms_at(inputs, 0.5).iter().map(IntervalTerms::total).fold(0.0, f64::max)
    }
}

impl ContractionBound for SqrtScaling {
    fn description(&self) -> &'static str {
        self.description
    }

    fn evaluate(&self, inputs: &BoundInputs, theta: f64) -> Result<AnalysisReport> {
        inputs.check_basic()?;
        if !(theta > 0.0) {
            return Err(Error::domain("contraction_constant", format!("theta = {theta} must be positive")));
        }
        let terms = self.terms_at(inputs, theta);
        let amplitude = self.amplitude(inputs);
        Ok(AnalysisReport {
            variant: self.name.to_string(),
            constant: terms.iter().map(IntervalTerms::total).fold(0.0, f64::max),
            theta_used: theta,
            theta_threshold: amplitude * amplitude / 2.0,
            per_interval_terms: terms,
            exponents: None,
            bounds: None,
        })
    }

    fn threshold(&self, inputs: &BoundInputs) -> Result<f64> {
        inputs.check_basic()?;
        let a = self.amplitude(inputs);
        Ok(a * a / 2.0)
    }
}

fn impulse_term(inputs: &BoundInputs, i: usize) -> f64 {
    let len = inputs.impulse_length(i);
    if len > 0.0 {
        inputs.l_h(i) / gamma_unchecked(inputs.beta) * kernel_factor(inputs.beta, len)
    } else {
        0.0
    }
}

fn kernel_term(inputs: &BoundInputs, i: usize) -> f64 {
    inputs.hyp.m_f / gamma_unchecked(inputs.alpha) * kernel_factor(inputs.alpha, inputs.differential_length(i))
}

/// `N_f K_h / Γ(α+1) · len^{α+1/2} / (2α+1)^{1/2}`: the Volterra argument
/// contributes `I^{α+1}` of the weighted difference.
fn volterra_term(inputs: &BoundInputs, i: usize) -> f64 {
    let a = inputs.alpha;
    inputs.hyp.n_f * inputs.hyp.k_h / gamma_unchecked(a + 1.0) * kernel_factor(a + 1.0, inputs.differential_length(i))
}

/// The same term with exponent α and `(2α)^{1/2}`.
fn volterra_term_short(inputs: &BoundInputs, i: usize, lipschitz: f64) -> f64 {
    let a = inputs.alpha;
    let len = inputs.differential_length(i);
    inputs.hyp.n_f * lipschitz / gamma_unchecked(a + 1.0) * len.powf(a) / (2.0 * a).sqrt()
}

fn basic_terms(inputs: &BoundInputs, i: usize) -> IntervalTerms {
    IntervalTerms {
        index: i,
        impulse: impulse_term(inputs, i),
        kernel: kernel_term(inputs, i),
        volterra: volterra_term(inputs, i),
    }
}

fn display_terms(inputs: &BoundInputs, i: usize) -> IntervalTerms {
    IntervalTerms {
        volterra: volterra_term_short(inputs, i, inputs.hyp.k_h),
        ..basic_terms(inputs, i)
    }
}

fn worked_example_terms(inputs: &BoundInputs, i: usize) -> IntervalTerms {
    let volterra = if i == 0 {
        volterra_term_short(inputs, i, inputs.hyp.k_h)
    } else {
        let a = inputs.alpha;
        inputs.hyp.n_f * inputs.l_h(i) / gamma_unchecked(a + 1.0) * kernel_factor(a + 1.0, inputs.differential_length(i))
    };
    IntervalTerms {
        volterra,
        ..basic_terms(inputs, i)
    }
}

/// L(θ) from the term-by-term estimate of ‖Tx − Ty‖ on each interval.
pub fn contraction_constant_basic(partition: &Partition, hyp: &HypothesisData, alpha: f64, beta: f64, theta: f64) -> Result<AnalysisReport> {
    BASIC.evaluate(&BoundInputs::new(partition, hyp, alpha, beta), theta)
}

/// θ* = A²/2 with A the basic constant at θ = 1/2.
pub fn theta_threshold_basic(partition: &Partition, hyp: &HypothesisData, alpha: f64, beta: f64) -> Result<f64> {
    BASIC.threshold(&BoundInputs::new(partition, hyp, alpha, beta))
}

const BASIC: SqrtScaling = SqrtScaling {
    name: "basic",
    description: "Volterra term N_f K_h len^{α+1/2}/(Γ(α+1)(2α+1)^{1/2}(2θ)^{1/2})",
    terms: basic_terms,
};

const DISPLAY: SqrtScaling = SqrtScaling {
    name: "display",
    description: "Volterra term N_f K_h len^α/(Γ(α+1)(2α)^{1/2}(2θ)^{1/2})",
    terms: display_terms,
};

const WORKED_EXAMPLE: SqrtScaling = SqrtScaling {
    name: "worked-example",
    description: "Volterra term with K_h, len^α, (2α)^{1/2} on the first interval and L_{hᵢ}, len^{α+1/2}, (2α+1)^{1/2} after impulses",
    terms: worked_example_terms,
};

/// The weighted estimate L₁(θ), valid for all α, β ∈ (0, 1) under the
/// power-weighted Lipschitz hypotheses.
pub struct Weighted;

fn weighted_parts(inputs: &BoundInputs) -> Result<(HolderExponents, WeightedBounds)> {
    let (a, b) = (inputs.alpha, inputs.beta);
    for (name, v) in [("alpha", a), ("beta", b)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::domain("contraction_constant_weighted", format!("{name} = {v} not in (0, 1)")));
        }
    }
    let hyp = inputs.hyp.as_weighted();
    hyp.validate(inputs.partition.m(), a, b)?;
    let (gf, gi) = hyp.gammas();
    let ex = match inputs.exponents {
        Some(e) => {
            e.validate(a, b, gf, gi)?;
            e
        }
        None => HolderExponents::default_for(a, b, gf, gi)?,
    };
    let t_end = inputs.partition.t_end();
    let bounds = WeightedBounds {
        omega1: omega(a, gf, ex.p, t_end)?,
        omega2: omega(b, gi, ex.p1, t_end)?,
    };
    Ok((ex, bounds))
}

fn weighted_terms(inputs: &BoundInputs, ex: &HolderExponents, wb: &WeightedBounds, theta: f64) -> Vec<IntervalTerms> {
    let (a, b) = (inputs.alpha, inputs.beta);
    let imp_scale = wb.omega2 / (gamma_unchecked(b) * (theta * ex.p1_conj).powf(1.0 / ex.p1_conj));
    let ker_scale = wb.omega1 / (gamma_unchecked(a) * (theta * ex.p_conj).powf(1.0 / ex.p_conj));
    let s = 1.0 / (2.0 * theta).sqrt();
    (0..=inputs.partition.m())
        .map(|i| IntervalTerms {
            index: i,
            impulse: if inputs.impulse_length(i) > 0.0 { inputs.l_h(i) * imp_scale } else { 0.0 },
            kernel: inputs.hyp.m_f * ker_scale,
            volterra: volterra_term(inputs, i) * s,
        })
        .collect()
}

impl Weighted {
    fn value(inputs: &BoundInputs, ex: &HolderExponents, wb: &WeightedBounds, theta: f64) -> f64 {
        weighted_terms(inputs, ex, wb, theta).iter().map(IntervalTerms::total).fold(0.0, f64::max)
    }

    /// Per-interval terms at θ; shared with the stability constant.
    pub fn terms(inputs: &BoundInputs, theta: f64) -> Result<Vec<IntervalTerms>> {
        let (ex, wb) = weighted_parts(inputs)?;
        Ok(weighted_terms(inputs, &ex, &wb, theta))
    }
}

pub const THETA_BRACKET: (f64, f64) = (1e-6, 1e12);
const THETA_TARGET: f64 = 1.0 - 1e-9;

impl ContractionBound for Weighted {
    fn description(&self) -> &'static str {
        "Hölder estimate with Beta-function bounds ω₁, ω₂ for power-weighted Lipschitz constants"
    }

    fn evaluate(&self, inputs: &BoundInputs, theta: f64) -> Result<AnalysisReport> {
        if !(theta > 0.0) {
            return Err(Error::domain("contraction_constant_weighted", format!("theta = {theta} must be positive")));
        }
        let (ex, wb) = weighted_parts(inputs)?;
        let terms = weighted_terms(inputs, &ex, &wb, theta);
        Ok(AnalysisReport {
            variant: "weighted".into(),
            constant: terms.iter().map(IntervalTerms::total).fold(0.0, f64::max),
            theta_used: theta,
            theta_threshold: self.threshold(inputs)?,
            per_interval_terms: terms,
            exponents: Some(ex),
            bounds: Some(wb),
        })
    }

    /// Bisection in log θ for `L₁(θ) = 1 − 1e−9`; every term decreases in θ.
    fn threshold(&self, inputs: &BoundInputs) -> Result<f64> {
        let (ex, wb) = weighted_parts(inputs)?;
        let l1 = |t: f64| Self::value(inputs, &ex, &wb, t);
        let (mut lo, mut hi) = THETA_BRACKET;
        if l1(1.0) == 0.0 {
            return Ok(0.0);
        }
        if l1(lo) <= THETA_TARGET {
            return Ok(lo);
        }
        let top = l1(hi);
        if top > THETA_TARGET {
            return Err(Error::NoThreshold { upper: hi, value: top });
        }
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if l1(mid) > THETA_TARGET {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi / lo - 1.0 < 1e-14 {
                break;
            }
        }
        Ok(hi)
    }
}

pub fn contraction_constant_weighted(
    partition: &Partition,
    hyp: &HypothesisData,
    alpha: f64,
    beta: f64,
    theta: f64,
    exponents: Option<HolderExponents>,
) -> Result<AnalysisReport> {
    let inputs = BoundInputs {
        exponents,
        ..BoundInputs::new(partition, hyp, alpha, beta)
    };
    Weighted.evaluate(&inputs, theta)
}

pub fn theta_threshold_weighted(
    partition: &Partition,
    hyp: &HypothesisData,
    alpha: f64,
    beta: f64,
    exponents: Option<HolderExponents>,
) -> Result<f64> {
    let inputs = BoundInputs {
        exponents,
        ..BoundInputs::new(partition, hyp, alpha, beta)
    };
    Weighted.threshold(&inputs)
}

pub fn bound_registry() -> Registry<dyn ContractionBound> {
    let mut r: Registry<dyn ContractionBound> = Registry::new("contraction bound");
    r.register("basic", Arc::new(BASIC));
    r.register("display", Arc::new(DISPLAY));
    r.register("worked-example", Arc::new(WORKED_EXAMPLE));
    r.register("weighted", Arc::new(Weighted));
    r
}

/// θ for the solver: 1.05 × the threshold of the bound that applies
/// (basic when α, β > 1/2, weighted otherwise), or 1 without hypotheses.
/// The second value explains a fallback.
pub fn default_theta(partition: &Partition, hyp: Option<&HypothesisData>, alpha: f64, beta: f64) -> (f64, Option<String>) {
    let Some(hyp) = hyp else {
        return (1.0, Some("no hypothesis constants given; using theta = 1".into()));
    };
    let inputs = BoundInputs::new(partition, hyp, alpha, beta);
    let threshold = if alpha > 0.5 && beta > 0.5 {
        BASIC.threshold(&inputs)
    } else {
        Weighted.threshold(&inputs)
    };
    match threshold {
        Ok(t) if t > 0.0 => (1.05 * t, None),
        Ok(_) => (1.0, None),
        Err(e) => (1.0, Some(format!("no theta threshold ({e}); using theta = 1"))),
    }
}
