//! Run configuration files.
//!
//! A config is TOML with the sections `[problem]`, `[partition]`,
//! `[functions]` and optionally `[hypothesis]`, `[solver]`, `[stability]`,
//! `[analysis]` and `[reference]` (a known solution to compare the solve
//! with). Unknown keys are rejected. Function entries are expression
//! strings over `tau`, `x`, `v` or `builtin:<name>` references.
//!
//! ```toml
//! [problem]
//! alpha = 0.5
//! beta = 0.5
//! x0 = 0.0
//!
//! [partition]
//! tau = [1.0]        # τ₁, …, τ_m, T
//! sigma = []         # σ₁, …, σ_m
//!
//! [functions]
//! f = "1"
//! h = "0"
//! impulses = []
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{CertifyOptions, HolderExponents, QuadratureStrategy, StabilityMode};
use crate::builtin;
use crate::error::{Error, Result};
use crate::fractional::{PiecewiseFunction, DEFAULT_DENSITY};
use crate::problem::{
    Branch, CPhi, Comparison, Func, HypothesisData, HypothesisVariant, ImpulsiveProblem, Partition, SamplingConfig,
    StabilityConfig,
};
use crate::solver::{InitialIterate, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    /// Chosen from the contraction threshold when absent.
    pub theta: Option<f64>,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub grid_density: f64,
    pub require_sup: bool,
    pub scheme: String,
    pub zero_initial: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            theta: None,
            tolerance: 1e-10,
            max_iterations: 200,
            grid_density: DEFAULT_DENSITY,
            require_sup: true,
            scheme: "picard".into(),
            zero_initial: false,
        }
    }
}

impl SolverSettings {
    pub fn solver_config(&self, theta: f64) -> Result<SolverConfig> {
        let mut c = SolverConfig::new(theta)?;
        c.tolerance = self.tolerance;
        c.max_iterations = self.max_iterations;
        c.grid_density = self.grid_density;
        c.require_sup = self.require_sup;
        c.scheme = self.scheme.clone();
        c.initial = if self.zero_initial { InitialIterate::Zero } else { InitialIterate::Default };
        Ok(c)
    }
}

/// The approximate solution to certify: one map of τ per interval in time
/// order (D₀, I₁, D₁, …), or a single map used on every interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate(pub Vec<Func>);

impl Candidate {
    pub fn sample(&self, partition: &Partition, density: f64) -> Result<PiecewiseFunction> {
        let m = partition.m();
        let n = self.0.len();
        if n != 1 && n != 2 * m + 1 {
            return Err(Error::Config(format!("candidate needs 1 or {} entries, got {n}", 2 * m + 1)));
        }
        PiecewiseFunction::try_from_fn(partition, density, |b, t| {
            let slot = match b {
                Branch::Differential(i) => 2 * i,
                Branch::Impulse(i) => 2 * i - 1,
            };
            let f = &self.0[if n == 1 { 0 } else { slot }];
            f.eval_at(b, t, 0.0, 0.0)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySettings {
    pub mode: StabilityMode,
    pub config: StabilityConfig,
    pub strategy: QuadratureStrategy,
    /// Without a candidate, certify uses the solver's own output.
    pub candidate: Option<Candidate>,
    pub slack: f64,
}

impl StabilitySettings {
    pub fn certify_options(&self, theta: f64, solver: SolverConfig) -> CertifyOptions {
        CertifyOptions {
            theta,
            solver,
            strategy: self.strategy,
            slack: self.slack,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSettings {
    /// Name in the contraction-bound registry.
    pub variant: String,
    pub exponents: Option<HolderExponents>,
    /// Estimate Lipschitz constants by sampling.
    pub sampling: Option<SamplingConfig>,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            variant: "basic".into(),
            exponents: None,
            sampling: None,
        }
    }
}

/// A known solution to compare the solver output with.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub solution: Candidate,
    /// Largest accepted sup-norm error.
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ImpulsiveProblem,
    pub hypothesis: Option<HypothesisData>,
    pub solver: SolverSettings,
    pub stability: Option<StabilitySettings>,
    pub analysis: AnalysisSettings,
    pub reference: Option<Reference>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: RawProblem,
    partition: RawPartition,
    functions: RawFunctions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hypothesis: Option<RawHypothesis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    solver: Option<RawSolver>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stability: Option<RawStability>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    analysis: Option<RawAnalysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference: Option<RawReference>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReference {
    solution: RawCandidate,
    #[serde(default = "reference_tolerance")]
    tolerance: f64,
}

fn reference_tolerance() -> f64 {
    1e-4
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    alpha: f64,
    beta: f64,
    #[serde(default)]
    x0: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPartition {
    tau: Vec<f64>,
    #[serde(default)]
    sigma: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunctions {
    f: String,
    #[serde(default = "zero_source")]
    h: String,
    #[serde(default)]
    impulses: Vec<String>,
}

fn zero_source() -> String {
    "0".into()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHypothesis {
    m_f: f64,
    n_f: f64,
    k_h: f64,
    #[serde(default)]
    l_h: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma_imp: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid_density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    require_sup: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scheme: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawPhi {
    Source(String),
    Constant { constant: f64 },
    MittagLeffler { mittag_leffler: RawMittagLeffler },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMittagLeffler {
    scale: f64,
    order: f64,
    #[serde(default = "one")]
    rate: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawCPhi {
    Given(f64),
    Keyword(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawCandidate {
    Single(String),
    PerInterval(Vec<String>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStability {
    mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(default)]
    psi: f64,
    phi: RawPhi,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c_phi: Option<RawCPhi>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    strategy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    candidate: Option<RawCandidate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slack: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    variant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sample_lipschitz: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sampling_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sampling_pairs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

fn config_err(key: &str, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {e}"))
}

fn func(key: &str, source: &str) -> Result<Func> {
    builtin::resolve(source).map_err(|e| config_err(key, e))
}

impl RawConfig {
    fn into_config(self) -> Result<RunConfig> {
        let sigma_len = self.partition.sigma.len();
        let partition = Partition::new(self.partition.tau, self.partition.sigma).map_err(|e| config_err("partition", e))?;
        let f = func("functions.f", &self.functions.f)?;
        let h = func("functions.h", &self.functions.h)?;
        let impulses = self
            .functions
            .impulses
            .iter()
            .enumerate()
            .map(|(i, s)| func(&format!("functions.impulses[{i}]"), s))
            .collect::<Result<Vec<_>>>()?;
        if impulses.len() != sigma_len {
            return Err(Error::Config(format!(
                "functions.impulses: {} maps for {sigma_len} impulse intervals",
                impulses.len()
            )));
        }
        let p = self.problem;
        let problem = ImpulsiveProblem::new(p.alpha, p.beta, partition, f, h, impulses, p.x0).map_err(|e| config_err("problem", e))?;

        let hypothesis = match self.hypothesis {
            None => None,
            Some(r) => {
                let hyp = match (r.gamma_f, r.gamma_imp) {
                    (None, None) => HypothesisData::basic(r.m_f, r.n_f, r.k_h, r.l_h),
                    (gf, gi) => HypothesisData::weighted(r.m_f, r.n_f, r.k_h, r.l_h, gf.unwrap_or(0.0), gi.unwrap_or(0.0)),
                };
                hyp.validate(problem.partition.m(), problem.alpha, problem.beta)
                    .map_err(|e| config_err("hypothesis", e))?;
                Some(hyp)
            }
        };

        let s = self.solver.unwrap_or_default();
        let d = SolverSettings::default();
        let solver = SolverSettings {
            theta: s.theta,
            tolerance: s.tolerance.unwrap_or(d.tolerance),
            max_iterations: s.max_iterations.unwrap_or(d.max_iterations),
            grid_density: s.grid_density.unwrap_or(d.grid_density),
            require_sup: s.require_sup.unwrap_or(d.require_sup),
            scheme: s.scheme.unwrap_or(d.scheme),
            zero_initial: match s.initial.as_deref() {
                None | Some("default") => false,
                Some("zero") => true,
                Some(other) => return Err(config_err("solver.initial", format!("'{other}' is not one of default, zero"))),
            },
        };
        solver
            .solver_config(solver.theta.unwrap_or(1.0))
            .and_then(|c| c.validate())
            .map_err(|e| config_err("solver", e))?;
        crate::solver::scheme_registry()
            .get(&solver.scheme)
            .map_err(|e| config_err("solver.scheme", e))?;

        let stability = self.stability.map(|r| r.into_settings()).transpose()?;

        let a = self.analysis.unwrap_or_default();
        let dflt = AnalysisSettings::default();
        let exponents = match (a.p, a.p1) {
            (None, None) => None,
            (Some(p), Some(p1)) => Some(HolderExponents::new(p, p1).map_err(|e| config_err("analysis", e))?),
            _ => return Err(Error::Config("analysis: give both p and p1 or neither".into())),
        };
        let sampling = if a.sample_lipschitz.unwrap_or(false) {
            let sd = SamplingConfig::default();
            Some(SamplingConfig {
                radius: a.sampling_radius.unwrap_or(sd.radius),
                pairs: a.sampling_pairs.unwrap_or(sd.pairs),
                seed: a.seed.unwrap_or(sd.seed),
            })
        } else {
            None
        };
        let analysis = AnalysisSettings {
            variant: a.variant.unwrap_or(dflt.variant),
            exponents,
            sampling,
        };
        crate::analysis::bound_registry()
            .get(&analysis.variant)
            .map_err(|e| config_err("analysis.variant", e))?;

        let reference = match self.reference {
            None => None,
            Some(r) => {
                if !(r.tolerance > 0.0) {
                    return Err(config_err("reference.tolerance", format!("{} must be positive", r.tolerance)));
                }
                Some(Reference {
                    solution: candidate("reference.solution", r.solution)?,
                    tolerance: r.tolerance,
                })
            }
        };
        let m = problem.partition.m();
        let entries = format!("need 1 or {} entries", 2 * m + 1);
        if let Some(c) = stability.as_ref().and_then(|s| s.candidate.as_ref()) {
            if !candidate_len_ok(c, m) {
                return Err(config_err("stability.candidate", &entries));
            }
        }
        if let Some(r) = &reference {
            if !candidate_len_ok(&r.solution, m) {
                return Err(config_err("reference.solution", &entries));
            }
        }

        Ok(RunConfig {
            problem,
            hypothesis,
            solver,
            stability,
            analysis,
            reference,
        })
    }
}

fn candidate(key: &str, raw: RawCandidate) -> Result<Candidate> {
    Ok(Candidate(match raw {
        RawCandidate::Single(s) => vec![func(key, &s)?],
        RawCandidate::PerInterval(v) => v
            .iter()
            .enumerate()
            .map(|(i, s)| func(&format!("{key}[{i}]"), s))
            .collect::<Result<_>>()?,
    }))
}

fn candidate_len_ok(c: &Candidate, m: usize) -> bool {
    c.0.len() == 1 || c.0.len() == 2 * m + 1
}

impl RawStability {
    fn into_settings(self) -> Result<StabilitySettings> {
        let mode: StabilityMode = self.mode.parse().map_err(|e| config_err("stability.mode", e))?;
        let phi = match self.phi {
            RawPhi::Constant { constant } => Comparison::Constant(constant),
            RawPhi::MittagLeffler { mittag_leffler: m } => Comparison::MittagLeffler {
                scale: m.scale,
                order: m.order,
                rate: m.rate,
            },
            RawPhi::Source(s) => Comparison::Function(func("stability.phi", &s)?),
        };
        let c_phi = match self.c_phi {
            None => CPhi::Compute,
            Some(RawCPhi::Given(c)) => CPhi::Given(c),
            Some(RawCPhi::Keyword(k)) if k == "compute" => CPhi::Compute,
            Some(RawCPhi::Keyword(k)) => return Err(config_err("stability.c_phi", format!("'{k}' is neither a number nor \"compute\""))),
        };
        let strategy = match self.strategy.as_deref() {
            None | Some("grid") => QuadratureStrategy::Grid,
            Some("adaptive") => QuadratureStrategy::Adaptive,
            Some(other) => return Err(config_err("stability.strategy", format!("'{other}' is not one of grid, adaptive"))),
        };
        let candidate = self.candidate.map(|c| candidate("stability.candidate", c)).transpose()?;
        let config = StabilityConfig {
            epsilon: self.epsilon,
            psi: self.psi,
            phi,
            c_phi,
            constant: self.constant,
        };
        config.validate().map_err(|e| config_err("stability", e))?;
        Ok(StabilitySettings {
            mode,
            config,
            strategy,
            candidate,
            slack: self.slack.unwrap_or(1e-9),
        })
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        raw.into_config()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Config text that parses back to this configuration.
    pub fn to_toml(&self) -> String {
        let p = &self.problem;
        let raw = RawConfig {
            problem: RawProblem {
                alpha: p.alpha,
                beta: p.beta,
                x0: p.x0,
            },
            partition: RawPartition {
                tau: p.partition.tau_points.clone(),
                sigma: p.partition.sigma_points.clone(),
            },
            functions: RawFunctions {
                f: p.f.source().to_string(),
                h: p.h.source().to_string(),
                impulses: p.impulse_maps.iter().map(|f| f.source().to_string()).collect(),
            },
            hypothesis: self.hypothesis.as_ref().map(|h| {
                let (gamma_f, gamma_imp) = match h.variant {
                    HypothesisVariant::Basic => (None, None),
                    HypothesisVariant::Weighted { gamma_f, gamma_imp } => (Some(gamma_f), Some(gamma_imp)),
                };
                RawHypothesis {
                    m_f: h.m_f,
                    n_f: h.n_f,
                    k_h: h.k_h,
                    l_h: h.l_h.clone(),
                    gamma_f,
                    gamma_imp,
                }
            }),
            solver: Some(RawSolver {
                theta: self.solver.theta,
                tolerance: Some(self.solver.tolerance),
                max_iterations: Some(self.solver.max_iterations),
                grid_density: Some(self.solver.grid_density),
                require_sup: Some(self.solver.require_sup),
                scheme: Some(self.solver.scheme.clone()),
                initial: Some(if self.solver.zero_initial { "zero" } else { "default" }.into()),
            }),
            stability: self.stability.as_ref().map(|s| RawStability {
                mode: s.mode.name().into(),
                epsilon: s.config.epsilon,
                psi: s.config.psi,
                phi: match &s.config.phi {
                    Comparison::Constant(c) => RawPhi::Constant { constant: *c },
                    Comparison::MittagLeffler { scale, order, rate } => RawPhi::MittagLeffler {
                        mittag_leffler: RawMittagLeffler {
                            scale: *scale,
                            order: *order,
                            rate: *rate,
                        },
                    },
                    Comparison::Function(f) => RawPhi::Source(f.source().into()),
                },
                c_phi: Some(match s.config.c_phi {
                    CPhi::Given(c) => RawCPhi::Given(c),
                    CPhi::Compute => RawCPhi::Keyword("compute".into()),
                }),
                constant: s.config.constant,
                strategy: Some(
                    match s.strategy {
                        QuadratureStrategy::Grid => "grid",
                        QuadratureStrategy::Adaptive => "adaptive",
                    }
                    .into(),
                ),
                candidate: s
                    .candidate
                    .as_ref()
                    .map(|c| RawCandidate::PerInterval(c.0.iter().map(|f| f.source().to_string()).collect())),
                slack: Some(s.slack),
            }),
            analysis: Some(RawAnalysis {
                variant: Some(self.analysis.variant.clone()),
                p: self.analysis.exponents.map(|e| e.p),
                p1: self.analysis.exponents.map(|e| e.p1),
                sample_lipschitz: Some(self.analysis.sampling.is_some()),
                sampling_radius: self.analysis.sampling.map(|s| s.radius),
                sampling_pairs: self.analysis.sampling.map(|s| s.pairs),
                seed: self.analysis.sampling.map(|s| s.seed),
            }),
            reference: self.reference.as_ref().map(|r| RawReference {
                solution: RawCandidate::PerInterval(r.solution.0.iter().map(|f| f.source().to_string()).collect()),
                tolerance: r.tolerance,
            }),
        };
        toml::to_string(&raw).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[problem]
alpha = 0.5
beta = 0.5

[partition]
tau = [1.0]

[functions]
f = "1"
"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.problem.partition.m(), 0);
        assert_eq!(c.problem.x0, 0.0);
        assert_eq!(c.problem.h.source(), "0");
        assert_eq!(c.solver, SolverSettings::default());
        assert!(c.hypothesis.is_none() && c.stability.is_none());
        assert_eq!(c.analysis.variant, "basic");
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = MINIMAL.replace("beta = 0.5", "beta = 0.5\ngamma = 1.0");
        match RunConfig::parse(&bad) {
            Err(Error::Config(msg)) => assert!(msg.contains("gamma"), "{msg}"),
            other => panic!("{other:?}"),
        }
        assert!(RunConfig::parse(&format!("{MINIMAL}\n[extra]\na = 1\n")).is_err());
    }

    #[test]
    fn bad_expression_names_key() {
        let bad = MINIMAL.replace("f = \"1\"", "f = \"1 +\"");
        match RunConfig::parse(&bad) {
            Err(Error::Config(msg)) => assert!(msg.starts_with("functions.f"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn impulse_count_checked() {
        let bad = MINIMAL.replace("tau = [1.0]", "tau = [1.0, 2.0]\nsigma = [1.5]");
        assert!(matches!(RunConfig::parse(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn full_config_round_trips() {
        let text = r#"
[problem]
alpha = 0.7
beta = 0.6
x0 = 0.25

[partition]
tau = [1.0, 2.0]
sigma = [1.5]

[functions]
f = "sin(x) / 4 + v"
h = "tau * x"
impulses = ["0.5 * x"]

[hypothesis]
m_f = 0.25
n_f = 1.0
k_h = 2.0
l_h = [0.5]
gamma_f = 0.1
gamma_imp = 0.0

[solver]
theta = 12.5
scheme = "picard-marching"
initial = "zero"

[stability]
mode = "BUHR"
psi = 1.0
phi = { mittag_leffler = { scale = 2.0, order = 0.7 } }
c_phi = "compute"
candidate = ["tau", "0", "tau"]

[analysis]
variant = "weighted"
p = 1.5
p1 = 1.5
sample_lipschitz = true
seed = 7

[reference]
solution = "tau^2"
"#;
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.stability.as_ref().unwrap().mode, StabilityMode::Buhr);
        assert_eq!(c.analysis.sampling.unwrap().seed, 7);
        assert_eq!(c.reference.as_ref().unwrap().tolerance, 1e-4);
        let again = RunConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn candidate_sampling_uses_interval_entries() {
        let c = Candidate(vec![Func::parse("tau").unwrap(), Func::parse("tau - 1").unwrap(), Func::parse("tau").unwrap()]);
        let p = Partition::new(vec![1.0, 3.0], vec![2.0]).unwrap();
        let y = c.sample(&p, 8.0).unwrap();
        assert_eq!(y.eval(2.0).unwrap(), 1.0);
        assert_eq!(y.eval(2.5).unwrap(), 2.5);
        assert_eq!(y.segment(Branch::Differential(1)).unwrap().samples.values()[0], 2.0);
        assert!(Candidate(vec![Func::zero(); 2]).sample(&p, 8.0).is_err());
    }
}
