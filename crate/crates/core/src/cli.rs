//! Command-line pipelines: solve, analyze, certify and the built-in
//! impulsive example.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 for
//! configuration or output-directory problems, 3 for numerical failures.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{
    bound_registry, certify, default_theta, residual_profile, AnalysisReport, BoundInputs, CertifyStatus,
    QuadratureStrategy, ResidualProfile, StabilityReport,
};
use crate::builtin::{self, EXAMPLE51_PHI_SCALE, EXAMPLE51_RESIDUAL_BOUNDS, EXAMPLE51_THETA_REFERENCE};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::fractional::{sup_norm, PiecewiseFunction};
use crate::problem::{estimate_lipschitz, HypothesisData, LipschitzEstimate, SamplingConfig};
use crate::report::write_artifact;
use crate::solver::{solve_picard, SolveTrace};

#[derive(Debug, Parser)]
#[command(name = "fracimp", version, about = "Fractional impulsive integrodifferential equations: solve, analyze, certify")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Picard iteration; writes solution.csv and trace.json.
    Solve(RunArgs),
    /// Contraction constants and θ thresholds; writes analysis.json.
    Analyze(RunArgs),
    /// Stability certificate for a candidate; writes stability.json.
    Certify(RunArgs),
    /// The built-in impulsive example end to end, plus summary.json.
    Example51(ExampleArgs),
    /// Print the config text of a built-in example.
    DumpExample { name: String },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    /// Defaults to the built-in definition.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Panels per unit length.
    #[arg(long)]
    pub grid_density: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Write JSON artifacts only and keep stdout quiet.
    #[arg(long)]
    pub json_only: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaSource {
    CommandLine,
    Config,
    Threshold,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaChoice {
    pub theta: f64,
    pub source: ThetaSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

pub fn choose_theta(cfg: &RunConfig, cli: Option<f64>) -> ThetaChoice {
    let source = match (cli, cfg.solver.theta) {
        (Some(t), _) => Some((t, ThetaSource::CommandLine)),
        (None, Some(t)) => Some((t, ThetaSource::Config)),
        (None, None) => None,
    };
    match source {
        Some((theta, source)) => ThetaChoice {
            theta,
            source,
            warning: None,
        },
        None => {
            let p = &cfg.problem;
            let (theta, warning) = default_theta(&p.partition, cfg.hypothesis.as_ref(), p.alpha, p.beta);
            ThetaChoice {
                theta,
                source: ThetaSource::Threshold,
                warning,
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOutput {
    pub theta: ThetaChoice,
    pub grid_density: f64,
    pub trace: SolveTrace,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_sup_error: Option<f64>,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub solution: Option<PiecewiseFunction>,
}

pub fn run_solve(cfg: &RunConfig, theta: ThetaChoice) -> Result<SolveOutput> {
    let solver = cfg.solver.solver_config(theta.theta)?;
    let (x, trace) = solve_picard(&cfg.problem, &solver)?;
    let mut checks = vec![Check::new(
        "solver converged",
        trace.converged,
        format!("{} iterations, last step {:e}", trace.iterations, trace.steps.last().copied().unwrap_or(0.0)),
    )];
    let reference_sup_error = match &cfg.reference {
        Some(r) => {
            let exact = r.solution.sample(&cfg.problem.partition, cfg.solver.grid_density)?;
            let err = sup_norm(&x.sub(&exact)?);
            checks.push(Check::new(
                "sup error against reference solution",
                err <= r.tolerance,
                format!("{err:e} (tolerance {:e})", r.tolerance),
            ));
            Some(err)
        }
        None => None,
    };
    Ok(SolveOutput {
        theta,
        grid_density: cfg.solver.grid_density,
        trace,
        reference_sup_error,
        checks,
        solution: Some(x),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VariantSummary {
    pub name: String,
    pub description: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeOutput {
    pub theta: ThetaChoice,
    /// "declared" or "sampled"
    pub hypothesis_source: &'static str,
    pub hypothesis: HypothesisData,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz_estimate: Option<LipschitzEstimate>,
    pub report: AnalysisReport,
    pub variants: Vec<VariantSummary>,
    pub checks: Vec<Check>,
}

pub fn run_analyze(cfg: &RunConfig, theta: ThetaChoice) -> Result<AnalyzeOutput> {
    let p = &cfg.problem;
    let lipschitz_estimate = cfg.analysis.sampling.map(|s| estimate_lipschitz(p, &s));
    let (hypothesis, hypothesis_source) = match (&cfg.hypothesis, &lipschitz_estimate) {
        (Some(h), _) => (h.clone(), "declared"),
        (None, Some(e)) => (HypothesisData::basic(e.m_f, e.n_f, e.k_h, e.l_h.clone()), "sampled"),
        (None, None) => {
            return Err(Error::Config(
                "analyze needs a [hypothesis] section or analysis.sample_lipschitz = true".into(),
            ))
        }
    };
    let inputs = BoundInputs {
        exponents: cfg.analysis.exponents,
        ..BoundInputs::new(&p.partition, &hypothesis, p.alpha, p.beta)
    };
    let registry = bound_registry();
    let report = registry.get(&cfg.analysis.variant)?.evaluate(&inputs, theta.theta)?;
    let variants = registry
        .iter()
        .map(|(name, bound)| {
            let value = bound.evaluate(&inputs, theta.theta);
            let threshold = bound.threshold(&inputs);
            let error = match (&value, &threshold) {
                (Err(e), _) | (_, Err(e)) => Some(e.to_string()),
                _ => None,
            };
            VariantSummary {
                name: name.to_string(),
                description: bound.description().to_string(),
                constant: value.ok().map(|r| r.constant),
                threshold: threshold.ok(),
                error,
            }
        })
        .collect();
    let mut checks = vec![Check::new(
        format!("contraction constant ({}) below 1", report.variant),
        report.constant < 1.0,
        format!("L = {} at theta = {}", report.constant, theta.theta),
    )];
    if hypothesis_source == "sampled" {
        checks.push(Check::new(
            "hypothesis constants declared",
            false,
            "sampled estimates are lower bounds and do not certify the contraction",
        ));
    }
    Ok(AnalyzeOutput {
        theta,
        hypothesis_source,
        hypothesis,
        lipschitz_estimate,
        report,
        variants,
        checks,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifyOutput {
    /// "config" or "solver"
    pub candidate_source: &'static str,
    pub report: StabilityReport,
    pub checks: Vec<Check>,
}

pub fn run_certify(cfg: &RunConfig, theta: ThetaChoice) -> Result<CertifyOutput> {
    let st = cfg
        .stability
        .as_ref()
        .ok_or_else(|| Error::Config("certify needs a [stability] section".into()))?;
    let solver = cfg.solver.solver_config(theta.theta)?;
    let (y, candidate_source) = match &st.candidate {
        Some(c) => (c.sample(&cfg.problem.partition, cfg.solver.grid_density)?, "config"),
        None => (solve_picard(&cfg.problem, &solver)?.0, "solver"),
    };
    let report = certify(
        &cfg.problem,
        cfg.hypothesis.as_ref(),
        &y,
        &st.config,
        st.mode,
        &st.certify_options(theta.theta, solver),
    )?;
    let checks = vec![Check::new(
        format!("{} certificate", report.mode),
        report.status == CertifyStatus::Certified,
        format!("status {:?}, worst margin {:e} at tau = {}", report.status, report.worst_margin, report.worst_margin_tau),
    )];
    Ok(CertifyOutput {
        candidate_source,
        report,
        checks,
    })
}

/// A computed quantity next to the value it is compared with.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub quantity: String,
    pub computed: f64,
    pub reference: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Example51Summary {
    pub theta: f64,
    pub lipschitz_declared: HypothesisData,
    pub lipschitz_estimate: LipschitzEstimate,
    /// Each estimate within 10% below its declared constant.
    pub lipschitz_within_ten_percent: Vec<(String, bool)>,
    pub thresholds: Vec<VariantSummary>,
    pub comparisons: Vec<Comparison>,
    pub candidate_profile: ResidualProfile,
    pub fixed_point_profile: ResidualProfile,
    /// sup |x − τ²| over differential intervals and |x − (τ − 1)| on the
    /// impulse interval, for the closed form quoted with the example.
    pub closed_form_sup_deviation: f64,
    pub checks: Vec<Check>,
}

pub const EXAMPLE51_CHECK_THETA: f64 = 48.6;

pub fn run_example51(
    cfg: &RunConfig,
    solved: &SolveOutput,
    analyzed: &AnalyzeOutput,
    certified: &CertifyOutput,
) -> Result<Example51Summary> {
    let p = &cfg.problem;
    let declared = cfg
        .hypothesis
        .clone()
        .ok_or_else(|| Error::Config("example needs declared hypothesis constants".into()))?;
    let estimate = estimate_lipschitz(p, &SamplingConfig::default());
    let pairs = [
        ("M_f", estimate.m_f, declared.m_f),
        ("N_f", estimate.n_f, declared.n_f),
        ("K_h", estimate.k_h, declared.k_h),
        ("L_h1", estimate.l_h[0], declared.l_h[0]),
    ];
    let mut checks = vec![Check::new(
        "sampled Lipschitz estimates do not exceed declared constants",
        pairs.iter().all(|(_, e, d)| e <= d),
        pairs.iter().map(|(n, e, d)| format!("{n}: {e} <= {d}")).collect::<Vec<_>>().join(", "),
    )];
    let within = pairs.iter().map(|(n, e, d)| (n.to_string(), *e <= *d && *e >= 0.9 * d)).collect();

    let inputs = BoundInputs::new(&p.partition, &declared, p.alpha, p.beta);
    let registry = bound_registry();
    let mut comparisons = Vec::new();
    for name in ["basic", "display"] {
        let r = registry.get(name)?.evaluate(&inputs, EXAMPLE51_CHECK_THETA)?;
        checks.push(Check::new(
            format!("L < 1 at theta = {EXAMPLE51_CHECK_THETA} ({name})"),
            r.constant < 1.0,
            format!("L = {}", r.constant),
        ));
    }
    for name in ["basic", "display", "worked-example"] {
        comparisons.push(Comparison {
            quantity: format!("theta threshold ({name})"),
            computed: registry.get(name)?.threshold(&inputs)?,
            reference: EXAMPLE51_THETA_REFERENCE,
        });
    }

    let st = cfg.stability.as_ref().ok_or_else(|| Error::Config("example needs a [stability] section".into()))?;
    let candidate = st
        .candidate
        .as_ref()
        .ok_or_else(|| Error::Config("example needs a candidate".into()))?
        .sample(&p.partition, cfg.solver.grid_density)?;
    let candidate_profile = residual_profile(p, &candidate, QuadratureStrategy::Adaptive)?;
    for (i, bound) in EXAMPLE51_RESIDUAL_BOUNDS.iter().enumerate() {
        let (sup, band) = (candidate_profile.differential_sups[i], candidate_profile.differential_bands[i]);
        checks.push(Check::new(
            format!("candidate residual on differential interval {i} within {bound}"),
            sup <= bound + band,
            format!("sup = {sup} (band {band:e})"),
        ));
        comparisons.push(Comparison {
            quantity: format!("candidate residual sup, differential interval {i}"),
            computed: sup,
            reference: *bound,
        });
    }
    let impulse = candidate_profile.impulse_sups[0];
    checks.push(Check::new(
        "candidate impulse residual vanishes",
        impulse <= crate::analysis::IMPULSE_EXACT_TOLERANCE,
        format!("sup = {impulse:e}"),
    ));

    let c_phi = &certified.report.c_phi;
    checks.push(Check::new(
        "c_phi = 1",
        (c_phi.c_phi - 1.0).abs() <= 1e-6 && c_phi.consistent,
        format!("c_phi = {}, grid ratio {}", c_phi.c_phi, c_phi.grid_ratio),
    ));
    comparisons.push(Comparison {
        quantity: "c_phi".into(),
        computed: c_phi.c_phi,
        reference: 1.0,
    });
    checks.push(Check::new(
        format!("{} bound with phi = {EXAMPLE51_PHI_SCALE} E(tau^(2/3)), psi = 0", certified.report.mode),
        certified.report.status == CertifyStatus::Certified,
        format!("worst margin {:e}", certified.report.worst_margin),
    ));
    checks.extend(solved.checks.iter().cloned());
    checks.extend(analyzed.checks.iter().cloned());

    let x = solved.solution.as_ref().expect("solve keeps its solution");
    let fixed_point_profile = residual_profile(p, x, QuadratureStrategy::Grid)?;
    let closed_form_sup_deviation = x
        .nodes()
        .map(|(_, b, t, v)| {
            let closed = if matches!(b, crate::problem::Branch::Impulse(_)) { t - 1.0 } else { t * t };
            (v - closed).abs()
        })
        .fold(0.0, f64::max);

    Ok(Example51Summary {
        theta: solved.theta.theta,
        lipschitz_declared: declared,
        lipschitz_estimate: estimate,
        lipschitz_within_ten_percent: within,
        thresholds: analyzed.variants.clone(),
        comparisons,
        candidate_profile,
        fixed_point_profile,
        closed_form_sup_deviation,
        checks,
    })
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Config(format!("output directory {}: {e}", dir.display())))
}

fn write_solution(dir: &Path, x: &PiecewiseFunction) -> Result<()> {
    let path = dir.join("solution.csv");
    let file = fs::File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    x.write_csv(std::io::BufWriter::new(file))
}

fn apply_overrides(cfg: &mut RunConfig, args: &CommonArgs) -> Result<()> {
    if let Some(d) = args.grid_density {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Config(format!("--grid-density {d} must be positive")));
        }
        cfg.solver.grid_density = d;
    }
    if let Some(t) = args.theta {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Config(format!("--theta {t} must be positive")));
        }
    }
    Ok(())
}

/// Result of one command: the checks it ran.
pub struct Outcome {
    pub checks: Vec<Check>,
}

fn execute(command: &Command, quiet: &mut bool) -> Result<Outcome> {
    let (mut cfg, args) = match command {
        Command::Solve(a) | Command::Analyze(a) | Command::Certify(a) => (RunConfig::load(&a.config)?, &a.common),
        Command::Example51(a) => match &a.config {
            Some(path) => (RunConfig::load(path)?, &a.common),
            None => (builtin::example51(), &a.common),
        },
        Command::DumpExample { name } => {
            print!("{}", builtin::example_registry().get(name).map_err(|e| Error::Config(e.to_string()))?.to_toml());
            return Ok(Outcome { checks: vec![] });
        }
    };
    *quiet = args.json_only;
    apply_overrides(&mut cfg, args)?;
    prepare_out(&args.out)?;
    let theta = choose_theta(&cfg, args.theta);
    let out = &args.out;
    let checks = match command {
        Command::Solve(_) => {
            let s = run_solve(&cfg, theta)?;
            if !args.json_only {
                write_solution(out, s.solution.as_ref().expect("solution kept"))?;
            }
            write_artifact(&out.join("trace.json"), "trace", &s)?;
            s.checks
        }
        Command::Analyze(_) => {
            let a = run_analyze(&cfg, theta)?;
            write_artifact(&out.join("analysis.json"), "analysis", &a)?;
            a.checks
        }
        Command::Certify(_) => {
            let c = run_certify(&cfg, theta)?;
            write_artifact(&out.join("stability.json"), "stability", &c)?;
            c.checks
        }
        Command::Example51(_) => {
            let s = run_solve(&cfg, theta.clone())?;
            if !args.json_only {
                write_solution(out, s.solution.as_ref().expect("solution kept"))?;
            }
            write_artifact(&out.join("trace.json"), "trace", &s)?;
            let a = run_analyze(&cfg, theta.clone())?;
            write_artifact(&out.join("analysis.json"), "analysis", &a)?;
            let c = run_certify(&cfg, theta)?;
            write_artifact(&out.join("stability.json"), "stability", &c)?;
            let summary = run_example51(&cfg, &s, &a, &c)?;
            write_artifact(&out.join("summary.json"), "summary", &summary)?;
            summary.checks
        }
        Command::DumpExample { .. } => unreachable!("handled above"),
    };
    Ok(Outcome { checks })
}

pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(o) if o.checks.iter().all(|c| c.passed) => 0,
        Ok(_) => 1,
        Err(Error::Config(_)) | Err(Error::Io(_)) | Err(Error::Unknown { .. }) => 2,
        Err(_) => 3,
    }
}

pub fn run(cli: &Cli) -> i32 {
    let mut quiet = false;
    let result = execute(&cli.command, &mut quiet);
    match &result {
        Ok(o) if !quiet => {
            for c in &o.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
        }
        Ok(_) => {}
        Err(e) => eprintln!("error: {e}"),
    }
    exit_code(&result)
}
