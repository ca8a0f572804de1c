//! Hard-coded problems and the functions they use. Config files refer to
//! the functions as `builtin:<name>`.

use std::sync::Arc;

use crate::analysis::{QuadratureStrategy, StabilityMode};
use crate::config::{AnalysisSettings, Candidate, Reference, RunConfig, SolverSettings, StabilitySettings};
use crate::error::Result;
use crate::problem::{CPhi, Comparison, Func, HypothesisData, ImpulsiveProblem, Partition, StabilityConfig};
use crate::registry::Registry;
use crate::special::gamma_unchecked;

pub const PREFIX: &str = "builtin:";

/// θ used by the impulsive example: 1.05 × 46.25.
pub const EXAMPLE51_THETA: f64 = 48.5625;
/// Residual bounds claimed for the candidate on (0, 1] and (2, 3].
pub const EXAMPLE51_RESIDUAL_BOUNDS: [f64; 2] = [4.5495, 2.8361];
pub const EXAMPLE51_THETA_REFERENCE: f64 = 46.2473;
pub const EXAMPLE51_PHI_SCALE: f64 = 2.8361;

fn example51_g(t: f64) -> f64 {
    let c = 9.0 / (2.0 * gamma_unchecked(1.0 / 3.0));
    if t <= 1.0 {
        c * t.powf(4.0 / 3.0) - 0.25
    } else if t < 2.0 {
        0.0
    } else {
        // τ = 2 is the first node of the last differential interval
        c * (t - 2.0).powf(4.0 / 3.0) - (4.0f64.cos() + 4.0f64.sin()) / (4.0 * 4.0f64.exp())
    }
}

fn native(name: &str, f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Arc<Func> {
    Arc::new(Func::native(format!("{PREFIX}{name}"), f))
}

pub fn function_registry() -> Registry<Func> {
    let mut r: Registry<Func> = Registry::new("builtin function");
    r.register("example51.g", native("example51.g", |t, _, _| example51_g(t)));
    r.register(
        "example51.f",
        native("example51.f", |t, x, v| example51_g(t) + (-t * t).exp() / 4.0 * (x.sin() + x.cos()) + v),
    );
    r.register("example51.h", native("example51.h", |t, x, _| t * (-t * t).exp() * x.sin()));
    r.register(
        "example51.h1",
        native("example51.h1", |t, x, _| {
            t * (t - 1.0).cbrt() / (t - 4.0) * (x.abs() - 3.0) / (x.abs() + 1.0) / gamma_unchecked(4.0 / 3.0)
        }),
    );
    r.register("example51.y_d0", native("example51.y_d0", |t, _, _| t));
    r.register("example51.y_i1", native("example51.y_i1", |t, _, _| t - 1.0));
    r.register("example51.y_d1", native("example51.y_d1", |t, _, _| t));
    r
}

/// `builtin:<name>` from the registry, anything else parsed as an expression.
pub fn resolve(source: &str) -> Result<Func> {
    match source.trim().strip_prefix(PREFIX) {
        Some(name) => Ok((*function_registry().get(name)?).clone()),
        None => Func::parse(source),
    }
}

fn builtin(name: &str) -> Func {
    resolve(&format!("{PREFIX}{name}")).expect("registered builtin")
}

pub fn example51() -> RunConfig {
    let partition = Partition::new(vec![1.0, 3.0], vec![2.0]).expect("valid partition");
    let problem = ImpulsiveProblem::new(
        2.0 / 3.0,
        2.0 / 3.0,
        partition,
        builtin("example51.f"),
        builtin("example51.h"),
        vec![builtin("example51.h1")],
        0.0,
    )
    .expect("valid problem");
    let l_h1 = 4.0 / gamma_unchecked(4.0 / 3.0);
    RunConfig {
        problem,
        hypothesis: Some(HypothesisData::basic(0.5, 1.0, 3.0, vec![l_h1])),
        solver: SolverSettings {
            theta: Some(EXAMPLE51_THETA),
            ..SolverSettings::default()
        },
        stability: Some(StabilitySettings {
            mode: StabilityMode::GeneralizedBuhr,
            config: StabilityConfig {
                epsilon: None,
                psi: 0.0,
                phi: Comparison::MittagLeffler {
                    scale: EXAMPLE51_PHI_SCALE,
                    order: 2.0 / 3.0,
                    rate: 1.0,
                },
                c_phi: CPhi::Compute,
                constant: Some(1.0),
            },
            strategy: QuadratureStrategy::Adaptive,
            candidate: Some(Candidate(vec![
                builtin("example51.y_d0"),
                builtin("example51.y_i1"),
                builtin("example51.y_d1"),
            ])),
            slack: 1e-9,
        }),
        analysis: AnalysisSettings {
            variant: "worked-example".into(),
            ..AnalysisSettings::default()
        },
        reference: None,
    }
}

/// ᶜD^{1/2} x = 1 on [0, 1], x(0) = 0; solution τ^{1/2}/Γ(3/2).
pub fn unit_forcing() -> RunConfig {
    let problem = ImpulsiveProblem::new(
        0.5,
        0.5,
        Partition::single(1.0).expect("valid partition"),
        Func::parse("1").expect("literal"),
        Func::parse("0").expect("literal"),
        vec![],
        0.0,
    )
    .expect("valid problem");
    RunConfig {
        problem,
        hypothesis: None,
        solver: SolverSettings {
            theta: Some(1.0),
            ..SolverSettings::default()
        },
        stability: None,
        analysis: AnalysisSettings::default(),
        reference: Some(Reference {
            solution: Candidate(vec![Func::parse("tau^(1/2)/gamma(3/2)").expect("literal")]),
            tolerance: 1e-4,
        }),
    }
}

/// f ≡ 0, h ≡ 0, h₁ ≡ 0, x₀ = 0: the zero function is the solution.
pub fn trivial() -> RunConfig {
    let problem = ImpulsiveProblem::new(
        0.75,
        0.75,
        Partition::new(vec![1.0, 2.0], vec![1.5]).expect("valid partition"),
        Func::parse("0").expect("literal"),
        Func::parse("0").expect("literal"),
        vec![Func::parse("0").expect("literal")],
        0.0,
    )
    .expect("valid problem");
    RunConfig {
        problem,
        hypothesis: Some(HypothesisData::basic(0.0, 0.0, 0.0, vec![0.0])),
        solver: SolverSettings {
            theta: Some(1.0),
            ..SolverSettings::default()
        },
        stability: Some(StabilitySettings {
            mode: StabilityMode::Buh,
            config: StabilityConfig {
                epsilon: None,
                psi: 1.0,
                phi: Comparison::Constant(1.0),
                c_phi: CPhi::Compute,
                constant: None,
            },
            strategy: QuadratureStrategy::Grid,
            candidate: None,
            slack: 1e-9,
        }),
        analysis: AnalysisSettings::default(),
        reference: Some(Reference {
            solution: Candidate(vec![Func::parse("0").expect("literal")]),
            tolerance: 1e-12,
        }),
    }
}

pub fn example_registry() -> Registry<RunConfig> {
    let mut r: Registry<RunConfig> = Registry::new("builtin example");
    r.register("example51", Arc::new(example51()));
    r.register("unit-forcing", Arc::new(unit_forcing()));
    r.register("trivial", Arc::new(trivial()));
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::special::gamma_fn;

    // the same maps typed as expressions
    const G: &str = "piecewise(tau <= 1 : 9/(2*gamma(1/3))*tau^(4/3) - 1/4, tau < 2 : 0, \
                     1 : 9/(2*gamma(1/3))*(tau-2)^(4/3) - (cos(4)+sin(4))/(4*exp(4)))";
    const H: &str = "(tau/exp(tau^2))*sin(x)";
    const H1: &str = "1/gamma(4/3) * tau*(tau-1)^(1/3)/(tau-4) * (abs(x)-3)/(abs(x)+1)";

    #[test]
    fn natives_match_expressions() {
        let g = Func::parse(G).unwrap();
        let f = Func::parse(&format!("{G} + exp(-tau^2)/4*(sin(x)+cos(x)) + v")).unwrap();
        let (h, h1) = (Func::parse(H).unwrap(), Func::parse(H1).unwrap());
        let pairs = [
            (g, builtin("example51.g")),
            (f, builtin("example51.f")),
            (h, builtin("example51.h")),
        ];
        for k in 0..=60 {
            let t = 3.0 * k as f64 / 60.0;
            for (x, v) in [(0.0, 0.0), (-1.3, 0.4), (2.5, -3.0)] {
                for (e, n) in &pairs {
                    let (a, b) = (e.eval(t, x, v).unwrap(), n.eval(t, x, v).unwrap());
                    assert!((a - b).abs() <= 1e-13 * (1.0 + b.abs()), "{} at {t}: {a} vs {b}", n.source());
                }
                if (1.0..=2.0).contains(&t) {
                    let (a, b) = (h1.eval(t, x, v).unwrap(), builtin("example51.h1").eval(t, x, v).unwrap());
                    assert!((a - b).abs() <= 1e-13 * (1.0 + b.abs()));
                }
            }
        }
    }

    #[test]
    fn g_branches() {
        let g = |t| builtin("example51.g").eval(t, 0.0, 0.0).unwrap();
        assert_eq!(g(0.0), -0.25);
        assert_eq!(g(1.5), 0.0);
        let tail = -(4.0f64.cos() + 4.0f64.sin()) / (4.0 * 4.0f64.exp());
        assert_eq!(g(2.0), tail);
        let c = 9.0 / (2.0 * gamma_fn(1.0 / 3.0).unwrap());
        assert!((g(1.0) - (c - 0.25)).abs() < 1e-15);
    }

    #[test]
    fn h1_at_two() {
        let v = builtin("example51.h1").eval(2.0, 0.0, 0.0).unwrap();
        assert!((v - 3.0 / gamma_fn(4.0 / 3.0).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn resolve_prefix() {
        assert_eq!(resolve("builtin:example51.h").unwrap().source(), "builtin:example51.h");
        assert!(matches!(resolve("builtin:nope"), Err(Error::Unknown { .. })));
        assert_eq!(resolve("tau + 1").unwrap().eval(1.0, 0.0, 0.0).unwrap(), 2.0);
    }

    #[test]
    fn examples_round_trip() {
        for (name, cfg) in example_registry().iter() {
            let text = cfg.to_toml();
            let again = RunConfig::parse(&text).unwrap_or_else(|e| panic!("{name}: {e}\n{text}"));
            assert_eq!(&again, cfg.as_ref(), "{name}");
        }
    }
}
