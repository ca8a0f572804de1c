//! Oracles and generators shared by the integration tests. Apart from the
//! Gamma leaves of the expression reference, nothing here calls into the
//! library's numerics.

#![allow(dead_code)]

use fracimp::problem::{Func, ImpulsiveProblem, Partition};
use rand::Rng;

/// Tanh-sinh quadrature of `f` over `[a, b]`. The integrand receives the
/// abscissa together with its distances to `a` and to `b`, computed without
/// cancellation, so endpoint singularities can be evaluated accurately.
pub fn tanh_sinh(f: impl Fn(f64, f64, f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let pi2 = std::f64::consts::FRAC_PI_2;
    let mut prev = f64::NAN;
    for level in 3..11 {
        let h = 0.5f64.powi(level);
        let mut acc = 0.0;
        let mut k = 0i64;
        loop {
            let t = k as f64 * h;
            let u = pi2 * t.sinh();
            let cosh_u = u.cosh();
            // 1 - tanh(u), in units of `half`
            let d = half / (u.exp() * cosh_u);
            let w = pi2 * t.cosh() / (cosh_u * cosh_u);
            if d < 1e-300 || w < 1e-300 {
                break;
            }
            acc += w * f(b - d, b - a - d, d);
            if k > 0 {
                acc += w * f(a + d, d, b - a - d);
            }
            k += 1;
        }
        let estimate = acc * h * half;
        if (estimate - prev).abs() <= 1e-14 * estimate.abs().max(1e-300) {
            return estimate;
        }
        prev = estimate;
    }
    prev
}

/// Gamma from the Stirling series after shifting the argument above 20,
/// with reflection below one half.
pub fn gamma_oracle(x: f64) -> f64 {
    use std::f64::consts::PI;
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_oracle(1.0 - x));
    }
    let mut z = x;
    let mut log_shift = 0.0;
    while z < 20.0 {
        log_shift += z.ln();
        z += 1.0;
    }
    // Bernoulli terms B_{2k} / (2k(2k−1) z^{2k−1})
    let coeffs = [1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0, -691.0 / 360360.0, 1.0 / 156.0];
    let z2 = z * z;
    let mut series = 0.0;
    let mut zp = z;
    for c in coeffs {
        series += c / zp;
        zp *= z2;
    }
    let ln = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series - log_shift;
    ln.exp()
}

/// Γ(k+1)/Γ(k+1+β) · t^{k+β}, the fractional integral of t^k from 0.
pub fn power_rule_integral(k: f64, beta: f64, t: f64) -> f64 {
    gamma_oracle(k + 1.0) / gamma_oracle(k + 1.0 + beta) * t.powf(k + beta)
}

/// Caputo derivative of t^k (k > 0) from 0.
pub fn power_rule_derivative(k: f64, alpha: f64, t: f64) -> f64 {
    gamma_oracle(k + 1.0) / gamma_oracle(k + 1.0 - alpha) * t.powf(k - alpha)
}

/// A partition with m impulse intervals inside (0, t_end].
pub fn random_partition(rng: &mut impl Rng, m: usize, t_end: f64) -> Partition {
    // 2m + 1 positive lengths, normalised; impulses may not be degenerate here
    let lengths: Vec<f64> = (0..2 * m + 1).map(|_| rng.gen_range(0.3..1.0)).collect();
    let total: f64 = lengths.iter().sum();
    let mut t = 0.0;
    let (mut taus, mut sigmas) = (Vec::new(), Vec::new());
    for (j, l) in lengths.iter().enumerate() {
        t += l / total * t_end;
        if j % 2 == 0 {
            taus.push(t);
        } else {
            sigmas.push(t);
        }
    }
    *taus.last_mut().unwrap() = t_end;
    Partition::new(taus, sigmas).expect("valid random partition")
}

/// Affine data with known Lipschitz constants.
pub struct AffineProblem {
    pub problem: ImpulsiveProblem,
    pub m_f: f64,
    pub n_f: f64,
    pub k_h: f64,
    pub l_h: Vec<f64>,
}

pub fn random_affine_problem(rng: &mut impl Rng) -> AffineProblem {
    let mut c = || rng.gen_range(-1.0..1.0f64);
    let (a1, a2, a3, a4, b1, b2) = (c(), c(), c(), c(), c(), c());
    let m = rng.gen_range(0..=2usize);
    let t_end = rng.gen_range(0.5..2.0);
    let partition = random_partition(rng, m, t_end);
    let alpha = rng.gen_range(0.55..0.95);
    let beta = rng.gen_range(0.55..0.95);
    let x0 = rng.gen_range(-1.0..1.0f64);
    let mut impulses = Vec::new();
    let mut l_h = Vec::new();
    for _ in 0..m {
        let (c1, c2) = (rng.gen_range(-1.0..1.0f64), rng.gen_range(-1.0..1.0f64));
        impulses.push(Func::parse(&format!("{c1:?} * x + {c2:?}")).unwrap());
        l_h.push(c1.abs());
    }
    let problem = ImpulsiveProblem::new(
        alpha,
        beta,
        partition,
        Func::parse(&format!("{a1:?} * x + {a2:?} * v + {a3:?} * tau + {a4:?}")).unwrap(),
        Func::parse(&format!("{b1:?} * x + {b2:?}")).unwrap(),
        impulses,
        x0,
    )
    .unwrap();
    AffineProblem {
        problem,
        m_f: a1.abs(),
        n_f: a2.abs(),
        k_h: b1.abs(),
        l_h,
    }
}

/// Nonlinear data: saturating maps with Lipschitz constants at most the
/// printed coefficients.
pub fn random_nonlinear_problem(rng: &mut impl Rng) -> AffineProblem {
    let mut c = || rng.gen_range(-1.0..1.0f64);
    let (a1, a2, a3, b1) = (c(), c(), c(), c());
    let m = rng.gen_range(0..=2usize);
    let t_end = rng.gen_range(0.5..2.0);
    let partition = random_partition(rng, m, t_end);
    let alpha = rng.gen_range(0.55..0.95);
    let beta = rng.gen_range(0.55..0.95);
    let mut impulses = Vec::new();
    let mut l_h = Vec::new();
    for _ in 0..m {
        let c1 = rng.gen_range(-1.0..1.0f64);
        impulses.push(Func::parse(&format!("{c1:?} * cos(x) + tau")).unwrap());
        l_h.push(c1.abs());
    }
    let problem = ImpulsiveProblem::new(
        alpha,
        beta,
        partition,
        Func::parse(&format!("{a1:?} * sin(x) + {a2:?} * v + {a3:?} * exp(-tau)")).unwrap(),
        Func::parse(&format!("{b1:?} * x / (1 + abs(x))")).unwrap(),
        impulses,
        rng.gen_range(-1.0..1.0f64),
    )
    .unwrap();
    AffineProblem {
        problem,
        m_f: a1.abs(),
        n_f: a2.abs(),
        k_h: b1.abs(),
        l_h,
    }
}

/// Reference AST for the expression language, rendered with the fewest
/// parentheses the documented precedence allows.
#[derive(Debug, Clone)]
pub enum RefExpr {
    Num(f64),
    Tau,
    X,
    V,
    Neg(Box<RefExpr>),
    Bin(char, Box<RefExpr>, Box<RefExpr>),
    Cmp(&'static str, Box<RefExpr>, Box<RefExpr>),
    Call(&'static str, Box<RefExpr>),
    Gamma(f64),
    Piecewise(Vec<(RefExpr, RefExpr)>, Box<RefExpr>),
}

const CALLS: [&str; 6] = ["sin", "cos", "exp", "abs", "sqrt", "ln"];

pub fn random_expr(rng: &mut impl Rng, depth: usize) -> RefExpr {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..5) {
            0 => RefExpr::Tau,
            1 => RefExpr::X,
            2 => RefExpr::V,
            3 => RefExpr::Gamma(rng.gen_range(0.2..5.0)),
            _ => RefExpr::Num((rng.gen_range(0.0..10.0f64) * 100.0).round() / 100.0),
        };
    }
    let sub = |rng: &mut _| Box::new(random_expr(rng, depth - 1));
    match rng.gen_range(0..9) {
        0 => RefExpr::Neg(sub(rng)),
        1 | 2 => RefExpr::Bin(['+', '-'][rng.gen_range(0..2)], sub(rng), sub(rng)),
        3 | 4 => RefExpr::Bin(['*', '/'][rng.gen_range(0..2)], sub(rng), sub(rng)),
        5 => RefExpr::Bin('^', sub(rng), sub(rng)),
        6 => RefExpr::Call(CALLS[rng.gen_range(0..CALLS.len())], sub(rng)),
        7 => RefExpr::Cmp(["<", "<=", ">", ">=", "==", "!="][rng.gen_range(0..6)], sub(rng), sub(rng)),
        _ => {
            let arms = (0..rng.gen_range(1..3)).map(|_| (random_expr(rng, depth - 1), random_expr(rng, depth - 1))).collect();
            RefExpr::Piecewise(arms, sub(rng))
        }
    }
}

/// Precedence: cmp 0, sum 1, product 2, unary 3, power 4, atom 5.
fn level(e: &RefExpr) -> u8 {
    match e {
        RefExpr::Cmp(..) => 0,
        RefExpr::Bin('+' | '-', ..) => 1,
        RefExpr::Bin('*' | '/', ..) => 2,
        RefExpr::Neg(_) => 3,
        RefExpr::Bin('^', ..) => 4,
        RefExpr::Num(v) if *v < 0.0 => 3,
        _ => 5,
    }
}

fn wrap(e: &RefExpr, min: u8) -> String {
    let s = render(e);
    if level(e) >= min {
        s
    } else {
        format!("({s})")
    }
}

fn render_exponent(e: &RefExpr) -> String {
    match e {
        RefExpr::Neg(inner) => format!("-{}", render_exponent(inner)),
        _ => wrap(e, 4),
    }
}

pub fn render(e: &RefExpr) -> String {
    match e {
        RefExpr::Num(v) => format!("{v}"),
        RefExpr::Tau => "tau".into(),
        RefExpr::X => "x".into(),
        RefExpr::V => "v".into(),
        RefExpr::Neg(a) => format!("-{}", wrap(a, 3)),
        RefExpr::Bin(op @ ('+' | '-'), a, b) => format!("{} {op} {}", wrap(a, 1), wrap(b, 2)),
        RefExpr::Bin(op @ ('*' | '/'), a, b) => format!("{}{op}{}", wrap(a, 2), wrap(b, 3)),
        RefExpr::Bin(_, a, b) => format!("{}^{}", wrap(a, 5), render_exponent(b)),
        RefExpr::Cmp(op, a, b) => format!("{} {op} {}", wrap(a, 1), wrap(b, 1)),
        RefExpr::Call(name, a) => format!("{name}({})", render(a)),
        RefExpr::Gamma(v) => format!("gamma({v})"),
        RefExpr::Piecewise(arms, default) => {
            let mut parts: Vec<String> = arms.iter().map(|(c, v)| format!("{} : {}", render(c), render(v))).collect();
            parts.push(format!("1 : {}", render(default)));
            format!("piecewise({})", parts.join(", "))
        }
    }
}

/// Direct evaluation; `None` where the expression is undefined or not finite.
pub fn ref_eval(e: &RefExpr, tau: f64, x: f64, v: f64) -> Option<f64> {
    let r = match e {
        RefExpr::Num(c) => *c,
        RefExpr::Tau => tau,
        RefExpr::X => x,
        RefExpr::V => v,
        RefExpr::Neg(a) => -ref_eval(a, tau, x, v)?,
        RefExpr::Bin(op, a, b) => {
            let (a, b) = (ref_eval(a, tau, x, v)?, ref_eval(b, tau, x, v)?);
            match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                '/' if b == 0.0 => return None,
                '/' => a / b,
                _ => a.powf(b),
            }
        }
        RefExpr::Cmp(op, a, b) => {
            let (a, b) = (ref_eval(a, tau, x, v)?, ref_eval(b, tau, x, v)?);
            let t = match *op {
                "<" => a < b,
                "<=" => a <= b,
                ">" => a > b,
                ">=" => a >= b,
                "==" => a == b,
                _ => a != b,
            };
            if t {
                1.0
            } else {
                0.0
            }
        }
        RefExpr::Call(name, a) => {
            let a = ref_eval(a, tau, x, v)?;
            match *name {
                "sin" => a.sin(),
                "cos" => a.cos(),
                "exp" => a.exp(),
                "abs" => a.abs(),
                "sqrt" => a.sqrt(),
                _ => a.ln(),
            }
        }
        // the library value, so that amplified last-digit differences of two
        // Gamma implementations do not show up as parser mismatches
        RefExpr::Gamma(c) => fracimp::special::gamma_fn(*c).ok()?,
        RefExpr::Piecewise(arms, default) => {
            for (c, val) in arms {
                if ref_eval(c, tau, x, v)? != 0.0 {
                    return ref_eval(val, tau, x, v);
                }
            }
            ref_eval(default, tau, x, v)?
        }
    };
    // stay clear of overflow and of values whose rounding the two
    // evaluators could resolve differently
    if r.is_finite() && r.abs() < 1e12 {
        Some(r)
    } else {
        None
    }
}
