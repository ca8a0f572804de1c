//! A small scalar expression language for problem definitions.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := sum (cmp sum)?              cmp: < <= > >= == !=
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := atom ('^' exponent)?         right associative
//! exponent:= ('-' | '+') exponent | power
//! atom    := number | name | name '(' args ')' | '(' expr ')'
//! ```
//!
//! Comparisons yield 1 or 0. Variables are `tau` (alias `sigma`), `x` and `v`;
//! constants `pi` and `e`. `piecewise(c1 : e1, c2 : e2, …)` returns the first
//! arm whose guard is nonzero. `mittag_leffler(a; z)` takes `;` or `,`.

use std::fmt;

use thiserror::Error;

use crate::special::{gamma_fn, mittag_leffler};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExprErrorKind {
    Syntax,
    UnknownIdentifier,
    Arity,
    Evaluation,
}

impl fmt::Display for ExprErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExprErrorKind::Syntax => "syntax error",
            ExprErrorKind::UnknownIdentifier => "unknown identifier",
            ExprErrorKind::Arity => "arity mismatch",
            ExprErrorKind::Evaluation => "evaluation error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at line {line}, column {column}: {message}")]
pub struct ExprError {
    pub kind: ExprErrorKind,
    pub message: String,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

impl Pos {
    fn error(self, kind: ExprErrorKind, message: impl Into<String>) -> ExprError {
        ExprError {
            kind,
            message: message.into(),
            line: self.line,
            column: self.column,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(&'static str),
    End,
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ExprError> {
    const SYMBOLS: [&str; 16] = [
        "<=", ">=", "==", "!=", "<", ">", "+", "-", "*", "/", "^", "(", ")", ",", ";", ":",
    ];
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = text
                .parse::<f64>()
                .map_err(|_| pos.error(ExprErrorKind::Syntax, format!("bad number '{text}'")))?;
            out.push((Tok::Num(value), pos));
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            let sym = SYMBOLS
                .iter()
                .find(|s| rest.starts_with(**s))
                .ok_or_else(|| pos.error(ExprErrorKind::Syntax, format!("unexpected character '{c}'")))?;
            i += sym.chars().count();
            out.push((Tok::Sym(sym), pos));
        }
        col += i - start;
    }
    out.push((Tok::End, Pos { line, column: col }));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    Tau,
    X,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Builtin {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Abs,
    Sqrt,
    Gamma,
    MittagLeffler,
}

impl Builtin {
    fn lookup(name: &str) -> Option<(Self, usize)> {
        Some(match name {
            "sin" => (Self::Sin, 1),
            "cos" => (Self::Cos, 1),
            "tan" => (Self::Tan, 1),
            "exp" => (Self::Exp, 1),
            "ln" | "log" => (Self::Ln, 1),
            "abs" => (Self::Abs, 1),
            "sqrt" => (Self::Sqrt, 1),
            "gamma" => (Self::Gamma, 1),
            "mittag_leffler" => (Self::MittagLeffler, 2),
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Tan => "tan",
            Self::Exp => "exp",
            Self::Ln => "ln",
            Self::Abs => "abs",
            Self::Sqrt => "sqrt",
            Self::Gamma => "gamma",
            Self::MittagLeffler => "mittag_leffler",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>, Pos),
    Cmp(CmpOp, Box<Node>, Box<Node>),
    Call(Builtin, Vec<Node>, Pos),
    Piecewise(Vec<(Node, Node)>, Pos),
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(s) if *s == sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), ExprError> {
        if self.eat(sym) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected '{sym}'")))
        }
    }

    fn unexpected(&self, what: &str) -> ExprError {
        let found = match self.peek() {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Sym(s) => format!("'{s}'"),
            Tok::End => "end of input".into(),
        };
        self.pos().error(ExprErrorKind::Syntax, format!("{what}, found {found}"))
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let lhs = self.sum()?;
        let op = match self.peek() {
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            Tok::Sym("==") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.sum()?;
        Ok(Node::Cmp(op, Box::new(lhs), Box::new(rhs)))
    }

    fn sum(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.product()?;
        loop {
            let pos = self.pos();
            let op = if self.eat("+") {
                BinOp::Add
            } else if self.eat("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.product()?), pos);
        }
    }

    fn product(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let pos = self.pos();
            let op = if self.eat("*") {
                BinOp::Mul
            } else if self.eat("/") {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?), pos);
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat("-") {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat("+") {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        let pos = self.pos();
        if self.eat("^") {
            let exponent = self.exponent()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exponent), pos));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Node, ExprError> {
        if self.eat("-") {
            return Ok(Node::Neg(Box::new(self.exponent()?)));
        }
        if self.eat("+") {
            return self.exponent();
        }
        self.power()
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        if matches!(self.peek(), Tok::End | Tok::Sym(_)) && !matches!(self.peek(), Tok::Sym("(")) {
            return Err(self.unexpected("expected a number, name or '('"));
        }
        let (tok, pos) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Sym("(") => {
                let inner = self.expr()?;
                self.expect(")")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if matches!(self.peek(), Tok::Sym("(")) {
                    self.bump();
                    return self.call(&name, pos);
                }
                match name.as_str() {
                    "tau" | "sigma" => Ok(Node::Var(Var::Tau)),
                    "x" => Ok(Node::Var(Var::X)),
                    "v" => Ok(Node::Var(Var::V)),
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    "e" => Ok(Node::Num(std::f64::consts::E)),
                    _ => Err(pos.error(ExprErrorKind::UnknownIdentifier, format!("'{name}'"))),
                }
            }
            _ => unreachable!("checked above"),
        }
    }

    fn call(&mut self, name: &str, pos: Pos) -> Result<Node, ExprError> {
        if name == "piecewise" {
            let mut arms = Vec::new();
            loop {
                let guard = self.expr()?;
                self.expect(":")?;
                let value = self.expr()?;
                arms.push((guard, value));
                if !self.eat(",") {
                    break;
                }
            }
            self.expect(")")?;
            return Ok(Node::Piecewise(arms, pos));
        }
        let (func, arity) = Builtin::lookup(name)
            .ok_or_else(|| pos.error(ExprErrorKind::UnknownIdentifier, format!("function '{name}'")))?;
        let mut args = Vec::new();
        if !matches!(self.peek(), Tok::Sym(")")) {
            loop {
                args.push(self.expr()?);
                if !(self.eat(",") || self.eat(";")) {
                    break;
                }
            }
        }
        self.expect(")")?;
        if args.len() != arity {
            return Err(pos.error(
                ExprErrorKind::Arity,
                format!("{name} takes {arity} argument(s), got {}", args.len()),
            ));
        }
        Ok(Node::Call(func, args, pos))
    }
}

/// Variable bindings for evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vars {
    pub tau: f64,
    pub x: f64,
    pub v: f64,
}

/// A parsed expression together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    source: String,
    root: Node,
}

pub fn parse_expression(source: &str) -> Result<Expression, ExprError> {
    Expression::parse(source)
}

impl Expression {
    pub fn parse(source: &str) -> Result<Self, ExprError> {
        let mut p = Parser {
            toks: lex(source)?,
            at: 0,
        };
        let root = p.expr()?;
        if p.peek() != &Tok::End {
            return Err(p.unexpected("expected end of expression"));
        }
        Ok(Self {
            source: source.to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, vars: &Vars) -> Result<f64, ExprError> {
        eval(&self.root, vars)
    }
}

fn eval(node: &Node, vars: &Vars) -> Result<f64, ExprError> {
    Ok(match node {
        Node::Num(v) => *v,
        Node::Var(Var::Tau) => vars.tau,
        Node::Var(Var::X) => vars.x,
        Node::Var(Var::V) => vars.v,
        Node::Neg(a) => -eval(a, vars)?,
        Node::Bin(op, a, b, pos) => {
            let (a, b) = (eval(a, vars)?, eval(b, vars)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(pos.error(ExprErrorKind::Evaluation, "division by zero"));
                    }
                    a / b
                }
                BinOp::Pow => {
                    let r = a.powf(b);
                    if r.is_nan() && a.is_finite() && b.is_finite() {
                        return Err(pos.error(
                            ExprErrorKind::Evaluation,
                            format!("{a}^{b} is not a real number"),
                        ));
                    }
                    r
                }
            }
        }
        Node::Cmp(op, a, b) => {
            let (a, b) = (eval(a, vars)?, eval(b, vars)?);
            let holds = match op {
                CmpOp::Lt => a < b,
                CmpOp::Le => a <= b,
                CmpOp::Gt => a > b,
                CmpOp::Ge => a >= b,
                CmpOp::Eq => a == b,
                CmpOp::Ne => a != b,
            };
            if holds {
                1.0
            } else {
                0.0
            }
        }
        Node::Call(func, args, pos) => {
            let a = eval(&args[0], vars)?;
            let fail = |detail: String| pos.error(ExprErrorKind::Evaluation, format!("{}: {detail}", func.name()));
            let r = match func {
                Builtin::Sin => a.sin(),
                Builtin::Cos => a.cos(),
                Builtin::Tan => a.tan(),
                Builtin::Exp => a.exp(),
                Builtin::Ln => a.ln(),
                Builtin::Abs => a.abs(),
                Builtin::Sqrt => a.sqrt(),
                Builtin::Gamma => gamma_fn(a).map_err(|e| fail(e.to_string()))?,
                Builtin::MittagLeffler => {
                    let z = eval(&args[1], vars)?;
                    mittag_leffler(a, z).map_err(|e| fail(e.to_string()))?
                }
            };
            if r.is_nan() && a.is_finite() {
                return Err(fail(format!("undefined at {a}")));
            }
            r
        }
        Node::Piecewise(arms, pos) => {
            for (guard, value) in arms {
                if eval(guard, vars)? != 0.0 {
                    return eval(value, vars);
                }
            }
            return Err(pos.error(ExprErrorKind::Evaluation, "piecewise: no guard holds"));
        }
    })
}
