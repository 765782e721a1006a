//! Closed-form scalar expressions evaluated on jets.
//!
//! Expressions describe the free input functions of a construction (for
//! example A(y), B(y), connection coefficients or a Toda potential). They
//! evaluate exactly on jets, and antiderivatives are supported through an
//! `Integral` node: its value comes from adaptive quadrature and its
//! derivatives from the Taylor expansion of the integrand.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use thiserror::Error;

use crate::jets::{Jet, JetConfig, JetError};
use crate::quad;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdent(String),
    #[error("expression uses variable {index} but only {available} are bound")]
    UnboundVariable { index: usize, available: usize },
    #[error("jet evaluation failed: {0}")]
    Jet(#[from] JetError),
    #[error("domain error in {op} at {value}")]
    Domain { op: &'static str, value: f64 },
    #[error("quadrature failed: {0}")]
    Quadrature(String),
}

/// Absolute tolerance of antiderivative quadrature.
pub const INTEGRAL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Var(usize),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Powi(Expr, i32),
    Powf(Expr, f64),
    Exp(Expr),
    Ln(Expr),
    Sqrt(Expr),
    Sin(Expr),
    Cos(Expr),
    /// `∫_lower^upper integrand(s) ds`, the integrand written in variable 0.
    Integral {
        integrand: Expr,
        lower: f64,
        upper: Expr,
    },
}

/// Shared, immutable expression tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn new(n: Node) -> Expr {
        Expr(Arc::new(n))
    }

    pub fn constant(c: f64) -> Expr {
        Expr::new(Node::Const(c))
    }

    pub fn var(i: usize) -> Expr {
        Expr::new(Node::Var(i))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn powi(&self, n: i32) -> Expr {
        match (self.as_const(), n) {
            (_, 0) => Expr::constant(1.0),
            (_, 1) => self.clone(),
            (Some(c), _) => Expr::constant(c.powi(n)),
            _ => Expr::new(Node::Powi(self.clone(), n)),
        }
    }

    pub fn powf(&self, r: f64) -> Expr {
        if r.fract() == 0.0 && r.abs() < 1e6 {
            return self.powi(r as i32);
        }
        match self.as_const() {
            Some(c) => Expr::constant(c.powf(r)),
            None => Expr::new(Node::Powf(self.clone(), r)),
        }
    }

    pub fn exp(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.exp()),
            None => Expr::new(Node::Exp(self.clone())),
        }
    }

    pub fn ln(&self) -> Expr {
        Expr::new(Node::Ln(self.clone()))
    }

    pub fn sqrt(&self) -> Expr {
        Expr::new(Node::Sqrt(self.clone()))
    }

    pub fn sin(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.sin()),
            None => Expr::new(Node::Sin(self.clone())),
        }
    }

    pub fn cos(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.cos()),
            None => Expr::new(Node::Cos(self.clone())),
        }
    }

    /// `∫_lower^upper integrand(s) ds` where `integrand` is written in `var(0)`.
    pub fn integral(integrand: Expr, lower: f64, upper: Expr) -> Expr {
        if integrand.is_zero() {
            return Expr::constant(0.0);
        }
        Expr::new(Node::Integral {
            integrand,
            lower,
            upper,
        })
    }

    /// Largest variable index used, plus one.
    pub fn arity(&self) -> usize {
        match &*self.0 {
            Node::Const(_) => 0,
            Node::Var(i) => i + 1,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.arity().max(b.arity())
            }
            Node::Neg(a)
            | Node::Powi(a, _)
            | Node::Powf(a, _)
            | Node::Exp(a)
            | Node::Ln(a)
            | Node::Sqrt(a)
            | Node::Sin(a)
            | Node::Cos(a) => a.arity(),
            Node::Integral { upper, .. } => upper.arity(),
        }
    }

    /// Replaces `var(i)` by `args[i]`.
    pub fn subst(&self, args: &[Expr]) -> Expr {
        match &*self.0 {
            Node::Const(_) => self.clone(),
            Node::Var(i) => args.get(*i).cloned().unwrap_or_else(|| self.clone()),
            Node::Add(a, b) => a.subst(args) + b.subst(args),
            Node::Sub(a, b) => a.subst(args) - b.subst(args),
            Node::Mul(a, b) => a.subst(args) * b.subst(args),
            Node::Div(a, b) => a.subst(args) / b.subst(args),
            Node::Neg(a) => -a.subst(args),
            Node::Powi(a, n) => a.subst(args).powi(*n),
            Node::Powf(a, r) => a.subst(args).powf(*r),
            Node::Exp(a) => a.subst(args).exp(),
            Node::Ln(a) => a.subst(args).ln(),
            Node::Sqrt(a) => a.subst(args).sqrt(),
            Node::Sin(a) => a.subst(args).sin(),
            Node::Cos(a) => a.subst(args).cos(),
            Node::Integral {
                integrand,
                lower,
                upper,
            } => Expr::integral(integrand.clone(), *lower, upper.subst(args)),
        }
    }

    /// Evaluates at a real point.
    pub fn eval_f64(&self, x: &[f64]) -> Result<f64, ExprError> {
        let v = match &*self.0 {
            Node::Const(c) => *c,
            Node::Var(i) => *x.get(*i).ok_or(ExprError::UnboundVariable {
                index: *i,
                available: x.len(),
            })?,
            Node::Add(a, b) => a.eval_f64(x)? + b.eval_f64(x)?,
            Node::Sub(a, b) => a.eval_f64(x)? - b.eval_f64(x)?,
            Node::Mul(a, b) => a.eval_f64(x)? * b.eval_f64(x)?,
            Node::Div(a, b) => {
                let d = b.eval_f64(x)?;
                if d == 0.0 {
                    return Err(ExprError::Domain { op: "div", value: d });
                }
                a.eval_f64(x)? / d
            }
            Node::Neg(a) => -a.eval_f64(x)?,
            Node::Powi(a, n) => a.eval_f64(x)?.powi(*n),
            Node::Powf(a, r) => {
                let b = a.eval_f64(x)?;
                if b <= 0.0 {
                    return Err(ExprError::Domain { op: "pow", value: b });
                }
                b.powf(*r)
            }
            Node::Exp(a) => a.eval_f64(x)?.exp(),
            Node::Ln(a) => {
                let b = a.eval_f64(x)?;
                if b <= 0.0 {
                    return Err(ExprError::Domain { op: "ln", value: b });
                }
                b.ln()
            }
            Node::Sqrt(a) => {
                let b = a.eval_f64(x)?;
                if b < 0.0 {
                    return Err(ExprError::Domain { op: "sqrt", value: b });
                }
                b.sqrt()
            }
            Node::Sin(a) => a.eval_f64(x)?.sin(),
            Node::Cos(a) => a.eval_f64(x)?.cos(),
            Node::Integral {
                integrand,
                lower,
                upper,
            } => {
                let u = upper.eval_f64(x)?;
                integrate_f64(integrand, *lower, u)?
            }
        };
        Ok(v)
    }

    /// Evaluates on jets; `x[i]` binds `var(i)`.
    pub fn eval(&self, x: &[Jet]) -> Result<Jet, ExprError> {
        let cfg = x
            .first()
            .map(|j| j.config())
            .ok_or(ExprError::UnboundVariable {
                index: 0,
                available: 0,
            })?;
        self.eval_cfg(x, cfg)
    }

    fn eval_cfg(&self, x: &[Jet], cfg: JetConfig) -> Result<Jet, ExprError> {
        let j = match &*self.0 {
            Node::Const(c) => Jet::constant(*c, cfg),
            Node::Var(i) => x
                .get(*i)
                .cloned()
                .ok_or(ExprError::UnboundVariable {
                    index: *i,
                    available: x.len(),
                })?,
            Node::Add(a, b) => a.eval_cfg(x, cfg)?.try_add(&b.eval_cfg(x, cfg)?)?,
            Node::Sub(a, b) => a.eval_cfg(x, cfg)?.try_sub(&b.eval_cfg(x, cfg)?)?,
            Node::Mul(a, b) => a.eval_cfg(x, cfg)?.try_mul(&b.eval_cfg(x, cfg)?)?,
            Node::Div(a, b) => a.eval_cfg(x, cfg)?.try_div(&b.eval_cfg(x, cfg)?)?,
            Node::Neg(a) => -a.eval_cfg(x, cfg)?,
            Node::Powi(a, n) => a.eval_cfg(x, cfg)?.powi(*n)?,
            Node::Powf(a, r) => a.eval_cfg(x, cfg)?.powf(*r)?,
            Node::Exp(a) => a.eval_cfg(x, cfg)?.exp()?,
            Node::Ln(a) => a.eval_cfg(x, cfg)?.ln()?,
            Node::Sqrt(a) => a.eval_cfg(x, cfg)?.sqrt()?,
            Node::Sin(a) => a.eval_cfg(x, cfg)?.sin()?,
            Node::Cos(a) => a.eval_cfg(x, cfg)?.cos()?,
            Node::Integral {
                integrand,
                lower,
                upper,
            } => {
                let u = upper.eval_cfg(x, cfg)?;
                let value = integrate_f64(integrand, *lower, u.value())?;
                let mut taylor = vec![value];
                if cfg.order > 0 {
                    let c1 = JetConfig::new(1, cfg.order - 1)?;
                    let s = Jet::seed_variable(0, u.value(), c1)?;
                    let f = integrand.eval(&[s])?;
                    for (k, c) in f.coeffs().iter().enumerate() {
                        taylor.push(c / (k as f64 + 1.0));
                    }
                }
                u.compose_univariate(&taylor)
            }
        };
        Ok(j)
    }

    /// Parses an expression over the given variable names.
    ///
    /// Supports `+ - * / ^`, parentheses, numbers, `pi`, and the functions
    /// `exp ln log sqrt sin cos`. `int(f, a, u)` denotes `∫_a^u f(s) ds`
    /// with the integrand written in the reserved variable `s`.
    pub fn parse(src: &str, names: &[&str]) -> Result<Expr, ExprError> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
            names,
            integrand: false,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }
}

fn integrate_f64(integrand: &Expr, lower: f64, upper: f64) -> Result<f64, ExprError> {
    quad::integrate(
        |s| {
            integrand
                .eval_f64(&[s])
                .map_err(|e| crate::Error::Invalid(e.to_string()))
        },
        lower,
        upper,
        INTEGRAL_TOL,
    )
    .map_err(|e| ExprError::Quadrature(e.to_string()))
}

impl From<f64> for Expr {
    fn from(c: f64) -> Expr {
        Expr::constant(c)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            (Some(a), _) if a == 0.0 => rhs,
            (_, Some(b)) if b == 0.0 => self,
            _ => Expr::new(Node::Add(self, rhs)),
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a - b),
            (Some(a), _) if a == 0.0 => -rhs,
            (_, Some(b)) if b == 0.0 => self,
            _ => Expr::new(Node::Sub(self, rhs)),
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            (Some(a), _) | (_, Some(a)) if a == 0.0 => Expr::constant(0.0),
            (Some(a), _) if a == 1.0 => rhs,
            (_, Some(b)) if b == 1.0 => self,
            _ => Expr::new(Node::Mul(self, rhs)),
        }
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) if b != 0.0 => Expr::constant(a / b),
            (Some(a), _) if a == 0.0 => Expr::constant(0.0),
            (_, Some(b)) if b == 1.0 => self,
            _ => Expr::new(Node::Div(self, rhs)),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self.as_const() {
            Some(a) => Expr::constant(-a),
            None => Expr::new(Node::Neg(self)),
        }
    }
}

macro_rules! scalar_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                self.$m(Expr::constant(rhs))
            }
        }
        impl $tr<Expr> for f64 {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::constant(self).$m(rhs)
            }
        }
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                self.clone().$m(rhs.clone())
            }
        }
    )*};
}

scalar_ops!(Add add, Sub sub, Mul mul, Div div);

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(i) => write!(f, "x{i}"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Powi(a, n) => write!(f, "({a})^{n}"),
            Node::Powf(a, r) => write!(f, "({a})^{r}"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Ln(a) => write!(f, "ln({a})"),
            Node::Sqrt(a) => write!(f, "sqrt({a})"),
            Node::Sin(a) => write!(f, "sin({a})"),
            Node::Cos(a) => write!(f, "cos({a})"),
            Node::Integral {
                integrand,
                lower,
                upper,
            } => write!(f, "int({integrand}, {lower}, {upper})"),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    names: &'a [&'a str],
    integrand: bool,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ExprError {
        ExprError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = lhs + self.term()?;
            } else if self.eat(b'-') {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = lhs * self.unary()?;
            } else if self.eat(b'/') {
                lhs = lhs / self.unary()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exp = self.unary()?;
            return Ok(match exp.as_const() {
                Some(r) => base.powf(r),
                None => (exp * base.ln()).exp(),
            });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos])
                    .map_err(|_| self.err("invalid identifier"))?
                    .to_string();
                self.ident(&ident)
            }
            _ => Err(self.err("expected a number, identifier or `(`")),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        if self.pos < self.src.len() && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E')
        {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'-' || self.src[self.pos] == b'+')
            {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<f64>()
            .map(Expr::constant)
            .map_err(|_| self.err("malformed number"))
    }

    fn ident(&mut self, ident: &str) -> Result<Expr, ExprError> {
        let unary: Option<fn(&Expr) -> Expr> = match ident {
            "exp" => Some(Expr::exp),
            "ln" | "log" => Some(Expr::ln),
            "sqrt" => Some(Expr::sqrt),
            "sin" => Some(Expr::sin),
            "cos" => Some(Expr::cos),
            _ => None,
        };
        if let Some(f) = unary {
            self.expect(b'(')?;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(f(&arg));
        }
        if ident == "int" {
            self.expect(b'(')?;
            let outer = self.integrand;
            self.integrand = true;
            let integrand = self.expr()?;
            self.integrand = outer;
            self.expect(b',')?;
            let lower = self
                .expr()?
                .as_const()
                .ok_or_else(|| self.err("integral lower bound must be a constant"))?;
            self.expect(b',')?;
            let upper = self.expr()?;
            self.expect(b')')?;
            return Ok(Expr::integral(integrand, lower, upper));
        }
        if ident == "pi" {
            return Ok(Expr::constant(std::f64::consts::PI));
        }
        if self.integrand {
            if ident == "s" {
                return Ok(Expr::var(0));
            }
            return Err(ExprError::UnknownIdent(format!(
                "{ident} (integrands may only use `s`)"
            )));
        }
        match self.names.iter().position(|n| *n == ident) {
            Some(i) => Ok(Expr::var(i)),
            None => Err(ExprError::UnknownIdent(ident.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jets(pt: &[f64], order: usize) -> Vec<Jet> {
        Jet::seed_point(pt, order).unwrap()
    }

    #[test]
    fn parse_and_eval() {
        let e = Expr::parse("x^2*y - 3*sin(y) + exp(-x)/2", &["x", "y"]).unwrap();
        let v = e.eval_f64(&[1.5, -0.5]).unwrap();
        let want = 1.5f64.powi(2) * -0.5 - 3.0 * (-0.5f64).sin() + (-1.5f64).exp() / 2.0;
        assert!((v - want).abs() < 1e-14);
        let j = e.eval(&jets(&[1.5, -0.5], 2)).unwrap();
        assert!((j.value() - want).abs() < 1e-14);
        assert!((j.partial(&[1, 1]).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            Expr::parse("z + 1", &["x"]),
            Err(ExprError::UnknownIdent(_))
        ));
        assert!(matches!(
            Expr::parse("(x", &["x"]),
            Err(ExprError::Parse { .. })
        ));
        assert!(Expr::parse("1e-3*x", &["x"]).is_ok());
    }

    #[test]
    fn integral_value_and_derivatives() {
        // ∫_0^y sin(s) ds = 1 - cos y
        let e = Expr::parse("int(sin(s), 0, y)", &["y"]).unwrap();
        let y = 0.8;
        let j = e.eval(&jets(&[y], 4)).unwrap();
        assert!((j.value() - (1.0 - y.cos())).abs() < 1e-13);
        assert!((j.partial(&[1]).unwrap() - y.sin()).abs() < 1e-14);
        assert!((j.partial(&[2]).unwrap() - y.cos()).abs() < 1e-14);
        assert!((j.partial(&[4]).unwrap() + y.cos()).abs() < 1e-13);
    }

    #[test]
    fn nested_integral() {
        // ∫_0^y exp(-2 ∫_0^s 1 dt) ds = (1 - e^{-2y})/2
        let inner = Expr::integral(Expr::constant(1.0), 0.0, Expr::var(0));
        let e = Expr::integral((-2.0 * inner).exp(), 0.0, Expr::var(0));
        let y = 0.6;
        let j = e.eval(&jets(&[y], 3)).unwrap();
        assert!((j.value() - (1.0 - (-2.0 * y).exp()) / 2.0).abs() < 1e-13);
        assert!((j.partial(&[2]).unwrap() + 2.0 * (-2.0 * y).exp()).abs() < 1e-12);
    }

    #[test]
    fn subst_composes() {
        let f = Expr::parse("x*y", &["x", "y"]).unwrap();
        let g = f.subst(&[Expr::var(1), Expr::constant(2.0)]);
        assert_eq!(g.eval_f64(&[0.0, 3.0]).unwrap(), 6.0);
    }

    #[test]
    fn domain_error_reported() {
        let e = Expr::parse("ln(x)", &["x"]).unwrap();
        assert!(e.eval_f64(&[-1.0]).is_err());
        assert!(e.eval(&jets(&[-1.0], 1)).is_err());
    }
}
