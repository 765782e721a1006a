//! Truncated multivariate Taylor expansions ("jets").
//!
//! A [`Jet`] stores the Taylor coefficients of a scalar function at a point,
//! up to a fixed total degree, in graded-lexicographic order. Arithmetic on
//! jets is exact through the truncation order, so every partial derivative up
//! to that order can be read off with no finite-difference error.
//!
//! Operations that lose an order (differentiation) return a jet with a
//! smaller order. Mixing jets of different configurations is an error and is
//! never resolved by silent truncation.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

/// Largest supported number of independent variables.
pub const MAX_DIM: usize = 8;
/// Largest supported truncation order.
pub const MAX_ORDER: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("invalid jet configuration: dim={dim}, order={order}")]
    InvalidConfig { dim: usize, order: usize },
    #[error("jet configuration mismatch: {left} vs {right}")]
    ConfigMismatch { left: JetConfig, right: JetConfig },
    #[error("variable index {index} out of range for dim {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("division by a jet with zero constant term")]
    DivisionByZero,
    #[error("domain error in {op} at {value}")]
    Domain { op: &'static str, value: f64 },
    #[error("multi-index of degree {degree} exceeds jet order {order}")]
    OrderExceeded { degree: usize, order: usize },
    #[error("multi-index has {got} entries, expected {dim}")]
    BadMultiIndex { got: usize, dim: usize },
    #[error("composition needs {expected} inner jets, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("singular linear part in map inversion")]
    SingularMap,
    #[error("non-finite coefficient produced by {op}")]
    NonFinite { op: &'static str },
}

/// Number of variables and truncation order shared by a family of jets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JetConfig {
    pub dim: usize,
    pub order: usize,
}

impl JetConfig {
    pub fn new(dim: usize, order: usize) -> Result<Self, JetError> {
        if dim == 0 || dim > MAX_DIM || order > MAX_ORDER {
            return Err(JetError::InvalidConfig { dim, order });
        }
        Ok(Self { dim, order })
    }

    /// Number of multi-indices of total degree at most `order`.
    pub fn len(&self) -> usize {
        binomial(self.dim + self.order, self.order)
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for JetConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(dim={}, order={})", self.dim, self.order)
    }
}

fn binomial(n: usize, k: usize) -> usize {
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Multi-index bookkeeping for one configuration.
pub(crate) struct Layout {
    config: JetConfig,
    exps: Vec<u8>,
    degrees: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    mul_table: Vec<(u32, u32, u32)>,
    /// For each variable i and each coefficient k of the order-1-lower layout,
    /// the index of (alpha_k + e_i) in this layout.
    shift: Vec<Vec<usize>>,
}

impl Layout {
    fn build(config: JetConfig) -> Layout {
        let dim = config.dim;
        let mut all: Vec<Vec<u8>> = Vec::with_capacity(config.len());
        for deg in 0..=config.order {
            let mut cur = vec![0u8; dim];
            push_degree(&mut all, &mut cur, 0, deg);
        }
        let mut index = HashMap::with_capacity(all.len());
        let mut exps = Vec::with_capacity(all.len() * dim);
        let mut degrees = Vec::with_capacity(all.len());
        for (k, a) in all.iter().enumerate() {
            index.insert(a.clone(), k);
            exps.extend_from_slice(a);
            degrees.push(a.iter().map(|&e| e as usize).sum());
        }
        let mut mul_table = Vec::new();
        let mut sum = vec![0u8; dim];
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                if degrees[i] + degrees[j] > config.order {
                    continue;
                }
                for t in 0..dim {
                    sum[t] = a[t] + b[t];
                }
                let k = index[&sum];
                mul_table.push((i as u32, j as u32, k as u32));
            }
        }
        let mut shift = Vec::new();
        if config.order > 0 {
            let lower = binomial(dim + config.order - 1, config.order - 1);
            for v in 0..dim {
                let mut row = Vec::with_capacity(lower);
                for a in all.iter().take(lower) {
                    let mut b = a.clone();
                    b[v] += 1;
                    row.push(index[&b]);
                }
                shift.push(row);
            }
        }
        Layout {
            config,
            exps,
            degrees,
            index,
            mul_table,
            shift,
        }
    }

    fn exponent(&self, k: usize) -> &[u8] {
        let d = self.config.dim;
        &self.exps[k * d..(k + 1) * d]
    }
}

fn push_degree(out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, pos: usize, remaining: usize) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining as u8;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        cur[pos] = e as u8;
        push_degree(out, cur, pos + 1, remaining - e);
    }
    cur[pos] = 0;
}

fn layout_for(config: JetConfig) -> Arc<Layout> {
    static CACHE: OnceLock<Mutex<HashMap<JetConfig, Arc<Layout>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("jet layout cache poisoned");
    guard
        .entry(config)
        .or_insert_with(|| Arc::new(Layout::build(config)))
        .clone()
}

/// Truncated Taylor expansion of a scalar at a point.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("config", &self.layout.config)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.config() == other.config() && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn zero(config: JetConfig) -> Jet {
        Jet::constant(0.0, config)
    }

    pub fn constant(value: f64, config: JetConfig) -> Jet {
        let layout = layout_for(config);
        let mut coeffs = vec![0.0; config.len()];
        coeffs[0] = value;
        Jet { layout, coeffs }
    }

    /// Jet of the coordinate function `x_i` at a point where `x_i = value`.
    pub fn seed_variable(i: usize, value: f64, config: JetConfig) -> Result<Jet, JetError> {
        if i >= config.dim {
            return Err(JetError::IndexOutOfRange {
                index: i,
                dim: config.dim,
            });
        }
        let mut j = Jet::constant(value, config);
        if config.order >= 1 {
            j.coeffs[1 + i] = 1.0;
        }
        Ok(j)
    }

    /// Seeds every coordinate of `point` as an independent variable.
    pub fn seed_point(point: &[f64], order: usize) -> Result<Vec<Jet>, JetError> {
        let config = JetConfig::new(point.len(), order)?;
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet::seed_variable(i, v, config))
            .collect()
    }

    /// Builds a jet from raw graded-lex coefficients.
    pub fn from_coeffs(config: JetConfig, coeffs: Vec<f64>) -> Result<Jet, JetError> {
        if coeffs.len() != config.len() {
            return Err(JetError::InvalidConfig {
                dim: config.dim,
                order: config.order,
            });
        }
        Ok(Jet {
            layout: layout_for(config),
            coeffs,
        })
    }

    pub fn config(&self) -> JetConfig {
        self.layout.config
    }

    pub fn order(&self) -> usize {
        self.layout.config.order
    }

    pub fn dim(&self) -> usize {
        self.layout.config.dim
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Multi-index of the k-th stored coefficient.
    pub fn multi_index(&self, k: usize) -> Vec<usize> {
        self.layout.exponent(k).iter().map(|&e| e as usize).collect()
    }

    fn position(&self, alpha: &[usize]) -> Result<usize, JetError> {
        if alpha.len() != self.dim() {
            return Err(JetError::BadMultiIndex {
                got: alpha.len(),
                dim: self.dim(),
            });
        }
        let degree: usize = alpha.iter().sum();
        if degree > self.order() {
            return Err(JetError::OrderExceeded {
                degree,
                order: self.order(),
            });
        }
        let key: Vec<u8> = alpha.iter().map(|&a| a as u8).collect();
        Ok(self.layout.index[&key])
    }

    /// Taylor coefficient of the monomial `x^alpha`.
    pub fn coeff(&self, alpha: &[usize]) -> Result<f64, JetError> {
        Ok(self.coeffs[self.position(alpha)?])
    }

    /// The partial derivative `∂^alpha f` at the expansion point (`alpha! * coeff`).
    pub fn partial(&self, alpha: &[usize]) -> Result<f64, JetError> {
        let c = self.coeff(alpha)?;
        let fact: f64 = alpha.iter().map(|&a| factorial(a)).product();
        Ok(c * fact)
    }

    /// First derivative value `∂f/∂x_i` at the point.
    pub fn d1(&self, i: usize) -> f64 {
        if self.order() == 0 {
            return 0.0;
        }
        self.coeffs[1 + i]
    }

    /// The jet of `∂f/∂x_i`, one order lower.
    pub fn derivative(&self, i: usize) -> Result<Jet, JetError> {
        let cfg = self.config();
        if i >= cfg.dim {
            return Err(JetError::IndexOutOfRange {
                index: i,
                dim: cfg.dim,
            });
        }
        if cfg.order == 0 {
            return Err(JetError::OrderExceeded {
                degree: 1,
                order: 0,
            });
        }
        let lower = JetConfig {
            dim: cfg.dim,
            order: cfg.order - 1,
        };
        let layout = layout_for(lower);
        let shift = &self.layout.shift[i];
        let mut coeffs = Vec::with_capacity(lower.len());
        for (k, &src) in shift.iter().enumerate() {
            let e = layout.exponent(k)[i] as f64 + 1.0;
            coeffs.push(e * self.coeffs[src]);
        }
        Ok(Jet { layout, coeffs })
    }

    /// Restriction to a lower truncation order.
    pub fn truncate(&self, order: usize) -> Result<Jet, JetError> {
        let cfg = self.config();
        if order > cfg.order {
            return Err(JetError::OrderExceeded {
                degree: order,
                order: cfg.order,
            });
        }
        if order == cfg.order {
            return Ok(self.clone());
        }
        let lower = JetConfig {
            dim: cfg.dim,
            order,
        };
        Ok(Jet {
            layout: layout_for(lower),
            coeffs: self.coeffs[..lower.len()].to_vec(),
        })
    }

    fn check(&self, other: &Jet) -> Result<(), JetError> {
        if self.config() != other.config() {
            return Err(JetError::ConfigMismatch {
                left: self.config(),
                right: other.config(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Jet {
            layout: self.layout.clone(),
            coeffs,
        })
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Jet {
            layout: self.layout.clone(),
            coeffs,
        })
    }

    pub fn try_mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check(other)?;
        let mut out = vec![0.0; self.coeffs.len()];
        let a = &self.coeffs;
        let b = &other.coeffs;
        for &(i, j, k) in &self.layout.mul_table {
            let ai = a[i as usize];
            if ai != 0.0 {
                out[k as usize] += ai * b[j as usize];
            }
        }
        Ok(Jet {
            layout: self.layout.clone(),
            coeffs: out,
        })
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check(other)?;
        self.try_mul(&other.recip()?)
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut j = self.clone();
        j.coeffs[0] += s;
        j
    }

    /// Sum of `f^(k)(a0)/k! * n^k` where `n` is the nilpotent part and
    /// `taylor[k]` is the k-th Taylor coefficient of the outer function.
    pub fn compose_univariate(&self, taylor: &[f64]) -> Jet {
        let order = self.order();
        let mut nil = self.clone();
        nil.coeffs[0] = 0.0;
        let mut out = Jet::constant(taylor.first().copied().unwrap_or(0.0), self.config());
        let mut power = Jet::constant(1.0, self.config());
        for k in 1..=order.min(taylor.len().saturating_sub(1)) {
            power = &power * &nil;
            if taylor[k] != 0.0 {
                for (o, p) in out.coeffs.iter_mut().zip(&power.coeffs) {
                    *o += taylor[k] * p;
                }
            }
        }
        out
    }

    fn finite(self, op: &'static str) -> Result<Jet, JetError> {
        if self.coeffs.iter().all(|c| c.is_finite()) {
            Ok(self)
        } else {
            Err(JetError::NonFinite { op })
        }
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if a == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let n = self.order();
        let mut t = Vec::with_capacity(n + 1);
        let mut c = 1.0 / a;
        for _ in 0..=n {
            t.push(c);
            c *= -1.0 / a;
        }
        self.compose_univariate(&t).finite("recip")
    }

    pub fn exp(&self) -> Result<Jet, JetError> {
        let e = self.value().exp();
        let t: Vec<f64> = (0..=self.order()).map(|k| e / factorial(k)).collect();
        self.compose_univariate(&t).finite("exp")
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if !(a > 0.0) {
            return Err(JetError::Domain { op: "ln", value: a });
        }
        let mut t = vec![a.ln()];
        for k in 1..=self.order() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            t.push(sign / (k as f64 * a.powi(k as i32)));
        }
        self.compose_univariate(&t).finite("ln")
    }

    /// `x^r` for real `r`; requires a positive constant term unless `r` is a
    /// non-negative integer.
    pub fn powf(&self, r: f64) -> Result<Jet, JetError> {
        if r.fract() == 0.0 && r.abs() <= i32::MAX as f64 {
            return self.powi(r as i32);
        }
        let a = self.value();
        if !(a > 0.0) {
            return Err(JetError::Domain { op: "pow", value: a });
        }
        let mut t = Vec::with_capacity(self.order() + 1);
        let mut falling = 1.0;
        for k in 0..=self.order() {
            t.push(falling * a.powf(r - k as f64) / factorial(k));
            falling *= r - k as f64;
        }
        self.compose_univariate(&t).finite("pow")
    }

    pub fn powi(&self, n: i32) -> Result<Jet, JetError> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut result = Jet::constant(1.0, self.config());
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if !(a > 0.0) {
            return Err(JetError::Domain { op: "sqrt", value: a });
        }
        self.powf(0.5)
    }

    pub fn sin(&self) -> Result<Jet, JetError> {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let t: Vec<f64> = (0..=self.order())
            .map(|k| cycle[k % 4] / factorial(k))
            .collect();
        self.compose_univariate(&t).finite("sin")
    }

    pub fn cos(&self) -> Result<Jet, JetError> {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let t: Vec<f64> = (0..=self.order())
            .map(|k| cycle[k % 4] / factorial(k))
            .collect();
        self.compose_univariate(&t).finite("cos")
    }

    /// Substitutes `inner[i]` for the i-th variable.
    ///
    /// The inner jets must have their constant terms at this jet's expansion
    /// point; only their deviations enter the Taylor polynomial. The result
    /// lives in the inner jets' configuration.
    pub fn compose(&self, inner: &[Jet]) -> Result<Jet, JetError> {
        if inner.len() != self.dim() {
            return Err(JetError::ArityMismatch {
                expected: self.dim(),
                got: inner.len(),
            });
        }
        let cfg = inner[0].config();
        for j in inner {
            if j.config() != cfg {
                return Err(JetError::ConfigMismatch {
                    left: cfg,
                    right: j.config(),
                });
            }
        }
        let top = self.order().min(cfg.order);
        let mut powers: Vec<Vec<Jet>> = Vec::with_capacity(inner.len());
        for j in inner {
            let mut d = j.clone();
            d.coeffs[0] = 0.0;
            let mut row = vec![Jet::constant(1.0, cfg)];
            for e in 1..=top {
                let next = &row[e - 1] * &d;
                row.push(next);
            }
            powers.push(row);
        }
        let mut out = Jet::zero(cfg);
        for k in 0..self.coeffs.len() {
            let c = self.coeffs[k];
            if c == 0.0 || self.layout.degrees[k] > top {
                continue;
            }
            let alpha = self.layout.exponent(k);
            let mut term: Option<Jet> = None;
            for (v, &e) in alpha.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let p = &powers[v][e as usize];
                term = Some(match term {
                    None => p.clone(),
                    Some(t) => &t * p,
                });
            }
            match term {
                None => out.coeffs[0] += c,
                Some(t) => {
                    for (o, x) in out.coeffs.iter_mut().zip(&t.coeffs) {
                        *o += c * x;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Inverts a local diffeomorphism given by jets `phi[i]` in n variables.
///
/// Returns jets `psi[i]` in the target variables, expanded at `phi(point)`,
/// whose constant terms are the source point. Each Newton sweep gains one
/// order, so `order + 1` sweeps give the exact truncated inverse.
pub fn invert_map(phi: &[Jet]) -> Result<Vec<Jet>, JetError> {
    let n = phi.len();
    if n == 0 {
        return Err(JetError::ArityMismatch {
            expected: 1,
            got: 0,
        });
    }
    let cfg = phi[0].config();
    if cfg.dim != n {
        return Err(JetError::ArityMismatch {
            expected: cfg.dim,
            got: n,
        });
    }
    for j in phi {
        if j.config() != cfg {
            return Err(JetError::ConfigMismatch {
                left: cfg,
                right: j.config(),
            });
        }
    }
    if cfg.order == 0 {
        return Err(JetError::SingularMap);
    }
    let mut lin = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            lin[(i, k)] = phi[i].coeffs[1 + k];
        }
    }
    let inv = lin.try_inverse().ok_or(JetError::SingularMap)?;
    if !inv.iter().all(|v| v.is_finite()) {
        return Err(JetError::SingularMap);
    }
    // The source point is unknown to the jets; psi starts at zero offset and
    // we add the base point afterwards through the phi constants only.
    let targets: Vec<Jet> = (0..n)
        .map(|i| Jet::seed_variable(i, phi[i].value(), cfg))
        .collect::<Result<_, _>>()?;
    let mut psi: Vec<Jet> = (0..n)
        .map(|i| {
            let mut acc = Jet::zero(cfg);
            for k in 0..n {
                let mut d = targets[k].clone();
                d.coeffs[0] = 0.0;
                acc = &acc + &d.scale(inv[(i, k)]);
            }
            acc
        })
        .collect();
    for _ in 0..=cfg.order {
        // phi composed with psi, where psi has zero constant term relative to
        // the (implicit) source point
        let comp: Vec<Jet> = phi
            .iter()
            .map(|f| f.compose(&psi))
            .collect::<Result<_, _>>()?;
        let resid: Vec<Jet> = comp
            .iter()
            .zip(&targets)
            .map(|(c, t)| c - t)
            .collect();
        psi = (0..n)
            .map(|i| {
                let mut acc = psi[i].clone();
                for k in 0..n {
                    acc = &acc - &resid[k].scale(inv[(i, k)]);
                }
                acc
            })
            .collect();
    }
    Ok(psi)
}

/// Adds a base point to jets produced by [`invert_map`], giving absolute
/// source coordinates.
pub fn offset(jets: &[Jet], base: &[f64]) -> Vec<Jet> {
    jets.iter()
        .zip(base)
        .map(|(j, b)| {
            let mut k = j.clone();
            k.coeffs[0] = *b;
            k
        })
        .collect()
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// Operation selector for [`jet_arith`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
    Exp,
    Ln,
    Pow(f64),
    Sqrt,
    Sin,
    Cos,
}

/// Checked arithmetic entry point used where typed errors are wanted.
pub fn jet_arith(op: JetOp, args: &[&Jet]) -> Result<Jet, JetError> {
    let need = match op {
        JetOp::Add | JetOp::Sub | JetOp::Mul | JetOp::Div => 2,
        _ => 1,
    };
    if args.len() != need {
        return Err(JetError::ArityMismatch {
            expected: need,
            got: args.len(),
        });
    }
    let a = args[0];
    match op {
        JetOp::Add => a.try_add(args[1]),
        JetOp::Sub => a.try_sub(args[1]),
        JetOp::Mul => a.try_mul(args[1]),
        JetOp::Div => a.try_div(args[1]),
        JetOp::Exp => a.exp(),
        JetOp::Ln => a.ln(),
        JetOp::Pow(r) => a.powf(r),
        JetOp::Sqrt => a.sqrt(),
        JetOp::Sin => a.sin(),
        JetOp::Cos => a.cos(),
    }
}

// Operator sugar. These panic on configuration mismatch; use the `try_*`
// methods or `jet_arith` where the operands come from untrusted sources.

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                self.$f(rhs).expect("jet configuration mismatch")
            }
        }
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$f(&rhs).expect("jet configuration mismatch")
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$f(rhs).expect("jet configuration mismatch")
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$f(&rhs).expect("jet configuration mismatch")
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);
binop!(Div, div, try_div);

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.add_scalar(rhs)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.add_scalar(rhs)
    }
}
