//! Real polynomials in a fixed number of variables, with exact jet
//! evaluation and roots in a chosen variable.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jets::Jet;

/// Sparse polynomial; keys are exponent vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Poly {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Poly {
        let mut p = Poly::zero(nvars);
        p.insert(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Poly {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Poly::zero(nvars);
        p.insert(e, 1.0);
        p
    }

    /// Handles for all variables at once.
    pub fn vars(nvars: usize) -> Vec<Poly> {
        (0..nvars).map(|i| Poly::var(nvars, i)).collect()
    }

    fn insert(&mut self, e: Vec<u32>, c: f64) {
        let v = self.terms.get(&e).copied().unwrap_or(0.0) + c;
        if v == 0.0 {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, v);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            out.insert(e.clone(), c * s);
        }
        out
    }

    pub fn map_coefficients<F: Fn(f64) -> f64>(&self, f: F) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            out.insert(e.clone(), f(*c));
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::constant(self.nvars, 1.0);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Degree in variable `i`.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    /// Total degree.
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Partial derivative in variable `i`.
    pub fn derivative(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                out.insert(f, c * e[i] as f64);
            }
        }
        out
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(x)
                    .fold(*c, |acc, (&k, v)| acc * v.powi(k as i32))
            })
            .sum()
    }

    /// Evaluates on jets sharing one configuration.
    pub fn eval(&self, x: &[Jet]) -> Result<Jet> {
        if x.len() != self.nvars {
            return Err(Error::ChartMismatch {
                expected: self.nvars,
                got: x.len(),
            });
        }
        let cfg = x[0].config();
        let mut pows: Vec<Vec<Jet>> = Vec::with_capacity(self.nvars);
        for (i, xi) in x.iter().enumerate() {
            let top = self.degree_in(i) as usize;
            let mut row = vec![Jet::constant(1.0, cfg)];
            for k in 1..=top {
                let next = &row[k - 1] * xi;
                row.push(next);
            }
            pows.push(row);
        }
        let mut out = Jet::zero(cfg);
        for (e, c) in &self.terms {
            let mut t = Jet::constant(*c, cfg);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = &t * &pows[i][k as usize];
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Coefficients (ascending powers) of the polynomial in variable `i`
    /// once the other variables are fixed to `x` (entry `i` is ignored).
    pub fn coefficients_in(&self, i: usize, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.degree_in(i) as usize + 1];
        for (e, c) in &self.terms {
            let v = e
                .iter()
                .zip(x)
                .enumerate()
                .filter(|(j, _)| *j != i)
                .fold(*c, |acc, (_, (&k, v))| acc * v.powi(k as i32));
            out[e[i] as usize] += v;
        }
        out
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.insert(e.clone(), *c);
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self + &o.scale(-1.0)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.insert(e, c1 * c2);
            }
        }
        out
    }
}

macro_rules! owned_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr for Poly {
            type Output = Poly;
            fn $f(self, o: Poly) -> Poly {
                (&self).$f(&o)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $f(self, o: &Poly) -> Poly {
                (&self).$f(o)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul<Poly> for f64 {
    type Output = Poly;
    fn mul(self, p: Poly) -> Poly {
        p.scale(self)
    }
}

/// Complex roots `(re, im)` of `Σ c_k t^k` from companion-matrix
/// eigenvalues. Leading zero coefficients are dropped.
pub fn univariate_roots(coeffs: &[f64]) -> Vec<(f64, f64)> {
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let mut top = coeffs.len() - 1;
    while top > 0 && coeffs[top].abs() <= 1e-300 * scale {
        top -= 1;
    }
    // zero roots factor out exactly
    let low = coeffs.iter().position(|c| *c != 0.0).unwrap_or(0);
    let mut out = vec![(0.0, 0.0); low];
    let c = &coeffs[low..=top];
    let n = c.len() - 1;
    if n == 0 {
        return out;
    }
    let lead = c[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    for z in m.complex_eigenvalues().iter() {
        out.push((z.re, z.im));
    }
    out
}

/// Newton polish of a real root of `Σ c_k t^k`.
pub fn polish(coeffs: &[f64], mut t: f64) -> f64 {
    for _ in 0..8 {
        let (mut p, mut dp) = (0.0, 0.0);
        for c in coeffs.iter().rev() {
            dp = dp * t + p;
            p = p * t + c;
        }
        if dp == 0.0 {
            break;
        }
        let step = p / dp;
        t -= step;
        if step.abs() <= 1e-16 * t.abs().max(1.0) {
            break;
        }
    }
    t
}
