//! Toda potentials given parametrically: `(X, Y, Z, U)` as functions of
//! three auxiliary parameters.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::expr::Expr;
use crate::fields::{seed, Chart};
use crate::jets::{invert_map, offset, Jet};

use super::toda_residual_jet;

pub type ParamMap = dyn Fn(&[Jet]) -> Result<[Jet; 4]> + Send + Sync;

/// `(X, Y, Z, U)` over a parameter chart.
#[derive(Clone)]
pub struct ParametricTodaSolution {
    pub name: String,
    pub chart: Chart,
    pub map: Arc<ParamMap>,
}

impl std::fmt::Debug for ParametricTodaSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ParametricTodaSolution({})", self.name)
    }
}

impl ParametricTodaSolution {
    pub fn new<F>(name: &str, chart: Chart, map: F) -> ParametricTodaSolution
    where
        F: Fn(&[Jet]) -> Result<[Jet; 4]> + Send + Sync + 'static,
    {
        ParametricTodaSolution {
            name: name.to_string(),
            chart,
            map: Arc::new(map),
        }
    }

    /// The solution built from four expressions in the parameters.
    pub fn from_exprs(name: &str, chart: Chart, e: [Expr; 4]) -> ParametricTodaSolution {
        ParametricTodaSolution::new(name, chart, move |s| {
            Ok([e[0].eval(s)?, e[1].eval(s)?, e[2].eval(s)?, e[3].eval(s)?])
        })
    }

    /// `(X, Y, Z, U)` values at a parameter point.
    pub fn values(&self, params: &[f64]) -> Result<[f64; 4]> {
        let m = (self.map)(&seed(params, 0)?)?;
        Ok([m[0].value(), m[1].value(), m[2].value(), m[3].value()])
    }

    /// The point `(X, Y, Z)` and `U` as a jet in `(X, Y, Z)` of the given
    /// order, obtained by inverting the parametrization on jets.
    pub fn u_jet(&self, params: &[f64], order: usize) -> Result<([f64; 3], Jet)> {
        let s = seed(params, order)?;
        let m = (self.map)(&s)?;
        let psi = invert_map(&m[..3]).map_err(|_| Error::Degenerate {
            what: "Jacobian of (X, Y, Z)",
            value: 0.0,
        })?;
        let psi = offset(&psi, params);
        let u = m[3].compose(&psi)?;
        Ok(([m[0].value(), m[1].value(), m[2].value()], u))
    }
}

/// Toda residual at a parameter point, through the chain rule.
pub fn parametric_residual(sol: &ParametricTodaSolution, epsilon: f64, params: &[f64]) -> Result<f64> {
    let (_, u) = sol.u_jet(params, 2)?;
    toda_residual_jet(&u, epsilon)
}

fn c(v: f64) -> Expr {
    Expr::constant(v)
}

/// The family with `A = 0` and free `B(y)`, on parameters `(y, p, Z)`:
/// `X = −8e^{−2∫B}Z³p/(Z²p²+4)²`,
/// `Y = ∫e^{−2∫B}dy + e^{−2∫B}(8Z² − 2Z⁴p²)/(Z²p²+4)²`,
/// `U = ln((Z²p²+4)³/(64Z²)) + 4∫B`, with antiderivatives based at 0.
/// `b` is written in one variable.
pub fn toda_implicit1(b: &Expr, chart: Chart) -> ParametricTodaSolution {
    let y = Expr::var(0);
    let p = Expr::var(1);
    let z = Expr::var(2);
    let ib = Expr::integral(b.clone(), 0.0, y.clone());
    let e = (c(-2.0) * ib.clone()).exp();
    let g = Expr::integral(e.clone(), 0.0, y);
    let z2 = z.powi(2);
    let den = z2.clone() * p.powi(2) + c(4.0);
    let x = -(c(8.0) * e.clone() * z.powi(3) * p.clone()) / den.powi(2);
    let yy = g + e * (c(8.0) * z2.clone() - c(2.0) * z.powi(4) * p.powi(2)) / den.powi(2);
    let u = (den.powi(3) / (c(64.0) * z2)).ln() + c(4.0) * ib;
    ParametricTodaSolution::from_exprs("toda_implicit1", chart, [x, yy, z, u])
}

/// The same family rewritten with `G = ∫e^{−2∫B}` and `T = 2Z²/(Z²p²+4)`,
/// on parameters `(y, T, Z)`:
/// `e^U = Z⁴/(8T³G′²)`, `Y = G + G′T(4T/Z² − 1)`,
/// `X = −(4T⁴G′²/Z²·(2/T − 4/Z²))^{1/2}` (the sign of `p > 0`).
/// `g` and `g_prime` are written in one variable.
pub fn toda_impl2(g: &Expr, g_prime: &Expr, chart: Chart) -> ParametricTodaSolution {
    let t = Expr::var(1);
    let z = Expr::var(2);
    let y = [Expr::var(0)];
    let (g, gp) = (g.subst(&y), g_prime.subst(&y));
    let z2 = z.powi(2);
    let eu = z.powi(4) / (c(8.0) * t.powi(3) * gp.powi(2));
    let yy = g + gp.clone() * t.clone() * (c(4.0) * t.clone() / z2.clone() - c(1.0));
    let x2 = c(4.0) * t.powi(4) * gp.powi(2) / z2.clone() * (c(2.0) / t - c(4.0) / z2);
    ParametricTodaSolution::from_exprs("toda_impl2", chart, [-x2.sqrt(), yy, z, eu.ln()])
}
