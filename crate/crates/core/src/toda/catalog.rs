//! Named Toda solutions with their boxes, signs and polynomial relations.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::expr::Expr;
use crate::fields::{Chart, Guard, TensorField};
use crate::jets::Jet;

use super::implicit::ImplicitTodaSolution;
use super::parametric::{toda_impl2, toda_implicit1, ParametricTodaSolution};
use super::poly::{polish, univariate_roots, Poly};
use super::tod::appendix_b_u;
use super::toda_residual;

/// How `U` is obtained.
#[derive(Debug, Clone)]
pub enum TodaSolution {
    Implicit(ImplicitTodaSolution),
    Closed { u: Expr, chart: Chart },
}

impl TodaSolution {
    pub fn chart(&self) -> &Chart {
        match self {
            TodaSolution::Implicit(s) => &s.chart,
            TodaSolution::Closed { chart, .. } => chart,
        }
    }

    /// `U` as a jet in `(X, Y, Z)`.
    pub fn eval(&self, x: &[Jet]) -> Result<Jet> {
        match self {
            TodaSolution::Implicit(s) => s.eval(x),
            TodaSolution::Closed { u, .. } => Ok(u.eval(x)?),
        }
    }

    pub fn field(&self) -> TensorField {
        let s = Arc::new(self.clone());
        TensorField::scalar(3, move |x| s.eval(x))
    }
}

#[derive(Debug, Clone)]
pub struct TodaCatalogEntry {
    pub name: &'static str,
    pub solution: TodaSolution,
    pub epsilon: f64,
    pub note: &'static str,
    /// Polynomial `f(e^U, X, Y, Z)` vanishing on the solution.
    pub relation: Option<Poly>,
    /// A parametrization of the same solution, when one is known.
    pub parametric: Option<ParametricTodaSolution>,
}

impl TodaCatalogEntry {
    pub fn chart(&self) -> &Chart {
        self.solution.chart()
    }

    pub fn residual(&self, point: &[f64]) -> Result<f64> {
        toda_residual(&self.solution.field(), self.epsilon, point)
    }
}

fn vars() -> [Poly; 4] {
    let v = Poly::vars(4);
    [v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()]
}

fn k(c: f64) -> Poly {
    Poly::constant(4, c)
}

/// The single positive real root of `poly` at `p`.
fn unique_positive_root(poly: &Poly, p: [f64; 3]) -> Result<f64> {
    let c = poly.coefficients_in(0, &[0.0, p[0], p[1], p[2]]);
    let pos: Vec<f64> = univariate_roots(&c)
        .into_iter()
        .filter(|(re, im)| *re > 0.0 && im.abs() <= 1e-9 * re.max(1.0))
        .map(|(re, _)| polish(&c, re))
        .collect();
    match pos.as_slice() {
        [w] => Ok(*w),
        [] => Err(Error::NoRoot),
        _ => Err(Error::Invalid(format!("{} positive roots at the seed", pos.len()))),
    }
}

/// Restricts sampling to points the continuation reaches.
fn reachable(chart: Chart, sol: &ImplicitTodaSolution) -> Chart {
    let s = sol.clone();
    chart.with_guard(Guard::new("tracked root", 0.0, move |x| {
        Ok(if s.root_at(x).is_ok() { 1.0 } else { 0.0 })
    }))
}

fn implicit(
    name: &'static str,
    poly: Poly,
    epsilon: f64,
    chart: Chart,
    seed: [f64; 3],
    seed_w: f64,
) -> Result<ImplicitTodaSolution> {
    let mut s = ImplicitTodaSolution::new(name, poly, epsilon, chart, seed, seed_w)?;
    s.chart = reachable(s.chart.clone(), &s);
    Ok(s)
}

/// `w(wX² − Z²)³ + Z⁴`.
pub fn example_1_poly() -> Poly {
    let [w, x, _, z] = vars();
    let a = (&(&w * &(&x * &x)) - &(&z * &z)).pow(3);
    &(&w * &a) + &z.pow(4)
}

/// `4Y²w(wX² − Z²)³ + (2w²X⁴ − 3wX²Z² + Z⁴ + 2Z²)²`.
pub fn example_int_poly() -> Poly {
    let [w, x, y, z] = vars();
    let (x2, z2) = (&x * &x, &z * &z);
    let a = (&(&w * &x2) - &z2).pow(3);
    let b = k(2.0) * w.pow(2) * x2.pow(2) - k(3.0) * (&w * &x2) * z2.clone() + z2.pow(2) + k(2.0) * z2;
    k(4.0) * y.pow(2) * w * a + b.pow(2)
}

/// The degree-six relation exactly as displayed.
pub fn sextic_poly() -> Poly {
    let [w, x, y, z] = vars();
    let (x2, y2, z2) = (&x * &x, &y * &y, &z * &z);
    let a = (&x + &y).pow(3) * (&x - &y).pow(3);
    let x4 = x2.pow(2);
    let x6 = x2.pow(3);
    let y4 = y2.pow(2);
    let y6 = y2.pow(3);
    let z4 = z2.pow(2);
    let z8 = z4.pow(2);
    let c6 = k(64.0) * x6.clone() * a.clone();
    let c5 = k(-92.0) * x4.clone() * z2.clone() * a;
    let c4 = k(48.0)
        * x2.clone()
        * z2.clone()
        * (k(5.0) * x6.clone() * z2.clone() - k(14.0) * x4.clone() * y2.clone() * z2.clone()
            + k(13.0) * x2.clone() * y2.clone() * z2.clone()
            - k(4.0) * y4.clone() * z2.clone()
            + k(9.0) * x4.clone()
            + k(27.0) * x2.clone());
    let c3 = k(8.0)
        * z4.clone()
        * (k(-20.0) * x6 * z2.clone() + k(48.0) * x4.clone() * y2.clone() * z2.clone()
            - k(36.0) * x2.clone() * y4.clone() * z2.clone()
            + k(8.0) * y6 * z2.clone()
            - k(81.0) * x4.clone()
            - k(243.0) * x2.clone() * y2.clone());
    let c2 = k(3.0)
        * z4.clone()
        * (k(20.0) * x4 * z4.clone() - k(36.0) * x2.clone() * y2.clone() * z4.clone()
            + k(16.0) * y4 * z4.clone()
            + k(108.0) * x2.clone() * z2.clone()
            + k(216.0) * y2.clone() * z2.clone()
            + k(243.0));
    let c1 = k(6.0) * z8.clone() * (k(-2.0) * x2 * z2.clone() + k(2.0) * y2 * z2.clone() - k(9.0));
    let c0 = z8 * z4;
    c6 * w.pow(6) + c5 * w.pow(5) + c4 * w.pow(4) + c3 * w.pow(3) + c2 * w.pow(2) + c1 * w + c0
}

/// `w³/6 − Yw² − 3Z²`, the parabolic-cylinder relation `(e^U/6 − Y)e^{2U} = 3Z²`.
pub fn appendix_b_poly() -> Poly {
    let [w, _, y, z] = vars();
    k(1.0 / 6.0) * w.pow(3) - y * w.pow(2) - k(3.0) * z.pow(2)
}

/// `e^U(e^UX² − Z²)³ + Z⁴ = 0`, the resultant of the `B = 0` family.
pub fn example_1() -> Result<TodaCatalogEntry> {
    let chart = Chart::new(&["X", "Y", "Z"], &[(-0.23, -0.05), (-1.0, 1.0), (0.95, 1.4)])?;
    // p = 1/2, Z = 1 in the parametric family
    let sol = implicit("example-1", example_1_poly(), 1.0, chart, [-64.0 / 289.0, 0.0, 1.0], 4913.0 / 4096.0)?;
    let pchart = Chart::new(&["y", "p", "Z"], &[(-1.0, 1.0), (0.05, 0.6), (0.95, 1.4)])?;
    Ok(TodaCatalogEntry {
        name: "example-1",
        solution: TodaSolution::Implicit(sol),
        epsilon: 1.0,
        note: "flat projective structure; branch of small Zp",
        relation: Some(example_1_poly()),
        parametric: Some(toda_implicit1(&Expr::constant(0.0), pchart)),
    })
}

/// The relation obtained from the `G = e^y` family.
pub fn example_int() -> Result<TodaCatalogEntry> {
    let g = Expr::var(0).exp();
    let pchart = Chart::new(&["y", "T", "Z"], &[(0.2, 0.4), (0.2, 0.33), (1.1, 1.3)])?;
    let par = toda_impl2(&g, &g, pchart);
    let [x0, y0, z0, u0] = par.values(&[0.3, 0.28, 1.2])?;
    let seed = [x0, y0, z0];
    let poly = example_int_poly();
    let chart = Chart::new(&["X", "Y", "Z"], &[(x0 - 0.1, x0 + 0.1), (y0 - 0.1, y0 + 0.1), (z0 - 0.1, z0 + 0.1)])?;
    let w0 = polish(&poly.coefficients_in(0, &[0.0, x0, y0, z0]), u0.exp());
    let sol = implicit("example-int", poly.clone(), 1.0, chart, seed, w0)?;
    Ok(TodaCatalogEntry {
        name: "example-int",
        solution: TodaSolution::Implicit(sol),
        epsilon: 1.0,
        note: "G = e^y; sheet through the image of (y, T, Z) = (0.3, 0.28, 1.2), below the fold T ≈ 0.32Z²",
        relation: Some(poly),
        parametric: Some(par),
    })
}

/// The degree-six relation, taken verbatim with `ε = +1`.
pub fn sextic() -> Result<TodaCatalogEntry> {
    let chart = Chart::new(&["X", "Y", "Z"], &[(0.4, 0.8), (1.6, 2.4), (0.4, 1.0)])?;
    let poly = sextic_poly();
    let seed = [0.6, 2.0, 0.5];
    let w0 = unique_positive_root(&poly, seed)?;
    let sol = implicit("sextic", poly.clone(), 1.0, chart, seed, w0)?;
    Ok(TodaCatalogEntry {
        name: "sextic",
        solution: TodaSolution::Implicit(sol),
        epsilon: 1.0,
        note: "relation as displayed; the only positive root on the box",
        relation: Some(poly),
        parametric: None,
    })
}

/// `e^U = C + 4Y²/C + 2Y`, `C = (8Y³ + 9Z² + 3(16Z²Y³ + 9Z⁴)^{1/2})^{1/3}`, `ε = −1`.
pub fn appendix_b() -> Result<TodaCatalogEntry> {
    let chart = Chart::new(&["X", "Y", "Z"], &[(-1.0, 1.0), (0.1, 1.0), (0.2, 1.0)])?;
    Ok(TodaCatalogEntry {
        name: "appendix-b",
        solution: TodaSolution::Closed {
            u: appendix_b_u(),
            chart,
        },
        epsilon: -1.0,
        note: "rotation quotient of Gibbons-Hawking; real root of the cubic",
        relation: Some(appendix_b_poly()),
        parametric: None,
    })
}

/// `U = 0`, the translation quotient of Gibbons-Hawking.
pub fn trivial() -> Result<TodaCatalogEntry> {
    let chart = Chart::new(&["X", "Y", "Z"], &[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)])?;
    Ok(TodaCatalogEntry {
        name: "trivial",
        solution: TodaSolution::Closed {
            u: Expr::constant(0.0),
            chart,
        },
        epsilon: -1.0,
        note: "triholomorphic quotient of Gibbons-Hawking",
        relation: None,
        parametric: None,
    })
}

pub const CATALOG_NAMES: [&str; 5] = ["example-1", "example-int", "sextic", "appendix-b", "trivial"];

pub fn entry(name: &str) -> Result<TodaCatalogEntry> {
    match name {
        "example-1" => example_1(),
        "example-int" => example_int(),
        "sextic" => sextic(),
        "appendix-b" => appendix_b(),
        "trivial" => trivial(),
        _ => Err(Error::Invalid(format!("unknown catalog entry {name:?}"))),
    }
}

pub fn catalog() -> Result<Vec<TodaCatalogEntry>> {
    CATALOG_NAMES.iter().map(|n| entry(n)).collect()
}
