//! Toda potentials defined by a polynomial relation `f(e^U, X, Y, Z) = 0`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{Chart, TensorField};
use crate::jets::Jet;

use super::poly::{polish, univariate_roots, Poly};

/// Minimal admissible distance between the tracked root and any other root.
pub const ROOT_SEPARATION: f64 = 1e-8;

/// Imaginary parts below this (relative) count as real.
const REAL_TOL: f64 = 1e-7;

const MAX_HALVINGS: usize = 12;

/// `U = ln w` with `w` a positive root of `poly(w, X, Y, Z)`, selected by
/// continuation along the segment from `seed` to the evaluation point.
#[derive(Debug, Clone)]
pub struct ImplicitTodaSolution {
    pub name: String,
    pub poly: Poly,
    pub epsilon: f64,
    pub chart: Chart,
    pub seed: [f64; 3],
    pub seed_w: f64,
    dpoly: Poly,
}

impl ImplicitTodaSolution {
    /// Checks that `seed_w` is a regular root of `poly` at `seed`.
    pub fn new(
        name: &str,
        poly: Poly,
        epsilon: f64,
        chart: Chart,
        seed: [f64; 3],
        seed_w: f64,
    ) -> Result<ImplicitTodaSolution> {
        if poly.nvars() != 4 || chart.dim() != 3 {
            return Err(Error::Invalid("need a polynomial in (w, X, Y, Z) and a 3D chart".into()));
        }
        let dpoly = poly.derivative(0);
        let at = [seed_w, seed[0], seed[1], seed[2]];
        let scale = poly_scale(&poly, &at);
        let r = poly.eval_f64(&at);
        if r.abs() > 1e-12 * scale {
            return Err(Error::Invalid(format!("seed is not on the relation (residual {r:e})")));
        }
        if dpoly.eval_f64(&at).abs() <= 1e-12 * scale {
            return Err(Error::Degenerate {
                what: "∂f/∂w at the seed",
                value: dpoly.eval_f64(&at),
            });
        }
        Ok(ImplicitTodaSolution {
            name: name.to_string(),
            poly,
            epsilon,
            chart,
            seed,
            seed_w,
            dpoly,
        })
    }

    fn roots(&self, p: &[f64]) -> Vec<(f64, f64)> {
        let c = self.poly.coefficients_in(0, &[0.0, p[0], p[1], p[2]]);
        univariate_roots(&c)
            .into_iter()
            .map(|(re, im)| {
                if im.abs() <= REAL_TOL * re.abs().max(1.0) {
                    (polish(&c, re), 0.0)
                } else {
                    (re, im)
                }
            })
            .collect()
    }

    /// Picks the positive real root nearest `prev`; `None` if the nearest
    /// root is not positive real or another root is about as close.
    fn track(&self, p: &[f64], prev: f64) -> Result<Option<f64>> {
        let roots = self.roots(p);
        let mut dist: Vec<(f64, usize)> = roots
            .iter()
            .enumerate()
            .map(|(i, (re, im))| ((re - prev).hypot(*im), i))
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0));
        let Some(&(d0, i0)) = dist.first() else {
            return Err(Error::NoRoot);
        };
        let (re, im) = roots[i0];
        if let Some(&(d1, i1)) = dist.get(1) {
            let sep = (re - roots[i1].0).hypot(im - roots[i1].1);
            if sep < ROOT_SEPARATION * re.abs().max(1.0) {
                return Err(Error::BranchCollision(sep));
            }
            if d1 < 3.0 * d0 {
                return Ok(None);
            }
        }
        if im != 0.0 || re <= 0.0 {
            return Ok(None);
        }
        Ok(Some(re))
    }

    /// The tracked root `w = e^U` at `p`.
    pub fn root_at(&self, p: &[f64]) -> Result<f64> {
        let n0 = 16usize;
        let mut w = self.seed_w;
        let mut t = 0.0f64;
        let mut h = 1.0 / n0 as f64;
        let mut halvings = 0;
        while t < 1.0 {
            let tn = (t + h).min(1.0);
            let q: Vec<f64> = (0..3).map(|i| self.seed[i] + tn * (p[i] - self.seed[i])).collect();
            match self.track(&q, w)? {
                Some(v) => {
                    w = v;
                    t = tn;
                    if halvings > 0 {
                        h *= 2.0;
                        halvings -= 1;
                    }
                }
                None => {
                    halvings += 1;
                    if halvings > MAX_HALVINGS {
                        return Err(Error::NoRoot);
                    }
                    h *= 0.5;
                }
            }
        }
        let at = [w, p[0], p[1], p[2]];
        if self.dpoly.eval_f64(&at).abs() <= 1e-12 * poly_scale(&self.poly, &at) {
            return Err(Error::Degenerate {
                what: "∂f/∂w",
                value: self.dpoly.eval_f64(&at),
            });
        }
        Ok(w)
    }

    /// `w = e^U` as a jet in the coordinates `x`, by Newton iteration on jets
    /// started from the tracked root.
    pub fn w_jet(&self, x: &[Jet]) -> Result<Jet> {
        let p: Vec<f64> = x.iter().map(Jet::value).collect();
        let w0 = self.root_at(&p)?;
        let cfg = x[0].config();
        let mut w = Jet::constant(w0, cfg);
        for _ in 0..=cfg.order {
            let args = [w.clone(), x[0].clone(), x[1].clone(), x[2].clone()];
            let f = self.poly.eval(&args)?;
            let df = self.dpoly.eval(&args)?;
            w = w.try_sub(&f.try_div(&df)?)?;
        }
        Ok(w)
    }

    /// `U` as a jet in the coordinates `x`.
    pub fn eval(&self, x: &[Jet]) -> Result<Jet> {
        Ok(self.w_jet(x)?.ln()?)
    }

    /// `U` as a scalar field on `(X, Y, Z)`.
    pub fn field(&self) -> TensorField {
        let s = Arc::new(self.clone());
        TensorField::scalar(3, move |x| s.eval(x))
    }

    /// `|f|` relative to the size of its terms at `(w, X, Y, Z)`.
    pub fn relation_residual(&self, w: f64, p: &[f64]) -> f64 {
        let at = [w, p[0], p[1], p[2]];
        self.poly.eval_f64(&at).abs() / poly_scale(&self.poly, &at)
    }
}

/// Sum of absolute term values, used to make residuals relative.
pub fn poly_scale(p: &Poly, at: &[f64]) -> f64 {
    let abs: Vec<f64> = at.iter().map(|v| v.abs()).collect();
    p.map_coefficients(f64::abs).eval_f64(&abs).max(f64::MIN_POSITIVE)
}
