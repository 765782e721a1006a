//! Connections and curvature.
//!
//! Sign conventions:
//! - `R_{abc}^d = ∂_aΓ^d_bc − ∂_bΓ^d_ac + Γ^d_aeΓ^e_bc − Γ^d_beΓ^e_ac`, so
//!   that `(∇_a∇_b − ∇_b∇_a)V^d = R_{abc}^d V^c`.
//! - Ricci `R_ab = R_{cab}^c`. For a non-metric connection this contraction
//!   is the one for which the projective Schouten tensor changes by
//!   `P → P + ΥΥ − ∇Υ`.
//! - With these choices the unit sphere has scalar curvature +2.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{
    flat_index, hodge_star, multi_index, permutation_sign, seed, Form, MetricAt, Slot, Tensor,
    Convention,
};
use crate::jets::Jet;

/// Divides by `scale` when it exceeds one, so tiny reference norms do not
/// inflate residuals.
pub fn relative(num: f64, scale: f64) -> f64 {
    if scale > 1.0 {
        num / scale
    } else {
        num
    }
}

type GammaFn = dyn Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync;

/// Torsion-free affine connection given by its coefficients `Γ^c_ab`.
///
/// Components are stored as `[c][a][b]`.
#[derive(Clone)]
pub struct ConnectionField {
    pub dim: usize,
    eval: Arc<GammaFn>,
}

impl fmt::Debug for ConnectionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConnectionField(dim={})", self.dim)
    }
}

impl ConnectionField {
    pub fn new<F>(dim: usize, eval: F) -> ConnectionField
    where
        F: Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static,
    {
        ConnectionField {
            dim,
            eval: Arc::new(eval),
        }
    }

    /// Connection with all coefficients zero.
    pub fn flat(dim: usize) -> ConnectionField {
        ConnectionField::new(dim, move |x| {
            Ok(vec![Jet::zero(x[0].config()); dim * dim * dim])
        })
    }

    /// Coefficients at coordinate jets, checked for torsion-freeness.
    pub fn at(&self, x: &[Jet]) -> Result<Tensor> {
        if x.len() != self.dim {
            return Err(Error::ChartMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let t = Tensor::new(
            self.dim,
            vec![Slot::Up, Slot::Down, Slot::Down],
            (self.eval)(x)?,
        )?;
        let sw = t.transpose(1, 2);
        let mut defect: f64 = 0.0;
        for (a, b) in t.comps.iter().zip(&sw.comps) {
            defect = defect.max((a.value() - b.value()).abs());
        }
        if defect > 1e-12 * (1.0 + t.max_abs()) {
            return Err(Error::Invalid(format!("connection has torsion ({defect:e})")));
        }
        Ok(t)
    }

    /// Evaluates a derived quantity that needs `extra` more derivatives than
    /// the caller's jets carry.
    ///
    /// The connection is re-seeded at the value of `x` with order
    /// `order(x) + extra`, `f` computes the quantity in chart coordinates,
    /// and the result is composed with `x`. `f` receives the local seed jets
    /// and the coefficients evaluated on them.
    pub fn derived_at<F>(&self, x: &[Jet], extra: usize, f: F) -> Result<Tensor>
    where
        F: Fn(&[Jet], &Tensor) -> Result<Tensor>,
    {
        let order = x[0].order();
        let pt: Vec<f64> = x.iter().map(Jet::value).collect();
        let local = seed(&pt, order + extra)?;
        let gamma = self.at(&local)?;
        let q = f(&local, &gamma)?.truncate(order)?;
        let comps = q
            .comps
            .iter()
            .map(|c| Ok(c.compose(x)?))
            .collect::<Result<Vec<_>>>()?;
        Tensor::new(q.dim, q.variance.clone(), comps)
    }

    /// Ricci tensor `R_ab` at coordinate jets.
    pub fn ricci_at(&self, x: &[Jet]) -> Result<Tensor> {
        self.derived_at(x, 1, |_, g| ricci(&riemann(g)?))
    }

    /// Projective Schouten tensor at coordinate jets.
    pub fn schouten_at(&self, x: &[Jet]) -> Result<Tensor> {
        let n = self.dim;
        self.derived_at(x, 1, move |_, g| schouten_from_ricci(&ricci(&riemann(g)?)?, n))
    }
}

/// Levi-Civita coefficients of a metric; order drops by one.
pub fn levi_civita(metric: &MetricAt) -> Result<Tensor> {
    let n = metric.dim();
    let m = metric.order();
    if m == 0 {
        return Err(Error::InsufficientOrder { need: 1, have: 0 });
    }
    let dg = metric.g.gradient()?; // [e][a][b] = ∂_e g_ab
    let inv = metric.inv.truncate(m - 1)?;
    let cfg = dg.config();
    let mut lower = Vec::with_capacity(n * n * n); // Γ_dab
    for d in 0..n {
        for a in 0..n {
            for b in 0..n {
                let v = &(dg.get(&[a, d, b]) + dg.get(&[b, d, a])) - dg.get(&[d, a, b]);
                lower.push(v.scale(0.5));
            }
        }
    }
    let mut out = Tensor::zeros(n, vec![Slot::Up, Slot::Down, Slot::Down], cfg);
    for c in 0..n {
        for a in 0..n {
            for b in a..n {
                let mut acc = Jet::zero(cfg);
                for d in 0..n {
                    acc = &acc + &(inv.get(&[c, d]) * &lower[flat_index(n, &[d, a, b])]);
                }
                out.set(&[c, b, a], acc.clone());
                out.set(&[c, a, b], acc);
            }
        }
    }
    Ok(out)
}

/// Riemann tensor `R_{abc}^d` stored as `[a][b][c][d]`; order drops by one.
pub fn riemann(gamma: &Tensor) -> Result<Tensor> {
    let n = gamma.dim;
    let m = gamma.order();
    if m == 0 {
        return Err(Error::InsufficientOrder { need: 1, have: 0 });
    }
    let dgam = gamma.gradient()?; // [a][d][b][c] = ∂_a Γ^d_bc
    let g = gamma.truncate(m - 1)?;
    let cfg = dgam.config();
    let mut out = Tensor::zeros(n, vec![Slot::Down, Slot::Down, Slot::Down, Slot::Up], cfg);
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            for c in 0..n {
                for d in 0..n {
                    let mut acc = dgam.get(&[a, d, b, c]) - dgam.get(&[b, d, a, c]);
                    for e in 0..n {
                        acc = &acc + &(g.get(&[d, a, e]) * g.get(&[e, b, c]));
                        acc = &acc - &(g.get(&[d, b, e]) * g.get(&[e, a, c]));
                    }
                    out.set(&[a, b, c, d], acc);
                }
            }
        }
    }
    Ok(out)
}

/// Ricci contraction `R_ab = R_{cab}^c` (not necessarily symmetric).
pub fn ricci(riem: &Tensor) -> Result<Tensor> {
    let n = riem.dim;
    let cfg = riem.config();
    let mut out = Tensor::zeros(n, vec![Slot::Down, Slot::Down], cfg);
    for a in 0..n {
        for b in 0..n {
            let mut acc = Jet::zero(cfg);
            for c in 0..n {
                acc = &acc + riem.get(&[c, a, b, c]);
            }
            out.set(&[a, b], acc);
        }
    }
    Ok(out)
}

/// Scalar curvature `g^ab R_ab`.
pub fn scalar(metric: &MetricAt, ric: &Tensor) -> Result<Jet> {
    let inv = metric.inv.truncate(ric.order())?;
    let mut acc = Jet::zero(ric.config());
    for (a, b) in inv.comps.iter().zip(&ric.comps) {
        acc = &acc + &(a * b);
    }
    Ok(acc)
}

/// Projective Schouten tensor `R_(AB)/(n−1) + R_[AB]/(n+1)`.
pub fn schouten_from_ricci(ric: &Tensor, n: usize) -> Result<Tensor> {
    if n < 2 {
        return Err(Error::Invalid("Schouten tensor needs n ≥ 2".into()));
    }
    let rt = ric.transpose(0, 1);
    let sym = ric.add(&rt)?.scale(0.5 / (n as f64 - 1.0));
    let skew = ric.sub(&rt)?.scale(0.5 / (n as f64 + 1.0));
    sym.add(&skew)
}

/// Covariant derivative `∇_a T`, with the new slot first.
pub fn covariant_derivative(gamma: &Tensor, t: &Tensor) -> Result<Tensor> {
    let n = t.dim;
    let m = t.order();
    if m == 0 {
        return Err(Error::InsufficientOrder { need: 1, have: 0 });
    }
    let order = (m - 1).min(gamma.order());
    let grad = t.gradient()?.truncate(order)?;
    let tt = t.truncate(order)?;
    let g = gamma.truncate(order)?;
    let r = t.rank();
    let mut out = grad;
    for flat in 0..out.comps.len() {
        let ix = multi_index(n, r + 1, flat);
        let a = ix[0];
        let rest = &ix[1..];
        let mut acc = out.comps[flat].clone();
        for (s, slot) in t.variance.iter().enumerate() {
            for e in 0..n {
                let mut jx = rest.to_vec();
                jx[s] = e;
                let te = tt.get(&jx);
                match slot {
                    Slot::Down => acc = &acc - &(g.get(&[e, a, rest[s]]) * te),
                    Slot::Up => acc = &acc + &(g.get(&[rest[s], a, e]) * te),
                }
            }
        }
        out.comps[flat] = acc;
    }
    Ok(out)
}

/// All-lower Riemann tensor in the convention where the (a, c)
/// contraction gives Ricci: `S_abcd = g_ce R_{abd}^e`.
pub fn riemann_lowered(metric: &MetricAt, riem: &Tensor) -> Result<Tensor> {
    let n = riem.dim;
    let g = metric.g.truncate(riem.order())?;
    let cfg = riem.config();
    let mut out = Tensor::zeros(n, vec![Slot::Down; 4], cfg);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut acc = Jet::zero(cfg);
                    for e in 0..n {
                        acc = &acc + &(g.get(&[c, e]) * riem.get(&[a, b, d, e]));
                    }
                    out.set(&[a, b, c, d], acc);
                }
            }
        }
    }
    Ok(out)
}

/// Weyl tensor, all indices lower.
pub fn weyl_tensor(metric: &MetricAt, riem: &Tensor) -> Result<Tensor> {
    let n = metric.dim();
    if n < 3 {
        return Err(Error::Signature("Weyl tensor needs n ≥ 3".into()));
    }
    let s = riemann_lowered(metric, riem)?;
    let ric = ricci(riem)?;
    let r = scalar(metric, &ric)?;
    let g = metric.g.truncate(riem.order())?;
    let nf = n as f64;
    let k1 = 1.0 / (nf - 2.0);
    let k2 = 1.0 / ((nf - 1.0) * (nf - 2.0));
    let mut out = s.clone();
    for flat in 0..out.comps.len() {
        let ix = multi_index(n, 4, flat);
        let (a, b, c, d) = (ix[0], ix[1], ix[2], ix[3]);
        let gg = |i: usize, j: usize| g.get(&[i, j]);
        let rr = |i: usize, j: usize| ric.get(&[i, j]);
        let mid = &(&(&(gg(a, c) * rr(b, d)) - &(gg(a, d) * rr(b, c))) - &(gg(b, c) * rr(a, d)))
            + &(gg(b, d) * rr(a, c));
        let last = &(gg(a, c) * gg(b, d)) - &(gg(a, d) * gg(b, c));
        out.comps[flat] = &(&s.comps[flat] - &mid.scale(k1)) + &(&last * &r).scale(k2);
    }
    Ok(out)
}

/// Curvature data of a metric at a point.
#[derive(Debug, Clone)]
pub struct CurvaturePack {
    pub christoffel: Tensor,
    pub riemann: Tensor,
    pub ricci: Tensor,
    pub scalar: f64,
    /// Self-dual and anti-self-dual Weyl parts (4D only).
    pub weyl_sd: Option<Tensor>,
    pub weyl_asd: Option<Tensor>,
}

/// Computes curvature of a metric evaluated at jets of order ≥ 2.
pub fn curvature_pack(metric: &MetricAt) -> Result<CurvaturePack> {
    if metric.order() < 2 {
        return Err(Error::InsufficientOrder {
            need: 2,
            have: metric.order(),
        });
    }
    let christoffel = levi_civita(metric)?;
    let riem = riemann(&christoffel)?;
    let ric = ricci(&riem)?;
    let sc = scalar(metric, &ric)?.value();
    let (weyl_sd, weyl_asd) = if metric.dim() == 4 {
        let c = weyl_tensor(metric, &riem)?;
        let (p, m) = weyl_split(metric, &c)?;
        (Some(p), Some(m))
    } else {
        (None, None)
    };
    Ok(CurvaturePack {
        christoffel,
        riemann: riem,
        ricci: ric,
        scalar: sc,
        weyl_sd,
        weyl_asd,
    })
}

/// First Bianchi defect `max |R_{[abc]}^d|`.
pub fn first_bianchi_defect(riem: &Tensor) -> f64 {
    let n = riem.dim;
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let v = riem.get(&[a, b, c, d]).value()
                        + riem.get(&[b, c, a, d]).value()
                        + riem.get(&[c, a, b, d]).value();
                    worst = worst.max(v.abs());
                }
            }
        }
    }
    worst
}

/// Second Bianchi defect `max |∇_{[e}R_{ab]c}^d|`; needs metric order ≥ 3.
pub fn second_bianchi_defect(metric: &MetricAt) -> Result<f64> {
    let gamma = levi_civita(metric)?;
    let riem = riemann(&gamma)?;
    let dr = covariant_derivative(&gamma, &riem)?;
    let n = metric.dim();
    let mut worst: f64 = 0.0;
    for e in 0..n {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let v = dr.get(&[e, a, b, c, d]).value()
                            + dr.get(&[a, b, e, c, d]).value()
                            + dr.get(&[b, e, a, c, d]).value();
                        worst = worst.max(v.abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

fn require_split_4d(metric: &MetricAt) -> Result<()> {
    if metric.dim() != 4 {
        return Err(Error::Signature(format!(
            "SD/ASD split needs dimension 4, got {}",
            metric.dim()
        )));
    }
    if metric.det_sign() < 0.0 {
        return Err(Error::Signature(
            "SD/ASD split needs signature (2,2) or definite".into(),
        ));
    }
    Ok(())
}

/// Splits a 2-form into self-dual and anti-self-dual parts, `½(F ± ⋆F)`.
pub fn sd_asd_split(metric: &MetricAt, f: &Form) -> Result<(Form, Form)> {
    require_split_4d(metric)?;
    if f.degree() != 2 {
        return Err(Error::Invalid("SD/ASD split acts on 2-forms".into()));
    }
    let star = hodge_star(metric, f)?;
    let order = star.order();
    let f = f.truncate(order)?;
    Ok((f.add(&star)?.scale(0.5), f.sub(&star)?.scale(0.5)))
}

/// Left dual on the first index pair, `½ ε_ab^{ef} C_efcd`.
fn left_dual(metric: &MetricAt, c: &Tensor) -> Result<Tensor> {
    let n = 4;
    let order = c.order();
    let m = metric.truncate(order)?;
    let vol = m.volume()?;
    let cfg = c.config();
    // raise the first pair
    let mut up = c.clone();
    for flat in 0..up.comps.len() {
        let ix = multi_index(n, 4, flat);
        let mut acc = Jet::zero(cfg);
        for e in 0..n {
            for f in 0..n {
                let w = m.inv.get(&[ix[0], e]) * m.inv.get(&[ix[1], f]);
                acc = &acc + &(&w * c.get(&[e, f, ix[2], ix[3]]));
            }
        }
        up.comps[flat] = acc;
    }
    let mut out = Tensor::zeros(n, vec![Slot::Down; 4], cfg);
    for flat in 0..out.comps.len() {
        let ix = multi_index(n, 4, flat);
        let mut acc = Jet::zero(cfg);
        for e in 0..n {
            for f in 0..n {
                let s = permutation_sign(&[e, f, ix[0], ix[1]]);
                if s != 0.0 {
                    acc = &acc + &up.get(&[e, f, ix[2], ix[3]]).scale(s);
                }
            }
        }
        out.comps[flat] = (&acc * &vol).scale(0.5);
    }
    Ok(out)
}

/// `(C₊, C₋) = ½(C ± ⋆C)` with the dual on the first pair.
pub fn weyl_split(metric: &MetricAt, c: &Tensor) -> Result<(Tensor, Tensor)> {
    require_split_4d(metric)?;
    let star = left_dual(metric, c)?;
    Ok((c.add(&star)?.scale(0.5), c.sub(&star)?.scale(0.5)))
}

/// `|C₊| / |Riem|` (coordinate Frobenius norms); needs metric order ≥ 2.
pub fn asd_weyl_residual(metric: &MetricAt) -> Result<f64> {
    let pack = curvature_pack(metric)?;
    let cp = pack.weyl_sd.as_ref().ok_or_else(|| Error::Signature("not 4D".into()))?;
    let scale = pack.riemann.norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(cp.norm() / scale)
}

/// `(|R_ab − (R/n) g_ab| relative to |R_ab|, R)`; needs metric order ≥ 2.
pub fn einstein_residual(metric: &MetricAt) -> Result<(f64, f64)> {
    let pack = curvature_pack(metric)?;
    Ok(einstein_residual_from(metric, &pack))
}

pub fn einstein_residual_from(metric: &MetricAt, pack: &CurvaturePack) -> (f64, f64) {
    let n = metric.dim() as f64;
    let mut tf = 0.0;
    for (r, g) in pack.ricci.comps.iter().zip(&metric.g.comps) {
        tf += (r.value() - pack.scalar / n * g.value()).powi(2);
    }
    (relative(tf.sqrt(), pack.ricci.norm()), pack.scalar)
}

/// Two-form `dx^a∧dx^b` with unit classical component.
pub fn basis_two_form(metric: &MetricAt, a: usize, b: usize) -> Form {
    let cfg = metric.g.config();
    Form::two_form(
        metric.dim(),
        cfg,
        &[((a, b), Jet::constant(1.0, cfg))],
        Convention::Classical,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::MetricField;

    fn sphere() -> MetricField {
        MetricField::new(2, 1.0, |x| {
            let s = x[0].sin()?;
            let z = Jet::zero(x[0].config());
            Ok(vec![Jet::constant(1.0, x[0].config()), z.clone(), z, &s * &s])
        })
    }

    #[test]
    fn flat_metric_has_zero_symbols() {
        let m = MetricField::new(3, 1.0, |x| {
            let c = x[0].config();
            Ok((0..9)
                .map(|k| Jet::constant([1.0, 2.0, -1.0][k / 3] * f64::from(k % 4 == 0), c))
                .collect())
        });
        let g = m.at_point(&[0.1, 0.2, 0.3], 2).unwrap();
        assert_eq!(levi_civita(&g).unwrap().max_abs(), 0.0);
        let (res, sc) = einstein_residual(&g).unwrap();
        assert_eq!((res, sc), (0.0, 0.0));
    }

    #[test]
    fn sphere_symbols_and_scalar() {
        let th = 0.7;
        let g = sphere().at_point(&[th, 0.2], 2).unwrap();
        let gam = levi_civita(&g).unwrap();
        assert!((gam.get(&[0, 1, 1]).value() + th.sin() * th.cos()).abs() < 1e-15);
        assert!((gam.get(&[1, 0, 1]).value() - th.cos() / th.sin()).abs() < 1e-14);
        let (res, sc) = einstein_residual(&g).unwrap();
        assert!((sc - 2.0).abs() < 1e-13);
        assert!(res < 1e-13);
    }

    #[test]
    fn schouten_parts() {
        let cfg = crate::jets::JetConfig::new(2, 0).unwrap();
        let ric = Tensor::new(
            2,
            vec![Slot::Down, Slot::Down],
            [1.0, 2.0, 4.0, 3.0]
                .iter()
                .map(|&v| Jet::constant(v, cfg))
                .collect(),
        )
        .unwrap();
        let p = schouten_from_ricci(&ric, 2).unwrap();
        // sym part (1,3,3,3), skew part (0,-1,1,0)/3
        assert!((p.get(&[0, 1]).value() - (3.0 - 1.0 / 3.0)).abs() < 1e-15);
        assert!((p.get(&[1, 0]).value() - (3.0 + 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn wrong_dimension_split_rejected() {
        let g = sphere().at_point(&[0.7, 0.2], 1).unwrap();
        let f = basis_two_form(&g, 0, 1);
        assert!(matches!(sd_asd_split(&g, &f), Err(Error::Signature(_))));
    }
}
