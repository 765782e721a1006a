//! Three-dimensional Weyl structures.
//!
//! A Weyl structure is a pair `(h, ω)` with connection `𝒟` such that
//! `𝒟h = ω⊗h`. It is Einstein–Weyl when the symmetrized Ricci tensor of `𝒟`
//! is proportional to `h`. Gauge transformations act by
//! `h → ρ²h`, `ω → ω + 2 d ln ρ`.
//!
//! Structures are obtained from a four-dimensional ASD metric with a
//! Killing field by the Jones–Tod quotient, computed on a section of the
//! orbit space.

use std::sync::Arc;

use crate::curvature::{covariant_derivative, levi_civita, relative, ricci, riemann};
use crate::dm_einstein::DM_ORIENTATION;
use crate::error::{Error, Result};
use crate::fields::{
    d, hodge_star, interior, lie_derivative, pullback_tensor, seed, sym_product, wedge,
    with_extra_order, Chart, Form, Guard, MetricAt, MetricField, Slot, Symmetry,
    Tensor, TensorField, DEGENERACY_FLOOR,
};
use crate::jets::Jet;
use crate::projective::NormalFormData;
use crate::Expr;

/// Floor on `|g(K, K)|` below which the quotient is not formed.
pub const NULL_KILLING_FLOOR: f64 = 1e-8;

/// Orientation of the four-dimensional star used by [`dm_quotient`];
/// `−DM_ORIENTATION`.
pub const JONES_TOD_ORIENTATION: f64 = -DM_ORIENTATION;

/// A metric and one-form on a chart.
#[derive(Clone)]
pub struct WeylStructure {
    pub h: MetricField,
    pub omega: TensorField,
}

impl std::fmt::Debug for WeylStructure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "WeylStructure(dim = {})", self.dim())
    }
}

impl WeylStructure {
    pub fn new(h: MetricField, omega: TensorField) -> Result<WeylStructure> {
        if omega.variance != [Slot::Down] {
            return Err(Error::Variance("ω must be a one-form".into()));
        }
        if omega.dim != h.dim() {
            return Err(Error::ChartMismatch {
                expected: h.dim(),
                got: omega.dim,
            });
        }
        Ok(WeylStructure { h, omega })
    }

    /// From the upper-triangular components of `h` (row-major) and the
    /// components of `ω`, all as expressions in the chart coordinates.
    pub fn from_exprs(n: usize, h_upper: &[Expr], omega: &[Expr], orientation: f64) -> Result<WeylStructure> {
        if h_upper.len() != n * (n + 1) / 2 || omega.len() != n {
            return Err(Error::Invalid("wrong number of component expressions".into()));
        }
        let mut full = vec![Expr::constant(0.0); n * n];
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                full[i * n + j] = h_upper[k].clone();
                full[j * n + i] = h_upper[k].clone();
                k += 1;
            }
        }
        let h = MetricField::from_exprs(n, orientation, full)?;
        let w = TensorField::from_exprs(n, vec![Slot::Down], Symmetry::None, omega.to_vec())?;
        WeylStructure::new(h, w)
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    /// The same structure with `h` carrying orientation `sign(o)`.
    pub fn oriented(mut self, o: f64) -> WeylStructure {
        self.h.orientation = if o < 0.0 { -1.0 } else { 1.0 };
        self
    }

    pub fn at(&self, x: &[Jet]) -> Result<(MetricAt, Tensor)> {
        Ok((self.h.at(x)?, self.omega.at(x)?))
    }

    /// The gauge-transformed structure `(ρ²h, ω + 2 d ln ρ)`.
    pub fn gauge(&self, rho: &TensorField) -> Result<WeylStructure> {
        if rho.rank() != 0 || rho.dim != self.dim() {
            return Err(Error::Variance("ρ must be a scalar on the chart".into()));
        }
        let n = self.dim();
        let (h, r) = (self.h.clone(), rho.clone());
        let hf = MetricField::new(n, self.h.orientation, move |x| {
            let r2 = r.at(x)?.comps[0].powi(2)?;
            Ok(h.field.at(x)?.comps.iter().map(|c| c * &r2).collect())
        });
        let (w, r) = (self.omega.clone(), rho.clone());
        let wf = TensorField::new(n, vec![Slot::Down], Symmetry::None, move |x| {
            let dl = with_extra_order(x, 1, |local| {
                let l = r.at(local)?.comps[0].powi(2)?.ln()?;
                (0..n).map(|i| Ok(l.derivative(i)?)).collect()
            })?;
            Ok(w.at(x)?
                .comps
                .iter()
                .zip(&dl)
                .map(|(a, b)| a + b)
                .collect())
        });
        WeylStructure::new(hf, wf)
    }
}

/// `Γ^i_jk = LC(h)^i_jk − ½(ω_j δ^i_k + ω_k δ^i_j − h_jk ω^i)`.
///
/// The result has one order less than `h`.
pub fn weyl_connection(h: &MetricAt, omega: &Tensor) -> Result<Tensor> {
    let n = h.dim();
    let lc = levi_civita(h)?;
    let order = lc.order();
    let w = omega.truncate(order)?;
    let ht = h.truncate(order)?;
    let up = ht.raise(&w.comps)?;
    let mut out = lc;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut c = ht.g.get(&[j, k]) * &up[i];
                if i == k {
                    c = &c - &w.comps[j];
                }
                if i == j {
                    c = &c - &w.comps[k];
                }
                let v = out.get(&[i, j, k]) + &c.scale(0.5);
                out.set(&[i, j, k], v);
            }
        }
    }
    Ok(out)
}

/// `|𝒟h − ω⊗h|` at a point.
pub fn weyl_compatibility_residual(ws: &WeylStructure, point: &[f64]) -> Result<f64> {
    let x = seed(point, 1)?;
    let (h, w) = ws.at(&x)?;
    let gamma = weyl_connection(&h, &w)?;
    let dh = covariant_derivative(&gamma, &h.g)?;
    let rhs = w.truncate(0)?.outer(&h.g.truncate(0)?)?;
    Ok(dh.sub(&rhs)?.norm())
}

/// Trace-free part of the symmetrized Ricci tensor of `𝒟`, relative to
/// `|Ric|`.
pub fn ew_residual(ws: &WeylStructure, point: &[f64]) -> Result<f64> {
    let x = seed(point, 2)?;
    let (h, w) = ws.at(&x)?;
    ew_residual_at(&h, &w)
}

/// [`ew_residual`] from jets of order at least 2.
pub fn ew_residual_at(h: &MetricAt, omega: &Tensor) -> Result<f64> {
    if h.order() < 2 || omega.order() < 1 {
        return Err(Error::InsufficientOrder {
            need: 2,
            have: h.order(),
        });
    }
    let n = h.dim();
    let gamma = weyl_connection(h, omega)?;
    let ric = ricci(&riemann(&gamma)?)?;
    let h0 = h.truncate(0)?;
    let sym = ric.add(&ric.transpose(0, 1))?.scale(0.5);
    let mut tr = 0.0;
    for i in 0..n {
        for j in 0..n {
            tr += h0.inv.get(&[i, j]).value() * sym.get(&[i, j]).value();
        }
    }
    let tf = sym.sub(&h0.g.scale(tr / n as f64))?;
    Ok(relative(tf.norm(), ric.norm()))
}

pub type MapFn = dyn Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync;

/// Invariant coordinates for a Killing field together with sections of
/// the orbit map.
#[derive(Clone)]
pub struct InvariantChart {
    /// Sampling chart in the invariant coordinates.
    pub chart: Chart,
    /// Invariants as functions of the four-dimensional coordinates.
    pub invariants: Arc<MapFn>,
    /// A slice transverse to the orbits, parametrized by the invariants.
    pub section: Arc<MapFn>,
    /// A second slice meeting the same orbits.
    pub alt_section: Option<Arc<MapFn>>,
}

impl InvariantChart {
    pub fn new<I, S>(chart: Chart, invariants: I, section: S) -> InvariantChart
    where
        I: Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static,
        S: Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static,
    {
        InvariantChart {
            chart,
            invariants: Arc::new(invariants),
            section: Arc::new(section),
            alt_section: None,
        }
    }

    pub fn with_alt_section<S>(mut self, s: S) -> InvariantChart
    where
        S: Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static,
    {
        self.alt_section = Some(Arc::new(s));
        self
    }

    /// Copy with the alternative section promoted to the primary one.
    pub fn swapped(&self) -> Option<InvariantChart> {
        self.alt_section.as_ref().map(|alt| InvariantChart {
            chart: self.chart.clone(),
            invariants: self.invariants.clone(),
            section: alt.clone(),
            alt_section: Some(self.section.clone()),
        })
    }

    /// `(max |K(uⁱ)|, max |u(s(y)) − y|)` on the given invariant points,
    /// over both sections.
    pub fn check(&self, k: &TensorField, points: &[Vec<f64>]) -> Result<(f64, f64)> {
        let mut kill: f64 = 0.0;
        let mut trip: f64 = 0.0;
        let sections: Vec<&Arc<MapFn>> =
            std::iter::once(&self.section).chain(self.alt_section.iter()).collect();
        for y in points {
            for s in &sections {
                let x4: Vec<f64> = s(&seed(y, 0)?)?.iter().map(Jet::value).collect();
                let xj = seed(&x4, 1)?;
                let u = (self.invariants)(&xj)?;
                let kv = k.vector_at(&xj)?;
                for (ui, yi) in u.iter().zip(y) {
                    trip = trip.max((ui.value() - yi).abs());
                    let mut acc = 0.0;
                    for (a, ka) in kv.iter().enumerate() {
                        acc += ka.value() * ui.derivative(a)?.value();
                    }
                    kill = kill.max(acc.abs());
                }
            }
        }
        Ok((kill, trip))
    }
}

/// Four-dimensional quotient data `h = |K|⁻²g − |K|⁻⁴𝐊⊗𝐊` and
/// `ω = (2/|K|²)⋆(𝐊∧d𝐊)` at coordinate jets; `ω` has one order less.
pub fn jones_tod_tensors(g4: &MetricField, k: &TensorField, x: &[Jet]) -> Result<(Tensor, Tensor)> {
    let g = g4.at(x)?;
    let kv = k.vector_at(x)?;
    let kl = g.lower(&kv)?;
    let k2 = g.inner(&kv, &kv)?;
    if k2.value().abs() < NULL_KILLING_FLOOR {
        return Err(Error::Degenerate {
            what: "|K|²",
            value: k2.value(),
        });
    }
    let n = g.dim();
    let inv = k2.recip()?;
    let inv2 = &inv * &inv;
    let mut h = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            h.push(&(g.g.get(&[a, b]) * &inv) - &(&(&kl[a] * &kl[b]) * &inv2));
        }
    }
    let h = Tensor::new(n, vec![Slot::Down, Slot::Down], h)?;
    let kf = Form::one_form(kl)?;
    let dk = d(&kf)?;
    let order = dk.order();
    let kdk = wedge(&kf.truncate(order)?, &dk)?;
    let star = hodge_star(&g.truncate(order)?, &kdk)?;
    let w = star.tensor.scale_jet(&inv.truncate(order)?.scale(2.0))?;
    Ok((h, w))
}

fn reduce_through(
    g4: &MetricField,
    k: &TensorField,
    section: &MapFn,
    y: &[Jet],
) -> Result<Vec<Jet>> {
    with_extra_order(y, 1, |local| {
        let map = section(local)?;
        let pt: Vec<f64> = map.iter().map(Jet::value).collect();
        let x4 = seed(&pt, local[0].order())?;
        let (h4, w4) = jones_tod_tensors(g4, k, &x4)?;
        let mut out = pullback_tensor(&map, &h4)?.comps;
        out.extend(pullback_tensor(&map, &w4)?.comps);
        Ok(out)
    })
}

/// The Jones–Tod quotient of `(g4, K)` expressed in invariant coordinates.
///
/// `K` is checked to be Killing and non-null at the section point over
/// `probe`. The orientation of `g4` fixes the sign of `ω`; the quotient
/// metric carries orientation `+1`.
pub fn jones_tod_reduce(
    g4: &MetricField,
    k: &TensorField,
    chart: &InvariantChart,
    probe: &[f64],
    tol: f64,
) -> Result<WeylStructure> {
    if g4.dim() != 4 || k.dim != 4 {
        return Err(Error::ChartMismatch {
            expected: 4,
            got: g4.dim(),
        });
    }
    let pt: Vec<f64> = (chart.section)(&seed(probe, 0)?)?.iter().map(Jet::value).collect();
    let x = seed(&pt, 1)?;
    let lk = lie_derivative(&k.vector_at(&x)?, &g4.at(&x)?.g)?;
    if lk.norm() > tol {
        return Err(Error::NotKilling(lk.norm()));
    }
    let n = chart.chart.dim();
    let (g, kk, s) = (g4.clone(), k.clone(), chart.section.clone());
    let h = MetricField::new(n, 1.0, move |y| {
        let mut v = reduce_through(&g, &kk, s.as_ref(), y)?;
        v.truncate(n * n);
        Ok(v)
    });
    let (g, kk, s) = (g4.clone(), k.clone(), chart.section.clone());
    let w = TensorField::new(n, vec![Slot::Down], Symmetry::None, move |y| {
        Ok(reduce_through(&g, &kk, s.as_ref(), y)?.split_off(n * n))
    });
    WeylStructure::new(h, w)
}

/// Largest component difference of `h` and `ω` between the quotients taken
/// through the two sections of `chart`.
pub fn section_independence(
    g4: &MetricField,
    k: &TensorField,
    chart: &InvariantChart,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<f64> {
    let alt = chart
        .swapped()
        .ok_or_else(|| Error::Invalid("chart has no alternative section".into()))?;
    let probe = points
        .first()
        .ok_or_else(|| Error::Invalid("no points".into()))?;
    let a = jones_tod_reduce(g4, k, chart, probe, tol)?;
    let b = jones_tod_reduce(g4, k, &alt, probe, tol)?;
    let mut worst: f64 = 0.0;
    for p in points {
        let x = seed(p, 0)?;
        let (ha, wa) = a.at(&x)?;
        let (hb, wb) = b.at(&x)?;
        worst = worst.max(ha.g.sub(&hb.g)?.max_abs());
        worst = worst.max(wa.sub(&wb)?.max_abs());
    }
    Ok(worst)
}

/// Outcome of a gauge-equivalence test.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeReport {
    /// Largest relative trace-free part of `h₁ − ρ²h₂`.
    pub conformal_misfit: f64,
    /// Largest `|ω₁ − ω₂ − d ln|ρ²||`.
    pub omega_misfit: f64,
    /// Fitted `ρ²` at each point (may be negative when the representatives
    /// differ by a sign).
    pub rho2: Vec<f64>,
    pub tol: f64,
}

impl GaugeReport {
    pub fn conformal(&self) -> bool {
        self.conformal_misfit <= self.tol
    }

    pub fn equivalent(&self) -> bool {
        self.conformal() && self.omega_misfit <= self.tol
    }
}

/// Tests `h₁ = ρ²h₂`, `ω₁ = ω₂ + 2 d ln ρ` pointwise.
pub fn gauge_equivalent(
    ws1: &WeylStructure,
    ws2: &WeylStructure,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<GaugeReport> {
    if ws1.dim() != ws2.dim() {
        return Err(Error::ChartMismatch {
            expected: ws1.dim(),
            got: ws2.dim(),
        });
    }
    let n = ws1.dim();
    let mut rep = GaugeReport {
        conformal_misfit: 0.0,
        omega_misfit: 0.0,
        rho2: Vec::with_capacity(points.len()),
        tol,
    };
    for p in points {
        let x = seed(p, 1)?;
        let (h1, w1) = ws1.at(&x)?;
        let (h2, w2) = ws2.at(&x)?;
        let mut r = Jet::zero(x[0].config());
        for i in 0..n {
            for j in 0..n {
                r = &r + &(h2.inv.get(&[i, j]) * h1.g.get(&[j, i]));
            }
        }
        let r = r.scale(1.0 / n as f64);
        if r.value().abs() < DEGENERACY_FLOOR {
            return Err(Error::Degenerate {
                what: "ρ²",
                value: r.value(),
            });
        }
        let r0 = r.value();
        let tf = h1.g.truncate(0)?.sub(&h2.g.truncate(0)?.scale(r0))?;
        rep.conformal_misfit = rep
            .conformal_misfit
            .max(relative(tf.norm(), h1.g.truncate(0)?.norm()));
        let lr = if r0 < 0.0 { (-&r).ln()? } else { r.ln()? };
        let mut acc = 0.0;
        for i in 0..n {
            let v = w1.comps[i].value() - w2.comps[i].value() - lr.derivative(i)?.value();
            acc += v * v;
        }
        rep.omega_misfit = rep.omega_misfit.max(acc.sqrt());
        rep.rho2.push(r0);
    }
    Ok(rep)
}

/// `|dV + ½ωV − ⋆_h dα|` at a point.
pub fn monopole_residual(
    ws: &WeylStructure,
    v: &TensorField,
    alpha: &TensorField,
    point: &[f64],
) -> Result<f64> {
    if v.rank() != 0 || alpha.variance != [Slot::Down] {
        return Err(Error::Variance("need a scalar V and a one-form α".into()));
    }
    let x = seed(point, 1)?;
    let (h, w) = ws.at(&x)?;
    let vj = v.at(&x)?.comps[0].clone();
    let da = d(&Form::one_form(alpha.at(&x)?.comps)?)?;
    let star = hodge_star(&h.truncate(0)?, &da)?;
    let v0 = vj.truncate(0)?;
    let mut acc = 0.0;
    for i in 0..ws.dim() {
        let e = vj.derivative(i)?.value() + 0.5 * w.comps[i].value() * v0.value()
            - star.tensor.comps[i].value();
        acc += e * e;
    }
    Ok(acc.sqrt())
}

/// Residuals of the symmetry conditions `L_K h = f h` and
/// `L_K ω = (1/N) d[K⌟d ln|det h|]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EwSymmetry {
    pub res_h: f64,
    pub res_omega: f64,
    pub f: f64,
}

pub fn ew_symmetry_residual(ws: &WeylStructure, k: &TensorField, point: &[f64]) -> Result<EwSymmetry> {
    let n = ws.dim();
    let x = seed(point, 2)?;
    let (h, w) = ws.at(&x)?;
    let kv = k.vector_at(&x)?;
    let lh = lie_derivative(&kv, &h.g)?;
    let h1 = h.truncate(1)?;
    let mut f = Jet::zero(lh.config());
    for i in 0..n {
        for j in 0..n {
            f = &f + &(h1.inv.get(&[i, j]) * lh.get(&[j, i]));
        }
    }
    let f = f.scale(1.0 / n as f64);
    let res_h = lh.sub(&h1.g.scale_jet(&f)?)?.norm();
    let lw = lie_derivative(&kv, &w)?;
    let ld = if h.det.value() < 0.0 { (-&h.det).ln()? } else { h.det.ln()? };
    let dld = Form::one_form((0..n).map(|i| ld.derivative(i)).collect::<std::result::Result<_, _>>()?)?;
    let kv1: Vec<Jet> = kv.iter().map(|c| c.truncate(1)).collect::<std::result::Result<_, _>>()?;
    let contracted = interior(&kv1, &dld)?;
    let rhs = d(&contracted)?.tensor.scale(1.0 / n as f64);
    let res_omega = lw.truncate(0)?.sub(&rhs)?.norm();
    Ok(EwSymmetry {
        res_h,
        res_omega,
        f: f.value(),
    })
}

// ---------------------------------------------------------------------
// Catalogue of quotients
// ---------------------------------------------------------------------

fn section_guard(
    name: &str,
    g4: &MetricField,
    k: &TensorField,
    section: Arc<MapFn>,
) -> Guard {
    let (g, k) = (g4.clone(), k.clone());
    Guard::new(name, NULL_KILLING_FLOOR, move |y| {
        let x4: Vec<f64> = section(&seed(y, 0)?)?.iter().map(Jet::value).collect();
        let x = seed(&x4, 0)?;
        let kv = k.vector_at(&x)?;
        Ok(g.at(&x)?.inner(&kv, &kv)?.value())
    })
}

/// `∂/∂x` on the `(x, y, p, q)` chart.
pub fn d_dx() -> TensorField {
    TensorField::vector(4, |x| {
        let c = x[0].config();
        Ok(vec![Jet::constant(1.0, c), Jet::zero(c), Jet::zero(c), Jet::zero(c)])
    })
}

/// Invariant chart `(p, q, y)` for `K = ∂x`, with sections `x = 0` and
/// `x = 1`. The box is `|p|, |q|, |y| < 1`.
pub fn translation_chart(g4: &MetricField) -> Result<InvariantChart> {
    let sec = |x0: f64| {
        move |y: &[Jet]| -> Result<Vec<Jet>> {
            Ok(vec![Jet::constant(x0, y[0].config()), y[2].clone(), y[0].clone(), y[1].clone()])
        }
    };
    let s0: Arc<MapFn> = Arc::new(sec(0.0));
    let chart = Chart::new(&["p", "q", "y"], &[(-1.0, 1.0); 3])?
        .with_guard(section_guard("|K|²", g4, &d_dx(), s0.clone()));
    Ok(InvariantChart {
        chart,
        invariants: Arc::new(|x: &[Jet]| Ok(vec![x[2].clone(), x[3].clone(), x[1].clone()])),
        section: s0,
        alt_section: Some(Arc::new(sec(1.0))),
    })
}

fn in_y(e: &Expr) -> Expr {
    // normal-form data is written in (x, y); the quotient chart is (p, q, y)
    e.subst(&[Expr::constant(0.0), Expr::var(2)])
}

/// The printed quotient of the one-symmetry normal form by `∂x`, on
/// `(p, q, y)`:
/// `h = V⁻¹((Bq − Ap + q²)dy + dq)dy − ((pq + A)dy + ½dp)²`,
/// `ω = V(4dq + 2p dp)`, `V = (B + p² + q)⁻¹`.
pub fn ew_final(data: &NormalFormData) -> Result<WeylStructure> {
    let (a, b) = (in_y(&data.a), in_y(&data.b));
    let p = Expr::var(0);
    let q = Expr::var(1);
    let c = |v: f64| Expr::constant(v);
    let vinv = b.clone() + p.powi(2) + q.clone();
    let v = c(1.0) / vinv.clone();
    let s = p.clone() * q.clone() + a.clone();
    let h = [
        c(-0.25),
        c(0.0),
        -(s.clone() * c(0.5)),
        c(0.0),
        vinv.clone() * c(0.5),
        vinv * (b * q.clone() - a * p.clone() + q.powi(2)) - s.powi(2),
    ];
    let w = [c(2.0) * p * v.clone(), c(4.0) * v, c(0.0)];
    WeylStructure::from_exprs(3, &h, &w, 1.0)
}

/// Einstein monopole `V = (B + p² + q)⁻¹`, `α = V(pq + A)dy + (V/2)dp`
/// on `(p, q, y)`.
///
/// `B + p² + q` is `|∂x|²`; the monopole equation holds for [`ew_final`]
/// oriented by its sign (see [`WeylStructure::oriented`]).
pub fn einstein_monopole(data: &NormalFormData) -> (TensorField, TensorField) {
    let (a, b) = (in_y(&data.a), in_y(&data.b));
    let p = Expr::var(0);
    let q = Expr::var(1);
    let v = Expr::constant(1.0) / (b + p.powi(2) + q.clone());
    let alpha = vec![
        v.clone() * Expr::constant(0.5),
        Expr::constant(0.0),
        v.clone() * (p * q + a),
    ];
    (
        TensorField::from_exprs(3, vec![], Symmetry::None, vec![v]).expect("scalar"),
        TensorField::from_exprs(3, vec![Slot::Down], Symmetry::None, alpha).expect("one-form"),
    )
}

/// Maxwell monopole `V_M = −pV`, `α_M = q dy − pα`.
pub fn maxwell_monopole(data: &NormalFormData) -> (TensorField, TensorField) {
    let (v, alpha) = einstein_monopole(data);
    let vm = TensorField::scalar(3, move |x| Ok(-(&x[0] * &v.at(x)?.comps[0])));
    let am = TensorField::new(3, vec![Slot::Down], Symmetry::None, move |x| {
        let a = alpha.at(x)?;
        let mut out: Vec<Jet> = a.comps.iter().map(|c| -(&x[0] * c)).collect();
        out[2] = &out[2] + &x[1];
        Ok(out)
    });
    (vm, am)
}

/// `K₃ = y∂x − p∂q` on the `(x, y, p, q)` chart.
pub fn k3_field() -> TensorField {
    TensorField::vector(4, |x| {
        let c = x[0].config();
        Ok(vec![x[1].clone(), Jet::zero(c), Jet::zero(c), -&x[2]])
    })
}

/// Invariants `u = p²/y²`, `v = 2 ln y²`, `w = xp + yq` of `K₃`, with
/// sections `x = 0` and `x = ½` through `y > 0`, `p > 0`.
pub fn k3_chart(g4: &MetricField) -> Result<InvariantChart> {
    let sec = |x0: f64| {
        move |u: &[Jet]| -> Result<Vec<Jet>> {
            let y = u[1].scale(0.25).exp()?;
            let p = &u[0].sqrt()? * &y;
            let q = &(&u[2] - &p.scale(x0)) / &y;
            Ok(vec![Jet::constant(x0, u[0].config()), y, p, q])
        }
    };
    let s0: Arc<MapFn> = Arc::new(sec(0.0));
    let chart = Chart::new(&["u", "v", "w"], &[(0.2, 2.0), (-1.0, 1.0), (-1.0, 1.0)])?
        .with_guard(section_guard("|K₃|²", g4, &k3_field(), s0.clone()))
        .with_guard(Guard::new("u − w + 4", DEGENERACY_FLOOR, |u| Ok(u[0] - u[2] + 4.0)));
    Ok(InvariantChart {
        chart,
        invariants: Arc::new(|x: &[Jet]| {
            let y2 = &x[1] * &x[1];
            Ok(vec![
                &(&x[2] * &x[2]) / &y2,
                y2.ln()?.scale(2.0),
                &(&x[0] * &x[2]) + &(&x[1] * &x[3]),
            ])
        }),
        section: s0,
        alt_section: Some(Arc::new(sec(0.5))),
    })
}

/// The printed quotient of the submaximal structure by `K₃`, on `(u, v, w)`:
/// `h = −du² − 2du dw − w(w² + u − 5w + 4)dv² + 2(u − w + 4)dv dw`,
/// `ω = (du − 3w dv − 4dw)/(u − w + 4)`.
pub fn ew_neat() -> Result<WeylStructure> {
    let u = Expr::var(0);
    let w = Expr::var(2);
    let c = |v: f64| Expr::constant(v);
    let den = u.clone() - w.clone() + c(4.0);
    let h = [
        c(-1.0),
        c(0.0),
        c(-1.0),
        -(w.clone() * (w.powi(2) + u.clone() - c(5.0) * w.clone() + c(4.0))),
        den.clone(),
        c(0.0),
    ];
    let om = [
        c(1.0) / den.clone(),
        -(c(3.0) * w) / den.clone(),
        -(c(4.0) / den),
    ];
    WeylStructure::from_exprs(3, &h, &om, 1.0)
}

/// The quotient of the submaximal structure by `K₃` in the gauge where
/// `ω = (du − 3w dv − 4dw)/(u − w + 4)`:
/// `h = −u⁻¹du² − 2w du⊙dv − w(w² + u − 5w + 4)dv² + 4(u − w + 4)dv⊙dw`.
pub fn ew_neat_derived() -> Result<WeylStructure> {
    let u = Expr::var(0);
    let w = Expr::var(2);
    let c = |v: f64| Expr::constant(v);
    let den = u.clone() - w.clone() + c(4.0);
    let h = [
        -(c(1.0) / u.clone()),
        -w.clone(),
        c(0.0),
        -(w.clone() * (w.powi(2) + u - c(5.0) * w.clone() + c(4.0))),
        c(2.0) * den.clone(),
        c(0.0),
    ];
    let om = [
        c(1.0) / den.clone(),
        -(c(3.0) * w) / den.clone(),
        -(c(4.0) / den),
    ];
    WeylStructure::from_exprs(3, &h, &om, 1.0)
}

/// The model Killing field `x∂x + a y∂y − p∂p − a q∂q`, i.e. the action
/// `P¹∂/∂P¹ − L₁∂/∂L₁ + aP²∂/∂P² − aL₂∂/∂L₂` in affine coordinates.
pub fn model_killing(a: f64) -> TensorField {
    TensorField::vector(4, move |x| {
        Ok(vec![x[0].clone(), x[1].scale(a), -&x[2], x[3].scale(-a)])
    })
}

/// Invariants `u = −xp`, `v = −yq`, `t = x^a q` of [`model_killing`], with
/// sections `x = 1` and `x = 2`. The signs of `u` and `v` follow from
/// raising the spinor index on `L_A`.
pub fn minitwistor_chart(g4: &MetricField, a: f64) -> Result<InvariantChart> {
    let sec = move |x0: f64| {
        move |u: &[Jet]| -> Result<Vec<Jet>> {
            let q = u[2].scale((-a * x0.ln()).exp());
            let y = -&(&u[1] / &q);
            Ok(vec![Jet::constant(x0, u[0].config()), y, u[0].scale(-1.0 / x0), q])
        }
    };
    let s0: Arc<MapFn> = Arc::new(sec(1.0));
    let chart = Chart::new(&["u", "v", "t"], &[(0.2, 1.5), (0.2, 1.5), (0.3, 1.5)])?
        .with_guard(section_guard("|K|²", g4, &model_killing(a), s0.clone()));
    Ok(InvariantChart {
        chart,
        invariants: Arc::new(move |x: &[Jet]| {
            Ok(vec![-&(&x[0] * &x[2]), -&(&x[1] * &x[3]), &x[0].powf(a)? * &x[3]])
        }),
        section: s0,
        alt_section: Some(Arc::new(sec(2.0))),
    })
}

/// The one-forms `A, B, C` of the normal-bundle section `Aλ² + Bλ + C`,
/// as components on `(u, v, t)`.
pub fn minitwistor_forms(a: f64, x: &[Jet]) -> [Vec<Jet>; 3] {
    let (u, v, t) = (&x[0], &x[1], &x[2]);
    let c = x[0].config();
    let t2 = t * t;
    let aa = vec![Jet::zero(c), -&(&t2 * t), &t2 * &v.add_scalar(1.0)];
    let bb = vec![
        -&t2,
        &t2 * &u.scale(2.0).add_scalar(a),
        -&(&(t * u) * v).scale(2.0),
    ];
    let u1 = u.add_scalar(1.0);
    let cc = vec![
        -&(t * v).scale(a),
        -&(&(t * u) * &u1),
        &(u * v) * &u1,
    ];
    [aa, bb, cc]
}

/// Discriminant `B⊙B − 4A⊙C` of the normal-bundle section.
pub fn minitwistor_h(a: f64, x: &[Jet]) -> Result<Tensor> {
    if x.len() != 3 {
        return Err(Error::ChartMismatch {
            expected: 3,
            got: x.len(),
        });
    }
    if x[2].value().abs() < DEGENERACY_FLOOR {
        return Err(Error::Guard("t = 0".into()));
    }
    let [aa, bb, cc] = minitwistor_forms(a, x);
    let b2 = sym_product(&bb, &bb);
    let ac = sym_product(&aa, &cc);
    let comps = b2.iter().zip(&ac).map(|(p, q)| p - &q.scale(4.0)).collect();
    Tensor::new(3, vec![Slot::Down, Slot::Down], comps)
}

/// The printed representative
/// `4(u²v + uv² + uv)dt² − 4tv(a(v+1) + u)dt du + 4tu(u − av + 2v + 1)dt dv
///  − t²du² + 2t²(2av + a + 2u)dv du − t²(a² + 4u(a − 1))dv²`.
pub fn minitwistor_h_printed(a: f64, x: &[Jet]) -> Result<Tensor> {
    let (u, v, t) = (&x[0], &x[1], &x[2]);
    let t2 = t * t;
    let h_tt = (&(&(u * u) * v) + &(&(u * v) * &v.add_scalar(1.0))).scale(4.0);
    let h_tu = -&(&(t * v) * &(&v.add_scalar(1.0).scale(a) + u)).scale(2.0);
    let h_tv = (&(t * u) * &(&(u - &v.scale(a)) + &v.scale(2.0).add_scalar(1.0))).scale(2.0);
    let h_uu = -&t2;
    let h_uv = &t2 * &(&v.scale(2.0 * a).add_scalar(a) + &u.scale(2.0));
    let h_vv = -&(&t2 * &u.scale(4.0 * (a - 1.0)).add_scalar(a * a));
    let comps = vec![
        h_uu,
        h_uv.clone(),
        h_tu.clone(),
        h_uv,
        h_vv,
        h_tv.clone(),
        h_tu,
        h_tv,
        h_tt,
    ];
    Tensor::new(3, vec![Slot::Down, Slot::Down], comps)
}

/// Quotient of a cotangent-bundle metric by a Killing field. The Hodge
/// star in `ω` is taken with orientation [`JONES_TOD_ORIENTATION`], which is
/// opposite to the one making `Ω` anti-self-dual.
pub fn dm_quotient(
    g4: &MetricField,
    k: &TensorField,
    chart: &InvariantChart,
    probe: &[f64],
) -> Result<WeylStructure> {
    let mut g = g4.clone();
    g.orientation = JONES_TOD_ORIENTATION;
    jones_tod_reduce(&g, k, chart, probe, 1e-9)
}
