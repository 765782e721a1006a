//! Tod's construction of Toda coordinates from an ASD Einstein metric with
//! a Killing field, and the Gibbons–Hawking example.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::curvature::{covariant_derivative, levi_civita, relative};
use crate::einstein_weyl::{jones_tod_tensors, InvariantChart, MapFn};
use crate::error::{Error, Result};
use crate::fields::expr::Expr;
use crate::fields::{
    d, hodge_star, interior, pullback_tensor, seed, with_extra_order, Chart, Convention, Form,
    Guard, MetricAt, MetricField, Slot, Symmetry, TensorField,
};
use crate::jets::Jet;
use crate::quad;

/// Smallest admissible `|½F_abF^ab|` for the self-dual derivative `F`.
pub const SD_FLOOR: f64 = 1e-12;

/// Relative tolerance on `d(K⌟Θ)` along a moment-map path.
pub const CLOSEDNESS_TOL: f64 = 1e-10;

/// `g`, `F = dK + ⋆dK` and `½F_abF^ab` at `x`; `F` has one order less.
fn sd_derivative(g4: &MetricField, k: &TensorField, x: &[Jet]) -> Result<(MetricAt, Form, Jet)> {
    let g = g4.at(x)?;
    let kl = g.lower(&k.vector_at(x)?)?;
    let dk = d(&Form::one_form(kl)?)?;
    let star = hodge_star(&g, &dk)?;
    let f = dk.add(&star)?;
    let m = f.order();
    let gm = g.truncate(m)?;
    let ff = gm.contract_full(&f.tensor, &f.tensor)?.scale(0.5);
    if ff.value().abs() < SD_FLOOR {
        return Err(Error::Degenerate {
            what: "self-dual part of dK",
            value: ff.value(),
        });
    }
    Ok((g, f, ff))
}

/// `c = |½F_abF^ab|^{−1/2}` from jets.
fn factor(ff: &Jet) -> Result<Jet> {
    let a = if ff.value() < 0.0 { -ff } else { ff.clone() };
    Ok(a.powf(-0.5)?)
}

/// The conformal factor `c` as a scalar field.
pub fn conformal_factor(g4: &MetricField, k: &TensorField) -> TensorField {
    let (g4, k) = (g4.clone(), k.clone());
    TensorField::scalar(g4.dim(), move |x| {
        let v = with_extra_order(x, 1, |l| Ok(vec![factor(&sd_derivative(&g4, &k, l)?.2)?]))?;
        Ok(v[0].clone())
    })
}

/// `Θ = c³·½(dK + ⋆dK)` as a two-form field (classical components).
pub fn kahler_form(g4: &MetricField, k: &TensorField) -> TensorField {
    let (g4, k) = (g4.clone(), k.clone());
    TensorField::new(
        g4.dim(),
        vec![Slot::Down, Slot::Down],
        Symmetry::Antisymmetric(Convention::Classical),
        move |x| {
            with_extra_order(x, 1, |l| {
                let (_, f, ff) = sd_derivative(&g4, &k, l)?;
                let c = factor(&ff)?;
                let c3 = &(&c * &c) * &c;
                Ok(f.classical().tensor.scale_jet(&c3.scale(0.5))?.comps)
            })
        },
    )
}

/// `ĝ = c²g`.
pub fn kahler_metric(g4: &MetricField, k: &TensorField) -> MetricField {
    let (g, kk) = (g4.clone(), k.clone());
    MetricField::new(g4.dim(), g4.orientation, move |x| {
        with_extra_order(x, 1, |l| {
            let (gm, _, ff) = sd_derivative(&g, &kk, l)?;
            let c = factor(&ff)?;
            let m = ff.order();
            Ok(gm.g.truncate(m)?.scale_jet(&(&c * &c))?.comps)
        })
    })
}

/// Outcome of Step 1 at a point.
#[derive(Debug, Clone)]
pub struct TodStep1 {
    pub c: f64,
    /// `Θ` at the point (classical components, order 0).
    pub theta: Form,
    /// `|∇̂Θ|` for the Levi-Civita connection of `ĝ = c²g`.
    pub parallel_res: f64,
    /// `K(c)`.
    pub lie_c: f64,
}

/// Step 1: conformal factor, Kähler form and its parallelism.
pub fn tod_step1(g4: &MetricField, k: &TensorField, point: &[f64]) -> Result<TodStep1> {
    let x = seed(point, 2)?;
    let (g, f, ff) = sd_derivative(g4, k, &x)?;
    let c = factor(&ff)?;
    let c3 = &(&c * &c) * &c;
    let theta = f.classical().tensor.scale_jet(&c3.scale(0.5))?;
    let ghat = MetricAt::new(g.g.truncate(1)?.scale_jet(&(&c * &c))?, g4.orientation)?;
    let gamma = levi_civita(&ghat)?;
    let nabla = covariant_derivative(&gamma, &theta)?;
    let kv = k.vector_at(&seed(point, 0)?)?;
    let lie_c = (0..g4.dim())
        .map(|a| Ok(kv[a].value() * c.derivative(a)?.value()))
        .sum::<Result<f64>>()?;
    Ok(TodStep1 {
        c: c.value(),
        theta: Form::new(theta.truncate(0)?, Convention::Classical)?,
        parallel_res: nabla.norm(),
        lie_c,
    })
}

/// Moment-map values along a polyline and the worst closedness defect.
#[derive(Debug, Clone)]
pub struct MomentPath {
    /// `Z` at each vertex, with `Z = 0` at the first.
    pub z: Vec<f64>,
    pub closedness: f64,
}

/// Step 2: integrates `dZ = K⌟Θ` along `path` (adaptive quadrature to
/// absolute tolerance `tol` per segment).
pub fn tod_step2_moment(
    k: &TensorField,
    theta: &TensorField,
    path: &[Vec<f64>],
    tol: f64,
) -> Result<MomentPath> {
    if path.is_empty() {
        return Err(Error::Invalid("empty path".into()));
    }
    let iota = |x: &[Jet]| -> Result<Form> { interior(&k.vector_at(x)?, &theta.form_at(x)?.classical()) };
    let mut closedness: f64 = 0.0;
    for p in path {
        let x = seed(p, 1)?;
        let one = iota(&x)?;
        let c = relative(d(&one)?.norm(), theta.at(&x)?.truncate(0)?.norm());
        if c > CLOSEDNESS_TOL {
            return Err(Error::NotClosed(c));
        }
        closedness = closedness.max(c);
    }
    let mut z = vec![0.0];
    for w in path.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let dir: Vec<f64> = a.iter().zip(b).map(|(u, v)| v - u).collect();
        let seg = quad::integrate(
            |t| {
                let q: Vec<f64> = a.iter().zip(&dir).map(|(u, v)| u + t * v).collect();
                let one = iota(&seed(&q, 0)?)?;
                Ok(one.tensor.comps.iter().zip(&dir).map(|(c, v)| c.value() * v).sum())
            },
            0.0,
            1.0,
            tol,
        )?;
        let last = *z.last().expect("non-empty");
        z.push(last + seg);
    }
    Ok(MomentPath { z, closedness })
}

/// Candidate Toda coordinates and potential as functions on the
/// four-manifold.
#[derive(Debug, Clone)]
pub struct TodaCandidates {
    pub x: TensorField,
    pub y: TensorField,
    pub z: TensorField,
    pub u: TensorField,
}

fn scalar4(e: Expr) -> TensorField {
    TensorField::scalar(4, move |x| Ok(e.eval(x)?))
}

/// Closed-form candidates on `(x, y, p, q)` for the normal form with `A = 0`
/// and the given `B(y)`, with `Z = 2(−(p² + 4q))^{−1/2}`.
pub fn implicit1_candidates(b: &Expr) -> TodaCandidates {
    let (y, p, q) = (Expr::var(1), Expr::var(2), Expr::var(3));
    let c = Expr::constant;
    let z = c(2.0) * (-(p.powi(2) + c(4.0) * q)).powf(-0.5);
    // e^{−2∫B} built in one variable, then composed with y
    let e1 = (c(-2.0) * Expr::integral(b.clone(), 0.0, Expr::var(0))).exp();
    let ib = Expr::integral(b.clone(), 0.0, y.clone());
    let e = e1.subst(&[y.clone()]);
    let g = Expr::integral(e1, 0.0, y);
    let den = z.powi(2) * p.powi(2) + c(4.0);
    let x = -(c(8.0) * e.clone() * z.powi(3) * p.clone()) / den.powi(2);
    let yy = g + e * (c(8.0) * z.powi(2) - c(2.0) * z.powi(4) * p.powi(2)) / den.powi(2);
    let u = (den.powi(3) / (c(64.0) * z.powi(2))).ln() + c(4.0) * ib;
    TodaCandidates {
        x: scalar4(x),
        y: scalar4(yy),
        z: scalar4(z),
        u: scalar4(u),
    }
}

/// `(x, y, p, q)` with `p² + 4q ≤ −0.1`, where the candidates are real.
pub fn implicit1_candidate_chart() -> Result<Chart> {
    let chart = Chart::new(&["x", "y", "p", "q"], &[(-1.0, 1.0), (-0.8, 0.8), (-0.8, 0.8), (-1.0, 0.0)])?;
    Ok(chart.with_guard(Guard::new("p² + 4q < 0", 0.1, |x| {
        Ok((-(x[2] * x[2] + 4.0 * x[3])).max(0.0))
    })))
}

/// Agreement of the quotient of `ĝ = c²g` with `κ(e^U(dX² + dY²) − ε dZ²)`
/// and of its one-form with `2U_Z dZ`, both pulled back to the
/// four-manifold. The quotient is taken in the gauge
/// `|K|⁴_ĝ h = |K|²_ĝ ĝ − 𝐊⊗𝐊`, `ω + 2d ln|K|²_ĝ`.
#[derive(Debug, Clone, Copy)]
pub struct FormCheck {
    /// The fitted constant `κ`.
    pub scale: f64,
    pub h_misfit: f64,
    pub omega_misfit: f64,
}

impl FormCheck {
    pub fn residual(&self) -> f64 {
        self.h_misfit.max(self.omega_misfit)
    }
}

/// Steps 3–4 as a verification: checks that closed-form candidates put the
/// quotient of `ĝ` in Toda form. The quotient one-form uses the star of
/// `jt_orientation`.
pub fn toda_form_check(
    g4: &MetricField,
    k: &TensorField,
    cand: &TodaCandidates,
    epsilon: f64,
    jt_orientation: f64,
    points: &[Vec<f64>],
) -> Result<FormCheck> {
    let mut ghat = kahler_metric(g4, k);
    ghat.orientation = jt_orientation;
    let n = g4.dim();
    let mut pairs = Vec::with_capacity(points.len());
    for p in points {
        let x = seed(p, 1)?;
        let (h4, w4) = jones_tod_tensors(&ghat, k, &x)?;
        let gm = ghat.at(&x)?;
        let kv = k.vector_at(&x)?;
        let k2 = gm.inner(&kv, &kv)?;
        let k4 = (&k2 * &k2).value();
        let lk: Vec<f64> = (0..n)
            .map(|i| Ok(2.0 * k2.derivative(i)?.value() / k2.value()))
            .collect::<Result<_>>()?;
        let h4: Vec<f64> = h4.values().iter().map(|v| v * k4).collect();
        let w4: Vec<f64> = w4.values().iter().zip(&lk).map(|(a, b)| a + b).collect();
        let grad = |f: &TensorField| -> Result<(f64, Vec<f64>)> {
            let j = f.at(&x)?.comps[0].clone();
            Ok((j.value(), (0..n).map(|i| j.d1(i)).collect()))
        };
        let (_, dx) = grad(&cand.x)?;
        let (_, dy) = grad(&cand.y)?;
        let (_, dz) = grad(&cand.z)?;
        let (u, du) = grad(&cand.u)?;
        let eu = u.exp();
        let mut target = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                target[a * n + b] = eu * (dx[a] * dx[b] + dy[a] * dy[b]) - epsilon * dz[a] * dz[b];
            }
        }
        // dU = U_X dX + U_Y dY + U_Z dZ on the four-manifold
        let m = DMatrix::from_fn(n, 3, |i, j| [&dx, &dy, &dz][j][i]);
        let svd = m.svd(true, true);
        let coef = svd
            .solve(&DVector::from_vec(du.clone()), 1e-12)
            .map_err(|e| Error::Invalid(e.to_string()))?;
        if svd.singular_values.min() < 1e-10 {
            return Err(Error::Degenerate {
                what: "Jacobian of the candidates",
                value: svd.singular_values.min(),
            });
        }
        let omega: Vec<f64> = dz.iter().map(|v| 2.0 * coef[2] * v).collect();
        pairs.push((h4, target, w4, omega));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (h, t, _, _) in &pairs {
        num += h.iter().zip(t).map(|(a, b)| a * b).sum::<f64>();
        den += t.iter().map(|b| b * b).sum::<f64>();
    }
    if den == 0.0 {
        return Err(Error::Degenerate {
            what: "candidate metric",
            value: 0.0,
        });
    }
    let kappa = num / den;
    let mut rep = FormCheck {
        scale: kappa,
        h_misfit: 0.0,
        omega_misfit: 0.0,
    };
    for (h, t, w, om) in &pairs {
        let dh: f64 = h.iter().zip(t).map(|(a, b)| (a - kappa * b).powi(2)).sum::<f64>().sqrt();
        let hn: f64 = h.iter().map(|a| a * a).sum::<f64>().sqrt();
        rep.h_misfit = rep.h_misfit.max(relative(dh, hn));
        let dw: f64 = w.iter().zip(om).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let wn: f64 = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        rep.omega_misfit = rep.omega_misfit.max(relative(dw, wn));
    }
    Ok(rep)
}

// ---------------------------------------------------------------------
// Gibbons–Hawking example
// ---------------------------------------------------------------------

/// Orientation of `(x, y, z, t)` in which the Gibbons–Hawking metric has
/// vanishing self-dual Weyl curvature.
pub const GH_ORIENTATION: f64 = 1.0;

/// `g = z(dx² + dy² + dz²) + z⁻¹(dt + ½(x dy − y dx))²` on `(x, y, z, t)`.
pub fn gibbons_hawking() -> MetricField {
    MetricField::new(4, GH_ORIENTATION, |x| {
        let z = &x[2];
        let zi = z.recip()?;
        let cfg = z.config();
        let zero = Jet::zero(cfg);
        // θ = dt + ½(x dy − y dx)
        let th = [x[1].scale(-0.5), x[0].scale(0.5), zero.clone(), Jet::constant(1.0, cfg)];
        let mut g = vec![zero; 16];
        for a in 0..4 {
            for b in 0..4 {
                g[a * 4 + b] = &(&th[a] * &th[b]) * &zi;
            }
        }
        for a in 0..3 {
            g[a * 4 + a] = &g[a * 4 + a] + z;
        }
        Ok(g)
    })
}

/// The chart `z > 0` with box `|x|, |y|, |t| < 1`, `z ∈ (0.2, 2)`.
pub fn gh_chart() -> Result<Chart> {
    Chart::new(&["x", "y", "z", "t"], &[(-1.0, 1.0), (-1.0, 1.0), (0.2, 2.0), (-1.0, 1.0)])
}

fn vec4(f: impl Fn(&[Jet]) -> [Jet; 4] + Send + Sync + 'static) -> TensorField {
    TensorField::vector(4, move |x| Ok(f(x).to_vec()))
}

/// `∂t`, `x∂y − y∂x`, `∂x − (y/2)∂t`, `∂y + (x/2)∂t`.
pub fn gh_killing() -> [TensorField; 4] {
    let z = |x: &[Jet]| Jet::zero(x[0].config());
    let one = |x: &[Jet]| Jet::constant(1.0, x[0].config());
    [
        vec4(move |x| [z(x), z(x), z(x), one(x)]),
        vec4(move |x| [-&x[1], x[0].clone(), z(x), z(x)]),
        vec4(move |x| [one(x), z(x), z(x), x[1].scale(-0.5)]),
        vec4(move |x| [z(x), one(x), z(x), x[0].scale(0.5)]),
    ]
}

/// The triholomorphic field `∂x + ∂y + ½(x − y)∂t`.
pub fn gh_triholomorphic() -> TensorField {
    vec4(|x| {
        let c = x[0].config();
        [
            Jet::constant(1.0, c),
            Jet::constant(1.0, c),
            Jet::zero(c),
            (&x[0] - &x[1]).scale(0.5),
        ]
    })
}

/// Invariants `P = (v² − z²)/2`, `Q = vz`, `T = t − ½uv` of
/// [`gh_triholomorphic`], with `u = (x + y)/√2`, `v = (x − y)/√2`.
/// In them the base of the Gibbons–Hawking form along this field is flat:
/// `dP² + dQ² + dT²`. Sections `u = 0` and `u = 0.3`.
pub fn gh_triholomorphic_chart() -> Result<InvariantChart> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let sec = move |u0: f64| {
        move |w: &[Jet]| -> Result<Vec<Jet>> {
            // ζ = v + iz with ζ² = 2P + 2iQ, z > 0
            let (p, q) = (&w[0], &w[1]);
            let m = (&(p * p) + &(q * q)).sqrt()?;
            let v2 = &m + p;
            let z2 = &m - p;
            let z = z2.sqrt()?;
            let v = if q.value() >= 0.0 { v2.sqrt()? } else { -&v2.sqrt()? };
            let x = (&v + u0).scale(s);
            let y = (&(-&v) + u0).scale(s);
            let t = &w[2] + &v.scale(0.5 * u0);
            Ok(vec![x, y, z, t])
        }
    };
    let s0: Arc<MapFn> = Arc::new(sec(0.0));
    let s1: Arc<MapFn> = Arc::new(sec(0.3));
    let chart = Chart::new(&["P", "Q", "T"], &[(-0.8, 0.8), (0.1, 1.0), (-1.0, 1.0)])?;
    Ok(InvariantChart::new(
        chart,
        move |x: &[Jet]| {
            let u = (&x[0] + &x[1]).scale(s);
            let v = (&x[0] - &x[1]).scale(s);
            Ok(vec![
                (&(&v * &v) - &(&x[2] * &x[2])).scale(0.5),
                &v * &x[2],
                &x[3] - &(&u * &v).scale(0.5),
            ])
        },
        move |w: &[Jet]| s0(w),
    )
    .with_alt_section(move |w: &[Jet]| s1(w)))
}

const CBRT_2_3: f64 = 0.873_580_464_736_299_2; // (2/3)^{1/3}
const CBRT_3_2: f64 = 1.144_714_242_553_332; // (3/2)^{1/3}
const CBRT_9_4: f64 = 1.310_370_697_104_448_5; // (9/4)^{1/3}

/// The map `(r, X, ρ, θ) ↦ (x, y, z, t)` with `x + iy = (2/3)^{1/3}ρe^{iθ}`,
/// `z = (9/4)^{1/3}r^{2/3}`, `t = (3/2)^{1/3}X`.
pub fn appendix_b_map(s: &[Jet]) -> Result<Vec<Jet>> {
    let (r, xx, rho, th) = (&s[0], &s[1], &s[2], &s[3]);
    Ok(vec![
        (rho * &th.cos()?).scale(CBRT_2_3),
        (rho * &th.sin()?).scale(CBRT_2_3),
        r.powf(2.0 / 3.0)?.scale(CBRT_9_4),
        xx.scale(CBRT_3_2),
    ])
}

/// Gibbons–Hawking pulled back to `(r, X, ρ, θ)`.
pub fn appendix_b_metric() -> MetricField {
    let gh = gibbons_hawking();
    MetricField::new(4, GH_ORIENTATION, move |s| {
        with_extra_order(s, 1, |l| {
            let map = appendix_b_map(l)?;
            let pt: Vec<f64> = map.iter().map(Jet::value).collect();
            let g = gh.at(&seed(&pt, l[0].order())?)?;
            Ok(pullback_tensor(&map, &g.g)?.comps)
        })
    })
}

/// `ω_B = r^{−1/3}dr∧(dX + ⅓ρ²dθ) + r^{2/3}ρ dρ∧dθ` on `(r, X, ρ, θ)`.
pub fn appendix_b_kahler_form() -> TensorField {
    TensorField::new(
        4,
        vec![Slot::Down, Slot::Down],
        Symmetry::Antisymmetric(Convention::Classical),
        |s| {
            let (r, rho) = (&s[0], &s[2]);
            let a = r.powf(-1.0 / 3.0)?;
            let b = &r.powf(2.0 / 3.0)? * rho;
            let f = Form::two_form(
                4,
                r.config(),
                &[
                    ((0, 1), a.clone()),
                    ((0, 3), &a * &(rho * rho).scale(1.0 / 3.0)),
                    ((2, 3), b),
                ],
                Convention::Classical,
            );
            Ok(f.tensor.comps)
        },
    )
}

/// `∂θ` on `(r, X, ρ, θ)`.
pub fn d_dtheta() -> TensorField {
    vec4(|x| {
        let c = x[0].config();
        [Jet::zero(c), Jet::zero(c), Jet::zero(c), Jet::constant(1.0, c)]
    })
}

/// `Z = ½r^{2/3}ρ²`.
pub fn appendix_b_moment(r: f64, rho: f64) -> f64 {
    0.5 * r.powf(2.0 / 3.0) * rho * rho
}

/// The closed form `e^U = C + 4Y²/C + 2Y` with
/// `C = (8Y³ + 9Z² + 3(16Z²Y³ + 9Z⁴)^{1/2})^{1/3}`, as `U` on `(X, Y, Z)`.
pub fn appendix_b_u() -> Expr {
    let y = Expr::var(1);
    let z = Expr::var(2);
    let k = Expr::constant;
    let disc = k(16.0) * z.powi(2) * y.powi(3) + k(9.0) * z.powi(4);
    let cc = (k(8.0) * y.powi(3) + k(9.0) * z.powi(2) + k(3.0) * disc.sqrt()).powf(1.0 / 3.0);
    (cc.clone() + k(4.0) * y.powi(2) / cc + k(2.0) * y).ln()
}

/// Toda coordinates of the rotation quotient on `(x, y, z, t)`:
/// `X = t/(3/2)^{1/3}`, `Y = ⅓Z r^{−2/3} − ¾r^{4/3}`, `Z = ½r^{2/3}ρ²`.
pub fn appendix_b_toda_coordinates(x: &[Jet]) -> Result<Vec<Jet>> {
    let rho2 = (&(&x[0] * &x[0]) + &(&x[1] * &x[1])).scale(CBRT_3_2 * CBRT_3_2);
    let r23 = x[2].scale(1.0 / CBRT_9_4);
    let zz = (&r23 * &rho2).scale(0.5);
    let yy = &(&zz / &r23).scale(1.0 / 3.0) - &(&r23 * &r23).scale(0.75);
    Ok(vec![x[3].scale(1.0 / CBRT_3_2), yy, zz])
}

/// Invariant chart `(X, Y, Z)` of `x∂y − y∂x` on Gibbons–Hawking with
/// sections `θ = 0` and `θ = 0.4`. On the section `ρ² = e^U` and
/// `r^{2/3} = 2Ze^{−U}`.
pub fn appendix_b_chart() -> Result<InvariantChart> {
    let u = appendix_b_u();
    let sec = move |th: f64| {
        let u = u.clone();
        move |w: &[Jet]| -> Result<Vec<Jet>> {
            let eu = u.eval(w)?.exp()?;
            let r23 = &w[2].scale(2.0) / &eu;
            let rho = eu.sqrt()?;
            Ok(vec![
                rho.scale(CBRT_2_3 * th.cos()),
                rho.scale(CBRT_2_3 * th.sin()),
                r23.scale(CBRT_9_4),
                w[0].scale(CBRT_3_2),
            ])
        }
    };
    let s0: Arc<MapFn> = Arc::new(sec(0.0));
    let s1: Arc<MapFn> = Arc::new(sec(0.4));
    let chart = Chart::new(&["X", "Y", "Z"], &[(-1.0, 1.0), (0.1, 1.0), (0.2, 1.0)])?
        .with_guard(Guard::from_expr("e^U", 1e-8, appendix_b_u().exp()));
    Ok(InvariantChart::new(chart, appendix_b_toda_coordinates, move |w: &[Jet]| s0(w))
        .with_alt_section(move |w: &[Jet]| s1(w)))
}
