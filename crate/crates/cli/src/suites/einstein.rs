//! Suites on the cotangent-bundle Einstein spaces, their lift and the
//! incidence picture.

use ewtoda::curvature::{asd_weyl_residual, einstein_residual, sd_asd_split, ConnectionField};
use ewtoda::dm_einstein::*;
use ewtoda::fields::{pullback_field, seed, Chart, Convention, Form, MetricField, Slot, Symmetry, TensorField};
use ewtoda::projective::{
    apply_upsilon, connection_from_exprs, normal_form_structure, ode_coefficients, NormalFormData,
};
use ewtoda::{Expr, Jet};

use super::{Check, Ctx};
use crate::error::Result;

/// Scale-invariant bound used for identities that hold exactly.
const EXACT: f64 = 1e-10;

pub(super) const LAMBDAS: [f64; 3] = [1.0, -1.0, 0.5];

fn space(data: &NormalFormData, lambda: f64) -> Result<DmSpace> {
    Ok(build_dm_2d(&normal_form_structure(data), lambda)?)
}

pub(super) fn flat(n: usize, lambda: f64) -> Result<DmSpace> {
    Ok(build_dm(&ConnectionField::flat(n), n, lambda)?)
}

/// A torsion-free connection on three coordinates with every symbol a
/// random multiple of a fixed monomial or trigonometric term.
pub(super) fn random_connection3(ctx: &mut Ctx) -> Result<(String, ConnectionField)> {
    const TERMS: [&str; 18] = [
        "x*y", "1", "y", "w", "sin(w)", "x", "w^2", "1", "x", "y*w", "1", "y", "cos(x)", "x", "x*w",
        "1", "y", "w",
    ];
    let src: Vec<String> = TERMS
        .iter()
        .map(|t| format!("({})*{t}", ctx.coefficient()))
        .collect();
    let ex = src
        .iter()
        .map(|s| Expr::parse(s, &["x", "y", "w"]))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(ewtoda::Error::from)?;
    Ok((format!("Γ=[{}]", src.join(",")), connection_from_exprs(3, &ex)))
}

/// The `(label, space)` grid `n ∈ {2, 3}`, `Λ ∈ {1, −1, ½}`; `n = 2` uses a
/// drawn normal form and `n = 3` a drawn connection.
fn grid(ctx: &mut Ctx) -> Result<Vec<(String, DmSpace)>> {
    let (nf, data) = ctx.draw_normal_form()?;
    let (c3, conn) = random_connection3(ctx)?;
    let mut out = Vec::new();
    for lam in LAMBDAS {
        out.push((format!("n=2;Λ={lam};{nf}"), space(&data, lam)?));
    }
    for lam in LAMBDAS {
        out.push((format!("n=3;Λ={lam};{c3}"), build_dm(&conn, 3, lam)?));
    }
    Ok(out)
}

fn upsilon() -> TensorField {
    TensorField::new(2, vec![Slot::Down], Symmetry::None, |x| {
        Ok(vec![x[1].sin()?, (&x[0] * &x[1]).scale(0.5)])
    })
}

/// `|Φ*g' − g|`, `|Φ*Ω' − Ω|` for the fibre shift `z ↦ z + sign·Υ`.
fn shift_residuals(s1: &DmSpace, s2: &DmSpace, ups: &TensorField, pt: &[f64], sign: f64) -> ewtoda::Result<(f64, f64)> {
    let x = seed(pt, 1)?;
    let u = ups.at(&x[..2])?;
    let map = vec![
        x[0].clone(),
        x[1].clone(),
        &x[2] + &u.comps[0].scale(sign),
        &x[3] + &u.comps[1].scale(sign),
    ];
    let x0 = seed(pt, 0)?;
    let dg = pullback_field(&map, &s2.metric().field)?
        .sub(&s1.metric().field.at(&x0)?)?
        .norm();
    let dw = pullback_field(&map, &s2.omega())?.sub(&s1.omega().at(&x0)?)?.norm();
    Ok((dg, dw))
}

pub fn projective_invariance(ctx: &mut Ctx) -> Result<()> {
    let ups = upsilon();
    for _ in 0..3 {
        let (label, data) = ctx.draw_normal_form()?;
        let base = normal_form_structure(&data);
        let moved = apply_upsilon(&base, &ups)?;
        let s1 = build_dm_2d(&base, 1.0)?;
        let s2 = build_dm_2d(&moved, 1.0)?;
        let pts = ctx.sample(&s1.chart()?, ctx.n())?;
        ctx.run(&label, &pts, |p| {
            let (dg, dw) = shift_residuals(&s1, &s2, &ups, p, 1.0)?;
            let x = seed(&p[..2], 0)?;
            let (a, b) = (ode_coefficients(&base, &x)?.values(), ode_coefficients(&moved, &x)?.values());
            let dode = a.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
            Ok(Check::new()
                .max("metric_shift", dg, EXACT)
                .max("omega_shift", dw, EXACT)
                .max("ode_coefficients", dode, EXACT))
        });
        let ctl = ctx.sample(&s1.chart()?, 5)?;
        ctx.run(&format!("wrong-shift;{label}"), &ctl, |p| {
            let (dg, _) = shift_residuals(&s1, &s2, &ups, p, -1.0)?;
            Ok(Check::new().min("metric_shift", dg, 1e-3))
        });
    }
    Ok(())
}

fn einstein_asd(s: &DmSpace, p: &[f64], scalar: f64) -> ewtoda::Result<Check> {
    let m = s.metric_at(p, 2)?;
    let (res, scal) = einstein_residual(&m)?;
    Ok(Check::new()
        .max("einstein", res, 1e-8)
        .max("scalar", (scal - scalar).abs(), 1e-6)
        .max("asd_weyl", asd_weyl_residual(&m)?, 1e-8))
}

pub fn dm_einstein(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..5 {
        let (label, data) = ctx.draw_normal_form()?;
        let s = space(&data, 1.0)?;
        let pts = ctx.sample(&s.chart()?, ctx.n())?;
        ctx.run(&label, &pts, |p| einstein_asd(&s, p, 24.0));
    }
    Ok(())
}

/// A perturbation `0.3(1 + (x⁰)²)dx⁰⊙dz₁` of the flat model that is not ASD.
fn perturbed_model() -> Result<MetricField> {
    let s = flat(2, 1.0)?;
    Ok(MetricField::new(4, DM_ORIENTATION, move |x| {
        let mut g = s.metric_components(x)?;
        let w = (&x[0] * &x[0]).scale(0.3).add_scalar(0.3);
        g[3] = &g[3] + &w.scale(0.5);
        g[12] = &g[12] + &w.scale(0.5);
        Ok(g)
    }))
}

pub fn asd_weyl(ctx: &mut Ctx) -> Result<()> {
    let model = flat(2, 1.0)?;
    let pts = ctx.sample(&model.chart()?, ctx.n())?;
    ctx.run("flat-model", &pts, |p| {
        let m = model.metric_at(p, 2)?;
        let x = seed(p, 0)?;
        let cfg = x[0].config();
        let sigma = Form::two_form(4, cfg, &[((0, 1), Jet::constant(1.0, cfg))], Convention::Classical);
        let omega = model.omega().form_at(&x)?;
        let m0 = m.truncate(0)?;
        let mut sd_of_asd: f64 = 0.0;
        for f in [sigma, omega] {
            sd_of_asd = sd_of_asd.max(sd_asd_split(&m0, &f)?.0.norm());
        }
        let mut asd_of_sd: f64 = 0.0;
        for f in model_sd_forms(&x) {
            asd_of_sd = asd_of_sd.max(sd_asd_split(&m0, &f)?.1.norm());
        }
        Ok(Check::new()
            .max("asd_weyl", asd_weyl_residual(&m)?, 1e-8)
            .max("sd_part_of_omega", sd_of_asd, EXACT)
            .max("asd_part_of_sd_forms", asd_of_sd, EXACT))
    });
    let (label, data) = ctx.draw_normal_form()?;
    let s = space(&data, 1.0)?;
    let pts = ctx.sample(&s.chart()?, ctx.n())?;
    ctx.run(&label, &pts, |p| {
        let m = s.metric_at(p, 2)?;
        let w = s.omega().form_at(&seed(p, 0)?)?;
        Ok(Check::new()
            .max("asd_weyl", asd_weyl_residual(&m)?, 1e-8)
            .max("sd_part_of_omega", sd_asd_split(&m.truncate(0)?, &w)?.0.norm(), EXACT))
    });
    let pert = perturbed_model()?;
    let ctl = ctx.sample(&model.chart()?, 5)?;
    ctx.run("non-asd-perturbation", &ctl, |p| {
        Ok(Check::new().min("asd_weyl", asd_weyl_residual(&pert.at_point(p, 2)?)?, 1e-3))
    });
    Ok(())
}

pub fn kk_lift(ctx: &mut Ctx) -> Result<()> {
    for (label, s) in grid(ctx)? {
        let kk = ewtoda::dm_einstein::kk_lift(&s);
        let want = kk.expected_scalar();
        let pts = ctx.sample(&kk.chart()?, ctx.share(6))?;
        ctx.run(&label, &pts, |p| {
            let (res, scal) = kk.einstein_at(p)?;
            Ok(Check::new()
                .max("einstein", res, 1e-8)
                .max("scalar", (scal - want).abs(), 1e-6))
        });
    }
    Ok(())
}

pub fn appendix_a(ctx: &mut Ctx) -> Result<()> {
    for (label, s) in grid(ctx)? {
        let pts = ctx.sample(&s.chart()?, ctx.share(6))?;
        ctx.run(&label, &pts, |p| {
            let r = &einstein_check(&s, &[p.to_vec()])?[0];
            Ok(Check::new()
                .max("einstein", r.residual, 1e-8)
                .max("scalar", (r.scalar - r.expected_scalar).abs(), 1e-6)
                .max("omega_divergence", omega_divergence(&s, p)?, 1e-9)
                .max("potential", potential_residual(&s, p)?, EXACT))
        });
    }
    let s = flat(2, 1.0)?;
    let bad = TensorField::new(4, vec![Slot::Down, Slot::Down], Symmetry::Antisymmetric(Convention::Classical), |x| {
        let mut w = vec![Jet::zero(x[0].config()); 16];
        let v = &x[0] * &x[2];
        w[1] = v.clone();
        w[4] = -v;
        Ok(w)
    });
    let ctl = ctx.sample(&s.chart()?, 5)?;
    ctx.run("non-closed-form", &ctl, |p| {
        Ok(Check::new().min("omega_divergence", divergence_of(&s, &bad, p)?, 1e-3))
    });
    Ok(())
}

pub fn quadric(ctx: &mut Ctx) -> Result<()> {
    for n in [2usize, 3] {
        let names: Vec<String> = (0..2 * n + 1).map(|i| format!("s{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let chart = Chart::new(&refs, &vec![(-1.0, 1.0); 2 * n + 1])?;
        for lam in LAMBDAS {
            let pts = ctx.sample(&chart, ctx.share(6))?;
            ctx.run(&format!("n={n};Λ={lam}"), &pts, |p| {
                let (r, c) = quadric_embedding_check(lam, n, p)?;
                Ok(Check::new().max("pullback", r, 1e-10).max("quadric", c, 1e-10))
            });
        }
    }
    Ok(())
}

fn affine_values(pt: &[f64]) -> ewtoda::Result<(Vec<f64>, Vec<f64>)> {
    let (p, l) = affine_incidence(&seed(pt, 0)?);
    Ok((p.iter().map(Jet::value).collect(), l.iter().map(Jet::value).collect()))
}

pub fn incidence(ctx: &mut Ctx) -> Result<()> {
    let model = flat(2, 1.0)?;
    let chart = model.chart()?;
    let pts = ctx.sample(&chart, ctx.n())?;
    let dirs: Vec<Vec<f64>> = (0..pts.len())
        .map(|_| (0..4).map(|_| ctx.uniform(-1.0, 1.0)).collect())
        .collect();
    let samples: Vec<_> = pts
        .iter()
        .zip(&dirs)
        .map(|(s, v)| super::Sample {
            point: s.point.iter().chain(v).copied().collect(),
            resamples: s.resamples,
        })
        .collect();
    ctx.run("affine", &samples, |pv| {
        let (base, v) = pv.split_at(4);
        let x = seed(base, 1)?;
        let (p, l) = affine_incidence(&x);
        let g = incidence_metric(&p, &l)?;
        let dm = model.metric().field.at(&seed(base, 0)?)?;
        let metric = g.truncate(0)?.sub(&dm)?.norm();
        let mut gvv = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                gvv += g.get(&[a, b]).value() * v[a] * v[b];
            }
        }
        // Q(ε)/ε² = g(v, v) + O(ε); Richardson removes the linear term
        let (p0, l0) = affine_values(base)?;
        let q = |eps: f64| -> ewtoda::Result<f64> {
            let moved: Vec<f64> = base.iter().zip(v).map(|(b, d)| b + eps * d).collect();
            let (p1, l1) = affine_values(&moved)?;
            Ok(incidence_polarization(&p0, &l0, &p1, &l1) / (eps * eps))
        };
        let eps = 1e-3;
        let rich = 2.0 * q(eps)? - q(2.0 * eps)?;
        Ok(Check::new()
            .max("metric", metric, 1e-12)
            .max("polarization", (rich - gvv).abs() / gvv.abs().max(1.0), 1e-5)
            .max("self_polarization", incidence_polarization(&p0, &l0, &p0, &l0).abs(), 1e-14))
    });
    Ok(())
}

pub fn hyperhermitian(ctx: &mut Ctx) -> Result<()> {
    let model = flat(2, 1.0)?;
    let pts = ctx.sample(&model.chart()?, ctx.n())?;
    ctx.run("lie-form", &pts, |p| {
        Ok(Check::new().max("lie_form", parallel_structure_residuals(&model, p)?.0, 1e-10))
    });
    ctx.run("beta-printed", &pts, |p| {
        Ok(Check::new().max("beta", parallel_structure_residuals(&model, p)?.1, 1e-10))
    });
    for lam in [0.5, 1.0, 2.0] {
        let s = flat(2, lam)?;
        let c = beta_constant_observed(lam);
        let pts = ctx.sample(&s.chart()?, ctx.share(3))?;
        ctx.run(&format!("beta-3Λ;Λ={lam}"), &pts, |p| {
            Ok(Check::new().max("beta", parallel_structure_residuals_with(&s, p, c)?.1, 1e-10))
        });
    }
    let ctl = ctx.sample(&model.chart()?, 5)?;
    ctx.run("beta-wrong-constant", &ctl, |p| {
        Ok(Check::new().min("beta", parallel_structure_residuals_with(&model, p, 5.0)?.1, 1e-3))
    });
    Ok(())
}
