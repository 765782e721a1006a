//! Suites on Toda fields, Tod's construction and the Gibbons-Hawking example.

use ewtoda::curvature::{asd_weyl_residual, einstein_residual};
use ewtoda::dm_einstein::build_dm_2d;
use ewtoda::einstein_weyl::{d_dx, ew_residual, gauge_equivalent, jones_tod_reduce, JONES_TOD_ORIENTATION};
use ewtoda::fields::{lie_derivative, seed, Chart, MetricField, TensorField};
use ewtoda::projective::{normal_form_structure, NormalFormData};
use ewtoda::toda::catalog::{self, CATALOG_NAMES};
use ewtoda::toda::levelset::extract_levelset;
use ewtoda::toda::tod::*;
use ewtoda::toda::{build_toda_ew, parametric_residual, toda_implicit1};
use ewtoda::Expr;

use super::{Check, Ctx, Sample};
use crate::error::Result;

pub(super) const B_FAMILY: [&str; 3] = ["0", "y", "sin(y)"];

pub(super) fn b_expr(src: &str) -> Result<Expr> {
    Ok(Expr::parse(src, &["y"]).map_err(ewtoda::Error::from)?)
}

fn einstein_1(a: &str, b: &str) -> Result<MetricField> {
    let data = NormalFormData::parse(a, b)?;
    Ok(build_dm_2d(&normal_form_structure(&data), 1.0)?.metric())
}

pub fn toda_catalog(ctx: &mut Ctx) -> Result<()> {
    for name in CATALOG_NAMES {
        let e = catalog::entry(name)?;
        let pts = ctx.sample(e.chart(), ctx.n())?;
        ctx.run(name, &pts, |p| Ok(Check::new().max("toda", e.residual(p)?, 1e-7)));
    }
    let chart = Chart::new(&["y", "p", "Z"], &[(-0.8, 0.8), (-1.0, 1.0), (0.3, 1.5)])?;
    for b in B_FAMILY {
        let par = toda_implicit1(&b_expr(b)?, chart.clone());
        let pts = ctx.sample(&chart, ctx.share(3))?;
        ctx.run(&format!("implicit1;B={b}"), &pts, |q| {
            Ok(Check::new().max("parametric_toda", parametric_residual(&par, 1.0, q)?, 1e-8))
        });
    }
    for name in ["example-1", "example-int"] {
        let e = catalog::entry(name)?;
        let Some(par) = e.parametric.clone() else { continue };
        // keep the parameter points whose image lies in the implicit box
        let mut landed = Vec::new();
        let mut spent = 0;
        for s in ctx.sample(&par.chart, ctx.n())? {
            spent += s.resamples + 1;
            if let Ok(v) = par.values(&s.point) {
                if e.chart().is_valid(&v[..3]) {
                    landed.push(Sample {
                        point: s.point,
                        resamples: spent - 1,
                    });
                    spent = 0;
                }
            }
        }
        ctx.run(&format!("agreement;{name}"), &landed, |q| {
            let v = par.values(q)?;
            let u = e.solution.eval(&seed(&v[..3], 0)?)?.value();
            Ok(Check::new().max("implicit_vs_parametric", (u - v[3]).abs(), 1e-9))
        });
    }
    Ok(())
}

/// Two-point moment-map paths `base → p` on `(r, X, ρ, θ)` compared with
/// `Z = ½r^{2/3}ρ²`.
fn moment_checks(ctx: &mut Ctx) -> Result<()> {
    let th = appendix_b_kahler_form();
    // the parallel Kähler form is −ω_B
    let neg = TensorField::new(4, th.variance.clone(), th.symmetry, move |x| Ok(th.at(x)?.scale(-1.0).comps));
    let chart = Chart::new(&["r", "X", "ρ", "θ"], &[(0.4, 1.4), (-0.5, 0.5), (0.4, 1.4), (-0.5, 0.6)])?;
    let base = [0.7, 0.2, 0.8, 0.3];
    let z0 = appendix_b_moment(base[0], base[2]);
    let k = d_dtheta();
    let pts = ctx.sample(&chart, ctx.share(4))?;
    ctx.run("moment-map", &pts, |p| {
        let path = vec![base.to_vec(), p.to_vec()];
        let mp = tod_step2_moment(&k, &neg, &path, 1e-12)?;
        let want = appendix_b_moment(p[0], p[2]) - z0;
        Ok(Check::new().max("moment", (mp.z[1] - want).abs(), 1e-9))
    });
    let loops = ctx.sample(&chart, 3)?;
    ctx.run("moment-loop", &loops, |p| {
        let path = vec![base.to_vec(), p.to_vec(), vec![p[0], base[1], base[2], p[3]], base.to_vec()];
        let mp = tod_step2_moment(&k, &neg, &path, 1e-12)?;
        Ok(Check::new().max("moment", mp.z.last().copied().unwrap_or(f64::NAN).abs(), 1e-9))
    });
    Ok(())
}

/// `X → X + Y` applied to the candidates.
pub(super) fn sheared(c: &TodaCandidates) -> TodaCandidates {
    let mut c = c.clone();
    let (x, y) = (c.x.clone(), c.y.clone());
    c.x = TensorField::scalar(4, move |p| Ok(&x.at(p)?.comps[0] + &y.at(p)?.comps[0]));
    c
}

pub fn tod_steps(ctx: &mut Ctx) -> Result<()> {
    let cand_chart = implicit1_candidate_chart()?;
    for _ in 0..3 {
        let (label, data) = ctx.draw_normal_form()?;
        let g4 = build_dm_2d(&normal_form_structure(&data), 1.0)?.metric();
        let pts = ctx.sample(&cand_chart, ctx.share(4))?;
        ctx.run(&format!("step1;{label}"), &pts, |p| {
            let s = tod_step1(&g4, &d_dx(), p)?;
            Ok(Check::new()
                .max("parallel", s.parallel_res, 1e-9)
                .max("lie_c", s.lie_c.abs(), 1e-11))
        });
    }
    moment_checks(ctx)?;
    for b in B_FAMILY {
        let g4 = einstein_1("0", b)?;
        let cand = implicit1_candidates(&b_expr(b)?);
        let pts = ctx.sample(&cand_chart, ctx.share(6))?;
        ctx.run(&format!("toda-form;B={b}"), &pts, |p| {
            let rep = toda_form_check(&g4, &d_dx(), &cand, 1.0, JONES_TOD_ORIENTATION, &[p.to_vec()])?;
            Ok(Check::new()
                .max("metric", rep.h_misfit, 1e-8)
                .max("one_form", rep.omega_misfit, 1e-8))
        });
    }
    let g4 = einstein_1("0", "y")?;
    let bad = sheared(&implicit1_candidates(&b_expr("y")?));
    let batch = ctx.sample(&cand_chart, 12)?;
    let pts: Vec<Vec<f64>> = batch.iter().map(|s| s.point.clone()).collect();
    let r = toda_form_check(&g4, &d_dx(), &bad, 1.0, JONES_TOD_ORIENTATION, &pts)
        .map(|rep| Check::new().min("form", rep.residual(), 1e-3));
    ctx.single("sheared-candidates", pts[0].clone(), r);
    Ok(())
}

pub fn appendix_b(ctx: &mut Ctx) -> Result<()> {
    let g = gibbons_hawking();
    let kill: Vec<TensorField> = gh_killing().into_iter().chain([gh_triholomorphic()]).collect();
    let pts = ctx.sample(&gh_chart()?, ctx.share(4))?;
    ctx.run("gibbons-hawking", &pts, |p| {
        let m = g.at_point(p, 2)?;
        let (e, s) = einstein_residual(&m)?;
        let x = seed(p, 1)?;
        let gx = g.at(&x)?;
        let mut lk: f64 = 0.0;
        for k in &kill {
            lk = lk.max(lie_derivative(&k.vector_at(&x)?, &gx.g)?.norm());
        }
        Ok(Check::new()
            .max("ricci", e, 1e-8)
            .max("scalar", s.abs(), 1e-8)
            .max("asd_weyl", asd_weyl_residual(&m)?, 1e-8)
            .max("killing", lk, 1e-10))
    });

    let mut gq = gibbons_hawking();
    gq.orientation = -GH_ORIENTATION;
    for (name, k, ic, entry) in [
        ("translation-quotient", gh_triholomorphic(), gh_triholomorphic_chart()?, "trivial"),
        ("rotation-quotient", gh_killing()[1].clone(), appendix_b_chart()?, "appendix-b"),
    ] {
        let pts = ctx.sample(&ic.chart, ctx.share(4))?;
        let jt = jones_tod_reduce(&gq, &k, &ic, &pts[0].point, 1e-9)?;
        let e = catalog::entry(entry)?;
        let toda = build_toda_ew(&e.solution.field(), e.epsilon)?;
        ctx.run(name, &pts, |p| {
            let rep = gauge_equivalent(&jt, &toda, &[p.to_vec()], 1e-7)?;
            Ok(Check::new()
                .max("conformal", rep.conformal_misfit, 1e-7)
                .max("omega", rep.omega_misfit, 1e-7))
        });
    }

    let e = catalog::entry("appendix-b")?;
    let ws = build_toda_ew(&e.solution.field(), e.epsilon)?;
    let pts = ctx.sample(e.chart(), ctx.share(4))?;
    ctx.run("closed-form", &pts, |p| {
        let w = e.solution.eval(&seed(p, 0)?)?.value().exp();
        let cyl = ((w / 6.0 - p[1]) * w * w - 3.0 * p[2] * p[2]).abs() / (w * w * w).max(1.0);
        Ok(Check::new()
            .max("toda", e.residual(p)?, 1e-7)
            .max("parabolic_cylinder", cyl, 1e-12)
            .max("ew", ew_residual(&ws, p)?, 1e-8))
    });

    let u0 = 2f64.ln();
    let r = extract_levelset(&e.solution, u0, 12).map(|cloud| {
        let worst = cloud
            .iter()
            .map(|p| ((2.0 / 6.0 - p[1]) * 4.0 - 3.0 * p[2] * p[2]).abs())
            .fold(0.0, f64::max);
        Check::new()
            .min("points", cloud.len() as f64, 1.0)
            .max("cylinder", worst, 1e-8)
    });
    ctx.single("level-set;U0=ln2", vec![u0], r);
    Ok(())
}
