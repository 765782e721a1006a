//! Suites on three-dimensional Einstein-Weyl structures and their origin as
//! quotients.

use ewtoda::dm_einstein::build_dm_2d;
use ewtoda::einstein_weyl::*;
use ewtoda::fields::{seed, Chart, Guard, MetricField, Slot, Symmetry, TensorField};
use ewtoda::projective::{normal_form_structure, submaximal_structure, NormalFormData};
use ewtoda::toda::catalog;
use ewtoda::toda::tod::{appendix_b_chart, gh_killing, gh_triholomorphic, gh_triholomorphic_chart, gibbons_hawking, GH_ORIENTATION};
use ewtoda::toda::build_toda_ew;
use ewtoda::{Expr, Jet};

use super::einstein::flat;
use super::{proportionality_misfit, Check, Ctx};
use crate::error::Result;

const EW_TOL: f64 = 1e-8;

fn einstein_1(data: &NormalFormData) -> Result<MetricField> {
    Ok(build_dm_2d(&normal_form_structure(data), 1.0)?.metric())
}

fn submaximal() -> Result<MetricField> {
    Ok(build_dm_2d(&submaximal_structure(1.0), 1.0)?.metric())
}

/// Pointwise gauge comparison as a check.
fn gauge_check(c: Check, a: &WeylStructure, b: &WeylStructure, p: &[f64], tol: f64) -> ewtoda::Result<Check> {
    let rep = gauge_equivalent(a, b, &[p.to_vec()], tol)?;
    Ok(c.max("conformal", rep.conformal_misfit, tol).max("omega", rep.omega_misfit, tol))
}

fn const_vector(c: [f64; 3]) -> TensorField {
    TensorField::vector(3, move |x| {
        let cfg = x[0].config();
        Ok(c.iter().map(|v| Jet::constant(*v, cfg)).collect())
    })
}

pub fn jones_tod(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..2 {
        let (label, data) = ctx.draw_normal_form()?;
        let g4 = einstein_1(&data)?;
        let ic = translation_chart(&g4)?;
        let pts = ctx.sample(&ic.chart, ctx.share(2))?;
        let jt = dm_quotient(&g4, &d_dx(), &ic, &pts[0].point)?;
        let printed = ew_final(&data)?;
        ctx.run(&format!("translation;{label}"), &pts, |p| {
            let c = Check::new()
                .max("ew_quotient", ew_residual(&jt, p)?, EW_TOL)
                .max("ew_printed", ew_residual(&printed, p)?, EW_TOL);
            gauge_check(c, &jt, &printed, p, 1e-8)
        });
    }
    let g4 = submaximal()?;
    let ic = k3_chart(&g4)?;
    let pts = ctx.sample(&ic.chart, ctx.n())?;
    let jt = dm_quotient(&g4, &k3_field(), &ic, &pts[0].point)?;
    let printed = ew_neat()?;
    let derived = ew_neat_derived()?;
    ctx.run("k3-printed", &pts, |p| {
        let c = Check::new().max("ew_printed", ew_residual(&printed, p)?, EW_TOL);
        gauge_check(c, &jt, &printed, p, 1e-8)
    });
    ctx.run("k3-derived", &pts, |p| {
        let c = Check::new()
            .max("ew_quotient", ew_residual(&jt, p)?, EW_TOL)
            .max("ew_derived", ew_residual(&derived, p)?, EW_TOL);
        gauge_check(c, &jt, &derived, p, 1e-8)
    });
    Ok(())
}

/// `ω + 0.1p dy` on the `(p, q, y)` chart, which is not `ω + d(·)`.
pub(super) fn non_exact_perturbation(ws: &WeylStructure) -> ewtoda::Result<WeylStructure> {
    let omega = ws.omega.clone();
    let pert = TensorField::new(3, vec![Slot::Down], Symmetry::None, move |x| {
        let mut w = omega.at(x)?.comps;
        w[2] = &w[2] + &x[0].scale(0.1);
        Ok(w)
    });
    WeylStructure::new(ws.h.clone(), pert)
}

pub fn ew_residuals(ctx: &mut Ctx) -> Result<()> {
    let m = ctx.share(8);
    for _ in 0..2 {
        let (label, data) = ctx.draw_normal_form()?;
        let g4 = einstein_1(&data)?;
        let ic = translation_chart(&g4)?;
        let pts = ctx.sample(&ic.chart, m)?;
        let jt = dm_quotient(&g4, &d_dx(), &ic, &pts[0].point)?;
        ctx.run(&format!("translation;{label}"), &pts, |p| {
            Ok(Check::new().max("ew", ew_residual(&jt, p)?, EW_TOL))
        });
    }
    let g4 = submaximal()?;
    let ic = k3_chart(&g4)?;
    let pts = ctx.sample(&ic.chart, m)?;
    let jt = dm_quotient(&g4, &k3_field(), &ic, &pts[0].point)?;
    ctx.run("k3", &pts, |p| Ok(Check::new().max("ew", ew_residual(&jt, p)?, EW_TOL)));

    let model = flat(2, 1.0)?.metric();
    for a in [0.5, 1.0, 2.0] {
        let ic = minitwistor_chart(&model, a)?;
        let pts = ctx.sample(&ic.chart, m.div_ceil(3))?;
        let jt = dm_quotient(&model, &model_killing(a), &ic, &pts[0].point)?;
        ctx.run(&format!("minitwistor;a={a}"), &pts, |p| {
            Ok(Check::new().max("ew", ew_residual(&jt, p)?, EW_TOL))
        });
    }

    let mut gh = gibbons_hawking();
    gh.orientation = -GH_ORIENTATION;
    for (name, k, ic) in [
        ("gibbons-hawking-translation", gh_triholomorphic(), gh_triholomorphic_chart()?),
        ("gibbons-hawking-rotation", gh_killing()[1].clone(), appendix_b_chart()?),
    ] {
        let pts = ctx.sample(&ic.chart, m.div_ceil(2))?;
        let jt = jones_tod_reduce(&gh, &k, &ic, &pts[0].point, 1e-9)?;
        ctx.run(name, &pts, |p| Ok(Check::new().max("ew", ew_residual(&jt, p)?, EW_TOL)));
    }

    for name in ["example-1", "example-int", "appendix-b", "trivial"] {
        let e = catalog::entry(name)?;
        let ws = build_toda_ew(&e.solution.field(), e.epsilon)?;
        let pts = ctx.sample(e.chart(), m.div_ceil(4))?;
        ctx.run(&format!("toda;{name}"), &pts, |p| {
            Ok(Check::new().max("ew", ew_residual(&ws, p)?, EW_TOL))
        });
    }

    let (_, data) = ctx.draw_normal_form()?;
    let ws = ew_final(&data)?;
    let bad = non_exact_perturbation(&ws)?;
    let chart = translation_chart(&einstein_1(&data)?)?.chart;
    let ctl = ctx.sample(&chart, 5)?;
    ctx.run("non-exact-omega", &ctl, |p| {
        let rep = gauge_equivalent(&ws, &bad, &[p.to_vec()], 1e-8)?;
        Ok(Check::new().min("omega", rep.omega_misfit, 1e-3))
    });
    let xxz = Expr::parse("X*X*Z", &["X", "Y", "Z"]).map_err(ewtoda::Error::from)?;
    let non_solution = build_toda_ew(&TensorField::scalar(3, move |x| Ok(xxz.eval(x)?)), 1.0)?;
    let chart = Chart::new(&["X", "Y", "Z"], &[(0.2, 1.0), (-1.0, 1.0), (0.3, 1.0)])?;
    let ctl = ctx.sample(&chart, 5)?;
    ctx.run("non-solution-toda-pair", &ctl, |p| {
        Ok(Check::new().min("ew", ew_residual(&non_solution, p)?, 1e-3))
    });
    Ok(())
}

pub fn monopoles(ctx: &mut Ctx) -> Result<()> {
    for _ in 0..3 {
        let (label, data) = ctx.draw_normal_form()?;
        let ws = ew_final(&data)?;
        let b = data.b.clone();
        let hf = ws.h.clone();
        let chart = Chart::new(&["p", "q", "y"], &[(-0.9, 0.9); 3])?
            .with_guard(Guard::new("B + p² + q", 0.05, move |x| {
                Ok(b.eval_f64(&[0.0, x[2]])? + x[0] * x[0] + x[1])
            }))
            .with_guard(Guard::new("det h", 1e-6, move |x| Ok(hf.at_point(x, 0)?.det.value())));
        let (v, al) = einstein_monopole(&data);
        let (vm, am) = maxwell_monopole(&data);
        let pts = ctx.sample(&chart, ctx.share(3))?;
        let b = data.b.clone();
        ctx.run(&label, &pts, |p| {
            let k2 = b.eval_f64(&[0.0, p[2]])? + p[0] * p[0] + p[1];
            let oriented = ws.clone().oriented(k2);
            Ok(Check::new()
                .max("einstein_monopole", monopole_residual(&oriented, &v, &al, p)?, 1e-9)
                .max("maxwell_monopole", monopole_residual(&oriented, &vm, &am, p)?, 1e-9))
        });
    }
    Ok(())
}

pub fn symmetry_criterion(ctx: &mut Ctx) -> Result<()> {
    let chart = k3_chart(&submaximal()?)?.chart;
    let dv = const_vector([0.0, 1.0, 0.0]);
    for (name, ws) in [("printed", ew_neat()?), ("derived", ew_neat_derived()?)] {
        let pts = ctx.sample(&chart, ctx.share(2))?;
        ctx.run(name, &pts, |p| {
            let s = ew_symmetry_residual(&ws, &dv, p)?;
            Ok(Check::new()
                .max("lie_h", s.res_h, 1e-10)
                .max("lie_omega", s.res_omega, 1e-10))
        });
    }
    let u_du = TensorField::vector(3, |x| {
        let c = x[0].config();
        Ok(vec![x[0].clone(), Jet::zero(c), Jet::zero(c)])
    });
    let ws = ew_neat_derived()?;
    let ctl = ctx.sample(&chart, 5)?;
    ctx.run("non-symmetry", &ctl, |p| {
        Ok(Check::new().min("lie_h", ew_symmetry_residual(&ws, &u_du, p)?.res_h, 1e-3))
    });
    Ok(())
}

pub fn minitwistor(ctx: &mut Ctx) -> Result<()> {
    let model = flat(2, 1.0)?.metric();
    for a in [0.5, 1.0, 2.0] {
        let ic = minitwistor_chart(&model, a)?;
        let pts = ctx.sample(&ic.chart, ctx.share(3))?;
        let jt = dm_quotient(&model, &model_killing(a), &ic, &pts[0].point)?;
        ctx.run(&format!("printed;a={a}"), &pts, |p| {
            let x = seed(p, 0)?;
            let disc = minitwistor_h(a, &x)?.values();
            let pr = minitwistor_h_printed(a, &x)?.values();
            Ok(Check::new().max("printed_match", proportionality_misfit(&disc, &pr), 1e-10))
        });
        ctx.run(&format!("quotient;a={a}"), &pts, |p| {
            let x = seed(p, 0)?;
            let disc = minitwistor_h(a, &x)?.values();
            let h = jt.h.at(&x)?.g.values();
            Ok(Check::new()
                .max("conformal", proportionality_misfit(&disc, &h), 1e-8)
                .max("ew_quotient", ew_residual(&jt, p)?, EW_TOL))
        });
    }
    Ok(())
}
