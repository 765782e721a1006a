//! Jet derivatives against central finite differences, and the perturbation
//! controls of the other suites.

use std::sync::Arc;

use ewtoda::dm_einstein::{build_dm_2d, kk_lift, parallel_structure_residuals_with};
use ewtoda::einstein_weyl::{
    d_dx, dm_quotient, ew_final, gauge_equivalent, k3_chart, k3_field, minitwistor_chart, minitwistor_h,
};
use ewtoda::fields::{seed, Chart};
use ewtoda::projective::{normal_form_structure, submaximal_structure};
use ewtoda::toda::catalog;
use ewtoda::toda::tod::{gh_chart, gibbons_hawking, implicit1_candidate_chart, implicit1_candidates, toda_form_check};
use ewtoda::toda::toda_implicit1;
use ewtoda::einstein_weyl::JONES_TOD_ORIENTATION;
use ewtoda::Jet;

use super::einstein::flat;
use super::toda::{b_expr, sheared};
use super::weyl::non_exact_perturbation;
use super::{Check, Ctx};
use crate::error::Result;

/// Step for first derivatives.
pub const H1: f64 = 1e-5;
/// Step for second derivatives.
pub const H2: f64 = 1e-4;
/// Relative agreement required, against `max(1, |jet value|)`.
pub const FD_TOL: f64 = 1e-5;
pub const SPOT_CHECKS: usize = 50;

type Components = dyn Fn(&[Jet]) -> ewtoda::Result<Vec<Jet>> + Send + Sync;

struct Probe {
    name: &'static str,
    chart: Chart,
    f: Arc<Components>,
}

impl Probe {
    fn new<F>(name: &'static str, chart: Chart, f: F) -> Probe
    where
        F: Fn(&[Jet]) -> ewtoda::Result<Vec<Jet>> + Send + Sync + 'static,
    {
        Probe {
            name,
            chart,
            f: Arc::new(f),
        }
    }
}

fn values(f: &Components, p: &[f64]) -> ewtoda::Result<Vec<f64>> {
    Ok(f(&seed(p, 0)?)?.iter().map(Jet::value).collect())
}

fn shifted(p: &[f64], steps: &[(usize, f64)]) -> Vec<f64> {
    let mut q = p.to_vec();
    for &(i, h) in steps {
        q[i] += h;
    }
    q
}

/// Largest relative disagreement of first and second derivatives over all
/// components of `f` at `p`.
pub fn fd_disagreement(f: &Components, p: &[f64]) -> ewtoda::Result<(f64, f64)> {
    let n = p.len();
    let jets = f(&seed(p, 2)?)?;
    let rel = |jet: f64, fd: f64| (jet - fd).abs() / jet.abs().max(1.0);
    let at = |steps: &[(usize, f64)]| values(f, &shifted(p, steps));
    let (mut e1, mut e2): (f64, f64) = (0.0, 0.0);
    let f0 = at(&[])?;
    for i in 0..n {
        let (a, b) = (at(&[(i, H1)])?, at(&[(i, -H1)])?);
        for (c, j) in jets.iter().enumerate() {
            e1 = e1.max(rel(j.d1(i), (a[c] - b[c]) / (2.0 * H1)));
        }
        for k in i..n {
            let mut alpha = vec![0; n];
            alpha[i] += 1;
            alpha[k] += 1;
            let fd: Vec<f64> = if i == k {
                let (a, b) = (at(&[(i, H2)])?, at(&[(i, -H2)])?);
                (0..f0.len()).map(|c| (a[c] - 2.0 * f0[c] + b[c]) / (H2 * H2)).collect()
            } else {
                let pp = at(&[(i, H2), (k, H2)])?;
                let pm = at(&[(i, H2), (k, -H2)])?;
                let mp = at(&[(i, -H2), (k, H2)])?;
                let mm = at(&[(i, -H2), (k, -H2)])?;
                (0..f0.len()).map(|c| (pp[c] - pm[c] - mp[c] + mm[c]) / (4.0 * H2 * H2)).collect()
            };
            for (c, j) in jets.iter().enumerate() {
                e2 = e2.max(rel(j.partial(&alpha)?, fd[c]));
            }
        }
    }
    Ok((e1, e2))
}

fn probes(ctx: &mut Ctx) -> Result<Vec<Probe>> {
    let (_, data) = ctx.draw_normal_form()?;
    let dm = build_dm_2d(&normal_form_structure(&data), 1.0)?;
    let kk = kk_lift(&dm);
    let mut out = Vec::new();
    let s = dm.clone();
    out.push(Probe::new("cotangent-metric", dm.chart()?, move |x| s.metric_components(x)));
    let s = dm.clone();
    out.push(Probe::new("cotangent-omega", dm.chart()?, move |x| s.omega_components(x)));
    out.push(Probe::new("kk-metric", kk.chart()?, move |x| kk.metric_components(x)));

    let ws = ew_final(&data)?;
    let chart = ewtoda::einstein_weyl::translation_chart(&dm.metric())?.chart;
    out.push(Probe::new("translation-quotient", chart, move |x| {
        let mut v = ws.h.field.at(x)?.comps;
        v.extend(ws.omega.at(x)?.comps);
        Ok(v)
    }));

    let sub = build_dm_2d(&submaximal_structure(1.0), 1.0)?.metric();
    let ic = k3_chart(&sub)?;
    let probe = ctx.sample(&ic.chart, 1)?[0].point.clone();
    let jt = dm_quotient(&sub, &k3_field(), &ic, &probe)?;
    out.push(Probe::new("k3-quotient", ic.chart.clone(), move |x| {
        let mut v = jt.h.field.at(x)?.comps;
        v.extend(jt.omega.at(x)?.comps);
        Ok(v)
    }));

    for (name, entry) in [
        ("toda-example-1", "example-1"),
        ("toda-example-int", "example-int"),
        ("toda-appendix-b", "appendix-b"),
    ] {
        let e = catalog::entry(entry)?;
        let chart = e.chart().clone();
        out.push(Probe::new(name, chart, move |x| Ok(vec![e.solution.eval(x)?])));
    }

    let cand = implicit1_candidates(&b_expr("y")?);
    out.push(Probe::new("toda-candidates", implicit1_candidate_chart()?, move |x| {
        let mut v = Vec::new();
        for f in [&cand.x, &cand.y, &cand.z, &cand.u] {
            v.push(f.at(x)?.comps[0].clone());
        }
        Ok(v)
    }));

    let gh = gibbons_hawking();
    out.push(Probe::new("gibbons-hawking", gh_chart()?, move |x| Ok(gh.field.at(x)?.comps)));

    let model = flat(2, 1.0)?.metric();
    let chart = minitwistor_chart(&model, 1.0)?.chart;
    out.push(Probe::new("minitwistor-discriminant", chart, |x| Ok(minitwistor_h(1.0, x)?.comps)));

    let pchart = Chart::new(&["y", "p", "Z"], &[(-0.8, 0.8), (-1.0, 1.0), (0.3, 1.5)])?;
    let par = toda_implicit1(&b_expr("sin(y)")?, pchart.clone());
    out.push(Probe::new("parametric-implicit1", pchart, move |x| Ok((par.map)(x)?.to_vec())));
    Ok(out)
}

pub fn oracle(ctx: &mut Ctx) -> Result<()> {
    let probes = probes(ctx)?;
    let total = ctx.n().min(SPOT_CHECKS);
    let k = probes.len();
    for (i, pr) in probes.iter().enumerate() {
        let count = total / k + usize::from(i < total % k);
        if count == 0 {
            continue;
        }
        let pts = ctx.sample(&pr.chart, count)?;
        ctx.run(pr.name, &pts, |p| {
            let (e1, e2) = fd_disagreement(pr.f.as_ref(), p)?;
            Ok(Check::new().max("first", e1, FD_TOL).max("second", e2, FD_TOL))
        });
    }

    let model = flat(2, 1.0)?;
    let pt = ctx.sample(&model.chart()?, 1)?[0].point.clone();
    let r = parallel_structure_residuals_with(&model, &pt, 5.0).map(|(_, b)| Check::new().min("beta", b, 1e-3));
    ctx.single("control;beta-wrong-constant", pt, r);

    let g4 = build_dm_2d(&normal_form_structure(&ewtoda::projective::NormalFormData::parse("0", "y")?), 1.0)?.metric();
    let bad = sheared(&implicit1_candidates(&b_expr("y")?));
    let pts: Vec<Vec<f64>> = ctx
        .sample(&implicit1_candidate_chart()?, 12)?
        .into_iter()
        .map(|s| s.point)
        .collect();
    let r = toda_form_check(&g4, &d_dx(), &bad, 1.0, JONES_TOD_ORIENTATION, &pts)
        .map(|rep| Check::new().min("form", rep.residual(), 1e-3));
    ctx.single("control;sheared-toda-coordinates", pts[0].clone(), r);

    let (_, data) = ctx.draw_normal_form()?;
    let ws = ew_final(&data)?;
    let chart = ewtoda::einstein_weyl::translation_chart(&build_dm_2d(&normal_form_structure(&data), 1.0)?.metric())?.chart;
    let pt = ctx.sample(&chart, 1)?[0].point.clone();
    let r = non_exact_perturbation(&ws)
        .and_then(|bad| gauge_equivalent(&ws, &bad, std::slice::from_ref(&pt), 1e-8))
        .map(|rep| Check::new().min("omega", rep.omega_misfit, 1e-3));
    ctx.single("control;non-exact-omega", pt, r);
    Ok(())
}
