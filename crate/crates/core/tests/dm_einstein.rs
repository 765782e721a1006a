use ewtoda::curvature::{asd_weyl_residual, einstein_residual, sd_asd_split, ConnectionField};
use ewtoda::dm_einstein::*;
use ewtoda::fields::{pullback_field, seed, Convention, Form, Slot, Symmetry, TensorField};
use ewtoda::projective::{
    apply_upsilon, connection_from_exprs, normal_form_structure, submaximal_structure,
    NormalFormData,
};
use ewtoda::{Expr, Jet};
use proptest::prelude::*;

const PT: [f64; 4] = [0.3, 0.4, -0.5, 0.7];

fn nf(a: &str, b: &str, lambda: f64) -> DmSpace {
    build_dm_2d(
        &normal_form_structure(&NormalFormData::parse(a, b).unwrap()),
        lambda,
    )
    .unwrap()
}

fn flat(n: usize, lambda: f64) -> DmSpace {
    build_dm(&ConnectionField::flat(n), n, lambda).unwrap()
}

/// A torsion-free connection on a 3D chart with every symbol populated
/// by a different closed-form expression.
fn curved3() -> ConnectionField {
    let src = [
        "x*y", "0.3", "y", "0", "sin(w)", "x", "w^2", "0", "0.2*x", "y*w", "1", "0", "cos(x)",
        "0", "x*w", "0.5", "y", "0",
    ];
    let ex: Vec<Expr> = src
        .iter()
        .map(|s| Expr::parse(s, &["x", "y", "w"]).unwrap())
        .collect();
    connection_from_exprs(3, &ex)
}

#[test]
fn normal_form_is_asd_einstein_with_scalar_24() {
    let s = nf("sin(y)", "y^2", 1.0);
    let m = s.metric_at(&PT, 2).unwrap();
    let (res, scal) = einstein_residual(&m).unwrap();
    assert!(res < 1e-12);
    assert!((scal - 24.0).abs() < 1e-10);
    assert!(asd_weyl_residual(&m).unwrap() < 1e-12);
}

#[test]
fn flat_model_ricci_is_six_g() {
    let s = flat(2, 1.0);
    let m = s.metric_at(&PT, 2).unwrap();
    let pack = ewtoda::curvature::curvature_pack(&m).unwrap();
    for (r, g) in pack.ricci.comps.iter().zip(&m.g.comps) {
        assert!((r.value() - 6.0 * g.value()).abs() < 1e-12);
    }
}

#[test]
fn appendix_scalars_for_n3() {
    let p6 = [0.2, -0.3, 0.4, 0.5, -0.6, 0.3];
    for (lam, want) in [(1.0, 48.0), (-1.0, -48.0), (0.5, 24.0)] {
        let s = build_dm(&curved3(), 3, lam).unwrap();
        let r = &einstein_check(&s, &[p6.to_vec()]).unwrap()[0];
        assert_eq!(r.expected_scalar, want);
        assert!(r.passes(1e-10, 1e-9), "{r:?}");
        assert!(omega_divergence(&s, &p6).unwrap() < 1e-10);
    }
    let r = &einstein_check(&flat(2, 2.0), &[PT.to_vec()]).unwrap()[0];
    assert!((r.scalar - 48.0).abs() < 1e-9);
}

#[test]
fn kk_scalars() {
    let kk = kk_lift(&flat(2, 1.0));
    let (res, scal) = kk.einstein_at(&[0.1, 0.2, 0.3, -0.4, 0.5]).unwrap();
    assert!(res < 1e-12 && (scal - 20.0).abs() < 1e-9);
    let kk = kk_lift(&nf("y", "1", 1.0));
    let (res, scal) = kk.einstein_at(&[0.1, 0.2, 0.3, -0.4, 0.5]).unwrap();
    assert!(res < 1e-12 && (scal - 20.0).abs() < 1e-9);
    let kk = kk_lift(&flat(3, -1.0));
    assert_eq!(kk.expected_scalar(), -42.0);
    let (res, scal) = kk.einstein_at(&[0.1, 0.2, 0.3, -0.4, 0.5, 0.2, 0.7]).unwrap();
    assert!(res < 1e-12 && (scal + 42.0).abs() < 1e-9);
}

#[test]
fn kk_signature() {
    let kk = kk_lift(&flat(2, 1.0));
    let m = kk.metric().at_point(&[0.1, 0.2, 0.3, -0.4, 0.5], 0).unwrap();
    let mat = nalgebra::DMatrix::from_fn(5, 5, |i, j| m.g.get(&[i, j]).value());
    let eig = mat.symmetric_eigen().eigenvalues;
    let neg = eig.iter().filter(|e| **e < 0.0).count();
    assert_eq!(neg, 3);
}

#[test]
fn killing_lifts_of_submaximal_structure() {
    let sm = build_dm_2d(&submaximal_structure(1.0), 1.0).unwrap();
    let k1 = TensorField::vector(2, |x| Ok(vec![x[0].clone(), -x[1].clone()]));
    let k3 = TensorField::vector(2, |x| Ok(vec![x[1].clone(), Jet::zero(x[0].config())]));
    let (x, y, p, q) = (PT[0], PT[1], PT[2], PT[3]);
    let want = [[x, -y, -p, q], [y, 0.0, 0.0, -p]];
    for (k, w) in [k1, k3].iter().zip(want) {
        let big = killing_lift(&sm, k, None, &[0.3, 0.4], 1e-9).unwrap();
        let v: Vec<f64> = big
            .vector_at(&seed(&PT, 0).unwrap())
            .unwrap()
            .iter()
            .map(Jet::value)
            .collect();
        for (a, b) in v.iter().zip(w) {
            assert!((a - b).abs() < 1e-12, "{v:?} vs {w:?}");
        }
        let (lg, lw) = lift_residuals(&sm, &big, &PT).unwrap();
        assert!(lg < 1e-10 && lw < 1e-10);
    }
}

#[test]
fn translation_lifts_trivially_on_flat() {
    let s = flat(2, 1.0);
    let k = TensorField::vector(2, |x| {
        let c = x[0].config();
        Ok(vec![Jet::constant(1.0, c), Jet::zero(c)])
    });
    let big = killing_lift(&s, &k, None, &[0.0, 0.0], 1e-9).unwrap();
    let v: Vec<f64> = big.vector_at(&seed(&PT, 0).unwrap()).unwrap().iter().map(Jet::value).collect();
    assert_eq!(v, vec![1.0, 0.0, 0.0, 0.0]);
}

#[test]
fn non_projective_field_is_rejected() {
    let s = nf("sin(y)", "y^2", 1.0);
    let k = TensorField::vector(2, |x| Ok(vec![&x[1] * &x[1], x[0].clone()]));
    assert!(matches!(
        killing_lift(&s, &k, None, &[0.3, 0.4], 1e-9),
        Err(ewtoda::Error::NotProjective(_))
    ));
}

#[test]
fn model_hyper_hermitian_and_beta_identities() {
    let s = flat(2, 1.0);
    let (hh, _) = parallel_structure_residuals(&s, &PT).unwrap();
    assert!(hh < 1e-12);
    let (_, beta3) = parallel_structure_residuals_with(&s, &PT, beta_constant_observed(1.0)).unwrap();
    assert!(beta3 < 1e-12);
    let (_, beta5) = parallel_structure_residuals_with(&s, &PT, 5.0).unwrap();
    assert!(beta5 > 1e-3);
}

#[test]
fn beta_identity_scales_with_lambda() {
    for lam in [0.5, 1.0, 2.0] {
        let s = nf("sin(y)", "y^2", lam);
        let (_, b) = parallel_structure_residuals_with(&s, &PT, beta_constant_observed(lam)).unwrap();
        assert!(b < 1e-12, "Λ={lam}: {b}");
    }
}

#[test]
fn printed_beta_constant_residual() {
    // frozen: ∇Σ − 6𝒜⊗Σ on the flat model at PT is 3|𝒜⊗Σ|
    let s = flat(2, 1.0);
    let (_, b) = parallel_structure_residuals(&s, &PT).unwrap();
    let want = 3.0 * 2f64.sqrt() * (PT[2].powi(2) + PT[3].powi(2)).sqrt();
    assert!((b - want).abs() < 1e-12, "{b} vs {want}");
}

#[test]
fn model_two_forms_have_expected_duality() {
    let s = flat(2, 1.0);
    let m = s.metric_at(&PT, 0).unwrap();
    let x = seed(&PT, 0).unwrap();
    let cfg = x[0].config();
    let sigma = Form::two_form(4, cfg, &[((0, 1), Jet::constant(1.0, cfg))], Convention::Classical);
    let omega = s.omega().form_at(&x).unwrap();
    for f in [sigma, omega] {
        let (sd, asd) = sd_asd_split(&m, &f).unwrap();
        assert!(sd.norm() < 1e-13 && asd.norm() > 0.5);
    }
    for f in model_sd_forms(&x) {
        let (sd, asd) = sd_asd_split(&m, &f).unwrap();
        assert!(asd.norm() < 1e-13 && sd.norm() > 0.5);
    }
}

#[test]
fn non_asd_perturbation_detected() {
    let s = flat(2, 1.0);
    let pert = ewtoda::fields::MetricField::new(4, DM_ORIENTATION, move |x| {
        let mut g = s.metric_components(x)?;
        // 0.1·dx⁰⊙dz₁, weighted so the perturbation is not conformally flat
        let w = (&x[0] * &x[3]).scale(0.1).add_scalar(0.1);
        g[3] = &g[3] + &w.scale(0.5);
        g[12] = &g[12] + &w.scale(0.5);
        Ok(g)
    });
    let m = pert.at_point(&PT, 2).unwrap();
    assert!(asd_weyl_residual(&m).unwrap() > 1e-3);
}

#[test]
fn divergence_control_detects_non_closed_form() {
    let s = flat(2, 1.0);
    let f = TensorField::new(4, vec![Slot::Down, Slot::Down], Symmetry::Antisymmetric(Convention::Classical), |x| {
        let c = x[0].config();
        let mut w = vec![Jet::zero(c); 16];
        let v = &x[0] * &x[2];
        w[1] = v.clone();
        w[4] = -v;
        Ok(w)
    });
    assert!(divergence_of(&s, &f, &PT).unwrap() > 1e-3);
}

#[test]
fn quadric_embedding_n3() {
    let (r, c) = quadric_embedding_check(0.5, 3, &[0.1, 0.2, -0.3, 0.4, 0.5, -0.2, 0.3]).unwrap();
    assert!(r < 1e-11 && c < 1e-13);
    assert!(quadric_embedding_check(0.0, 2, &[0.0; 5]).is_err());
}

#[test]
fn polarization_is_second_order_distance() {
    // Q(P, L; P̃, L̃) = ε² g(v, v) + O(ε³) along the affine parametrization
    let base = [0.3, -0.5, 0.8, 0.2];
    let v = [0.4, 0.1, -0.3, 0.6];
    let x = seed(&base, 1).unwrap();
    let (p, l) = affine_incidence(&x);
    let g = incidence_metric(&p, &l).unwrap();
    let mut gvv = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            gvv += g.get(&[a, b]).value() * v[a] * v[b];
        }
    }
    let eval = |pt: &[f64]| {
        let j = seed(pt, 0).unwrap();
        let (p, l) = affine_incidence(&j);
        (
            p.iter().map(Jet::value).collect::<Vec<_>>(),
            l.iter().map(Jet::value).collect::<Vec<_>>(),
        )
    };
    let (p0, l0) = eval(&base);
    for eps in [1e-2, 5e-3] {
        let moved: Vec<f64> = base.iter().zip(&v).map(|(b, d)| b + eps * d).collect();
        let (p1, l1) = eval(&moved);
        let q = incidence_polarization(&p0, &l0, &p1, &l1);
        assert!((q / (eps * eps) - gvv).abs() < 10.0 * eps, "{q} {gvv}");
    }
    assert_eq!(incidence_polarization(&p0, &l0, &p0, &l0), 0.0);
}

fn upsilon() -> TensorField {
    TensorField::new(2, vec![Slot::Down], Symmetry::None, |x| {
        Ok(vec![x[1].sin()?, (&x[0] * &x[1]).scale(0.5)])
    })
}

fn shift_residuals(sign: f64) -> (f64, f64) {
    let data = NormalFormData::parse("sin(y)", "y^2").unwrap();
    let base = normal_form_structure(&data);
    let ups = upsilon();
    let s1 = build_dm_2d(&base, 1.0).unwrap();
    let s2 = build_dm_2d(&apply_upsilon(&base, &ups).unwrap(), 1.0).unwrap();
    let x = seed(&PT, 1).unwrap();
    let u = ups.at(&x[..2]).unwrap();
    let map = vec![
        x[0].clone(),
        x[1].clone(),
        &x[2] + &u.comps[0].scale(sign),
        &x[3] + &u.comps[1].scale(sign),
    ];
    let x0 = seed(&PT, 0).unwrap();
    let dg = pullback_field(&map, &s2.metric().field)
        .unwrap()
        .sub(&s1.metric().field.at(&x0).unwrap())
        .unwrap()
        .norm();
    let dw = pullback_field(&map, &s2.omega())
        .unwrap()
        .sub(&s1.omega().at(&x0).unwrap())
        .unwrap()
        .norm();
    (dg, dw)
}

#[test]
fn projective_invariance_under_fibre_shift() {
    let (dg, dw) = shift_residuals(1.0);
    assert!(dg < 1e-12 && dw < 1e-12);
    let (dg, _) = shift_residuals(-1.0);
    assert!(dg > 1e-3);
}

fn nf_exprs(c: [f64; 4]) -> NormalFormData {
    let y = Expr::var(1);
    NormalFormData {
        a: Expr::constant(c[0]) * y.clone() + Expr::constant(c[1]) * y.sin(),
        b: Expr::constant(c[2]) * y.powi(2) + Expr::constant(c[3]) * y.cos(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prop_einstein_asd_and_closed(
        c in prop::array::uniform4(-1.5f64..1.5),
        lam in prop::sample::select(vec![1.0, -1.0, 0.5, 2.0]),
        pt in prop::array::uniform4(-1.0f64..1.0),
    ) {
        let s = build_dm_2d(&normal_form_structure(&nf_exprs(c)), lam).unwrap();
        let m = s.metric_at(&pt, 2).unwrap();
        let (res, scal) = einstein_residual(&m).unwrap();
        prop_assert!(res < 1e-9);
        prop_assert!((scal - 24.0 * lam).abs() < 1e-8);
        if lam == 1.0 {
            prop_assert!(asd_weyl_residual(&m).unwrap() < 1e-9);
        }
        prop_assert!(potential_residual(&s, &pt).unwrap() < 1e-12);
        let w = Form::new(s.omega().at(&seed(&pt, 1).unwrap()).unwrap(), Convention::Classical).unwrap();
        prop_assert!(ewtoda::fields::d(&w).unwrap().norm() < 1e-11);
        prop_assert!(omega_divergence(&s, &pt).unwrap() < 1e-10);
    }

    #[test]
    fn prop_kk_einstein(
        c in prop::array::uniform4(-1.0f64..1.0),
        lam in prop::sample::select(vec![1.0, -1.0, 0.5]),
        pt in prop::array::uniform4(-1.0f64..1.0),
        t in -1.0f64..1.0,
    ) {
        let kk = kk_lift(&build_dm_2d(&normal_form_structure(&nf_exprs(c)), lam).unwrap());
        let mut p = pt.to_vec();
        p.push(t);
        let (res, scal) = kk.einstein_at(&p).unwrap();
        prop_assert!(res < 1e-8);
        prop_assert!((scal - kk.expected_scalar()).abs() < 1e-7);
    }

    #[test]
    fn prop_quadric(pt in prop::array::uniform5(-1.0f64..1.0), lam in prop::sample::select(vec![1.0, -1.0, 0.5])) {
        let (r, c) = quadric_embedding_check(lam, 2, &pt).unwrap();
        prop_assert!(r < 1e-11 && c < 1e-13);
    }
}
