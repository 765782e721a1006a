use ewtoda::curvature::ConnectionField;
use ewtoda::dm_einstein::*;
use ewtoda::einstein_weyl::*;
use ewtoda::fields::{seed, Chart, MetricField, Slot, Symmetry, TensorField};
use ewtoda::projective::{normal_form_structure, submaximal_structure, NormalFormData};
use ewtoda::{Expr, Jet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sample(chart: &Chart, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    chart.sample(n, &mut || rng.gen::<f64>()).unwrap().0
}

fn einstein_1(a: &str, b: &str) -> (NormalFormData, MetricField) {
    let data = NormalFormData::parse(a, b).unwrap();
    let g4 = build_dm_2d(&normal_form_structure(&data), 1.0).unwrap().metric();
    (data, g4)
}

fn submaximal() -> MetricField {
    build_dm_2d(&submaximal_structure(1.0), 1.0).unwrap().metric()
}

fn const_vector(c: [f64; 3]) -> TensorField {
    TensorField::vector(3, move |x| {
        let cfg = x[0].config();
        Ok(c.iter().map(|v| Jet::constant(*v, cfg)).collect())
    })
}

fn u_du() -> TensorField {
    TensorField::vector(3, |x| {
        let c = x[0].config();
        Ok(vec![x[0].clone(), Jet::zero(c), Jet::zero(c)])
    })
}

/// Flat Lorentzian `h` with an arbitrary, generally non-closed `ω`.
fn generic(omega: [&str; 3]) -> WeylStructure {
    let n = ["x", "y", "z"];
    let c = |s: &str| Expr::parse(s, &n).unwrap();
    let h = [c("1"), c("0"), c("0"), c("1"), c("0"), c("-1")];
    let w: Vec<Expr> = omega.iter().map(|s| c(s)).collect();
    WeylStructure::from_exprs(3, &h, &w, 1.0).unwrap()
}

#[test]
fn translation_reduction_matches_printed_quotient() {
    let (data, g4) = einstein_1("y", "1");
    let ic = translation_chart(&g4).unwrap();
    let pts = sample(&ic.chart, 50, 1);
    let jt = dm_quotient(&g4, &d_dx(), &ic, &pts[0]).unwrap();
    let printed = ew_final(&data).unwrap();
    for p in &pts {
        assert!(ew_residual(&jt, p).unwrap() < 1e-8);
        assert!(ew_residual(&printed, p).unwrap() < 1e-8);
    }
    let rep = gauge_equivalent(&jt, &printed, &pts, 1e-8).unwrap();
    assert!(rep.equivalent(), "{rep:?}");
}

#[test]
fn invariant_charts_are_invariant() {
    let (_, g4) = einstein_1("y", "1");
    let ic = translation_chart(&g4).unwrap();
    let (k, rt) = ic.check(&d_dx(), &sample(&ic.chart, 10, 2)).unwrap();
    assert!(k < 1e-12 && rt < 1e-12);
    let g4 = submaximal();
    let ic = k3_chart(&g4).unwrap();
    let (k, rt) = ic.check(&k3_field(), &sample(&ic.chart, 10, 3)).unwrap();
    assert!(k < 1e-12 && rt < 1e-12, "{k} {rt}");
}

#[test]
fn reduction_is_section_independent() {
    let (_, g4) = einstein_1("sin(y)", "y");
    let ic = translation_chart(&g4).unwrap();
    let pts = sample(&ic.chart, 5, 4);
    assert!(section_independence(&g4, &d_dx(), &ic, &pts, 1e-9).unwrap() < 1e-9);
    let g4 = submaximal();
    let ic = k3_chart(&g4).unwrap();
    let pts = sample(&ic.chart, 5, 5);
    assert!(section_independence(&g4, &k3_field(), &ic, &pts, 1e-9).unwrap() < 1e-9);
}

#[test]
fn orientation_flip_breaks_einstein_weyl() {
    let (_, g4) = einstein_1("y", "1");
    let ic = translation_chart(&g4).unwrap();
    let p = [0.3, 0.2, -0.4];
    let good = dm_quotient(&g4, &d_dx(), &ic, &p).unwrap();
    let flipped = jones_tod_reduce(&g4, &d_dx(), &ic, &p, 1e-9).unwrap();
    assert_eq!(g4.orientation, DM_ORIENTATION);
    assert!(ew_residual(&good, &p).unwrap() < 1e-10);
    assert!(ew_residual(&flipped, &p).unwrap() > 1e-3);
}

#[test]
fn k3_reduction_matches_derived_gauge_only() {
    let g4 = submaximal();
    let ic = k3_chart(&g4).unwrap();
    let pts = sample(&ic.chart, 20, 6);
    let jt = dm_quotient(&g4, &k3_field(), &ic, &pts[0]).unwrap();
    let derived = ew_neat_derived().unwrap();
    for p in &pts {
        assert!(ew_residual(&jt, p).unwrap() < 1e-8);
        assert!(ew_residual(&derived, p).unwrap() < 1e-8);
    }
    let rep = gauge_equivalent(&jt, &derived, &pts, 1e-8).unwrap();
    assert!(rep.equivalent(), "{rep:?}");
    // ρ² = 16(u − w + 4)² e^v
    for (p, r) in pts.iter().zip(&rep.rho2) {
        let want = 1.0 / (16.0 * (p[0] - p[2] + 4.0).powi(2) * p[1].exp());
        assert!((r / want - 1.0).abs() < 1e-9, "{r} {want}");
    }
    // the displayed h differs in its du terms and is not Einstein–Weyl
    let printed = ew_neat().unwrap();
    assert!(!gauge_equivalent(&jt, &printed, &pts, 1e-8).unwrap().conformal());
    assert!(ew_residual(&printed, &[0.5, 0.2, -0.4]).unwrap() > 0.1);
}

#[test]
fn translation_symmetry_of_k3_quotient() {
    let p = [0.5, 0.2, -0.4];
    for ws in [ew_neat().unwrap(), ew_neat_derived().unwrap()] {
        let s = ew_symmetry_residual(&ws, &const_vector([0.0, 1.0, 0.0]), &p).unwrap();
        assert!(s.res_h < 1e-10 && s.res_omega < 1e-10 && s.f.abs() < 1e-12, "{s:?}");
        let c = ew_symmetry_residual(&ws, &u_du(), &p).unwrap();
        assert!(c.res_h > 1e-3, "{c:?}");
    }
}

#[test]
fn minitwistor_dt2_coefficient() {
    let (u, v, t) = (0.4, 0.7, 1.3);
    let x = seed(&[u, v, t], 0).unwrap();
    for a in [0.5, 1.0, 2.0] {
        let h = minitwistor_h(a, &x).unwrap();
        let want = -4.0 * t * t * (u * u * v + u * v * v + u * v);
        assert!((h.get(&[2, 2]).value() - want).abs() < 1e-12);
    }
}

#[test]
fn minitwistor_discriminant_against_display() {
    // disc = −t²·h_printed except the dt⊙dv entry, whose sign is reversed
    let p = [0.4, 0.7, 1.3];
    let x = seed(&p, 0).unwrap();
    let disc = minitwistor_h(1.0, &x).unwrap();
    let pr = minitwistor_h_printed(1.0, &x).unwrap();
    let t2 = p[2] * p[2];
    for i in 0..3 {
        for j in 0..3 {
            let (d, h) = (disc.get(&[i, j]).value(), pr.get(&[i, j]).value());
            let sign = if (i, j) == (1, 2) || (i, j) == (2, 1) { 1.0 } else { -1.0 };
            assert!((d - sign * t2 * h).abs() < 1e-12, "{i}{j}: {d} {h}");
        }
    }
    assert!(pr.get(&[1, 2]).value().abs() > 1e-3);
}

#[test]
fn minitwistor_is_conformal_to_quotient() {
    let g4 = build_dm(&ConnectionField::flat(2), 2, 1.0).unwrap().metric();
    for a in [0.5, 1.0, 2.0] {
        let ic = minitwistor_chart(&g4, a).unwrap();
        let k = model_killing(a);
        let pts = sample(&ic.chart, 20, 7);
        let (kr, rt) = ic.check(&k, &pts).unwrap();
        assert!(kr < 1e-12 && rt < 1e-12);
        let jt = dm_quotient(&g4, &k, &ic, &pts[0]).unwrap();
        for p in &pts {
            let x = seed(p, 0).unwrap();
            let disc = minitwistor_h(a, &x).unwrap();
            let h = jt.h.at(&x).unwrap();
            let mut r = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    r += h.inv.get(&[i, j]).value() * disc.get(&[j, i]).value();
                }
            }
            let tf = disc.sub(&h.g.scale(r / 3.0)).unwrap().norm() / disc.norm();
            assert!(tf < 1e-8, "a={a} {p:?}: {tf}");
            assert!(ew_residual(&jt, p).unwrap() < 1e-8);
        }
    }
}

#[test]
fn non_exact_omega_perturbation_is_detected() {
    let (data, _) = einstein_1("y", "1");
    let ws = ew_final(&data).unwrap();
    let omega = ws.omega.clone();
    let pert = TensorField::new(3, vec![Slot::Down], Symmetry::None, move |x| {
        let mut w = omega.at(x)?.comps;
        // 0.1·p dy in the (p, q, y) chart
        w[2] = &w[2] + &x[0].scale(0.1);
        Ok(w)
    });
    let bad = WeylStructure::new(ws.h.clone(), pert).unwrap();
    let pts = vec![vec![0.3, 0.2, -0.4], vec![-0.5, 0.6, 0.2]];
    let rep = gauge_equivalent(&ws, &bad, &pts, 1e-8).unwrap();
    assert!(rep.conformal() && !rep.equivalent());
    assert!(rep.omega_misfit > 1e-3);
}

#[test]
fn symmetry_function_transforms_under_gauge() {
    let ws = ew_neat_derived().unwrap();
    let rho = TensorField::scalar(3, |x| Ok(&x[0].scale(0.3).exp()? * &x[1].add_scalar(2.0)));
    let g = ws.gauge(&rho).unwrap();
    let p = [0.7, 0.3, -0.2];
    let k = const_vector([0.0, 1.0, 0.0]);
    let s = ew_symmetry_residual(&ws, &k, &p).unwrap();
    let sg = ew_symmetry_residual(&g, &k, &p).unwrap();
    // f̂ = f + 2K⌟d ln ρ with K = ∂v and ln ρ = 0.3u + ln(v + 2)
    let want = s.f + 2.0 / (p[1] + 2.0);
    assert!((sg.f - want).abs() < 1e-10, "{} {}", sg.f, want);
    assert!(sg.res_h < 1e-10 && sg.res_omega < 1e-10, "{sg:?}");
}

#[test]
fn monopole_orientation_follows_killing_norm() {
    let data = NormalFormData::parse("0", "0").unwrap();
    let (v, al) = einstein_monopole(&data);
    // |∂x|² = p² + q < 0 here
    let pt = [0.3, -0.5, 0.0];
    let ws = ew_final(&data).unwrap();
    assert!(monopole_residual(&ws, &v, &al, &pt).unwrap() > 1.0);
    let ws = ws.oriented(-1.0);
    assert!(monopole_residual(&ws, &v, &al, &pt).unwrap() < 1e-12);
}

#[test]
fn trivial_monopole() {
    let ws = generic(["0", "0", "0"]);
    let v = TensorField::scalar(3, |x| Ok(Jet::constant(1.0, x[0].config())));
    let a = TensorField::new(3, vec![Slot::Down], Symmetry::None, |x| {
        Ok(vec![Jet::zero(x[0].config()); 3])
    });
    assert_eq!(monopole_residual(&ws, &v, &a, &[0.1, 0.2, 0.3]).unwrap(), 0.0);
}

const DRAWS: [(&str, &str); 5] = [
    ("y", "1"),
    ("0", "0"),
    ("sin(y)", "y^2"),
    ("y^2 - 1", "cos(y)"),
    ("0.5*y", "exp(0.3*y)"),
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ew_residual_is_gauge_invariant(
        a in -1.0f64..1.0, b in -1.0f64..1.0, s in 0.1f64..0.6,
        x in -0.5f64..0.5, y in -0.5f64..0.5, z in -0.5f64..0.5,
    ) {
        let ws = generic(["y*z", "x^2", "sin(x*y)"]);
        let rho = TensorField::scalar(3, move |p| {
            Ok((&(&p[0].scale(a) + &p[1].scale(b)) + &(&p[2] * &p[2]).scale(s)).exp()?)
        });
        let g = ws.gauge(&rho).unwrap();
        let r0 = ew_residual(&ws, &[x, y, z]).unwrap();
        let r1 = ew_residual(&g, &[x, y, z]).unwrap();
        prop_assert!((r0 - r1).abs() < 1e-9, "{} {}", r0, r1);
    }

    #[test]
    fn monopoles_solve_the_equation(i in 0usize..5, p in -0.9f64..0.9, q in -0.9f64..0.9, y in -0.9f64..0.9) {
        let (ai, bi) = DRAWS[i];
        let data = NormalFormData::parse(ai, bi).unwrap();
        let pt = [p, q, y];
        let k2 = data.b.eval_f64(&[0.0, y]).unwrap() + p * p + q;
        prop_assume!(k2.abs() > 0.05);
        let ws = ew_final(&data).unwrap().oriented(k2);
        prop_assume!(ws.h.at(&seed(&pt, 0).unwrap()).map(|m| m.det.value().abs() > 1e-6).unwrap_or(false));
        let (v, al) = einstein_monopole(&data);
        let (vm, am) = maxwell_monopole(&data);
        prop_assert!(monopole_residual(&ws, &v, &al, &pt).unwrap() < 1e-9);
        prop_assert!(monopole_residual(&ws, &vm, &am, &pt).unwrap() < 1e-9);
    }

    #[test]
    fn translation_quotients_are_einstein_weyl(i in 0usize..5, p in -0.8f64..0.8, q in -0.8f64..0.8, y in -0.8f64..0.8) {
        let (ai, bi) = DRAWS[i];
        let (data, g4) = einstein_1(ai, bi);
        let ic = translation_chart(&g4).unwrap();
        let pt = vec![p, q, y];
        prop_assume!(ic.chart.is_valid(&pt));
        let jt = dm_quotient(&g4, &d_dx(), &ic, &pt).unwrap();
        prop_assert!(ew_residual(&jt, &pt).unwrap() < 1e-8);
        let rep = gauge_equivalent(&jt, &ew_final(&data).unwrap(), &[pt], 1e-8).unwrap();
        prop_assert!(rep.equivalent(), "{:?}", rep);
    }
}
