//! Einstein metrics on the cotangent bundle of a projective manifold.
//!
//! For a torsion-free connection `Γ` on an `n`-dimensional chart with
//! coordinates `x^A`, the space has coordinates `(x^A, z_A)` and carries
//!
//! - the metric `g_Λ = dz_A⊙dx^A − (Γ^C_AB z_C − Λ z_A z_B − Λ⁻¹P_AB) dx^A⊙dx^B`,
//! - the symplectic form `Ω_Λ = dz_A∧dx^A + Λ⁻¹P_AB dx^A∧dx^B`,
//! - the potential `𝒜 = z_A dx^A − Γ^C_AC/(Λ(n+1)) dx^A` with `d𝒜 = Ω_Λ`,
//!
//! where `P` is the projective Schouten tensor. `a⊙b = ½(a⊗b + b⊗a)`.

use crate::curvature::{covariant_derivative, einstein_residual, levi_civita, ConnectionField};
use crate::error::{Error, Result};
use crate::fields::{
    d, seed, sym_product, wedge, with_extra_order, Chart, Convention, Form, MetricAt,
    MetricField, Slot, Symmetry, Tensor, TensorField,
};
use crate::jets::Jet;
use crate::projective::{projective_vector_residual, ProjectiveStructure};

/// Default volume-form orientation for the `n = 2` spaces, under which the
/// forms `dx⁰∧dx¹` and `dz_A∧dx^A` are anti-self-dual.
pub const DM_ORIENTATION: f64 = -1.0;

/// The cotangent-bundle Einstein space of a projective structure.
#[derive(Debug, Clone)]
pub struct DmSpace {
    pub n: usize,
    pub conn: ConnectionField,
    pub lambda: f64,
    pub orientation: f64,
}

/// Assembles the space from a connection on an `n`-dimensional chart.
pub fn build_dm(conn: &ConnectionField, n: usize, lambda: f64) -> Result<DmSpace> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::Invalid("Λ must be nonzero".into()));
    }
    if conn.dim != n || n < 2 {
        return Err(Error::ChartMismatch {
            expected: n,
            got: conn.dim,
        });
    }
    Ok(DmSpace {
        n,
        conn: conn.clone(),
        lambda,
        orientation: DM_ORIENTATION,
    })
}

/// Shorthand for a two-dimensional projective structure.
pub fn build_dm_2d(ps: &ProjectiveStructure, lambda: f64) -> Result<DmSpace> {
    build_dm(&ps.conn, 2, lambda)
}

impl DmSpace {
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// Coordinate names `x0.., z0..`.
    pub fn names(&self) -> Vec<String> {
        let mut v: Vec<String> = (0..self.n).map(|i| format!("x{i}")).collect();
        v.extend((0..self.n).map(|i| format!("z{i}")));
        v
    }

    /// Sampling chart: `|x| < 1.5`, `|z| < 2`, nondegenerate metric.
    pub fn chart(&self) -> Result<Chart> {
        let names = self.names();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let mut bx = vec![(-1.5, 1.5); self.n];
        bx.extend(vec![(-2.0, 2.0); self.n]);
        let metric = self.metric();
        Ok(Chart::new(&refs, &bx)?.with_guard(crate::fields::Guard::new(
            "det g",
            crate::fields::DEGENERACY_FLOOR,
            move |x| Ok(metric.at_point(x, 0)?.det.value()),
        )))
    }

    /// Components of `g_Λ` at coordinate jets.
    pub fn metric_components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let n = self.n;
        let dim = 2 * n;
        if x.len() != dim {
            return Err(Error::ChartMismatch {
                expected: dim,
                got: x.len(),
            });
        }
        let xs = &x[..n];
        let zs = &x[n..];
        let cfg = x[0].config();
        let gam = self.conn.at(xs)?;
        let p = self.conn.schouten_at(xs)?;
        let mut g = vec![Jet::zero(cfg); dim * dim];
        for a in 0..n {
            g[a * dim + n + a] = Jet::constant(0.5, cfg);
            g[(n + a) * dim + a] = Jet::constant(0.5, cfg);
            for b in 0..n {
                let mut s = Jet::zero(cfg);
                for c in 0..n {
                    s = &s + &(gam.get(&[c, a, b]) * &zs[c]);
                }
                s = &s - &(&zs[a] * &zs[b]).scale(self.lambda);
                let psym = (p.get(&[a, b]) + p.get(&[b, a])).scale(0.5);
                s = &s - &psym.scale(1.0 / self.lambda);
                g[a * dim + b] = -s;
            }
        }
        Ok(g)
    }

    pub fn metric(&self) -> MetricField {
        let me = self.clone();
        MetricField::new(2 * self.n, self.orientation, move |x| me.metric_components(x))
    }

    /// Components of `Ω_Λ` (classical) at coordinate jets.
    pub fn omega_components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let n = self.n;
        let dim = 2 * n;
        let cfg = x[0].config();
        let p = self.conn.schouten_at(&x[..n])?;
        let mut w = vec![Jet::zero(cfg); dim * dim];
        for a in 0..n {
            w[(n + a) * dim + a] = Jet::constant(1.0, cfg);
            w[a * dim + n + a] = Jet::constant(-1.0, cfg);
            for b in 0..n {
                let skew = (p.get(&[a, b]) - p.get(&[b, a])).scale(1.0 / self.lambda);
                w[a * dim + b] = skew;
            }
        }
        Ok(w)
    }

    pub fn omega(&self) -> TensorField {
        let me = self.clone();
        TensorField::new(
            2 * self.n,
            vec![Slot::Down, Slot::Down],
            Symmetry::Antisymmetric(Convention::Classical),
            move |x| me.omega_components(x),
        )
    }

    /// Components of the potential `𝒜` at coordinate jets.
    pub fn potential_components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let n = self.n;
        let cfg = x[0].config();
        let gam = self.conn.at(&x[..n])?;
        let k = 1.0 / (self.lambda * (n as f64 + 1.0));
        let mut out = vec![Jet::zero(cfg); 2 * n];
        for a in 0..n {
            let mut tr = Jet::zero(cfg);
            for c in 0..n {
                tr = &tr + gam.get(&[c, a, c]);
            }
            out[a] = &x[n + a] - &tr.scale(k);
        }
        Ok(out)
    }

    pub fn potential(&self) -> TensorField {
        let me = self.clone();
        TensorField::new(2 * self.n, vec![Slot::Down], Symmetry::None, move |x| {
            me.potential_components(x)
        })
    }

    pub fn metric_at(&self, point: &[f64], order: usize) -> Result<MetricAt> {
        self.metric().at_point(point, order)
    }
}

/// Per-point Einstein check.
#[derive(Debug, Clone, PartialEq)]
pub struct EinsteinSample {
    pub point: Vec<f64>,
    pub residual: f64,
    pub scalar: f64,
    pub expected_scalar: f64,
}

impl EinsteinSample {
    pub fn passes(&self, res_tol: f64, scalar_tol: f64) -> bool {
        self.residual <= res_tol && (self.scalar - self.expected_scalar).abs() <= scalar_tol
    }
}

/// Einstein residual and scalar curvature, expected `4n(n+1)Λ`.
pub fn einstein_check(space: &DmSpace, points: &[Vec<f64>]) -> Result<Vec<EinsteinSample>> {
    let expected = 4.0 * space.n as f64 * (space.n as f64 + 1.0) * space.lambda;
    points
        .iter()
        .map(|p| {
            let (residual, scalar) = einstein_residual(&space.metric_at(p, 2)?)?;
            Ok(EinsteinSample {
                point: p.clone(),
                residual,
                scalar,
                expected_scalar: expected,
            })
        })
        .collect()
}

/// Lift of a projective vector field `k` to the cotangent bundle:
/// `K = k^A ∂_A + (Υ_A − z_B ∂_A k^B) ∂/∂z_A`.
///
/// When `upsilon` is `None` it is recovered as `L_kΓ^A_AB/(n+1)`. The field
/// is checked to be projective at `probe` (a point of the base chart).
pub fn killing_lift(
    space: &DmSpace,
    k: &TensorField,
    upsilon: Option<&TensorField>,
    probe: &[f64],
    tol: f64,
) -> Result<TensorField> {
    let n = space.n;
    if k.dim != n || k.variance != [Slot::Up] {
        return Err(Error::Variance("k must be a vector field on the base".into()));
    }
    if n == 2 {
        let ps = ProjectiveStructure {
            conn: space.conn.clone(),
        };
        let (res, _) = projective_vector_residual(&ps, k, probe)?;
        if res > tol {
            return Err(Error::NotProjective(res));
        }
    }
    let ups = match upsilon {
        Some(u) => u.clone(),
        None if n == 2 => crate::projective::upsilon_field(
            &ProjectiveStructure {
                conn: space.conn.clone(),
            },
            k,
        ),
        None => {
            return Err(Error::Invalid(
                "Υ must be supplied for n > 2".into(),
            ))
        }
    };
    let k = k.clone();
    Ok(TensorField::vector(2 * n, move |x| {
        let xs = &x[..n];
        let zs = &x[n..];
        let kv = k.vector_at(xs)?;
        let u = ups.at(xs)?;
        // ∂_A k^B, evaluated with one extra order then composed
        let dk = with_extra_order(xs, 1, |local| {
            let kl = k.vector_at(local)?;
            let mut out = Vec::with_capacity(n * n);
            for a in 0..n {
                for kb in kl.iter() {
                    out.push(kb.derivative(a)?);
                }
            }
            Ok(out)
        })?;
        let mut out = kv;
        for a in 0..n {
            let mut acc = u.comps[a].clone();
            for b in 0..n {
                acc = &acc - &(&zs[b] * &dk[a * n + b]);
            }
            out.push(acc);
        }
        Ok(out)
    }))
}

/// `(|L_K g|, |L_K Ω|)` at a point.
pub fn lift_residuals(space: &DmSpace, big_k: &TensorField, point: &[f64]) -> Result<(f64, f64)> {
    let x = seed(point, 1)?;
    let v = big_k.vector_at(&x)?;
    let g = space.metric().field.at(&x)?;
    let w = space.omega().at(&x)?;
    let lg = crate::fields::lie_derivative(&v, &g)?;
    let lw = crate::fields::lie_derivative(&v, &w)?;
    Ok((lg.norm(), lw.norm()))
}

/// The three self-dual forms `dx^(A∧dz^B) + z^A z^B dx⁰∧dx¹` of the flat
/// model, with indices raised by `ε^{AB}`, in classical components on the
/// chart `(x, y, p, q)`.
pub fn model_sd_forms(x: &[Jet]) -> Vec<Form> {
    let cfg = x[0].config();
    let one = Jet::constant(1.0, cfg);
    let p = &x[2];
    let q = &x[3];
    vec![
        Form::two_form(
            4,
            cfg,
            &[((0, 3), one.clone()), ((0, 1), q * q)],
            Convention::Classical,
        ),
        Form::two_form(
            4,
            cfg,
            &[
                ((0, 2), one.clone()),
                ((1, 3), -&one),
                ((0, 1), (p * q).scale(2.0)),
            ],
            Convention::Classical,
        ),
        Form::two_form(
            4,
            cfg,
            &[((1, 2), -&one), ((0, 1), p * p)],
            Convention::Classical,
        ),
    ]
}

/// Residuals of `dΣ^{AB} + 2𝒜∧Σ^{AB} = 0` (max over the three SD forms)
/// and `∇Σ = c·𝒜⊗Σ` for `Σ = dx⁰∧dx¹`, on an `n = 2` space.
pub fn parallel_structure_residuals_with(
    space: &DmSpace,
    point: &[f64],
    beta_constant: f64,
) -> Result<(f64, f64)> {
    if space.n != 2 {
        return Err(Error::Invalid(format!(
            "parallel structures need n = 2, got {}",
            space.n
        )));
    }
    let x = seed(point, 1)?;
    let pot = Form::new(space.potential().at(&x)?, Convention::Classical)?;
    let pot0 = pot.truncate(0)?;
    let mut hh: f64 = 0.0;
    for s in model_sd_forms(&x) {
        let ds = d(&s)?;
        let aw = wedge(&pot0, &s.truncate(0)?)?.scale(2.0);
        hh = hh.max(ds.add(&aw)?.norm());
    }
    let metric = space.metric().at(&x)?;
    let gamma = levi_civita(&metric)?;
    let cfg = x[0].config();
    let sigma = Form::two_form(4, cfg, &[((0, 1), Jet::constant(1.0, cfg))], Convention::Classical);
    let ds = covariant_derivative(&gamma, &sigma.tensor)?;
    let rhs = pot0.tensor.outer(&sigma.truncate(0)?.tensor)?.scale(beta_constant);
    let beta = ds.sub(&rhs)?.norm();
    Ok((hh, beta))
}

/// Constant in the β-identity as printed in the literature.
pub const BETA_CONSTANT_PRINTED: f64 = 6.0;

/// Constant for which `∇Σ = c𝒜⊗Σ` holds on these coordinates: `3Λ`.
pub fn beta_constant_observed(lambda: f64) -> f64 {
    3.0 * lambda
}

/// [`parallel_structure_residuals_with`] using [`BETA_CONSTANT_PRINTED`].
pub fn parallel_structure_residuals(space: &DmSpace, point: &[f64]) -> Result<(f64, f64)> {
    parallel_structure_residuals_with(space, point, BETA_CONSTANT_PRINTED)
}

/// The Kaluza–Klein lift `𝒢_Λ = g_Λ − Λ(dt/Λ + 𝒜)²` on `(x, z, t)`.
#[derive(Debug, Clone)]
pub struct KkSpace {
    pub base: DmSpace,
}

pub fn kk_lift(space: &DmSpace) -> KkSpace {
    KkSpace {
        base: space.clone(),
    }
}

impl KkSpace {
    pub fn dim(&self) -> usize {
        2 * self.base.n + 1
    }

    pub fn metric_components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let base_dim = 2 * self.base.n;
        let dim = base_dim + 1;
        let inner = &x[..base_dim];
        let g = self.base.metric_components(inner)?;
        let a = self.base.potential_components(inner)?;
        let cfg = x[0].config();
        let lam = self.base.lambda;
        let mut theta = a;
        theta.push(Jet::constant(1.0 / lam, cfg));
        let mut out = vec![Jet::zero(cfg); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let base = if i < base_dim && j < base_dim {
                    g[i * base_dim + j].clone()
                } else {
                    Jet::zero(cfg)
                };
                out[i * dim + j] = &base - &(&theta[i] * &theta[j]).scale(lam);
            }
        }
        Ok(out)
    }

    pub fn metric(&self) -> MetricField {
        let me = self.clone();
        MetricField::new(self.dim(), 1.0, move |x| me.metric_components(x))
    }

    /// Sampling chart of the base with `t ∈ (−1, 1)` appended.
    pub fn chart(&self) -> Result<Chart> {
        let base = self.base.chart()?;
        let mut names: Vec<&str> = base.names.iter().map(|s| s.as_str()).collect();
        names.push("t");
        let mut bx = base.domain_box.clone();
        bx.push((-1.0, 1.0));
        let mut chart = Chart::new(&names, &bx)?;
        let metric = self.metric();
        chart.guards.push(crate::fields::Guard::new(
            "det G",
            crate::fields::DEGENERACY_FLOOR,
            move |x| Ok(metric.at_point(x, 0)?.det.value()),
        ));
        Ok(chart)
    }

    /// `(residual, scalar)`; the scalar is expected to be `2n(2n+1)Λ`.
    pub fn einstein_at(&self, point: &[f64]) -> Result<(f64, f64)> {
        einstein_residual(&self.metric().at_point(point, 2)?)
    }

    pub fn expected_scalar(&self) -> f64 {
        let n = self.base.n as f64;
        2.0 * n * (2.0 * n + 1.0) * self.base.lambda
    }
}

/// `|∇^c F_cb|` for a 2-form field on the space (Levi-Civita of `g_Λ`).
pub fn divergence_of(space: &DmSpace, f: &TensorField, point: &[f64]) -> Result<f64> {
    let x = seed(point, 1)?;
    let metric = space.metric().at(&x)?;
    let gamma = levi_civita(&metric)?;
    let w = f.at(&x)?;
    let dw = covariant_derivative(&gamma, &w)?; // [a][c][b]
    let inv = metric.inv.truncate(0)?;
    let n = space.dim();
    let mut acc = 0.0;
    for b in 0..n {
        let mut s = 0.0;
        for a in 0..n {
            for c in 0..n {
                s += inv.get(&[c, a]).value() * dw.get(&[a, c, b]).value();
            }
        }
        acc += s * s;
    }
    Ok(acc.sqrt())
}

/// `|∇^c Ω_cb|` for the symplectic form of the space.
pub fn omega_divergence(space: &DmSpace, point: &[f64]) -> Result<f64> {
    divergence_of(space, &space.omega(), point)
}

/// `|d𝒜 − Ω|` at a point.
pub fn potential_residual(space: &DmSpace, point: &[f64]) -> Result<f64> {
    let x = seed(point, 1)?;
    let a = Form::new(space.potential().at(&x)?, Convention::Classical)?;
    let w = Form::new(space.omega().at(&x)?, Convention::Classical)?.truncate(0)?;
    Ok(d(&a)?.sub(&w)?.norm())
}

/// The flat quadric embedding `(x, z, τ) ↦ (X^α, Y_α)` with
/// `X^A = x^A e^τ`, `X^n = e^τ`, `Y_A = z_A e^{−τ}`,
/// `Y_n = e^{−τ}(1/Λ − x·z)`.
pub fn quadric_map(lambda: f64, n: usize, x: &[Jet]) -> Result<Vec<Jet>> {
    if x.len() != 2 * n + 1 {
        return Err(Error::ChartMismatch {
            expected: 2 * n + 1,
            got: x.len(),
        });
    }
    let tau = &x[2 * n];
    let et = tau.exp()?;
    let emt = (-tau).exp()?;
    let mut out = Vec::with_capacity(2 * n + 2);
    for a in 0..n {
        out.push(&x[a] * &et);
    }
    out.push(et.clone());
    let mut xz = Jet::zero(x[0].config());
    for a in 0..n {
        out.push(&x[n + a] * &emt);
        xz = &xz + &(&x[a] * &x[n + a]);
    }
    out.push(&(-xz).add_scalar(1.0 / lambda) * &emt);
    Ok(out)
}

/// `(|pullback of dX^α⊙dY_α − (g_Λ − Λ(dτ/Λ + z·dx)²)|, |X·Y − 1/Λ|)`
/// for the flat structure, at a point of the `(x, z, τ)` chart.
pub fn quadric_embedding_check(lambda: f64, n: usize, point: &[f64]) -> Result<(f64, f64)> {
    if lambda == 0.0 {
        return Err(Error::Invalid("Λ must be nonzero".into()));
    }
    let x = seed(point, 1)?;
    let map = quadric_map(lambda, n, &x)?;
    let m = n + 1;
    let ambient = TensorField::new(2 * m, vec![Slot::Down, Slot::Down], Symmetry::Symmetric, move |y| {
        let cfg = y[0].config();
        let mut g = vec![Jet::zero(cfg); 4 * m * m];
        for a in 0..m {
            g[a * 2 * m + m + a] = Jet::constant(0.5, cfg);
            g[(m + a) * 2 * m + a] = Jet::constant(0.5, cfg);
        }
        Ok(g)
    });
    let pulled = crate::fields::pullback_field(&map, &ambient)?;
    let flat = build_dm(&ConnectionField::flat(n), n, lambda)?;
    let x0 = seed(point, 0)?;
    let g = flat.metric_components(&x0[..2 * n])?;
    let dim = 2 * n + 1;
    let cfg = x0[0].config();
    let mut theta: Vec<Jet> = (0..n).map(|a| x0[n + a].clone()).collect();
    theta.extend((0..n).map(|_| Jet::zero(cfg)));
    theta.push(Jet::constant(1.0 / lambda, cfg));
    let th2 = sym_product(&theta, &theta);
    let mut worst: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let base = if i < 2 * n && j < 2 * n {
                g[i * 2 * n + j].value()
            } else {
                0.0
            };
            let want = base - lambda * th2[i * dim + j].value();
            worst = worst.max((pulled.get(&[i, j]).value() - want).abs());
        }
    }
    let mut xy = 0.0;
    for a in 0..m {
        xy += map[a].value() * map[m + a].value();
    }
    Ok((worst, (xy - 1.0 / lambda).abs()))
}

/// `g = dP·dL + (L·dP)²` for jets of `P` and `L` in the chart coordinates,
/// subject to `P·L = 1`.
pub fn incidence_metric(p: &[Jet], l: &[Jet]) -> Result<Tensor> {
    if p.len() != l.len() {
        return Err(Error::Invalid("P and L must have equal length".into()));
    }
    let mut pl = 0.0;
    for (a, b) in p.iter().zip(l) {
        pl += a.value() * b.value();
    }
    if (pl - 1.0).abs() > 1e-12 {
        return Err(Error::Invalid(format!("P·L = {pl}, expected 1")));
    }
    let dim = p[0].dim();
    let order = p[0].order();
    if order == 0 {
        return Err(Error::InsufficientOrder { need: 1, have: 0 });
    }
    let dp: Vec<Vec<Jet>> = p
        .iter()
        .map(|f| (0..dim).map(|a| f.derivative(a)).collect::<std::result::Result<_, _>>())
        .collect::<std::result::Result<_, _>>()?;
    let dl: Vec<Vec<Jet>> = l
        .iter()
        .map(|f| (0..dim).map(|a| f.derivative(a)).collect::<std::result::Result<_, _>>())
        .collect::<std::result::Result<_, _>>()?;
    let lt: Vec<Jet> = l
        .iter()
        .map(|f| f.truncate(order - 1))
        .collect::<std::result::Result<_, _>>()?;
    let cfg = dp[0][0].config();
    let ldp: Vec<Jet> = (0..dim)
        .map(|a| {
            let mut acc = Jet::zero(cfg);
            for i in 0..p.len() {
                acc = &acc + &(&lt[i] * &dp[i][a]);
            }
            acc
        })
        .collect();
    let mut comps = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            let mut acc = &ldp[a] * &ldp[b];
            for i in 0..p.len() {
                let s = &(&dp[i][a] * &dl[i][b]) + &(&dp[i][b] * &dl[i][a]);
                acc = &acc + &s.scale(0.5);
            }
            comps.push(acc);
        }
    }
    Tensor::new(dim, vec![Slot::Down, Slot::Down], comps)
}

/// Affine parametrization `P = (x⁰, x¹, 1)`, `L = (z₀, z₁, 1 − x·z)`.
pub fn affine_incidence(x: &[Jet]) -> (Vec<Jet>, Vec<Jet>) {
    let cfg = x[0].config();
    let p = vec![x[0].clone(), x[1].clone(), Jet::constant(1.0, cfg)];
    let xz = &(&x[0] * &x[2]) + &(&x[1] * &x[3]);
    let l = vec![x[2].clone(), x[3].clone(), (-xz).add_scalar(1.0)];
    (p, l)
}

/// Incidence polarization `(P·L)(P̃·L̃) − (P̃·L)(P·L̃)` between two points.
pub fn incidence_polarization(p: &[f64], l: &[f64], pt: &[f64], lt: &[f64]) -> f64 {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
    dot(p, l) * dot(pt, lt) - dot(pt, l) * dot(p, lt)
}
