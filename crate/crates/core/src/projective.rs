//! Two-dimensional projective structures.
//!
//! A projective structure is represented by one torsion-free connection
//! `Γ^C_AB` on a chart with coordinates `(x, y)`. Changing the representative
//! by a one-form `Υ` adds `δ^C_A Υ_B + δ^C_B Υ_A`.

use nalgebra::{DMatrix, DVector};

use crate::curvature::{
    covariant_derivative, ricci, riemann, schouten_from_ricci, ConnectionField,
};
use crate::error::{Error, Result};
use crate::fields::{
    expr::Expr, flat_index, lie_derivative_connection, seed, Slot, Symmetry, Tensor, TensorField,
};
use crate::jets::Jet;

/// A projective structure in two dimensions.
#[derive(Debug, Clone)]
pub struct ProjectiveStructure {
    pub conn: ConnectionField,
}

/// The four coefficients of the geodesic ODE, at a point.
#[derive(Debug, Clone)]
pub struct OdeCoefficients {
    pub a0: Jet,
    pub a1: Jet,
    pub a2: Jet,
    pub a3: Jet,
}

impl OdeCoefficients {
    pub fn values(&self) -> [f64; 4] {
        [
            self.a0.value(),
            self.a1.value(),
            self.a2.value(),
            self.a3.value(),
        ]
    }
}

/// Free functions `A(y)`, `B(y)` of the one-symmetry normal form.
///
/// Both expressions are written in the chart variables `(x, y)`.
#[derive(Debug, Clone)]
pub struct NormalFormData {
    pub a: Expr,
    pub b: Expr,
}

impl NormalFormData {
    /// Parses `A` and `B` as functions of `y`.
    pub fn parse(a: &str, b: &str) -> Result<NormalFormData> {
        Ok(NormalFormData {
            a: Expr::parse(a, &["x", "y"])?,
            b: Expr::parse(b, &["x", "y"])?,
        })
    }
}

impl ProjectiveStructure {
    pub fn new(conn: ConnectionField) -> Result<ProjectiveStructure> {
        if conn.dim != 2 {
            return Err(Error::ChartMismatch {
                expected: 2,
                got: conn.dim,
            });
        }
        Ok(ProjectiveStructure { conn })
    }

    /// Builds a structure from the six independent coefficients
    /// `[Γ⁰₀₀, Γ⁰₀₁, Γ⁰₁₁, Γ¹₀₀, Γ¹₀₁, Γ¹₁₁]` in the variables `(x, y)`.
    pub fn from_exprs(c: [Expr; 6]) -> ProjectiveStructure {
        ProjectiveStructure {
            conn: connection_from_exprs(2, &c),
        }
    }

    pub fn flat() -> ProjectiveStructure {
        ProjectiveStructure {
            conn: ConnectionField::flat(2),
        }
    }

    pub fn gamma_at(&self, x: &[Jet]) -> Result<Tensor> {
        self.conn.at(x)
    }
}

/// Connection from the upper-triangular coefficients `Γ^c_ab`, `a ≤ b`,
/// listed with `c` slowest.
pub fn connection_from_exprs(n: usize, c: &[Expr]) -> ConnectionField {
    let exprs = c.to_vec();
    ConnectionField::new(n, move |x| {
        let cfg = x[0].config();
        let mut out = vec![Jet::zero(cfg); n * n * n];
        let mut k = 0;
        for up in 0..n {
            for a in 0..n {
                for b in a..n {
                    let v = exprs[k].eval(x)?;
                    k += 1;
                    out[flat_index(n, &[up, b, a])] = v.clone();
                    out[flat_index(n, &[up, a, b])] = v;
                }
            }
        }
        Ok(out)
    })
}

/// `a0 = Γ¹₀₀`, `3a1 = −Γ⁰₀₀ + 2Γ¹₀₁`, `3a2 = −2Γ⁰₀₁ + Γ¹₁₁`, `a3 = −Γ⁰₁₁`.
pub fn ode_coefficients(ps: &ProjectiveStructure, x: &[Jet]) -> Result<OdeCoefficients> {
    let g = ps.gamma_at(x)?;
    let c = |u: usize, a: usize, b: usize| g.get(&[u, a, b]).clone();
    Ok(OdeCoefficients {
        a0: c(1, 0, 0),
        a1: (&c(1, 0, 1).scale(2.0) - &c(0, 0, 0)).scale(1.0 / 3.0),
        a2: (&c(1, 1, 1) - &c(0, 0, 1).scale(2.0)).scale(1.0 / 3.0),
        a3: -c(0, 1, 1),
    })
}

/// Changes the representative connection by a one-form field `Υ`.
pub fn apply_upsilon(ps: &ProjectiveStructure, upsilon: &TensorField) -> Result<ProjectiveStructure> {
    if upsilon.variance != [Slot::Down] || upsilon.dim != 2 {
        return Err(Error::Variance("Υ must be a one-form on the 2D chart".into()));
    }
    let base = ps.conn.clone();
    let ups = upsilon.clone();
    Ok(ProjectiveStructure {
        conn: ConnectionField::new(2, move |x| {
            let mut g = base.at(x)?;
            let u = ups.at(x)?;
            for c in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let mut v = g.get(&[c, a, b]).clone();
                        if c == a {
                            v = &v + &u.comps[b];
                        }
                        if c == b {
                            v = &v + &u.comps[a];
                        }
                        g.set(&[c, a, b], v);
                    }
                }
            }
            Ok(g.comps)
        }),
    })
}

/// Schouten tensor `P = R_(AB) + R_[AB]/3` at coordinate jets.
pub fn schouten(ps: &ProjectiveStructure, x: &[Jet]) -> Result<Tensor> {
    ps.conn.schouten_at(x)
}

/// Cotton tensor `∇_A P_BC − ∇_B P_AC` at a point.
pub fn cotton_tensor(ps: &ProjectiveStructure, point: &[f64]) -> Result<Tensor> {
    let x = seed(point, 2)?;
    let g = ps.gamma_at(&x)?;
    let p = schouten_from_ricci(&ricci(&riemann(&g)?)?, 2)?;
    let dp = covariant_derivative(&g, &p)?;
    let swapped = dp.transpose(0, 1);
    dp.sub(&swapped)
}

/// Norm of `∇_[A P_B]C`; vanishes iff the structure is flat near the point.
pub fn cotton_residual(ps: &ProjectiveStructure, point: &[f64]) -> Result<f64> {
    Ok(0.5 * cotton_tensor(ps, point)?.norm())
}

/// `L_k Γ` at a point (order-0 jets).
pub fn lie_gamma(ps: &ProjectiveStructure, k: &TensorField, point: &[f64]) -> Result<Tensor> {
    let x = seed(point, 2)?;
    let g = ps.gamma_at(&x)?;
    let v = k.vector_at(&x)?;
    lie_derivative_connection(&v, &g)
}

/// Least-squares fit of `L_kΓ^C_AB = δ^C_AΥ_B + δ^C_BΥ_A`.
///
/// Returns the misfit norm and the fitted `Υ`. A vanishing misfit certifies
/// that `k` is a projective vector field.
pub fn projective_vector_residual(
    ps: &ProjectiveStructure,
    k: &TensorField,
    point: &[f64],
) -> Result<(f64, [f64; 2])> {
    let l = lie_gamma(ps, k, point)?;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for c in 0..2 {
        for a in 0..2 {
            for b in a..2 {
                let mut row = [0.0; 2];
                if c == a {
                    row[b] += 1.0;
                }
                if c == b {
                    row[a] += 1.0;
                }
                rows.push(row);
                rhs.push(l.get(&[c, a, b]).value());
            }
        }
    }
    let m = DMatrix::from_fn(rows.len(), 2, |i, j| rows[i][j]);
    let r = DVector::from_vec(rhs);
    let sol = m
        .clone()
        .svd(true, true)
        .solve(&r, 1e-14)
        .map_err(|e| Error::Invalid(e.to_string()))?;
    let resid = (&m * &sol - &r).norm();
    Ok((resid, [sol[0], sol[1]]))
}

/// `Υ_B = L_kΓ^A_AB / 3` as a one-form field, exact when `k` is projective.
pub fn upsilon_field(ps: &ProjectiveStructure, k: &TensorField) -> TensorField {
    let conn = ps.conn.clone();
    let k = k.clone();
    TensorField::new(2, vec![Slot::Down], Symmetry::None, move |x| {
        let t = conn.derived_at(x, 2, |local, g| {
            let l = lie_derivative_connection(&k.vector_at(local)?, g)?;
            let cfg = l.config();
            let mut comps = Vec::with_capacity(2);
            for b in 0..2 {
                let mut acc = Jet::zero(cfg);
                for a in 0..2 {
                    acc = &acc + l.get(&[a, a, b]);
                }
                comps.push(acc.scale(1.0 / 3.0));
            }
            Tensor::new(2, vec![Slot::Down], comps)
        })?;
        Ok(t.comps)
    })
}

/// The representative connection of the one-symmetry normal form:
/// `Γ⁰₁₁ = A(y)`, `Γ¹₀₀ = −1`, `Γ¹₁₁ = −B(y)`, all others zero.
pub fn normal_form_structure(data: &NormalFormData) -> ProjectiveStructure {
    let z = Expr::constant(0.0);
    ProjectiveStructure::from_exprs([
        z.clone(),
        z.clone(),
        data.a.clone(),
        Expr::constant(-1.0),
        z,
        -data.b.clone(),
    ])
}

/// The representative connection with a five-dimensional symmetry algebra
/// used for the neat example, scaled by `mu`:
/// `Γ⁰₀₀ = xy²`, `Γ¹₀₀ = y³`, `Γ⁰₀₁ = −x²y`, `Γ¹₀₁ = −xy²`, `Γ⁰₁₁ = x³`,
/// `Γ¹₁₁ = x²y` (times `mu`).
pub fn submaximal_structure(mu: f64) -> ProjectiveStructure {
    let x = Expr::var(0);
    let y = Expr::var(1);
    let m = Expr::constant(mu);
    ProjectiveStructure::from_exprs([
        m.clone() * x.clone() * y.powi(2),
        -(m.clone() * x.powi(2) * y.clone()),
        m.clone() * x.powi(3),
        m.clone() * y.powi(3),
        -(m.clone() * x.clone() * y.powi(2)),
        m * x.powi(2) * y,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vf(f: fn(&[Jet]) -> Vec<Jet>) -> TensorField {
        TensorField::vector(2, move |x| Ok(f(x)))
    }

    fn nf(a: &str, b: &str) -> ProjectiveStructure {
        normal_form_structure(&NormalFormData::parse(a, b).unwrap())
    }

    #[test]
    fn normal_form_ode_coefficients() {
        let ps = nf("y^2", "sin(y)");
        let y = 0.4;
        let c = ode_coefficients(&ps, &seed(&[0.3, y], 1).unwrap()).unwrap();
        let v = c.values();
        assert_eq!(v[0], -1.0);
        assert_eq!(v[1], 0.0);
        assert!((v[2] + y.sin() / 3.0).abs() < 1e-15);
        assert!((v[3] + y * y).abs() < 1e-15);
    }

    #[test]
    fn flat_upsilon_dy() {
        let ups = TensorField::new(2, vec![Slot::Down], Symmetry::None, |x| {
            let c = x[0].config();
            Ok(vec![Jet::zero(c), Jet::constant(1.0, c)])
        });
        let ps = apply_upsilon(&ProjectiveStructure::flat(), &ups).unwrap();
        let g = ps.gamma_at(&seed(&[0.1, 0.2], 0).unwrap()).unwrap();
        assert_eq!(g.get(&[0, 0, 1]).value(), 1.0);
        assert_eq!(g.get(&[0, 1, 0]).value(), 1.0);
        assert_eq!(g.get(&[1, 1, 1]).value(), 2.0);
        assert_eq!(g.get(&[1, 0, 0]).value(), 0.0);
        assert_eq!(g.get(&[0, 0, 0]).value(), 0.0);
    }

    #[test]
    fn normal_form_schouten_symmetric() {
        let ps = nf("y", "y^2");
        let p = schouten(&ps, &seed(&[0.2, 0.7], 1).unwrap()).unwrap();
        assert!((p.get(&[0, 1]).value() - p.get(&[1, 0]).value()).abs() < 1e-14);
        // P = [[B, A], [A, 0]]
        assert!((p.get(&[0, 0]).value() - 0.49).abs() < 1e-14);
        assert!((p.get(&[0, 1]).value() - 0.7).abs() < 1e-14);
        assert!(p.get(&[1, 1]).value().abs() < 1e-14);
    }

    #[test]
    fn submaximal_schouten() {
        let ps = submaximal_structure(1.0);
        let (x, y) = (0.3, -0.8);
        let p = schouten(&ps, &seed(&[x, y], 0).unwrap()).unwrap();
        assert!((p.get(&[0, 0]).value() - 4.0 * y * y).abs() < 1e-13);
        assert!((p.get(&[0, 1]).value() + 4.0 * x * y).abs() < 1e-13);
        assert!((p.get(&[1, 0]).value() + 4.0 * x * y).abs() < 1e-13);
        assert!((p.get(&[1, 1]).value() - 4.0 * x * x).abs() < 1e-13);
    }

    #[test]
    fn translation_is_projective() {
        let ps = nf("y", "1");
        let k = vf(|x| vec![Jet::constant(1.0, x[0].config()), Jet::zero(x[0].config())]);
        let (r, u) = projective_vector_residual(&ps, &k, &[0.3, 0.5]).unwrap();
        assert!(r < 1e-12);
        assert!(u[0].abs() < 1e-12 && u[1].abs() < 1e-12);
    }

    #[test]
    fn generic_field_is_not_projective() {
        let ps = nf("y", "0");
        let k = vf(|x| vec![Jet::zero(x[0].config()), &x[0] * &x[0]]);
        let (r, _) = projective_vector_residual(&ps, &k, &[0.6, 0.5]).unwrap();
        assert!(r > 1e-3);
    }

    #[test]
    fn cotton_flat_vs_curved() {
        assert!(cotton_residual(&nf("2", "-1"), &[0.1, 0.3]).unwrap() < 1e-13);
        assert!(cotton_residual(&nf("y", "0"), &[0.1, 0.3]).unwrap() > 1e-4);
    }
}
