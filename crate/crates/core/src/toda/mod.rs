//! SU(∞) Toda fields `U_XX + U_YY = ε(e^U)_ZZ`: residuals, implicit and
//! parametric solutions, the associated Einstein–Weyl structures, Tod's
//! construction from a Killing field and the solution catalogue.

pub mod catalog;
pub mod implicit;
pub mod levelset;
pub mod parametric;
pub mod poly;
pub mod tod;

use crate::einstein_weyl::WeylStructure;
use crate::error::{Error, Result};
use crate::fields::{d, hodge_star, seed, with_extra_order, Form, MetricField, Slot, Symmetry, TensorField};
use crate::jets::Jet;

pub use implicit::ImplicitTodaSolution;
pub use parametric::{parametric_residual, toda_impl2, toda_implicit1, ParametricTodaSolution};
pub use catalog::{catalog, TodaCatalogEntry, TodaSolution};
pub use poly::Poly;

/// `U_XX + U_YY − ε(e^U)_ZZ` and the three terms, from a jet of order ≥ 2.
pub fn toda_terms(u: &Jet, epsilon: f64) -> Result<[f64; 4]> {
    if u.order() < 2 {
        return Err(Error::InsufficientOrder {
            need: 2,
            have: u.order(),
        });
    }
    let uxx = u.partial(&[2, 0, 0])?;
    let uyy = u.partial(&[0, 2, 0])?;
    let ezz = u.exp()?.partial(&[0, 0, 2])?;
    Ok([uxx + uyy - epsilon * ezz, uxx, uyy, ezz])
}

/// `|U_XX + U_YY − ε(e^U)_ZZ| / (1 + |U_XX| + |U_YY| + |(e^U)_ZZ|)` for a
/// jet in `(X, Y, Z)`.
pub fn toda_residual_jet(u: &Jet, epsilon: f64) -> Result<f64> {
    let [r, a, b, c] = toda_terms(u, epsilon)?;
    Ok(r.abs() / (1.0 + a.abs() + b.abs() + c.abs()))
}

/// Relative Toda residual of a scalar field on `(X, Y, Z)` at `point`.
pub fn toda_residual(u: &TensorField, epsilon: f64, point: &[f64]) -> Result<f64> {
    let x = seed(point, 2)?;
    toda_residual_jet(&u.at(&x)?.comps[0], epsilon)
}

/// `h = e^U(dX² + dY²) − ε dZ²`, `ω = 2U_Z dZ`.
///
/// For `ε = 1` this is the Lorentzian pair attached to a Toda field; for
/// `ε = −1` the Riemannian metric `e^U(dX² + dY²) + dZ²` is used.
pub fn build_toda_ew(u: &TensorField, epsilon: f64) -> Result<WeylStructure> {
    if u.rank() != 0 || u.dim != 3 {
        return Err(Error::Variance("U must be a scalar on (X, Y, Z)".into()));
    }
    let uh = u.clone();
    let h = MetricField::new(3, 1.0, move |x| {
        let e = uh.at(x)?.comps[0].exp()?;
        let cfg = e.config();
        let z = Jet::zero(cfg);
        Ok(vec![
            e.clone(),
            z.clone(),
            z.clone(),
            z.clone(),
            e,
            z.clone(),
            z.clone(),
            z,
            Jet::constant(-epsilon, cfg),
        ])
    });
    let uw = u.clone();
    let w = TensorField::new(3, vec![Slot::Down], Symmetry::None, move |x| {
        let uz = with_extra_order(x, 1, |l| Ok(vec![uw.at(l)?.comps[0].derivative(2)?]))?;
        let z = Jet::zero(x[0].config());
        Ok(vec![z.clone(), z, uz[0].scale(2.0)])
    });
    WeylStructure::new(h, w)
}

/// `|d⋆_h dU|`, the coefficient of `dX∧dY∧dZ`, at `point`.
pub fn dstar_du_residual(ws: &WeylStructure, u: &TensorField, point: &[f64]) -> Result<f64> {
    let x = seed(point, 2)?;
    let uj = u.at(&x)?.comps[0].clone();
    let du = Form::one_form((0..3).map(|i| uj.derivative(i)).collect::<std::result::Result<_, _>>()?)?;
    let h = ws.h.at(&x)?.truncate(1)?;
    let star = hodge_star(&h, &du)?;
    Ok(d(&star)?.classical().tensor.get(&[0, 1, 2]).value().abs())
}
