//! The fixed sign, orientation and normalization choices of the engine.

use std::collections::BTreeMap;

use ewtoda::dm_einstein::{beta_constant_observed, BETA_CONSTANT_PRINTED, DM_ORIENTATION};
use ewtoda::einstein_weyl::JONES_TOD_ORIENTATION;
use ewtoda::toda::tod::GH_ORIENTATION;

pub fn flags() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("riemann", "R_abc^d = ∂_aΓ^d_bc − ∂_bΓ^d_ac + Γ^d_aeΓ^e_bc − Γ^d_beΓ^e_ac"),
        ("ricci", "R_ab = R_cab^c"),
        ("scalar_dm", "R = 4n(n+1)Λ"),
        ("scalar_kk", "R = 2n(2n+1)Λ"),
        ("symmetric_product", "a⊙b = ½(a⊗b + b⊗a)"),
        ("wedge", "classical"),
        ("hodge", "ε_abcd = orientation·|det g|^{1/2}"),
        ("toda", "U_XX + U_YY = ε(e^U)_ZZ"),
        ("toda_ew_negative_epsilon", "h = e^U(dX² + dY²) + dZ², ω = 2U_Z dZ"),
        ("weyl_gauge", "h → ρ²h, ω → ω + 2 d ln ρ"),
    ])
}

pub fn orientations() -> BTreeMap<&'static str, f64> {
    BTreeMap::from([
        ("cotangent_einstein", DM_ORIENTATION),
        ("jones_tod_quotient", JONES_TOD_ORIENTATION),
        ("gibbons_hawking", GH_ORIENTATION),
        ("gibbons_hawking_quotient", -GH_ORIENTATION),
    ])
}

/// The human-readable ledger printed by `ewtoda conventions`.
pub fn show_conventions() -> String {
    format!(
        "\
Curvature
  R_abc^d = ∂_aΓ^d_bc − ∂_bΓ^d_ac + Γ^d_aeΓ^e_bc − Γ^d_beΓ^e_ac, so [∇_a, ∇_b]V^d = R_abc^d V^c
  Ricci R_ab = R_cab^c; the unit sphere has scalar curvature +2
  cotangent-bundle Einstein metrics: R = 4n(n+1)Λ (24 for n = 2, Λ = 1)
  Kaluza-Klein lift: R = 2n(2n+1)Λ

Tensors and forms
  symmetric product a⊙b = ½(a⊗b + b⊗a)
  wedge conventions:
    classical: dx∧dy = dx⊗dy − dy⊗dx, component (dx∧dy)_xy = 1 (engine default)
    antisymmetrized: dx∧dy = ½(dx⊗dy − dy⊗dx), components divided by k!
  Hodge star with ε_abcd = orientation·|det g|^(1/2)

Orientations
  cotangent-bundle spaces: {dm:+} (dx⁰∧dx¹ and Ω anti-self-dual)
  Jones-Tod quotient star: {jt:+}
  Gibbons-Hawking: {gh:+} (hyper-Kähler forms anti-self-dual); its quotients use {ghq:+}
  Tod's construction uses the anti-self-dual orientation of the metric

Einstein-Weyl
  Weyl gauge h → ρ²h, ω → ω + 2 d ln ρ, with 𝒟h = ω⊗h
  Toda pair for ε = +1: h = e^U(dX² + dY²) − dZ², ω = 2U_Z dZ
  Toda pair for ε = −1 (engine convention): h = e^U(dX² + dY²) + dZ², ω = 2U_Z dZ;
    the residual of U_XX + U_YY = ε(e^U)_ZZ is checked directly as well

Constants
  hyper-Hermitian β identity: printed constant {bp}, observed constant 3Λ ({bo} at Λ = 1)
",
        dm = DM_ORIENTATION,
        jt = JONES_TOD_ORIENTATION,
        gh = GH_ORIENTATION,
        ghq = -GH_ORIENTATION,
        bp = BETA_CONSTANT_PRINTED,
        bo = beta_constant_observed(1.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ledger_mentions_pinned_items() {
        let s = show_conventions();
        for needle in ["R = 4n(n+1)Λ", "classical:", "antisymmetrized:", "ε = −1", "Gibbons-Hawking: +1"] {
            assert!(s.contains(needle), "missing {needle:?}");
        }
    }
}
