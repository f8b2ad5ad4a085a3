use std::collections::BTreeMap;

use super::frame::NormFrame;
use super::hampoly::HamPoly;
use super::multi_index::MultiIndex;
use super::window::{Barrier, Site};
use super::PolyError;

fn check_radius(r_eff: f64) -> Result<(), PolyError> {
    if r_eff > 1.0 && r_eff.is_finite() {
        Ok(())
    } else {
        Err(PolyError::InvalidRadius(r_eff))
    }
}

/// `|n| · r^{Δ(n)+|n|−1}`.
fn weight_factor(n: &MultiIndex, r_eff: f64) -> f64 {
    let deg = n.degree();
    let exp = n.spread() as i32 + deg as i32 - 1;
    deg as f64 * r_eff.powi(exp)
}

/// `Σ |H(n)| |n| r^{Δ(n)+|n|−1}` over terms whose support meets `barrier`.
pub fn weighted_norm_on(h: &HamPoly, barrier: &Barrier, r_eff: f64) -> Result<f64, PolyError> {
    check_radius(r_eff)?;
    Ok(h
        .iter()
        .filter(|(n, _)| n.touches(barrier))
        .map(|(n, c)| c.value.norm() * weight_factor(n, r_eff))
        .sum())
}

/// `sup_j Σ |∂_{v_j}H(n)| |n| r^{Δ(n)+|n|−1}` over terms meeting `barrier`.
pub fn lipschitz_norm_on(h: &HamPoly, barrier: &Barrier, r_eff: f64) -> Result<f64, PolyError> {
    check_radius(r_eff)?;
    let mut per_site: BTreeMap<Site, f64> = BTreeMap::new();
    for (n, c) in h.iter().filter(|(n, _)| n.touches(barrier)) {
        let w = weight_factor(n, r_eff);
        for &(s, g) in c.grad.entries() {
            *per_site.entry(s).or_insert(0.0) += g.norm() * w;
        }
    }
    Ok(per_site.values().copied().fold(0.0, f64::max))
}

pub fn triple_norm_on(h: &HamPoly, barrier: &Barrier, r_eff: f64) -> Result<f64, PolyError> {
    Ok(weighted_norm_on(h, barrier, r_eff)? + lipschitz_norm_on(h, barrier, r_eff)?)
}

/// `‖H‖_{j₀,N,r}` on the frame's barrier.
pub fn weighted_norm(h: &HamPoly, frame: &NormFrame, r_eff: f64) -> Result<f64, PolyError> {
    weighted_norm_on(h, &frame.barrier(), r_eff)
}

/// `‖H‖^ℒ_{j₀,N,r}` on the frame's barrier.
pub fn lipschitz_norm(h: &HamPoly, frame: &NormFrame, r_eff: f64) -> Result<f64, PolyError> {
    lipschitz_norm_on(h, &frame.barrier(), r_eff)
}

/// `|||H||| = ‖H‖ + ‖H‖^ℒ` on the frame's barrier.
pub fn triple_norm(h: &HamPoly, frame: &NormFrame, r_eff: f64) -> Result<f64, PolyError> {
    triple_norm_on(h, &frame.barrier(), r_eff)
}

/// `Σ |H(n)|` over all terms. Bounds `|H(q)|` on states with `Σ|q_j|² ≤ 1`.
pub fn l1_norm(h: &HamPoly) -> f64 {
    h.iter().map(|(_, c)| c.value.norm()).sum()
}

/// Terms meeting `A(j₀, half_width)` when `intersect` holds, otherwise the
/// complement.
pub fn restrict_support(h: &HamPoly, frame: &NormFrame, half_width: i64, intersect: bool) -> HamPoly {
    let barrier = frame.barrier_with(half_width);
    h.filter(|n, _| n.touches(&barrier) == intersect)
}

/// Splits `H` by weight `Δ(n) + |n|`.
pub fn weight_slices(h: &HamPoly) -> BTreeMap<u32, HamPoly> {
    let mut out: BTreeMap<u32, HamPoly> = BTreeMap::new();
    for (n, c) in h.iter() {
        out.entry(n.weight())
            .or_insert_with(|| HamPoly::zero(h.window()))
            .add_term(n.clone(), c);
    }
    out
}
