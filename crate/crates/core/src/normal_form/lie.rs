use serde::{Deserialize, Serialize};

use super::NormalFormError;
use crate::poly::{l1_norm, poisson_bracket, triple_norm, HamPoly, NormFrame};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LieOptions {
    /// Stop once the estimated remaining series is below `series_tol · ℓ¹(G)`.
    pub series_tol: f64,
    pub max_order: usize,
    /// Treat a violated convergence precondition as an error.
    pub strict: bool,
}

impl Default for LieOptions {
    fn default() -> Self {
        Self {
            series_tol: 1e-14,
            max_order: 60,
            strict: false,
        }
    }
}

/// Result of a truncated Lie series.
#[derive(Clone, Debug)]
pub struct LieOutcome {
    pub poly: HamPoly,
    /// Bound on `|G∘X_F¹(q) − poly(q)|` for `Σ|q_j|² ≤ 1`, in the `ℓ¹`
    /// coefficient norm: discarded high-weight mass plus the estimated
    /// remainder of the series.
    pub tail: f64,
    /// `ℓ¹` mass of the terms dropped by the weight cap.
    pub discarded: f64,
    /// Number of bracket orders summed.
    pub orders: usize,
    /// `e |||F||| / (r_from − r_to)`; the series is guaranteed to converge
    /// in the barrier norm when this is at most ½.
    pub rho: f64,
}

const GROWTH_LIMIT: usize = 4;
const RATIO_CAP: f64 = 0.9;

/// `G∘X_F¹ = Σ_{n≥0} G⁽ⁿ⁾/n!` with `G⁽ⁿ⁾ = {G⁽ⁿ⁻¹⁾, F}`.
///
/// Produced terms of weight `Δ(n) + |n| > w_cap` are dropped and their
/// `ℓ¹` mass is accumulated in the reported tail, so nothing is lost
/// silently. The series stops when the geometric estimate of its remainder
/// falls below the tolerance; terms that keep growing, or a series that has
/// not settled after `max_order` orders, is reported as divergent.
pub fn lie_transform(
    g: &HamPoly,
    f: &HamPoly,
    frame: &NormFrame,
    r_from: f64,
    r_to: f64,
    w_cap: u32,
    opts: &LieOptions,
) -> Result<LieOutcome, NormalFormError> {
    if w_cap < 3 {
        return Err(NormalFormError::InvalidArgument(format!("w_cap = {w_cap} must be at least 3")));
    }
    if !(r_from > r_to && r_to > 1.0) {
        return Err(NormalFormError::InvalidArgument(format!(
            "radii must satisfy r_from > r_to > 1, got {r_from} and {r_to}"
        )));
    }
    let rho = std::f64::consts::E * triple_norm(f, frame, r_from)? / (r_from - r_to);
    if rho > 0.5 {
        let msg = format!("e|||F|||/(r_from − r_to) = {rho:.3e} exceeds 1/2");
        if opts.strict {
            return Err(NormalFormError::LieSeriesDiverges(msg));
        }
        log::debug!("Lie transform precondition: {msg}");
    }
    if f.is_zero() || g.is_zero() {
        return Ok(LieOutcome {
            poly: g.clone(),
            tail: 0.0,
            discarded: 0.0,
            orders: 0,
            rho,
        });
    }

    let scale = l1_norm(g);
    let mut sum = g.clone();
    let mut term = g.clone();
    let mut prev = scale;
    let mut worst_ratio: f64 = 0.0;
    let mut growth = 0usize;
    let mut discarded = 0.0;
    for order in 1..=opts.max_order {
        let next = poisson_bracket(&term, f).scale_real(1.0 / order as f64);
        let (keep, drop) = next.into_partition(|n| n.weight() <= w_cap);
        discarded += l1_norm(&drop);
        let size = l1_norm(&keep);
        sum = sum.add(&keep);
        term = keep;

        let ratio = if prev > 0.0 { size / prev } else { 0.0 };
        worst_ratio = worst_ratio.max(ratio);
        growth = if size > prev { growth + 1 } else { 0 };
        if growth >= GROWTH_LIMIT {
            return Err(NormalFormError::LieSeriesDiverges(format!(
                "term norms grew for {GROWTH_LIMIT} consecutive orders (order {order}, ℓ¹ = {size:.3e})"
            )));
        }
        prev = size;
        let q = ratio.min(RATIO_CAP);
        let remainder = size * q / (1.0 - q);
        if term.is_zero() || remainder <= opts.series_tol * scale {
            let amplify = 1.0 / (1.0 - worst_ratio.min(RATIO_CAP));
            return Ok(LieOutcome {
                poly: sum,
                tail: discarded * amplify + remainder,
                discarded,
                orders: order,
                rho,
            });
        }
    }
    Err(NormalFormError::LieSeriesDiverges(format!(
        "no convergence after {} orders",
        opts.max_order
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{Coefficient, MultiIndex, SiteWindow};
    use num_complex::Complex64 as C64;

    fn frame() -> NormFrame {
        NormFrame::new(0, 4, 3.0, 0.5, 0.009, 1e-3).unwrap()
    }

    #[test]
    fn zero_generator_is_identity() {
        let w = SiteWindow::new(-2, 2).unwrap();
        let g = HamPoly::from_terms(w, [(MultiIndex::hop(0, 1), Coefficient::real(1.0))]);
        let out = lie_transform(&g, &HamPoly::zero(w), &frame(), 3.0, 2.5, 6, &LieOptions::default()).unwrap();
        assert_eq!(out.poly, g);
        assert_eq!(out.tail, 0.0);
    }

    #[test]
    fn commuting_diagonals() {
        let w = SiteWindow::new(-2, 2).unwrap();
        let g = HamPoly::from_terms(w, [(MultiIndex::action(0), Coefficient::real(0.4))]);
        let f = HamPoly::from_terms(w, [(MultiIndex::action(1), Coefficient::real(0.01))]);
        let out = lie_transform(&g, &f, &frame(), 3.0, 2.5, 6, &LieOptions::default()).unwrap();
        assert_eq!(out.poly, g);
    }

    #[test]
    fn rotation_generated_by_action() {
        // F = θ|q_0|² rotates q_0 by e^{iθ}, so q_0 q̄_1 picks up that phase.
        let w = SiteWindow::new(0, 1).unwrap();
        let theta = 0.01;
        let g = HamPoly::from_terms(w, [(MultiIndex::hop(0, 1), Coefficient::real(1.0))]);
        let f = HamPoly::from_terms(w, [(MultiIndex::action(0), Coefficient::real(theta))]);
        let out = lie_transform(&g, &f, &frame(), 3.0, 2.5, 6, &LieOptions::default()).unwrap();
        let c = out.poly.get(&MultiIndex::hop(0, 1)).unwrap().value;
        assert!((c - C64::new(0.0, theta).exp()).norm() < 1e-14 + out.tail);
    }

    #[test]
    fn strict_rejects_large_generator() {
        let w = SiteWindow::new(0, 1).unwrap();
        let g = HamPoly::from_terms(w, [(MultiIndex::hop(0, 1), Coefficient::real(1.0))]);
        let f = HamPoly::from_terms(w, [(MultiIndex::action(0), Coefficient::real(1.0))]);
        let opts = LieOptions {
            strict: true,
            ..Default::default()
        };
        assert!(matches!(
            lie_transform(&g, &f, &frame(), 3.0, 2.5, 6, &opts),
            Err(NormalFormError::LieSeriesDiverges(_))
        ));
    }
}
