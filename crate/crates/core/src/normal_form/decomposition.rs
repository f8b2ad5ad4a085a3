use super::NormalFormError;
use crate::poly::{HamPoly, NormFrame};

/// `R̃ = R̃⁽¹⁾ + R̃⁽²⁾ + R̃⁽³⁾`.
#[derive(Clone, Debug, PartialEq)]
pub struct RemainderParts {
    /// Terms touching `A(j₀, ⌊N/2⌋)`.
    pub r1: HamPoly,
    /// Terms away from the barrier with spread `Δ(n) ≥ M + 4`.
    pub r2: HamPoly,
    /// Terms away from the barrier with spread `Δ(n) ≤ M + 3`.
    pub r3: HamPoly,
}

/// Splits the final remainder by its position relative to the half barrier.
///
/// A short term that misses `A(j₀, N/2)` lies entirely on one side of `±j₀`,
/// so gauge invariance forces `Σ_{|j|>j₀} (n_j − n'_j) = 0`. A term of `R̃⁽³⁾`
/// breaking that identity is reported as [`NormalFormError::BarrierLeak`].
pub fn remainder_decomposition(
    r_final: &HamPoly,
    frame: &NormFrame,
    m: u32,
) -> Result<RemainderParts, NormalFormError> {
    let half = frame.barrier_with((frame.n / 2) as i64);
    let (r1, rest) = r_final.partition(|n| n.touches(&half));
    let (r2, r3) = rest.into_partition(|n| n.spread() >= m + 4);
    if let Some((n, _)) = r3.iter().find(|(n, _)| n.tail_charge(frame.j0) != 0) {
        return Err(NormalFormError::BarrierLeak(n.clone()));
    }
    Ok(RemainderParts { r1, r2, r3 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{Coefficient, MultiIndex, SiteWindow};

    fn frame() -> NormFrame {
        NormFrame::new(10, 6, 3.0, 0.25, 0.009, 1e-3).unwrap()
    }

    fn poly(terms: Vec<MultiIndex>) -> HamPoly {
        HamPoly::from_terms(
            SiteWindow::new(-30, 30).unwrap(),
            terms.into_iter().map(|n| (n, Coefficient::real(1.0))),
        )
    }

    #[test]
    fn zero_splits_to_zeros() {
        let p = remainder_decomposition(&poly(vec![]), &frame(), 2).unwrap();
        assert!(p.r1.is_zero() && p.r2.is_zero() && p.r3.is_zero());
    }

    #[test]
    fn routing() {
        let barrier = MultiIndex::hop(9, 10);
        let far_long = MultiIndex::hop(14, 20);
        let far_short = MultiIndex::hop(20, 22);
        let p = poly(vec![barrier.clone(), far_long.clone(), far_short.clone()]);
        let parts = remainder_decomposition(&p, &frame(), 2).unwrap();
        assert!(parts.r1.get(&barrier).is_some() && parts.r1.len() == 1);
        assert!(parts.r2.get(&far_long).is_some() && parts.r2.len() == 1);
        assert!(parts.r3.get(&far_short).is_some() && parts.r3.len() == 1);
        assert_eq!(far_short.tail_charge(10), 0);
    }

    #[test]
    fn non_gauge_term_leaks() {
        let p = poly(vec![MultiIndex::new([(20, 1, 0)])]);
        assert!(matches!(
            remainder_decomposition(&p, &frame(), 2),
            Err(NormalFormError::BarrierLeak(_))
        ));
    }
}
