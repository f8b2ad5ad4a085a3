use crate::poly::{DiffVector, NormFrame};

use super::ResonanceError;

/// `ε^α / (N · Δ_eff²(k) · |k|^{Δ(k)+1})` with `Δ_eff = max(Δ, 1)`.
///
/// The convention `Δ_eff` only matters for single-site `k`, which cannot
/// come from a gauge-invariant monomial.
pub fn nonresonance_threshold(k: &DiffVector, frame: &NormFrame) -> Result<f64, ResonanceError> {
    if k.is_zero() {
        return Err(ResonanceError::ZeroVector);
    }
    Ok(threshold_unchecked(k, frame))
}

pub(crate) fn threshold_unchecked(k: &DiffVector, frame: &NormFrame) -> f64 {
    let spread = k.spread();
    let d_eff = spread.max(1) as f64;
    let norm = k.l1() as f64;
    frame.epsilon.powf(frame.alpha) / (frame.n as f64 * d_eff * d_eff * norm.powi(spread as i32 + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(eps: f64) -> NormFrame {
        NormFrame::new(0, 16, 3.0, 3.0 / 32.0, 0.009, eps).unwrap()
    }

    #[test]
    fn neighbour_and_next_neighbour() {
        let f = frame(1e-3);
        let ea = 1e-3f64.powf(0.009);
        let k1 = DiffVector::new([(0, 1), (1, -1)]);
        assert!((nonresonance_threshold(&k1, &f).unwrap() - ea / 64.0).abs() < 1e-16);
        let k2 = DiffVector::new([(0, 1), (2, -1)]);
        assert!((nonresonance_threshold(&k2, &f).unwrap() - ea / (32.0 * 16.0)).abs() < 1e-16);
    }

    #[test]
    fn single_site_uses_unit_spread() {
        let f = frame(1e-3);
        let k = DiffVector::new([(0, 1)]);
        let ea = 1e-3f64.powf(0.009);
        assert!((nonresonance_threshold(&k, &f).unwrap() - ea / 16.0).abs() < 1e-16);
    }

    #[test]
    fn zero_vector_rejected() {
        assert_eq!(
            nonresonance_threshold(&DiffVector::default(), &frame(1e-3)),
            Err(ResonanceError::ZeroVector)
        );
    }

    #[test]
    fn desk_value_for_hop() {
        // ε = 1e-4, α = 0.009, N = 16: ε^α / 64 ≈ 0.01438
        let f = frame(1e-4);
        let k = DiffVector::new([(0, 1), (1, -1)]);
        let t = nonresonance_threshold(&k, &f).unwrap();
        assert!((t - 0.920_449 / 64.0).abs() < 1e-6);
        assert!(0.4 >= t);
    }
}
