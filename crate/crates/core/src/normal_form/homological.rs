use num_complex::Complex64 as C64;

use super::NormalFormError;
use crate::poly::{Coefficient, Grad, HamPoly, MultiIndex, NormFrame};
use crate::potential::Frequencies;
use crate::resonance::threshold_unchecked;

/// Small divisor `Σ_j (n_j − n'_j) v_j` and its gradient with respect to the
/// original potential.
pub fn divisor(freqs: &Frequencies, n: &MultiIndex) -> Result<(f64, Grad), NormalFormError> {
    let window = freqs.window();
    let mut value = 0.0;
    let mut grad = Grad::zero();
    for &(site, k) in n.difference().entries() {
        if !window.contains(site) {
            return Err(NormalFormError::OutsideWindow(site));
        }
        value += k as f64 * freqs.value(site);
        grad.add_scaled(freqs.grad(site), C64::new(k as f64, 0.0));
    }
    Ok((value, grad))
}

/// `L_v F = i Σ_n (Σ_j (n_j − n'_j) v_j) F(n) q^n`, with the divisor's own
/// dependence on `v` carried into the gradients.
pub fn lie_derivative(freqs: &Frequencies, f: &HamPoly) -> Result<HamPoly, NormalFormError> {
    let mut terms = Vec::with_capacity(f.len());
    for (n, c) in f.iter() {
        let (d, dgrad) = divisor(freqs, n)?;
        let mut grad = c.grad.scale(C64::new(0.0, d));
        grad.add_scaled(&dgrad, C64::new(0.0, 1.0) * c.value);
        terms.push((n.clone(), Coefficient::new(C64::new(0.0, d) * c.value, grad)));
    }
    Ok(HamPoly::from_terms(f.window(), terms))
}

/// Solves `L_v F = R` term by term: `F(n) = −i R(n) / Σ_j (n_j − n'_j) v_j`.
///
/// Every divisor is checked against the nonresonance threshold of its
/// difference vector; a divisor below it is an error, never skipped.
pub fn solve_homological(
    freqs: &Frequencies,
    rhs: &HamPoly,
    frame: &NormFrame,
) -> Result<HamPoly, NormalFormError> {
    let minus_i = C64::new(0.0, -1.0);
    let mut terms = Vec::with_capacity(rhs.len());
    for (n, c) in rhs.iter() {
        if n.is_resonant() {
            return Err(NormalFormError::ResonantTermInRhs(n.clone()));
        }
        let (d, dgrad) = divisor(freqs, n)?;
        let threshold = threshold_unchecked(&n.difference(), frame);
        if d == 0.0 || d.abs() < threshold {
            return Err(NormalFormError::ResonantDivisor {
                index: n.clone(),
                divisor: d,
                threshold,
            });
        }
        // ∂(R/d) = ∂R/d − R ∂d/d²
        let mut grad = c.grad.scale(C64::new(1.0 / d, 0.0));
        grad.add_scaled(&dgrad, -c.value / (d * d));
        let value = c.value / d;
        terms.push((n.clone(), Coefficient::new(value, grad).scale(minus_i)));
    }
    Ok(HamPoly::from_terms(rhs.window(), terms))
}

/// Largest `|F(n)| / (|R(n)| ε^{−α} N Δ²(n) |n|^{Δ(n)+1})` over the solved
/// terms, with `Δ` replaced by `max(Δ, 1)`. Values at most 1 mean the
/// small-divisor estimate holds for every coefficient.
pub fn small_divisor_ratio(rhs: &HamPoly, f: &HamPoly, frame: &NormFrame) -> f64 {
    let mut worst: f64 = 0.0;
    for (n, c) in rhs.iter() {
        let Some(fc) = f.get(n) else { continue };
        let spread = n.spread();
        let d_eff = spread.max(1) as f64;
        let bound = c.value.norm() * frame.epsilon.powf(-frame.alpha)
            * frame.n as f64
            * d_eff
            * d_eff
            * (n.degree() as f64).powi(spread as i32 + 1);
        if bound > 0.0 {
            worst = worst.max(fc.value.norm() / bound);
        } else if fc.value.norm() > 0.0 {
            worst = f64::INFINITY;
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::SiteWindow;
    use crate::potential::Potential;

    fn setup() -> (Frequencies, NormFrame, SiteWindow) {
        let w = SiteWindow::new(0, 1).unwrap();
        let v = Potential::new(w, vec![0.3, 0.7]).unwrap();
        let frame = NormFrame::new(0, 16, 3.0, 3.0 / 32.0, 0.009, 1e-4).unwrap();
        (Frequencies::from_potential(&v), frame, w)
    }

    #[test]
    fn lie_derivative_of_hop() {
        let (fr, _, w) = setup();
        let f = HamPoly::from_terms(w, [(MultiIndex::hop(0, 1), Coefficient::real(2.0))]);
        let l = lie_derivative(&fr, &f).unwrap();
        let c = l.get(&MultiIndex::hop(0, 1)).unwrap();
        assert!((c.value - C64::new(0.0, -0.8)).norm() < 1e-15);
        // ∂/∂v_0 of i(v_0 − v_1)·2 is 2i
        assert!((c.grad.get(0) - C64::new(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn solve_hop_and_invert() {
        let (fr, frame, w) = setup();
        let r = HamPoly::from_terms(w, [(MultiIndex::hop(0, 1), Coefficient::real(0.05))]);
        let f = solve_homological(&fr, &r, &frame).unwrap();
        let c = f.get(&MultiIndex::hop(0, 1)).unwrap();
        assert!((c.value - C64::new(0.0, 0.125)).norm() < 1e-15);
        let back = lie_derivative(&fr, &f).unwrap();
        let b = back.get(&MultiIndex::hop(0, 1)).unwrap();
        assert!((b.value - C64::new(0.05, 0.0)).norm() < 1e-16);
        assert!(b.grad.max_abs() < 1e-16);
        assert!(small_divisor_ratio(&r, &f, &frame) <= 1.0);
    }

    #[test]
    fn equal_frequencies_are_resonant() {
        let (_, frame, w) = setup();
        let fr = Frequencies::from_potential(&Potential::new(w, vec![0.5, 0.5]).unwrap());
        let r = HamPoly::from_terms(w, [(MultiIndex::hop(0, 1), Coefficient::real(0.05))]);
        assert!(matches!(
            solve_homological(&fr, &r, &frame),
            Err(NormalFormError::ResonantDivisor { .. })
        ));
    }

    #[test]
    fn resonant_rhs_rejected() {
        let (fr, frame, w) = setup();
        let r = HamPoly::from_terms(w, [(MultiIndex::action(0), Coefficient::real(0.05))]);
        assert!(matches!(
            solve_homological(&fr, &r, &frame),
            Err(NormalFormError::ResonantTermInRhs(_))
        ));
    }
}
