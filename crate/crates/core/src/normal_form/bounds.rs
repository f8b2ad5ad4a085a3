use serde::{Deserialize, Serialize};

use crate::poly::NormFrame;

/// One inequality `lhs ≤ rhs` evaluated on a normal form step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl BoundCheck {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
        }
    }

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// `c^k` from `ln c`, with `c^0 = 1` even when `c` is 0 or infinite.
fn pow_ln(ln_c: f64, k: u32) -> f64 {
    if k == 0 {
        1.0
    } else {
        (k as f64 * ln_c).exp()
    }
}

/// Right-hand sides of the iterative estimates at one step.
///
/// With `B = 10 N r³ ε` and
/// `C(s) = (10s)^{10s} 2⁶ e / σ · N^{3s} r³ ε^{1−2α}` the bounds read
/// `|||F_s||| ≤ (σ/e) C(s)^s`, `|||Z_{s+1}|||, |||R_{s+1}||| ≤ B Σ_{i≤s} 2^{−i}`,
/// `|||ℛ_{s+1}||| ≤ B C(s+1)^s` and, for the weight-`A` slice of `Z + R`,
/// `B C(s+1)^{A−3}`. The first step uses the sharper constant
/// `C₁ = 2⁶ e / σ · 10 N³ r³ ε^{1−2α}` and `|||F₁||| ≤ 2⁶ · 10 N³ r³ ε^{1−2α}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaConstants {
    pub s: u32,
    pub base: f64,
    ln_c_next: f64,
    f_bound: f64,
}

impl LemmaConstants {
    fn ln_eps_part(frame: &NormFrame) -> f64 {
        (1.0 - 2.0 * frame.alpha) * frame.epsilon.ln()
    }

    fn ln_c(frame: &NormFrame, s: u32) -> f64 {
        let n = frame.n as f64;
        let ts = 10.0 * s as f64;
        ts * ts.ln() + (64.0 * std::f64::consts::E / frame.sigma).ln()
            + 3.0 * s as f64 * n.ln()
            + 3.0 * frame.r.ln()
            + Self::ln_eps_part(frame)
    }

    fn ln_c1(frame: &NormFrame) -> f64 {
        let n = frame.n as f64;
        (64.0 * std::f64::consts::E / frame.sigma).ln() + (10.0 * n.powi(3) * frame.r.powi(3)).ln()
            + Self::ln_eps_part(frame)
    }

    pub fn for_step(frame: &NormFrame, s: u32) -> Self {
        let n = frame.n as f64;
        let base = 10.0 * n * frame.r.powi(3) * frame.epsilon;
        if s <= 1 {
            let f_bound = 64.0 * 10.0 * n.powi(3) * frame.r.powi(3) * pow_ln(Self::ln_eps_part(frame), 1);
            Self {
                s: 1,
                base,
                ln_c_next: Self::ln_c1(frame),
                f_bound,
            }
        } else {
            let f_bound = frame.sigma / std::f64::consts::E * pow_ln(Self::ln_c(frame, s), s);
            Self {
                s,
                base,
                ln_c_next: Self::ln_c(frame, s + 1),
                f_bound,
            }
        }
    }

    pub fn f_bound(&self) -> f64 {
        self.f_bound
    }

    pub fn zr_bound(&self) -> f64 {
        self.base * (0..=self.s).map(|i| 0.5f64.powi(i as i32)).sum::<f64>()
    }

    pub fn rcal_bound(&self) -> f64 {
        self.base * pow_ln(self.ln_c_next, self.s)
    }

    /// Bound on the weight-`a` slice, `a ≥ 3`.
    pub fn slice_bound(&self, a: u32) -> f64 {
        self.base * pow_ln(self.ln_c_next, a.saturating_sub(3))
    }

    /// Final estimates after `m` steps at radius `r/2`:
    /// `(bound on Z̃ and R̃, bound on ℛ̃, slice constant K)`, where
    /// `K = (10(M+1))^{10(M+1)} 2⁶ e N^{3(M+1)+1} r² ε^{1−2α}`.
    pub fn theorem(frame: &NormFrame, m: u32) -> (f64, f64, f64) {
        let n = frame.n as f64;
        let base = 10.0 * n * frame.r.powi(3) * frame.epsilon;
        let t = 10.0 * (m + 1) as f64;
        let ln_k = t * t.ln() + (64.0 * std::f64::consts::E).ln()
            + (3.0 * (m + 1) as f64 + 1.0) * n.ln()
            + 2.0 * frame.r.ln()
            + Self::ln_eps_part(frame);
        (
            20.0 * n * frame.r.powi(3) * frame.epsilon,
            base * pow_ln(ln_k, m),
            ln_k.exp(),
        )
    }

    pub fn theorem_slice_bound(frame: &NormFrame, m: u32, a: u32) -> f64 {
        let (_, _, k) = Self::theorem(frame, m);
        let base = 10.0 * frame.n as f64 * frame.r.powi(3) * frame.epsilon;
        base * pow_ln(k.ln(), a.saturating_sub(3))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_constants() {
        let f = NormFrame::new(0, 16, 3.0, 3.0 / 32.0, 0.009, 1e-4).unwrap();
        let c = LemmaConstants::for_step(&f, 1);
        let base = 10.0 * 16.0 * 27.0 * 1e-4;
        let c1 = 64.0 * std::f64::consts::E / f.sigma * 10.0 * 4096.0 * 27.0 * 1e-4f64.powf(1.0 - 0.018);
        assert!((c.base - base).abs() < 1e-15);
        assert!((c.zr_bound() / (1.5 * base) - 1.0).abs() < 1e-14);
        assert!((c.rcal_bound() / (base * c1) - 1.0).abs() < 1e-12);
        assert_eq!(c.slice_bound(3), base);
        assert!((c.slice_bound(5) / (base * c1 * c1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn later_steps_grow() {
        let f = NormFrame::new(0, 16, 3.0, 3.0 / 32.0, 0.009, 1e-3).unwrap();
        let c2 = LemmaConstants::for_step(&f, 2);
        let c3 = LemmaConstants::for_step(&f, 3);
        assert!(c3.rcal_bound() > c2.rcal_bound());
        assert!((c2.zr_bound() / c2.base - 1.75).abs() < 1e-15);
    }

    #[test]
    fn uncoupled_limit_is_finite() {
        let f = NormFrame::new(0, 16, 3.0, 3.0 / 32.0, 0.009, 0.0).unwrap();
        let c = LemmaConstants::for_step(&f, 2);
        assert_eq!(c.rcal_bound(), 0.0);
        assert_eq!(c.slice_bound(3), 0.0);
        let (zr, rc, _) = LemmaConstants::theorem(&f, 0);
        assert_eq!((zr, rc), (0.0, 0.0));
    }
}
