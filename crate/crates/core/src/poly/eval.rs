use num_complex::Complex64 as C64;

use super::hampoly::HamPoly;
use super::window::SiteWindow;

struct Term {
    coef: C64,
    factors: Vec<(usize, u16, u16)>,
}

/// Flattened form of a polynomial for repeated evaluation at states given as
/// window-indexed vectors. `z` stands for `q` and `w` for `q̄`.
pub struct Evaluator {
    window: SiteWindow,
    terms: Vec<Term>,
    max_exp: usize,
}

impl Evaluator {
    pub fn new(p: &HamPoly) -> Self {
        let window = p.window();
        let mut max_exp = 0usize;
        let terms = p
            .iter()
            .map(|(n, c)| {
                let factors = n
                    .entries()
                    .iter()
                    .map(|e| {
                        max_exp = max_exp.max(e.n as usize).max(e.nbar as usize);
                        (window.offset(e.site), e.n, e.nbar)
                    })
                    .collect();
                Term {
                    coef: c.value,
                    factors,
                }
            })
            .collect();
        Self {
            window,
            terms,
            max_exp,
        }
    }

    pub fn window(&self) -> SiteWindow {
        self.window
    }

    fn powers(&self, x: &[C64]) -> Vec<Vec<C64>> {
        assert_eq!(x.len(), self.window.len(), "state length does not match window");
        x.iter()
            .map(|&xi| {
                let mut row = Vec::with_capacity(self.max_exp + 1);
                let mut acc = C64::new(1.0, 0.0);
                row.push(acc);
                for _ in 0..self.max_exp {
                    acc *= xi;
                    row.push(acc);
                }
                row
            })
            .collect()
    }

    pub fn value(&self, z: &[C64], w: &[C64]) -> C64 {
        let pz = self.powers(z);
        let pw = self.powers(w);
        let mut total = C64::new(0.0, 0.0);
        for t in &self.terms {
            let mut m = t.coef;
            for &(o, n, nb) in &t.factors {
                m *= pz[o][n as usize] * pw[o][nb as usize];
            }
            total += m;
        }
        total
    }

    /// Partial derivatives `(∂/∂z_j, ∂/∂w_j)` for every window site.
    pub fn gradient(&self, z: &[C64], w: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let pz = self.powers(z);
        let pw = self.powers(w);
        let mut dz = vec![C64::new(0.0, 0.0); z.len()];
        let mut dw = vec![C64::new(0.0, 0.0); w.len()];
        for t in &self.terms {
            for (i, &(o, n, nb)) in t.factors.iter().enumerate() {
                let mut rest = t.coef;
                for (k, &(ok, nk, nbk)) in t.factors.iter().enumerate() {
                    if k != i {
                        rest *= pz[ok][nk as usize] * pw[ok][nbk as usize];
                    }
                }
                if n > 0 {
                    dz[o] += rest * (n as f64) * pz[o][n as usize - 1] * pw[o][nb as usize];
                }
                if nb > 0 {
                    dw[o] += rest * (nb as f64) * pz[o][n as usize] * pw[o][nb as usize - 1];
                }
            }
        }
        (dz, dw)
    }

    /// Hamiltonian vector field `q̇_j = i ∂F/∂q̄_j` at the physical state `q`.
    pub fn vector_field(&self, q: &[C64]) -> Vec<C64> {
        let w: Vec<C64> = q.iter().map(|x| x.conj()).collect();
        let (_, dw) = self.gradient(q, &w);
        dw.into_iter().map(|d| C64::new(0.0, 1.0) * d).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{Coefficient, MultiIndex};

    #[test]
    fn gradient_matches_finite_difference() {
        let win = SiteWindow::new(-1, 1).unwrap();
        let p = HamPoly::from_terms(
            win,
            [
                (MultiIndex::new([(-1, 2, 1), (1, 0, 1)]), Coefficient::real(0.7)),
                (MultiIndex::hop(0, 1), Coefficient::constant(C64::new(0.1, -0.3))),
            ],
        );
        let ev = p.evaluator();
        let z = vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.5), C64::new(0.4, -0.6)];
        let w = vec![C64::new(0.1, 0.2), C64::new(0.7, 0.0), C64::new(-0.3, 0.3)];
        let (dz, dw) = ev.gradient(&z, &w);
        let h = 1e-6;
        for j in 0..3 {
            let mut zp = z.clone();
            zp[j] += h;
            let mut zm = z.clone();
            zm[j] -= h;
            let fd = (ev.value(&zp, &w) - ev.value(&zm, &w)) / (2.0 * h);
            assert!((fd - dz[j]).norm() < 1e-8);
            let mut wp = w.clone();
            wp[j] += h;
            let mut wm = w.clone();
            wm[j] -= h;
            let fd = (ev.value(&z, &wp) - ev.value(&z, &wm)) / (2.0 * h);
            assert!((fd - dw[j]).norm() < 1e-8);
        }
    }
}
