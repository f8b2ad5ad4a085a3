use std::ops::{AddAssign, Neg};

use num_complex::Complex64 as C64;
use smallvec::SmallVec;

use super::window::Site;

/// Sparse gradient of a coefficient with respect to the potential entries
/// `v_j`, sorted by site.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Grad(SmallVec<[(Site, C64); 4]>);

impl Grad {
    pub fn zero() -> Self {
        Grad(SmallVec::new())
    }

    /// Single entry `∂/∂v_site = value`.
    pub fn unit(site: Site, value: C64) -> Self {
        let mut g = Grad::zero();
        if value != C64::new(0.0, 0.0) {
            g.0.push((site, value));
        }
        g
    }

    pub fn from_entries<I: IntoIterator<Item = (Site, C64)>>(entries: I) -> Self {
        let mut out = Grad::zero();
        for (s, v) in entries {
            out.add_scaled(&Grad::unit(s, v), C64::new(1.0, 0.0));
        }
        out
    }

    pub fn entries(&self) -> &[(Site, C64)] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, site: Site) -> C64 {
        match self.0.binary_search_by_key(&site, |e| e.0) {
            Ok(i) => self.0[i].1,
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|e| e.1.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: C64) -> Grad {
        Grad(self.0.iter().map(|&(s, v)| (s, v * c)).collect())
    }

    pub fn conj(&self) -> Grad {
        Grad(self.0.iter().map(|&(s, v)| (s, v.conj())).collect())
    }

    /// `self += c · other`, merging sorted entry lists.
    pub fn add_scaled(&mut self, other: &Grad, c: C64) {
        if other.0.is_empty() {
            return;
        }
        if self.0.is_empty() {
            self.0 = other.0.iter().map(|&(s, v)| (s, v * c)).collect();
            return;
        }
        let a = &self.0;
        let b = &other.0;
        let mut out: SmallVec<[(Site, C64); 4]> = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i >= a.len() || b[j].0 < a[i].0 {
                out.push((b[j].0, b[j].1 * c));
                j += 1;
            } else {
                out.push((a[i].0, a[i].1 + b[j].1 * c));
                i += 1;
                j += 1;
            }
        }
        self.0 = out;
    }
}

/// A monomial coefficient `H(n)` together with `∂_{v_j} H(n)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Coefficient {
    pub value: C64,
    pub grad: Grad,
}

impl Coefficient {
    pub fn new(value: C64, grad: Grad) -> Self {
        Self { value, grad }
    }

    pub fn constant(value: C64) -> Self {
        Self {
            value,
            grad: Grad::zero(),
        }
    }

    pub fn real(value: f64) -> Self {
        Self::constant(C64::new(value, 0.0))
    }

    /// `max(|value|, max_j |∂_j value|)`.
    pub fn magnitude(&self) -> f64 {
        self.value.norm().max(self.grad.max_abs())
    }

    pub fn scale(&self, c: C64) -> Coefficient {
        Coefficient {
            value: self.value * c,
            grad: self.grad.scale(c),
        }
    }

    pub fn conj(&self) -> Coefficient {
        Coefficient {
            value: self.value.conj(),
            grad: self.grad.conj(),
        }
    }

    /// Product rule: `∂(ab) = ∂a·b + a·∂b`.
    pub fn product(&self, other: &Coefficient) -> Coefficient {
        let mut grad = self.grad.scale(other.value);
        grad.add_scaled(&other.grad, self.value);
        Coefficient {
            value: self.value * other.value,
            grad,
        }
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, other: &Coefficient, c: C64) {
        self.value += other.value * c;
        self.grad.add_scaled(&other.grad, c);
    }
}

impl AddAssign<&Coefficient> for Coefficient {
    fn add_assign(&mut self, rhs: &Coefficient) {
        self.value += rhs.value;
        self.grad.add_scaled(&rhs.grad, C64::new(1.0, 0.0));
    }
}

impl Neg for &Coefficient {
    type Output = Coefficient;

    fn neg(self) -> Coefficient {
        Coefficient {
            value: -self.value,
            grad: Grad(self.grad.0.iter().map(|&(s, v)| (s, -v)).collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn product_rule() {
        let a = Coefficient::new(c(2.0, 0.0), Grad::unit(0, c(1.0, 0.0)));
        let b = Coefficient::new(c(3.0, 1.0), Grad::unit(1, c(0.5, 0.0)));
        let p = a.product(&b);
        assert_eq!(p.value, c(6.0, 2.0));
        assert_eq!(p.grad.get(0), c(3.0, 1.0));
        assert_eq!(p.grad.get(1), c(1.0, 0.0));
        assert_eq!(p.grad.get(2), c(0.0, 0.0));
    }

    #[test]
    fn grad_merge_keeps_order() {
        let mut g = Grad::from_entries([(3, c(1.0, 0.0)), (-1, c(2.0, 0.0))]);
        g.add_scaled(&Grad::from_entries([(0, c(1.0, 0.0)), (3, c(1.0, 0.0))]), c(2.0, 0.0));
        let sites: Vec<_> = g.entries().iter().map(|e| e.0).collect();
        assert_eq!(sites, vec![-1, 0, 3]);
        assert_eq!(g.get(3), c(3.0, 0.0));
    }
}
