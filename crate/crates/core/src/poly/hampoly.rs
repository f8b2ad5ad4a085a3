use std::cmp::Ordering;
use std::collections::btree_map::{self, BTreeMap};

use num_complex::Complex64 as C64;

use super::coefficient::Coefficient;
use super::eval::Evaluator;
use super::multi_index::MultiIndex;
use super::window::SiteWindow;
use super::PRUNE_FLOOR;

/// Sparse polynomial `Σ_n H(n) ∏ q_j^{n_j} q̄_j^{n'_j}` on a finite window.
///
/// Terms are stored in canonical multi-index order so iteration, arithmetic
/// and serialization are reproducible bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct HamPoly {
    window: SiteWindow,
    terms: BTreeMap<MultiIndex, Coefficient>,
}

impl HamPoly {
    pub fn zero(window: SiteWindow) -> Self {
        Self {
            window,
            terms: BTreeMap::new(),
        }
    }

    /// Sums the given terms (repeated indices accumulate) and prunes.
    pub fn from_terms<I>(window: SiteWindow, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, Coefficient)>,
    {
        let mut p = HamPoly::zero(window);
        for (n, c) in terms {
            p.add_term(n, &c);
        }
        p.prune();
        p
    }

    pub(crate) fn from_map(window: SiteWindow, terms: BTreeMap<MultiIndex, Coefficient>) -> Self {
        let mut p = Self { window, terms };
        p.prune();
        p
    }

    pub fn window(&self) -> SiteWindow {
        self.window
    }

    pub fn with_window(mut self, window: SiteWindow) -> Self {
        self.window = window;
        self
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Coefficient> {
        &self.terms
    }

    pub fn iter(&self) -> btree_map::Iter<'_, MultiIndex, Coefficient> {
        self.terms.iter()
    }

    pub fn get(&self, n: &MultiIndex) -> Option<&Coefficient> {
        self.terms.get(n)
    }

    /// Adds `c` to the coefficient of `n`. Does not prune.
    pub fn add_term(&mut self, n: MultiIndex, c: &Coefficient) {
        match self.terms.entry(n) {
            btree_map::Entry::Occupied(mut e) => *e.get_mut() += c,
            btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
        }
    }

    pub fn prune(&mut self) {
        self.terms.retain(|_, c| c.magnitude() >= PRUNE_FLOOR);
    }

    pub fn add(&self, other: &HamPoly) -> HamPoly {
        self.add_scaled(other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &HamPoly) -> HamPoly {
        self.add_scaled(other, C64::new(-1.0, 0.0))
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, other: &HamPoly, c: C64) -> HamPoly {
        let mut out = HamPoly {
            window: self.window.hull(&other.window),
            terms: self.terms.clone(),
        };
        for (n, coef) in &other.terms {
            match out.terms.entry(n.clone()) {
                btree_map::Entry::Occupied(mut e) => e.get_mut().add_scaled(coef, c),
                btree_map::Entry::Vacant(e) => {
                    e.insert(coef.scale(c));
                }
            }
        }
        out.prune();
        out
    }

    pub fn scale(&self, c: C64) -> HamPoly {
        HamPoly::from_map(
            self.window,
            self.terms.iter().map(|(n, v)| (n.clone(), v.scale(c))).collect(),
        )
    }

    pub fn scale_real(&self, c: f64) -> HamPoly {
        self.scale(C64::new(c, 0.0))
    }

    pub fn neg(&self) -> HamPoly {
        HamPoly {
            window: self.window,
            terms: self.terms.iter().map(|(n, v)| (n.clone(), -v)).collect(),
        }
    }

    pub fn filter<P: Fn(&MultiIndex, &Coefficient) -> bool>(&self, pred: P) -> HamPoly {
        HamPoly {
            window: self.window,
            terms: self
                .terms
                .iter()
                .filter(|(n, c)| pred(n, c))
                .map(|(n, c)| (n.clone(), c.clone()))
                .collect(),
        }
    }

    /// Splits into `(matching, rest)`; the two parts sum to `self` exactly.
    pub fn partition<P: Fn(&MultiIndex) -> bool>(&self, pred: P) -> (HamPoly, HamPoly) {
        let mut yes = BTreeMap::new();
        let mut no = BTreeMap::new();
        for (n, c) in &self.terms {
            if pred(n) {
                yes.insert(n.clone(), c.clone());
            } else {
                no.insert(n.clone(), c.clone());
            }
        }
        (
            HamPoly {
                window: self.window,
                terms: yes,
            },
            HamPoly {
                window: self.window,
                terms: no,
            },
        )
    }

    /// Consumes `self` and splits it, avoiding clones.
    pub fn into_partition<P: Fn(&MultiIndex) -> bool>(self, pred: P) -> (HamPoly, HamPoly) {
        let window = self.window;
        let (yes, no): (BTreeMap<_, _>, BTreeMap<_, _>) =
            self.terms.into_iter().partition(|(n, _)| pred(n));
        (
            HamPoly { window, terms: yes },
            HamPoly { window, terms: no },
        )
    }

    pub fn max_weight(&self) -> u32 {
        self.terms.keys().map(|n| n.weight()).max().unwrap_or(0)
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|n| n.degree()).max().unwrap_or(0)
    }

    pub fn is_gauge_invariant(&self) -> bool {
        self.terms.keys().all(|n| n.is_gauge_invariant())
    }

    /// Largest violation of `H(n†) = conj(H(n))`, relative to the largest
    /// coefficient magnitude.
    pub fn reality_defect(&self) -> f64 {
        let scale = self
            .terms
            .values()
            .map(|c| c.magnitude())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for (n, c) in &self.terms {
            let partner = self.terms.get(&n.conjugate());
            let d = match partner {
                Some(p) => {
                    let mut d = (p.value - c.value.conj()).norm();
                    let mut g = p.grad.clone();
                    g.add_scaled(&c.grad.conj(), C64::new(-1.0, 0.0));
                    d = d.max(g.max_abs());
                    d
                }
                None => c.magnitude(),
            };
            worst = worst.max(d);
        }
        worst / scale
    }

    pub fn is_real(&self, rel_tol: f64) -> bool {
        self.reality_defect() <= rel_tol
    }

    /// Total order used to make the bracket exactly antisymmetric: terms are
    /// compared index by index, coefficients by their bit patterns.
    pub fn canonical_cmp(&self, other: &HamPoly) -> Ordering {
        let bits = |c: &Coefficient| {
            let mut v = vec![c.value.re.to_bits(), c.value.im.to_bits()];
            for (s, g) in c.grad.entries() {
                v.extend([*s as u64, g.re.to_bits(), g.im.to_bits()]);
            }
            v
        };
        let mut a = self.terms.iter();
        let mut b = other.terms.iter();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some((na, ca)), Some((nb, cb))) => {
                    let ord = na.cmp(nb).then_with(|| bits(ca).cmp(&bits(cb)));
                    if ord != Ordering::Equal {
                        return ord;
                    }
                }
            }
        }
    }

    pub fn evaluator(&self) -> Evaluator {
        Evaluator::new(self)
    }

    /// Value at the state `q` (indexed by window offset), with `q̄ = conj(q)`.
    pub fn eval(&self, q: &[C64]) -> C64 {
        let w: Vec<C64> = q.iter().map(|z| z.conj()).collect();
        self.evaluator().value(q, &w)
    }

    /// Value with `q` and `q̄` replaced by independent vectors `z` and `w`.
    pub fn eval_split(&self, z: &[C64], w: &[C64]) -> C64 {
        self.evaluator().value(z, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Grad;

    fn win() -> SiteWindow {
        SiteWindow::new(0, 3).unwrap()
    }

    #[test]
    fn add_and_cancel_prunes() {
        let n = MultiIndex::hop(0, 1);
        let a = HamPoly::from_terms(win(), [(n.clone(), Coefficient::real(0.5))]);
        let z = a.sub(&a);
        assert!(z.is_zero());
    }

    #[test]
    fn partition_sums_back() {
        let p = HamPoly::from_terms(
            win(),
            [
                (MultiIndex::hop(0, 1), Coefficient::real(1.0)),
                (MultiIndex::hop(1, 0), Coefficient::real(1.0)),
                (MultiIndex::action(2), Coefficient::real(0.25)),
            ],
        );
        let (a, b) = p.partition(|n| n.is_resonant());
        assert_eq!(a.len(), 1);
        assert_eq!(a.add(&b), p);
    }

    #[test]
    fn reality_defect_detects_missing_partner() {
        let p = HamPoly::from_terms(win(), [(MultiIndex::hop(0, 1), Coefficient::real(1.0))]);
        assert!(!p.is_real(1e-12));
        let q = p.add(&HamPoly::from_terms(
            win(),
            [(
                MultiIndex::hop(1, 0),
                Coefficient::new(C64::new(1.0, 0.0), Grad::zero()),
            )],
        ));
        assert!(q.is_real(0.0));
    }

    #[test]
    fn eval_of_action_is_modulus_squared() {
        let p = HamPoly::from_terms(win(), [(MultiIndex::action(1), Coefficient::real(2.0))]);
        let q = vec![C64::new(0.0, 0.0), C64::new(0.6, 0.8), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        assert!((p.eval(&q) - C64::new(2.0, 0.0)).norm() < 1e-15);
    }
}
