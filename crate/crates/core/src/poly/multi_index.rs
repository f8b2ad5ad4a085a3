use std::fmt;

use smallvec::SmallVec;

use super::window::{Barrier, Site};

/// Exponent pair `(n_j, n'_j)` of `q_j` and `q̄_j` at one site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exponent {
    pub site: Site,
    pub n: u16,
    pub nbar: u16,
}

impl Exponent {
    pub fn new(site: Site, n: u16, nbar: u16) -> Self {
        Self { site, n, nbar }
    }

    fn is_zero(&self) -> bool {
        self.n == 0 && self.nbar == 0
    }
}

/// Sparse multi-index `n = (n_j, n'_j)_j` of a monomial `∏ q_j^{n_j} q̄_j^{n'_j}`.
///
/// Entries are kept sorted by site and `(0, 0)` pairs are never stored, so the
/// stored sites are exactly the support. The derived ordering is
/// site-lexicographic, then exponent-lexicographic.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(SmallVec<[Exponent; 4]>);

impl MultiIndex {
    /// Builds a multi-index from arbitrary `(site, n, n')` triples; repeated
    /// sites are summed and zero pairs dropped.
    pub fn new<I: IntoIterator<Item = (Site, u16, u16)>>(entries: I) -> Self {
        let mut v: SmallVec<[Exponent; 4]> = entries
            .into_iter()
            .map(|(s, n, nb)| Exponent::new(s, n, nb))
            .collect();
        v.sort_by_key(|e| e.site);
        let mut out: SmallVec<[Exponent; 4]> = SmallVec::with_capacity(v.len());
        for e in v {
            match out.last_mut() {
                Some(last) if last.site == e.site => {
                    last.n += e.n;
                    last.nbar += e.nbar;
                }
                _ => out.push(e),
            }
        }
        out.retain(|e| !e.is_zero());
        MultiIndex(out)
    }

    /// `|q_j|^2`.
    pub fn action(site: Site) -> Self {
        MultiIndex::new([(site, 1, 1)])
    }

    /// `q_a q̄_b`.
    pub fn hop(a: Site, b: Site) -> Self {
        MultiIndex::new([(a, 1, 0), (b, 0, 1)])
    }

    pub fn entries(&self) -> &[Exponent] {
        &self.0
    }

    pub fn support(&self) -> impl Iterator<Item = Site> + '_ {
        self.0.iter().map(|e| e.site)
    }

    pub fn is_constant(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min_site(&self) -> Option<Site> {
        self.0.first().map(|e| e.site)
    }

    pub fn max_site(&self) -> Option<Site> {
        self.0.last().map(|e| e.site)
    }

    /// Diameter of the support, `Δ(n)`.
    pub fn spread(&self) -> u32 {
        match (self.min_site(), self.max_site()) {
            (Some(a), Some(b)) => (b - a) as u32,
            _ => 0,
        }
    }

    /// Total degree `|n|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|e| e.n as u32 + e.nbar as u32).sum()
    }

    /// `Δ(n) + |n|`, the grading used by the truncations.
    pub fn weight(&self) -> u32 {
        self.spread() + self.degree()
    }

    /// `n_j = n'_j` at every site.
    pub fn is_resonant(&self) -> bool {
        self.0.iter().all(|e| e.n == e.nbar)
    }

    /// `Σ_j (n_j − n'_j)`.
    pub fn charge(&self) -> i64 {
        self.0.iter().map(|e| e.n as i64 - e.nbar as i64).sum()
    }

    pub fn is_gauge_invariant(&self) -> bool {
        self.charge() == 0
    }

    /// `Σ_{|j| > j₀} (n_j − n'_j)`.
    pub fn tail_charge(&self, j0: Site) -> i64 {
        self.0
            .iter()
            .filter(|e| e.site.unsigned_abs() > j0.unsigned_abs())
            .map(|e| e.n as i64 - e.nbar as i64)
            .sum()
    }

    pub fn exponent_at(&self, site: Site) -> (u16, u16) {
        match self.0.binary_search_by_key(&site, |e| e.site) {
            Ok(i) => (self.0[i].n, self.0[i].nbar),
            Err(_) => (0, 0),
        }
    }

    /// The index of the complex conjugate monomial.
    pub fn conjugate(&self) -> Self {
        MultiIndex(
            self.0
                .iter()
                .map(|e| Exponent::new(e.site, e.nbar, e.n))
                .collect(),
        )
    }

    pub fn touches(&self, barrier: &Barrier) -> bool {
        self.0.iter().any(|e| barrier.contains(e.site))
    }

    /// The difference vector `k_j = n_j − n'_j`.
    pub fn difference(&self) -> DiffVector {
        DiffVector::new(
            self.0
                .iter()
                .map(|e| (e.site, e.n as i32 - e.nbar as i32)),
        )
    }

    /// Index of the monomial obtained by multiplying `self` and `other` and
    /// removing one `q_k` and one `q̄_k`. Used by the Poisson bracket; the
    /// caller guarantees both exponents at `k` stay non-negative.
    pub(crate) fn bracket_merge(&self, other: &MultiIndex, k: Site) -> MultiIndex {
        let (a, b) = (&self.0, &other.0);
        let mut out: SmallVec<[Exponent; 4]> = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let e = if j >= b.len() || (i < a.len() && a[i].site < b[j].site) {
                i += 1;
                a[i - 1]
            } else if i >= a.len() || b[j].site < a[i].site {
                j += 1;
                b[j - 1]
            } else {
                i += 1;
                j += 1;
                Exponent::new(a[i - 1].site, a[i - 1].n + b[j - 1].n, a[i - 1].nbar + b[j - 1].nbar)
            };
            let e = if e.site == k {
                Exponent::new(e.site, e.n - 1, e.nbar - 1)
            } else {
                e
            };
            if !e.is_zero() {
                out.push(e);
            }
        }
        MultiIndex(out)
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}:({},{})", e.site, e.n, e.nbar)?;
        }
        write!(f, "]")
    }
}

/// Integer vector `k` with finitely many nonzero entries, sorted by site.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DiffVector(SmallVec<[(Site, i32); 4]>);

impl DiffVector {
    pub fn new<I: IntoIterator<Item = (Site, i32)>>(entries: I) -> Self {
        let mut v: SmallVec<[(Site, i32); 4]> = entries.into_iter().collect();
        v.sort_by_key(|e| e.0);
        let mut out: SmallVec<[(Site, i32); 4]> = SmallVec::with_capacity(v.len());
        for (s, k) in v {
            match out.last_mut() {
                Some(last) if last.0 == s => last.1 += k,
                _ => out.push((s, k)),
            }
        }
        out.retain(|e| e.1 != 0);
        DiffVector(out)
    }

    pub fn entries(&self) -> &[(Site, i32)] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spread(&self) -> u32 {
        match (self.0.first(), self.0.last()) {
            (Some(a), Some(b)) => (b.0 - a.0) as u32,
            _ => 0,
        }
    }

    /// `|k| = Σ |k_j|`.
    pub fn l1(&self) -> u32 {
        self.0.iter().map(|e| e.1.unsigned_abs()).sum()
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().map(|e| e.1 as i64).sum()
    }

    pub fn negate(&self) -> Self {
        DiffVector(self.0.iter().map(|&(s, k)| (s, -k)).collect())
    }

    pub fn translate(&self, by: Site) -> Self {
        DiffVector(self.0.iter().map(|&(s, k)| (s + by, k)).collect())
    }

    /// Representative of `{k, −k}` whose first nonzero entry is positive.
    pub fn canonical_sign(&self) -> Self {
        match self.0.first() {
            Some(&(_, k)) if k < 0 => self.negate(),
            _ => self.clone(),
        }
    }

    /// `Σ_j k_j v_j` for a site lookup.
    pub fn dot<F: Fn(Site) -> f64>(&self, v: F) -> f64 {
        self.0.iter().map(|&(s, k)| k as f64 * v(s)).sum()
    }
}

impl fmt::Debug for DiffVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k[")?;
        for (i, (s, k)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{s}:{k:+}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_merges_and_drops_zeros() {
        let n = MultiIndex::new([(3, 1, 0), (1, 0, 0), (3, 0, 2), (-1, 1, 1)]);
        assert_eq!(n.entries().len(), 2);
        assert_eq!(n.exponent_at(3), (1, 2));
        assert_eq!(n.exponent_at(1), (0, 0));
        assert_eq!(n.spread(), 4);
        assert_eq!(n.degree(), 5);
        assert_eq!(n.weight(), 9);
    }

    #[test]
    fn functionals_of_single_site_index() {
        let n = MultiIndex::new([(7, 2, 2)]);
        assert_eq!(n.spread(), 0);
        assert!(n.is_resonant());
        assert!(n.difference().is_zero());
    }

    #[test]
    fn conjugate_and_charge() {
        let n = MultiIndex::new([(0, 2, 0), (1, 0, 1), (4, 0, 1)]);
        assert_eq!(n.charge(), 0);
        assert_eq!(n.conjugate().exponent_at(0), (0, 2));
        assert_eq!(n.tail_charge(2), -1);
        assert_eq!(n.conjugate().conjugate(), n);
    }

    #[test]
    fn bracket_merge_removes_one_pair_at_k() {
        let n = MultiIndex::hop(0, 1);
        let m = MultiIndex::hop(1, 2);
        // q0 q̄1 · q1 q̄2 with one q1 q̄1 removed -> q0 q̄2
        assert_eq!(n.bracket_merge(&m, 1), MultiIndex::hop(0, 2));
    }

    #[test]
    fn diff_vector_sign_canonical() {
        let k = DiffVector::new([(2, -1), (0, 1)]);
        assert_eq!(k.canonical_sign(), k);
        assert_eq!(k.negate().canonical_sign(), k);
        assert_eq!(k.spread(), 2);
        assert_eq!(k.l1(), 2);
        assert_eq!(k.sum(), 0);
    }
}
