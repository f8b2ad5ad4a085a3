//! The structured enumeration of difference vectors against a brute force
//! over every monomial of degree at most 4 on a 10-site window.

use std::collections::BTreeSet;

use latticebnf::normal_form::Schedule;
use latticebnf::poly::{DiffVector, MultiIndex, NormFrame, Site, SiteWindow};
use latticebnf::resonance::enumerate_multiindices;

/// All exponent assignments `(n_j, n'_j)` on `sites` with `|n| ≤ max_degree`.
fn all_monomials(sites: &[Site], max_degree: u16) -> Vec<MultiIndex> {
    fn rec(sites: &[Site], left: u16, cur: &mut Vec<(Site, u16, u16)>, out: &mut Vec<MultiIndex>) {
        let Some((&site, rest)) = sites.split_first() else {
            out.push(MultiIndex::new(cur.iter().copied()));
            return;
        };
        for a in 0..=left {
            for b in 0..=(left - a) {
                if a + b > 0 {
                    cur.push((site, a, b));
                }
                rec(rest, left - a - b, cur, out);
                if a + b > 0 {
                    cur.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    rec(sites, max_degree, &mut Vec::new(), &mut out);
    out
}

fn brute_force(frame: &NormFrame, s: u32, monomials: &[MultiIndex]) -> BTreeSet<DiffVector> {
    let barrier = frame.barrier_with(Schedule::new(frame).n_s(s + 1) as i64);
    monomials
        .iter()
        .filter(|n| {
            n.is_gauge_invariant() && !n.is_resonant() && n.weight() <= s + 2 && n.touches(&barrier)
        })
        .map(|n| n.difference().canonical_sign())
        .collect()
}

#[test]
fn matches_brute_force_on_ten_sites() {
    let window = SiteWindow::new(-5, 4).unwrap();
    let sites: Vec<Site> = window.sites().collect();
    let monomials = all_monomials(&sites, 4);
    let mut nonempty = 0;
    for (j0, n) in [(0, 16), (0, 4), (3, 2), (3, 4), (6, 4), (8, 4), (-7, 9), (12, 9)] {
        let frame = NormFrame::with_default_sigma(j0, n, 3.0, 0.009, 1e-3).unwrap();
        for s in 1..=3 {
            let want = brute_force(&frame, s, &monomials);
            let list = enumerate_multiindices(&frame, s, window);
            let got: BTreeSet<DiffVector> = list.iter().cloned().collect();
            assert_eq!(list.len(), got.len(), "duplicates for j0 = {j0}, N = {n}, s = {s}");
            assert_eq!(got, want, "j0 = {j0}, N = {n}, s = {s}");
            nonempty += usize::from(!want.is_empty());
        }
    }
    assert!(nonempty >= 15);
}
