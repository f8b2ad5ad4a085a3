use std::collections::BTreeSet;

use crate::normal_form::Schedule;
use crate::poly::{DiffVector, NormFrame, Site, SiteWindow};

/// Integer vectors of length `len` with nonzero endpoints, `Σ|k_i| = l1` and
/// `Σ k_i = 0`.
fn shapes(len: usize, l1: i32) -> Vec<Vec<i32>> {
    fn rec(i: usize, len: usize, left: i32, sum: i32, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if i == len {
            if left == 0 && sum == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let endpoint = i == 0 || i == len - 1;
        for k in -left..=left {
            if endpoint && k == 0 {
                continue;
            }
            // what remains must still be able to cancel the running sum
            let rest = left - k.abs();
            if (sum + k).abs() > rest {
                continue;
            }
            cur.push(k);
            rec(i + 1, len, rest, sum + k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, len, l1, 0, &mut Vec::with_capacity(len), &mut out);
    out
}

/// Gap between `[lo, hi]` and the nearest barrier site inside `window`
/// (0 when they overlap), or `None` if the barrier misses the window.
fn barrier_gap(lo: Site, hi: Site, frame: &NormFrame, half_width: i64, window: SiteWindow) -> Option<i64> {
    let w = half_width;
    let j0 = frame.j0.abs() as i64;
    [(j0 - w, j0 + w), (-j0 - w, -j0 + w)]
        .into_iter()
        .filter_map(|(a, b)| {
            let a = a.max(window.lo() as i64);
            let b = b.min(window.hi() as i64);
            (a <= b).then(|| {
                if b < lo as i64 {
                    lo as i64 - b
                } else if a > hi as i64 {
                    a - hi as i64
                } else {
                    0
                }
            })
        })
        .min()
}

/// Difference vectors `k = n − n'` of the non-resonant gauge-invariant
/// monomials normalized at step `s`: support inside `window`, touching
/// `A(j₀, N_{s+1})`, weight `Δ(n) + |n| ≤ s + 2`. One representative per
/// `±k` pair, in canonical order.
///
/// A monomial with difference `k` and minimal support has `|n| = |k|`; if
/// that support misses the barrier, one extra `|q_t|²` factor at the nearest
/// barrier site is the cheapest way to reach it.
pub fn enumerate_multiindices(frame: &NormFrame, s: u32, window: SiteWindow) -> Vec<DiffVector> {
    let schedule = Schedule::new(frame);
    let half_width = schedule.n_s(s + 1) as i64;
    let barrier = frame.barrier_with(half_width);
    let budget = s as i64 + 2;
    let mut out = BTreeSet::new();
    for spread in 1..=(budget - 2) {
        for l1 in (2..=(budget - spread)).step_by(2) {
            let forms = shapes(spread as usize + 1, l1 as i32);
            if forms.is_empty() {
                continue;
            }
            let last = window.hi() as i64 - spread;
            for lo in window.lo() as i64..=last {
                let lo = lo as Site;
                let hi = lo + spread as Site;
                for form in &forms {
                    let direct = form
                        .iter()
                        .enumerate()
                        .any(|(i, &k)| k != 0 && barrier.contains(lo + i as Site));
                    let ok = direct
                        || barrier_gap(lo, hi, frame, half_width, window)
                            .is_some_and(|gap| l1 + 2 + spread + gap <= budget);
                    if ok {
                        let k = DiffVector::new(
                            form.iter()
                                .enumerate()
                                .map(|(i, &k)| (lo + i as Site, k)),
                        );
                        out.insert(k.canonical_sign());
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_counts() {
        // length 2, |k| = 2: (1,-1), (-1,1)
        assert_eq!(shapes(2, 2).len(), 2);
        // length 3, |k| = 2, nonzero ends: (1,0,-1), (-1,0,1)
        assert_eq!(shapes(3, 2).len(), 2);
        assert!(shapes(2, 3).is_empty());
    }

    #[test]
    fn first_step_is_hops_around_both_barriers() {
        let frame = NormFrame::with_default_sigma(40, 16, 3.0, 0.009, 1e-3).unwrap();
        let n2 = Schedule::new(&frame).n_s(2) as usize;
        let ks = enumerate_multiindices(&frame, 1, SiteWindow::symmetric(80).unwrap());
        assert_eq!(ks.len(), 2 * (2 * n2 + 2));
        assert!(ks.iter().all(|k| k.spread() == 1 && k.l1() == 2));
    }

    #[test]
    fn window_in_barrier_gap_is_empty() {
        let frame = NormFrame::with_default_sigma(40, 16, 3.0, 0.009, 1e-3).unwrap();
        let ks = enumerate_multiindices(&frame, 2, SiteWindow::symmetric(10).unwrap());
        assert!(ks.is_empty());
    }
}
