//! Seeded random polynomials for property checks and the verification
//! suites.

use num_complex::Complex64 as C64;
use rand::Rng;

use super::coefficient::{Coefficient, Grad};
use super::hampoly::HamPoly;
use super::multi_index::MultiIndex;
use super::window::{Site, SiteWindow};

#[derive(Clone, Debug)]
pub struct RandomPolySpec {
    pub window: SiteWindow,
    /// Sites a monomial may use; every site of the window when empty.
    pub sites: Vec<Site>,
    pub terms: usize,
    /// Degrees are drawn from `2..=max_degree` (even ones when gauge
    /// invariant).
    pub max_degree: u32,
    pub max_spread: u32,
    pub gauge_invariant: bool,
    /// Adds the conjugate partner of every term.
    pub real: bool,
    /// Attaches random gradient entries to each coefficient.
    pub with_grad: bool,
}

impl RandomPolySpec {
    pub fn new(window: SiteWindow) -> Self {
        Self {
            window,
            sites: Vec::new(),
            terms: 6,
            max_degree: 4,
            max_spread: 3,
            gauge_invariant: true,
            real: true,
            with_grad: true,
        }
    }
}

fn unit_complex<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_index<R: Rng>(rng: &mut R, spec: &RandomPolySpec, sites: &[Site]) -> MultiIndex {
    let anchor = sites[rng.random_range(0..sites.len())];
    let near: Vec<Site> = sites
        .iter()
        .copied()
        .filter(|&s| s >= anchor && s - anchor <= spec.max_spread as Site)
        .collect();
    let pick = |rng: &mut R| near[rng.random_range(0..near.len())];
    let max_half = (spec.max_degree / 2).max(1);
    let mut entries = Vec::new();
    if spec.gauge_invariant {
        let half = rng.random_range(1..=max_half);
        entries.push((anchor, 1, 0));
        for _ in 1..half {
            entries.push((pick(rng), 1, 0));
        }
        for _ in 0..half {
            entries.push((pick(rng), 0, 1));
        }
    } else {
        let degree = rng.random_range(1..=spec.max_degree.max(1));
        entries.push(if rng.random_bool(0.5) { (anchor, 1, 0) } else { (anchor, 0, 1) });
        for _ in 1..degree {
            let s = pick(rng);
            entries.push(if rng.random_bool(0.5) { (s, 1, 0) } else { (s, 0, 1) });
        }
    }
    MultiIndex::new(entries)
}

/// Draws a polynomial according to `spec`.
pub fn random_poly<R: Rng>(rng: &mut R, spec: &RandomPolySpec) -> HamPoly {
    let sites: Vec<Site> = if spec.sites.is_empty() {
        spec.window.sites().collect()
    } else {
        spec.sites.iter().copied().filter(|s| spec.window.contains(*s)).collect()
    };
    assert!(!sites.is_empty(), "no admissible sites");
    let mut terms = Vec::with_capacity(2 * spec.terms);
    for _ in 0..spec.terms {
        let n = random_index(rng, spec, &sites);
        let grad = if spec.with_grad {
            let k = rng.random_range(0..=2);
            Grad::from_entries((0..k).map(|_| {
                (sites[rng.random_range(0..sites.len())], unit_complex(rng) * 0.5)
            }))
        } else {
            Grad::zero()
        };
        let c = Coefficient::new(unit_complex(rng), grad);
        if spec.real {
            if n.is_resonant() {
                // a real coefficient keeps the term self-conjugate
                let c = Coefficient::new(
                    C64::new(c.value.re, 0.0),
                    Grad::from_entries(c.grad.entries().iter().map(|&(s, g)| (s, C64::new(g.re, 0.0)))),
                );
                terms.push((n, c));
            } else {
                terms.push((n.conjugate(), c.conj()));
                terms.push((n, c));
            }
        } else {
            terms.push((n, c));
        }
    }
    HamPoly::from_terms(spec.window, terms)
}
