use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64 as C64;

use super::coefficient::Coefficient;
use super::hampoly::HamPoly;
use super::multi_index::MultiIndex;

/// Poisson bracket `{H, G} = i Σ_{n,m} Σ_k H(n) G(m) (n_k m'_k − n'_k m_k) q^{n+m−e_k−ē_k}`.
///
/// As a derivation this is `i Σ_k (∂_{q_k}H ∂_{q̄_k}G − ∂_{q̄_k}H ∂_{q_k}G)`.
/// The operands are put in a canonical order before summation, so
/// `{H,G}` and `−{G,H}` agree bit for bit and `{H,H}` is exactly zero.
pub fn poisson_bracket(h: &HamPoly, g: &HamPoly) -> HamPoly {
    match h.canonical_cmp(g) {
        Ordering::Equal => HamPoly::zero(h.window().hull(&g.window())),
        Ordering::Less => raw_bracket(h, g),
        Ordering::Greater => raw_bracket(g, h).neg(),
    }
}

/// The bracket summed in the order the operands are given, without the
/// canonical reordering of [`poisson_bracket`].
pub fn raw_bracket(h: &HamPoly, g: &HamPoly) -> HamPoly {
    let window = h.window().hull(&g.window());
    let mut out = HamPoly::zero(window);
    if h.is_zero() || g.is_zero() {
        return out;
    }
    let g_terms: Vec<(&MultiIndex, &Coefficient)> = g.iter().collect();
    let mut by_site: Vec<Vec<(u32, u16, u16)>> = vec![Vec::new(); window.len()];
    for (gi, (m, _)) in g_terms.iter().enumerate() {
        for e in m.entries() {
            by_site[window.offset(e.site)].push((gi as u32, e.n, e.nbar));
        }
    }

    let mut acc: HashMap<MultiIndex, Coefficient> = HashMap::new();
    for (n, hn) in h.iter() {
        for e in n.entries() {
            for &(gi, mk, mbk) in &by_site[window.offset(e.site)] {
                let factor = e.n as i64 * mbk as i64 - e.nbar as i64 * mk as i64;
                if factor == 0 {
                    continue;
                }
                let (m, gm) = g_terms[gi as usize];
                let key = n.bracket_merge(m, e.site);
                let c = hn.product(gm).scale(C64::new(0.0, factor as f64));
                match acc.get_mut(&key) {
                    Some(slot) => *slot += &c,
                    None => {
                        acc.insert(key, c);
                    }
                }
            }
        }
    }
    let terms: BTreeMap<MultiIndex, Coefficient> = acc.into_iter().collect();
    out = HamPoly::from_map(window, terms);
    out
}
