use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::coefficient::{Coefficient, Grad};
use super::hampoly::HamPoly;
use super::multi_index::MultiIndex;
use super::window::SiteWindow;
use super::PolyError;
use crate::potential::Potential;

/// Hopping strength `ε₁` and nonlinearity `ε₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub eps1: f64,
    pub eps2: f64,
}

impl Couplings {
    pub fn new(eps1: f64, eps2: f64) -> Self {
        Self { eps1, eps2 }
    }

    pub fn total(&self) -> f64 {
        self.eps1 + self.eps2
    }
}

/// `H₁ = ½(Σ v_j|q_j|² + ε₁ Σ (q̄_j q_{j+1} + q_j q̄_{j+1}) + ½ε₂ Σ |q_j|⁴)`
/// restricted to `window`. Only the diagonal coefficients depend on `v`.
pub fn build_initial_hamiltonian(
    couplings: Couplings,
    v: &Potential,
    window: SiteWindow,
) -> Result<HamPoly, PolyError> {
    let mut terms = Vec::with_capacity(4 * window.len());
    for j in window.sites() {
        let vj = v.get(j).ok_or(PolyError::MissingSite(j))?;
        terms.push((
            MultiIndex::action(j),
            Coefficient::new(C64::new(0.5 * vj, 0.0), Grad::unit(j, C64::new(0.5, 0.0))),
        ));
        if couplings.eps2 != 0.0 {
            terms.push((MultiIndex::new([(j, 2, 2)]), Coefficient::real(0.25 * couplings.eps2)));
        }
        if couplings.eps1 != 0.0 && window.contains(j + 1) {
            let c = Coefficient::real(0.5 * couplings.eps1);
            terms.push((MultiIndex::hop(j, j + 1), c.clone()));
            terms.push((MultiIndex::hop(j + 1, j), c));
        }
    }
    Ok(HamPoly::from_terms(window, terms))
}

/// `H = D + Z + R`: quadratic resonant, higher resonant, non-resonant.
#[derive(Clone, Debug, PartialEq)]
pub struct DzrSplit {
    pub d: HamPoly,
    pub z: HamPoly,
    pub r: HamPoly,
}

/// Splits `H` exactly into its `D`, `Z` and `R` parts. Resonant terms of
/// degree other than 2 go to `Z`.
pub fn split_dzr(h: &HamPoly) -> DzrSplit {
    let (res, r) = h.partition(|n| n.is_resonant());
    let (d, z) = res.into_partition(|n| n.degree() == 2);
    DzrSplit { d, z, r }
}
