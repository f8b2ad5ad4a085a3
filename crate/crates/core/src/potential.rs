//! Random on-site potentials and the step-wise modulated frequencies derived
//! from them.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::poly::{Grad, PolyError, Site, SiteWindow};

/// Stream purposes, mixed into the master seed so unrelated draws never
/// share a keystream.
pub mod purpose {
    pub const POTENTIAL: u64 = 1;
    pub const INITIAL_STATE: u64 = 2;
    pub const VERIFY: u64 = 3;
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Keystream for `(master_seed, purpose, realization)`. Draws are addressed
/// by position, so a realization never depends on how many others exist or
/// in which order they are produced.
pub fn stream(master_seed: u64, purpose: u64, realization: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(master_seed ^ splitmix(purpose)));
    rng.set_stream(realization);
    rng
}

fn zigzag(site: Site) -> u64 {
    ((site << 1) ^ (site >> 31)) as u32 as u64
}

/// Uniform `[0, 1)` draw for one site of one realization.
pub fn site_uniform(master_seed: u64, purpose: u64, realization: u64, site: Site) -> f64 {
    let mut rng = stream(master_seed, purpose, realization);
    rng.set_word_pos(2 * zigzag(site) as u128);
    rng.random::<f64>()
}

/// On-site potential `v_j` on a finite window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    window: SiteWindow,
    values: Vec<f64>,
    seed: u64,
}

impl Potential {
    /// Explicit values, indexed from `window.lo()`. Values must be finite;
    /// the `[0, 1]` range is only guaranteed for sampled potentials.
    pub fn new(window: SiteWindow, values: Vec<f64>) -> Result<Self, PolyError> {
        if values.len() != window.len() {
            return Err(PolyError::InvalidFrame(format!(
                "potential has {} values for a window of {} sites",
                values.len(),
                window.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(PolyError::InvalidFrame(format!(
                "potential value at site {} is not finite",
                window.lo() + bad as Site
            )));
        }
        Ok(Self {
            window,
            values,
            seed: 0,
        })
    }

    pub fn from_fn<F: Fn(Site) -> f64>(window: SiteWindow, f: F) -> Self {
        Self {
            window,
            values: window.sites().map(f).collect(),
            seed: 0,
        }
    }

    /// I.i.d. uniform `[0, 1)` values for realization `realization`.
    pub fn sample(window: SiteWindow, master_seed: u64, realization: u64) -> Self {
        let mut rng = stream(master_seed, purpose::POTENTIAL, realization);
        let values = window
            .sites()
            .map(|j| {
                rng.set_word_pos(2 * zigzag(j) as u128);
                rng.random::<f64>()
            })
            .collect();
        Self {
            window,
            values,
            seed: realization,
        }
    }

    pub fn window(&self) -> SiteWindow {
        self.window
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Realization index the potential was drawn with (0 for explicit ones).
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn get(&self, site: Site) -> Option<f64> {
        self.window
            .contains(site)
            .then(|| self.values[self.window.offset(site)])
    }

    pub fn value(&self, site: Site) -> f64 {
        self.values[self.window.offset(site)]
    }

    pub fn with_value(&self, site: Site, v: f64) -> Self {
        let mut out = self.clone();
        let o = out.window.offset(site);
        out.values[o] = v;
        out
    }
}

/// Frequencies `v_s` at some normal form step, with their derivatives with
/// respect to the original potential `v₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frequencies {
    window: SiteWindow,
    values: Vec<f64>,
    grads: Vec<Grad>,
    base: Vec<f64>,
}

impl Frequencies {
    /// `v_1 = v` with the identity Jacobian.
    pub fn from_potential(v: &Potential) -> Self {
        let w = v.window();
        Self {
            window: w,
            values: v.values().to_vec(),
            grads: w.sites().map(|j| Grad::unit(j, C64::new(1.0, 0.0))).collect(),
            base: v.values().to_vec(),
        }
    }

    pub(crate) fn with_updates<I>(&self, updates: I) -> Self
    where
        I: IntoIterator<Item = (Site, f64, Grad)>,
    {
        let mut out = self.clone();
        for (j, value, grad) in updates {
            let o = out.window.offset(j);
            out.values[o] = value;
            out.grads[o] = grad;
        }
        out
    }

    pub fn window(&self) -> SiteWindow {
        self.window
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, site: Site) -> f64 {
        self.values[self.window.offset(site)]
    }

    /// `∂v_{s,site}/∂v_{1,·}`.
    pub fn grad(&self, site: Site) -> &Grad {
        &self.grads[self.window.offset(site)]
    }

    /// The modulation `w_j = v_{s,j} − v_{1,j}`.
    pub fn modulation(&self, site: Site) -> f64 {
        let o = self.window.offset(site);
        self.values[o] - self.base[o]
    }

    pub fn max_modulation(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.base)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Sites where `v_s` differs from `v₁`.
    pub fn modulated_sites(&self) -> impl Iterator<Item = Site> + '_ {
        self.window
            .sites()
            .zip(self.values.iter().zip(&self.base))
            .filter(|(_, (a, b))| a != b)
            .map(|(j, _)| j)
    }

    pub fn to_potential(&self) -> Potential {
        Potential {
            window: self.window,
            values: self.values.clone(),
            seed: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_addressed_by_site() {
        let small = Potential::sample(SiteWindow::new(-2, 2).unwrap(), 7, 3);
        let large = Potential::sample(SiteWindow::new(-10, 10).unwrap(), 7, 3);
        for j in -2..=2 {
            assert_eq!(small.value(j), large.value(j));
            assert_eq!(small.value(j), site_uniform(7, purpose::POTENTIAL, 3, j));
        }
        let other = Potential::sample(SiteWindow::new(-2, 2).unwrap(), 7, 4);
        assert_ne!(small.values(), other.values());
        assert!(large.values().iter().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn zigzag_is_injective_near_zero() {
        let mut seen: Vec<u64> = (-50..=50).map(zigzag).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 101);
    }

    #[test]
    fn frequencies_start_unmodulated() {
        let v = Potential::sample(SiteWindow::new(0, 4).unwrap(), 1, 0);
        let f = Frequencies::from_potential(&v);
        assert_eq!(f.max_modulation(), 0.0);
        assert_eq!(f.grad(2).get(2), C64::new(1.0, 0.0));
        assert_eq!(f.modulated_sites().count(), 0);
    }
}
