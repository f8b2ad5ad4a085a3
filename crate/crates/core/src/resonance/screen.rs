use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::enumerate::enumerate_multiindices;
use super::threshold::threshold_unchecked;
use crate::normal_form::{normal_form_step, NormalFormError, NormalFormOptions, Schedule};
use crate::poly::{build_initial_hamiltonian, Couplings, DiffVector, HamPoly, NormFrame, Site, SiteWindow};
use crate::potential::{Frequencies, Potential};
use crate::stats::Proportion;

/// Anything that assigns a frequency to a lattice site.
pub trait SiteValues {
    fn site_value(&self, site: Site) -> f64;
}

impl SiteValues for Potential {
    fn site_value(&self, site: Site) -> f64 {
        self.value(site)
    }
}

impl SiteValues for Frequencies {
    fn site_value(&self, site: Site) -> f64 {
        self.value(site)
    }
}

/// A small divisor that fell below its threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub step: u32,
    pub k: Vec<(Site, i32)>,
    pub divisor: f64,
    pub threshold: f64,
}

impl Witness {
    /// `|divisor| / threshold`, below 1 for a failure.
    pub fn margin(&self) -> f64 {
        self.divisor.abs() / self.threshold
    }
}

/// Checks `|Σ k_j v_j| ≥ threshold(k)` for every `k`. On success returns the
/// smallest ratio `|Σ k_j v_j| / threshold(k)` (infinite for an empty list).
pub fn check_nonresonant<V: SiteValues>(
    v: &V,
    ks: &[DiffVector],
    frame: &NormFrame,
    step: u32,
) -> Result<f64, Witness> {
    check_nonresonant_with(v, ks, frame, step, false)
}

/// As [`check_nonresonant`]; with `strict` a divisor exactly at its
/// threshold also fails.
pub fn check_nonresonant_with<V: SiteValues>(
    v: &V,
    ks: &[DiffVector],
    frame: &NormFrame,
    step: u32,
    strict: bool,
) -> Result<f64, Witness> {
    let mut min_margin = f64::INFINITY;
    for k in ks {
        let divisor = k.dot(|j| v.site_value(j));
        let threshold = threshold_unchecked(k, frame);
        let below = if strict { divisor.abs() <= threshold } else { divisor.abs() < threshold };
        if divisor == 0.0 || below {
            return Err(Witness {
                step,
                k: k.entries().to_vec(),
                divisor,
                threshold,
            });
        }
        min_margin = min_margin.min(divisor.abs() / threshold);
    }
    Ok(min_margin)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreenOutcome {
    pub passed: bool,
    pub witness: Option<Witness>,
    /// Smallest divisor-to-threshold ratio over the checks that ran.
    pub min_margin: f64,
    /// `max_j |v_{s,j} − v_{1,j}|` over the steps reached.
    pub max_modulation: f64,
    /// Steps whose sets were checked.
    pub steps_checked: u32,
}

/// Screening setup shared by every potential of an ensemble.
#[derive(Clone, Debug)]
pub struct Screener {
    frame: NormFrame,
    couplings: Couplings,
    window: SiteWindow,
    m: u32,
    sets: Vec<Vec<DiffVector>>,
    options: NormalFormOptions,
    strict_threshold: bool,
}

/// Window wide enough for the barrier, the generators' reach and the
/// modulated sites at every step up to `m`.
pub fn screening_window(frame: &NormFrame, m: u32) -> SiteWindow {
    let reach = frame.j0.abs() + frame.n as Site + m as Site + 2;
    SiteWindow::symmetric(reach).expect("non-negative half-width")
}

impl Screener {
    pub fn new(frame: &NormFrame, couplings: Couplings, m: u32, window: SiteWindow) -> Result<Self, NormalFormError> {
        frame.validate()?;
        Schedule::new(frame).check(m)?;
        let sets = (1..=m.max(1)).map(|s| enumerate_multiindices(frame, s, window)).collect();
        Ok(Self {
            frame: *frame,
            couplings,
            window,
            m,
            sets,
            options: NormalFormOptions {
                quiet: true,
                ..NormalFormOptions::default()
            },
            strict_threshold: false,
        })
    }

    pub fn with_options(mut self, options: NormalFormOptions) -> Self {
        self.options = options;
        self
    }

    pub fn with_strict_threshold(mut self, strict: bool) -> Self {
        self.strict_threshold = strict;
        self
    }

    pub fn window(&self) -> SiteWindow {
        self.window
    }

    pub fn set(&self, s: u32) -> &[DiffVector] {
        &self.sets[s as usize - 1]
    }

    /// The frequencies `v_s` depend only on the quadratic part of `H`, which
    /// evolves on its own under brackets with quadratic generators, so the
    /// screening iteration drops the quartic term.
    fn quadratic_hamiltonian(&self, v1: &Potential) -> Result<HamPoly, NormalFormError> {
        Ok(build_initial_hamiltonian(
            Couplings::new(self.couplings.eps1, 0.0),
            v1,
            self.window,
        )?)
    }

    /// Checks `v₁` against the step-1 set and, with `run_nf`, each modulated
    /// `v_s` against the step-`s` set before taking the next step. Without
    /// `run_nf` every set is checked against `v₁` itself.
    pub fn screen(&self, v1: &Potential, run_nf: bool) -> Result<ScreenOutcome, NormalFormError> {
        let schedule = Schedule::new(&self.frame);
        let mut freqs = Frequencies::from_potential(v1);
        let mut h = if run_nf && self.m > 1 {
            Some(self.quadratic_hamiltonian(v1)?)
        } else {
            None
        };
        let mut min_margin = f64::INFINITY;
        for s in 1..=self.m {
            match check_nonresonant_with(&freqs, self.set(s), &self.frame, s, self.strict_threshold) {
                Ok(m) => min_margin = min_margin.min(m),
                Err(w) => {
                    return Ok(ScreenOutcome {
                        passed: false,
                        min_margin: min_margin.min(w.margin()),
                        witness: Some(w),
                        max_modulation: freqs.max_modulation(),
                        steps_checked: s,
                    })
                }
            }
            if s < self.m {
                if let Some(hs) = h.as_mut() {
                    let step = normal_form_step(hs, &freqs, s, &self.frame, &schedule, &self.options)?;
                    *hs = step.h_next;
                    freqs = step.v_next;
                }
            }
        }
        Ok(ScreenOutcome {
            passed: true,
            witness: None,
            min_margin,
            max_modulation: freqs.max_modulation(),
            steps_checked: self.m,
        })
    }
}

/// Convenience wrapper around [`Screener`] for a single potential, using
/// the potential's own window.
pub fn screen_potential(
    v1: &Potential,
    couplings: Couplings,
    m: u32,
    frame: &NormFrame,
    run_nf: bool,
) -> Result<ScreenOutcome, NormalFormError> {
    Screener::new(frame, couplings, m, v1.window())?.screen(v1, run_nf)
}

/// The first realization of `master_seed` on `window` that passes the full
/// stepwise screening, trying indices `0, 1, …` up to `max_tries`.
pub fn first_screened_realization(
    window: SiteWindow,
    frame: &NormFrame,
    couplings: Couplings,
    m: u32,
    master_seed: u64,
    max_tries: u64,
) -> Result<Option<(u64, Potential)>, NormalFormError> {
    let screener = Screener::new(frame, couplings, m, window)?;
    for i in 0..max_tries {
        let v = Potential::sample(window, master_seed, i);
        if screener.screen(&v, true)?.passed {
            return Ok(Some((i, v)));
        }
    }
    Ok(None)
}

/// Monte Carlo estimate of the measure of potentials rejected by the
/// screening.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub epsilon: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub alpha: f64,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "M")]
    pub m: u32,
    pub j0: Site,
    pub window: SiteWindow,
    pub master_seed: u64,
    pub samples: u64,
    pub resonant: u64,
    pub resonant_fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `ε^{α/2}`.
    pub measure_bound: f64,
    /// Smallest divisor-to-threshold ratio among passing samples.
    pub worst_margin: f64,
    /// Fraction of samples whose first failing check is at step `s`
    /// (index `s − 1`); sums to `resonant_fraction`.
    pub per_step_fractions: Vec<f64>,
    /// `max_j |w_j|` over passing samples.
    pub max_modulation: f64,
    /// `40 N² r³ ε`.
    pub modulation_bound: f64,
    /// Samples whose normal form iteration failed outright.
    pub errors: u64,
}

/// Screens `samples` i.i.d. uniform potentials drawn from `master_seed`.
/// Work is spread over the current rayon pool; results are reduced in
/// sample order, so the report does not depend on the thread count.
pub fn estimate_resonant_measure(
    frame: &NormFrame,
    couplings: Couplings,
    m: u32,
    samples: u64,
    master_seed: u64,
) -> Result<ResonanceReport, NormalFormError> {
    let window = screening_window(frame, m);
    estimate_with(Screener::new(frame, couplings, m, window)?, samples, master_seed)
}

/// [`estimate_resonant_measure`] with a prepared screener.
pub fn estimate_with(screener: Screener, samples: u64, master_seed: u64) -> Result<ResonanceReport, NormalFormError> {
    if samples == 0 {
        return Err(NormalFormError::InvalidArgument("samples must be at least 1".into()));
    }
    let (frame, couplings, m, window) = (&screener.frame, screener.couplings, screener.m, screener.window);
    let outcomes: Vec<Result<ScreenOutcome, NormalFormError>> = (0..samples)
        .into_par_iter()
        .map(|i| screener.screen(&Potential::sample(window, master_seed, i), true))
        .collect();

    let steps = m.max(1) as usize;
    let mut per_step = vec![0u64; steps];
    let mut resonant = 0u64;
    let mut errors = 0u64;
    let mut worst_margin = f64::INFINITY;
    let mut max_modulation: f64 = 0.0;
    for o in &outcomes {
        match o {
            Ok(o) if o.passed => {
                worst_margin = worst_margin.min(o.min_margin);
                max_modulation = max_modulation.max(o.max_modulation);
            }
            Ok(o) => {
                resonant += 1;
                per_step[o.witness.as_ref().map_or(0, |w| w.step as usize - 1)] += 1;
            }
            Err(e) => {
                log::warn!("screening error: {e}");
                resonant += 1;
                errors += 1;
            }
        }
    }
    let p = Proportion::wilson(resonant, samples);
    let n = frame.n as f64;
    Ok(ResonanceReport {
        epsilon: frame.epsilon,
        eps1: couplings.eps1,
        eps2: couplings.eps2,
        alpha: frame.alpha,
        n: frame.n,
        m,
        j0: frame.j0,
        window,
        master_seed,
        samples,
        resonant,
        resonant_fraction: p.estimate,
        ci_low: p.ci_low,
        ci_high: p.ci_high,
        measure_bound: frame.epsilon.powf(frame.alpha / 2.0),
        worst_margin,
        per_step_fractions: per_step.iter().map(|&c| c as f64 / samples as f64).collect(),
        max_modulation,
        modulation_bound: 40.0 * n * n * frame.r.powi(3) * frame.epsilon,
        errors,
    })
}
