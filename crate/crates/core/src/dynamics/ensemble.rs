use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::evolve::{evolve, EvolveParams, Trajectory};
use super::state::InitialState;
use super::DynamicsError;
use crate::poly::{Site, SiteWindow};
use crate::potential::Potential;
use crate::stats::{linear_fit, median, Proportion};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    #[serde(rename = "L")]
    pub l: Site,
    pub j0: Site,
    #[serde(rename = "N")]
    pub n: u32,
    pub delta: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub dt: f64,
    pub t_max: f64,
    pub sample_every: u64,
    pub initial: InitialState,
}

impl EnsembleConfig {
    fn params(&self) -> EvolveParams {
        EvolveParams {
            eps1: self.eps1,
            eps2: self.eps2,
            dt: self.dt,
            t_max: self.t_max,
            sample_every: self.sample_every,
            extra_times: checkpoint_grid(self.t_max),
            j0: self.j0,
            n: self.n,
            delta: self.delta,
        }
    }
}

/// `{1, 2, 5} × 10^k ≤ t_max` for `k ≥ 0`, followed by `t_max` itself if it
/// is not on the grid.
pub fn checkpoint_grid(t_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut decade = 1.0;
    'outer: loop {
        for m in [1.0, 2.0, 5.0] {
            let t = m * decade;
            if t > t_max * (1.0 + 1e-12) {
                break 'outer;
            }
            out.push(t);
        }
        decade *= 10.0;
    }
    if out.last().is_none_or(|&t| (t - t_max).abs() > 1e-12 * t_max) {
        out.push(t_max);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointStat {
    pub t: f64,
    /// Realizations with `tail_mass < 2δ` at every recorded time up to `t`.
    pub successes: u64,
    pub trials: u64,
    pub probability: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub median_wavefront: f64,
}

/// `N(t) ≈ a ln t + b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub a: f64,
    pub b: f64,
    pub rss: f64,
}

/// Best `N(t) ≈ a t^c + b` over the exponent grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub rss: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavefrontFit {
    pub log: LogFit,
    pub power: PowerFit,
    /// The logarithmic fit leaves no more residual than the best power law.
    pub log_preferred: bool,
}

/// Exponents tried for the power-law fit.
pub const POWER_EXPONENTS: (f64, f64, f64) = (0.25, 3.0, 0.01);

impl WavefrontFit {
    pub fn fit(t: &[f64], y: &[f64]) -> Option<Self> {
        if t.len() < 3 || t.iter().any(|&x| x <= 0.0) {
            return None;
        }
        let lt: Vec<f64> = t.iter().map(|x| x.ln()).collect();
        let (a, b, rss) = linear_fit(&lt, y);
        let log = LogFit { a, b, rss };
        let (lo, hi, step) = POWER_EXPONENTS;
        let count = ((hi - lo) / step).round() as usize;
        let mut power: Option<PowerFit> = None;
        for i in 0..=count {
            let c = lo + i as f64 * step;
            let x: Vec<f64> = t.iter().map(|x| x.powf(c)).collect();
            let (a, b, rss) = linear_fit(&x, y);
            if power.is_none_or(|p| rss < p.rss) {
                power = Some(PowerFit { a, b, c, rss });
            }
        }
        let power = power.expect("non-empty exponent grid");
        Some(Self {
            log,
            power,
            log_preferred: log.rss <= power.rss,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub config: EnsembleConfig,
    pub master_seed: u64,
    pub realizations: u64,
    pub completed: u64,
    /// Realizations aborted by boundary contamination, excluded from the
    /// probabilities.
    pub contaminated: Vec<u64>,
    pub checkpoints: Vec<CheckpointStat>,
    pub wavefront_fit: Option<WavefrontFit>,
    pub max_l2_drift: f64,
    pub max_energy_drift: f64,
}

/// Runs every realization and returns the individual outcomes in
/// realization order.
pub fn run_ensemble_trajectories(
    cfg: &EnsembleConfig,
    realizations: u64,
    master_seed: u64,
) -> Result<Vec<Result<Trajectory, DynamicsError>>, DynamicsError> {
    if realizations == 0 {
        return Err(DynamicsError::InvalidArgument("realizations must be at least 1".into()));
    }
    let params = cfg.params();
    params.validate(cfg.l)?;
    let window = SiteWindow::symmetric(cfg.l).map_err(|e| DynamicsError::InvalidArgument(e.to_string()))?;
    Ok((0..realizations)
        .into_par_iter()
        .map(|i| {
            let v = Potential::sample(window, master_seed, i);
            let s0 = cfg.initial.build(cfg.l, cfg.j0, master_seed, i)?;
            evolve(&s0, &v, &params)
        })
        .collect())
}

/// Reduces individual outcomes, in order, to the ensemble statistics.
pub fn summarize(
    cfg: &EnsembleConfig,
    master_seed: u64,
    runs: &[Result<Trajectory, DynamicsError>],
) -> Result<EnsembleSummary, DynamicsError> {
    let grid = checkpoint_grid(cfg.t_max);
    let mut contaminated = Vec::new();
    let mut ok: Vec<&Trajectory> = Vec::new();
    for (i, r) in runs.iter().enumerate() {
        match r {
            Ok(t) => ok.push(t),
            Err(DynamicsError::BoundaryContaminated { t, .. }) => {
                log::warn!("realization {i} hit the boundary at t = {t}");
                contaminated.push(i as u64);
            }
            Err(e) => return Err(e.clone()),
        }
    }
    let threshold = 2.0 * cfg.delta;
    let tol = 0.5 * cfg.dt;
    let mut checkpoints = Vec::with_capacity(grid.len());
    for &tc in &grid {
        let mut successes = 0;
        let mut fronts = Vec::with_capacity(ok.len());
        for tr in &ok {
            let upto = tr.times.iter().take_while(|&&t| t <= tc + tol).count();
            if tr.tail_mass[..upto].iter().all(|&m| m < threshold) {
                successes += 1;
            }
            if upto > 0 {
                fronts.push(tr.wavefront[upto - 1] as f64);
            }
        }
        let p = Proportion::wilson(successes, ok.len() as u64);
        checkpoints.push(CheckpointStat {
            t: tc,
            successes,
            trials: ok.len() as u64,
            probability: p.estimate,
            ci_low: p.ci_low,
            ci_high: p.ci_high,
            median_wavefront: if fronts.is_empty() { f64::NAN } else { median(&fronts) },
        });
    }
    let t: Vec<f64> = checkpoints.iter().map(|c| c.t).collect();
    let y: Vec<f64> = checkpoints.iter().map(|c| c.median_wavefront).collect();
    let wavefront_fit = if ok.is_empty() { None } else { WavefrontFit::fit(&t, &y) };
    Ok(EnsembleSummary {
        config: cfg.clone(),
        master_seed,
        realizations: runs.len() as u64,
        completed: ok.len() as u64,
        contaminated,
        checkpoints,
        wavefront_fit,
        max_l2_drift: ok.iter().map(|t| t.max_l2_drift()).fold(0.0, f64::max),
        max_energy_drift: ok.iter().map(|t| t.max_energy_drift()).fold(0.0, f64::max),
    })
}

/// Draws `realizations` potentials and initial states from `master_seed`,
/// evolves each in parallel and reduces in realization order.
pub fn run_ensemble(cfg: &EnsembleConfig, realizations: u64, master_seed: u64) -> Result<EnsembleSummary, DynamicsError> {
    let runs = run_ensemble_trajectories(cfg, realizations, master_seed)?;
    summarize(cfg, master_seed, &runs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(eps: f64) -> EnsembleConfig {
        EnsembleConfig {
            l: 24,
            j0: 6,
            n: 3,
            delta: 0.01,
            eps1: eps,
            eps2: eps,
            dt: 0.01,
            t_max: 20.0,
            sample_every: 100,
            initial: InitialState::Uniform,
        }
    }

    #[test]
    fn grid_is_one_two_five() {
        assert_eq!(checkpoint_grid(1000.0), vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0]);
        assert_eq!(checkpoint_grid(30.0), vec![1.0, 2.0, 5.0, 10.0, 20.0, 30.0]);
        assert_eq!(checkpoint_grid(0.5), vec![0.5]);
    }

    #[test]
    fn uncoupled_single_realization_always_succeeds() {
        let s = run_ensemble(&cfg(0.0), 1, 4).unwrap();
        assert!(s.checkpoints.iter().all(|c| c.probability == 1.0));
        assert!(s.contaminated.is_empty());
    }

    #[test]
    fn same_seed_same_summary() {
        let a = run_ensemble(&cfg(0.05), 6, 9).unwrap();
        let b = run_ensemble(&cfg(0.05), 6, 9).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn log_data_prefers_log_fit() {
        let t: Vec<f64> = checkpoint_grid(1e4);
        let y: Vec<f64> = t.iter().map(|t| 2.0 * t.ln() + 1.0).collect();
        let f = WavefrontFit::fit(&t, &y).unwrap();
        assert!(f.log_preferred);
        assert!((f.log.a - 2.0).abs() < 1e-10);
        let y: Vec<f64> = t.iter().map(|t| t.sqrt()).collect();
        let f = WavefrontFit::fit(&t, &y).unwrap();
        assert!(!f.log_preferred);
        assert!((f.power.c - 0.5).abs() < 1e-9);
    }
}
