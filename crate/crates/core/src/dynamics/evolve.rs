use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::integrator::Stepper;
use super::observe::{energy, tail_mass, wavefront};
use super::state::LatticeState;
use super::DynamicsError;
use crate::poly::Site;
use crate::potential::Potential;

/// Runs abort once `|q_{−L}|² + |q_L|²` exceeds this fraction of the mass.
pub const BOUNDARY_ABORT: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveParams {
    pub eps1: f64,
    pub eps2: f64,
    pub dt: f64,
    pub t_max: f64,
    /// Observables are recorded every this many steps, at step 0 and at the
    /// last step.
    pub sample_every: u64,
    /// Additional times at which to record (rounded to the step grid).
    pub extra_times: Vec<f64>,
    pub j0: Site,
    pub n: u32,
    pub delta: f64,
}

impl EvolveParams {
    pub fn steps(&self) -> u64 {
        (self.t_max / self.dt).round() as u64
    }

    pub fn validate(&self, l: Site) -> Result<(), DynamicsError> {
        let bad = |m: String| Err(DynamicsError::InvalidArgument(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad(format!("t_max = {} must be positive", self.t_max));
        }
        if self.steps() == 0 {
            return bad("t_max is shorter than one step".into());
        }
        if self.sample_every == 0 {
            return bad("sample_every must be at least 1".into());
        }
        if !(self.delta > 0.0) {
            return bad(format!("delta = {} must be positive", self.delta));
        }
        let reach = self.j0.unsigned_abs() as i64 + self.n as i64;
        if reach >= l as i64 {
            return Err(DynamicsError::WindowTooSmall { reach, l });
        }
        Ok(())
    }
}

/// Observables sampled along one run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub tail_mass: Vec<f64>,
    pub wavefront: Vec<u32>,
    /// `|‖q(t)‖² − ‖q(0)‖²| / ‖q(0)‖²`.
    pub l2_drift: Vec<f64>,
    /// `|H₁(t) − H₁(0)| / |H₁(0)|` (absolute when `H₁(0) = 0`).
    pub energy_drift: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_l2_drift(&self) -> f64 {
        self.l2_drift.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_energy_drift(&self) -> f64 {
        self.energy_drift.iter().copied().fold(0.0, f64::max)
    }

    /// CSV with header `t,tail_mass,wavefront,l2_drift,energy_drift`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,tail_mass,wavefront,l2_drift,energy_drift\n");
        for i in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                self.times[i], self.tail_mass[i], self.wavefront[i], self.l2_drift[i], self.energy_drift[i]
            )
            .expect("writing to a String");
        }
        out
    }
}

/// Integrates from `state0` to `t_max`, recording tail mass beyond `j₀+N`,
/// the wavefront and conservation diagnostics.
pub fn evolve(state0: &LatticeState, v: &Potential, p: &EvolveParams) -> Result<Trajectory, DynamicsError> {
    let l = state0.half_width();
    p.validate(l)?;
    if v.window() != state0.window() {
        return Err(DynamicsError::InvalidArgument(
            "potential and state windows differ".into(),
        ));
    }
    let steps = p.steps();
    let mut marks: Vec<u64> = p
        .extra_times
        .iter()
        .map(|&t| (t / p.dt).round() as u64)
        .filter(|&k| k <= steps)
        .collect();
    marks.sort_unstable();
    marks.dedup();
    let mut marks = marks.into_iter().peekable();

    let stepper = Stepper::new(v, p.eps1, p.eps2, p.dt);
    let mass0 = state0.mass();
    let e0 = energy(state0, v, p.eps1, p.eps2);
    let mut traj = Trajectory::default();
    let record = |s: &LatticeState, traj: &mut Trajectory| -> Result<(), DynamicsError> {
        traj.times.push(s.t);
        traj.tail_mass.push(tail_mass(s, p.j0, p.n)?);
        traj.wavefront.push(wavefront(s, p.j0, p.delta));
        traj.l2_drift.push(if mass0 > 0.0 {
            (s.mass() - mass0).abs() / mass0
        } else {
            s.mass()
        });
        let e = energy(s, v, p.eps1, p.eps2);
        traj.energy_drift.push(if e0 != 0.0 { (e - e0).abs() / e0.abs() } else { e.abs() });
        Ok(())
    };

    let mut state = state0.clone();
    let t0 = state.t;
    record(&state, &mut traj)?;
    for k in 1..=steps {
        stepper.step(&mut state);
        state.t = t0 + k as f64 * p.dt;
        while marks.peek().is_some_and(|&m| m < k) {
            marks.next();
        }
        let marked = marks.peek() == Some(&k);
        if k % p.sample_every == 0 || k == steps || marked {
            record(&state, &mut traj)?;
        }
        if state.boundary_mass() > BOUNDARY_ABORT * mass0 {
            if !(k % p.sample_every == 0 || k == steps || marked) {
                record(&state, &mut traj)?;
            }
            return Err(DynamicsError::BoundaryContaminated {
                t: state.t,
                partial: Box::new(traj),
            });
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64 as C64;

    use super::*;
    use crate::poly::SiteWindow;

    fn params(eps1: f64, eps2: f64, t_max: f64) -> EvolveParams {
        EvolveParams {
            eps1,
            eps2,
            dt: 0.01,
            t_max,
            sample_every: 10,
            extra_times: vec![],
            j0: 5,
            n: 0,
            delta: 0.01,
        }
    }

    #[test]
    fn no_transport_without_coupling() {
        let v = Potential::sample(SiteWindow::symmetric(12).unwrap(), 1, 0);
        let s = LatticeState::peak(12, 0).unwrap();
        let tr = evolve(&s, &v, &params(0.0, 0.0, 5.0)).unwrap();
        assert_eq!(tr.len(), 51);
        assert!(tr.tail_mass.iter().all(|&t| t == 0.0));
        assert_eq!(tr.times[50], 5.0);
    }

    #[test]
    fn boundary_contamination_aborts_with_partial_record() {
        let v = Potential::from_fn(SiteWindow::symmetric(8).unwrap(), |_| 0.5);
        let s = LatticeState::peak(8, 0).unwrap();
        let mut p = params(1.0, 0.0, 50.0);
        p.j0 = 2;
        match evolve(&s, &v, &p) {
            Err(DynamicsError::BoundaryContaminated { t, partial }) => {
                assert!(t > 0.0 && t < 50.0);
                assert_eq!(*partial.times.last().unwrap(), t);
            }
            other => panic!("expected contamination, got {other:?}"),
        }
    }

    #[test]
    fn extra_times_are_recorded() {
        let v = Potential::sample(SiteWindow::symmetric(12).unwrap(), 1, 0);
        let s = LatticeState::peak(12, 0).unwrap();
        let mut p = params(0.05, 0.1, 1.0);
        p.sample_every = 1000;
        p.extra_times = vec![0.25, 0.5];
        let tr = evolve(&s, &v, &p).unwrap();
        assert_eq!(tr.times, vec![0.0, 0.25, 0.5, 1.0]);
        let csv = tr.to_csv();
        assert!(csv.starts_with("t,tail_mass,wavefront,l2_drift,energy_drift\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn window_too_small_rejected() {
        let v = Potential::sample(SiteWindow::symmetric(5).unwrap(), 1, 0);
        let s = LatticeState::new(5, vec![C64::new(0.0, 0.0); 11]).unwrap();
        assert!(matches!(
            evolve(&s, &v, &params(0.1, 0.0, 1.0)),
            Err(DynamicsError::WindowTooSmall { .. })
        ));
    }
}
