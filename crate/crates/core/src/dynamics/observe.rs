use super::state::LatticeState;
use super::DynamicsError;
use crate::poly::Site;
use crate::potential::Potential;

/// `Σ_{|j| > j₀+N} |q_j|²`.
pub fn tail_mass(state: &LatticeState, j0: Site, n: u32) -> Result<f64, DynamicsError> {
    let reach = j0.unsigned_abs() as i64 + n as i64;
    let l = state.half_width();
    if reach >= l as i64 {
        return Err(DynamicsError::WindowTooSmall { reach, l });
    }
    let reach = reach as Site;
    let left: f64 = (-l..-reach).map(|j| state.amp(j).norm_sqr()).sum();
    let right: f64 = (reach + 1..=l).map(|j| state.amp(j).norm_sqr()).sum();
    Ok(left + right)
}

/// Smallest `N' ≥ 0` with `tail_mass(state, j₀, N') < 2δ`, or `L − |j₀|`
/// when even the outermost tail is too heavy.
pub fn wavefront(state: &LatticeState, j0: Site, delta: f64) -> u32 {
    let l = state.half_width();
    let j0 = j0.abs();
    if j0 >= l {
        return 0;
    }
    // tails[k] = mass beyond j0 + k, built from the edges inwards
    let mut tail = 0.0;
    let mut found = (l - j0) as u32;
    for k in (0..(l - j0)).rev() {
        let edge = j0 + k + 1;
        tail += state.amp(edge).norm_sqr() + state.amp(-edge).norm_sqr();
        if tail < 2.0 * delta {
            found = k as u32;
        } else {
            break;
        }
    }
    found
}

/// `H₁ = ½(Σ v_j|q_j|² + ε₁ Σ (q̄_j q_{j+1} + c.c.) + ½ ε₂ Σ |q_j|⁴)`.
pub fn energy(state: &LatticeState, v: &Potential, eps1: f64, eps2: f64) -> f64 {
    let q = &state.amps;
    let v = v.values();
    let mut onsite = 0.0;
    let mut quartic = 0.0;
    for (qj, vj) in q.iter().zip(v) {
        let m = qj.norm_sqr();
        onsite += vj * m;
        quartic += m * m;
    }
    let hop: f64 = q.windows(2).map(|w| 2.0 * (w[0].conj() * w[1]).re).sum();
    0.5 * (onsite + eps1 * hop + 0.5 * eps2 * quartic)
}
