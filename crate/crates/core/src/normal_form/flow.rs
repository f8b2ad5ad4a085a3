use num_complex::Complex64 as C64;

use crate::poly::{Evaluator, HamPoly};

/// Accuracy control for the numeric flow oracle.
#[derive(Clone, Copy, Debug)]
pub struct FlowOptions {
    /// Target max-norm difference between successive step doublings.
    pub tol: f64,
    pub min_steps: usize,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            tol: 1e-14,
            min_steps: 8,
            max_steps: 1 << 16,
        }
    }
}

fn rk4(ev: &Evaluator, q: &[C64], steps: usize) -> Vec<C64> {
    let h = 1.0 / steps as f64;
    let axpy = |x: &[C64], k: &[C64], a: f64| -> Vec<C64> {
        x.iter().zip(k).map(|(xi, ki)| xi + ki * a).collect()
    };
    let mut x = q.to_vec();
    for _ in 0..steps {
        let k1 = ev.vector_field(&x);
        let k2 = ev.vector_field(&axpy(&x, &k1, h / 2.0));
        let k3 = ev.vector_field(&axpy(&x, &k2, h / 2.0));
        let k4 = ev.vector_field(&axpy(&x, &k3, h));
        for i in 0..x.len() {
            x[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    x
}

/// Time-1 map of `q̇_j = i ∂F/∂q̄_j`, integrated with classical RK4 and
/// repeated step doubling until successive results agree to `opts.tol`.
///
/// Returns the state and the last doubling difference.
pub fn flow_time_one(f: &HamPoly, q: &[C64], opts: &FlowOptions) -> (Vec<C64>, f64) {
    let ev = f.evaluator();
    let mut steps = opts.min_steps.max(1);
    let mut coarse = rk4(&ev, q, steps);
    loop {
        let fine = rk4(&ev, q, 2 * steps);
        let diff = coarse
            .iter()
            .zip(&fine)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        steps *= 2;
        if diff <= opts.tol || steps >= opts.max_steps {
            return (fine, diff);
        }
        coarse = fine;
    }
}

/// `Γ(q) = X¹_{F₁}(X¹_{F₂}(… X¹_{F_M}(q)))`, so that `H₁∘Γ` is the
/// Hamiltonian obtained by transforming with `F₁` first.
pub fn compose_flows(generators: &[HamPoly], q: &[C64], opts: &FlowOptions) -> Vec<C64> {
    generators
        .iter()
        .rev()
        .fold(q.to_vec(), |x, f| flow_time_one(f, &x, opts).0)
}
