//! Property suites run by the `verify` subcommand and the acceptance tests.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::RunConfig;
use crate::dynamics::{dense_linear_propagate, InitialState, Stepper};
use crate::normal_form::{
    compose_flows, lie_derivative, remainder_decomposition, run_normal_form, small_divisor_ratio, solve_homological,
    FlowOptions, NormalFormError, NormalFormOptions, NormalFormResult,
};
use crate::poly::random::{random_poly, RandomPolySpec};
use crate::poly::{
    build_initial_hamiltonian, poisson_bracket, split_dzr, triple_norm_on, Barrier, Couplings, HamPoly, NormFrame,
    SiteWindow,
};
use crate::potential::{purpose, stream, Frequencies, Potential};
use crate::resonance::first_screened_realization;

pub type BracketFn = fn(&HamPoly, &HamPoly) -> HamPoly;

/// Sample sizes, tolerances and the physical setup shared by the suites.
#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub master_seed: u64,
    /// Multiplies every numeric tolerance; below 1 tightens.
    pub tolerance_scale: f64,
    pub bracket: BracketFn,
    pub bracket_pairs: usize,
    pub states_per_pair: usize,
    pub prop_pairs: usize,
    pub homological_potentials: usize,
    pub conjugation_states: usize,
    pub drift_steps: u64,
    pub couplings: Couplings,
    pub frame: NormFrame,
    pub m: u32,
    /// Active window of the conjugation run.
    pub window: SiteWindow,
}

impl VerifyOptions {
    /// Desk-scale sizes: ε = 10⁻³ split evenly, N = 16, r = 3, M = 3 on a
    /// 12-site window.
    pub fn desk(master_seed: u64) -> Self {
        Self {
            master_seed,
            tolerance_scale: 1.0,
            bracket: poisson_bracket,
            bracket_pairs: 200,
            states_per_pair: 10,
            prop_pairs: 200,
            homological_potentials: 100,
            conjugation_states: 20,
            drift_steps: 100_000,
            couplings: Couplings::new(5e-4, 5e-4),
            frame: NormFrame::with_default_sigma(0, 16, 3.0, 0.009, 1e-3).expect("valid frame"),
            m: 3,
            window: SiteWindow::new(-6, 5).expect("valid window"),
        }
    }

    /// The sizes used by the acceptance gate.
    pub fn full(master_seed: u64) -> Self {
        Self {
            bracket_pairs: 1000,
            prop_pairs: 1000,
            homological_potentials: 500,
            conjugation_states: 100,
            drift_steps: 1_000_000,
            ..Self::desk(master_seed)
        }
    }

    pub fn from_config(cfg: &RunConfig) -> Self {
        Self {
            tolerance_scale: cfg.tolerance_scale,
            couplings: cfg.couplings(),
            frame: cfg.frame(),
            m: cfg.m,
            ..Self::desk(cfg.master_seed)
        }
    }

    fn rng(&self, suite: u64) -> ChaCha8Rng {
        stream(self.master_seed, purpose::VERIFY, suite)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    /// The measured quantity compared against `tolerance`.
    pub metric: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl SuiteResult {
    fn new(name: &str, metric: f64, tolerance: f64, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            metric,
            tolerance,
            detail: detail.into(),
        }
    }

    fn at_most(name: &str, metric: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self::new(name, metric, tolerance, metric <= tolerance, detail)
    }
}

fn random_state<R: Rng>(rng: &mut R, len: usize) -> Vec<C64> {
    let q: Vec<C64> = (0..len)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = q.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    q.into_iter().map(|z| z / norm).collect()
}

fn bracket_pair<R: Rng>(rng: &mut R) -> (HamPoly, HamPoly) {
    let len = rng.random_range(4..=12);
    let window = SiteWindow::new(0, len - 1).expect("valid window");
    let draw = |rng: &mut R| {
        let mut spec = RandomPolySpec::new(window);
        spec.terms = rng.random_range(1..=8);
        spec.max_degree = rng.random_range(2..=4);
        spec.gauge_invariant = rng.random_bool(0.7);
        spec.real = rng.random_bool(0.5);
        random_poly(rng, &spec)
    };
    (draw(rng), draw(rng))
}

/// `{H,G} = −{G,H}` bit for bit on random pairs.
pub fn suite_bracket_antisymmetry(opts: &VerifyOptions) -> SuiteResult {
    let mut rng = opts.rng(1);
    let mut failures = 0;
    for _ in 0..opts.bracket_pairs {
        let (h, g) = bracket_pair(&mut rng);
        if (opts.bracket)(&h, &g) != (opts.bracket)(&g, &h).neg() {
            failures += 1;
        }
    }
    SuiteResult::new(
        "bracket_antisymmetry",
        failures as f64,
        0.0,
        failures == 0,
        format!("{failures} of {} pairs not exactly antisymmetric", opts.bracket_pairs),
    )
}

/// Symbolic bracket evaluated at random states against
/// `i Σ_k (∂_{q_k}H ∂_{q̄_k}G − ∂_{q̄_k}H ∂_{q_k}G)` from the evaluators,
/// relative to the sum of the magnitudes of those products.
pub fn suite_bracket_oracle(opts: &VerifyOptions) -> SuiteResult {
    let mut rng = opts.rng(2);
    let tol = 1e-6 * opts.tolerance_scale;
    let mut worst: f64 = 0.0;
    for _ in 0..opts.bracket_pairs {
        let (h, g) = bracket_pair(&mut rng);
        let b = (opts.bracket)(&h, &g).with_window(h.window());
        let (eb, eh, eg) = (b.evaluator(), h.evaluator(), g.evaluator());
        for _ in 0..opts.states_per_pair {
            let z = random_state(&mut rng, h.window().len());
            let w: Vec<C64> = z.iter().map(|x| x.conj()).collect();
            let (hz, hw) = eh.gradient(&z, &w);
            let (gz, gw) = eg.gradient(&z, &w);
            let mut ana = C64::new(0.0, 0.0);
            let mut scale = 0.0;
            for k in 0..z.len() {
                let (a, c) = (hz[k] * gw[k], hw[k] * gz[k]);
                ana += a - c;
                scale += a.norm() + c.norm();
            }
            ana *= C64::new(0.0, 1.0);
            let err = (eb.value(&z, &w) - ana).norm();
            let rel = if scale > 0.0 { err / scale } else { err };
            worst = worst.max(rel);
        }
    }
    SuiteResult::at_most(
        "bracket_oracle",
        worst,
        tol,
        format!("{} pairs x {} states", opts.bracket_pairs, opts.states_per_pair),
    )
}

/// `|||{H,G}|||_{r−σ} ≤ σ⁻¹ |||H|||_r |||G|||_r` for `H` supported in
/// `[−b,−a] ∪ [a,b] ⊂ [j₀−N, j₀+N]`, at `r = 3`, `σ = 1/2`.
pub fn suite_bracket_estimate(opts: &VerifyOptions) -> SuiteResult {
    let mut rng = opts.rng(3);
    let (j0, n, r, sigma) = (5, 3, 3.0, 0.5);
    let barrier = Barrier::new(j0, n as i64);
    let window = SiteWindow::symmetric(12).expect("valid window");
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..opts.prop_pairs {
        let a = rng.random_range(j0 - n..=j0 + n);
        let b = rng.random_range(a..=j0 + n);
        let mut hs = RandomPolySpec::new(window);
        hs.sites = (a..=b).chain(-b..=-a).collect();
        hs.terms = rng.random_range(1..=6);
        hs.max_spread = 2 * b as u32;
        let h = random_poly(&mut rng, &hs);
        let mut gs = RandomPolySpec::new(window);
        gs.terms = rng.random_range(1..=10);
        gs.max_spread = 4;
        let g = random_poly(&mut rng, &gs);
        let lhs = triple_norm_on(&(opts.bracket)(&h, &g), &barrier, r - sigma).expect("r − σ > 1");
        let rhs = triple_norm_on(&h, &barrier, r).expect("r > 1") * triple_norm_on(&g, &barrier, r).expect("r > 1")
            / sigma;
        if lhs > rhs {
            violations += 1;
        }
        if rhs > 0.0 {
            worst = worst.max(lhs / rhs);
        }
    }
    SuiteResult::new(
        "bracket_estimate",
        violations as f64,
        0.0,
        violations == 0,
        format!("{violations} violations in {} pairs, largest lhs/rhs {worst:.3e}", opts.prop_pairs),
    )
}

/// `L_v F = R̃` coefficient by coefficient for `F` solving the homological
/// equation, together with the small-divisor estimate on every coefficient.
pub fn suite_homological(opts: &VerifyOptions) -> Vec<SuiteResult> {
    let mut rng = opts.rng(4);
    let window = opts.window;
    let frame = &opts.frame;
    let tol = 1e-12 * opts.tolerance_scale;
    let mut worst_rel: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    let mut screened = 0usize;
    let mut draws = 0u64;
    while screened < opts.homological_potentials && draws < 100 * opts.homological_potentials as u64 {
        let v = Potential::sample(window, opts.master_seed ^ 0x5eed, draws);
        draws += 1;
        let freqs = Frequencies::from_potential(&v);
        let mut spec = RandomPolySpec::new(window);
        spec.terms = rng.random_range(1..=10);
        let rhs = random_poly(&mut rng, &spec).filter(|n, _| !n.is_resonant());
        let f = match solve_homological(&freqs, &rhs, frame) {
            Ok(f) => f,
            Err(NormalFormError::ResonantDivisor { .. }) => continue,
            Err(e) => {
                return vec![SuiteResult::new("homological_inverse", f64::NAN, tol, false, e.to_string())];
            }
        };
        screened += 1;
        let lf = lie_derivative(&freqs, &f).expect("window covers the terms");
        for (n, c) in rhs.iter() {
            let got = lf.get(n).cloned().unwrap_or_default();
            let rel = (got.value - c.value).norm() / c.value.norm();
            worst_rel = worst_rel.max(rel);
        }
        worst_ratio = worst_ratio.max(small_divisor_ratio(&rhs, &f, frame));
    }
    let detail = format!("{screened} screened potentials from {draws} draws");
    if screened < opts.homological_potentials {
        return vec![SuiteResult::new("homological_inverse", f64::NAN, tol, false, detail)];
    }
    vec![
        SuiteResult::at_most("homological_inverse", worst_rel, tol, detail.clone()),
        SuiteResult::at_most("small_divisor_estimate", worst_ratio, 1.0, detail),
    ]
}

/// The normal form of the conjugation oracle: the first screened
/// realization of the master seed on the active window.
pub struct OracleRun {
    pub realization: u64,
    pub potential: Potential,
    pub h1: HamPoly,
    pub result: NormalFormResult,
}

pub fn oracle_normal_form(opts: &VerifyOptions) -> Result<OracleRun, NormalFormError> {
    let (realization, potential) =
        first_screened_realization(opts.window, &opts.frame, opts.couplings, opts.m, opts.master_seed, 1000)?
            .ok_or_else(|| NormalFormError::InvalidArgument("no screened realization in 1000 draws".into()))?;
    let h1 = build_initial_hamiltonian(opts.couplings, &potential, opts.window)?;
    let result = run_normal_form(&h1, &potential, opts.m, &opts.frame, &NormalFormOptions::default())?;
    Ok(OracleRun {
        realization,
        potential,
        h1,
        result,
    })
}

/// `|H₁(Γ(q)) − H̃(q)|` at random unit states against the tracked Lie tail.
pub fn suite_conjugation(opts: &VerifyOptions, run: &OracleRun) -> SuiteResult {
    let mut rng = opts.rng(5);
    let gens: Vec<HamPoly> = run.result.steps.iter().map(|s| s.f.clone()).collect();
    let slack = 1e-8 * opts.tolerance_scale;
    let bound = run.result.total_tail + slack;
    let mut worst: f64 = 0.0;
    for _ in 0..opts.conjugation_states {
        let q = random_state(&mut rng, opts.window.len());
        let gq = compose_flows(&gens, &q, &FlowOptions::default());
        let err = (run.h1.eval(&gq) - run.result.h_final.eval(&q)).norm();
        worst = worst.max(err);
    }
    SuiteResult::at_most(
        "conjugation_oracle",
        worst,
        bound,
        format!(
            "{} states, realization {}, Lie tail {:.3e}",
            opts.conjugation_states, run.realization, run.result.total_tail
        ),
    )
}

/// Every term of `R̃⁽³⁾` carries zero charge beyond `±j₀`.
pub fn suite_r3_cancellation(result: &NormalFormResult) -> SuiteResult {
    let r = split_dzr(&result.h_final).r;
    match remainder_decomposition(&r, &result.frame, result.m) {
        Ok(parts) => SuiteResult::new(
            "r3_cancellation",
            0.0,
            0.0,
            true,
            format!("{} terms in R3, all with zero tail charge", parts.r3.len()),
        ),
        Err(e) => SuiteResult::new("r3_cancellation", 1.0, 0.0, false, e.to_string()),
    }
}

fn l2_dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Norm drift, linear-limit oracle, convergence order, gauge covariance and
/// reversibility of the split-step integrator.
pub fn suite_integrator(opts: &VerifyOptions) -> Vec<SuiteResult> {
    let seed = opts.master_seed;
    let scale = opts.tolerance_scale;
    let mut out = Vec::new();

    let l = 32;
    let v = Potential::sample(SiteWindow::symmetric(l).expect("valid window"), seed, 1);
    let s0 = InitialState::Uniform.build(l, 10, seed, 1).expect("valid state");
    let mut s = s0.clone();
    Stepper::new(&v, 0.5, 1.0, 1e-2).advance(&mut s, opts.drift_steps);
    let drift = (s.mass() - s0.mass()).abs() / s0.mass();
    out.push(SuiteResult::at_most(
        "l2_drift",
        drift,
        1e-12 * scale,
        format!("{} steps on {} sites", opts.drift_steps, 2 * l + 1),
    ));

    let w = SiteWindow::new(-16, 15).expect("valid window");
    let v = Potential::sample(w, seed, 2);
    let mut rng = opts.rng(6);
    let q0 = random_state(&mut rng, w.len());
    let (eps1, dt, t) = (0.25, 1e-3, 10.0);
    let st = Stepper::new(&v, eps1, 0.0, dt);
    let mut q = q0.clone();
    for _ in 0..(t / dt).round() as u64 {
        st.step_amps(&mut q);
    }
    let err = l2_dist(&q, &dense_linear_propagate(&v, eps1, &q0, t));
    out.push(SuiteResult::at_most(
        "dense_propagator",
        err,
        1e-6 * scale,
        format!("32 sites, eps1 = {eps1}, dt = {dt}, t = {t}"),
    ));

    let l = 8;
    let v = Potential::sample(SiteWindow::symmetric(l).expect("valid window"), seed, 3);
    let s0 = InitialState::Uniform.build(l, 4, seed, 3).expect("valid state");
    let run = |dt: f64| {
        let mut s = s0.clone();
        Stepper::new(&v, 0.5, 1.0, dt).advance(&mut s, (1.0 / dt).round() as u64);
        s.amps
    };
    let dt = 0.1;
    let reference = run(dt / 16.0);
    let ratio = l2_dist(&run(dt), &reference) / l2_dist(&run(dt / 2.0), &reference);
    let half_width = 0.5 * scale;
    out.push(SuiteResult::new(
        "dt_halving",
        ratio,
        half_width,
        (ratio - 4.0).abs() <= half_width,
        format!("error ratio at t = 1 must lie in [{}, {}]", 4.0 - half_width, 4.0 + half_width),
    ));

    let st = Stepper::new(&v, 0.5, 1.0, 0.05);
    let mut mismatches = 0;
    for c in [C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)] {
        let mut a = s0.clone();
        let mut b = s0.rotated(c);
        for _ in 0..1000 {
            st.step(&mut a);
            st.step(&mut b);
            mismatches += a
                .amps
                .iter()
                .zip(&b.amps)
                .filter(|(x, y)| x.norm_sqr().to_bits() != y.norm_sqr().to_bits())
                .count();
        }
    }
    out.push(SuiteResult::new(
        "gauge_covariance",
        mismatches as f64,
        0.0,
        mismatches == 0,
        "global phases i, -1, -i over 1000 steps, |q_j|^2 compared bit for bit",
    ));

    let back = Stepper::new(&v, 0.5, 1.0, -0.05);
    let mut s = s0.clone();
    st.step(&mut s);
    back.step(&mut s);
    out.push(SuiteResult::at_most(
        "time_reversibility",
        l2_dist(&s.amps, &s0.amps),
        1e-12 * scale,
        "one step forward, one back",
    ));
    out
}

/// Runs every suite in a fixed order.
pub fn run_suites(opts: &VerifyOptions) -> Vec<SuiteResult> {
    let mut out = vec![
        suite_bracket_antisymmetry(opts),
        suite_bracket_oracle(opts),
        suite_bracket_estimate(opts),
    ];
    out.extend(suite_homological(opts));
    match oracle_normal_form(opts) {
        Ok(run) => {
            out.push(suite_conjugation(opts, &run));
            out.push(suite_r3_cancellation(&run.result));
        }
        Err(e) => out.push(SuiteResult::new("conjugation_oracle", f64::NAN, 0.0, false, e.to_string())),
    }
    out.extend(suite_integrator(opts));
    out
}

/// Fixed-width pass/fail table.
pub fn format_table(results: &[SuiteResult]) -> String {
    let mut s = String::new();
    for r in results {
        s.push_str(&format!(
            "{:<26} {}  metric {:<12.4e} tolerance {:<12.4e} {}\n",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.metric,
            r.tolerance,
            r.detail
        ));
    }
    s
}

