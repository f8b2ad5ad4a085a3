use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::bounds::{BoundCheck, LemmaConstants};
use super::homological::{small_divisor_ratio, solve_homological};
use super::lie::{lie_transform, LieOptions};
use super::schedule::Schedule;
use super::NormalFormError;
use crate::poly::{split_dzr, triple_norm, weight_slices, HamPoly, NormFrame, PolyError};
use crate::potential::{Frequencies, Potential};

#[derive(Clone, Debug, Default)]
pub struct NormalFormOptions {
    /// Largest weight `Δ(n) + |n|` kept by the Lie series at step `s`;
    /// `None` means `s + 6`.
    pub w_cap: Option<u32>,
    /// Turn violated estimates into errors instead of warnings.
    pub strict: bool,
    pub lie: LieOptions,
    /// Record wall-clock time per step.
    pub timing: bool,
    /// Record violated estimates without logging them.
    pub quiet: bool,
}

impl NormalFormOptions {
    pub fn w_cap_at(&self, s: u32) -> u32 {
        self.w_cap.unwrap_or(s + 6)
    }
}

/// Norms and checks recorded for one step. Norms of `F_s` are taken at
/// radius `r − (s−1)σ`, all others at `r − sσ`.
#[derive(Clone, Debug, Serialize)]
pub struct StepDiagnostics {
    pub s: u32,
    #[serde(rename = "N_s")]
    pub n_s: u32,
    /// Half-width of the barrier normalized at this step, `N_{s+1}`.
    #[serde(rename = "N_next")]
    pub n_next: u32,
    pub r_eff: f64,
    #[serde(rename = "norm_F")]
    pub norm_f: f64,
    #[serde(rename = "norm_Z")]
    pub norm_z: f64,
    #[serde(rename = "norm_R")]
    pub norm_r: f64,
    #[serde(rename = "norm_Rcal")]
    pub norm_rcal: f64,
    pub lie_tail: f64,
    pub lie_orders: usize,
    pub lie_rho: f64,
    pub rhs_terms: usize,
    pub small_divisor_ratio: f64,
    pub max_modulation: f64,
    pub checks: Vec<BoundCheck>,
    pub wall_time_ms: Option<f64>,
}

impl StepDiagnostics {
    pub fn violations(&self) -> impl Iterator<Item = &BoundCheck> {
        self.checks.iter().filter(|c| !c.holds())
    }
}

#[derive(Clone, Debug)]
pub struct NormalFormStep {
    pub s: u32,
    pub f: HamPoly,
    pub h_next: HamPoly,
    pub v_next: Frequencies,
    pub diagnostics: StepDiagnostics,
}

/// Norms of the parts of `H₁` at radius `r`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct InitialNorms {
    #[serde(rename = "norm_Z")]
    pub norm_z: f64,
    #[serde(rename = "norm_R")]
    pub norm_r: f64,
    #[serde(rename = "norm_Rcal")]
    pub norm_rcal: f64,
}

#[derive(Clone, Debug)]
pub struct NormalFormResult {
    pub steps: Vec<NormalFormStep>,
    pub h_final: HamPoly,
    pub v_final: Frequencies,
    pub m: u32,
    pub frame: NormFrame,
    pub schedule: Schedule,
    pub initial: InitialNorms,
    /// Estimates on the final Hamiltonian at radius `r/2`.
    pub final_checks: Vec<BoundCheck>,
    /// Sum of the Lie-series tails of all steps.
    pub total_tail: f64,
}

impl NormalFormResult {
    /// `|||ℛ_{s+1}||| / |||ℛ_s|||` for `s = 1..=M`, with `ℛ₁` measured on `H₁`.
    pub fn rcal_ratios(&self) -> Vec<f64> {
        let mut prev = self.initial.norm_rcal;
        self.steps
            .iter()
            .map(|st| {
                let cur = st.diagnostics.norm_rcal;
                let ratio = cur / prev;
                prev = cur;
                ratio
            })
            .collect()
    }
}

fn enforce(checks: &[BoundCheck], opts: &NormalFormOptions, context: &str) -> Result<(), NormalFormError> {
    for c in checks.iter().filter(|c| !c.holds()) {
        if opts.strict {
            return Err(NormalFormError::BoundViolation {
                name: format!("{context}: {}", c.name),
                lhs: c.lhs,
                rhs: c.rhs,
            });
        }
        if !opts.quiet {
            log::warn!("{context}: {} = {:.3e} exceeds its bound {:.3e}", c.name, c.lhs, c.rhs);
        }
    }
    Ok(())
}

/// `v_{s+1,j} = 2 ·` (coefficient of `|q_j|²` in `D_{s+1}`); sites missing
/// from `D_{s+1}` keep their previous value.
pub fn extract_modulated_frequency(d_next: &HamPoly, v_prev: &Frequencies) -> Result<Frequencies, NormalFormError> {
    let mut updates = Vec::with_capacity(d_next.len());
    for (n, c) in d_next.iter() {
        let e = match n.entries() {
            [e] if e.n == 1 && e.nbar == 1 => e,
            _ => return Err(NormalFormError::MalformedDiagonal(n.clone())),
        };
        if !v_prev.window().contains(e.site) {
            return Err(NormalFormError::OutsideWindow(e.site));
        }
        updates.push((e.site, 2.0 * c.value.re, c.grad.scale(C64::new(2.0, 0.0))));
    }
    Ok(v_prev.with_updates(updates))
}

fn slice_checks(z: &HamPoly, r: &HamPoly, frame: &NormFrame, r_eff: f64, bound: impl Fn(u32) -> f64) -> Result<Vec<BoundCheck>, PolyError> {
    let mut out = Vec::new();
    for (a, slice) in weight_slices(&z.add(r)) {
        if a < 3 {
            continue;
        }
        out.push(BoundCheck::new(format!("slice_A{a}"), triple_norm(&slice, frame, r_eff)?, bound(a)));
    }
    Ok(out)
}

/// One step of the iteration: normalize the low-weight non-resonant terms
/// touching `A(j₀, N_{s+1})` and conjugate `H_s` by the resulting flow.
pub fn normal_form_step(
    h_s: &HamPoly,
    v_s: &Frequencies,
    s: u32,
    frame: &NormFrame,
    schedule: &Schedule,
    opts: &NormalFormOptions,
) -> Result<NormalFormStep, NormalFormError> {
    if s == 0 {
        return Err(NormalFormError::InvalidArgument("steps are numbered from 1".into()));
    }
    schedule.check(s)?;
    let started = opts.timing.then(Instant::now);

    let split = split_dzr(h_s);
    let n_next = schedule.n_s(s + 1);
    let barrier = frame.barrier_with(n_next as i64);
    let rtilde = split.r.filter(|n, _| n.touches(&barrier) && n.weight() <= s + 2);
    // {D_s, F} = −½ L_v F, so L_v F = 2R̃ removes R̃ at first order.
    let rhs = rtilde.scale_real(2.0);
    let f = solve_homological(v_s, &rhs, frame)?;

    let r_from = schedule.radius_after(s - 1);
    let r_to = schedule.radius_after(s);
    let lie = lie_transform(h_s, &f, frame, r_from, r_to, opts.w_cap_at(s), &opts.lie)?;
    let h_next = lie.poly;
    let next = split_dzr(&h_next);
    let v_next = extract_modulated_frequency(&next.d, v_s)?;

    let rcal = next.r.filter({
        let b = frame.barrier_with(schedule.n_s(s + 2) as i64);
        move |n, _| n.touches(&b)
    });
    let norm_f = triple_norm(&f, frame, r_from)?;
    let norm_z = triple_norm(&next.z, frame, r_to)?;
    let norm_r = triple_norm(&next.r, frame, r_to)?;
    let norm_rcal = triple_norm(&rcal, frame, r_to)?;
    let sd_ratio = small_divisor_ratio(&rhs, &f, frame);

    let k = LemmaConstants::for_step(frame, s);
    let mut checks = vec![
        BoundCheck::new("small_divisor", sd_ratio, 1.0),
        BoundCheck::new("lie_rho", lie.rho, 0.5),
        BoundCheck::new("norm_F", norm_f, k.f_bound()),
        BoundCheck::new("norm_Z", norm_z, k.zr_bound()),
        BoundCheck::new("norm_R", norm_r, k.zr_bound()),
        BoundCheck::new("norm_Rcal", norm_rcal, k.rcal_bound()),
    ];
    checks.extend(slice_checks(&next.z, &next.r, frame, r_to, |a| k.slice_bound(a))?);
    let reach = v_next
        .modulated_sites()
        .map(|j| (j.abs() - frame.j0.abs()).abs())
        .max()
        .unwrap_or(0);
    checks.push(BoundCheck::new("modulation_support", reach as f64, (frame.n + 1) as f64));
    enforce(&checks, opts, &format!("step {s}"))?;

    let diagnostics = StepDiagnostics {
        s,
        n_s: schedule.n_s(s),
        n_next,
        r_eff: r_to,
        norm_f,
        norm_z,
        norm_r,
        norm_rcal,
        lie_tail: lie.tail,
        lie_orders: lie.orders,
        lie_rho: lie.rho,
        rhs_terms: rhs.len(),
        small_divisor_ratio: sd_ratio,
        max_modulation: v_next.max_modulation(),
        checks,
        wall_time_ms: started.map(|t| t.elapsed().as_secs_f64() * 1e3),
    };
    Ok(NormalFormStep {
        s,
        f,
        h_next,
        v_next,
        diagnostics,
    })
}

/// Norms of the parts of `H₁` at radius `r`, with `ℛ₁` the part of `R₁`
/// touching `A(j₀, N₂)`.
pub fn initial_norms(h1: &HamPoly, frame: &NormFrame, schedule: &Schedule) -> Result<InitialNorms, NormalFormError> {
    let split = split_dzr(h1);
    let b = frame.barrier_with(schedule.n_s(2) as i64);
    let rcal = split.r.filter(|n, _| n.touches(&b));
    Ok(InitialNorms {
        norm_z: triple_norm(&split.z, frame, frame.r)?,
        norm_r: triple_norm(&split.r, frame, frame.r)?,
        norm_rcal: triple_norm(&rcal, frame, frame.r)?,
    })
}

/// Runs `M` steps starting from `H₁` and the potential `v₁`, then checks the
/// final estimates on `H̃ = H_{M+1}` at radius `r/2`.
pub fn run_normal_form(
    h1: &HamPoly,
    v1: &Potential,
    m: u32,
    frame: &NormFrame,
    opts: &NormalFormOptions,
) -> Result<NormalFormResult, NormalFormError> {
    frame.validate()?;
    let schedule = Schedule::new(frame);
    schedule.check(m)?;
    let initial = initial_norms(h1, frame, &schedule)?;

    let mut h = h1.clone();
    let mut v = Frequencies::from_potential(v1);
    let mut steps = Vec::with_capacity(m as usize);
    let mut total_tail = 0.0;
    for s in 1..=m {
        let step = normal_form_step(&h, &v, s, frame, &schedule, opts)?;
        log::debug!(
            "step {s}: |||F||| = {:.3e}, |||Rcal||| = {:.3e}, tail = {:.3e}",
            step.diagnostics.norm_f,
            step.diagnostics.norm_rcal,
            step.diagnostics.lie_tail
        );
        total_tail += step.diagnostics.lie_tail;
        h = step.h_next.clone();
        v = step.v_next.clone();
        steps.push(step);
    }

    let split = split_dzr(&h);
    let half = frame.barrier_with((frame.n / 2) as i64);
    let rcal = split.r.filter(|n, _| n.touches(&half));
    let r_half = frame.r / 2.0;
    let (zr_bound, rcal_bound, _) = LemmaConstants::theorem(frame, m);
    let mut final_checks = vec![
        BoundCheck::new("final_norm_Z", triple_norm(&split.z, frame, r_half)?, zr_bound),
        BoundCheck::new("final_norm_R", triple_norm(&split.r, frame, r_half)?, zr_bound),
        BoundCheck::new("final_norm_Rcal", triple_norm(&rcal, frame, r_half)?, rcal_bound),
    ];
    final_checks.extend(slice_checks(&split.z, &split.r, frame, r_half, |a| {
        LemmaConstants::theorem_slice_bound(frame, m, a)
    })?);
    enforce(&final_checks, opts, "final")?;

    Ok(NormalFormResult {
        steps,
        h_final: h,
        v_final: v,
        m,
        frame: *frame,
        schedule,
        initial,
        final_checks,
        total_tail,
    })
}
