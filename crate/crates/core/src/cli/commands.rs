use std::fs;
use std::io::Write;

use serde::Serialize;
use serde_json::json;

use super::config::{OutFormat, RunConfig};
use super::verify::{format_table, run_suites, VerifyOptions};
use super::CliError;
use crate::dynamics::{run_ensemble_trajectories, summarize, EnsembleConfig};
use crate::normal_form::{remainder_decomposition, run_normal_form, NormalFormError, NormalFormOptions};
use crate::poly::{build_initial_hamiltonian, split_dzr, triple_norm, HamPoly, SiteWindow};
use crate::potential::Potential;
use crate::resonance::{estimate_with, screening_window, Screener};

/// Version of the layout of every output file.
pub const FORMAT_VERSION: u32 = 1;

fn write_out(path: Option<&str>, contents: &str) -> Result<(), CliError> {
    match path {
        None | Some("-") => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
        Some(p) => fs::write(p, contents).map_err(|e| CliError::Io(format!("{p}: {e}"))),
    }
}

fn envelope<T: Serialize>(cfg: &RunConfig, key: &str, payload: &T) -> Result<String, CliError> {
    let v = json!({
        "format_version": FORMAT_VERSION,
        "config": cfg,
        key: payload,
    });
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Module(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Runs the ensemble, writes the summary JSON and, with `out_format = csv`,
/// one trajectory CSV per realization next to it.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let ens = EnsembleConfig {
        l: cfg.l,
        j0: cfg.j0,
        n: cfg.n,
        delta: cfg.delta,
        eps1: cfg.eps1,
        eps2: cfg.eps2,
        dt: cfg.dt,
        t_max: cfg.t_max,
        sample_every: cfg.sample_every,
        initial: cfg.initial,
    };
    let runs = run_ensemble_trajectories(&ens, cfg.realizations, cfg.master_seed)
        .map_err(|e| CliError::Module(e.to_string()))?;
    let summary = summarize(&ens, cfg.master_seed, &runs).map_err(|e| CliError::Module(e.to_string()))?;
    if cfg.out_format == OutFormat::Csv {
        let base = cfg.out_path.as_deref().expect("validated: csv needs out_path");
        let header = format!(
            "# format_version={FORMAT_VERSION}\n# config={}\n",
            serde_json::to_string(cfg).map_err(|e| CliError::Module(e.to_string()))?
        );
        for (i, r) in runs.iter().enumerate() {
            let tr = match r {
                Ok(t) => t,
                Err(crate::dynamics::DynamicsError::BoundaryContaminated { partial, .. }) => partial,
                Err(e) => return Err(CliError::Module(format!("realization {i}: {e}"))),
            };
            let path = format!("{base}.realization-{i}.csv");
            write_out(Some(&path), &format!("{header}{}", tr.to_csv()))?;
        }
    }
    write_out(cfg.out_path.as_deref(), &envelope(cfg, "summary", &summary)?)
}

#[derive(Serialize)]
struct FinalRecord<'a> {
    record: &'static str,
    format_version: u32,
    config: &'a RunConfig,
    realization: u64,
    #[serde(rename = "M")]
    m: u32,
    #[serde(rename = "initial_norm_Z")]
    initial_norm_z: f64,
    #[serde(rename = "initial_norm_R")]
    initial_norm_r: f64,
    #[serde(rename = "initial_norm_Rcal")]
    initial_norm_rcal: f64,
    rcal_ratios: Vec<f64>,
    total_lie_tail: f64,
    final_checks: &'a [crate::normal_form::BoundCheck],
    /// `|||R̃⁽¹⁾ + R̃⁽²⁾|||` at `r/2`.
    #[serde(rename = "norm_R12")]
    norm_r12: f64,
    #[serde(rename = "norm_R3")]
    norm_r3: f64,
    r3_terms: usize,
    r3_cancellation: bool,
    r3_leak: Option<String>,
}

fn module(e: NormalFormError) -> CliError {
    CliError::Module(e.to_string())
}

/// Writes one JSON line per normal form step and a final record with the
/// remainder decomposition.
pub fn cmd_normalform(cfg: &RunConfig) -> Result<(), CliError> {
    let frame = cfg.frame();
    let window = SiteWindow::symmetric(cfg.l).map_err(|e| CliError::Module(e.to_string()))?;
    let v = Potential::sample(window, cfg.master_seed, cfg.realization);
    let h1 = build_initial_hamiltonian(cfg.couplings(), &v, window).map_err(|e| CliError::Module(e.to_string()))?;
    let opts = NormalFormOptions {
        w_cap: cfg.w_cap,
        strict: cfg.strict,
        timing: cfg.timing,
        ..NormalFormOptions::default()
    };
    let res = run_normal_form(&h1, &v, cfg.m, &frame, &opts).map_err(module)?;
    let mut out = String::new();
    for st in &res.steps {
        let line = json!({
            "record": "step",
            "format_version": FORMAT_VERSION,
            "diagnostics": st.diagnostics,
        });
        out.push_str(&serde_json::to_string(&line).map_err(|e| CliError::Module(e.to_string()))?);
        out.push('\n');
    }
    let r = split_dzr(&res.h_final).r;
    let r_half = frame.r / 2.0;
    let norm = |p: &HamPoly| triple_norm(p, &frame, r_half).map_err(|e| CliError::Module(e.to_string()));
    let (norm_r12, norm_r3, r3_terms, ok, leak) = match remainder_decomposition(&r, &frame, cfg.m) {
        Ok(parts) => (norm(&parts.r1.add(&parts.r2))?, norm(&parts.r3)?, parts.r3.len(), true, None),
        Err(NormalFormError::BarrierLeak(n)) => (f64::NAN, f64::NAN, 0, false, Some(format!("{n:?}"))),
        Err(e) => return Err(module(e)),
    };
    let rec = FinalRecord {
        record: "final",
        format_version: FORMAT_VERSION,
        config: cfg,
        realization: cfg.realization,
        m: cfg.m,
        initial_norm_z: res.initial.norm_z,
        initial_norm_r: res.initial.norm_r,
        initial_norm_rcal: res.initial.norm_rcal,
        rcal_ratios: res.rcal_ratios(),
        total_lie_tail: res.total_tail,
        final_checks: &res.final_checks,
        norm_r12,
        norm_r3,
        r3_terms,
        r3_cancellation: ok,
        r3_leak: leak.clone(),
    };
    out.push_str(&serde_json::to_string(&rec).map_err(|e| CliError::Module(e.to_string()))?);
    out.push('\n');
    write_out(cfg.out_path.as_deref(), &out)?;
    if let Some(n) = leak {
        return Err(CliError::Module(format!("R3 term {n} carries charge across the barrier")));
    }
    Ok(())
}

/// Writes the Monte Carlo resonance report.
pub fn cmd_resonance(cfg: &RunConfig) -> Result<(), CliError> {
    let frame = cfg.frame();
    let window = screening_window(&frame, cfg.m);
    let screener = Screener::new(&frame, cfg.couplings(), cfg.m, window)
        .map_err(module)?
        .with_strict_threshold(cfg.strict_threshold);
    let report = estimate_with(screener, cfg.samples, cfg.master_seed).map_err(module)?;
    write_out(cfg.out_path.as_deref(), &envelope(cfg, "report", &report)?)
}

/// Prints the pass/fail table; fails with the first failing suite's name.
pub fn cmd_verify(cfg: &RunConfig) -> Result<(), CliError> {
    let results = run_suites(&VerifyOptions::from_config(cfg));
    let table = format_table(&results);
    match cfg.out_path.as_deref() {
        None | Some("-") => write_out(None, &table)?,
        Some(p) => {
            eprint!("{table}");
            write_out(Some(p), &envelope(cfg, "suites", &results)?)?;
        }
    }
    match results.iter().find(|r| !r.passed) {
        Some(r) => Err(CliError::Verification(r.name.clone())),
        None => Ok(()),
    }
}
