//! Command-line front end: flat `key = value` configs with flag overrides,
//! one subcommand per experiment family and a fixed exit-code contract.

mod commands;
mod config;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use commands::{cmd_normalform, cmd_resonance, cmd_simulate, cmd_verify, FORMAT_VERSION};
pub use config::{parse_config, ConfigError, Mode, OutFormat, RunConfig, Source, KEYS};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Module(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// 2 for configuration errors, 3 for module and I/O errors, 4 for a
    /// failed verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Module(_) | CliError::Io(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "latticebnf", version, about = "Normal forms, resonance screening and dynamics for the disordered DNLS")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ensemble of split-step runs with tail-mass and wavefront statistics.
    Simulate(RunArgs),
    /// Finite-step Birkhoff normal form with per-step diagnostics.
    #[command(name = "normal-form")]
    NormalForm(RunArgs),
    /// Monte Carlo estimate of the resonant measure.
    Resonance(RunArgs),
    /// Property suites at desk scale.
    Verify(RunArgs),
}

/// Options shared by every subcommand. Each config key can also be given as
/// a flag, which takes precedence over the file.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long, visible_alias = "out-path")]
    pub out: Option<String>,
    /// Worker threads; falls back to LATTICEBNF_THREADS, then to the
    /// available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Treat bound warnings as failures.
    #[arg(long)]
    pub strict: bool,
    /// Count a divisor exactly at its threshold as resonant.
    #[arg(long)]
    pub strict_threshold: bool,
    /// Record wall-clock time per normal form step.
    #[arg(long)]
    pub timing: bool,
    #[arg(long = "L")]
    pub l: Option<String>,
    #[arg(long)]
    pub j0: Option<String>,
    #[arg(long = "N")]
    pub n: Option<String>,
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub eps1: Option<String>,
    #[arg(long)]
    pub eps2: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long = "M")]
    pub m: Option<String>,
    #[arg(long)]
    pub dt: Option<String>,
    #[arg(long, alias = "t_max")]
    pub t_max: Option<String>,
    #[arg(long)]
    pub realizations: Option<String>,
    #[arg(long)]
    pub samples: Option<String>,
    #[arg(long, alias = "master_seed")]
    pub master_seed: Option<String>,
    #[arg(long, alias = "w_cap")]
    pub w_cap: Option<String>,
    #[arg(long, alias = "out_format")]
    pub out_format: Option<String>,
    #[arg(long)]
    pub initial: Option<String>,
    #[arg(long, alias = "sample_every")]
    pub sample_every: Option<String>,
    #[arg(long, alias = "tolerance_scale")]
    pub tolerance_scale: Option<String>,
    #[arg(long)]
    pub realization: Option<String>,
}

impl RunArgs {
    fn overrides(&self, mode: Mode) -> Vec<(String, String)> {
        let mut out = vec![("mode".to_string(), mode.name().to_string())];
        let mut push = |k: &str, v: &Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v.clone()));
            }
        };
        push("out_path", &self.out);
        push("L", &self.l);
        push("j0", &self.j0);
        push("N", &self.n);
        push("r", &self.r);
        push("sigma", &self.sigma);
        push("alpha", &self.alpha);
        push("eps1", &self.eps1);
        push("eps2", &self.eps2);
        push("delta", &self.delta);
        push("M", &self.m);
        push("dt", &self.dt);
        push("t_max", &self.t_max);
        push("realizations", &self.realizations);
        push("samples", &self.samples);
        push("master_seed", &self.master_seed);
        push("w_cap", &self.w_cap);
        push("out_format", &self.out_format);
        push("initial", &self.initial);
        push("sample_every", &self.sample_every);
        push("tolerance_scale", &self.tolerance_scale);
        push("realization", &self.realization);
        for (flag, key) in [(self.strict, "strict"), (self.strict_threshold, "strict_threshold"), (self.timing, "timing")] {
            if flag {
                out.push((key.to_string(), "true".to_string()));
            }
        }
        out
    }
}

fn resolve_threads(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(k) = flag {
        return if k == 0 {
            Err(ConfigError::InvalidValue {
                key: "threads".into(),
                reason: "must be at least 1".into(),
            }
            .into())
        } else {
            Ok(k)
        };
    }
    match std::env::var("LATTICEBNF_THREADS") {
        Ok(s) => s.trim().parse::<usize>().ok().filter(|&k| k > 0).ok_or_else(|| {
            ConfigError::InvalidValue {
                key: "LATTICEBNF_THREADS".into(),
                reason: format!("expected a positive integer, got {s:?}"),
            }
            .into()
        }),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Parses the configuration for `args` and runs the subcommand on a pool of
/// the requested size.
pub fn run(mode: Mode, args: &RunArgs) -> Result<(), CliError> {
    let text = match &args.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| ConfigError::Io(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let (cfg, _) = parse_config(&text, &args.overrides(mode))?;
    let threads = resolve_threads(args.threads)?;
    log::info!("using {threads} worker threads");
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Module(e.to_string()))?;
    pool.install(|| match cfg.mode {
        Mode::Simulate => cmd_simulate(&cfg),
        Mode::NormalForm => cmd_normalform(&cfg),
        Mode::Resonance => cmd_resonance(&cfg),
        Mode::Verify => cmd_verify(&cfg),
    })
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (mode, args) = match &cli.command {
        Command::Simulate(a) => (Mode::Simulate, a),
        Command::NormalForm(a) => (Mode::NormalForm, a),
        Command::Resonance(a) => (Mode::Resonance, a),
        Command::Verify(a) => (Mode::Verify, a),
    };
    match run(mode, args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
