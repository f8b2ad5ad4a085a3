use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::InitialState;
use crate::normal_form::Schedule;
use crate::poly::{Couplings, NormFrame, Site};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("invalid value for {key}: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("missing required field {0:?}")]
    MissingField(String),
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("cannot read config: {0}")]
    Io(String),
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        reason: reason.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    NormalForm,
    Resonance,
    Verify,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::NormalForm => "normal-form",
            Mode::Resonance => "resonance",
            Mode::Verify => "verify",
        }
    }

    fn parse(s: &str) -> Option<Mode> {
        match s {
            "simulate" => Some(Mode::Simulate),
            "normal-form" => Some(Mode::NormalForm),
            "resonance" => Some(Mode::Resonance),
            "verify" => Some(Mode::Verify),
            _ => None,
        }
    }

    /// Keys that have no default in this mode.
    fn required(self) -> &'static [&'static str] {
        match self {
            Mode::Simulate => &["eps1", "eps2", "t_max"],
            Mode::NormalForm => &["eps1", "eps2", "M"],
            Mode::Resonance => &["eps1", "eps2", "samples"],
            Mode::Verify => &[],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    Csv,
    Json,
}

/// Where a configuration value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    File,
    Flag,
    Default,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::File => "file",
            Source::Flag => "flag",
            Source::Default => "default",
        })
    }
}

/// Every key accepted in a config file or as a `--key value` flag.
pub const KEYS: &[&str] = &[
    "mode",
    "L",
    "j0",
    "N",
    "r",
    "sigma",
    "alpha",
    "eps1",
    "eps2",
    "delta",
    "M",
    "dt",
    "t_max",
    "realizations",
    "samples",
    "master_seed",
    "w_cap",
    "strict",
    "out_path",
    "out_format",
    "initial",
    "sample_every",
    "timing",
    "strict_threshold",
    "tolerance_scale",
    "realization",
];

/// Resolved run configuration. Serialized into every output file; the
/// output path is left out because it does not affect results.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(rename = "L")]
    pub l: Site,
    pub j0: Site,
    #[serde(rename = "N")]
    pub n: u32,
    pub r: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub delta: f64,
    #[serde(rename = "M")]
    pub m: u32,
    pub dt: f64,
    pub t_max: f64,
    pub realizations: u64,
    pub samples: u64,
    pub master_seed: u64,
    pub w_cap: Option<u32>,
    pub strict: bool,
    #[serde(skip)]
    pub out_path: Option<String>,
    pub out_format: OutFormat,
    pub initial: InitialState,
    pub sample_every: u64,
    pub timing: bool,
    pub strict_threshold: bool,
    pub tolerance_scale: f64,
    pub realization: u64,
}

impl RunConfig {
    pub fn epsilon(&self) -> f64 {
        self.eps1 + self.eps2
    }

    pub fn couplings(&self) -> Couplings {
        Couplings::new(self.eps1, self.eps2)
    }

    pub fn frame(&self) -> NormFrame {
        NormFrame::new(self.j0, self.n, self.r, self.sigma, self.alpha, self.epsilon())
            .expect("validated at parse time")
    }
}

/// Parses a flat `key = value` file (with `#` comments) and applies the
/// overrides on top. Every field is logged with its source.
pub fn parse_config(text: &str, overrides: &[(String, String)]) -> Result<(RunConfig, BTreeMap<String, Source>), ConfigError> {
    let mut raw: BTreeMap<String, (String, Source)> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: line.to_string(),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(ConfigError::UnknownKey(k.to_string()));
        }
        if raw.insert(k.to_string(), (v.to_string(), Source::File)).is_some() {
            return Err(invalid(k, "set more than once in the file"));
        }
    }
    for (k, v) in overrides {
        if !KEYS.contains(&k.as_str()) {
            return Err(ConfigError::UnknownKey(k.clone()));
        }
        raw.insert(k.clone(), (v.clone(), Source::Flag));
    }

    let mut sources = BTreeMap::new();
    let mode_text = raw
        .get("mode")
        .map(|(v, _)| v.clone())
        .ok_or_else(|| ConfigError::MissingField("mode".into()))?;
    let mode = Mode::parse(&mode_text).ok_or_else(|| invalid("mode", format!("unknown mode {mode_text:?}")))?;
    for key in mode.required() {
        if !raw.contains_key(*key) {
            return Err(ConfigError::MissingField(key.to_string()));
        }
    }

    let mut r = Resolver {
        raw: &raw,
        sources: &mut sources,
    };
    r.sources.insert("mode".into(), raw["mode"].1);
    let l_default = if mode == Mode::NormalForm { 6 } else { 64 };
    let l: Site = r.get("L", l_default)?;
    let j0: Site = r.get("j0", 0)?;
    let n: u32 = r.get("N", 16)?;
    let rr: f64 = r.get("r", 3.0)?;
    let sigma: f64 = r.get("sigma", rr / (2.0 * n.max(1) as f64))?;
    let alpha: f64 = r.get("alpha", 0.009)?;
    let eps1: f64 = r.get("eps1", 5e-4)?;
    let eps2: f64 = r.get("eps2", 5e-4)?;
    let delta: f64 = r.get("delta", 0.01)?;
    let dt: f64 = r.get("dt", 1e-2)?;
    let t_max: f64 = r.get("t_max", 1e3)?;
    let realizations: u64 = r.get("realizations", 64)?;
    let samples: u64 = r.get("samples", 10_000)?;
    let master_seed: u64 = r.get("master_seed", 2024)?;
    let w_cap: Option<u32> = r.get_opt("w_cap")?;
    let strict = r.get_bool("strict", false)?;
    let out_path: Option<String> = r.get_opt("out_path")?;
    let out_format = match r.get_str("out_format", "json").as_str() {
        "json" => OutFormat::Json,
        "csv" => OutFormat::Csv,
        other => return Err(invalid("out_format", format!("expected csv or json, got {other:?}"))),
    };
    let initial: InitialState = r.get_str("initial", "uniform").parse().map_err(|e: String| invalid("initial", e))?;
    let sample_every: u64 = r.get("sample_every", ((1.0 / dt).round() as u64).max(1))?;
    let timing = r.get_bool("timing", false)?;
    let strict_threshold = r.get_bool("strict_threshold", false)?;
    let tolerance_scale: f64 = r.get("tolerance_scale", 1.0)?;
    let realization: u64 = r.get("realization", 0)?;

    for (key, value) in [("eps1", eps1), ("eps2", eps2)] {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(invalid(key, "must be a finite non-negative number"));
        }
    }
    if n == 0 {
        return Err(invalid("N", "must be at least 1"));
    }
    if !(rr > 2.0 && rr.is_finite()) {
        return Err(invalid("r", "must exceed 2"));
    }
    if !(sigma > 0.0 && sigma < rr / 2.0) {
        return Err(invalid("sigma", "must lie in (0, r/2)"));
    }
    if !(alpha > 0.0 && alpha < 0.01) {
        return Err(invalid("alpha", "must lie in (0, 1/100)"));
    }
    let positive = [("dt", dt), ("t_max", t_max), ("delta", delta), ("tolerance_scale", tolerance_scale)];
    for (key, value) in positive {
        if !(value > 0.0 && value.is_finite()) {
            return Err(invalid(key, "must be positive"));
        }
    }
    if l <= 0 {
        return Err(invalid("L", "must be positive"));
    }
    for (key, value) in [("realizations", realizations), ("samples", samples), ("sample_every", sample_every)] {
        if value == 0 {
            return Err(invalid(key, "must be at least 1"));
        }
    }
    if mode == Mode::Simulate && j0.unsigned_abs() as i64 + n as i64 >= l as i64 {
        return Err(invalid("L", format!("window half-width {l} must exceed j0 + N = {}", j0.abs() + n as Site)));
    }
    let frame = NormFrame::new(j0, n, rr, sigma, alpha, eps1 + eps2).map_err(|e| invalid("N", e.to_string()))?;
    let schedule = Schedule::new(&frame);
    let m: u32 = r.get("M", 3.min(schedule.m_max))?;
    if matches!(mode, Mode::NormalForm | Mode::Resonance | Mode::Verify) && m > schedule.m_max {
        return Err(invalid("M", format!("{m} exceeds the schedule limit {}", schedule.m_max)));
    }
    if mode == Mode::Simulate && out_format == OutFormat::Csv && out_path.is_none() {
        return Err(invalid("out_format", "csv trajectories need out_path"));
    }
    if mode != Mode::Simulate && out_format == OutFormat::Csv {
        return Err(invalid("out_format", format!("{} writes json only", mode.name())));
    }

    for (k, s) in &sources {
        log::info!("config {k} from {s}");
    }
    let cfg = RunConfig {
        mode,
        l,
        j0,
        n,
        r: rr,
        sigma,
        alpha,
        eps1,
        eps2,
        delta,
        m,
        dt,
        t_max,
        realizations,
        samples,
        master_seed,
        w_cap,
        strict,
        out_path,
        out_format,
        initial,
        sample_every,
        timing,
        strict_threshold,
        tolerance_scale,
        realization,
    };
    log::info!("resolved config: {}", serde_json::to_string(&cfg).unwrap_or_default());
    Ok((cfg, sources))
}

struct Resolver<'a> {
    raw: &'a BTreeMap<String, (String, Source)>,
    sources: &'a mut BTreeMap<String, Source>,
}

impl Resolver<'_> {
    fn get<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get_opt(key)?.unwrap_or(default))
    }

    fn get_opt<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.raw.get(key) {
            Some((v, src)) => {
                self.sources.insert(key.into(), *src);
                v.parse().map(Some).map_err(|e| invalid(key, format!("{v:?}: {e}")))
            }
            None => {
                self.sources.insert(key.into(), Source::Default);
                Ok(None)
            }
        }
    }

    fn get_str(&mut self, key: &str, default: &str) -> String {
        match self.raw.get(key) {
            Some((v, src)) => {
                self.sources.insert(key.into(), *src);
                v.clone()
            }
            None => {
                self.sources.insert(key.into(), Source::Default);
                default.to_string()
            }
        }
    }

    fn get_bool(&mut self, key: &str, default: bool) -> Result<bool, ConfigError> {
        let v = self.get_str(key, if default { "true" } else { "false" });
        match v.as_str() {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            _ => Err(invalid(key, format!("expected a boolean, got {v:?}"))),
        }
    }
}
