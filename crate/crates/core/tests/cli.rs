use std::cmp::Ordering;
use std::path::Path;

use latticebnf::cli::verify::{run_suites, suite_bracket_antisymmetry, suite_bracket_oracle, VerifyOptions};
use latticebnf::cli::{main_with_args, parse_config, ConfigError, Mode, Source};
use latticebnf::poly::{poisson_bracket, HamPoly};

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("latticebnf").chain(args.iter().copied()))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Orders its arguments before bracketing, so `{H,G}` and `{G,H}` come out
/// identical instead of opposite.
fn sorted_bracket(h: &HamPoly, g: &HamPoly) -> HamPoly {
    if h.canonical_cmp(g) == Ordering::Less {
        poisson_bracket(h, g)
    } else {
        poisson_bracket(g, h)
    }
}

#[test]
fn config_file_with_comments_and_flags() {
    let text = "\
# ensemble run
mode = simulate
eps1 = 1e-3   # hopping
eps2 = 2e-3
t_max = 50
L = 40
j0 = 5
N = 8
";
    let overrides = vec![("L".to_string(), "48".to_string())];
    let (cfg, sources) = parse_config(text, &overrides).unwrap();
    assert_eq!(cfg.mode, Mode::Simulate);
    assert_eq!((cfg.eps1, cfg.eps2, cfg.t_max), (1e-3, 2e-3, 50.0));
    assert_eq!(cfg.l, 48);
    assert_eq!(sources["L"], Source::Flag);
    assert_eq!(sources["j0"], Source::File);
    assert_eq!(sources["dt"], Source::Default);
    assert_eq!(cfg.epsilon(), 3e-3);
}

#[test]
fn config_errors() {
    let base = "mode = normal-form\neps1 = 1e-3\neps2 = 1e-3\n";
    assert!(matches!(parse_config(&format!("{base}M = 2\nbogus = 1\n"), &[]), Err(ConfigError::UnknownKey(k)) if k == "bogus"));
    assert!(matches!(parse_config(base, &[]), Err(ConfigError::MissingField(k)) if k == "M"));
    assert!(matches!(parse_config(&format!("{base}M 2\n"), &[]), Err(ConfigError::Syntax { line: 4, .. })));
    assert!(matches!(parse_config(&format!("{base}M = two\n"), &[]), Err(ConfigError::InvalidValue { .. })));
    assert!(matches!(parse_config(&format!("{base}M = 9\n"), &[]), Err(ConfigError::InvalidValue { .. })));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "eps1 = 1e-3\neps2 = 1e-3\nM = 1\n").unwrap();
    let out = dir.path().join("nf.jsonl");
    assert_eq!(run(&["normal-form", "--config", path(&cfg), "--out", path(&out)]), 0);
    assert!(std::fs::read_to_string(&out).unwrap().lines().count() >= 2);

    assert_eq!(run(&["simulate", "--eps1", "1e-3"]), 2);
    assert_eq!(run(&["simulate", "--eps1", "x", "--eps2", "0", "--t-max", "1"]), 2);
    assert_eq!(run(&["simulate", "--eps1", "0", "--eps2", "0", "--t-max", "1", "--L", "10", "--j0", "5"]), 2);
    assert_eq!(run(&["normal-form", "--config", path(&dir.path().join("missing.cfg"))]), 2);
    assert_eq!(run(&["frobnicate"]), 2);

    let nowhere = dir.path().join("no-such-dir").join("out.json");
    assert_eq!(run(&["normal-form", "--eps1", "1e-3", "--eps2", "1e-3", "--M", "1", "--out", path(&nowhere)]), 3);

    // the bracket oracle never reaches a relative error of 1e-18
    assert_eq!(run(&["verify", "--tolerance-scale", "1e-12", "--out", path(&dir.path().join("v.json"))]), 4);
}

#[test]
fn simulate_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for attempt in 0..2 {
        let base = dir.path().join(format!("sim{attempt}"));
        let args = [
            "simulate", "--eps1", "0", "--eps2", "0", "--t-max", "5", "--realizations", "2", "--L", "24", "--j0", "4",
            "--N", "6", "--out-format", "csv", "--threads", "2", "--out", path(&base),
        ];
        assert_eq!(run(&args), 0);
        let csv = std::fs::read_to_string(format!("{}.realization-1.csv", base.display())).unwrap();
        outputs.push((std::fs::read(&base).unwrap(), csv));
    }
    assert_eq!(outputs[0], outputs[1]);
    let csv = &outputs[0].1;
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# format_version=1"));
    assert!(lines.next().unwrap().starts_with("# config={\"mode\":\"simulate\""));
    assert_eq!(lines.next(), Some("t,tail_mass,wavefront,l2_drift,energy_drift"));
    // without coupling nothing leaves the initial block
    for row in lines {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!((cols[1], cols[2]), ("0", "0"), "{row}");
    }
}

#[test]
fn outputs_embed_config_and_version() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res.json");
    let args = ["resonance", "--eps1", "5e-4", "--eps2", "5e-4", "--samples", "8", "--out", path(&out)];
    assert_eq!(run(&args), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["format_version"], 1);
    assert_eq!(v["config"]["samples"], 8);
    assert_eq!(v["config"]["mode"], "resonance");
    assert!(v["config"].get("out_path").is_none());
    assert_eq!(v["report"]["samples"], 8);
}

#[test]
fn sorted_bracket_is_caught() {
    let opts = VerifyOptions {
        bracket: sorted_bracket,
        ..VerifyOptions::desk(7)
    };
    let anti = suite_bracket_antisymmetry(&opts);
    assert!(!anti.passed, "{}", anti.detail);
    assert!(anti.metric > 0.0);
    assert!(run_suites(&opts).iter().any(|r| !r.passed));
    assert!(suite_bracket_antisymmetry(&VerifyOptions::desk(7)).passed);
}

#[test]
fn tolerance_scale_scales_oracle_tolerance() {
    let base = VerifyOptions::desk(11);
    let loose = VerifyOptions {
        tolerance_scale: 10.0,
        ..base.clone()
    };
    let a = suite_bracket_oracle(&base);
    let b = suite_bracket_oracle(&loose);
    assert_eq!(a.metric, b.metric);
    assert_eq!(b.tolerance, 10.0 * a.tolerance);

    let tight = VerifyOptions {
        tolerance_scale: 1e-12,
        ..base
    };
    assert!(!suite_bracket_oracle(&tight).passed);
}
