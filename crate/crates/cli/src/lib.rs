//! Command-line driver: loads a scenario, runs one subcommand and writes its
//! artifacts plus a `manifest.json` tying every file to the config hash.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid configuration, 3 numeric
//! failure or a violated invariant.

pub mod commands;
pub mod output;
pub mod suite;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ruelle_core::function_space::PROBE_GENERATOR;
use ruelle_core::{Error, Expr, Scenario};

use commands::{Context, Outcome};
use output::{sha256_hex, Artifact};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ruelle", version, about = "Transfer operators on discretized shift spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Apply the operator to the scenario function and write the image table.
    Apply,
    /// Measured norms of the image against the a-priori bounds.
    Bounds,
    /// Series truncation errors, term bounds and remainder decay.
    TaylorCheck,
    /// Finite-difference check of the first two derivatives.
    DerivativeCheck,
    /// Leading eigenvalue and pressure by power iteration.
    Pressure,
    /// Sections, sectional triviality and admissible counts.
    Sections,
    /// Hölder norms of the scenario functions.
    Norms,
    /// Full invariant battery; exits 3 on any violation.
    Suite,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Apply => "apply",
            Command::Bounds => "bounds",
            Command::TaylorCheck => "taylor-check",
            Command::DerivativeCheck => "derivative-check",
            Command::Pressure => "pressure",
            Command::Sections => "sections",
            Command::Norms => "norms",
            Command::Suite => "suite",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Scenario file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Highest series order.
    #[arg(long, global = true, value_name = "N")]
    pub order: Option<usize>,
    /// Largest finite-difference step.
    #[arg(long, global = true, value_name = "H")]
    pub step: Option<f64>,
    /// Power-iteration residual tolerance.
    #[arg(long, global = true, value_name = "T")]
    pub tol: Option<f64>,
    /// Power-iteration limit.
    #[arg(long = "max-iter", global = true, value_name = "K")]
    pub max_iter: Option<usize>,
    /// Seed for random probes.
    #[arg(long, global = true, value_name = "S")]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, value_name = "P")]
    pub threads: Option<usize>,
    /// Direction expression replacing the scenario's.
    #[arg(long = "direction-expr", global = true, value_name = "EXPR")]
    pub direction_expr: Option<String>,
    /// Radius for the sectional-triviality check.
    #[arg(long, global = true, value_name = "R")]
    pub radius: Option<f64>,
    /// Number of random probes.
    #[arg(long, global = true, value_name = "N")]
    pub probes: Option<usize>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Csv(c) if c.is_io_error() => EXIT_IO,
        e if e.is_config() => EXIT_CONFIG,
        Error::InvalidArgument(_) | Error::ExpOverflow { .. } | Error::Csv(_) => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

fn flag_error(flag: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: flag.to_string(),
        line: None,
        message: message.into(),
    }
}

/// Applies command-line overrides to a loaded scenario.
pub fn apply_overrides(sc: &mut Scenario, o: &Options) -> Result<(), Error> {
    let positive = |flag: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(flag_error(flag, format!("must be a positive finite number, got {v}")))
        }
    };
    let positive_int = |flag: &str, v: usize| if v > 0 { Ok(v) } else { Err(flag_error(flag, "must be at least 1")) };
    if let Some(v) = o.order {
        sc.params.order = positive_int("--order", v)?;
    }
    if let Some(v) = o.max_iter {
        sc.params.max_iter = positive_int("--max-iter", v)?;
    }
    if let Some(v) = o.probes {
        sc.params.probes = positive_int("--probes", v)?;
    }
    if let Some(v) = o.step {
        sc.params.step = positive("--step", v)?;
    }
    if let Some(v) = o.tol {
        sc.params.tol = positive("--tol", v)?;
    }
    if let Some(v) = o.radius {
        sc.params.radius = Some(positive("--radius", v)?);
    }
    if let Some(v) = o.seed {
        sc.seed = v;
    }
    if let Some(text) = &o.direction_expr {
        let expr = Expr::parse(text).map_err(|e| flag_error("--direction-expr", e.to_string()))?;
        if expr.depth() >= sc.metric.depth {
            return Err(flag_error(
                "--direction-expr",
                format!("reads {} coordinates but metric.depth is {}", expr.depth(), sc.metric.depth),
            ));
        }
        sc.direction = expr.to_function(&sc.space, 0)?;
        sc.direction_source = ruelle_core::scenario::FunctionSource::Expr {
            text: text.clone(),
            depth: None,
        };
    }
    Ok(())
}

pub fn dispatch(command: Command, ctx: &Context) -> Result<Outcome, Error> {
    match command {
        Command::Apply => commands::apply(ctx),
        Command::Bounds => commands::bounds(ctx),
        Command::TaylorCheck => commands::taylor_check(ctx),
        Command::DerivativeCheck => commands::derivative_check(ctx),
        Command::Pressure => commands::pressure(ctx),
        Command::Sections => commands::sections(ctx),
        Command::Norms => commands::norms(ctx),
        Command::Suite => commands::suite(ctx),
    }
}

fn write_outputs(dir: &Path, artifacts: &[Artifact], manifest: serde_json::Value) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for a in artifacts {
        std::fs::write(dir.join(&a.name), &a.bytes)?;
    }
    std::fs::write(dir.join("manifest.json"), output::json_bytes(&manifest))
}

/// Runs the CLI and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let started = Instant::now();
    let o = &cli.options;
    if let Some(p) = o.threads {
        if p == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_CONFIG;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(p).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return EXIT_IO;
        }
    }
    let Some(config) = &o.config else {
        eprintln!("error: --config PATH is required");
        return EXIT_CONFIG;
    };
    let bytes = match std::fs::read(config) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return EXIT_IO;
        }
    };
    let config_hash = sha256_hex(&bytes);
    let text = match String::from_utf8(bytes) {
        Ok(t) => t,
        Err(_) => {
            eprintln!("error: {} is not valid UTF-8", config.display());
            return EXIT_CONFIG;
        }
    };
    let base = config.parent().unwrap_or(Path::new("."));
    let mut scenario = match Scenario::parse(&text, base) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", config.display());
            return exit_code(&e);
        }
    };
    if let Err(e) = apply_overrides(&mut scenario, o) {
        eprintln!("error: {e}");
        return exit_code(&e);
    }

    let ctx = Context {
        scenario: &scenario,
        config_hash: &config_hash,
    };
    let (artifacts, code, error) = match dispatch(cli.command, &ctx) {
        Ok(out) => {
            for line in &out.summary {
                println!("{line}");
            }
            let code = if out.passed { EXIT_OK } else { EXIT_NUMERIC };
            (out.artifacts, code, None)
        }
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error: {e}");
            if code != EXIT_NUMERIC {
                return code;
            }
            let report = json!({
                "config_sha256": config_hash,
                "command": cli.command.name(),
                "error": e.to_string(),
            });
            (vec![Artifact::json("error.json", &report)], code, Some(e.to_string()))
        }
    };

    let outputs: Vec<_> = artifacts
        .iter()
        .map(|a| json!({"file": a.name, "sha256": sha256_hex(&a.bytes), "bytes": a.bytes.len()}))
        .collect();
    let manifest = json!({
        "tool": "ruelle",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": ruelle_core::VERSION,
        "command": cli.command.name(),
        "config": config.display().to_string(),
        "config_sha256": config_hash,
        "seed": scenario.seed,
        "probe_generator": PROBE_GENERATOR,
        "threads": rayon::current_num_threads(),
        "exit_code": code,
        "error": error,
        "wall_time_seconds": started.elapsed().as_secs_f64(),
        "outputs": outputs,
    });
    if let Err(e) = write_outputs(&o.out, &artifacts, manifest) {
        eprintln!("error: cannot write to {}: {e}", o.out.display());
        return EXIT_IO;
    }
    code
}
