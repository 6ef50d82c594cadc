//! iho: run laboratory pipelines for the inverted harmonic oscillator from
//! declarative specs.
//!
//! Every subcommand reads one TOML spec (all fields defaulted, all
//! overridable by flags), writes deterministic data files plus a run
//! manifest into its output directory, and reports problems on stderr.
//! Exit codes: 0 success, 1 validation or runtime failure (the diagnostic
//! names the offending field), 2 a verification check failed.

mod config;
mod run;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{apply_overrides, load, parse_grid_flag, ExperimentSpec, Overrides};

#[derive(Parser)]
#[command(
    name = "iho",
    version,
    about = "Inverted-harmonic-oscillator laboratory",
    after_help = "IHO_OUTPUT_ROOT sets the default output root when --output \
                  and run.output are absent."
)]
struct Cli {
    /// Experiment spec (TOML); built-in defaults when absent.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory (overrides run.output and IHO_OUTPUT_ROOT).
    #[arg(long, short = 'o', global = true, value_name = "DIR")]
    output: Option<String>,

    /// Override run.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override tolerances.tail and tolerances.mass_fraction.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Override truncation.order.
    #[arg(long, global = true)]
    order: Option<usize>,

    /// Override the shared axis as LO:HI:N.
    #[arg(long, global = true, value_name = "LO:HI:N")]
    grid: Option<String>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Classical trajectories of the hyperbolic flow in (v, u) and (q, p)
    Classical,
    /// Map a sampled packet between the q, v, u representations
    Transform,
    /// Tower coefficients of the plus packet, decaying and growing
    Coeffs,
    /// Survival-amplitude series with fitted log-slope metadata
    Survival,
    /// Exact scaling evolution of a sampled state over the time grid
    Evolve,
    /// Phase-space density transport, coefficients, Monte-Carlo check
    Liouville,
    /// Wigner field with marginals, mirror and transport residuals
    Wigner,
    /// Full verification suite; exit 2 when any check fails
    Verify,
}

impl Cmd {
    fn name(self) -> &'static str {
        match self {
            Cmd::Classical => "classical",
            Cmd::Transform => "transform",
            Cmd::Coeffs => "coeffs",
            Cmd::Survival => "survival",
            Cmd::Evolve => "evolve",
            Cmd::Liouville => "liouville",
            Cmd::Wigner => "wigner",
            Cmd::Verify => "verify",
        }
    }
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Bad flags are validation failures (1); --help/--version are not.
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut spec = match load(cli.config.as_deref()) {
        Ok(spec) => spec,
        Err(msg) => return validation_failure(&msg),
    };
    let grid = match cli.grid.as_deref().map(parse_grid_flag).transpose() {
        Ok(grid) => grid,
        Err(msg) => return validation_failure(&msg),
    };
    apply_overrides(
        &mut spec,
        &Overrides {
            seed: cli.seed,
            tol: cli.tol,
            order: cli.order,
            grid,
            output: cli.output,
        },
    );
    let name = cli.command.name();
    if let Err(msg) = spec.validate_for(name) {
        return validation_failure(&msg);
    }
    let dir = out_dir(&spec, name);
    if let Err(e) = std::fs::create_dir_all(&dir) {
        return validation_failure(&format!("output directory {}: {e}", dir.display()));
    }
    let outcome = match cli.command {
        Cmd::Classical => run::classical(&spec, &dir),
        Cmd::Transform => run::transform(&spec, &dir),
        Cmd::Coeffs => run::coeffs(&spec, &dir),
        Cmd::Survival => run::survival(&spec, &dir),
        Cmd::Evolve => run::evolve(&spec, &dir),
        Cmd::Liouville => run::liouville(&spec, &dir),
        Cmd::Wigner => run::wigner_cmd(&spec, &dir),
        Cmd::Verify => {
            return match run::verify_cmd(&spec, &dir) {
                Ok(true) => 0,
                Ok(false) => 2,
                Err(msg) => validation_failure(&msg),
            }
        }
    };
    match outcome {
        Ok(()) => {
            eprintln!("{name}: outputs in {}", dir.display());
            0
        }
        Err(msg) => validation_failure(&msg),
    }
}

fn validation_failure(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    1
}

fn out_dir(spec: &ExperimentSpec, command: &str) -> PathBuf {
    if let Some(out) = &spec.run.output {
        return PathBuf::from(out);
    }
    if let Ok(root) = std::env::var("IHO_OUTPUT_ROOT") {
        if !root.is_empty() {
            return PathBuf::from(root).join(command);
        }
    }
    PathBuf::from("runs").join(command)
}
