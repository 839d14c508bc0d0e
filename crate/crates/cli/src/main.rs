use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use holohje::pipeline::{to_json_string, Pipeline, PipelineConfig};
use holohje::ring::Precision;
use holohje::Error;

#[derive(Parser)]
#[command(name = "holohje", version, about = "Hamilton-Jacobi solver for holonomic Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Annihilating ideal and canonical Pfaffian system of h.
    Annihilate(Common),
    /// Exact integrability check and symplectic data B_x, B_p, Omega.
    Pfaffian(Common),
    /// The finite index set Gamma with coefficient matrices T_i and E.
    Gamma(Common),
    /// Boundary vectors satisfying the finite conditions and projectivity.
    Solve(Common),
    /// Numeric checks: Poisson brackets, conservation, HJE residual, v.
    Verify(Common),
    /// All stages in order.
    RunAll(Common),
}

#[derive(Args)]
struct Common {
    /// TOML pipeline configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for the JSON and CSV artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the configured RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Recompute even when an up-to-date artifact exists.
    #[arg(long)]
    force: bool,
    /// Overrides the configured working precision.
    #[arg(long, value_enum)]
    precision: Option<PrecisionArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    Double,
    Extended,
}

const EXIT_INPUT: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_NO_SOLUTION: u8 = 4;
const EXIT_VERIFICATION: u8 = 5;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ResourceLimit(_) | Error::StepLimitExceeded(_) => EXIT_RESOURCE,
        Error::NoSolution(_) => EXIT_NO_SOLUTION,
        Error::SingularPathCrossing { .. } | Error::JacobianSingular(_) | Error::NewtonDivergence(_) => {
            EXIT_VERIFICATION
        }
        _ => EXIT_INPUT,
    }
}

fn write_error(out: &Path, stage: &str, kind: &str, message: &str, extra: serde_json::Value) {
    let mut v = serde_json::json!({ "error": kind, "message": message, "stage": stage });
    if let (Some(obj), serde_json::Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    let _ = fs::create_dir_all(out);
    if let Ok(text) = to_json_string(&v) {
        let _ = fs::write(out.join("error.json"), text);
    }
}

fn load(c: &Common) -> Result<Pipeline, Error> {
    let text = fs::read_to_string(&c.config).map_err(|e| Error::Invalid(format!("{}: {e}", c.config.display())))?;
    let mut config = PipelineConfig::from_toml(&text)?;
    if let Some(seed) = c.seed {
        config.seed = seed;
    }
    if let Some(p) = c.precision {
        config.precision = match p {
            PrecisionArg::Double => Precision::Double,
            PrecisionArg::Extended => Precision::Extended,
        };
    }
    Pipeline::new(config, &c.out, c.force)
}

fn status(reused: bool) -> &'static str {
    if reused {
        " (up to date)"
    } else {
        ""
    }
}

fn run(stage: &str, c: &Common) -> Result<(), (Error, Option<serde_json::Value>)> {
    let p = load(c).map_err(|e| (e, None))?;
    let fail = |e: Error| (e, None);
    match stage {
        "annihilate" => {
            let s = p.annihilate().map_err(fail)?;
            println!("annihilate: d = {} -> {}{}", s.body().d, s.path.display(), status(s.reused));
        }
        "pfaffian" => {
            let s = p.pfaffian().map_err(fail)?;
            println!(
                "pfaffian: integrable, singular locus {} -> {}{}",
                s.body().system.singular_locus,
                s.path.display(),
                status(s.reused)
            );
        }
        "gamma" => {
            let s = p.gamma().map_err(fail)?;
            println!("gamma: t = {} -> {}{}", s.body().t, s.path.display(), status(s.reused));
        }
        "solve" => {
            let s = p.solve().map_err(fail)?;
            let b = s.body();
            println!(
                "solve: {} vectors from {}, det = {:.6e} -> {}{}",
                b.chosen.len(),
                b.chosen_source,
                b.projectivity.det,
                s.path.display(),
                status(s.reused)
            );
        }
        _ => {
            let s = if stage == "verify" { p.verify() } else { p.run_all() }.map_err(fail)?;
            let b = s.body();
            for m in &b.metrics {
                let value = m.value.map_or("n/a".to_string(), |v| format!("{v:.3e}"));
                let verdict = if m.passed {
                    "ok"
                } else if m.required {
                    "FAIL"
                } else if m.value.is_some() {
                    "info"
                } else {
                    "skip"
                };
                println!("  {:<28} {:>10}  (tol {:.1e})  {verdict}", m.name, value, m.tolerance);
            }
            println!("verify: {} -> {}", if b.passed { "passed" } else { "failed" }, s.path.display());
            if !b.passed {
                let failing: Vec<&str> = b.failing().iter().map(|m| m.name.as_str()).collect();
                let msg = format!("verification failed: {}", failing.join(", "));
                return Err((Error::Invalid(msg), Some(serde_json::json!({ "failing": failing }))));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (stage, common) = match &cli.command {
        Command::Annihilate(c) => ("annihilate", c),
        Command::Pfaffian(c) => ("pfaffian", c),
        Command::Gamma(c) => ("gamma", c),
        Command::Solve(c) => ("solve", c),
        Command::Verify(c) => ("verify", c),
        Command::RunAll(c) => ("run-all", c),
    };
    match run(stage, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err((e, Some(extra))) => {
            eprintln!("error: {e}");
            write_error(&common.out, stage, "VerificationFailure", &e.to_string(), extra);
            ExitCode::from(EXIT_VERIFICATION)
        }
        Err((e, None)) => {
            eprintln!("error: {e}");
            let extra = match &e {
                Error::Syntax { pos, .. } => serde_json::json!({ "position": pos }),
                _ => serde_json::json!({}),
            };
            write_error(&common.out, stage, e.kind(), &e.to_string(), extra);
            ExitCode::from(exit_code(&e))
        }
    }
}
