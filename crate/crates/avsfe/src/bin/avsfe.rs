use std::path::PathBuf;
use std::process::ExitCode;

use avsfe::config::{Overrides, RunConfig, RunMode};
use avsfe::Error;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "avsfe",
    version,
    about = "AVS-FE experiments for transient convection-diffusion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML or JSON file.
    Run {
        config: PathBuf,
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long = "rho-inf")]
        rho_inf: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Module that raised an error, for the diagnostic line.
fn provenance(e: &Error) -> &'static str {
    match e {
        Error::Solver { .. } => "assembly_solve",
        Error::Step { .. } => "genalpha",
        Error::Config(_) => "config",
        Error::Io { .. } | Error::Format(_) => "io",
        Error::Core(_) => "core",
    }
}

fn run(
    config: PathBuf,
    mode: Option<String>,
    overrides: Overrides,
) -> avsfe::Result<avsfe::run::Summary> {
    let mut cfg = RunConfig::load(&config)?;
    let mut o = overrides;
    if let Some(m) = mode {
        o.mode = Some(m.parse::<RunMode>()?);
    }
    cfg.apply(&o);
    let plan = cfg.validate()?;
    avsfe::run::execute(&plan)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(n) = std::env::var("AVSFE_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => {
                eprintln!("error [config]: AVSFE_THREADS must be a positive integer (got '{n}')");
                return ExitCode::from(1);
            }
        }
    }
    let Command::Run {
        config,
        mode,
        levels,
        theta,
        rho_inf,
        tau,
        out,
    } = cli.command;
    let overrides = Overrides {
        mode: None,
        levels,
        theta,
        rho_inf,
        tau,
        out,
    };
    match run(config, mode, overrides) {
        Ok(s) => {
            println!(
                "{} on '{}': {} dofs ({} trial + {} error representation), artifacts: {}",
                serde_json::to_string(&s.mode)
                    .unwrap_or_default()
                    .trim_matches('"'),
                s.problem,
                s.dofs,
                s.trial_dofs,
                s.test_dofs,
                s.artifacts.join(", ")
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error [{}]: {e}", provenance(&e));
            if e.is_solver() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
