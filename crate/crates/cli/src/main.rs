//! `vortex`: run point-vortex configurations, shipped scenarios and sweeps.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use vortex_core::io::{self, RunError, RunOverrides};
use vortex_core::{ExitStatus, RunReport};

#[derive(Debug, Parser)]
#[command(name = "vortex", version, about = "Point-vortex dynamics with collapse diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configuration in a TOML file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// List or run the shipped scenarios.
    Scenarios {
        #[command(subcommand)]
        command: ScenarioCommand,
    },
    /// Run every config matching a glob pattern in parallel.
    Sweep {
        pattern: String,
        #[command(flatten)]
        flags: RunFlags,
    },
}

#[derive(Debug, Subcommand)]
enum ScenarioCommand {
    List,
    Run {
        name: String,
        #[command(flatten)]
        flags: RunFlags,
    },
}

#[derive(Debug, Args)]
struct RunFlags {
    /// Output directory; for sweeps, the root of the per-run directories.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Sampling interval of the recorded trajectory.
    #[arg(long)]
    stride: Option<f64>,
    /// Seed of the randomized fits in the diagnostics.
    #[arg(long)]
    seed: Option<u64>,
    /// Exit nonzero when a certificate margin is violated.
    #[arg(long)]
    strict: bool,
}

impl RunFlags {
    fn overrides(&self) -> RunOverrides {
        RunOverrides {
            out_dir: self.out_dir.clone(),
            stride: self.stride,
            seed: self.seed,
        }
    }
}

fn summary(report: &RunReport) -> String {
    let m = &report.metadata;
    let mut line = format!(
        "{}: {} at t = {} ({} samples, {} steps)",
        m.name.as_deref().unwrap_or(m.domain),
        m.termination.kind,
        m.termination.t,
        m.samples,
        m.stats.accepted
    );
    if let (Some(i), Some(j)) = (m.termination.i, m.termination.j) {
        line += &format!(", vortices {i} and {j}");
    } else if let Some(i) = m.termination.i {
        line += &format!(", vortex {i}");
    }
    if let Some(t_hat) = m.t_hat {
        line += &format!(", extrapolated T = {t_hat}");
    }
    if let Some(c) = &m.certificate {
        if let Some(margin) = c.min_margin {
            line += &format!(", certificate margin {margin:e}");
        }
    }
    if let Some(v) = &report.verdict {
        let verdict = match (v.no_oracle, v.passed) {
            (true, _) => "no oracle",
            (false, true) => "pass",
            (false, false) => "FAIL",
        };
        line += &format!(", verdict {verdict}");
    }
    line + &format!(" -> {}", report.metadata_path.parent().unwrap_or(&report.metadata_path).display())
}

fn finish(result: Result<RunReport, RunError>, strict: bool) -> ExitStatus {
    match result {
        Ok(report) => {
            println!("{}", summary(&report));
            if let Some(v) = report.verdict.as_ref().filter(|v| !v.passed) {
                for c in v.checks.iter().filter(|c| !c.passed) {
                    eprintln!("  failed {}: measured {}, expected {} ± {}", c.name, c.measured, c.expected, c.tolerance);
                }
            }
            report.exit_status(strict)
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_status()
        }
    }
}

fn sweep(pattern: &str, flags: &RunFlags) -> anyhow::Result<ExitStatus> {
    let mut paths = glob::glob(pattern)
        .with_context(|| format!("invalid glob pattern '{pattern}'"))?
        .collect::<Result<Vec<_>, _>>()
        .context("reading sweep matches")?;
    paths.sort();
    anyhow::ensure!(!paths.is_empty(), "no config matches '{pattern}'");
    let root = flags.out_dir.clone().unwrap_or_else(|| PathBuf::from("out/sweep"));
    let mut status = ExitStatus::Completed;
    for (path, result) in io::sweep(&paths, &root, &flags.overrides()) {
        print!("{}: ", path.display());
        let s = finish(result, flags.strict);
        if status == ExitStatus::Completed {
            status = s;
        }
    }
    Ok(status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match &cli.command {
        Command::Run { config, flags } => finish(io::run_path(config, &flags.overrides()), flags.strict),
        Command::Scenarios {
            command: ScenarioCommand::List,
        } => {
            for (name, description, has_oracle) in io::list_scenarios() {
                let tag = if has_oracle { "" } else { " [no oracle]" };
                println!("{name:<24} {description}{tag}");
            }
            ExitStatus::Completed
        }
        Command::Scenarios {
            command: ScenarioCommand::Run { name, flags },
        } => finish(io::run_scenario_by_name(name, &flags.overrides()), flags.strict),
        Command::Sweep { pattern, flags } => sweep(pattern, flags).unwrap_or_else(|e| {
            eprintln!("error: {e:#}");
            ExitStatus::ConfigError
        }),
    };
    ExitCode::from(status.code() as u8)
}
