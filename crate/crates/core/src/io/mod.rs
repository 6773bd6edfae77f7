//! Run configuration, orchestration and persistence.

mod config;
mod output;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::diagnostics::{Analysis, DiagnosticsError};
use crate::dynamics::{DynamicsError, Termination, TrajectoryRecord};
use crate::scenarios::{self, find_scenario, Oracle, ScenarioError, Verdict};

pub use config::{parse_config, serialize_config, ConfigError, DomainName, DomainSpec, OutputSpec, RunConfig, VortexSpec};
pub use output::{
    diagnostics_csv, format_f64, trajectory_csv, AppendixARecord, AppendixBRecord, CertificateRecord,
    DivergenceRecord, Metadata, PartitionRecord, TerminationRecord, DIAGNOSTICS_COLUMNS,
};

/// Margin slack below which a certificate counts as violated.
pub const CERTIFICATE_SLACK: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

impl RunError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        RunError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_status(&self) -> ExitStatus {
        match self {
            RunError::Config(_) | RunError::Scenario(ScenarioError::Unknown { .. }) => ExitStatus::ConfigError,
            RunError::Io { .. } | RunError::Csv(_) | RunError::Json(_) => ExitStatus::IoError,
            _ => ExitStatus::RunFailed,
        }
    }
}

/// Process exit statuses of the command-line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    /// Reached `t_end`, or a scenario whose oracle passed.
    Completed = 0,
    ConfigError = 2,
    IoError = 3,
    /// `--strict` and an applicable certificate with a margin below the slack.
    CertificateViolation = 4,
    /// Integration or diagnostics raised an error.
    RunFailed = 5,
    ScenarioFailed = 6,
    PairCollapse = 10,
    BoundaryCollapse = 11,
    StepUnderflow = 12,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn for_termination(termination: &Termination) -> Self {
        match termination {
            Termination::ReachedTEnd { .. } => ExitStatus::Completed,
            Termination::PairCollapse { .. } => ExitStatus::PairCollapse,
            Termination::BoundaryCollapse { .. } => ExitStatus::BoundaryCollapse,
            Termination::StepUnderflow { .. } => ExitStatus::StepUnderflow,
        }
    }
}

/// Command-line adjustments applied on top of a config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOverrides {
    pub out_dir: Option<PathBuf>,
    pub stride: Option<f64>,
    pub seed: Option<u64>,
}

impl RunOverrides {
    pub fn apply(&self, config: &mut RunConfig) {
        if let Some(dir) = &self.out_dir {
            config.output.dir = dir.clone();
        }
        if let Some(stride) = self.stride {
            config.integrator.sample_stride = stride;
        }
        if let Some(seed) = self.seed {
            config.diagnostics.seed = seed;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub trajectory: TrajectoryRecord,
    pub analysis: Analysis,
    /// Present when the config carries an oracle.
    pub verdict: Option<Verdict>,
    pub metadata: Metadata,
    pub trajectory_path: PathBuf,
    pub diagnostics_path: PathBuf,
    pub metadata_path: PathBuf,
}

impl RunReport {
    pub fn termination(&self) -> Termination {
        self.trajectory.termination
    }

    pub fn certificate_violated(&self) -> bool {
        self.analysis
            .certificate
            .as_ref()
            .is_some_and(|c| c.applicable && !c.holds(CERTIFICATE_SLACK))
    }

    /// Oracle verdict when there is one, otherwise the termination class;
    /// `strict` lets a certificate violation take precedence.
    pub fn exit_status(&self, strict: bool) -> ExitStatus {
        if strict && self.certificate_violated() {
            return ExitStatus::CertificateViolation;
        }
        match &self.verdict {
            Some(v) if v.passed => ExitStatus::Completed,
            Some(_) => ExitStatus::ScenarioFailed,
            None => ExitStatus::for_termination(&self.trajectory.termination),
        }
    }
}

/// Integrates, analyses, evaluates the oracle if any, and writes the three
/// output files.
pub fn run(config: &RunConfig) -> Result<RunReport, RunError> {
    let scenario = config.to_scenario()?;
    let trajectory = scenario.integrate()?;
    let analysis = scenario.analyze(&trajectory)?;
    let verdict = match config.oracle {
        Some(_) => Some(scenarios::evaluate(&scenario, &trajectory, &analysis)?),
        None => None,
    };
    let metadata = Metadata::new(
        config,
        scenario.domain.name(),
        &trajectory,
        &analysis,
        verdict.clone(),
        CERTIFICATE_SLACK,
    );

    let dir = &config.output.dir;
    fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    let write = |name: &str, bytes: &[u8]| -> Result<PathBuf, RunError> {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| RunError::io(&path, e))?;
        Ok(path)
    };
    let trajectory_path = write(&config.output.trajectory, &trajectory_csv(&trajectory)?)?;
    let diagnostics_path = write(&config.output.diagnostics, &diagnostics_csv(&analysis)?)?;
    let mut json = serde_json::to_vec_pretty(&metadata)?;
    json.push(b'\n');
    let metadata_path = write(&config.output.metadata, &json)?;

    Ok(RunReport {
        trajectory,
        analysis,
        verdict,
        metadata,
        trajectory_path,
        diagnostics_path,
        metadata_path,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
    Ok(parse_config(&text)?)
}

/// Loads, applies the overrides, validates again and runs.
pub fn run_path(path: &Path, overrides: &RunOverrides) -> Result<RunReport, RunError> {
    let mut config = load_config(path)?;
    overrides.apply(&mut config);
    config.validate()?;
    run(&config)
}

/// `(name, description, has_oracle)` for every shipped scenario.
pub fn list_scenarios() -> Vec<(String, String, bool)> {
    scenarios::builtin_scenarios()
        .into_iter()
        .map(|s| {
            let has_oracle = s.oracle != Oracle::None;
            (s.name, s.description, has_oracle)
        })
        .collect()
}

/// Runs a shipped scenario; output goes to `<out_dir>/<name>` unless the
/// overrides name a directory.
pub fn run_scenario_by_name(name: &str, overrides: &RunOverrides) -> Result<RunReport, RunError> {
    let scenario = find_scenario(name)?;
    let mut config = RunConfig::from_scenario(&scenario);
    config.output.dir = config.output.dir.join(name);
    overrides.apply(&mut config);
    config.validate()?;
    run(&config)
}

/// Runs every config in parallel, each into `<out_root>/<file stem>`.
/// Results keep the input order.
pub fn sweep(paths: &[PathBuf], out_root: &Path, overrides: &RunOverrides) -> Vec<(PathBuf, Result<RunReport, RunError>)> {
    paths
        .par_iter()
        .map(|path| {
            let stem = path.file_stem().map_or_else(|| "run".into(), |s| s.to_os_string());
            let per_run = RunOverrides {
                out_dir: Some(out_root.join(stem)),
                ..overrides.clone()
            };
            (path.clone(), run_path(path, &per_run))
        })
        .collect()
}
