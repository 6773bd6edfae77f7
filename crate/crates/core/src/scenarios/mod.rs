//! Canned configurations with closed-form or fitted oracles.

mod fixtures;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{analyze, unwound_angles, Analysis, AnalysisOptions, DiagnosticsError};
use crate::dynamics::{
    integrate, integrate_toy, DynamicsError, IntegratorSettings, Termination, ToyModelSpec,
    TrajectoryRecord, VortexConfiguration,
};
use crate::geometry::{DomainKind, DomainModel, Point2};
use crate::numeric::fit_line;

pub use fixtures::{collapse_triangle, GROEBLI_INTENSITIES, GROEBLI_POSITIONS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error("unknown scenario '{name}'; available: {}", .available.join(", "))]
    Unknown { name: String, available: Vec<String> },
}

/// What is integrated: point vortices in the domain, or the forced toy model.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSystem {
    Vortices(VortexConfiguration),
    Toy(ToyModelSpec),
}

/// Expected behaviour with its tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Oracle {
    /// Rotation about the origin at angular speed `omega`.
    RigidRotation { omega: f64, tol: f64 },
    /// Every vortex moves at the constant `velocity`.
    Translation { velocity: Point2, tol: f64 },
    /// Single vortex on a circle about the origin.
    CircularOrbit {
        radius: f64,
        omega: f64,
        radius_tol: f64,
        omega_tol: f64,
    },
    /// Forced toy model with forcing `(0, −C)`.
    ToyCollapse {
        crossing_x2: f64,
        expected_x1: f64,
        rel_tol: f64,
        collapse_time: f64,
        time_tol: f64,
        min_correlation: f64,
    },
    /// Pair collapse with `min |x_i − x_j| ∝ (T − t)^exponent`.
    SelfSimilarCollapse {
        exponent: f64,
        exponent_tol: f64,
        min_correlation: f64,
    },
    /// Gronwall floors hold, no boundary collapse, energy conserved.
    Certificates { margin_slack: f64, hamiltonian_tol: f64 },
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub domain: DomainModel,
    pub system: ScenarioSystem,
    pub settings: IntegratorSettings,
    pub analysis: AnalysisOptions,
    pub oracle: Oracle,
}

/// One measured quantity against its oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub passed: bool,
    /// The scenario has no oracle; `passed` only means the run completed.
    pub no_oracle: bool,
    pub checks: Vec<OracleCheck>,
}

impl Verdict {
    fn from_checks(checks: Vec<OracleCheck>) -> Self {
        Self {
            passed: checks.iter().all(|c| c.passed),
            no_oracle: false,
            checks,
        }
    }

    pub fn check(&self, name: &str) -> Option<&OracleCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub trajectory: TrajectoryRecord,
    pub analysis: Analysis,
    pub verdict: Verdict,
}

pub fn builtin_scenarios() -> Vec<Scenario> {
    fixtures::builtin()
}

pub fn scenario_names() -> Vec<String> {
    builtin_scenarios().into_iter().map(|s| s.name).collect()
}

pub fn find_scenario(name: &str) -> Result<Scenario, ScenarioError> {
    builtin_scenarios()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| ScenarioError::Unknown {
            name: name.to_string(),
            available: scenario_names(),
        })
}

impl Scenario {
    pub fn integrate(&self) -> Result<TrajectoryRecord, DynamicsError> {
        match &self.system {
            ScenarioSystem::Vortices(c) => integrate(&self.domain, c, &self.settings),
            ScenarioSystem::Toy(spec) => integrate_toy(spec, &self.settings),
        }
    }

    /// Diagnostics of a trajectory of this scenario. The forced toy model is
    /// outside the certificates' hypotheses, so they are skipped for it.
    pub fn analyze(&self, trajectory: &TrajectoryRecord) -> Result<Analysis, DiagnosticsError> {
        let mut options = self.analysis.clone();
        if matches!(self.system, ScenarioSystem::Toy(_)) {
            options.certificates = false;
        }
        analyze(&self.domain, trajectory, &options)
    }

    /// Same scenario with both tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        let mut s = self.clone();
        s.settings.rel_tol /= factor;
        s.settings.abs_tol /= factor;
        s
    }
}

fn check(name: &str, measured: f64, expected: f64, tolerance: f64) -> OracleCheck {
    OracleCheck {
        name: name.to_string(),
        measured,
        expected,
        tolerance,
        passed: (measured - expected).abs() <= tolerance,
    }
}

fn at_least(name: &str, measured: f64, floor: f64) -> OracleCheck {
    OracleCheck {
        name: name.to_string(),
        measured,
        expected: floor,
        tolerance: 0.0,
        passed: measured >= floor,
    }
}

fn flag(name: &str, ok: bool) -> OracleCheck {
    OracleCheck {
        name: name.to_string(),
        measured: if ok { 1.0 } else { 0.0 },
        expected: 1.0,
        tolerance: 0.0,
        passed: ok,
    }
}

fn max_deviation(trajectory: &TrajectoryRecord, exact: impl Fn(usize, f64, Point2) -> Point2) -> f64 {
    let x0 = &trajectory.samples[0].positions;
    trajectory
        .samples
        .iter()
        .flat_map(|s| {
            s.positions
                .iter()
                .enumerate()
                .map(|(i, &x)| x.distance(exact(i, s.t, x0[i])))
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

fn hamiltonian_drift(analysis: &Analysis) -> f64 {
    let h = analysis.series.column(|s| s.hamiltonian);
    let h0 = h[0];
    h.iter().map(|v| (v - h0).abs()).fold(0.0, f64::max) / (1.0 + h0.abs())
}

fn displacement_consistency(trajectory: &TrajectoryRecord, analysis: &Analysis) -> f64 {
    let angles = unwound_angles(trajectory);
    let mut worst: f64 = 0.0;
    for (k, s) in analysis.series.samples.iter().enumerate() {
        for (i, &l) in s.displacements.iter().enumerate() {
            if l.is_finite() {
                worst = worst.max((l - angles[i][k]).abs());
            }
        }
    }
    worst
}

pub(crate) fn evaluate(scenario: &Scenario, trajectory: &TrajectoryRecord, analysis: &Analysis) -> Result<Verdict, ScenarioError> {
    let reached_end = matches!(trajectory.termination, Termination::ReachedTEnd { .. });
    let mut checks = Vec::new();
    match &scenario.oracle {
        Oracle::RigidRotation { omega, tol } => {
            checks.push(flag("reached_t_end", reached_end));
            let err = max_deviation(trajectory, |_, t, x0| {
                let (s, c) = (omega * t).sin_cos();
                Point2::new(c * x0.x1 - s * x0.x2, s * x0.x1 + c * x0.x2)
            });
            checks.push(check("max_position_error", err, 0.0, *tol));
        }
        Oracle::Translation { velocity, tol } => {
            checks.push(flag("reached_t_end", reached_end));
            let err = max_deviation(trajectory, |_, t, x0| x0 + *velocity * t);
            checks.push(check("max_position_error", err, 0.0, *tol));
        }
        Oracle::CircularOrbit {
            radius,
            omega,
            radius_tol,
            omega_tol,
        } => {
            checks.push(flag("reached_t_end", reached_end));
            let drift = trajectory
                .samples
                .iter()
                .map(|s| (s.positions[0].norm() - radius).abs())
                .fold(0.0, f64::max);
            checks.push(check("max_radius_drift", drift, 0.0, *radius_tol));
            let last = trajectory.last().expect("nonempty trajectory");
            let measured = if last.t > 0.0 {
                unwound_angles(trajectory)[0].last().copied().unwrap_or(0.0) / last.t
            } else {
                *omega
            };
            checks.push(check("angular_velocity", measured, *omega, *omega_tol));
            checks.push(check(
                "displacement_vs_angle",
                displacement_consistency(trajectory, analysis),
                0.0,
                1e-6,
            ));
        }
        Oracle::ToyCollapse {
            crossing_x2,
            expected_x1,
            rel_tol,
            collapse_time,
            time_tol,
            min_correlation,
        } => {
            let ScenarioSystem::Toy(spec) = &scenario.system else {
                unreachable!("toy oracle on a vortex scenario");
            };
            checks.push(flag(
                "boundary_collapse",
                matches!(trajectory.termination, Termination::BoundaryCollapse { .. }),
            ));
            let x1 = toy_crossing_x1(spec, &scenario.settings, trajectory, *crossing_x2)?;
            checks.push(check(
                "x1_at_crossing",
                x1.unwrap_or(f64::NAN),
                *expected_x1,
                rel_tol * expected_x1.abs(),
            ));
            checks.push(check(
                "collapse_time",
                trajectory.collapse_estimate.unwrap_or(f64::NAN),
                *collapse_time,
                *time_tol,
            ));
            let corr = analysis
                .divergence
                .as_ref()
                .and_then(|d| d.log_fit)
                .map_or(f64::NAN, |f| f.correlation);
            checks.push(at_least("log_fit_correlation", corr, *min_correlation));
            let worst = analysis
                .series
                .samples
                .iter()
                .filter(|s| s.l_gamma.abs() > 0.0)
                .map(|s| {
                    let exact = spec.closed_form(s.t).x1 - spec.initial.x1;
                    ((s.l_gamma - exact) / exact).abs()
                })
                .fold(0.0, f64::max);
            checks.push(check("l_gamma_vs_closed_form", worst, 0.0, 1e-4));
        }
        Oracle::SelfSimilarCollapse {
            exponent,
            exponent_tol,
            min_correlation,
        } => {
            checks.push(flag(
                "pair_collapse",
                matches!(trajectory.termination, Termination::PairCollapse { .. }),
            ));
            let fit = collapse_exponent(trajectory, analysis);
            checks.push(check(
                "distance_exponent",
                fit.map_or(f64::NAN, |f| f.0),
                *exponent,
                *exponent_tol,
            ));
            checks.push(at_least(
                "exponent_fit_correlation",
                fit.map_or(f64::NAN, |f| f.1),
                *min_correlation,
            ));
        }
        Oracle::Certificates {
            margin_slack,
            hamiltonian_tol,
        } => {
            checks.push(flag("reached_t_end", reached_end));
            checks.push(flag("boundary_cluster_nonempty", !analysis.partition.boundary.is_empty()));
            let margin = analysis
                .certificate
                .as_ref()
                .and_then(|c| c.min_margin())
                .unwrap_or(f64::NAN);
            checks.push(at_least("min_certificate_margin", margin, -margin_slack));
            checks.push(check("hamiltonian_drift", hamiltonian_drift(analysis), 0.0, *hamiltonian_tol));
            if matches!(scenario.domain.kind(), DomainKind::UnitDisk) {
                checks.push(check(
                    "displacement_vs_angle",
                    displacement_consistency(trajectory, analysis),
                    0.0,
                    1e-6,
                ));
            }
        }
        Oracle::None => {
            return Ok(Verdict {
                passed: true,
                no_oracle: true,
                checks,
            })
        }
    }
    Ok(Verdict::from_checks(checks))
}

/// `x₁` where `x₂` first reaches `level`: the crossing time is interpolated
/// from the samples and the model is re-integrated up to it.
fn toy_crossing_x1(
    spec: &ToyModelSpec,
    settings: &IntegratorSettings,
    trajectory: &TrajectoryRecord,
    level: f64,
) -> Result<Option<f64>, ScenarioError> {
    let crossing = trajectory.samples.windows(2).find_map(|w| {
        let (a, b) = (w[0].positions[0].x2, w[1].positions[0].x2);
        ((a - level) * (b - level) <= 0.0 && a != b).then(|| w[0].t + (level - a) / (b - a) * (w[1].t - w[0].t))
    });
    let Some(t_cross) = crossing else {
        return Ok(None);
    };
    let rerun = integrate_toy(spec, &settings.clone().with_t_end(t_cross))?;
    Ok(rerun.last().map(|s| s.positions[0].x1))
}

/// Slope and correlation of `ln min_pair_distance` against `ln(T̂ − t)` over
/// the final tenth of the samples.
fn collapse_exponent(trajectory: &TrajectoryRecord, analysis: &Analysis) -> Option<(f64, f64)> {
    let t_hat = trajectory.collapse_estimate?;
    let samples = &analysis.series.samples;
    let count = (samples.len() / 10).max(3).min(samples.len());
    let window = &samples[samples.len() - count..];
    let (xs, ys): (Vec<f64>, Vec<f64>) = window
        .iter()
        .filter(|s| t_hat - s.t > 0.0)
        .map(|s| ((t_hat - s.t).ln(), s.min_pair_distance.ln()))
        .unzip();
    fit_line(&xs, &ys).map(|f| (f.slope, f.correlation))
}

/// Integrates, evaluates the diagnostics and compares against the oracle.
pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioOutcome, ScenarioError> {
    let trajectory = scenario.integrate()?;
    let analysis = scenario.analyze(&trajectory)?;
    let verdict = evaluate(scenario, &trajectory, &analysis)?;
    Ok(ScenarioOutcome {
        trajectory,
        analysis,
        verdict,
    })
}
