//! Velocity field of the point-vortex system and its time integration.

mod dopri;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{coincidence_threshold, DomainModel, GeometryError, Point2};
use crate::numeric::CompensatedPoint;

use dopri::{positions_of, Monitor, VortexSystem};

/// Largest `N` accepted by [`check_non_neutral`].
pub const MAX_NON_NEUTRAL_N: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("configuration has no vortices")]
    Empty,
    #[error("{positions} positions but {intensities} intensities")]
    LengthMismatch { positions: usize, intensities: usize },
    #[error("vortex {} has intensity {value}; intensities must be finite and nonzero", .index + 1)]
    InvalidIntensity { index: usize, value: f64 },
    #[error("vortex {} has non-finite position", .index + 1)]
    NonFinitePosition { index: usize },
    #[error("vortices {} and {} coincide", .i + 1, .j + 1)]
    CoincidentVortices { i: usize, j: usize },
    #[error("vortex {} lies outside the {domain} domain", .index + 1)]
    ExteriorVortex { index: usize, domain: &'static str },
    #[error("invalid integrator settings: {0}")]
    InvalidSettings(String),
    #[error("{n} vortices exceed the limit of {max} for exhaustive subset checks")]
    TooManyVortices { n: usize, max: usize },
}

/// Positions and intensities of `N` point vortices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexConfiguration {
    pub positions: Vec<Point2>,
    pub intensities: Vec<f64>,
}

impl VortexConfiguration {
    /// Checks shapes, finiteness and nonzero intensities.
    pub fn new(positions: Vec<Point2>, intensities: Vec<f64>) -> Result<Self, DynamicsError> {
        let config = Self {
            positions,
            intensities,
        };
        config.check_shape()?;
        Ok(config)
    }

    fn check_shape(&self) -> Result<(), DynamicsError> {
        if self.positions.is_empty() {
            return Err(DynamicsError::Empty);
        }
        if self.positions.len() != self.intensities.len() {
            return Err(DynamicsError::LengthMismatch {
                positions: self.positions.len(),
                intensities: self.intensities.len(),
            });
        }
        if let Some((index, &value)) = self
            .intensities
            .iter()
            .enumerate()
            .find(|(_, a)| !a.is_finite() || **a == 0.0)
        {
            return Err(DynamicsError::InvalidIntensity { index, value });
        }
        if let Some(index) = self.positions.iter().position(|p| !p.is_finite()) {
            return Err(DynamicsError::NonFinitePosition { index });
        }
        Ok(())
    }

    /// Full validation against a domain: interior, pairwise distinct positions.
    pub fn validate_for(&self, domain: &DomainModel) -> Result<(), DynamicsError> {
        self.check_shape()?;
        for (i, &x) in self.positions.iter().enumerate() {
            if !domain.contains(x) {
                return Err(DynamicsError::ExteriorVortex {
                    index: i,
                    domain: domain.name(),
                });
            }
            for (j, &y) in self.positions[..i].iter().enumerate() {
                if (x - y).norm() < coincidence_threshold(x, y) {
                    return Err(DynamicsError::CoincidentVortices { i: j, j: i });
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub(crate) fn state(&self) -> Vec<f64> {
        self.positions.iter().flat_map(|p| [p.x1, p.x2]).collect()
    }

    /// Same positions with every intensity negated, which reverses time.
    pub fn time_reversed(&self) -> Self {
        Self {
            positions: self.positions.clone(),
            intensities: self.intensities.iter().map(|a| -a).collect(),
        }
    }
}

/// Step control, stopping criteria and output sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub t_end: f64,
    pub pair_collapse_eps: f64,
    pub boundary_collapse_eps: f64,
    pub min_step: f64,
    pub sample_stride: f64,
    /// Also record the state at every accepted step.
    pub record_accepted_steps: bool,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            initial_step: 1e-3,
            max_step: 0.1,
            t_end: 1.0,
            pair_collapse_eps: 1e-6,
            boundary_collapse_eps: 1e-6,
            min_step: 1e-14,
            sample_stride: 0.01,
            record_accepted_steps: false,
        }
    }
}

impl IntegratorSettings {
    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn with_stride(mut self, stride: f64) -> Self {
        self.sample_stride = stride;
        self
    }

    /// Fixed steps of size `h`: tolerances are loose enough that no step is rejected.
    pub fn fixed_step(mut self, h: f64) -> Self {
        self.initial_step = h;
        self.max_step = h;
        self.rel_tol = 1.0;
        self.abs_tol = 1.0;
        self
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("initial_step", self.initial_step),
            ("max_step", self.max_step),
            ("min_step", self.min_step),
            ("sample_stride", self.sample_stride),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || v.is_nan() {
                return Err(DynamicsError::InvalidSettings(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(DynamicsError::InvalidSettings(format!(
                "t_end must be finite and non-negative, got {}",
                self.t_end
            )));
        }
        let floor = 10.0 * f64::EPSILON;
        for (name, v) in [
            ("pair_collapse_eps", self.pair_collapse_eps),
            ("boundary_collapse_eps", self.boundary_collapse_eps),
        ] {
            if !(v >= floor) || !v.is_finite() {
                return Err(DynamicsError::InvalidSettings(format!(
                    "{name} must be finite and at least {floor:e}, got {v}"
                )));
            }
        }
        if self.min_step > self.max_step {
            return Err(DynamicsError::InvalidSettings(format!(
                "min_step {} exceeds max_step {}",
                self.min_step, self.max_step
            )));
        }
        Ok(())
    }
}

/// Why an integration stopped. Vortex indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Termination {
    ReachedTEnd { t: f64 },
    PairCollapse { i: usize, j: usize, t: f64 },
    BoundaryCollapse { i: usize, t: f64 },
    StepUnderflow { t: f64 },
}

impl Termination {
    pub fn time(&self) -> f64 {
        match *self {
            Termination::ReachedTEnd { t }
            | Termination::PairCollapse { t, .. }
            | Termination::BoundaryCollapse { t, .. }
            | Termination::StepUnderflow { t } => t,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Termination::ReachedTEnd { .. } => "ReachedTEnd",
            Termination::PairCollapse { .. } => "PairCollapse",
            Termination::BoundaryCollapse { .. } => "BoundaryCollapse",
            Termination::StepUnderflow { .. } => "StepUnderflow",
        }
    }

    pub fn is_collapse(&self) -> bool {
        matches!(
            self,
            Termination::PairCollapse { .. } | Termination::BoundaryCollapse { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub positions: Vec<Point2>,
}

/// Sampled trajectory together with the reason the integration stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub intensities: Vec<f64>,
    pub samples: Vec<TrajectorySample>,
    pub termination: Termination,
    pub stats: StepStats,
    /// Extrapolated collapse time when the run ended on a collapse event.
    pub collapse_estimate: Option<f64>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn vortex_count(&self) -> usize {
        self.intensities.len()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn configuration(&self, k: usize) -> VortexConfiguration {
        VortexConfiguration {
            positions: self.samples[k].positions.clone(),
            intensities: self.intensities.clone(),
        }
    }

    pub fn first(&self) -> Option<&TrajectorySample> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&TrajectorySample> {
        self.samples.last()
    }
}

/// Single vortex in the half-plane pushed by a constant exterior field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyModelSpec {
    #[serde(default = "unit_intensity")]
    pub intensity: f64,
    pub forcing: Point2,
    pub initial: Point2,
}

fn unit_intensity() -> f64 {
    1.0
}

impl ToyModelSpec {
    /// Forcing `−C e₂` from `(0, 1)`: collapses onto the wall at `T = 1/C`.
    pub fn collapse(c: f64) -> Self {
        Self {
            intensity: 1.0,
            forcing: Point2::new(0.0, -c),
            initial: Point2::new(0.0, 1.0),
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !self.intensity.is_finite() || self.intensity == 0.0 {
            return Err(DynamicsError::InvalidIntensity {
                index: 0,
                value: self.intensity,
            });
        }
        if !self.initial.is_finite() || !self.forcing.is_finite() {
            return Err(DynamicsError::NonFinitePosition { index: 0 });
        }
        if !(self.initial.x2 > 0.0) {
            return Err(DynamicsError::ExteriorVortex {
                index: 0,
                domain: "half-plane",
            });
        }
        Ok(())
    }

    /// Closed-form position for forcing `(0, −C)`, `C ≠ 0`, valid for `t < x₂(0)/C`.
    pub fn closed_form(&self, t: f64) -> Point2 {
        let c = -self.forcing.x2;
        let x2 = self.initial.x2 - c * t;
        let drift = self.forcing.x1 * t;
        let x1 = if c == 0.0 {
            self.initial.x1 + self.intensity * t / (4.0 * PI * self.initial.x2)
        } else {
            self.initial.x1 + self.intensity / (4.0 * PI * c) * (self.initial.x2 / x2).ln()
        };
        Point2::new(x1 + drift, x2)
    }
}

/// Velocities from explicit positions and intensities; no validation beyond the kernels'.
pub(crate) fn velocities(
    domain: &DomainModel,
    positions: &[Point2],
    intensities: &[f64],
) -> Result<Vec<Point2>, GeometryError> {
    let n = positions.len();
    let (pair, robin) = domain.interaction_gradients(positions)?;
    Ok((0..n)
        .map(|i| {
            let mut acc = CompensatedPoint::default();
            for j in 0..n {
                if j != i {
                    acc.add(pair[i * n + j].perp() * intensities[j]);
                }
            }
            acc.add(robin[i].perp() * (0.5 * intensities[i]));
            acc.value()
        })
        .collect())
}

/// `v_i = Σ_{j≠i} a_j ∇^⊥_x G(x_i, x_j) + (a_i/2) ∇^⊥γ̃(x_i)`.
pub fn velocity_field(
    domain: &DomainModel,
    config: &VortexConfiguration,
) -> Result<Vec<Point2>, DynamicsError> {
    config.check_shape()?;
    Ok(velocities(domain, &config.positions, &config.intensities)?)
}

struct PointVortexSystem<'a> {
    domain: &'a DomainModel,
    intensities: &'a [f64],
    monitors: Vec<Monitor>,
}

impl VortexSystem for PointVortexSystem<'_> {
    fn rhs(&self, y: &[f64], dy: &mut [f64]) -> Result<(), DynamicsError> {
        let v = velocities(self.domain, &positions_of(y), self.intensities)?;
        for (out, p) in dy.chunks_exact_mut(2).zip(v) {
            out[0] = p.x1;
            out[1] = p.x2;
        }
        Ok(())
    }

    fn monitors(&self) -> &[Monitor] {
        &self.monitors
    }

    fn monitor_distance(&self, monitor: Monitor, y: &[f64]) -> Option<f64> {
        let at = |i: usize| Point2::new(y[2 * i], y[2 * i + 1]);
        match monitor {
            Monitor::Pair(i, j) => Some(at(i).distance(at(j))),
            Monitor::Boundary(i) => self.domain.boundary_distance(at(i)).ok(),
        }
    }
}

/// Integrates the vortex system until `t_end` or the first collapse event.
pub fn integrate(
    domain: &DomainModel,
    config: &VortexConfiguration,
    settings: &IntegratorSettings,
) -> Result<TrajectoryRecord, DynamicsError> {
    config.validate_for(domain)?;
    settings.validate()?;
    domain.reset_caches();
    let n = config.len();
    let mut monitors = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            monitors.push(Monitor::Pair(i, j));
        }
    }
    if domain.has_boundary() {
        monitors.extend((0..n).map(Monitor::Boundary));
    }
    let system = PointVortexSystem {
        domain,
        intensities: &config.intensities,
        monitors,
    };
    dopri::run(&system, &config.state(), &config.intensities, settings)
}

struct ToySystem {
    spec: ToyModelSpec,
    monitors: [Monitor; 1],
}

impl VortexSystem for ToySystem {
    fn rhs(&self, y: &[f64], dy: &mut [f64]) -> Result<(), DynamicsError> {
        let x = Point2::new(y[0], y[1]);
        if !(x.x2 > 0.0) || !x.is_finite() {
            return Err(GeometryError::OutsideDomain(x).into());
        }
        dy[0] = self.spec.intensity / (4.0 * PI * x.x2) + self.spec.forcing.x1;
        dy[1] = self.spec.forcing.x2;
        Ok(())
    }

    fn monitors(&self) -> &[Monitor] {
        &self.monitors
    }

    fn monitor_distance(&self, _: Monitor, y: &[f64]) -> Option<f64> {
        (y[1] > 0.0).then_some(y[1])
    }
}

/// Integrates `dx/dt = (a/(4π x₂)) e₁ + F` in the half-plane.
pub fn integrate_toy(
    spec: &ToyModelSpec,
    settings: &IntegratorSettings,
) -> Result<TrajectoryRecord, DynamicsError> {
    spec.validate()?;
    let system = ToySystem {
        spec: spec.clone(),
        monitors: [Monitor::Boundary(0)],
    };
    dopri::run(
        &system,
        &[spec.initial.x1, spec.initial.x2],
        &[spec.intensity],
        settings,
    )
}

/// True iff every nonempty subset of intensities has a nonzero sum
/// (relative tolerance `1e-12` of `Σ|a_i|`).
pub fn check_non_neutral(intensities: &[f64]) -> Result<bool, DynamicsError> {
    let n = intensities.len();
    if n > MAX_NON_NEUTRAL_N {
        return Err(DynamicsError::TooManyVortices {
            n,
            max: MAX_NON_NEUTRAL_N,
        });
    }
    let tol = 1e-12 * intensities.iter().map(|a| a.abs()).sum::<f64>();
    Ok((1u32..(1u32 << n)).all(|mask| {
        let sum: f64 = (0..n)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| intensities[i])
            .sum();
        sum.abs() > tol
    }))
}
