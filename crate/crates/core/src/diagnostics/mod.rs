//! Conserved quantities, boundary clusters and the functionals built on them.

mod analysis;
mod appendix;
mod certificates;
mod divergence;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicsError, TrajectoryRecord, VortexConfiguration};
use crate::geometry::{DomainKind, DomainModel, GeometryError, Point2};
use crate::numeric::{CompensatedPoint, CompensatedSum};

pub use analysis::{analyze, Analysis, AnalysisOptions};
pub use appendix::{
    appendix_a_monitor, appendix_a_monitor_with_constant, appendix_b_checkers, b2_hypothesis,
    AppendixAReport, AppendixARow, AppendixBReport, B2Check, RatioVerdict, APPENDIX_A_MAX_N,
};
pub use certificates::{disk_certificate, halfplane_certificate, Certificate, CertificatePoint};
pub use divergence::{lipschitz_and_divergence_monitor, DivergenceReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("trajectory has no samples")]
    EmptyTrajectory,
    #[error("{op} needs at least {needed} samples, got {got}")]
    InsufficientSamples {
        op: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("{op} requires the {expected} domain, got {got}")]
    WrongDomain {
        op: &'static str,
        expected: &'static str,
        got: &'static str,
    },
    #[error("{op} supports at most {max} vortices, got {n}")]
    TooManyVortices { op: &'static str, n: usize, max: usize },
    #[error("vortex {} of the boundary cluster leaves the projection band at t = {t}", .index + 1)]
    OutOfBand { index: usize, t: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Kirchhoff–Routh energy.
///
/// The plane uses `(1/2π) Σ_{i≠j} a_i a_j ln|x_i − x_j|`. Domains with a
/// boundary use `½ Σ_{i≠j} a_i a_j G(x_i, x_j) + ½ Σ a_i² γ̃(x_i)`, which is
/// the normalisation the velocity field conserves.
pub fn hamiltonian(domain: &DomainModel, config: &VortexConfiguration) -> Result<f64, DiagnosticsError> {
    hamiltonian_of(domain, &config.positions, &config.intensities)
}

fn hamiltonian_of(domain: &DomainModel, xs: &[Point2], a: &[f64]) -> Result<f64, DiagnosticsError> {
    let pair_weight = if domain.has_boundary() { 0.5 } else { 1.0 };
    let mut sum = CompensatedSum::new();
    for i in 0..xs.len() {
        for j in 0..xs.len() {
            if i != j {
                sum.add(pair_weight * a[i] * a[j] * domain.green(xs[i], xs[j])?);
            }
        }
        if domain.has_boundary() {
            sum.add(0.5 * a[i] * a[i] * domain.robin(xs[i])?);
        }
    }
    Ok(sum.value())
}

/// Center of vorticity `M = Σ a_i x_i` and moment `I = Σ a_i |x_i|²`.
pub fn conserved_quantities(config: &VortexConfiguration) -> (Point2, f64) {
    let all: Vec<usize> = (0..config.len()).collect();
    weighted_moments(&config.positions, &config.intensities, &all)
}

fn weighted_moments(xs: &[Point2], a: &[f64], subset: &[usize]) -> (Point2, f64) {
    let mut m = CompensatedPoint::default();
    let mut i = CompensatedSum::new();
    for &k in subset {
        m.add(xs[k] * a[k]);
        i.add(a[k] * xs[k].norm_sq());
    }
    (m.value(), i.value())
}

/// Boundary cluster `Q`, interior cluster `P` and their measured separation.
/// Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterPartition {
    pub boundary: Vec<usize>,
    pub interior: Vec<usize>,
    /// `Q` split by boundary component; the supported domains have at most one.
    pub components: Vec<Vec<usize>>,
    /// `min_t min_{i∈Q, j∈P} |x_i − x_j|`, or `+∞` when `Q` or `P` is empty.
    pub delta_hat: f64,
}

impl ClusterPartition {
    /// Partition with the given boundary cluster over `n` vortices, separation
    /// measured on `trajectory`.
    pub fn from_boundary(boundary: Vec<usize>, trajectory: &TrajectoryRecord) -> Self {
        let n = trajectory.vortex_count();
        let interior: Vec<usize> = (0..n).filter(|i| !boundary.contains(i)).collect();
        let mut delta_hat = f64::INFINITY;
        for s in &trajectory.samples {
            for &i in &boundary {
                for &j in &interior {
                    delta_hat = delta_hat.min(s.positions[i].distance(s.positions[j]));
                }
            }
        }
        let components = if boundary.is_empty() {
            Vec::new()
        } else {
            vec![boundary.clone()]
        };
        Self {
            boundary,
            interior,
            components,
            delta_hat,
        }
    }

    pub fn in_boundary(&self, i: usize) -> bool {
        self.boundary.contains(&i)
    }
}

fn sample_distances(domain: &DomainModel, positions: &[Point2]) -> Result<Vec<f64>, DiagnosticsError> {
    positions
        .iter()
        .map(|&x| domain.boundary_distance(x).map_err(Into::into))
        .collect()
}

/// `i ∈ Q` iff the minimum of `d_i` over the trailing `window` is at most `eta`.
pub fn detect_clusters(
    domain: &DomainModel,
    trajectory: &TrajectoryRecord,
    window: f64,
    eta: f64,
) -> Result<ClusterPartition, DiagnosticsError> {
    let last = trajectory.last().ok_or(DiagnosticsError::EmptyTrajectory)?;
    if !(eta > 0.0) || !(window >= 0.0) {
        return Err(DiagnosticsError::InvalidParameter(format!(
            "cluster detection needs eta > 0 and window ≥ 0, got eta = {eta}, window = {window}"
        )));
    }
    let n = trajectory.vortex_count();
    let start = last.t - window;
    let mut minima = vec![f64::INFINITY; n];
    for s in trajectory.samples.iter().filter(|s| s.t >= start) {
        for (m, d) in minima.iter_mut().zip(sample_distances(domain, &s.positions)?) {
            *m = m.min(d);
        }
    }
    let boundary = (0..n).filter(|&i| minima[i] <= eta).collect();
    Ok(ClusterPartition::from_boundary(boundary, trajectory))
}

/// Default trailing window: a tenth of the recorded span.
pub fn default_window(trajectory: &TrajectoryRecord) -> f64 {
    match (trajectory.first(), trajectory.last()) {
        (Some(a), Some(b)) => 0.1 * (b.t - a.t),
        _ => 0.0,
    }
}

/// Per-sample diagnostics. Vortex-indexed vectors are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSample {
    pub t: f64,
    pub hamiltonian: f64,
    pub center_of_mass: Point2,
    pub moment_of_inertia: f64,
    pub cluster_center: Point2,
    pub cluster_moment: f64,
    pub distances: Vec<f64>,
    pub d_gamma: f64,
    /// Tangential boundary displacement `l_i`; NaN for vortices that leave the band.
    pub displacements: Vec<f64>,
    pub l_gamma: f64,
    /// `B_P` over the boundary distances for every subset (bitmask) with a
    /// nonzero intensity sum; empty for more than [`APPENDIX_A_MAX_N`] vortices.
    pub subset_centers: Vec<(u32, f64)>,
    /// `J = Σ_{i∈Q} a_i d_i (2 − d_i)`, unit disk only.
    pub disk_j: Option<f64>,
    /// `Σ_{i∈Q} |a_i|`
    pub cluster_abs_sum: f64,
    /// `|Σ_{i∈Q} a_i|`
    pub cluster_sum_abs: f64,
    pub min_pair_distance: f64,
    pub min_boundary_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSeries {
    pub partition: ClusterPartition,
    pub samples: Vec<DiagnosticsSample>,
}

impl DiagnosticsSeries {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn column(&self, f: impl Fn(&DiagnosticsSample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }
}

/// `(1 − dist·Λ) τ(P(x))`: the one-form whose line integral is the arclength
/// travelled by the boundary projection.
fn displacement_form(domain: &DomainModel, x: Point2) -> Result<Point2, GeometryError> {
    let tau = domain.tangent_at_projection(x)?;
    let d = domain.boundary_distance(x)?;
    let lambda = domain.curvature_lambda(x)?;
    Ok(tau * (1.0 - d * lambda))
}

/// Tangential displacements along the recorded path, by Simpson's rule on
/// each chord between consecutive samples. `None` when the vortex leaves the
/// projection band.
fn tangential_displacement(
    domain: &DomainModel,
    trajectory: &TrajectoryRecord,
    i: usize,
) -> Result<Vec<f64>, (usize, GeometryError)> {
    let samples = &trajectory.samples;
    let mut out = Vec::with_capacity(samples.len());
    let mut l = 0.0;
    let mut prev_x = samples[0].positions[i];
    let mut prev_w = displacement_form(domain, prev_x).map_err(|e| (0, e))?;
    out.push(0.0);
    for (k, s) in samples.iter().enumerate().skip(1) {
        let x = s.positions[i];
        let w = displacement_form(domain, x).map_err(|e| (k, e))?;
        let dx = x - prev_x;
        let increment = match displacement_form(domain, (x + prev_x) * 0.5) {
            Ok(mid) => (prev_w + mid * 4.0 + w).dot(dx) / 6.0,
            Err(_) => (prev_w + w).dot(dx) * 0.5,
        };
        l += increment;
        out.push(l);
        prev_x = x;
        prev_w = w;
    }
    Ok(out)
}

/// Unwound polar angle of each vortex relative to its initial angle.
pub fn unwound_angles(trajectory: &TrajectoryRecord) -> Vec<Vec<f64>> {
    (0..trajectory.vortex_count())
        .map(|i| {
            let mut total = 0.0;
            let mut prev = trajectory.samples[0].positions[i];
            let mut out = vec![0.0];
            for s in trajectory.samples.iter().skip(1) {
                let x = s.positions[i];
                total += (prev.x1 * x.x2 - prev.x2 * x.x1).atan2(prev.dot(x));
                out.push(total);
                prev = x;
            }
            out
        })
        .collect()
}

/// All cluster functionals at every sample.
pub fn cluster_functionals(
    domain: &DomainModel,
    trajectory: &TrajectoryRecord,
    partition: &ClusterPartition,
) -> Result<DiagnosticsSeries, DiagnosticsError> {
    if trajectory.is_empty() {
        return Err(DiagnosticsError::EmptyTrajectory);
    }
    let n = trajectory.vortex_count();
    let a = &trajectory.intensities;
    let q = &partition.boundary;

    let mut displacements: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        if !domain.has_boundary() {
            displacements.push(vec![f64::NAN; trajectory.len()]);
            continue;
        }
        match tangential_displacement(domain, trajectory, i) {
            Ok(l) => displacements.push(l),
            Err((k, _)) if partition.in_boundary(i) => {
                return Err(DiagnosticsError::OutOfBand {
                    index: i,
                    t: trajectory.samples[k].t,
                })
            }
            Err(_) => displacements.push(vec![f64::NAN; trajectory.len()]),
        }
    }

    let masks: Vec<(u32, f64)> = if n <= APPENDIX_A_MAX_N {
        (1u32..(1 << n))
            .filter_map(|m| {
                let s: f64 = (0..n).filter(|&i| m & (1 << i) != 0).map(|i| a[i]).sum();
                (s != 0.0).then_some((m, s))
            })
            .collect()
    } else {
        Vec::new()
    };
    let is_disk = matches!(domain.kind(), DomainKind::UnitDisk);
    let cluster_abs_sum: f64 = q.iter().map(|&i| a[i].abs()).sum();
    let cluster_sum_abs = q.iter().map(|&i| a[i]).sum::<f64>().abs();

    let mut samples = Vec::with_capacity(trajectory.len());
    for (k, s) in trajectory.samples.iter().enumerate() {
        let xs = &s.positions;
        let d = sample_distances(domain, xs)?;
        let (m, inertia) = conserved_quantities(&trajectory.configuration(k));
        let (mq, iq) = weighted_moments(xs, a, q);
        let d_gamma = q.iter().map(|&i| a[i] * d[i]).fold(0.0, |acc, v| acc + v);
        let l: Vec<f64> = displacements.iter().map(|l| l[k]).collect();
        let l_gamma = q.iter().map(|&i| a[i] * l[i]).fold(0.0, |acc, v| acc + v);
        let subset_centers = masks
            .iter()
            .map(|&(mask, sum)| {
                let num: f64 = (0..n).filter(|&i| mask & (1 << i) != 0).map(|i| a[i] * d[i]).sum();
                (mask, num / sum)
            })
            .collect();
        let disk_j = is_disk.then(|| q.iter().map(|&i| a[i] * d[i] * (2.0 - d[i])).sum());
        let mut min_pair = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                min_pair = min_pair.min(xs[i].distance(xs[j]));
            }
        }
        samples.push(DiagnosticsSample {
            t: s.t,
            hamiltonian: hamiltonian_of(domain, xs, a)?,
            center_of_mass: m,
            moment_of_inertia: inertia,
            cluster_center: mq,
            cluster_moment: iq,
            min_boundary_distance: d.iter().copied().fold(f64::INFINITY, f64::min),
            distances: d,
            d_gamma,
            displacements: l,
            l_gamma,
            subset_centers,
            disk_j,
            cluster_abs_sum,
            cluster_sum_abs,
            min_pair_distance: min_pair,
        });
    }
    Ok(DiagnosticsSeries {
        partition: partition.clone(),
        samples,
    })
}

pub(crate) fn require_domain(
    domain: &DomainModel,
    op: &'static str,
    expected: &'static str,
    ok: bool,
) -> Result<(), DiagnosticsError> {
    if ok {
        Ok(())
    } else {
        Err(DiagnosticsError::WrongDomain {
            op,
            expected,
            got: domain.name(),
        })
    }
}

pub(crate) const INV_PI: f64 = 1.0 / PI;
