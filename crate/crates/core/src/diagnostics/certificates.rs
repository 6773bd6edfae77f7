//! Gronwall lower bounds for boundary clusters with positive intensities.

use serde::{Deserialize, Serialize};

use super::{require_domain, ClusterPartition, DiagnosticsError, INV_PI};
use crate::dynamics::TrajectoryRecord;
use crate::geometry::{DomainKind, DomainModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificatePoint {
    pub t: f64,
    /// Measured functional (`M_Q·e₂` or `J`).
    pub value: f64,
    /// `value(0)·e^{−Ct}`
    pub floor: f64,
    pub margin: f64,
}

/// Measured functional against its exponential floor at every sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Gronwall rate `C`, built from the measured separation.
    pub constant: f64,
    /// False when some intensity is not positive; the floor is then not implied.
    pub applicable: bool,
    pub points: Vec<CertificatePoint>,
}

impl Certificate {
    pub fn min_margin(&self) -> Option<f64> {
        self.points.iter().map(|p| p.margin).reduce(f64::min)
    }

    /// True when every margin is at least `-slack` (vacuously for an empty series).
    pub fn holds(&self, slack: f64) -> bool {
        self.points.iter().all(|p| p.margin >= -slack)
    }

    fn build(
        trajectory: &TrajectoryRecord,
        partition: &ClusterPartition,
        intensities: &[f64],
        constant: f64,
        functional: impl Fn(&[crate::geometry::Point2]) -> f64,
    ) -> Self {
        let applicable = intensities.iter().all(|&a| a > 0.0);
        if partition.boundary.is_empty() {
            return Self {
                constant,
                applicable,
                points: Vec::new(),
            };
        }
        let v0 = functional(&trajectory.samples[0].positions);
        let t0 = trajectory.samples[0].t;
        let points = trajectory
            .samples
            .iter()
            .map(|s| {
                let value = functional(&s.positions);
                let floor = v0 * (-constant * (s.t - t0)).exp();
                CertificatePoint {
                    t: s.t,
                    value,
                    floor,
                    margin: value - floor,
                }
            })
            .collect();
        Self {
            constant,
            applicable,
            points,
        }
    }
}

fn exterior_constant(partition: &ClusterPartition, f: impl Fn(f64) -> f64) -> f64 {
    if partition.interior.is_empty() || partition.boundary.is_empty() || !partition.delta_hat.is_finite() {
        0.0
    } else {
        f(partition.delta_hat)
    }
}

/// `M_Q·e₂ ≥ M_Q(0)·e₂ e^{−Ct}` with `C = (2/(πδ̂²))(N − |Q|) max_{j∉Q}|a_j|`.
pub fn halfplane_certificate(
    domain: &DomainModel,
    trajectory: &TrajectoryRecord,
    partition: &ClusterPartition,
    intensities: &[f64],
) -> Result<Certificate, DiagnosticsError> {
    require_domain(
        domain,
        "halfplane_certificate",
        "half-plane",
        matches!(domain.kind(), DomainKind::HalfPlane),
    )?;
    if trajectory.is_empty() {
        return Err(DiagnosticsError::EmptyTrajectory);
    }
    let outside = partition.interior.len() as f64;
    let max_a = partition
        .interior
        .iter()
        .map(|&j| intensities[j].abs())
        .fold(0.0, f64::max);
    let constant = exterior_constant(partition, |delta| 2.0 * INV_PI / (delta * delta) * outside * max_a);
    let q = &partition.boundary;
    Ok(Certificate::build(trajectory, partition, intensities, constant, |xs| {
        q.iter().map(|&i| intensities[i] * xs[i].x2).sum()
    }))
}

/// `J ≥ J(0) e^{−Ct}` with `J = Σ_{i∈Q} a_i d_i (2 − d_i)` and
/// `C = (4/(πδ̂³)) Σ_{j∉Q} a_j`.
pub fn disk_certificate(
    domain: &DomainModel,
    trajectory: &TrajectoryRecord,
    partition: &ClusterPartition,
    intensities: &[f64],
) -> Result<Certificate, DiagnosticsError> {
    require_domain(
        domain,
        "disk_certificate",
        "unit-disk",
        matches!(domain.kind(), DomainKind::UnitDisk),
    )?;
    if trajectory.is_empty() {
        return Err(DiagnosticsError::EmptyTrajectory);
    }
    let outside: f64 = partition.interior.iter().map(|&j| intensities[j].abs()).sum();
    let constant = exterior_constant(partition, |delta| 4.0 * INV_PI / delta.powi(3) * outside);
    let q = &partition.boundary;
    Ok(Certificate::build(trajectory, partition, intensities, constant, |xs| {
        q.iter()
            .map(|&i| {
                let d = 1.0 - xs[i].norm();
                intensities[i] * d * (2.0 - d)
            })
            .sum()
    }))
}
