//! One-call evaluation of every diagnostic selected for a run.

use serde::{Deserialize, Serialize};

use super::{
    appendix_a_monitor, appendix_b_checkers, cluster_functionals, default_window, detect_clusters,
    disk_certificate, halfplane_certificate, lipschitz_and_divergence_monitor, AppendixAReport,
    AppendixBReport, Certificate, ClusterPartition, DiagnosticsError, DiagnosticsSeries,
    DivergenceReport, APPENDIX_A_MAX_N,
};
use crate::dynamics::TrajectoryRecord;
use crate::geometry::{DomainKind, DomainModel};

/// Which diagnostics to evaluate, and the cluster-detection parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisOptions {
    /// Detect the boundary cluster; when off every vortex is interior.
    pub clusters: bool,
    pub certificates: bool,
    pub appendix_monitors: bool,
    /// Distance threshold for boundary-cluster membership.
    pub eta: f64,
    /// Trailing window for cluster detection; a tenth of the span when absent.
    pub window: Option<f64>,
    /// Start time of the distance-ratio monitor.
    pub ratio_t1: f64,
    /// Seed of the kernel-constant fit used by the drift monitor.
    pub seed: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            clusters: true,
            certificates: true,
            appendix_monitors: false,
            eta: 0.01,
            window: None,
            ratio_t1: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub partition: ClusterPartition,
    pub series: DiagnosticsSeries,
    pub certificate: Option<Certificate>,
    pub divergence: Option<DivergenceReport>,
    pub appendix_a: Option<AppendixAReport>,
    pub appendix_b: Option<AppendixBReport>,
}

pub fn analyze(
    domain: &DomainModel,
    trajectory: &TrajectoryRecord,
    options: &AnalysisOptions,
) -> Result<Analysis, DiagnosticsError> {
    let partition = if options.clusters && domain.has_boundary() {
        let window = options.window.unwrap_or_else(|| default_window(trajectory));
        detect_clusters(domain, trajectory, window, options.eta)?
    } else {
        ClusterPartition::from_boundary(Vec::new(), trajectory)
    };
    let series = cluster_functionals(domain, trajectory, &partition)?;
    let a = &trajectory.intensities;
    let certificate = match domain.kind() {
        _ if !options.certificates => None,
        DomainKind::HalfPlane => Some(halfplane_certificate(domain, trajectory, &partition, a)?),
        DomainKind::UnitDisk => Some(disk_certificate(domain, trajectory, &partition, a)?),
        _ => None,
    };
    let divergence = if trajectory.len() >= 3 {
        Some(lipschitz_and_divergence_monitor(trajectory, &partition, &series)?)
    } else {
        None
    };
    let (appendix_a, appendix_b) = if options.appendix_monitors {
        let half_plane = matches!(domain.kind(), DomainKind::HalfPlane);
        let a_report = if half_plane && a.len() <= APPENDIX_A_MAX_N && trajectory.len() >= 3 {
            Some(appendix_a_monitor(domain, trajectory, options.seed)?)
        } else {
            None
        };
        let b_report = if half_plane || matches!(domain.kind(), DomainKind::UnitDisk) {
            let x0 = &trajectory.samples[0].positions;
            Some(appendix_b_checkers(domain, x0, a, trajectory, &partition, options.ratio_t1)?)
        } else {
            None
        };
        (a_report, b_report)
    } else {
        (None, None)
    };
    Ok(Analysis {
        partition,
        series,
        certificate,
        divergence,
        appendix_a,
        appendix_b,
    })
}
