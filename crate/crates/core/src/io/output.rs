//! CSV and JSON writers. Vortex indices are 1-based in every output.

use serde::Serialize;

use crate::diagnostics::{Analysis, AppendixAReport, AppendixBReport};
use crate::dynamics::{StepStats, Termination, TrajectoryRecord};
use crate::scenarios::Verdict;

use super::RunConfig;

/// Shortest decimal text that parses back to the same `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:?}")
}

fn to_csv(header: Vec<String>, rows: impl Iterator<Item = Vec<f64>>) -> Result<Vec<u8>, csv::Error> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(&header)?;
    for row in rows {
        writer.write_record(row.into_iter().map(format_f64))?;
    }
    writer.flush()?;
    Ok(writer.into_inner().expect("flushed in-memory writer"))
}

/// Columns `t, x1_1, x1_2, …, xN_1, xN_2`.
pub fn trajectory_csv(trajectory: &TrajectoryRecord) -> Result<Vec<u8>, csv::Error> {
    let n = trajectory.vortex_count();
    let mut header = vec!["t".to_string()];
    for i in 1..=n {
        header.push(format!("x{i}_1"));
        header.push(format!("x{i}_2"));
    }
    let rows = trajectory.samples.iter().map(|s| {
        let mut row = Vec::with_capacity(1 + 2 * n);
        row.push(s.t);
        row.extend(s.positions.iter().flat_map(|p| [p.x1, p.x2]));
        row
    });
    to_csv(header, rows)
}

pub const DIAGNOSTICS_COLUMNS: [&str; 15] = [
    "t",
    "H",
    "M1",
    "M2",
    "I",
    "min_pair_dist",
    "min_boundary_dist",
    "M_Q2",
    "I_Q",
    "D_gamma",
    "L_gamma",
    "certificate_value",
    "certificate_floor",
    "certificate_margin",
    "J",
];

/// [`DIAGNOSTICS_COLUMNS`] followed by `d1 … dN` and `l1 … lN`. Quantities
/// that do not apply are `NaN`.
pub fn diagnostics_csv(analysis: &Analysis) -> Result<Vec<u8>, csv::Error> {
    let n = analysis.series.samples.first().map_or(0, |s| s.distances.len());
    let mut header: Vec<String> = DIAGNOSTICS_COLUMNS.iter().map(|c| c.to_string()).collect();
    header.extend((1..=n).map(|i| format!("d{i}")));
    header.extend((1..=n).map(|i| format!("l{i}")));
    let points = analysis.certificate.as_ref().map(|c| c.points.as_slice()).unwrap_or(&[]);
    let rows = analysis.series.samples.iter().enumerate().map(|(k, s)| {
        let cert = points.get(k).filter(|p| p.t == s.t);
        let mut row = vec![
            s.t,
            s.hamiltonian,
            s.center_of_mass.x1,
            s.center_of_mass.x2,
            s.moment_of_inertia,
            s.min_pair_distance,
            s.min_boundary_distance,
            s.cluster_center.x2,
            s.cluster_moment,
            s.d_gamma,
            s.l_gamma,
            cert.map_or(f64::NAN, |p| p.value),
            cert.map_or(f64::NAN, |p| p.floor),
            cert.map_or(f64::NAN, |p| p.margin),
            s.disk_j.unwrap_or(f64::NAN),
        ];
        row.extend(&s.distances);
        row.extend(&s.displacements);
        row
    });
    to_csv(header, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TerminationRecord {
    pub kind: &'static str,
    pub t: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
}

impl From<Termination> for TerminationRecord {
    fn from(t: Termination) -> Self {
        let (i, j) = match t {
            Termination::PairCollapse { i, j, .. } => (Some(i + 1), Some(j + 1)),
            Termination::BoundaryCollapse { i, .. } => (Some(i + 1), None),
            _ => (None, None),
        };
        Self {
            kind: t.label(),
            t: t.time(),
            i,
            j,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionRecord {
    pub boundary: Vec<usize>,
    pub interior: Vec<usize>,
    /// `null` when either cluster is empty.
    pub delta_hat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateRecord {
    pub constant: f64,
    pub applicable: bool,
    pub min_margin: Option<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceRecord {
    pub max_d_gamma_slope: f64,
    pub t_hat: Option<f64>,
    pub log_fit_slope: Option<f64>,
    pub log_fit_correlation: Option<f64>,
    pub window_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendixARecord {
    pub kernel_constant: f64,
    pub c0: f64,
    pub rows: usize,
    pub min_margin: Option<f64>,
    pub degenerate_samples: usize,
    pub violations: usize,
    pub skipped_neutral: Vec<Vec<usize>>,
}

impl From<&AppendixAReport> for AppendixARecord {
    fn from(r: &AppendixAReport) -> Self {
        Self {
            kernel_constant: r.kernel_constant,
            c0: r.c0,
            rows: r.rows.len(),
            min_margin: r
                .rows
                .iter()
                .filter(|row| !row.degenerate)
                .map(|row| row.margin)
                .reduce(f64::min),
            degenerate_samples: r.degenerate_samples,
            violations: r.violations,
            skipped_neutral: r.skipped_neutral.iter().map(|s| one_based(s)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendixBRecord {
    pub b2_quantity: f64,
    pub b2_reference: f64,
    pub b2_holds: bool,
    pub cluster_abs_sum: f64,
    pub cluster_sum_abs: f64,
    /// `null` stands for `+∞`.
    pub threshold: Option<f64>,
    pub t1: f64,
    pub max_ratio: Option<f64>,
    pub verdict: String,
    pub criterion_established: bool,
}

impl From<&AppendixBReport> for AppendixBRecord {
    fn from(r: &AppendixBReport) -> Self {
        Self {
            b2_quantity: r.b2.quantity,
            b2_reference: r.b2.reference,
            b2_holds: r.b2.holds,
            cluster_abs_sum: r.cluster_abs_sum,
            cluster_sum_abs: r.cluster_sum_abs,
            threshold: finite(r.threshold),
            t1: r.t1,
            max_ratio: r.max_ratio,
            verdict: r.verdict.to_string(),
            criterion_established: r.criterion_established,
        }
    }
}

fn one_based(indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|i| i + 1).collect()
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Everything about a run except the sampled series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub version: &'static str,
    pub name: Option<String>,
    pub domain: &'static str,
    pub vortices: usize,
    pub termination: TerminationRecord,
    /// Time of the collapse event, if one fired.
    pub event_time: Option<f64>,
    /// Collapse time extrapolated from the event's local behaviour.
    pub t_hat: Option<f64>,
    pub samples: usize,
    pub stats: StepStats,
    pub partition: PartitionRecord,
    pub certificate: Option<CertificateRecord>,
    pub divergence: Option<DivergenceRecord>,
    pub appendix_a: Option<AppendixARecord>,
    pub appendix_b: Option<AppendixBRecord>,
    pub verdict: Option<Verdict>,
    pub config: RunConfig,
}

impl Metadata {
    pub fn new(
        config: &RunConfig,
        domain: &'static str,
        trajectory: &TrajectoryRecord,
        analysis: &Analysis,
        verdict: Option<Verdict>,
        certificate_slack: f64,
    ) -> Self {
        let termination = trajectory.termination;
        Self {
            version: env!("CARGO_PKG_VERSION"),
            name: config.name.clone(),
            domain,
            vortices: trajectory.vortex_count(),
            termination: termination.into(),
            event_time: termination.is_collapse().then(|| termination.time()),
            t_hat: trajectory.collapse_estimate,
            samples: trajectory.len(),
            stats: trajectory.stats,
            partition: PartitionRecord {
                boundary: one_based(&analysis.partition.boundary),
                interior: one_based(&analysis.partition.interior),
                delta_hat: finite(analysis.partition.delta_hat),
            },
            certificate: analysis.certificate.as_ref().map(|c| CertificateRecord {
                constant: c.constant,
                applicable: c.applicable,
                min_margin: c.min_margin(),
                holds: c.holds(certificate_slack),
            }),
            divergence: analysis.divergence.as_ref().map(|d| DivergenceRecord {
                max_d_gamma_slope: d.max_d_gamma_slope,
                t_hat: d.t_hat,
                log_fit_slope: d.log_fit.map(|f| f.slope),
                log_fit_correlation: d.log_fit.map(|f| f.correlation),
                window_samples: d.window_samples,
            }),
            appendix_a: analysis.appendix_a.as_ref().map(Into::into),
            appendix_b: analysis.appendix_b.as_ref().map(Into::into),
            verdict,
            config: config.clone(),
        }
    }
}
