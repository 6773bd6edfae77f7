//! Monitors for the slow-center hypothesis and the unsigned-intensity criteria.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{require_domain, ClusterPartition, DiagnosticsError};
use crate::dynamics::TrajectoryRecord;
use crate::geometry::sampling::fit_gradient_constant;
use crate::geometry::{DomainKind, DomainModel, Point2};
use crate::numeric::sampled_derivative;

/// Largest `N` for the exhaustive subset monitor.
pub const APPENDIX_A_MAX_N: usize = 10;
/// Pairs drawn when fitting the kernel constant.
const KERNEL_FIT_PAIRS: usize = 100_000;
/// Safety factor applied to the fitted kernel constant.
const KERNEL_FIT_SLACK: f64 = 1.1;
/// Bound denominators below this are reported as degenerate.
const DEGENERATE_GAP: f64 = 1e-6;
/// Absolute slack on margins, covering finite-difference noise.
const MARGIN_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixARow {
    /// 0-based indices of the subset `P`.
    pub subset: Vec<usize>,
    pub t: f64,
    /// `|dB_P/dt|` by finite differences.
    pub drift: f64,
    /// `Σ_{i∈P} Σ_{j∉P} C₀/|d_i − d_j|`
    pub bound: f64,
    pub margin: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixAReport {
    /// Fitted `sup |∇_x G|·|x − y|`.
    pub kernel_constant: f64,
    pub c0: f64,
    pub rows: Vec<AppendixARow>,
    /// Subsets with zero intensity sum, for which `B_P` is undefined.
    pub skipped_neutral: Vec<Vec<usize>>,
    pub degenerate_samples: usize,
    /// Non-degenerate rows whose margin is below `-1e-8`.
    pub violations: usize,
}

impl AppendixAReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

fn subset_of(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask & (1 << i) != 0).collect()
}

/// Drift of the weighted boundary-distance centers `B_P` against the α = 1
/// bound, with `C₀` from a seeded fit of the half-plane kernel constant.
pub fn appendix_a_monitor(
    domain: &DomainModel,
    trajectory: &TrajectoryRecord,
    seed: u64,
) -> Result<AppendixAReport, DiagnosticsError> {
    require_domain(
        domain,
        "appendix_a_monitor",
        "half-plane",
        matches!(domain.kind(), DomainKind::HalfPlane),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = fit_gradient_constant(domain, KERNEL_FIT_PAIRS, &mut rng);
    appendix_a_monitor_with_constant(trajectory, k)
}

/// As [`appendix_a_monitor`] with a given kernel constant; distances are `x₂`.
pub fn appendix_a_monitor_with_constant(
    trajectory: &TrajectoryRecord,
    kernel_constant: f64,
) -> Result<AppendixAReport, DiagnosticsError> {
    let a = &trajectory.intensities;
    let n = a.len();
    if n > APPENDIX_A_MAX_N {
        return Err(DiagnosticsError::TooManyVortices {
            op: "appendix_a_monitor",
            n,
            max: APPENDIX_A_MAX_N,
        });
    }
    if trajectory.len() < 3 {
        return Err(DiagnosticsError::InsufficientSamples {
            op: "appendix_a_monitor",
            needed: 3,
            got: trajectory.len(),
        });
    }
    let ts = trajectory.times();
    let d: Vec<Vec<f64>> = trajectory
        .samples
        .iter()
        .map(|s| s.positions.iter().map(|p| p.x2).collect())
        .collect();

    let mut sums = Vec::new();
    let mut skipped_neutral = Vec::new();
    for mask in 1u32..(1 << n) {
        let s: f64 = subset_of(mask, n).iter().map(|&i| a[i]).sum();
        if s == 0.0 {
            skipped_neutral.push(subset_of(mask, n));
        } else {
            sums.push((mask, s));
        }
    }
    let max_pair = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| (a[i] * a[j]).abs())
        .fold(0.0, f64::max);
    let min_sum = sums.iter().map(|&(_, s)| s.abs()).fold(f64::INFINITY, f64::min);
    let c0 = if min_sum.is_finite() {
        KERNEL_FIT_SLACK * kernel_constant * max_pair / min_sum
    } else {
        0.0
    };

    let mut rows = Vec::new();
    let mut degenerate_samples = 0;
    let mut violations = 0;
    for &(mask, sum) in &sums {
        let subset = subset_of(mask, n);
        let b: Vec<f64> = d
            .iter()
            .map(|dk| subset.iter().map(|&i| a[i] * dk[i]).sum::<f64>() / sum)
            .collect();
        let db = sampled_derivative(&ts, &b);
        for (k, dk) in d.iter().enumerate() {
            let mut bound = 0.0;
            let mut degenerate = false;
            for &i in &subset {
                for j in (0..n).filter(|j| mask & (1 << j) == 0) {
                    let gap = (dk[i] - dk[j]).abs();
                    degenerate |= gap < DEGENERATE_GAP;
                    bound += c0 / gap;
                }
            }
            let drift = db[k].abs();
            let margin = bound - drift;
            if degenerate {
                degenerate_samples += 1;
            } else if margin < -MARGIN_SLACK {
                violations += 1;
            }
            rows.push(AppendixARow {
                subset: subset.clone(),
                t: ts[k],
                drift,
                bound,
                margin,
                degenerate,
            });
        }
    }
    Ok(AppendixAReport {
        kernel_constant,
        c0,
        rows,
        skipped_neutral,
        degenerate_samples,
        violations,
    })
}

/// Whether all vortices can collapse with the boundary is excluded by the
/// conserved quantity `M·e₂` (half-plane) or `I` (unit disk).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct B2Check {
    /// `M(0)·e₂` for the half-plane, `I(0)` for the disk.
    pub quantity: f64,
    /// Value the quantity would take with every vortex on the boundary.
    pub reference: f64,
    pub holds: bool,
}

/// Evaluates the hypothesis on raw positions; coincident points are allowed.
pub fn b2_hypothesis(
    domain: &DomainModel,
    positions: &[Point2],
    intensities: &[f64],
) -> Result<B2Check, DiagnosticsError> {
    let (quantity, reference) = match domain.kind() {
        DomainKind::HalfPlane => (
            positions.iter().zip(intensities).map(|(p, a)| a * p.x2).sum::<f64>(),
            0.0,
        ),
        DomainKind::UnitDisk => (
            positions.iter().zip(intensities).map(|(p, a)| a * p.norm_sq()).sum::<f64>(),
            intensities.iter().sum::<f64>(),
        ),
        _ => {
            return Err(DiagnosticsError::WrongDomain {
                op: "b2_hypothesis",
                expected: "half-plane or unit-disk",
                got: domain.name(),
            })
        }
    };
    Ok(B2Check {
        quantity,
        reference,
        holds: quantity != reference,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RatioVerdict {
    /// The distance ratio stayed below the threshold: boundary collapse excluded.
    CollapseExcluded,
    /// The ratio reached the threshold; the criterion says nothing.
    Inconclusive,
    /// Empty boundary cluster, or no sample at or after `t₁`.
    NotApplicable,
}

impl std::fmt::Display for RatioVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RatioVerdict::CollapseExcluded => "cluster-size criterion excludes boundary collapse on this run",
            RatioVerdict::Inconclusive => "cluster-size criterion inconclusive",
            RatioVerdict::NotApplicable => "cluster-size criterion not applicable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixBReport {
    pub b2: B2Check,
    /// `Σ_{i∈Q} |a_i|`
    pub cluster_abs_sum: f64,
    /// `|Σ_{i∈Q} a_i|`
    pub cluster_sum_abs: f64,
    /// `1/(1 − A/a)`; `+∞` when all cluster intensities share a sign.
    pub threshold: f64,
    pub t1: f64,
    /// `max_{t ≥ t₁} max_Q d / min_Q d`
    pub max_ratio: Option<f64>,
    pub verdict: RatioVerdict,
    /// The ratio criterion is established for the half-plane only.
    pub criterion_established: bool,
}

/// Both unsigned-intensity criteria on one run.
pub fn appendix_b_checkers(
    domain: &DomainModel,
    positions: &[Point2],
    intensities: &[f64],
    trajectory: &TrajectoryRecord,
    partition: &ClusterPartition,
    t1: f64,
) -> Result<AppendixBReport, DiagnosticsError> {
    let b2 = b2_hypothesis(domain, positions, intensities)?;
    let q = &partition.boundary;
    let cluster_abs_sum: f64 = q.iter().map(|&i| intensities[i].abs()).sum();
    let cluster_sum_abs = q.iter().map(|&i| intensities[i]).sum::<f64>().abs();
    let threshold = if q.is_empty() || cluster_sum_abs >= cluster_abs_sum {
        f64::INFINITY
    } else {
        1.0 / (1.0 - cluster_sum_abs / cluster_abs_sum)
    };
    let mut max_ratio: Option<f64> = None;
    if !q.is_empty() {
        for s in trajectory.samples.iter().filter(|s| s.t >= t1) {
            let mut lo = f64::INFINITY;
            let mut hi: f64 = 0.0;
            for &i in q {
                let d = domain.boundary_distance(s.positions[i])?;
                lo = lo.min(d);
                hi = hi.max(d);
            }
            let rho = hi / lo;
            max_ratio = Some(max_ratio.map_or(rho, |m| m.max(rho)));
        }
    }
    let verdict = match max_ratio {
        None => RatioVerdict::NotApplicable,
        Some(r) if r < threshold => RatioVerdict::CollapseExcluded,
        Some(_) => RatioVerdict::Inconclusive,
    };
    Ok(AppendixBReport {
        b2,
        cluster_abs_sum,
        cluster_sum_abs,
        threshold,
        t1,
        max_ratio,
        verdict,
        criterion_established: matches!(domain.kind(), DomainKind::HalfPlane),
    })
}
