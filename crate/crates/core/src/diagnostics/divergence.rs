//! Lipschitz bound on `D_Γ` and logarithmic growth of `L_Γ` near collapse.

use serde::{Deserialize, Serialize};

use super::{ClusterPartition, DiagnosticsError, DiagnosticsSeries};
use crate::dynamics::TrajectoryRecord;
use crate::numeric::{fit_line, sampled_derivative, LineFit};

/// Minimum number of samples in the fitting window.
const MIN_FIT_SAMPLES: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    /// `max |ΔD_Γ/Δt|` over the samples.
    pub max_d_gamma_slope: f64,
    /// Zero of the least-squares line through `D_Γ` on the final tenth of samples.
    pub t_hat: Option<f64>,
    /// `L_Γ ≈ slope·(−ln(T̂ − t)) + intercept` on the same window.
    pub log_fit: Option<LineFit>,
    pub window_samples: usize,
}

/// Indices of the final tenth of the samples (at least three).
pub(crate) fn final_decade(len: usize) -> std::ops::Range<usize> {
    let count = (len / 10).max(MIN_FIT_SAMPLES).min(len);
    len - count..len
}

pub fn lipschitz_and_divergence_monitor(
    trajectory: &TrajectoryRecord,
    partition: &ClusterPartition,
    functionals: &DiagnosticsSeries,
) -> Result<DivergenceReport, DiagnosticsError> {
    let len = functionals.samples.len();
    if len < MIN_FIT_SAMPLES || trajectory.len() != len {
        return Err(DiagnosticsError::InsufficientSamples {
            op: "lipschitz_and_divergence_monitor",
            needed: MIN_FIT_SAMPLES,
            got: len.min(trajectory.len()),
        });
    }
    let ts = functionals.times();
    let d_gamma = functionals.column(|s| s.d_gamma);
    let l_gamma = functionals.column(|s| s.l_gamma);
    let max_d_gamma_slope = sampled_derivative(&ts, &d_gamma)
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max);

    let window = final_decade(len);
    let mut t_hat = None;
    let mut log_fit = None;
    if !partition.boundary.is_empty() {
        if let Some(line) = fit_line(&ts[window.clone()], &d_gamma[window.clone()]) {
            let t_last = ts[len - 1];
            let zero = -line.intercept / line.slope;
            if line.slope < 0.0 && zero.is_finite() && zero > t_last {
                t_hat = Some(zero);
                let xs: Vec<f64> = ts[window.clone()].iter().map(|t| -(zero - t).ln()).collect();
                log_fit = fit_line(&xs, &l_gamma[window.clone()]);
            }
        }
    }
    Ok(DivergenceReport {
        max_d_gamma_slope,
        t_hat,
        log_fit,
        window_samples: window.len(),
    })
}
