//! Small numerical helpers shared across modules.

use crate::geometry::Point2;

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated accumulator for planar vectors.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedPoint {
    x1: CompensatedSum,
    x2: CompensatedSum,
}

impl CompensatedPoint {
    pub fn add(&mut self, p: Point2) {
        self.x1.add(p.x1);
        self.x2.add(p.x2);
    }

    pub fn value(&self) -> Point2 {
        Point2::new(self.x1.value(), self.x2.value())
    }
}

/// Compensated sum of a sequence of floats.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// Least-squares line `y = slope * x + intercept` with the Pearson correlation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub correlation: f64,
}

/// Ordinary least squares; `None` for fewer than two points or a degenerate abscissa.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = compensated_sum(xs[..n].iter().copied()) / nf;
    let my = compensated_sum(ys[..n].iter().copied()) / nf;
    let sxx = compensated_sum(xs[..n].iter().map(|x| (x - mx) * (x - mx)));
    let syy = compensated_sum(ys[..n].iter().map(|y| (y - my) * (y - my)));
    let sxy = compensated_sum(
        xs[..n]
            .iter()
            .zip(&ys[..n])
            .map(|(x, y)| (x - mx) * (y - my)),
    );
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let correlation = if syy > 0.0 {
        sxy / (sxx * syy).sqrt()
    } else {
        1.0
    };
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
        correlation,
    })
}

/// Derivative of a sampled series: central differences in the interior,
/// one-sided differences at the two ends.
pub fn sampled_derivative(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = ts.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|k| {
            let (a, b) = if k == 0 {
                (0, 1)
            } else if k == n - 1 {
                (n - 2, n - 1)
            } else {
                (k - 1, k + 1)
            };
            (ys[b] - ys[a]) / (ts[b] - ts[a])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let values = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(values), 2.0);
        assert_eq!(values.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn line_fit_exact_line() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 2.0).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-14);
        assert!((fit.intercept + 2.0).abs() < 1e-13);
        assert!((fit.correlation - 1.0).abs() < 1e-14);
    }

    #[test]
    fn line_fit_rejects_degenerate_abscissa() {
        assert!(fit_line(&[1.0, 1.0], &[0.0, 2.0]).is_none());
        assert!(fit_line(&[1.0], &[0.0]).is_none());
    }

    #[test]
    fn sampled_derivative_of_quadratic() {
        let ts: Vec<f64> = (0..5).map(|k| k as f64 * 0.5).collect();
        let ys: Vec<f64> = ts.iter().map(|t| t * t).collect();
        let d = sampled_derivative(&ts, &ys);
        // central differences are exact for quadratics
        for k in 1..4 {
            assert!((d[k] - 2.0 * ts[k]).abs() < 1e-12);
        }
        assert!((d[0] - 0.5).abs() < 1e-12);
    }
}
