//! Dormand–Prince 5(4) with PI step control, dense output and event location.

use super::{DynamicsError, IntegratorSettings, StepStats, Termination, TrajectoryRecord, TrajectorySample};
use crate::geometry::Point2;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.1;
const FAC_MAX: f64 = 5.0;
/// Step shrink factor after a failed right-hand-side evaluation.
const FAILURE_SHRINK: f64 = 0.25;
/// Width of the final event bracket.
const EVENT_TIME_TOL: f64 = 1e-10;

/// Quantity watched for collapse events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Monitor {
    Pair(usize, usize),
    Boundary(usize),
}

/// Autonomous first-order system in the vortex coordinates
/// `y = (x_1·e₁, x_1·e₂, x_2·e₁, …)`.
pub(crate) trait VortexSystem {
    fn rhs(&self, y: &[f64], dy: &mut [f64]) -> Result<(), DynamicsError>;
    fn monitors(&self) -> &[Monitor];
    /// Distance watched by a monitor, or `None` when the state is not admissible.
    fn monitor_distance(&self, monitor: Monitor, y: &[f64]) -> Option<f64>;
}

pub(crate) fn positions_of(y: &[f64]) -> Vec<Point2> {
    y.chunks_exact(2).map(|c| Point2::new(c[0], c[1])).collect()
}

struct Dense {
    t0: f64,
    h: f64,
    r: [Vec<f64>; 5],
}

impl Dense {
    fn eval(&self, t: f64, out: &mut [f64]) {
        let theta = if self.h > 0.0 { (t - self.t0) / self.h } else { 0.0 };
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.r;
        for i in 0..out.len() {
            out[i] = r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
        }
    }
}

struct Stepper<'a, S: VortexSystem> {
    system: &'a S,
    settings: &'a IntegratorSettings,
    stats: StepStats,
    samples: Vec<TrajectorySample>,
    next_grid: u64,
}

fn event_eps(settings: &IntegratorSettings, monitor: Monitor) -> f64 {
    match monitor {
        Monitor::Pair(..) => settings.pair_collapse_eps,
        Monitor::Boundary(_) => settings.boundary_collapse_eps,
    }
}

fn termination_for(monitor: Monitor, t: f64) -> Termination {
    match monitor {
        Monitor::Pair(i, j) => Termination::PairCollapse { i, j, t },
        Monitor::Boundary(i) => Termination::BoundaryCollapse { i, t },
    }
}

impl<S: VortexSystem> Stepper<'_, S> {
    fn margin(&self, monitor: Monitor, y: &[f64]) -> f64 {
        match self.system.monitor_distance(monitor, y) {
            Some(d) => d - event_eps(self.settings, monitor),
            None => f64::NEG_INFINITY,
        }
    }

    fn grid_time(&self, k: u64) -> f64 {
        k as f64 * self.settings.sample_stride
    }

    fn grid_limit(&self) -> f64 {
        let t_end = self.settings.t_end;
        t_end - 1e-12 * t_end.max(1.0)
    }

    fn push(&mut self, t: f64, y: &[f64]) {
        if self.samples.last().is_none_or(|s| s.t < t) {
            self.samples.push(TrajectorySample {
                t,
                positions: positions_of(y),
            });
        }
    }

    /// Emits grid samples in `(t0, upto]` (strictly before `upto` when `open`).
    fn emit_grid(&mut self, dense: &Dense, upto: f64, open: bool) {
        let mut buf = vec![0.0; dense.r[0].len()];
        loop {
            let tk = self.grid_time(self.next_grid);
            if tk >= self.grid_limit() || tk > upto || (open && tk >= upto) {
                break;
            }
            dense.eval(tk, &mut buf);
            self.push(tk, &buf);
            self.next_grid += 1;
        }
    }

    /// Bisection on the dense output for the first crossing of `monitor` in the step.
    fn locate(&self, dense: &Dense, monitor: Monitor) -> f64 {
        let mut buf = vec![0.0; dense.r[0].len()];
        let mut lo = dense.t0;
        let mut hi = dense.t0 + dense.h;
        while hi - lo > EVENT_TIME_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            dense.eval(mid, &mut buf);
            if self.margin(monitor, &buf) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Linear extrapolation to zero of `d²` (pair) or `d` (boundary) from the
    /// event time and the midpoint between the step start and the event.
    fn extrapolate(&self, dense: &Dense, monitor: Monitor, t_event: f64) -> Option<f64> {
        let mut buf = vec![0.0; dense.r[0].len()];
        let t_mid = t_event - 0.5 * (t_event - dense.t0);
        let q = |buf: &[f64]| {
            let d = self.system.monitor_distance(monitor, buf)?;
            Some(match monitor {
                Monitor::Pair(..) => d * d,
                Monitor::Boundary(_) => d,
            })
        };
        dense.eval(t_event, &mut buf);
        let q_e = q(&buf)?;
        dense.eval(t_mid, &mut buf);
        let q_m = q(&buf)?;
        (q_m > q_e && t_event > t_mid).then(|| t_event + q_e * (t_event - t_mid) / (q_m - q_e))
    }
}

pub(crate) fn run<S: VortexSystem>(
    system: &S,
    y0: &[f64],
    intensities: &[f64],
    settings: &IntegratorSettings,
) -> Result<TrajectoryRecord, DynamicsError> {
    settings.validate()?;
    let n = y0.len();
    let mut st = Stepper {
        system,
        settings,
        stats: StepStats::default(),
        samples: Vec::new(),
        next_grid: 1,
    };
    let finish = |st: Stepper<'_, S>, termination, estimate| TrajectoryRecord {
        intensities: intensities.to_vec(),
        samples: st.samples,
        termination,
        stats: st.stats,
        collapse_estimate: estimate,
    };

    st.push(0.0, y0);
    if let Some(&m) = system.monitors().iter().find(|&&m| st.margin(m, y0) <= 0.0) {
        return Ok(finish(st, termination_for(m, 0.0), None));
    }
    let t_end = settings.t_end;
    if t_end == 0.0 {
        return Ok(finish(st, Termination::ReachedTEnd { t: 0.0 }, None));
    }

    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    system.rhs(&y, &mut k1)?;
    st.stats.rhs_evals += 1;
    let mut k = vec![vec![0.0; n]; 6];
    let mut ys = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut t = 0.0;
    let mut h = settings.initial_step.min(settings.max_step);
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;

    loop {
        if h < settings.min_step {
            return Ok(finish(st, Termination::StepUnderflow { t }, None));
        }
        let remaining = t_end - t;
        let last = h >= remaining;
        let h_eff = if last { remaining } else { h };

        // stages 2..7; a failed evaluation rejects the step
        let stages_ok = (|| -> Result<(), DynamicsError> {
            for i in 0..n {
                ys[i] = y[i] + h_eff * A21 * k1[i];
            }
            system.rhs(&ys, &mut k[1])?;
            for i in 0..n {
                ys[i] = y[i] + h_eff * (A31 * k1[i] + A32 * k[1][i]);
            }
            system.rhs(&ys, &mut k[2])?;
            for i in 0..n {
                ys[i] = y[i] + h_eff * (A41 * k1[i] + A42 * k[1][i] + A43 * k[2][i]);
            }
            system.rhs(&ys, &mut k[3])?;
            for i in 0..n {
                ys[i] = y[i] + h_eff * (A51 * k1[i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
            }
            system.rhs(&ys, &mut k[4])?;
            for i in 0..n {
                ys[i] = y[i]
                    + h_eff * (A61 * k1[i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
            }
            system.rhs(&ys, &mut k[5])?;
            for i in 0..n {
                y_new[i] = y[i]
                    + h_eff * (A71 * k1[i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
            }
            system.rhs(&y_new, &mut k7)?;
            Ok(())
        })();
        st.stats.rhs_evals += 6;
        if stages_ok.is_err() {
            st.stats.rejected += 1;
            h *= FAILURE_SHRINK;
            last_rejected = true;
            continue;
        }

        let mut err: f64 = 0.0;
        for i in 0..n {
            let e = h_eff
                * (E1 * k1[i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k7[i]);
            let sc = settings.abs_tol + settings.rel_tol * y[i].abs().max(y_new[i].abs());
            err = err.max(e.abs() / sc);
        }
        if !err.is_finite() {
            st.stats.rejected += 1;
            h *= FAILURE_SHRINK;
            last_rejected = true;
            continue;
        }

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            st.stats.accepted += 1;
            let t_new = if last { t_end } else { t + h_eff };
            let mut r: [Vec<f64>; 5] = Default::default();
            r[0] = y.clone();
            r[1] = (0..n).map(|i| y_new[i] - y[i]).collect();
            r[2] = (0..n).map(|i| h_eff * k1[i] - r[1][i]).collect();
            r[3] = (0..n).map(|i| r[1][i] - h_eff * k7[i] - r[2][i]).collect();
            r[4] = (0..n)
                .map(|i| {
                    h_eff
                        * (D1 * k1[i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k7[i])
                })
                .collect();
            let dense = Dense { t0: t, h: t_new - t, r };

            let mut event: Option<(f64, Monitor)> = None;
            for &m in system.monitors() {
                if st.margin(m, &y_new) <= 0.0 {
                    let te = st.locate(&dense, m);
                    if event.is_none_or(|(best, _)| te < best) {
                        event = Some((te, m));
                    }
                }
            }
            if let Some((te, m)) = event {
                st.emit_grid(&dense, te, true);
                let mut buf = vec![0.0; n];
                dense.eval(te, &mut buf);
                st.push(te, &buf);
                let estimate = st.extrapolate(&dense, m, te);
                return Ok(finish(st, termination_for(m, te), estimate));
            }

            st.emit_grid(&dense, t_new, false);
            if last {
                st.push(t_end, &y_new);
                return Ok(finish(st, Termination::ReachedTEnd { t: t_end }, None));
            }
            if settings.record_accepted_steps {
                st.push(t_new, &y_new);
            }

            let mut fac = fac11 / fac_old.powf(BETA);
            fac = (fac / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h_eff / fac;
            fac_old = err.max(1e-4);
            if last_rejected {
                h_new = h_new.min(h_eff);
            }
            last_rejected = false;
            h = h_new.min(settings.max_step);
            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
        } else {
            st.stats.rejected += 1;
            h = h_eff / (fac11 / SAFE).min(1.0 / FAC_MIN);
            last_rejected = true;
        }
    }
}
