//! Conformal images of the unit disk.
//!
//! A domain is described by a polynomial map `f(z) = Σ c_k z^k` that is
//! injective on the closed unit disk. Kernels are pulled back through the
//! inverse map `T = f⁻¹`, which is evaluated by a warm-started Newton iteration.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;

use super::{GeometryError, Point2};

/// Number of boundary samples used for distance queries and validation.
const BOUNDARY_SAMPLES: usize = 512;
/// Samples used for the argument-principle check on `f'`.
const WINDING_SAMPLES: usize = 4096;
const SEED_RADII: [f64; 12] = [0.0, 0.15, 0.3, 0.45, 0.6, 0.7, 0.8, 0.87, 0.93, 0.97, 0.99, 0.998];
const SEED_ANGLES: usize = 64;
const WARM_CACHE_LEN: usize = 32;

static NEXT_MAP_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Clone, Copy)]
struct WarmEntry {
    map_id: u64,
    x: Point2,
    z: Complex64,
}

thread_local! {
    static WARM_START: RefCell<Vec<WarmEntry>> = const { RefCell::new(Vec::new()) };
}

pub(crate) fn to_complex(p: Point2) -> Complex64 {
    Complex64::new(p.x1, p.x2)
}

pub(crate) fn to_point(z: Complex64) -> Point2 {
    Point2::new(z.re, z.im)
}

/// Nearest point of the boundary curve to a query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFoot {
    /// Parameter of the foot point on the unit circle.
    pub theta: f64,
    pub point: Point2,
    pub distance: f64,
}

/// Polynomial conformal map of the closed unit disk onto a simply connected domain.
pub struct ConformalMap {
    id: u64,
    coefficients: Vec<Complex64>,
    derivative: Vec<Complex64>,
    second_derivative: Vec<Complex64>,
    newton_tol: f64,
    newton_max_iter: usize,
    boundary: Vec<Point2>,
    seeds: Vec<(Complex64, Point2)>,
    max_curvature: f64,
    /// Largest seed-to-seed spacing in the image; bounds the useful warm-start radius.
    seed_spacing: f64,
}

impl std::fmt::Debug for ConformalMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConformalMap")
            .field("coefficients", &self.coefficients)
            .field("newton_tol", &self.newton_tol)
            .field("newton_max_iter", &self.newton_max_iter)
            .field("max_curvature", &self.max_curvature)
            .finish()
    }
}

impl Clone for ConformalMap {
    fn clone(&self) -> Self {
        Self {
            id: self.id,
            coefficients: self.coefficients.clone(),
            derivative: self.derivative.clone(),
            second_derivative: self.second_derivative.clone(),
            newton_tol: self.newton_tol,
            newton_max_iter: self.newton_max_iter,
            boundary: self.boundary.clone(),
            seeds: self.seeds.clone(),
            max_curvature: self.max_curvature,
            seed_spacing: self.seed_spacing,
        }
    }
}

impl PartialEq for ConformalMap {
    fn eq(&self, other: &Self) -> bool {
        self.coefficients == other.coefficients
            && self.newton_tol == other.newton_tol
            && self.newton_max_iter == other.newton_max_iter
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn differentiate(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let orient = |a: Point2, b: Point2, c: Point2| (b - a).perp().dot(c - a);
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0)
}

impl ConformalMap {
    /// Builds and validates the map from its Taylor coefficients `c_0, c_1, …`.
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self, GeometryError> {
        Self::with_newton(coefficients, 1e-13, 50)
    }

    pub fn with_newton(
        coefficients: Vec<Complex64>,
        newton_tol: f64,
        newton_max_iter: usize,
    ) -> Result<Self, GeometryError> {
        let invalid = |msg: String| Err(GeometryError::InvalidDomain(msg));
        if coefficients.len() < 2 {
            return invalid("conformal map needs at least the constant and linear coefficients".into());
        }
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return invalid("conformal map coefficients must be finite".into());
        }
        if !(newton_tol > 0.0 && newton_tol < 1e-6) || newton_max_iter == 0 {
            return invalid(format!(
                "Newton settings out of range (tol {newton_tol}, max_iter {newton_max_iter})"
            ));
        }
        let derivative = differentiate(&coefficients);
        let second_derivative = differentiate(&derivative);

        // f' must not vanish on the closed disk: zero winding of f' along the circle
        // plus a strictly positive minimum modulus on it.
        let scale: f64 = coefficients.iter().skip(1).map(|c| c.norm()).sum();
        let mut winding = 0.0;
        let mut min_modulus = f64::INFINITY;
        let mut prev = horner(&derivative, Complex64::new(1.0, 0.0));
        for k in 1..=WINDING_SAMPLES {
            let w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / WINDING_SAMPLES as f64);
            let cur = horner(&derivative, w);
            min_modulus = min_modulus.min(cur.norm());
            winding += (cur / prev).arg();
            prev = cur;
        }
        if min_modulus <= 1e-8 * scale {
            return invalid("map derivative vanishes on the unit circle".into());
        }
        if (winding / (2.0 * PI)).round() != 0.0 {
            return invalid("map derivative has zeros inside the unit disk".into());
        }

        let boundary: Vec<Point2> = (0..BOUNDARY_SAMPLES)
            .map(|k| {
                let w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / BOUNDARY_SAMPLES as f64);
                to_point(horner(&coefficients, w))
            })
            .collect();
        let m = boundary.len();
        for i in 0..m {
            for j in (i + 2)..m {
                if i == 0 && j == m - 1 {
                    continue;
                }
                if segments_intersect(boundary[i], boundary[(i + 1) % m], boundary[j], boundary[(j + 1) % m]) {
                    return invalid("boundary curve self-intersects; map is not injective".into());
                }
            }
        }
        let signed_area: f64 = (0..m)
            .map(|i| {
                let a = boundary[i];
                let b = boundary[(i + 1) % m];
                a.x1 * b.x2 - a.x2 * b.x1
            })
            .sum::<f64>()
            * 0.5;
        if signed_area <= 0.0 {
            return invalid("boundary curve is not positively oriented".into());
        }

        let mut seeds = Vec::with_capacity(SEED_RADII.len() * SEED_ANGLES);
        for &r in &SEED_RADII {
            let count = if r == 0.0 { 1 } else { SEED_ANGLES };
            for k in 0..count {
                let z = Complex64::from_polar(r, 2.0 * PI * k as f64 / SEED_ANGLES as f64);
                seeds.push((z, to_point(horner(&coefficients, z))));
            }
        }

        let mut map = Self {
            id: NEXT_MAP_ID.fetch_add(1, Ordering::Relaxed),
            coefficients,
            derivative,
            second_derivative,
            newton_tol,
            newton_max_iter,
            boundary,
            seeds,
            max_curvature: 0.0,
            seed_spacing: 0.0,
        };
        map.max_curvature = (0..WINDING_SAMPLES)
            .map(|k| map.boundary_curvature(2.0 * PI * k as f64 / WINDING_SAMPLES as f64))
            .fold(f64::NEG_INFINITY, f64::max);
        let max_derivative = (0..WINDING_SAMPLES)
            .map(|k| {
                let w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / WINDING_SAMPLES as f64);
                map.derivative_at(w).norm()
            })
            .fold(0.0, f64::max);
        map.seed_spacing = max_derivative * (2.0 * PI / SEED_ANGLES as f64).max(0.1);
        Ok(map)
    }

    /// The identity map, whose image is the unit disk itself.
    pub fn identity() -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])
            .expect("identity map is valid")
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn newton_tol(&self) -> f64 {
        self.newton_tol
    }

    pub fn newton_max_iter(&self) -> usize {
        self.newton_max_iter
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        horner(&self.coefficients, z)
    }

    pub fn derivative_at(&self, z: Complex64) -> Complex64 {
        horner(&self.derivative, z)
    }

    pub fn second_derivative_at(&self, z: Complex64) -> Complex64 {
        horner(&self.second_derivative, z)
    }

    pub fn boundary_point(&self, theta: f64) -> Point2 {
        to_point(self.eval(Complex64::from_polar(1.0, theta)))
    }

    /// Signed curvature of the boundary curve at parameter `theta`
    /// (positive where the domain is locally convex).
    pub fn boundary_curvature(&self, theta: f64) -> f64 {
        let w = Complex64::from_polar(1.0, theta);
        let d1 = self.derivative_at(w);
        let d2 = self.second_derivative_at(w);
        (1.0 + (w * d2 / d1).re) / d1.norm()
    }

    /// Outward unit normal of the boundary at parameter `theta`.
    pub fn boundary_normal(&self, theta: f64) -> Point2 {
        let w = Complex64::from_polar(1.0, theta);
        let tangent = Complex64::i() * w * self.derivative_at(w);
        to_point(-Complex64::i() * tangent / tangent.norm())
    }

    pub fn max_curvature(&self) -> f64 {
        self.max_curvature
    }

    /// Clears this thread's warm-start cache for every map. Inverse evaluations
    /// depend on the seed only through the last few bits, so callers that need
    /// bit-reproducible output reset the cache before a run.
    pub fn reset_warm_start() {
        WARM_START.with(|cache| cache.borrow_mut().clear());
    }

    fn warm_seed(&self, x: Point2) -> Option<Complex64> {
        WARM_START.with(|cache| {
            cache
                .borrow()
                .iter()
                .filter(|e| e.map_id == self.id)
                .map(|e| (e.x.distance(x), e.z))
                .filter(|(d, _)| *d <= self.seed_spacing)
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(_, z)| z)
        })
    }

    fn remember(&self, x: Point2, z: Complex64) {
        WARM_START.with(|cache| {
            let mut cache = cache.borrow_mut();
            if cache.len() >= WARM_CACHE_LEN {
                cache.remove(0);
            }
            cache.push(WarmEntry {
                map_id: self.id,
                x,
                z,
            });
        });
    }

    fn newton(&self, x: Complex64, mut z: Complex64) -> Option<Complex64> {
        let scale = 1.0 + x.norm();
        for _ in 0..self.newton_max_iter {
            let residual = self.eval(z) - x;
            let dz = residual / self.derivative_at(z);
            if !dz.re.is_finite() || !dz.im.is_finite() {
                return None;
            }
            let mut step = 1.0;
            let mut next = z - dz;
            while next.norm() >= 1.0 {
                step *= 0.5;
                if step < 1e-8 {
                    return None;
                }
                next = z - dz * step;
            }
            z = next;
            if (dz * step).norm() <= self.newton_tol || residual.norm() <= self.newton_tol * 1e-3 * scale {
                // one polishing step at quadratic convergence
                let polish = z - (self.eval(z) - x) / self.derivative_at(z);
                if polish.norm() < 1.0 {
                    z = polish;
                }
                let final_residual = (self.eval(z) - x).norm();
                return (final_residual <= self.newton_tol * scale).then_some(z);
            }
        }
        None
    }

    /// Solves `f(z) = x` for `z` in the open unit disk.
    pub fn inverse(&self, x: Point2) -> Result<Complex64, GeometryError> {
        if !x.is_finite() {
            return Err(GeometryError::NonFinite(x));
        }
        let target = to_complex(x);
        if let Some(seed) = self.warm_seed(x) {
            if let Some(z) = self.newton(target, seed) {
                self.remember(x, z);
                return Ok(z);
            }
        }
        let mut ranked: Vec<(f64, Complex64)> = self
            .seeds
            .iter()
            .map(|(z, p)| (p.distance(x), *z))
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(_, seed) in ranked.iter().take(6) {
            if let Some(z) = self.newton(target, seed) {
                self.remember(x, z);
                return Ok(z);
            }
        }
        Err(GeometryError::OutsideDomain(x))
    }

    /// Derivative of the squared-distance objective along the boundary parameter,
    /// returned as (first, second) derivative of `½|f(e^{iθ}) − x|²`.
    fn foot_derivatives(&self, theta: f64, x: Complex64) -> (f64, f64) {
        let w = Complex64::from_polar(1.0, theta);
        let f = self.eval(w);
        let d1 = self.derivative_at(w);
        let d2 = self.second_derivative_at(w);
        let g = Complex64::i() * w * d1;
        let gg = -w * d1 - w * w * d2;
        let r = f - x;
        let first = (r.conj() * g).re;
        let second = g.norm_sqr() + (r.conj() * gg).re;
        (first, second)
    }

    fn refine_foot(&self, x: Complex64, theta0: f64) -> BoundaryFoot {
        let h = 2.0 * PI / BOUNDARY_SAMPLES as f64;
        let mut lo = theta0 - h;
        let mut hi = theta0 + h;
        let mut theta = theta0;
        let (mut f_lo, _) = self.foot_derivatives(lo, x);
        let (f_hi, _) = self.foot_derivatives(hi, x);
        let bracketed = f_lo <= 0.0 && f_hi >= 0.0;
        for _ in 0..100 {
            let (d1, d2) = self.foot_derivatives(theta, x);
            if d1 == 0.0 {
                break;
            }
            if bracketed {
                if (d1 < 0.0) == (f_lo < 0.0) {
                    lo = theta;
                    f_lo = d1;
                } else {
                    hi = theta;
                }
            }
            let mut next = if d2 > 0.0 { theta - d1 / d2 } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = if bracketed {
                    0.5 * (lo + hi)
                } else if d1 > 0.0 {
                    theta - 0.25 * h
                } else {
                    theta + 0.25 * h
                };
            }
            let step = (next - theta).abs();
            theta = next;
            if step <= 1e-15 * (1.0 + theta.abs()) || (bracketed && hi - lo <= 1e-15) {
                break;
            }
        }
        let point = to_point(self.eval(Complex64::from_polar(1.0, theta)));
        BoundaryFoot {
            theta: theta.rem_euclid(2.0 * PI),
            point,
            distance: point.distance(to_point(x)),
        }
    }

    /// Nearest boundary point of `x` (global search over sampled local minima,
    /// each refined by safeguarded Newton on the boundary parameter).
    pub fn nearest_boundary(&self, x: Point2) -> BoundaryFoot {
        let m = self.boundary.len();
        let d2: Vec<f64> = self.boundary.iter().map(|b| (*b - x).norm_sq()).collect();
        let mut minima: Vec<(f64, usize)> = (0..m)
            .filter(|&k| d2[k] <= d2[(k + m - 1) % m] && d2[k] <= d2[(k + 1) % m])
            .map(|k| (d2[k], k))
            .collect();
        minima.sort_by(|a, b| a.0.total_cmp(&b.0));
        let target = to_complex(x);
        minima
            .iter()
            .take(4)
            .map(|&(_, k)| self.refine_foot(target, 2.0 * PI * k as f64 / m as f64))
            .min_by(|a, b| a.distance.total_cmp(&b.distance))
            .expect("boundary has at least one sampled minimum")
    }

    /// Largest band width for which every sampled inward normal segment keeps
    /// its foot point as the nearest boundary point, capped by the curvature radius.
    pub fn default_band(&self) -> f64 {
        0.5 / self.max_curvature.max(1e-12)
    }

    /// Checks single-valuedness of the boundary projection on `{dist ≤ band}`.
    pub fn validate_band(&self, band: f64) -> Result<(), GeometryError> {
        if !(band > 0.0) || band * self.max_curvature >= 1.0 {
            return Err(GeometryError::InvalidDomain(format!(
                "band width {band} exceeds the smallest radius of curvature {}",
                1.0 / self.max_curvature
            )));
        }
        let stride = 8;
        for k in (0..BOUNDARY_SAMPLES).step_by(stride) {
            let theta = 2.0 * PI * k as f64 / BOUNDARY_SAMPLES as f64;
            let foot = self.boundary_point(theta);
            let normal = self.boundary_normal(theta);
            for s in [0.5 * band, band] {
                let x = foot - normal * s;
                let found = self.nearest_boundary(x);
                if (found.distance - s).abs() > 1e-9 * (1.0 + s) || found.point.distance(foot) > 1e-6 {
                    return Err(GeometryError::InvalidDomain(format!(
                        "boundary projection is not single-valued at depth {s} below boundary parameter {theta:.6}"
                    )));
                }
            }
        }
        Ok(())
    }
}
