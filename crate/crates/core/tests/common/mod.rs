//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vortex_core::geometry::sampling::sample_interior;
use vortex_core::geometry::Complex64;
use vortex_core::{ConformalMap, DomainModel, Point2, VortexConfiguration};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn p(x1: f64, x2: f64) -> Point2 {
    Point2::new(x1, x2)
}

/// Image-charge form `(1/2π) ln(|x − y| / |x − ȳ|)`.
pub fn green_half_plane(x: Point2, y: Point2) -> f64 {
    let image = p(y.x1, -y.x2);
    ((x - y).norm() / (x - image).norm()).ln() / (2.0 * PI)
}

/// Inversion form `(1/2π) ln(|x − y| / (|x − y*| |y|))` with `y* = y/|y|²`.
pub fn green_disk(x: Point2, y: Point2) -> f64 {
    let r2 = y.norm_sq();
    if r2 == 0.0 {
        return x.norm().ln() / (2.0 * PI);
    }
    let star = y / r2;
    ((x - y).norm() / ((x - star).norm() * r2.sqrt())).ln() / (2.0 * PI)
}

pub fn robin_half_plane(x: Point2) -> f64 {
    -(2.0 * x.x2).ln() / (2.0 * PI)
}

pub fn robin_disk(x: Point2) -> f64 {
    -(1.0 - x.norm_sq()).ln() / (2.0 * PI)
}

/// Fourth-order central difference gradient of `f` at `x` with step `h`.
pub fn fd_gradient(f: impl Fn(Point2) -> f64, x: Point2, h: f64) -> Point2 {
    let d = |e: Point2| (8.0 * (f(x + e * h) - f(x - e * h)) - (f(x + e * 2.0 * h) - f(x - e * 2.0 * h))) / (12.0 * h);
    p(d(Point2::E1), d(Point2::E2))
}

/// `|a − b| / max(|b|, floor)`
pub fn rel_err(a: Point2, b: Point2, floor: f64) -> f64 {
    (a - b).norm() / b.norm().max(floor)
}

/// Map `z + 0.2 z²`, a smooth non-convex perturbation of the disk.
pub fn test_map() -> ConformalMap {
    ConformalMap::new(vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.2, 0.0),
    ])
    .unwrap()
}

pub fn all_domains() -> Vec<DomainModel> {
    vec![
        DomainModel::plane(),
        DomainModel::half_plane(),
        DomainModel::unit_disk(),
        DomainModel::conformal(test_map()).unwrap(),
    ]
}

/// `n` interior vortices with intensities in `[0.5, 1.5]`, pairwise at least
/// `min_sep` apart and at least `min_dist` from the boundary.
pub fn random_positive_config(
    domain: &DomainModel,
    n: usize,
    min_sep: f64,
    min_dist: f64,
    rng: &mut ChaCha8Rng,
) -> VortexConfiguration {
    let mut positions: Vec<Point2> = Vec::with_capacity(n);
    while positions.len() < n {
        let x = sample_interior(domain, rng);
        let far_from_wall = domain.boundary_distance(x).unwrap() >= min_dist;
        let bounded = x.norm() < 3.0;
        if far_from_wall && bounded && positions.iter().all(|y| y.distance(x) >= min_sep) {
            positions.push(x);
        }
    }
    let intensities = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    VortexConfiguration::new(positions, intensities).unwrap()
}

/// Largest relative deviation of `values` from the first entry.
pub fn max_rel_drift(values: &[f64]) -> f64 {
    let v0 = values[0];
    let scale = v0.abs().max(1e-300);
    values.iter().map(|v| (v - v0).abs() / scale).fold(0.0, f64::max)
}
