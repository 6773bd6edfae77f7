//! Random interior and band points, and empirical fits of the existential
//! kernel constants.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use super::conformal::to_point;
use super::{DomainKind, DomainModel, Point2};

/// Log-uniform value in `[10^lo, 10^hi]`.
fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.gen_range(lo..hi))
}

/// Random interior point; boundary distances are spread over several decades.
pub fn sample_interior<R: Rng + ?Sized>(domain: &DomainModel, rng: &mut R) -> Point2 {
    match domain.kind() {
        DomainKind::Plane => Point2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
        DomainKind::HalfPlane => Point2::new(rng.gen_range(-2.0..2.0), log_uniform(rng, -4.0, 0.5)),
        DomainKind::UnitDisk => {
            let r = 1.0 - log_uniform(rng, -4.0, 0.0);
            let phi = rng.gen_range(0.0..2.0 * PI);
            Point2::new(r * phi.cos(), r * phi.sin())
        }
        DomainKind::ConformalDisk(map) => {
            let r = 1.0 - log_uniform(rng, -3.0, 0.0);
            let z = Complex64::from_polar(r, rng.gen_range(0.0..2.0 * PI));
            to_point(map.eval(z))
        }
    }
}

/// Random point of the projection band `{0 < dist ≤ band}`.
pub fn sample_band<R: Rng + ?Sized>(domain: &DomainModel, rng: &mut R) -> Option<Point2> {
    let depth = domain.band() * rng.gen_range(1e-3..1.0);
    match domain.kind() {
        DomainKind::Plane => None,
        DomainKind::HalfPlane => Some(Point2::new(rng.gen_range(-2.0..2.0), depth)),
        DomainKind::UnitDisk => {
            let phi = rng.gen_range(0.0..2.0 * PI);
            let r = 1.0 - depth;
            Some(Point2::new(r * phi.cos(), r * phi.sin()))
        }
        DomainKind::ConformalDisk(map) => {
            let theta = rng.gen_range(0.0..2.0 * PI);
            Some(map.boundary_point(theta) - map.boundary_normal(theta) * depth)
        }
    }
}

/// `max |∇_x G(x, y)|·|x − y|` over `pairs` random interior pairs.
pub fn fit_gradient_constant<R: Rng + ?Sized>(domain: &DomainModel, pairs: usize, rng: &mut R) -> f64 {
    let mut best: f64 = 0.0;
    for _ in 0..pairs {
        let x = sample_interior(domain, rng);
        let y = sample_interior(domain, rng);
        if let Ok(g) = domain.grad_green_x(x, y) {
            best = best.max(g.norm() * x.distance(y));
        }
    }
    best
}

/// `max |∇dist·∇^⊥γ̃|` over `samples` random band points.
pub fn fit_marie_constant<R: Rng + ?Sized>(domain: &DomainModel, samples: usize, rng: &mut R) -> f64 {
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let Some(x) = sample_band(domain, rng) else {
            return 0.0;
        };
        if let (Ok(g), Ok(r)) = (domain.distance_gradient(x), domain.grad_robin(x)) {
            best = best.max(g.dot(r.perp()).abs());
        }
    }
    best
}
