//! Fixtures shared by the benchmarks.

use std::f64::consts::PI;

use vortex_core::geometry::Complex64;
use vortex_core::{ConformalMap, DomainKind, DomainModel, Point2, VortexConfiguration};

/// The four supported domains with their display names.
pub fn domains() -> Vec<(&'static str, DomainModel)> {
    let map = ConformalMap::new(vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.2, 0.0),
    ])
    .expect("valid map");
    vec![
        ("plane", DomainModel::plane()),
        ("half-plane", DomainModel::half_plane()),
        ("unit-disk", DomainModel::unit_disk()),
        ("conformal-disk", DomainModel::conformal(map).expect("valid domain")),
    ]
}

/// `n` vortices on a golden-angle spiral inside the domain, with positive
/// intensities alternating between 1 and 2.
pub fn spiral(domain: &DomainModel, n: usize) -> VortexConfiguration {
    let golden = PI * (3.0 - 5f64.sqrt());
    let positions = (0..n)
        .map(|k| {
            let r = 0.7 * ((k as f64 + 0.5) / n as f64).sqrt();
            let (s, c) = (golden * k as f64).sin_cos();
            let p = Point2::new(r * c, r * s);
            match domain.kind() {
                DomainKind::HalfPlane => p + Point2::new(0.0, 1.0),
                _ => p,
            }
        })
        .collect();
    let intensities = (0..n).map(|k| if k % 2 == 0 { 1.0 } else { 2.0 }).collect();
    VortexConfiguration::new(positions, intensities).expect("valid fixture")
}
