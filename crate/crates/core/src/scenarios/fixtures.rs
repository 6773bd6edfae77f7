//! The shipped scenarios.

use std::f64::consts::PI;

use super::{Oracle, Scenario, ScenarioSystem};
use crate::diagnostics::AnalysisOptions;
use crate::dynamics::{IntegratorSettings, ToyModelSpec, VortexConfiguration};
use crate::geometry::{DomainModel, Point2};

/// Self-similar collapse triangle for intensities `(2, 2, −1)`, sides
/// `|x₁−x₂| = 1`, `|x₁−x₃| = 1.2`, center of vorticity at the origin.
/// Frozen output of [`collapse_triangle`]; a unit test keeps the two in sync.
pub const GROEBLI_POSITIONS: [[f64; 2]; 3] = [
    [-0.35333333333333333, 0.2486407493196202],
    [0.6466666666666667, 0.2486407493196202],
    [0.5866666666666667, 0.9945629972784809],
];
pub const GROEBLI_INTENSITIES: [f64; 3] = [2.0, 2.0, -1.0];

/// Triangle with sides `s12`, `s13` and the third side fixed by the zero
/// angular impulse condition `Σ_{i<j} a_i a_j s_ij² = 0`; requires
/// `Σ_{i<j} a_i a_j = 0` for self-similarity. Vortex 3 lies to the left of
/// the directed edge 1→2 and the center of vorticity is at the origin.
pub fn collapse_triangle(a: [f64; 3], s12: f64, s13: f64) -> Option<[Point2; 3]> {
    let harmonic = a[0] * a[1] + a[0] * a[2] + a[1] * a[2];
    if harmonic.abs() > 1e-12 * (a[0] * a[1]).abs() {
        return None;
    }
    // a1 a2 s12² + a1 a3 s13² + a2 a3 s23² = 0 is linear in s23²
    let s23_sq = -(a[0] * a[1] * s12 * s12 + a[0] * a[2] * s13 * s13) / (a[1] * a[2]);
    if !(s23_sq > 0.0) {
        return None;
    }
    let s23 = s23_sq.sqrt();
    if s23 >= s12 + s13 || s12 >= s13 + s23 || s13 >= s12 + s23 {
        return None;
    }
    let cos1 = (s12 * s12 + s13 * s13 - s23_sq) / (2.0 * s12 * s13);
    let sin1 = (1.0 - cos1 * cos1).sqrt();
    let raw = [
        Point2::ZERO,
        Point2::new(s12, 0.0),
        Point2::new(s13 * cos1, s13 * sin1),
    ];
    let total: f64 = a.iter().sum();
    let center = (raw[0] * a[0] + raw[1] * a[1] + raw[2] * a[2]) / total;
    Some(raw.map(|p| p - center))
}

fn p(x1: f64, x2: f64) -> Point2 {
    Point2::new(x1, x2)
}

fn config(positions: Vec<Point2>, intensities: Vec<f64>) -> VortexConfiguration {
    VortexConfiguration::new(positions, intensities).expect("fixture configuration is valid")
}

fn polar(r: f64, phi: f64) -> Point2 {
    p(r * phi.cos(), r * phi.sin())
}

fn settings(t_end: f64, stride: f64) -> IntegratorSettings {
    IntegratorSettings::default().with_t_end(t_end).with_stride(stride)
}

pub(super) fn builtin() -> Vec<Scenario> {
    let near_wall_a = vec![1.0, 1.0, 2.0];
    let default_analysis = AnalysisOptions::default();
    let near_wall_analysis = AnalysisOptions {
        eta: 0.15,
        ..AnalysisOptions::default()
    };
    let mut toy_settings = settings(20.0, 0.01);
    toy_settings.boundary_collapse_eps = 1e-8;

    vec![
        Scenario {
            name: "corotation".into(),
            description: "two equal vortices a = 2π at (±1, 0) rotate rigidly with ω = 1/2".into(),
            domain: DomainModel::plane(),
            system: ScenarioSystem::Vortices(config(vec![p(1.0, 0.0), p(-1.0, 0.0)], vec![2.0 * PI; 2])),
            settings: settings(4.0 * PI, 0.05),
            analysis: default_analysis.clone(),
            oracle: Oracle::RigidRotation {
                omega: 0.5,
                tol: 1e-6,
            },
        },
        Scenario {
            name: "pair-translation".into(),
            description: "opposite vortices a = ±2π at (0, ±0.5) translate at unit speed along e₁".into(),
            domain: DomainModel::plane(),
            system: ScenarioSystem::Vortices(config(
                vec![p(0.0, 0.5), p(0.0, -0.5)],
                vec![2.0 * PI, -2.0 * PI],
            )),
            settings: settings(10.0, 0.05),
            analysis: default_analysis.clone(),
            oracle: Oracle::Translation {
                velocity: p(1.0, 0.0),
                tol: 1e-9,
            },
        },
        Scenario {
            name: "hp-translate".into(),
            description: "single vortex a = 4π at (0, 1) in the half-plane moves at a/(4π x₂) = 1".into(),
            domain: DomainModel::half_plane(),
            system: ScenarioSystem::Vortices(config(vec![p(0.0, 1.0)], vec![4.0 * PI])),
            settings: settings(3.0, 0.01),
            analysis: default_analysis.clone(),
            oracle: Oracle::Translation {
                velocity: p(1.0, 0.0),
                tol: 1e-9,
            },
        },
        Scenario {
            name: "disk-orbit".into(),
            description: "single vortex a = 1 at r = 0.5 in the unit disk orbits with ω = 2/(3π)".into(),
            domain: DomainModel::unit_disk().with_band(0.6).expect("band below curvature radius"),
            system: ScenarioSystem::Vortices(config(vec![p(0.5, 0.0)], vec![1.0])),
            settings: settings(10.0, 0.01),
            analysis: default_analysis.clone(),
            oracle: Oracle::CircularOrbit {
                radius: 0.5,
                omega: 2.0 / (3.0 * PI),
                radius_tol: 1e-9,
                omega_tol: 1e-8,
            },
        },
        Scenario {
            name: "toy-collapse".into(),
            description: "forced half-plane vortex, F = −e₂/(4π) from (0, 1): wall collapse at T = 4π".into(),
            domain: DomainModel::half_plane(),
            system: ScenarioSystem::Toy(ToyModelSpec::collapse(1.0 / (4.0 * PI))),
            settings: toy_settings,
            analysis: AnalysisOptions {
                eta: 0.01,
                ..AnalysisOptions::default()
            },
            oracle: Oracle::ToyCollapse {
                crossing_x2: 0.5,
                expected_x1: 2f64.ln(),
                rel_tol: 1e-6,
                collapse_time: 4.0 * PI,
                time_tol: 1e-4,
                min_correlation: 0.9999,
            },
        },
        Scenario {
            name: "groebli-collapse".into(),
            description: "three vortices (2, 2, −1) on a self-similar triangle collide at one point".into(),
            domain: DomainModel::plane(),
            system: ScenarioSystem::Vortices(config(
                GROEBLI_POSITIONS.iter().map(|&c| Point2::from(c)).collect(),
                GROEBLI_INTENSITIES.to_vec(),
            )),
            settings: settings(10.0, 0.01),
            analysis: default_analysis.clone(),
            oracle: Oracle::SelfSimilarCollapse {
                exponent: 0.5,
                exponent_tol: 0.02,
                min_correlation: 0.999,
            },
        },
        Scenario {
            name: "hp-near-wall".into(),
            description: "positive vortices a = (1, 1, 2) at wall distances (0.05, 0.08, 0.5) in the half-plane".into(),
            domain: DomainModel::half_plane(),
            system: ScenarioSystem::Vortices(config(
                vec![p(0.0, 0.05), p(0.3, 0.08), p(0.15, 0.5)],
                near_wall_a.clone(),
            )),
            settings: settings(20.0, 0.01),
            analysis: near_wall_analysis.clone(),
            oracle: Oracle::Certificates {
                margin_slack: 1e-8,
                hamiltonian_tol: 1e-7,
            },
        },
        Scenario {
            name: "disk-near-wall".into(),
            description: "positive vortices a = (1, 1, 2) at wall distances (0.05, 0.08, 0.5) in the unit disk".into(),
            domain: DomainModel::unit_disk(),
            system: ScenarioSystem::Vortices(config(
                vec![polar(0.95, 0.0), polar(0.92, 0.3), polar(0.5, 2.0)],
                near_wall_a,
            )),
            settings: settings(20.0, 0.01),
            analysis: near_wall_analysis,
            oracle: Oracle::Certificates {
                margin_slack: 1e-8,
                hamiltonian_tol: 1e-7,
            },
        },
        Scenario {
            name: "disk-signed-exploratory".into(),
            description: "signed intensities (1, −0.6, 0.3) near the disk boundary; no known outcome".into(),
            domain: DomainModel::unit_disk(),
            system: ScenarioSystem::Vortices(config(
                vec![polar(0.9, 0.0), polar(0.85, 0.2), polar(0.3, 2.0)],
                vec![1.0, -0.6, 0.3],
            )),
            settings: settings(10.0, 0.01),
            analysis: AnalysisOptions {
                eta: 0.05,
                ..AnalysisOptions::default()
            },
            oracle: Oracle::None,
        },
    ]
}
