mod common;

use std::f64::consts::PI;

use common::*;
use proptest::prelude::*;
use vortex_core::diagnostics::{
    analyze, appendix_a_monitor, appendix_a_monitor_with_constant, appendix_b_checkers, b2_hypothesis,
    cluster_functionals, conserved_quantities, detect_clusters, disk_certificate, halfplane_certificate,
    hamiltonian, lipschitz_and_divergence_monitor, unwound_angles, AnalysisOptions, ClusterPartition,
    DiagnosticsError, RatioVerdict,
};
use vortex_core::dynamics::{integrate, integrate_toy, StepStats, TrajectorySample};
use vortex_core::{
    DomainModel, IntegratorSettings, Point2, Termination, ToyModelSpec, TrajectoryRecord, VortexConfiguration,
};

/// Trajectory from explicit samples, for monitors whose oracle is a closed form.
fn synthetic(intensities: Vec<f64>, samples: Vec<(f64, Vec<Point2>)>) -> TrajectoryRecord {
    let t_end = samples.last().unwrap().0;
    TrajectoryRecord {
        intensities,
        samples: samples
            .into_iter()
            .map(|(t, positions)| TrajectorySample { t, positions })
            .collect(),
        termination: Termination::ReachedTEnd { t: t_end },
        stats: StepStats::default(),
        collapse_estimate: None,
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn run(domain: &DomainModel, positions: Vec<Point2>, intensities: Vec<f64>, t_end: f64) -> TrajectoryRecord {
    let config = VortexConfiguration::new(positions, intensities).unwrap();
    integrate(domain, &config, &IntegratorSettings::default().with_t_end(t_end)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hamiltonian_matches_image_forms(seed in any::<u64>()) {
        let mut r = rng(seed);
        for (domain, green, robin) in [
            (DomainModel::half_plane(), green_half_plane as fn(Point2, Point2) -> f64, robin_half_plane as fn(Point2) -> f64),
            (DomainModel::unit_disk(), green_disk, robin_disk),
        ] {
            let c = random_positive_config(&domain, 4, 0.05, 0.02, &mut r);
            let (x, a) = (&c.positions, &c.intensities);
            let mut expected = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        expected += 0.5 * a[i] * a[j] * green(x[i], x[j]);
                    }
                }
                expected += 0.5 * a[i] * a[i] * robin(x[i]);
            }
            let h = hamiltonian(&domain, &c).unwrap();
            prop_assert!((h - expected).abs() <= 1e-12 * expected.abs().max(1.0), "{} {h} {expected}", domain.name());
        }
    }

    #[test]
    fn moments_match_direct_sums(seed in any::<u64>()) {
        let c = random_positive_config(&DomainModel::plane(), 5, 0.0, 0.0, &mut rng(seed));
        let (m, i) = conserved_quantities(&c);
        let mut m_ref = Point2::ZERO;
        let mut i_ref = 0.0;
        for (x, a) in c.positions.iter().zip(&c.intensities) {
            m_ref += *x * *a;
            i_ref += a * (x.x1 * x.x1 + x.x2 * x.x2);
        }
        prop_assert!((m - m_ref).norm() <= 1e-13 * m_ref.norm().max(1.0));
        prop_assert!((i - i_ref).abs() <= 1e-13 * i_ref.abs().max(1.0));
    }
}

#[test]
fn plane_hamiltonian_is_pairwise_log() {
    let c = VortexConfiguration::new(vec![p(0.0, 0.0), p(3.0, 4.0)], vec![2.0, 0.5]).unwrap();
    let expected = 2.0 * 2.0 * 0.5 * 5f64.ln() / (2.0 * PI);
    assert!((hamiltonian(&DomainModel::plane(), &c).unwrap() - expected).abs() <= 1e-14);
}

#[test]
fn clusters_use_the_trailing_window() {
    let domain = DomainModel::half_plane();
    let samples = linspace(0.0, 1.0, 11)
        .into_iter()
        .map(|t| {
            // vortex 1 approaches the wall, vortex 2 only touched it early on
            let early = if t < 0.5 { 0.001 } else { 1.0 };
            (t, vec![p(0.0, 1.0 - 0.995 * t), p(5.0, early), p(9.0, 2.0)])
        })
        .collect();
    let traj = synthetic(vec![1.0, 1.0, 1.0], samples);
    let part = detect_clusters(&domain, &traj, 0.2, 0.01).unwrap();
    assert_eq!(part.boundary, vec![0]);
    assert_eq!(part.interior, vec![1, 2]);
    assert_eq!(part.components, vec![vec![0]]);
    let expected_delta = (0..=10)
        .map(|k| {
            let t = k as f64 / 10.0;
            let x0 = p(0.0, 1.0 - 0.995 * t);
            let early = if t < 0.5 { 0.001 } else { 1.0 };
            x0.distance(p(5.0, early)).min(x0.distance(p(9.0, 2.0)))
        })
        .fold(f64::INFINITY, f64::min);
    assert_eq!(part.delta_hat, expected_delta);

    let wide = detect_clusters(&domain, &traj, 1.0, 0.01).unwrap();
    assert_eq!(wide.boundary, vec![0, 1]);
    assert!(matches!(
        detect_clusters(&domain, &traj, 0.2, 0.0),
        Err(DiagnosticsError::InvalidParameter(_))
    ));
}

#[test]
fn half_plane_functionals_match_closed_forms() {
    let domain = DomainModel::half_plane();
    let ts = linspace(0.0, 2.0, 21);
    let path = |t: f64| vec![p(0.3 * t, 0.5 - 0.2 * t), p(-1.0 + t * t, 2.0)];
    let traj = synthetic(vec![1.5, -0.5], ts.iter().map(|&t| (t, path(t))).collect());
    let part = ClusterPartition::from_boundary(vec![0], &traj);
    let series = cluster_functionals(&domain, &traj, &part).unwrap();
    for (s, &t) in series.samples.iter().zip(&ts) {
        let x = path(t);
        assert!((s.d_gamma - 1.5 * x[0].x2).abs() <= 1e-15);
        // the tangential displacement on a straight wall is the change in x₁
        assert!((s.displacements[0] - 0.3 * t).abs() <= 1e-14);
        assert!((s.displacements[1] - t * t).abs() <= 1e-12);
        assert!((s.l_gamma - 1.5 * 0.3 * t).abs() <= 1e-14);
        assert_eq!(s.cluster_center, x[0] * 1.5);
        assert_eq!(s.min_boundary_distance, x[0].x2);
        assert_eq!(s.cluster_abs_sum, 1.5);
        assert!(s.disk_j.is_none());
    }
}

#[test]
fn disk_displacement_follows_the_polar_angle() {
    let domain = DomainModel::unit_disk().with_band(0.6).unwrap();
    let traj = run(&domain, vec![p(0.7, 0.0)], vec![1.0], 20.0);
    let part = ClusterPartition::from_boundary(vec![0], &traj);
    let series = cluster_functionals(&domain, &traj, &part).unwrap();
    let angles = &unwound_angles(&traj)[0];
    for (s, theta) in series.samples.iter().zip(angles) {
        assert!((s.displacements[0] - theta).abs() <= 1e-9 * theta.abs().max(1.0), "{} {theta}", s.displacements[0]);
        let d = 0.3;
        assert!((s.disk_j.unwrap() - d * (2.0 - d)).abs() <= 1e-9);
    }
}

#[test]
fn plane_has_no_displacement() {
    let traj = run(&DomainModel::plane(), vec![p(1.0, 0.0), p(-1.0, 0.0)], vec![1.0, 1.0], 1.0);
    let a = analyze(&DomainModel::plane(), &traj, &AnalysisOptions::default()).unwrap();
    assert!(a.partition.boundary.is_empty());
    assert!(a.certificate.is_none());
    assert!(a.series.samples.iter().all(|s| s.displacements.iter().all(|l| l.is_nan())));
    assert!(a.series.samples.iter().all(|s| s.min_boundary_distance == f64::INFINITY));
}

#[test]
fn disk_cluster_moment_is_conserved_without_exterior_vortices() {
    let domain = DomainModel::unit_disk().with_band(0.9).unwrap();
    let traj = run(&domain, vec![p(0.9, 0.0), p(0.0, -0.92), p(-0.6, 0.6)], vec![1.0, 0.7, 1.3], 10.0);
    let part = ClusterPartition::from_boundary(vec![0, 1, 2], &traj);
    let series = cluster_functionals(&domain, &traj, &part).unwrap();
    let moments = series.column(|s| s.cluster_moment);
    assert!(max_rel_drift(&moments) <= 1e-8);
    // J = Σ a_i (1 − |x_i|²) is then conserved as well
    let j = series.column(|s| s.disk_j.unwrap());
    assert!(max_rel_drift(&j) <= 1e-8);
}

#[test]
fn halfplane_certificate_constant_and_margins() {
    let domain = DomainModel::half_plane();
    let traj = run(&domain, vec![p(0.0, 0.05), p(0.4, 0.06), p(0.0, 1.0), p(1.0, 1.5)], vec![1.0, 0.5, 2.0, 1.0], 2.0);
    let part = ClusterPartition::from_boundary(vec![0, 1], &traj);
    let cert = halfplane_certificate(&domain, &traj, &part, &traj.intensities).unwrap();
    let expected = 2.0 / (PI * part.delta_hat.powi(2)) * 2.0 * 2.0;
    assert!((cert.constant - expected).abs() <= 1e-14 * expected);
    assert!(cert.applicable);
    assert!(cert.holds(1e-8), "{:?}", cert.min_margin());
    let v0 = 1.0 * 0.05 + 0.5 * 0.06;
    for pt in &cert.points {
        assert!((pt.floor - v0 * (-expected * pt.t).exp()).abs() <= 1e-15);
        assert_eq!(pt.margin, pt.value - pt.floor);
    }
}

#[test]
fn certificates_with_empty_clusters() {
    let hp = DomainModel::half_plane();
    let traj = run(&hp, vec![p(0.0, 0.3), p(1.0, 0.4)], vec![1.0, 1.0], 5.0);
    let a = &traj.intensities;

    let empty_q = ClusterPartition::from_boundary(vec![], &traj);
    let cert = halfplane_certificate(&hp, &traj, &empty_q, a).unwrap();
    assert!(cert.points.is_empty() && cert.holds(0.0) && cert.min_margin().is_none());
    assert_eq!(cert.constant, 0.0);

    // with no exterior vortex the floor is constant and M_Q·e₂ is conserved
    let empty_p = ClusterPartition::from_boundary(vec![0, 1], &traj);
    assert_eq!(empty_p.delta_hat, f64::INFINITY);
    let cert = halfplane_certificate(&hp, &traj, &empty_p, a).unwrap();
    assert_eq!(cert.constant, 0.0);
    assert!(cert.points.iter().all(|p| p.margin.abs() <= 1e-8));

    let disk = DomainModel::unit_disk();
    let traj = run(&disk, vec![p(0.9, 0.0), p(-0.9, 0.0)], vec![1.0, 1.0], 5.0);
    let cert = disk_certificate(&disk, &traj, &ClusterPartition::from_boundary(vec![0, 1], &traj), a).unwrap();
    assert_eq!(cert.constant, 0.0);
    assert!(cert.points.iter().all(|p| p.margin.abs() <= 1e-8));
}

#[test]
fn disk_certificate_constant() {
    let disk = DomainModel::unit_disk();
    let traj = run(&disk, vec![p(0.95, 0.0), p(0.0, 0.2), p(-0.3, -0.1)], vec![1.0, 0.5, 2.0], 3.0);
    let part = ClusterPartition::from_boundary(vec![0], &traj);
    let cert = disk_certificate(&disk, &traj, &part, &traj.intensities).unwrap();
    let expected = 4.0 / (PI * part.delta_hat.powi(3)) * 2.5;
    assert!((cert.constant - expected).abs() <= 1e-14 * expected);
    assert!(cert.holds(1e-8));
}

#[test]
fn signed_intensities_make_certificates_inapplicable() {
    let hp = DomainModel::half_plane();
    let traj = run(&hp, vec![p(0.0, 0.1), p(1.0, 1.0)], vec![1.0, -1.0], 1.0);
    let part = ClusterPartition::from_boundary(vec![0], &traj);
    assert!(!halfplane_certificate(&hp, &traj, &part, &traj.intensities).unwrap().applicable);
}

#[test]
fn certificates_reject_other_domains() {
    let traj = run(&DomainModel::plane(), vec![p(0.0, 0.5)], vec![1.0], 1.0);
    let part = ClusterPartition::from_boundary(vec![], &traj);
    assert!(matches!(
        halfplane_certificate(&DomainModel::unit_disk(), &traj, &part, &[1.0]),
        Err(DiagnosticsError::WrongDomain { .. })
    ));
    assert!(matches!(
        disk_certificate(&DomainModel::half_plane(), &traj, &part, &[1.0]),
        Err(DiagnosticsError::WrongDomain { .. })
    ));
}

#[test]
fn divergence_of_a_linear_approach() {
    let domain = DomainModel::half_plane();
    let ts = linspace(0.0, 9.0, 91);
    let path = |t: f64| vec![p((10.0 - t).ln() * -0.5, 1.0 - 0.1 * t)];
    let traj = synthetic(vec![2.0], ts.iter().map(|&t| (t, path(t))).collect());
    let part = ClusterPartition::from_boundary(vec![0], &traj);
    let series = cluster_functionals(&domain, &traj, &part).unwrap();
    let report = lipschitz_and_divergence_monitor(&traj, &part, &series).unwrap();
    assert!((report.max_d_gamma_slope - 0.2).abs() <= 1e-12);
    assert!((report.t_hat.unwrap() - 10.0).abs() <= 1e-8);
    assert_eq!(report.window_samples, 9);
    // L_Γ = 2·x₁ = −ln(T̂ − t) + const
    let fit = report.log_fit.unwrap();
    assert!((fit.slope - 1.0).abs() <= 1e-6, "{fit:?}");
    assert!(fit.correlation > 1.0 - 1e-9);
}

#[test]
fn divergence_of_a_receding_cluster_has_no_collapse_time() {
    let ts = linspace(0.0, 1.0, 11);
    let traj = synthetic(vec![1.0], ts.iter().map(|&t| (t, vec![p(0.0, 0.5 + t)])).collect());
    let part = ClusterPartition::from_boundary(vec![0], &traj);
    let series = cluster_functionals(&DomainModel::half_plane(), &traj, &part).unwrap();
    let report = lipschitz_and_divergence_monitor(&traj, &part, &series).unwrap();
    assert!(report.t_hat.is_none() && report.log_fit.is_none());
    let short = synthetic(vec![1.0], vec![(0.0, vec![p(0.0, 1.0)]), (1.0, vec![p(0.0, 1.0)])]);
    let series = cluster_functionals(&DomainModel::half_plane(), &short, &part).unwrap();
    assert!(matches!(
        lipschitz_and_divergence_monitor(&short, &part, &series),
        Err(DiagnosticsError::InsufficientSamples { .. })
    ));
}

#[test]
fn orbit_has_flat_distance() {
    let domain = DomainModel::unit_disk().with_band(0.6).unwrap();
    let traj = run(&domain, vec![p(0.5, 0.0)], vec![1.0], 10.0);
    let part = ClusterPartition::from_boundary(vec![0], &traj);
    let series = cluster_functionals(&domain, &traj, &part).unwrap();
    let report = lipschitz_and_divergence_monitor(&traj, &part, &series).unwrap();
    assert!(report.max_d_gamma_slope <= 1e-10, "{}", report.max_d_gamma_slope);
}

#[test]
fn toy_displacement_grows_logarithmically() {
    let settings = IntegratorSettings::default().with_t_end(20.0).with_stride(0.05);
    let traj = integrate_toy(&ToyModelSpec::collapse(1.0 / (4.0 * PI)), &settings).unwrap();
    let options = AnalysisOptions {
        certificates: false,
        ..AnalysisOptions::default()
    };
    let a = analyze(&DomainModel::half_plane(), &traj, &options).unwrap();
    assert_eq!(a.partition.boundary, vec![0]);
    let div = a.divergence.unwrap();
    assert!((div.t_hat.unwrap() - 4.0 * PI).abs() <= 1e-6);
    // x₁ = −ln(1 − t/T), so L_Γ against −ln(T̂ − t) has unit slope
    let fit = div.log_fit.unwrap();
    assert!((fit.slope - 1.0).abs() <= 1e-4, "{fit:?}");
    assert!(fit.correlation >= 0.999);
}

#[test]
fn b2_fixtures() {
    let hp = DomainModel::half_plane();
    let disk = DomainModel::unit_disk();
    let equal_heights = b2_hypothesis(&hp, &[p(0.0, 1.0), p(3.0, 1.0)], &[1.0, -1.0]).unwrap();
    assert_eq!((equal_heights.quantity, equal_heights.reference), (0.0, 0.0));
    assert!(!equal_heights.holds);
    let unequal = b2_hypothesis(&hp, &[p(0.0, 1.0), p(3.0, 2.0)], &[1.0, -1.0]).unwrap();
    assert!(unequal.holds && unequal.quantity == -1.0);
    // two vortices at the origin: I = 0, reference Σa = 2
    let center = b2_hypothesis(&disk, &[p(0.0, 0.0), p(0.0, 0.0)], &[1.0, 1.0]).unwrap();
    assert_eq!((center.quantity, center.reference), (0.0, 2.0));
    assert!(center.holds);
    let on_circle = b2_hypothesis(&disk, &[p(0.6, 0.8), p(0.0, -1.0)], &[1.0, 1.0]).unwrap();
    assert!(!on_circle.holds);
    assert!(b2_hypothesis(&DomainModel::plane(), &[p(0.0, 0.0)], &[1.0]).is_err());
}

#[test]
fn ratio_criterion_thresholds() {
    let hp = DomainModel::half_plane();
    let ts = linspace(0.0, 1.0, 11);
    let traj_with = |ratio: f64, a: Vec<f64>| {
        synthetic(a, ts.iter().map(|&t| (t, vec![p(0.0, 0.01), p(1.0, 0.01 * (1.0 + (ratio - 1.0) * t))])).collect())
    };

    let positive = traj_with(3.0, vec![1.0, 2.0]);
    let part = ClusterPartition::from_boundary(vec![0, 1], &positive);
    let x0 = &positive.samples[0].positions;
    let r = appendix_b_checkers(&hp, x0, &positive.intensities, &positive, &part, 0.0).unwrap();
    assert_eq!(r.threshold, f64::INFINITY);
    assert_eq!(r.verdict, RatioVerdict::CollapseExcluded);
    assert!(r.criterion_established);

    // A = 0.5, a = 1.5: threshold 1/(1 − 1/3) = 1.5
    for (ratio, verdict) in [(1.4, RatioVerdict::CollapseExcluded), (1.6, RatioVerdict::Inconclusive)] {
        let traj = traj_with(ratio, vec![1.0, -0.5]);
        let r = appendix_b_checkers(&hp, x0, &traj.intensities, &traj, &part, 0.0).unwrap();
        assert!((r.threshold - 1.5).abs() <= 1e-15);
        assert!((r.max_ratio.unwrap() - ratio).abs() <= 1e-12);
        assert_eq!(r.verdict, verdict);
    }

    // t₁ after the last sample, or an empty cluster: nothing to judge
    let r = appendix_b_checkers(&hp, x0, &positive.intensities, &positive, &part, 2.0).unwrap();
    assert_eq!(r.verdict, RatioVerdict::NotApplicable);
    let none = ClusterPartition::from_boundary(vec![], &positive);
    let r = appendix_b_checkers(&hp, x0, &positive.intensities, &positive, &none, 0.0).unwrap();
    assert_eq!(r.verdict, RatioVerdict::NotApplicable);

    let disk = DomainModel::unit_disk();
    let traj = run(&disk, vec![p(0.0, 0.0), p(0.2, 0.0)], vec![1.0, 1.0], 1.0);
    let part = ClusterPartition::from_boundary(vec![], &traj);
    let r = appendix_b_checkers(&disk, &[p(0.0, 0.0), p(0.0, 0.0)], &[1.0, 1.0], &traj, &part, 0.0).unwrap();
    assert!(r.b2.holds && !r.criterion_established);
}

#[test]
fn drift_monitor_single_vortex() {
    let hp = DomainModel::half_plane();
    let traj = run(&hp, vec![p(0.0, 0.7)], vec![1.0], 3.0);
    let report = appendix_a_monitor(&hp, &traj, 0).unwrap();
    // one subset, nothing outside it: zero bound against zero vertical drift
    assert_eq!(report.c0, 0.0);
    assert!(report.rows.iter().all(|r| r.subset == vec![0] && r.bound == 0.0));
    assert!(report.rows.iter().all(|r| r.drift <= 1e-9));
    assert!(report.holds());
}

#[test]
fn drift_monitor_flags_equal_heights_as_degenerate() {
    let hp = DomainModel::half_plane();
    // a mirror-symmetric dipole keeps both vortices at the same height
    let traj = run(&hp, vec![p(-0.5, 1.0), p(0.5, 1.0)], vec![1.0, -1.0], 2.0);
    let report = appendix_a_monitor_with_constant(&traj, 1.0 / (2.0 * PI)).unwrap();
    assert_eq!(report.skipped_neutral, vec![vec![0, 1]]);
    assert_eq!(report.rows.len(), 2 * traj.len());
    assert_eq!(report.degenerate_samples, 2 * traj.len());
    assert!(report.holds());
    assert!((report.c0 - 1.1 / (2.0 * PI)).abs() <= 1e-15);
}

#[test]
fn drift_monitor_skips_neutral_subsets_and_counts_violations() {
    let ts = linspace(0.0, 1.0, 11);
    let traj = synthetic(
        vec![1.0, -1.0],
        ts.iter().map(|&t| (t, vec![p(0.0, 1.0 + t), p(1.0, 3.0)])).collect(),
    );
    let report = appendix_a_monitor_with_constant(&traj, 0.0).unwrap();
    assert_eq!(report.skipped_neutral, vec![vec![0, 1]]);
    // zero constant gives zero bound, so the moving singleton violates it
    assert_eq!(report.violations, traj.len());
    assert!(!report.holds());
    let big = synthetic(vec![1.0; 11], vec![(0.0, vec![p(0.0, 1.0); 11]); 3]);
    assert!(matches!(
        appendix_a_monitor_with_constant(&big, 1.0),
        Err(DiagnosticsError::TooManyVortices { n: 11, .. })
    ));
}

#[test]
fn analysis_selects_monitors() {
    let hp = DomainModel::half_plane();
    let traj = run(&hp, vec![p(0.0, 0.005), p(0.5, 1.0)], vec![1.0, 1.0], 1.0);
    let off = analyze(&hp, &traj, &AnalysisOptions::default()).unwrap();
    assert!(off.appendix_a.is_none() && off.appendix_b.is_none());
    assert_eq!(off.partition.boundary, vec![0]);
    let on = AnalysisOptions {
        appendix_monitors: true,
        ..AnalysisOptions::default()
    };
    let on = analyze(&hp, &traj, &on).unwrap();
    assert!(on.appendix_a.is_some() && on.appendix_b.is_some());
    assert!(on.certificate.unwrap().holds(1e-8));
    let no_clusters = AnalysisOptions {
        clusters: false,
        ..AnalysisOptions::default()
    };
    assert!(analyze(&hp, &traj, &no_clusters).unwrap().partition.boundary.is_empty());
}
