use effdiff::ensemble::{
    run_ensemble, sweep, time_series_diagnostics, DiffusivityEstimate, EnsembleConfig, EnsembleError, OuLayout,
    PathHistogram, SampleGrid, SweepAxis,
};
use effdiff::flows::FlowSpec;
use effdiff::schemes::{SchemeConfig, SchemeKind};

fn brownian(n: usize, horizon: f64) -> EnsembleConfig {
    let mut cfg = EnsembleConfig::new(
        FlowSpec::still(),
        SchemeConfig::new(SchemeKind::LieTrotter, 0.05, 0.2),
        n,
        horizon,
    );
    cfg.seed = 17;
    cfg
}

#[test]
fn brownian_motion_recovers_molecular_diffusivity() {
    for kind in SchemeKind::ALL {
        let mut cfg = brownian(2000, 100.0);
        cfg.scheme.kind = kind;
        let est = run_ensemble(&cfg).unwrap();
        let (d, se) = (est.final_d(), est.final_stderr());
        assert!((d.d11 - 0.02).abs() < 3.0 * se.d11, "{kind:?}: {d:?} ± {se:?}");
        assert!((d.d22 - 0.02).abs() < 3.0 * se.d22, "{kind:?}: {d:?} ± {se:?}");
        assert!(d.d12.abs() < 3.0 * se.d12, "{kind:?}: {d:?} ± {se:?}");
    }
}

#[test]
fn estimate_is_symmetric_with_nonnegative_diagonal() {
    let mut cfg = EnsembleConfig::new(
        FlowSpec::chaotic_cellular(0.5),
        SchemeConfig::new(SchemeKind::Strang, 0.05, 0.1),
        300,
        20.0,
    );
    cfg.samples = SampleGrid::Linear { count: 10 };
    let est = run_ensemble(&cfg).unwrap();
    assert_eq!(est.times.len(), 10);
    for d in &est.d {
        assert!(d.d11 >= 0.0 && d.d22 >= 0.0);
        assert_eq!(d.as_matrix()[0][1], d.as_matrix()[1][0]);
    }
}

#[test]
fn standard_error_shrinks_as_inverse_root_of_count() {
    let small = run_ensemble(&brownian(1000, 50.0)).unwrap().final_stderr();
    let large = run_ensemble(&brownian(4000, 50.0)).unwrap().final_stderr();
    for (s, l) in [(small.d11, large.d11), (small.d22, large.d22)] {
        let ratio = s / l;
        assert!((1.8..=2.2).contains(&ratio), "stderr ratio {ratio}");
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let mut cfg = EnsembleConfig::new(
        FlowSpec::chaotic_cellular(0.3),
        SchemeConfig::new(SchemeKind::LieTrotter, 0.05, 0.1),
        450,
        25.0,
    );
    cfg.samples = SampleGrid::Geometric { count: 8, first: 1.0 };
    cfg.threads = 1;
    let one = run_ensemble(&cfg).unwrap();
    for threads in [2, 4, 7, 0] {
        cfg.threads = threads;
        assert_eq!(run_ensemble(&cfg).unwrap(), one, "threads = {threads}");
    }
}

#[test]
fn ou_ensemble_averages_over_paths() {
    let mut cfg = EnsembleConfig::new(
        FlowSpec::ou_cellular(0.4),
        SchemeConfig::new(SchemeKind::LieTrotter, 0.05, 0.1),
        200,
        10.0,
    );
    cfg.ou = Some(OuLayout {
        n_paths: 8,
        ..OuLayout::default()
    });
    let est = run_ensemble(&cfg).unwrap();
    assert_eq!(est.per_path.len(), 8);
    let mean = est.per_path.iter().map(|p| p[0].d11).sum::<f64>() / 8.0;
    assert!((est.final_d().d11 - mean).abs() < 1e-12);
    cfg.threads = 3;
    assert_eq!(run_ensemble(&cfg).unwrap(), est);
}

#[test]
fn ou_ensemble_rejects_more_paths_than_particles() {
    let mut cfg = EnsembleConfig::new(
        FlowSpec::ou_cellular(0.4),
        SchemeConfig::new(SchemeKind::LieTrotter, 0.05, 0.1),
        10,
        1.0,
    );
    cfg.ou = Some(OuLayout::default());
    assert!(matches!(run_ensemble(&cfg), Err(EnsembleError::InvalidConfig(_))));
}

#[test]
fn integrator_failure_names_the_particle() {
    let mut cfg = EnsembleConfig::new(
        FlowSpec::oscillating_vortex(std::f64::consts::TAU, 2.72, std::f64::consts::PI),
        SchemeConfig::new(SchemeKind::LieTrotter, 0.2, 0.1),
        4,
        1.0,
    );
    cfg.scheme.implicit_max_iters = 2;
    let err = run_ensemble(&cfg).unwrap_err();
    assert!(matches!(err, EnsembleError::Particle { particle: 0, .. }), "{err}");
}

#[test]
fn empty_sweep_is_empty() {
    let table = sweep(&brownian(10, 1.0), &[]);
    assert!(table.rows.is_empty());
    let table = sweep(&brownian(10, 1.0), &[SweepAxis::Sigma(vec![])]);
    assert!(table.rows.is_empty());
}

#[test]
fn sweep_shares_seeds_across_schemes_and_records_failures() {
    let base = brownian(64, 1.0);
    let axes = [
        SweepAxis::Tau(vec![0.1, 0.3]),
        SweepAxis::Scheme(vec![SchemeKind::LieTrotter, SchemeKind::EulerMaruyama]),
    ];
    let table = sweep(&base, &axes);
    assert_eq!(table.axes, vec!["dt", "scheme"]);
    assert_eq!(table.rows.len(), 4);
    assert_eq!(table.rows[0].coords, vec!["0.1", "lt"]);
    assert_eq!(table.rows[0].seed, table.rows[1].seed);
    assert_ne!(table.rows[0].seed, table.rows[2].seed);
    // Pure noise: the schemes coincide exactly on common random numbers.
    assert_eq!(table.rows[0].outcome, table.rows[1].outcome);
    // 1.0 is not a multiple of 0.3.
    assert!(table.rows[2].outcome.is_err() && table.rows[3].outcome.is_err());
}

#[test]
fn brownian_time_series_has_no_drift() {
    let mut cfg = brownian(2000, 200.0);
    cfg.samples = SampleGrid::Geometric { count: 12, first: 1.0 };
    let est = run_ensemble(&cfg).unwrap();
    let report = time_series_diagnostics(&est, &[], 10).unwrap();
    assert!(report.drift.abs() < 3.0 * report.drift_stderr, "{report:?}");
    assert_eq!(report.trace_sum, 2.0 * report.final_d.trace());
}

#[test]
fn short_time_series_is_rejected() {
    let mut cfg = brownian(10, 10.0);
    cfg.samples = SampleGrid::Geometric { count: 12, first: 1.0 };
    let est = run_ensemble(&cfg).unwrap();
    assert!(matches!(
        time_series_diagnostics(&est, &[], 10),
        Err(EnsembleError::InsufficientHorizon { .. })
    ));
}

#[test]
fn schemes_agree_when_noise_dominates() {
    let tau = 0.05;
    let mut cfg = EnsembleConfig::new(
        FlowSpec::chaotic_cellular(0.1),
        SchemeConfig::new(SchemeKind::LieTrotter, tau, 0.5),
        1000,
        100.0,
    );
    cfg.seed = 5;
    let split = run_ensemble(&cfg).unwrap().final_d().d11;
    cfg.scheme.kind = SchemeKind::EulerMaruyama;
    let euler = run_ensemble(&cfg).unwrap().final_d().d11;
    assert!((split - euler).abs() < 5.0 * tau, "{split} vs {euler}");
}

#[test]
fn strang_and_lie_trotter_differ_by_less_than_refinement() {
    let tau = 0.1;
    let mut cfg = EnsembleConfig::new(
        FlowSpec::chaotic_cellular(0.3),
        SchemeConfig::new(SchemeKind::LieTrotter, tau, 0.3),
        2000,
        50.0,
    );
    cfg.seed = 9;
    let lt = run_ensemble(&cfg).unwrap().final_d().d11;
    cfg.scheme.kind = SchemeKind::Strang;
    let strang = run_ensemble(&cfg).unwrap().final_d().d11;
    cfg.scheme.kind = SchemeKind::LieTrotter;
    cfg.scheme.tau = tau / 2.0;
    let lt_half = run_ensemble(&cfg).unwrap().final_d().d11;
    assert!((strang - lt).abs() < (lt - lt_half).abs(), "lt {lt}, strang {strang}, lt(τ/2) {lt_half}");
}

#[test]
fn per_path_spread_narrows_with_time() {
    let mut cfg = EnsembleConfig::new(
        FlowSpec::ou_cellular(0.1),
        SchemeConfig::new(SchemeKind::LieTrotter, 0.05, (2.0f64 * 0.01).sqrt()),
        800,
        5000.0,
    );
    cfg.samples = SampleGrid::Times(vec![100.0, 500.0, 5000.0]);
    cfg.ou = Some(OuLayout::default());
    let est = run_ensemble(&cfg).unwrap();
    let variances: Vec<f64> = [100.0, 500.0, 5000.0]
        .iter()
        .map(|&t| histogram_at(&est, t).variance)
        .collect();
    assert!(variances.windows(2).all(|w| w[1] < w[0]), "{variances:?}");
}

fn histogram_at(est: &DiffusivityEstimate, t: f64) -> PathHistogram {
    let s = est.times.iter().position(|&x| (x - t).abs() < 1e-9).unwrap();
    PathHistogram::new(t, est.per_path.iter().map(|p| p[s].d11).collect(), 10)
}
