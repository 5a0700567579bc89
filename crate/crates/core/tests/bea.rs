mod common;

use std::f64::consts::TAU;

use effdiff::bea::{
    build_modified_flow, compare_against_modified, verify_divergence_free, BeaError, ModifiedFlow,
    ModifiedHamiltonian, ModifiedVariant,
};
use effdiff::ensemble::{EnsembleConfig, SampleGrid};
use effdiff::flows::{FlowSpec, Mat2};
use effdiff::noise::NoiseStream;
use effdiff::schemes::{steps_for, Integrator, SchemeConfig, SchemeKind, StepState};

use common::{quasi_random, sample_point, separable_catalogue};

const VARIANTS: [ModifiedVariant; 2] = [ModifiedVariant::SymplecticSplit, ModifiedVariant::EulerMaruyama];

fn modified(flow: &FlowSpec, dt: f64, sigma: f64, variant: ModifiedVariant) -> ModifiedFlow {
    build_modified_flow(&flow.separable_form().unwrap(), dt, sigma, variant, 0.5).unwrap()
}

fn points(flow: &FlowSpec, n: usize) -> impl Iterator<Item = (f64, [f64; 2], Option<f64>)> + '_ {
    let form = flow.separable_form().unwrap();
    quasi_random(n).map(move |u| {
        let (t, x, driver) = sample_point(flow, u);
        (t, form.to_native(x), driver)
    })
}

#[test]
fn split_variant_is_divergence_free_on_every_separable_flow() {
    for flow in separable_catalogue() {
        for dt in [0.01, 0.05, 0.2] {
            let variant = ModifiedVariant::SymplecticSplit;
            let mf = build_modified_flow(&flow.separable_form().unwrap(), dt, 0.3, variant, 0.5).unwrap();
            let report = verify_divergence_free(&mf, 2000).unwrap();
            assert!(report.is_divergence_free(1e-6), "{flow:?} dt {dt}: {report:?}");
            assert_eq!(report.samples, 2000);
        }
    }
}

#[test]
fn euler_variant_is_compressible() {
    let mf = modified(&FlowSpec::taylor_green(TAU), 0.05, 0.1, ModifiedVariant::EulerMaruyama);
    let report = verify_divergence_free(&mf, 2000).unwrap();
    assert!(!report.is_divergence_free(0.01), "{report:?}");
    let [t, p, q] = report.worst_point;
    let closed = mf.drift_divergence(t, [p, q], None).unwrap().abs();
    assert!((closed - report.max_abs_divergence).abs() < 1e-5 * closed.max(1.0));
}

#[test]
fn closed_form_divergence_matches_finite_differences() {
    let h = 1e-5;
    for flow in separable_catalogue().into_iter().filter(FlowSpec::is_steady) {
        for variant in VARIANTS {
            let mf = modified(&flow, 0.05, 0.2, variant);
            for (t, y, driver) in points(&flow, 300) {
                let drift = |dy: [f64; 2]| mf.drift(t, [y[0] + dy[0], y[1] + dy[1]], driver).unwrap();
                let fd = (drift([h, 0.0])[0] - drift([-h, 0.0])[0]) / (2.0 * h)
                    + (drift([0.0, h])[1] - drift([0.0, -h])[1]) / (2.0 * h);
                let closed = mf.drift_divergence(t, y, driver).unwrap();
                assert!((fd - closed).abs() < 1e-6 * (1.0 + closed.abs()), "{flow:?} {variant}: {fd} vs {closed}");
            }
        }
    }
}

#[test]
fn still_flow_has_no_correction() {
    for variant in VARIANTS {
        let mf = modified(&FlowSpec::still(), 0.1, 0.5, variant);
        let y = [0.4, -1.2];
        assert_eq!(mf.drift(0.0, y, None).unwrap(), [0.0, 0.0]);
        assert_eq!(mf.drift_divergence(0.0, y, None).unwrap(), 0.0);
        assert_eq!(mf.diffusion_matrix(0.0, y, None).unwrap(), [[0.5, 0.0], [0.0, 0.5]]);
    }
}

#[test]
fn euler_and_split_drifts_differ_by_the_shear_product() {
    for flow in separable_catalogue().into_iter().filter(FlowSpec::is_steady) {
        let form = flow.separable_form().unwrap();
        let dt = 0.03;
        let (s, e) = (
            modified(&flow, dt, 0.2, ModifiedVariant::SymplecticSplit),
            modified(&flow, dt, 0.2, ModifiedVariant::EulerMaruyama),
        );
        for (t, y, driver) in points(&flow, 200) {
            let (a, b) = (s.drift(t, y, driver).unwrap(), e.drift(t, y, driver).unwrap());
            let c = form.drive(t, driver).unwrap();
            let expect = dt * form.df(c, y[0]) * form.g(c, y[1]);
            assert_eq!(a[0], b[0]);
            assert!((b[1] - a[1] - expect).abs() < 1e-14, "{flow:?}");
        }
    }
}

#[test]
fn diffusion_factor_squares_to_the_first_order_covariance() {
    for flow in separable_catalogue() {
        let dt = 0.07;
        let mf = modified(&flow, dt, 1.0, ModifiedVariant::SymplecticSplit);
        let s = mf.native_sigma();
        for (t, y, driver) in points(&flow, 200) {
            let b = mf.diffusion_matrix(t, y, driver).unwrap();
            let big = mf.big_d1(t, y, driver).unwrap();
            let mut bbt: Mat2 = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    bbt[i][j] = (b[i][0] * b[j][0] + b[i][1] * b[j][1]) / (s * s);
                    let expect = f64::from(u8::from(i == j)) + dt * big[i][j];
                    assert!((bbt[i][j] - expect).abs() < 1e-12, "{flow:?}: {bbt:?} vs {big:?}");
                }
            }
            let d1 = mf.d1(t, y, driver).unwrap();
            assert_eq!(d1[0][0], 0.0);
            assert_eq!(d1[1][1], 0.0);
        }
    }
}

#[test]
fn split_drift_is_the_symplectic_gradient_of_the_modified_hamiltonian() {
    let h = 1e-5;
    for flow in separable_catalogue().into_iter().filter(FlowSpec::is_steady) {
        let form = flow.separable_form().unwrap();
        let (dt, sigma) = (0.04, 0.3);
        let mf = modified(&flow, dt, sigma, ModifiedVariant::SymplecticSplit);
        let hm = ModifiedHamiltonian::new(&form, dt, sigma);
        for (t, y, driver) in points(&flow, 300) {
            let c = form.drive(t, driver).unwrap();
            let dp = (hm.value(c, [y[0] + h, y[1]]) - hm.value(c, [y[0] - h, y[1]])) / (2.0 * h);
            let dq = (hm.value(c, [y[0], y[1] + h]) - hm.value(c, [y[0], y[1] - h])) / (2.0 * h);
            let drift = mf.drift(t, y, driver).unwrap();
            assert!((drift[0] + dq).abs() < 1e-7 * (1.0 + dq.abs()), "{flow:?}: {drift:?} vs ({dq}, {dp})");
            assert!((drift[1] - dp).abs() < 1e-7 * (1.0 + dp.abs()), "{flow:?}: {drift:?} vs ({dq}, {dp})");
        }
    }
}

#[test]
fn modified_hamiltonian_reduces_to_hamiltonian_at_zero_step() {
    let flow = FlowSpec::chaotic_cellular(0.3);
    let form = flow.separable_form().unwrap();
    let hm = ModifiedHamiltonian::new(&form, 0.0, 0.4);
    for (_, y, _) in points(&flow, 50) {
        assert_eq!(hm.value(0.0, y), form.hamiltonian(0.0, y));
    }
}

#[test]
fn splitting_conserves_the_modified_hamiltonian_to_second_order() {
    let flow = FlowSpec::taylor_green(TAU);
    let form = flow.separable_form().unwrap();
    let drift = |tau: f64| {
        let integ = Integrator::new(flow, SchemeConfig::new(SchemeKind::LieTrotter, tau, 0.0)).unwrap();
        let hm = ModifiedHamiltonian::new(&form, tau, 0.0);
        let mut s = StepState::new(0.0, [0.2, 0.1]);
        let h0 = hm.value(0.0, form.to_native(s.x));
        let mut noise = NoiseStream::new(1, 0);
        let mut worst: f64 = 0.0;
        for _ in 0..steps_for(10.0, tau).unwrap() {
            s = integ.step(&s, &mut noise).unwrap();
            worst = worst.max((hm.value(0.0, form.to_native(s.x)) - h0).abs());
        }
        worst
    };
    let d = [drift(0.01), drift(0.005), drift(0.0025)];
    for w in d.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.2..=4.8).contains(&ratio), "modified drifts {d:?}");
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let form = FlowSpec::taylor_green(1.0).separable_form().unwrap();
    for (dt, sigma) in [(-0.1, 0.1), (f64::NAN, 0.1), (0.1, -1.0), (0.1, f64::INFINITY)] {
        let err = build_modified_flow(&form, dt, sigma, ModifiedVariant::SymplecticSplit, 0.5).unwrap_err();
        assert!(matches!(err, BeaError::InvalidConfig(_)), "{err}");
    }
    assert!("split".parse::<ModifiedVariant>().is_ok());
    assert!("midpoint".parse::<ModifiedVariant>().is_err());
}

fn small_comparison(kind: SchemeKind) -> EnsembleConfig {
    let mut cfg = EnsembleConfig::new(FlowSpec::still(), SchemeConfig::new(kind, 0.1, 0.3), 256, 5.0);
    cfg.samples = SampleGrid::Linear { count: 5 };
    cfg
}

#[test]
fn comparison_rejects_unsupported_setups() {
    assert!(compare_against_modified(&small_comparison(SchemeKind::LieTrotter), 5).is_err());
    assert!(compare_against_modified(&small_comparison(SchemeKind::Strang), 20).is_err());
    let mut cfg = small_comparison(SchemeKind::LieTrotter);
    cfg.scheme.sigma = [0.3, 0.2];
    assert!(compare_against_modified(&cfg, 20).is_err());
}

#[test]
fn pure_noise_comparison_agrees_within_sampling_error() {
    for kind in [SchemeKind::LieTrotter, SchemeKind::EulerMaruyama] {
        let cfg = small_comparison(kind);
        let cmp = compare_against_modified(&cfg, 10).unwrap();
        assert_eq!(cmp.fine_tau, 0.01);
        assert_eq!(cmp.coarse.times, cmp.modified.times);
        let (a, b) = (cmp.coarse.final_d(), cmp.modified.final_d());
        let se = (cmp.coarse.final_stderr().d11.powi(2) + cmp.modified.final_stderr().d11.powi(2)).sqrt();
        assert!((a.d11 - b.d11).abs() < 4.0 * se, "{kind:?}: {a:?} vs {b:?}");
        assert_eq!(cmp.relative_gap().len(), 5);
    }
}
