use effdiff::noise::{derive_seed, ou_path, ou_step, NoiseStream, OuDriver, OuParams};
use statrs::distribution::{ContinuousCDF, Normal};

fn standard_ou() -> OuParams {
    OuParams::default()
}

#[test]
fn identical_keys_give_identical_increments() {
    let a = NoiseStream::at(7, 3, 1234).gaussian_increment(0.2);
    let b = NoiseStream::at(7, 3, 1234).gaussian_increment(0.2);
    assert_eq!(a, b);
}

#[test]
fn increments_have_zero_mean_and_independent_components() {
    let n = 1_000_000;
    let mut noise = NoiseStream::new(11, 0);
    let (mut s0, mut s1, mut s01) = (0.0, 0.0, 0.0);
    for _ in 0..n {
        let dw = noise.gaussian_increment(1.0);
        s0 += dw[0];
        s1 += dw[1];
        s01 += dw[0] * dw[1];
    }
    let n = n as f64;
    let (m0, m1) = (s0 / n, s1 / n);
    assert!(m0.abs() < 3e-3 && m1.abs() < 3e-3, "means {m0} {m1}");
    let cov = s01 / n - m0 * m1;
    assert!(cov.abs() < 3e-3, "covariance {cov}");
}

#[test]
fn scaled_increments_pass_kolmogorov_smirnov() {
    let n = 100_000;
    let tau = 0.05;
    let mut noise = NoiseStream::new(3, 9);
    let mut z: Vec<f64> = (0..n / 2)
        .flat_map(|_| noise.gaussian_increment(tau))
        .map(|x| x / tau.sqrt())
        .collect();
    z.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    let nf = z.len() as f64;
    let d = z
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = normal.cdf(x);
            (c - i as f64 / nf).max((i + 1) as f64 / nf - c)
        })
        .fold(0.0, f64::max);
    // Asymptotic critical value at the 1e-3 level.
    let critical = 1.949 / nf.sqrt();
    assert!(d < critical, "KS statistic {d} >= {critical}");
}

#[test]
fn particle_substreams_are_uncorrelated() {
    let n = 1_000_000;
    let mut a = NoiseStream::new(5, 0);
    let mut b = NoiseStream::new(5, 1);
    let mut cross = [0.0; 2];
    for _ in 0..n {
        let (x, y) = (a.gaussian_increment(1.0), b.gaussian_increment(1.0));
        cross[0] += x[0] * y[0];
        cross[1] += x[1] * y[1];
    }
    let bound = 3.0 / (n as f64).sqrt();
    for c in cross {
        assert!((c / n as f64).abs() < bound, "cross-correlation {}", c / n as f64);
    }
}

#[test]
fn ou_substream_is_uncorrelated_with_particles() {
    let n = 200_000;
    let tau = 1.0;
    let mut driver = OuDriver::new(standard_ou(), 5, 0, tau);
    let mut particle = NoiseStream::new(5, 0);
    let (decay, spread) = ((-tau).exp(), ((1.0 - (-2.0 * tau).exp()) / 2.0).sqrt());
    let mut cross = 0.0;
    let mut prev = driver.value();
    for _ in 0..n {
        let next = driver.advance();
        let xi = (next - prev * decay) / spread;
        prev = next;
        cross += xi * particle.gaussian_increment(1.0)[0];
    }
    let c = cross / n as f64;
    assert!(c.abs() < 3.0 / (n as f64).sqrt(), "{c}");
}

#[test]
fn derived_seeds_are_distinct_and_stable() {
    let seeds: Vec<u64> = (0..1000).map(|i| derive_seed(1, i)).collect();
    let mut sorted = seeds.clone();
    sorted.sort_unstable();
    sorted.dedup();
    assert_eq!(sorted.len(), seeds.len());
    assert_eq!(derive_seed(1, 17), seeds[17]);
}

#[test]
fn deterministic_ou_decay_halves_in_log_two() {
    let params = OuParams {
        theta: 1.0,
        mu: 0.0,
        sigma: 0.0,
    };
    assert!((ou_step(&params, 1.0, std::f64::consts::LN_2, 0.7) - 0.5).abs() < 1e-15);
}

#[test]
fn ou_long_run_variance_is_stationary() {
    let n = 1_000_000;
    let mut driver = OuDriver::new(standard_ou(), 77, 0, 1.0);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let v = driver.advance();
        s += v;
        s2 += v * v;
    }
    let mean = s / n as f64;
    let var = s2 / n as f64 - mean * mean;
    assert!((var / 0.5 - 1.0).abs() < 0.01, "variance {var}");
}

#[test]
fn ou_autocovariance_decays_exponentially() {
    let tau = 0.5;
    let path = ou_path(&standard_ou(), tau, 1_000_000, 31, 0).values;
    let batches = 100;
    let len = path.len() / batches;
    for lag_steps in [1usize, 2, 4] {
        let expected = 0.5 * (-(lag_steps as f64) * tau).exp();
        let estimates: Vec<f64> = path
            .chunks_exact(len)
            .map(|b| {
                let m = b.len() - lag_steps;
                (0..m).map(|i| b[i] * b[i + lag_steps]).sum::<f64>() / m as f64
            })
            .collect();
        let mean = estimates.iter().sum::<f64>() / batches as f64;
        let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
        let se = (var / batches as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * se, "lag {lag_steps}: {mean} vs {expected} (se {se})");
    }
}

#[test]
fn silent_ou_path_is_zero() {
    let params = OuParams {
        theta: 1.0,
        mu: 0.0,
        sigma: 0.0,
    };
    let path = ou_path(&params, 0.05, 1000, 4, 2);
    assert_eq!(path.values.len(), 1001);
    assert!(path.values.iter().all(|&v| v == 0.0));
}

#[test]
fn ou_paths_are_reproducible() {
    let a = ou_path(&standard_ou(), 0.05, 500, 4, 2);
    assert_eq!(a, ou_path(&standard_ou(), 0.05, 500, 4, 2));
    assert_ne!(a, ou_path(&standard_ou(), 0.05, 500, 4, 3));
}

#[test]
fn pooled_ou_variance_over_forty_paths() {
    let (tau, horizon) = (0.05, 5000.0);
    let steps = (horizon / tau) as usize;
    let (mut s, mut s2, mut n) = (0.0, 0.0, 0usize);
    for path in 0..40 {
        for v in ou_path(&standard_ou(), tau, steps, 12, path).values {
            s += v;
            s2 += v * v;
            n += 1;
        }
    }
    let mean = s / n as f64;
    let var = s2 / n as f64 - mean * mean;
    assert!((var / 0.5 - 1.0).abs() < 0.02, "pooled variance {var}");
}
