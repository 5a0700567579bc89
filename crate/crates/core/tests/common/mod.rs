#![allow(dead_code)]

use effdiff::flows::FlowSpec;
use std::f64::consts::{PI, TAU};

/// Low-discrepancy points in `[0, 1)^3` (Kronecker sequence on the plastic
/// number), deterministic and well spread for sampling checks.
pub fn quasi_random(n: usize) -> impl Iterator<Item = [f64; 3]> {
    const G: f64 = 1.220_744_084_605_759_5;
    let a = [1.0 / G, 1.0 / (G * G), 1.0 / (G * G * G)];
    (1..=n).map(move |i| {
        let i = i as f64;
        [(0.5 + a[0] * i).fract(), (0.5 + a[1] * i).fract(), (0.5 + a[2] * i).fract()]
    })
}

/// A `(t, x, driver)` sample inside one space-time period of `flow`.
pub fn sample_point(flow: &FlowSpec, u: [f64; 3]) -> (f64, [f64; 2], Option<f64>) {
    let period = flow.space_period().unwrap_or(TAU);
    let t = 4.0 * PI * u[0];
    let driver = flow.needs_driver().then(|| 3.0 * (2.0 * u[0] - 1.0));
    (t, [period * (u[1] - 0.5), period * (u[2] - 0.5)], driver)
}

/// Every flow family with non-trivial parameters.
pub fn catalogue() -> Vec<FlowSpec> {
    vec![
        FlowSpec::taylor_green(TAU),
        FlowSpec::oscillating_vortex(TAU, 2.72, PI),
        FlowSpec::oscillating_vortex(TAU, 0.0, PI),
        FlowSpec::time_dependent_taylor_green(TAU, 0.8, PI),
        FlowSpec::chaotic_cellular(0.3),
        FlowSpec::chaotic_cellular(1.0),
        FlowSpec::ou_cellular(0.6),
    ]
}

/// Flows with a separable Hamiltonian.
pub fn separable_catalogue() -> Vec<FlowSpec> {
    catalogue().into_iter().filter(|f| f.separable_form().is_ok()).collect()
}
