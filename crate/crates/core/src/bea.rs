//! First-order modified equations of the splitting and Euler–Maruyama
//! schemes for separable flows, and simulation of those equations.
//!
//! Everything here lives in the native coordinates of a [`SeparableForm`],
//! where `dP = -g dt + σ̃ dW1`, `dQ = f dt + σ̃ dW2` and `σ̃` is the physical
//! noise amplitude times the form's noise scale.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ensemble::{run_paths, DiffusivityEstimate, EnsembleConfig, EnsembleError, SampleSchedule};
use crate::flows::{FlowError, Mat2, SeparableForm, Vec2};
use crate::noise::{NoiseStream, OuDriver};
use crate::schemes::{steps_for, SchemeKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeaError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error("invalid modified-flow request: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModifiedVariant {
    SymplecticSplit,
    EulerMaruyama,
}

impl ModifiedVariant {
    pub fn name(self) -> &'static str {
        match self {
            ModifiedVariant::SymplecticSplit => "split",
            ModifiedVariant::EulerMaruyama => "em",
        }
    }

    /// The variant describing `kind`, if it has one.
    pub fn for_scheme(kind: SchemeKind) -> Option<Self> {
        match kind {
            SchemeKind::LieTrotter => Some(ModifiedVariant::SymplecticSplit),
            SchemeKind::EulerMaruyama => Some(ModifiedVariant::EulerMaruyama),
            SchemeKind::Strang => None,
        }
    }
}

impl fmt::Display for ModifiedVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModifiedVariant {
    type Err = BeaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "split" | "lt" | "symplectic" => Ok(ModifiedVariant::SymplecticSplit),
            "em" | "euler" => Ok(ModifiedVariant::EulerMaruyama),
            _ => Err(BeaError::InvalidConfig(format!(
                "unknown variant `{s}` (expected one of: split, em)"
            ))),
        }
    }
}

/// Modified SDE `dY = (v + Δt v1) dt + σ̃ (I + Δt d1) dW` in native
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModifiedFlow {
    form: SeparableForm,
    dt: f64,
    sigma: f64,
    variant: ModifiedVariant,
    /// Coefficient of the `f_t`, `g_t` terms.
    time_weight: f64,
}

/// Everything the coefficients need at one point.
struct Local {
    f: f64,
    g: f64,
    df: f64,
    dg: f64,
    d2f: f64,
    d2g: f64,
    ft: f64,
    gt: f64,
}

/// Builds the modified flow of `variant` at step `dt` for physical noise
/// amplitude `sigma`. `beta` is the time-freezing fraction of the splitting
/// step; Euler–Maruyama evaluates at the step start regardless.
pub fn build_modified_flow(
    form: &SeparableForm,
    dt: f64,
    sigma: f64,
    variant: ModifiedVariant,
    beta: f64,
) -> Result<ModifiedFlow, BeaError> {
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(BeaError::InvalidConfig(format!("dt must be non-negative, got {dt}")));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(BeaError::InvalidConfig(format!("sigma must be non-negative, got {sigma}")));
    }
    let time_weight = match variant {
        ModifiedVariant::SymplecticSplit => 0.5 - beta,
        ModifiedVariant::EulerMaruyama => 0.5,
    };
    if form.is_time_dependent() && time_weight != 0.0 && dt != 0.0 {
        form.drive_rate(0.0)?;
    }
    Ok(ModifiedFlow {
        form: *form,
        dt,
        sigma: sigma * form.noise_scale(),
        variant,
        time_weight,
    })
}

impl ModifiedFlow {
    pub fn form(&self) -> &SeparableForm {
        &self.form
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn variant(&self) -> ModifiedVariant {
        self.variant
    }

    /// Noise amplitude in native coordinates.
    pub fn native_sigma(&self) -> f64 {
        self.sigma
    }

    fn local(&self, t: f64, y: Vec2, driver: Option<f64>) -> Result<Local, FlowError> {
        let form = &self.form;
        let c = form.drive(t, driver)?;
        let [p, q] = y;
        let (ft, gt) = if self.time_weight != 0.0 && form.is_time_dependent() {
            let rate = form.drive_rate(t)?;
            (form.f_t(rate, p), form.g_t(rate, q))
        } else {
            (0.0, 0.0)
        };
        Ok(Local {
            f: form.f(c, p),
            g: form.g(c, q),
            df: form.df(c, p),
            dg: form.dg(c, q),
            d2f: form.d2f(c, p),
            d2g: form.d2g(c, q),
            ft,
            gt,
        })
    }

    /// Drift `v + Δt v1`.
    pub fn drift(&self, t: f64, y: Vec2, driver: Option<f64>) -> Result<Vec2, FlowError> {
        let l = self.local(t, y, driver)?;
        let (dt, s2, w) = (self.dt, self.sigma * self.sigma, self.time_weight);
        let p = -l.g + dt * (0.5 * l.f * l.dg + 0.25 * s2 * l.d2g + w * l.gt);
        let q = match self.variant {
            ModifiedVariant::SymplecticSplit => l.f - dt * (0.5 * l.df * l.g + 0.25 * s2 * l.d2f + w * l.ft),
            ModifiedVariant::EulerMaruyama => l.f + dt * (0.5 * l.df * l.g - 0.25 * s2 * l.d2f - w * l.ft),
        };
        Ok([p, q])
    }

    /// `d1 = [[0, g'/2], [-f'/2, 0]]`.
    pub fn d1(&self, t: f64, y: Vec2, driver: Option<f64>) -> Result<Mat2, FlowError> {
        let c = self.form.drive(t, driver)?;
        Ok([[0.0, 0.5 * self.form.dg(c, y[1])], [-0.5 * self.form.df(c, y[0]), 0.0]])
    }

    /// `σ̃ (I + Δt d1)`.
    pub fn diffusion_matrix(&self, t: f64, y: Vec2, driver: Option<f64>) -> Result<Mat2, FlowError> {
        let d1 = self.d1(t, y, driver)?;
        let (s, dt) = (self.sigma, self.dt);
        Ok([[s, s * dt * d1[0][1]], [s * dt * d1[1][0], s]])
    }

    /// `D1 = [[Δt g'²/4, (g' - f')/2], [(g' - f')/2, Δt f'²/4]]`, so that
    /// `(I + Δt d1)(I + Δt d1)ᵀ = I + Δt D1`.
    pub fn big_d1(&self, t: f64, y: Vec2, driver: Option<f64>) -> Result<Mat2, FlowError> {
        let c = self.form.drive(t, driver)?;
        let (fp, gp) = (self.form.df(c, y[0]), self.form.dg(c, y[1]));
        let off = 0.5 * (gp - fp);
        Ok([[0.25 * self.dt * gp * gp, off], [off, 0.25 * self.dt * fp * fp]])
    }

    /// Closed-form divergence of the drift: zero for the splitting variant,
    /// `Δt f' g'` for Euler–Maruyama.
    pub fn drift_divergence(&self, t: f64, y: Vec2, driver: Option<f64>) -> Result<f64, FlowError> {
        Ok(match self.variant {
            ModifiedVariant::SymplecticSplit => 0.0,
            ModifiedVariant::EulerMaruyama => {
                let c = self.form.drive(t, driver)?;
                self.dt * self.form.df(c, y[0]) * self.form.dg(c, y[1])
            }
        })
    }
}

/// `H^Δt = H - Δt (f g / 2 + σ̃² (f' + g') / 4)` in native coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModifiedHamiltonian {
    form: SeparableForm,
    dt: f64,
    sigma: f64,
}

impl ModifiedHamiltonian {
    /// `sigma` is the physical noise amplitude.
    pub fn new(form: &SeparableForm, dt: f64, sigma: f64) -> Self {
        Self {
            form: *form,
            dt,
            sigma: sigma * form.noise_scale(),
        }
    }

    pub fn value(&self, drive: f64, y: Vec2) -> f64 {
        let form = &self.form;
        let (f, g) = (form.f(drive, y[0]), form.g(drive, y[1]));
        let (df, dg) = (form.df(drive, y[0]), form.dg(drive, y[1]));
        form.hamiltonian(drive, y) - self.dt * (0.5 * f * g + 0.25 * self.sigma * self.sigma * (df + dg))
    }
}

/// Outcome of a divergence scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceReport {
    pub samples: usize,
    /// Largest central-difference divergence seen.
    pub max_abs_divergence: f64,
    /// Where it was seen, `(t, P, Q)`.
    pub worst_point: [f64; 3],
}

impl DivergenceReport {
    pub fn is_divergence_free(&self, tol: f64) -> bool {
        self.max_abs_divergence < tol
    }
}

/// Scans `samples` low-discrepancy points `(t, P, Q)` of `[0, 2π)³` and
/// reports the largest central-difference divergence (step `1e-5`) of the
/// drift. Driver-dependent flows are probed with the driver value set to a
/// scaled copy of `t`.
pub fn verify_divergence_free(mf: &ModifiedFlow, samples: usize) -> Result<DivergenceReport, FlowError> {
    // Additive recurrence on the inverse powers of the root of x⁴ = x + 1.
    const ALPHA: [f64; 3] = [0.819_172_513_396_164_4, 0.671_043_606_703_789_2, 0.549_700_477_901_970_4];
    let h = 1e-5;
    let tau = std::f64::consts::TAU;
    let mut report = DivergenceReport {
        samples,
        max_abs_divergence: 0.0,
        worst_point: [0.0; 3],
    };
    let needs_driver = mf.form.flow().needs_driver();
    for i in 0..samples {
        let u: [f64; 3] = std::array::from_fn(|d| (0.5 + ALPHA[d] * (i + 1) as f64).fract());
        let (t, p, q) = (tau * u[0], tau * u[1], tau * u[2]);
        let driver = needs_driver.then(|| 2.0 * (u[0] - 0.5));
        let dp = (mf.drift(t, [p + h, q], driver)?[0] - mf.drift(t, [p - h, q], driver)?[0]) / (2.0 * h);
        let dq = (mf.drift(t, [p, q + h], driver)?[1] - mf.drift(t, [p, q - h], driver)?[1]) / (2.0 * h);
        let div = (dp + dq).abs();
        if div > report.max_abs_divergence {
            report.max_abs_divergence = div;
            report.worst_point = [t, p, q];
        }
    }
    Ok(report)
}

/// Simulates `mf` with Euler–Maruyama at step `tau`, writing the physical
/// displacement from `x0` at every scheduled step into `out`.
#[allow(clippy::too_many_arguments)]
fn simulate_modified(
    mf: &ModifiedFlow,
    x0: Vec2,
    tau: f64,
    n_steps: usize,
    schedule_steps: &[usize],
    noise: &mut NoiseStream,
    mut driver: Option<OuDriver>,
    out: &mut [Vec2],
) -> Result<(), FlowError> {
    let form = &mf.form;
    let y0 = form.to_native(x0);
    let mut y = y0;
    let mut next = 0;
    for k in 0..n_steps {
        let t = k as f64 * tau;
        let eta = driver.as_mut().map(|d| if k == 0 { d.value() } else { d.advance() });
        let a = mf.drift(t, y, eta)?;
        let b = mf.diffusion_matrix(t, y, eta)?;
        let dw = noise.gaussian_increment(tau);
        y = [
            y[0] + tau * a[0] + b[0][0] * dw[0] + b[0][1] * dw[1],
            y[1] + tau * a[1] + b[1][0] * dw[0] + b[1][1] * dw[1],
        ];
        while next < schedule_steps.len() && schedule_steps[next] == k + 1 {
            out[next] = form.delta_from_native([y[0] - y0[0], y[1] - y0[1]]);
            next += 1;
        }
    }
    Ok(())
}

/// Coarse integrator output next to its modified flow simulated finely.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedComparison {
    pub variant: ModifiedVariant,
    pub coarse_tau: f64,
    pub fine_tau: f64,
    pub coarse: DiffusivityEstimate,
    pub modified: DiffusivityEstimate,
}

impl ModifiedComparison {
    /// `|2(D11+D22)_coarse - 2(D11+D22)_modified| / 2(D11+D22)_modified` at
    /// each sample time.
    pub fn relative_gap(&self) -> Vec<f64> {
        self.coarse
            .d
            .iter()
            .zip(&self.modified.d)
            .map(|(a, b)| (a.trace() - b.trace()).abs() / b.trace())
            .collect()
    }

    pub fn final_relative_gap(&self) -> f64 {
        *self.relative_gap().last().expect("at least one sample")
    }
}

/// Runs the configured integrator at its own step and Euler–Maruyama on the
/// corresponding modified flow at step `τ / fine_factor`, both over the
/// same horizon, sample times and seed.
pub fn compare_against_modified(cfg: &EnsembleConfig, fine_factor: usize) -> Result<ModifiedComparison, BeaError> {
    if fine_factor < 10 {
        return Err(BeaError::InvalidConfig(format!(
            "fine_factor must be at least 10, got {fine_factor}"
        )));
    }
    let variant = ModifiedVariant::for_scheme(cfg.scheme.kind).ok_or_else(|| {
        BeaError::InvalidConfig(format!("scheme `{}` has no first-order modified flow", cfg.scheme.kind))
    })?;
    if cfg.scheme.sigma[0] != cfg.scheme.sigma[1] {
        return Err(BeaError::InvalidConfig("modified flows need isotropic noise".into()));
    }
    let form = cfg.flow.separable_form()?;
    let coarse_tau = cfg.scheme.tau;
    let mf = build_modified_flow(&form, coarse_tau, cfg.scheme.sigma[0], variant, cfg.scheme.beta)?;

    let coarse = crate::ensemble::run_ensemble(cfg)?;

    let fine_tau = coarse_tau / fine_factor as f64;
    let n_fine = steps_for(cfg.horizon, fine_tau).map_err(EnsembleError::from)?;
    let coarse_schedule = SampleSchedule::resolve(&cfg.samples, cfg.horizon, coarse_tau)?;
    let fine_schedule = SampleSchedule {
        steps: coarse_schedule.steps.iter().map(|s| s * fine_factor).collect(),
        times: coarse_schedule.times.clone(),
    };
    let layout = if cfg.flow.needs_driver() { cfg.ou } else { None };
    let groups = layout.map_or(1, |l| l.n_paths);
    let (seed, x0) = (cfg.seed, cfg.x0);
    let modified = run_paths(cfg.n_particles, groups, &fine_schedule, cfg.threads, |particle, group, out| {
        let mut noise = NoiseStream::new(seed, particle);
        let driver = layout.map(|l| OuDriver::new(l.params, seed, group as u64, fine_tau));
        simulate_modified(&mf, x0, fine_tau, n_fine, &fine_schedule.steps, &mut noise, driver, out)
            .map_err(|e| EnsembleError::Particle {
                particle,
                source: e.into(),
            })
    })?;
    Ok(ModifiedComparison {
        variant,
        coarse_tau,
        fine_tau,
        coarse,
        modified,
    })
}
