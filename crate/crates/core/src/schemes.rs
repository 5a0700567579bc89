//! One-step integrators for `dX = v(t, X) dt + σ ⊙ dW`.
//!
//! * Euler–Maruyama: `X' = X + τ v(t, X) + σ ⊙ ΔW`.
//! * Lie–Trotter: a deterministic Hamiltonian substep followed by the
//!   noise substep.
//! * Strang: half noise, full deterministic substep, half noise. The two
//!   half increments are the Brownian bridge split of the same `ΔW` used by
//!   the other schemes, so all three share common random numbers.
//!
//! The deterministic substep solves
//!
//! ```text
//! x1* = x1 + h v1(t + βh, α x1* + (1-α) x1, (1-α) x2* + α x2)
//! x2* = x2 + h v2(t + βh, α x1* + (1-α) x1, (1-α) x2* + α x2)
//! ```
//!
//! For flows with a separable Hamiltonian and `α = 1` this is explicit in
//! native coordinates (`P* = P - h g(Q)`, `Q* = Q + h f(P*)`), a composition
//! of two shears with unit Jacobian. Otherwise it is solved by fixed-point
//! iteration on the increment `x* - x`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::flows::{FlowError, FlowFamily, FlowSpec, Mat2, SeparableForm, Vec2};
use crate::noise::{NoiseStream, OuDriver};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error("invalid scheme configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown scheme `{0}` (expected one of: em, lt, strang)")]
    UnknownScheme(String),
    #[error(
        "implicit substep did not converge at t = {t}: increment change {residual:e} after {iterations} iterations \
         (step size too large for the flow?)"
    )]
    ImplicitSolveDiverged { t: f64, residual: f64, iterations: usize },
    #[error("horizon {horizon} is not an integer multiple of the step {tau}")]
    NonCommensurateHorizon { horizon: f64, tau: f64 },
    #[error("state became non-finite at t = {0}")]
    NonFinite(f64),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    EulerMaruyama,
    LieTrotter,
    Strang,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::EulerMaruyama => "em",
            SchemeKind::LieTrotter => "lt",
            SchemeKind::Strang => "strang",
        }
    }

    pub const ALL: [SchemeKind; 3] = [SchemeKind::EulerMaruyama, SchemeKind::LieTrotter, SchemeKind::Strang];
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = SchemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "em" | "euler" | "euler-maruyama" => Ok(SchemeKind::EulerMaruyama),
            "lt" | "lie-trotter" | "split" | "splitting" => Ok(SchemeKind::LieTrotter),
            "strang" => Ok(SchemeKind::Strang),
            _ => Err(SchemeError::UnknownScheme(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    /// Step size τ.
    pub tau: f64,
    /// Implicitness weight. `None` selects the explicit shear form for
    /// separable flows and the midpoint rule (`α = 1/2`) otherwise.
    pub alpha: Option<f64>,
    /// Fraction of the step at which time-dependent flows are evaluated.
    pub beta: f64,
    pub implicit_max_iters: usize,
    /// Absolute per-component tolerance on the fixed-point increment.
    pub implicit_tol: f64,
    /// Noise amplitudes `(σ1, σ2)`.
    pub sigma: [f64; 2],
}

impl SchemeConfig {
    pub fn new(kind: SchemeKind, tau: f64, sigma: f64) -> Self {
        Self {
            kind,
            tau,
            alpha: None,
            beta: 0.5,
            implicit_max_iters: 8,
            implicit_tol: 1e-12,
            sigma: [sigma, sigma],
        }
    }

    pub fn with_kind(mut self, kind: SchemeKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        let bad = |msg: String| Err(SchemeError::InvalidConfig(msg));
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return bad(format!("dt must be positive, got {}", self.tau));
        }
        if let Some(a) = self.alpha {
            if !(0.0..=1.0).contains(&a) {
                return bad(format!("alpha must lie in [0, 1], got {a}"));
            }
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return bad(format!("beta must lie in [0, 1], got {}", self.beta));
        }
        if self.implicit_max_iters == 0 {
            return bad("implicit_iters must be at least 1".into());
        }
        if !(self.implicit_tol.is_finite() && self.implicit_tol > 0.0) {
            return bad(format!("implicit_tol must be positive, got {}", self.implicit_tol));
        }
        if self.sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return bad(format!("sigma must be non-negative, got {:?}", self.sigma));
        }
        Ok(())
    }

    /// Molecular diffusivity `σ²/2` of the first component.
    pub fn d0(&self) -> f64 {
        0.5 * self.sigma[0] * self.sigma[0]
    }
}

/// Position of one particle at time `t`; `driver` carries `η_t` for
/// OU-driven flows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepState {
    pub t: f64,
    pub x: Vec2,
    pub driver: Option<f64>,
}

impl StepState {
    pub fn new(t: f64, x: Vec2) -> Self {
        Self { t, x, driver: None }
    }
}

#[derive(Debug, Clone, Copy)]
enum Substep {
    Explicit(SeparableForm),
    Implicit { alpha: f64 },
}

/// A flow bound to a scheme configuration.
#[derive(Debug, Clone)]
pub struct Integrator {
    flow: FlowSpec,
    cfg: SchemeConfig,
    substep: Substep,
}

impl Integrator {
    pub fn new(flow: FlowSpec, cfg: SchemeConfig) -> Result<Self, SchemeError> {
        cfg.validate()?;
        flow.validate()?;
        let separable = flow.separable_form().ok();
        let substep = match (cfg.alpha, separable) {
            (None, Some(form)) | (Some(1.0), Some(form)) => Substep::Explicit(form),
            (None, None) => Substep::Implicit { alpha: 0.5 },
            (Some(alpha), _) => Substep::Implicit { alpha },
        };
        Ok(Self { flow, cfg, substep })
    }

    pub fn flow(&self) -> &FlowSpec {
        &self.flow
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    /// Whether the deterministic substep runs in explicit shear form.
    pub fn is_explicit(&self) -> bool {
        matches!(self.substep, Substep::Explicit(_))
    }

    /// The deterministic (Hamiltonian) substep of length `h`, advancing `t`
    /// by `h`.
    pub fn deterministic_substep(&self, s: &StepState, h: f64) -> Result<StepState, SchemeError> {
        let te = s.t + self.cfg.beta * h;
        let x = match self.substep {
            Substep::Explicit(form) => {
                let drive = form.drive(te, s.driver)?;
                let dy = form.shear_step(drive, form.to_native(s.x), h);
                let dx = form.delta_from_native(dy);
                [s.x[0] + dx[0], s.x[1] + dx[1]]
            }
            Substep::Implicit { alpha } => {
                let drive = self.flow.drive(te, s.driver)?;
                let d = self.solve_increment(drive, s.x, h, alpha, s.t)?;
                [s.x[0] + d[0], s.x[1] + d[1]]
            }
        };
        Ok(StepState {
            t: s.t + h,
            x,
            driver: s.driver,
        })
    }

    /// Fixed-point iteration for the increment `d = x* - x`.
    fn solve_increment(&self, drive: f64, x: Vec2, h: f64, alpha: f64, t: f64) -> Result<Vec2, SchemeError> {
        let eval = |d: Vec2| {
            let arg = [x[0] + alpha * d[0], x[1] + (1.0 - alpha) * d[1]];
            let v = self.flow.velocity_driven(drive, arg);
            [h * v[0], h * v[1]]
        };
        // Explicit Euler predictor.
        let mut d = eval([0.0, 0.0]);
        let mut change = f64::INFINITY;
        for _ in 0..self.cfg.implicit_max_iters {
            let next = eval(d);
            change = (next[0] - d[0]).abs().max((next[1] - d[1]).abs());
            d = next;
            if change <= self.cfg.implicit_tol {
                return Ok(d);
            }
        }
        Err(SchemeError::ImplicitSolveDiverged {
            t,
            residual: change,
            iterations: self.cfg.implicit_max_iters,
        })
    }

    /// Jacobian of the deterministic substep obtained from the implicit
    /// function theorem at the solved state (exact up to the solve
    /// tolerance, no finite differencing).
    pub fn substep_jacobian(&self, s: &StepState, h: f64) -> Result<Mat2, SchemeError> {
        let te = s.t + self.cfg.beta * h;
        match self.substep {
            Substep::Explicit(form) => {
                // Shear composition in native coordinates, conjugated by the map.
                let drive = form.drive(te, s.driver)?;
                let y = form.to_native(s.x);
                let dy = form.shear_step(drive, y, h);
                let gq = form.dg(drive, y[1]);
                let fp = form.df(drive, y[0] + dy[0]);
                // J_native = [[1, -h g'], [h f', 1 - h² f' g']]
                let jn = [[1.0, -h * gq], [h * fp, 1.0 - h * h * fp * gq]];
                Ok(match form.coordinate_map() {
                    Some(m) => {
                        let a = m.matrix;
                        let left = [
                            [
                                m.backward_delta([jn[0][0], jn[1][0]])[0],
                                m.backward_delta([jn[0][1], jn[1][1]])[0],
                            ],
                            [
                                m.backward_delta([jn[0][0], jn[1][0]])[1],
                                m.backward_delta([jn[0][1], jn[1][1]])[1],
                            ],
                        ];
                        mat_mul(&left, &a)
                    }
                    None => jn,
                })
            }
            Substep::Implicit { alpha } => {
                let drive = self.flow.drive(te, s.driver)?;
                let d = self.solve_increment(drive, s.x, h, alpha, s.t)?;
                let arg = [s.x[0] + alpha * d[0], s.x[1] + (1.0 - alpha) * d[1]];
                let dv = self.flow.velocity_gradient_driven(drive, arg);
                // x* = x + h v(M1 x* + M2 x): (I - h Dv M1) J = I + h Dv M2.
                let m1 = [[alpha, 0.0], [0.0, 1.0 - alpha]];
                let m2 = [[1.0 - alpha, 0.0], [0.0, alpha]];
                let a = mat_sub(&IDENTITY, &mat_scale(&mat_mul(&dv, &m1), h));
                let b = mat_add(&IDENTITY, &mat_scale(&mat_mul(&dv, &m2), h));
                Ok(mat_mul(&mat_inv(&a), &b))
            }
        }
    }

    /// `x ← x + σ ⊙ ΔW`; time is unchanged.
    #[inline]
    pub fn noise_substep(&self, s: &StepState, dw: Vec2) -> StepState {
        let sg = self.cfg.sigma;
        StepState {
            t: s.t,
            x: [s.x[0] + sg[0] * dw[0], s.x[1] + sg[1] * dw[1]],
            driver: s.driver,
        }
    }

    /// One full step of length τ.
    pub fn step(&self, s: &StepState, noise: &mut NoiseStream) -> Result<StepState, SchemeError> {
        let tau = self.cfg.tau;
        match self.cfg.kind {
            SchemeKind::EulerMaruyama => {
                let v = self.flow.velocity(s.t, s.x, s.driver)?;
                let dw = noise.gaussian_increment(tau);
                let sg = self.cfg.sigma;
                Ok(StepState {
                    t: s.t + tau,
                    x: [
                        s.x[0] + tau * v[0] + sg[0] * dw[0],
                        s.x[1] + tau * v[1] + sg[1] * dw[1],
                    ],
                    driver: s.driver,
                })
            }
            SchemeKind::LieTrotter => {
                let det = self.deterministic_substep(s, tau)?;
                Ok(self.noise_substep(&det, noise.gaussian_increment(tau)))
            }
            SchemeKind::Strang => {
                let (dw, mid) = noise.increment_with_midpoint(tau);
                if self.flow.family() == FlowFamily::Still {
                    // The identity substep lets both noise halves merge.
                    let mut out = self.noise_substep(s, dw);
                    out.t += tau;
                    return Ok(out);
                }
                let first = self.noise_substep(s, mid);
                let det = self.deterministic_substep(&first, tau)?;
                Ok(self.noise_substep(&det, [dw[0] - mid[0], dw[1] - mid[1]]))
            }
        }
    }

    /// Number of steps covering `horizon`, which must be a multiple of τ.
    pub fn steps_for(&self, horizon: f64) -> Result<usize, SchemeError> {
        steps_for(horizon, self.cfg.tau)
    }

    /// Integrates from `start` over `horizon`, calling `observer(i, state)`
    /// after step `sample_steps[i]` (1-based step counts, ascending).
    ///
    /// When `driver` is given its value at each step start is loaded into
    /// the state before stepping.
    pub fn integrate_path<F>(
        &self,
        start: StepState,
        horizon: f64,
        noise: &mut NoiseStream,
        mut driver: Option<&mut OuDriver>,
        sample_steps: &[usize],
        mut observer: F,
    ) -> Result<StepState, SchemeError>
    where
        F: FnMut(usize, &StepState),
    {
        let n = self.steps_for(horizon)?;
        let tau = self.cfg.tau;
        let t0 = start.t;
        let mut s = start;
        let mut next_sample = 0;
        for k in 0..n {
            if let Some(d) = driver.as_deref_mut() {
                s.driver = Some(if k == 0 { d.value() } else { d.advance() });
            }
            s = self.step(&s, noise)?;
            s.t = t0 + (k + 1) as f64 * tau;
            while next_sample < sample_steps.len() && sample_steps[next_sample] == k + 1 {
                if !(s.x[0].is_finite() && s.x[1].is_finite()) {
                    return Err(SchemeError::NonFinite(s.t));
                }
                observer(next_sample, &s);
                next_sample += 1;
            }
        }
        if !(s.x[0].is_finite() && s.x[1].is_finite()) {
            return Err(SchemeError::NonFinite(s.t));
        }
        Ok(s)
    }
}

/// `horizon / tau` as an integer, to 1e-9 relative.
pub fn steps_for(horizon: f64, tau: f64) -> Result<usize, SchemeError> {
    if horizon == 0.0 {
        return Ok(0);
    }
    let ratio = horizon / tau;
    let n = ratio.round();
    if !(horizon > 0.0 && n >= 1.0 && ((ratio - n) / ratio).abs() <= 1e-9) {
        return Err(SchemeError::NonCommensurateHorizon { horizon, tau });
    }
    Ok(n as usize)
}

const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

pub(crate) fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn mat_add(a: &Mat2, b: &Mat2) -> Mat2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

fn mat_sub(a: &Mat2, b: &Mat2) -> Mat2 {
    [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]]
}

fn mat_scale(a: &Mat2, s: f64) -> Mat2 {
    [[s * a[0][0], s * a[0][1]], [s * a[1][0], s * a[1][1]]]
}

fn mat_inv(a: &Mat2) -> Mat2 {
    let det = crate::flows::det2(a);
    [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]]
}
