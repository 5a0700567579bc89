//! Two-dimensional incompressible velocity fields.
//!
//! Every family is generated by a stream function `H(t, p, q)` with
//! `v = (-∂H/∂q, ∂H/∂p)`. Families whose Hamiltonian splits as
//! `F(t, P) + G(t, Q)` (possibly after a linear change of variables) also
//! expose a [`SeparableForm`], which the splitting integrator uses to take
//! explicit, volume-preserving steps.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A point or vector in the plane.
pub type Vec2 = [f64; 2];

/// A 2×2 matrix stored row-major.
pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("unknown flow family `{0}` (expected one of: {families})", families = FlowFamily::NAMES.join(", "))]
    UnknownFamily(String),
    #[error("flow family `{family}` requires parameter `{param}`")]
    MissingParameter { family: FlowFamily, param: &'static str },
    #[error("parameter `{param}` must be {requirement}, got {value}")]
    InvalidParameter {
        param: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("flow `{0}` has no separable Hamiltonian")]
    NotSeparable(FlowFamily),
    #[error("flow `{0}` is driven by an external process but no driver value was supplied")]
    MissingDriver(FlowFamily),
    #[error("flow `{0}` does not provide the time derivative `{1}`")]
    MissingDerivative(FlowFamily, &'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlowFamily {
    /// `v ≡ 0`; pure molecular diffusion.
    Still,
    /// Steady cellular flow `(sin kp cos kq, -cos kp sin kq)`.
    TaylorGreen,
    /// Cells whose horizontal phase oscillates as `B sin(ωt)`.
    OscillatingVortex,
    /// Taylor–Green cells with amplitude `1 + B sin(ωt)`.
    TimeDependentTaylorGreen,
    /// `(cos q + θ cos t sin q, cos p + θ cos t sin p)`.
    ChaoticCellular,
    /// [`FlowFamily::ChaoticCellular`] with `cos t` replaced by an
    /// Ornstein–Uhlenbeck driver `η_t`.
    OuCellular,
}

impl FlowFamily {
    pub const NAMES: [&'static str; 6] = [
        "still",
        "taylor-green",
        "oscillating-vortex",
        "td-taylor-green",
        "chaotic-cellular",
        "ou-cellular",
    ];

    pub fn name(self) -> &'static str {
        match self {
            FlowFamily::Still => "still",
            FlowFamily::TaylorGreen => "taylor-green",
            FlowFamily::OscillatingVortex => "oscillating-vortex",
            FlowFamily::TimeDependentTaylorGreen => "td-taylor-green",
            FlowFamily::ChaoticCellular => "chaotic-cellular",
            FlowFamily::OuCellular => "ou-cellular",
        }
    }

    /// Parameters that must be present when building from a parameter map.
    pub fn required_params(self) -> &'static [&'static str] {
        match self {
            FlowFamily::Still => &[],
            FlowFamily::TaylorGreen => &["k"],
            FlowFamily::OscillatingVortex | FlowFamily::TimeDependentTaylorGreen => {
                &["k", "B", "omega"]
            }
            FlowFamily::ChaoticCellular | FlowFamily::OuCellular => &["theta"],
        }
    }
}

impl fmt::Display for FlowFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FlowFamily {
    type Err = FlowError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Ok(match norm.as_str() {
            "still" | "zero" => FlowFamily::Still,
            "taylor-green" | "taylorgreen" | "tg" => FlowFamily::TaylorGreen,
            "oscillating-vortex" | "oscillatingvortex" | "ov" => FlowFamily::OscillatingVortex,
            "td-taylor-green" | "timedependenttaylorgreen" | "time-dependent-taylor-green" => {
                FlowFamily::TimeDependentTaylorGreen
            }
            "chaotic-cellular" | "chaoticcellular" | "cellular" => FlowFamily::ChaoticCellular,
            "ou-cellular" | "oucellular" => FlowFamily::OuCellular,
            _ => return Err(FlowError::UnknownFamily(s.to_string())),
        })
    }
}

/// How a flow depends on time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeDependence {
    Steady,
    Periodic(f64),
    /// Driven by a random process; no period.
    Aperiodic,
}

/// A fully parameterised velocity field. Immutable and cheap to clone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSpec {
    family: FlowFamily,
    /// Spatial wavenumber.
    k: f64,
    /// Oscillation amplitude.
    b: f64,
    /// Angular frequency of the oscillation.
    omega: f64,
    /// Strength of the time-periodic (or OU) perturbation.
    theta: f64,
}

/// Default wavenumber for the Taylor–Green families.
pub const DEFAULT_K: f64 = TAU;
/// Default angular frequency for the oscillating families.
pub const DEFAULT_OMEGA: f64 = PI;

impl FlowSpec {
    pub fn still() -> Self {
        Self::raw(FlowFamily::Still, 0.0, 0.0, 0.0, 0.0)
    }

    pub fn taylor_green(k: f64) -> Self {
        Self::raw(FlowFamily::TaylorGreen, k, 0.0, 0.0, 0.0)
    }

    pub fn oscillating_vortex(k: f64, b: f64, omega: f64) -> Self {
        Self::raw(FlowFamily::OscillatingVortex, k, b, omega, 0.0)
    }

    pub fn time_dependent_taylor_green(k: f64, b: f64, omega: f64) -> Self {
        Self::raw(FlowFamily::TimeDependentTaylorGreen, k, b, omega, 0.0)
    }

    pub fn chaotic_cellular(theta: f64) -> Self {
        Self::raw(FlowFamily::ChaoticCellular, 0.0, 0.0, 0.0, theta)
    }

    pub fn ou_cellular(theta: f64) -> Self {
        Self::raw(FlowFamily::OuCellular, 0.0, 0.0, 0.0, theta)
    }

    fn raw(family: FlowFamily, k: f64, b: f64, omega: f64, theta: f64) -> Self {
        Self {
            family,
            k,
            b,
            omega,
            theta,
        }
    }

    /// Builds a flow from named parameters (`k`, `B`, `omega`, `theta`).
    /// Parameters the family does not use are ignored.
    pub fn from_params(family: FlowFamily, params: &BTreeMap<String, f64>) -> Result<Self, FlowError> {
        let get = |name: &'static str| {
            params
                .get(name)
                .copied()
                .ok_or(FlowError::MissingParameter { family, param: name })
        };
        let spec = match family {
            FlowFamily::Still => Self::still(),
            FlowFamily::TaylorGreen => Self::taylor_green(get("k")?),
            FlowFamily::OscillatingVortex => Self::oscillating_vortex(get("k")?, get("B")?, get("omega")?),
            FlowFamily::TimeDependentTaylorGreen => {
                Self::time_dependent_taylor_green(get("k")?, get("B")?, get("omega")?)
            }
            FlowFamily::ChaoticCellular => Self::chaotic_cellular(get("theta")?),
            FlowFamily::OuCellular => Self::ou_cellular(get("theta")?),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        let uses_k = matches!(
            self.family,
            FlowFamily::TaylorGreen | FlowFamily::OscillatingVortex | FlowFamily::TimeDependentTaylorGreen
        );
        if uses_k && !(self.k.is_finite() && self.k > 0.0) {
            return Err(FlowError::InvalidParameter {
                param: "k",
                requirement: "a positive finite number",
                value: self.k,
            });
        }
        for (param, value) in [("B", self.b), ("omega", self.omega), ("theta", self.theta)] {
            if !value.is_finite() {
                return Err(FlowError::InvalidParameter {
                    param,
                    requirement: "finite",
                    value,
                });
            }
        }
        Ok(())
    }

    /// Same flow with the perturbation strength replaced.
    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    /// Same flow with the oscillation amplitude replaced.
    pub fn with_amplitude(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    pub fn family(&self) -> FlowFamily {
        self.family
    }

    /// Named parameters actually used by this family.
    pub fn params(&self) -> BTreeMap<&'static str, f64> {
        let mut out = BTreeMap::new();
        for &name in self.family.required_params() {
            let value = match name {
                "k" => self.k,
                "B" => self.b,
                "omega" => self.omega,
                _ => self.theta,
            };
            out.insert(name, value);
        }
        out
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn amplitude(&self) -> f64 {
        self.b
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Spatial period along each axis, `None` for the still flow.
    pub fn space_period(&self) -> Option<f64> {
        match self.family {
            FlowFamily::Still => None,
            FlowFamily::TaylorGreen | FlowFamily::OscillatingVortex | FlowFamily::TimeDependentTaylorGreen => {
                Some(TAU / self.k)
            }
            FlowFamily::ChaoticCellular | FlowFamily::OuCellular => Some(TAU),
        }
    }

    pub fn time_dependence(&self) -> TimeDependence {
        match self.family {
            FlowFamily::Still | FlowFamily::TaylorGreen => TimeDependence::Steady,
            FlowFamily::OscillatingVortex | FlowFamily::TimeDependentTaylorGreen => {
                if self.b == 0.0 || self.omega == 0.0 {
                    TimeDependence::Steady
                } else {
                    TimeDependence::Periodic(TAU / self.omega.abs())
                }
            }
            FlowFamily::ChaoticCellular => {
                if self.theta == 0.0 {
                    TimeDependence::Steady
                } else {
                    TimeDependence::Periodic(TAU)
                }
            }
            FlowFamily::OuCellular => {
                if self.theta == 0.0 {
                    TimeDependence::Steady
                } else {
                    TimeDependence::Aperiodic
                }
            }
        }
    }

    pub fn is_steady(&self) -> bool {
        self.time_dependence() == TimeDependence::Steady
    }

    pub fn needs_driver(&self) -> bool {
        self.family == FlowFamily::OuCellular
    }

    /// The scalar through which time enters the flow:
    /// the phase `B sin ωt` (oscillating vortex), the amplitude
    /// `1 + B sin ωt` (time-dependent Taylor–Green), `cos t` or the driver
    /// value `η_t` (cellular flows). Zero for steady families.
    pub fn drive(&self, t: f64, driver: Option<f64>) -> Result<f64, FlowError> {
        Ok(match self.family {
            FlowFamily::Still | FlowFamily::TaylorGreen => 0.0,
            FlowFamily::OscillatingVortex => self.b * (self.omega * t).sin(),
            FlowFamily::TimeDependentTaylorGreen => 1.0 + self.b * (self.omega * t).sin(),
            FlowFamily::ChaoticCellular => t.cos(),
            FlowFamily::OuCellular => driver.ok_or(FlowError::MissingDriver(self.family))?,
        })
    }

    /// Time derivative of [`FlowSpec::drive`].
    pub fn drive_rate(&self, t: f64) -> Result<f64, FlowError> {
        Ok(match self.family {
            FlowFamily::Still | FlowFamily::TaylorGreen => 0.0,
            FlowFamily::OscillatingVortex | FlowFamily::TimeDependentTaylorGreen => {
                self.b * self.omega * (self.omega * t).cos()
            }
            FlowFamily::ChaoticCellular => -t.sin(),
            FlowFamily::OuCellular => return Err(FlowError::MissingDerivative(self.family, "d(eta)/dt")),
        })
    }

    /// Velocity for an already-resolved drive value.
    #[inline]
    pub fn velocity_driven(&self, drive: f64, x: Vec2) -> Vec2 {
        let [p, q] = x;
        match self.family {
            FlowFamily::Still => [0.0, 0.0],
            FlowFamily::TaylorGreen | FlowFamily::OscillatingVortex => {
                let k = self.k;
                let (sp, cp) = (k * p + drive).sin_cos();
                let (sq, cq) = (k * q).sin_cos();
                [sp * cq, -cp * sq]
            }
            FlowFamily::TimeDependentTaylorGreen => {
                let k = self.k;
                let (sp, cp) = (k * p).sin_cos();
                let (sq, cq) = (k * q).sin_cos();
                [-drive * cp * cq, -drive * sp * sq]
            }
            FlowFamily::ChaoticCellular | FlowFamily::OuCellular => {
                let c = self.theta * drive;
                let (sp, cp) = p.sin_cos();
                let (sq, cq) = q.sin_cos();
                [cq + c * sq, cp + c * sp]
            }
        }
    }

    /// `v(t, x)`. For [`FlowFamily::OuCellular`] the driver value `η_t`
    /// must be supplied.
    pub fn velocity(&self, t: f64, x: Vec2, driver: Option<f64>) -> Result<Vec2, FlowError> {
        Ok(self.velocity_driven(self.drive(t, driver)?, x))
    }

    /// `∂v_i/∂x_j` for an already-resolved drive value.
    pub fn velocity_gradient_driven(&self, drive: f64, x: Vec2) -> Mat2 {
        let [p, q] = x;
        match self.family {
            FlowFamily::Still => [[0.0; 2]; 2],
            FlowFamily::TaylorGreen | FlowFamily::OscillatingVortex => {
                let k = self.k;
                let (sp, cp) = (k * p + drive).sin_cos();
                let (sq, cq) = (k * q).sin_cos();
                [[k * cp * cq, -k * sp * sq], [k * sp * sq, -k * cp * cq]]
            }
            FlowFamily::TimeDependentTaylorGreen => {
                let k = self.k;
                let (sp, cp) = (k * p).sin_cos();
                let (sq, cq) = (k * q).sin_cos();
                [
                    [drive * k * sp * cq, drive * k * cp * sq],
                    [-drive * k * cp * sq, -drive * k * sp * cq],
                ]
            }
            FlowFamily::ChaoticCellular | FlowFamily::OuCellular => {
                let c = self.theta * drive;
                let (sp, cp) = p.sin_cos();
                let (sq, cq) = q.sin_cos();
                [[0.0, -sq + c * cq], [-sp + c * cp, 0.0]]
            }
        }
    }

    pub fn velocity_gradient(&self, t: f64, x: Vec2, driver: Option<f64>) -> Result<Mat2, FlowError> {
        Ok(self.velocity_gradient_driven(self.drive(t, driver)?, x))
    }

    /// Stream function `H` with `v = (-H_q, H_p)`.
    pub fn hamiltonian(&self, t: f64, x: Vec2, driver: Option<f64>) -> Result<f64, FlowError> {
        let drive = self.drive(t, driver)?;
        let [p, q] = x;
        Ok(match self.family {
            FlowFamily::Still => 0.0,
            FlowFamily::TaylorGreen | FlowFamily::OscillatingVortex => {
                -(self.k * p + drive).sin() * (self.k * q).sin() / self.k
            }
            FlowFamily::TimeDependentTaylorGreen => drive * (self.k * p).cos() * (self.k * q).sin() / self.k,
            FlowFamily::ChaoticCellular | FlowFamily::OuCellular => {
                p.sin() - q.sin() + self.theta * drive * (q.cos() - p.cos())
            }
        })
    }

    /// The separable representation of this flow's Hamiltonian.
    ///
    /// Taylor–Green cells separate after rotating by 45°; the cellular
    /// families separate directly. The oscillating vortex separates only
    /// when `B = 0`.
    pub fn separable_form(&self) -> Result<SeparableForm, FlowError> {
        let k = self.k;
        let kind = match self.family {
            FlowFamily::Still => SeparableKind::Zero,
            FlowFamily::TaylorGreen => SeparableKind::RotatedCosine { k },
            FlowFamily::OscillatingVortex => {
                if self.b != 0.0 {
                    return Err(FlowError::NotSeparable(self.family));
                }
                SeparableKind::RotatedCosine { k }
            }
            FlowFamily::TimeDependentTaylorGreen => SeparableKind::RotatedSine { k },
            FlowFamily::ChaoticCellular | FlowFamily::OuCellular => SeparableKind::Cellular { theta: self.theta },
        };
        let map = match kind {
            // P = k(p - q), Q = k(p + q) + π
            SeparableKind::RotatedCosine { k } => Some(CoordinateMap::new([[k, -k], [k, k]], [0.0, PI])),
            // P = k(p + q), Q = k(q - p)
            SeparableKind::RotatedSine { k } => Some(CoordinateMap::new([[k, k], [-k, k]], [0.0, 0.0])),
            SeparableKind::Zero | SeparableKind::Cellular { .. } => None,
        };
        Ok(SeparableForm {
            flow: *self,
            kind,
            map,
        })
    }
}

/// Orientation-preserving affine change of variables `y = A x + b`.
///
/// Under such a map a Hamiltonian system stays Hamiltonian with
/// `H̃(y) = det(A) · H(x)`, and isotropic additive noise of amplitude `σ`
/// becomes noise of amplitude `σ √det(A)` when the rows of `A` are
/// orthogonal with equal norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateMap {
    pub matrix: Mat2,
    pub offset: Vec2,
    inverse: Mat2,
}

impl CoordinateMap {
    fn new(matrix: Mat2, offset: Vec2) -> Self {
        let det = det2(&matrix);
        let inverse = [
            [matrix[1][1] / det, -matrix[0][1] / det],
            [-matrix[1][0] / det, matrix[0][0] / det],
        ];
        Self {
            matrix,
            offset,
            inverse,
        }
    }

    pub fn determinant(&self) -> f64 {
        det2(&self.matrix)
    }

    #[inline]
    pub fn forward(&self, x: Vec2) -> Vec2 {
        let a = &self.matrix;
        [
            a[0][0] * x[0] + a[0][1] * x[1] + self.offset[0],
            a[1][0] * x[0] + a[1][1] * x[1] + self.offset[1],
        ]
    }

    #[inline]
    pub fn backward(&self, y: Vec2) -> Vec2 {
        self.backward_delta([y[0] - self.offset[0], y[1] - self.offset[1]])
    }

    /// Maps a displacement in native coordinates back to physical ones.
    #[inline]
    pub fn backward_delta(&self, dy: Vec2) -> Vec2 {
        let m = &self.inverse;
        [m[0][0] * dy[0] + m[0][1] * dy[1], m[1][0] * dy[0] + m[1][1] * dy[1]]
    }

    /// Factor by which isotropic noise amplitude grows under the map.
    pub fn noise_scale(&self) -> f64 {
        self.determinant().sqrt()
    }
}

pub(crate) fn det2(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SeparableKind {
    Zero,
    /// `F = -k cos P`, `G = -k cos Q`.
    RotatedCosine { k: f64 },
    /// `F = a k sin P`, `G = a k sin Q` with amplitude `a = drive`.
    RotatedSine { k: f64 },
    /// `F = sin p - θc cos p`, `G = -sin q + θc cos q` with `c = drive`.
    Cellular { theta: f64 },
}

/// `H(t, P, Q) = F(t, P) + G(t, Q)` in native coordinates, with `f = F_P`
/// and `g = G_Q` so that `dP = -g dt`, `dQ = f dt`.
///
/// All coefficient functions take the resolved drive value (see
/// [`FlowSpec::drive`]); the `_t` derivatives take its time rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparableForm {
    flow: FlowSpec,
    kind: SeparableKind,
    map: Option<CoordinateMap>,
}

impl SeparableForm {
    pub fn flow(&self) -> &FlowSpec {
        &self.flow
    }

    pub fn coordinate_map(&self) -> Option<&CoordinateMap> {
        self.map.as_ref()
    }

    /// Amplitude multiplier for isotropic noise in native coordinates.
    pub fn noise_scale(&self) -> f64 {
        self.map.map_or(1.0, |m| m.noise_scale())
    }

    #[inline]
    pub fn to_native(&self, x: Vec2) -> Vec2 {
        match &self.map {
            Some(m) => m.forward(x),
            None => x,
        }
    }

    #[inline]
    pub fn from_native(&self, y: Vec2) -> Vec2 {
        match &self.map {
            Some(m) => m.backward(y),
            None => y,
        }
    }

    #[inline]
    pub fn delta_from_native(&self, dy: Vec2) -> Vec2 {
        match &self.map {
            Some(m) => m.backward_delta(dy),
            None => dy,
        }
    }

    pub fn drive(&self, t: f64, driver: Option<f64>) -> Result<f64, FlowError> {
        self.flow.drive(t, driver)
    }

    pub fn drive_rate(&self, t: f64) -> Result<f64, FlowError> {
        self.flow.drive_rate(t)
    }

    pub fn big_f(&self, drive: f64, p: f64) -> f64 {
        match self.kind {
            SeparableKind::Zero => 0.0,
            SeparableKind::RotatedCosine { k } => -k * p.cos(),
            SeparableKind::RotatedSine { k } => drive * k * p.sin(),
            SeparableKind::Cellular { theta } => p.sin() - theta * drive * p.cos(),
        }
    }

    pub fn big_g(&self, drive: f64, q: f64) -> f64 {
        match self.kind {
            SeparableKind::Zero => 0.0,
            SeparableKind::RotatedCosine { k } => -k * q.cos(),
            SeparableKind::RotatedSine { k } => drive * k * q.sin(),
            SeparableKind::Cellular { theta } => -q.sin() + theta * drive * q.cos(),
        }
    }

    /// `H` in native coordinates.
    pub fn hamiltonian(&self, drive: f64, y: Vec2) -> f64 {
        self.big_f(drive, y[0]) + self.big_g(drive, y[1])
    }

    #[inline]
    pub fn f(&self, drive: f64, p: f64) -> f64 {
        match self.kind {
            SeparableKind::Zero => 0.0,
            SeparableKind::RotatedCosine { k } => k * p.sin(),
            SeparableKind::RotatedSine { k } => drive * k * p.cos(),
            SeparableKind::Cellular { theta } => {
                let (s, c) = p.sin_cos();
                c + theta * drive * s
            }
        }
    }

    #[inline]
    pub fn g(&self, drive: f64, q: f64) -> f64 {
        match self.kind {
            SeparableKind::Zero => 0.0,
            SeparableKind::RotatedCosine { k } => k * q.sin(),
            SeparableKind::RotatedSine { k } => drive * k * q.cos(),
            SeparableKind::Cellular { theta } => {
                let (s, c) = q.sin_cos();
                -c - theta * drive * s
            }
        }
    }

    pub fn df(&self, drive: f64, p: f64) -> f64 {
        match self.kind {
            SeparableKind::Zero => 0.0,
            SeparableKind::RotatedCosine { k } => k * p.cos(),
            SeparableKind::RotatedSine { k } => -drive * k * p.sin(),
            SeparableKind::Cellular { theta } => -p.sin() + theta * drive * p.cos(),
        }
    }

    pub fn dg(&self, drive: f64, q: f64) -> f64 {
        match self.kind {
            SeparableKind::Zero => 0.0,
            SeparableKind::RotatedCosine { k } => k * q.cos(),
            SeparableKind::RotatedSine { k } => -drive * k * q.sin(),
            SeparableKind::Cellular { theta } => q.sin() - theta * drive * q.cos(),
        }
    }

    pub fn d2f(&self, drive: f64, p: f64) -> f64 {
        match self.kind {
            SeparableKind::Zero => 0.0,
            SeparableKind::RotatedCosine { k } => -k * p.sin(),
            SeparableKind::RotatedSine { k } => -drive * k * p.cos(),
            SeparableKind::Cellular { theta } => -p.cos() - theta * drive * p.sin(),
        }
    }

    pub fn d2g(&self, drive: f64, q: f64) -> f64 {
        match self.kind {
            SeparableKind::Zero => 0.0,
            SeparableKind::RotatedCosine { k } => -k * q.sin(),
            SeparableKind::RotatedSine { k } => -drive * k * q.cos(),
            SeparableKind::Cellular { theta } => q.cos() + theta * drive * q.sin(),
        }
    }

    /// `∂f/∂t`; `rate` is the time derivative of the drive.
    pub fn f_t(&self, rate: f64, p: f64) -> f64 {
        match self.kind {
            SeparableKind::Zero | SeparableKind::RotatedCosine { .. } => 0.0,
            SeparableKind::RotatedSine { k } => rate * k * p.cos(),
            SeparableKind::Cellular { theta } => theta * rate * p.sin(),
        }
    }

    /// `∂g/∂t`; `rate` is the time derivative of the drive.
    pub fn g_t(&self, rate: f64, q: f64) -> f64 {
        match self.kind {
            SeparableKind::Zero | SeparableKind::RotatedCosine { .. } => 0.0,
            SeparableKind::RotatedSine { k } => rate * k * q.cos(),
            SeparableKind::Cellular { theta } => -theta * rate * q.sin(),
        }
    }

    /// Whether `f` and `g` depend on time.
    pub fn is_time_dependent(&self) -> bool {
        !self.flow.is_steady()
    }

    /// Physical velocity rebuilt from `(-g, f)` in native coordinates.
    pub fn velocity(&self, drive: f64, x: Vec2) -> Vec2 {
        let y = self.to_native(x);
        self.delta_from_native([-self.g(drive, y[1]), self.f(drive, y[0])])
    }

    /// One explicit symplectic shear pair in native coordinates:
    /// `P* = P - h g(Q)`, `Q* = Q + h f(P*)`. Returns the native displacement.
    #[inline]
    pub fn shear_step(&self, drive: f64, y: Vec2, h: f64) -> Vec2 {
        let dp = -h * self.g(drive, y[1]);
        let dq = h * self.f(drive, y[0] + dp);
        [dp, dq]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_names_round_trip() {
        for name in FlowFamily::NAMES {
            let fam: FlowFamily = name.parse().unwrap();
            assert_eq!(fam.name(), name);
        }
        assert!(matches!("vortex-street".parse::<FlowFamily>(), Err(FlowError::UnknownFamily(_))));
    }

    #[test]
    fn missing_parameter_is_named() {
        let mut params = BTreeMap::new();
        params.insert("k".to_string(), 1.0);
        params.insert("omega".to_string(), 1.0);
        let err = FlowSpec::from_params(FlowFamily::OscillatingVortex, &params).unwrap_err();
        assert_eq!(
            err,
            FlowError::MissingParameter {
                family: FlowFamily::OscillatingVortex,
                param: "B"
            }
        );
        assert!(err.to_string().contains("`B`"));
    }

    #[test]
    fn ou_flow_requires_driver() {
        let flow = FlowSpec::ou_cellular(0.2);
        assert_eq!(
            flow.velocity(0.0, [0.0, 0.0], None),
            Err(FlowError::MissingDriver(FlowFamily::OuCellular))
        );
        let v = flow.velocity(0.0, [0.0, 0.0], Some(1.0)).unwrap();
        assert_eq!(v, [1.0, 1.0]);
    }

    #[test]
    fn oscillating_vortex_with_phase_is_not_separable() {
        let err = FlowSpec::oscillating_vortex(TAU, 2.72, PI).separable_form().unwrap_err();
        assert_eq!(err, FlowError::NotSeparable(FlowFamily::OscillatingVortex));
        assert!(FlowSpec::oscillating_vortex(TAU, 0.0, PI).separable_form().is_ok());
    }

    #[test]
    fn space_period_matches_wavenumber() {
        assert_eq!(FlowSpec::oscillating_vortex(TAU, 1.0, PI).space_period(), Some(1.0));
        assert_eq!(FlowSpec::chaotic_cellular(0.1).space_period(), Some(TAU));
        assert_eq!(
            FlowSpec::time_dependent_taylor_green(2.0, 0.5, 3.0).time_dependence(),
            TimeDependence::Periodic(TAU / 3.0)
        );
    }

    #[test]
    fn coordinate_map_inverts() {
        let form = FlowSpec::taylor_green(3.0).separable_form().unwrap();
        let x = [0.3, -1.7];
        let back = form.from_native(form.to_native(x));
        assert!((back[0] - x[0]).abs() < 1e-14 && (back[1] - x[1]).abs() < 1e-14);
        assert!((form.noise_scale() - 2f64.sqrt() * 3.0).abs() < 1e-14);
    }
}
