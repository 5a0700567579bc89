//! Flat `key = value` configuration with dotted keys, CLI overrides and
//! validation into typed experiment settings.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::cell::CellOptions;
use crate::ensemble::{EnsembleConfig, OuLayout, SampleGrid, SweepAxis};
use crate::flows::{FlowFamily, FlowSpec};
use crate::noise::OuParams;
use crate::schemes::{SchemeConfig, SchemeKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown configuration key `{0}` (run `effdiff keys` for the list)")]
    UnknownKey(String),
    #[error("key `{key}` expects {expected}, got `{value}`")]
    TypeMismatch {
        key: String,
        expected: &'static str,
        value: String,
    },
    #[error("missing required key `{0}`")]
    MissingRequired(String),
    #[error("key `{key}`: unknown value `{value}` (expected one of: {allowed})")]
    UnknownValue {
        key: String,
        value: String,
        allowed: String,
    },
    #[error("key `{key}`: {message}")]
    InvalidValue { key: String, message: String },
    #[error("{origin}, line {line}: {message}")]
    Syntax {
        origin: String,
        line: usize,
        message: String,
    },
    #[error("cannot read config file {path}: {message}")]
    Io { path: String, message: String },
    #[error("command-line override `{0}` has no value")]
    DanglingFlag(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyKind {
    Float,
    /// Non-negative integer.
    Int,
    Text,
    Choice(&'static [&'static str]),
    /// Comma-separated reals.
    FloatList,
    /// Comma-separated words, each from the given set.
    ChoiceList(&'static [&'static str]),
}

impl KeyKind {
    fn expected(self) -> &'static str {
        match self {
            KeyKind::Float => "a real number",
            KeyKind::Int => "a non-negative integer",
            KeyKind::Text => "text",
            KeyKind::Choice(_) => "one word",
            KeyKind::FloatList => "a comma-separated list of reals",
            KeyKind::ChoiceList(_) => "a comma-separated list of words",
        }
    }
}

/// A documented configuration key.
#[derive(Debug, Clone, Copy)]
pub struct KeyDef {
    pub name: &'static str,
    pub aliases: &'static [&'static str],
    pub kind: KeyKind,
    /// Shown in `effdiff keys`; computed defaults are described in `doc`.
    pub default: Option<&'static str>,
    pub doc: &'static str,
}

const SCHEMES: &[&str] = &["em", "lt", "strang"];
const GRIDS: &[&str] = &["final", "linear", "geometric"];
const SCALES: &[&str] = &["desk", "paper"];
const VARIANTS: &[&str] = &["split", "em"];

pub const KEYS: &[KeyDef] = &[
    KeyDef { name: "flow.family", aliases: &["family", "flow"], kind: KeyKind::Choice(&FlowFamily::NAMES), default: Some("chaotic-cellular"), doc: "velocity field family" },
    KeyDef { name: "flow.k", aliases: &["k"], kind: KeyKind::Float, default: Some("6.283185307179586"), doc: "wavenumber of the Taylor-Green families" },
    KeyDef { name: "flow.B", aliases: &["B"], kind: KeyKind::Float, default: None, doc: "oscillation amplitude; required by oscillating-vortex and td-taylor-green" },
    KeyDef { name: "flow.omega", aliases: &["omega"], kind: KeyKind::Float, default: Some("3.141592653589793"), doc: "angular frequency of the oscillation" },
    KeyDef { name: "flow.theta", aliases: &["theta"], kind: KeyKind::Float, default: Some("0.1"), doc: "perturbation strength of the cellular families" },
    KeyDef { name: "scheme.kind", aliases: &["scheme"], kind: KeyKind::Choice(SCHEMES), default: Some("lt"), doc: "integrator" },
    KeyDef { name: "scheme.dt", aliases: &["dt", "dt_coarse"], kind: KeyKind::Float, default: None, doc: "step size; defaults to 0.01 for the Taylor-Green families and 0.05 otherwise" },
    KeyDef { name: "scheme.alpha", aliases: &["alpha"], kind: KeyKind::Float, default: None, doc: "implicitness weight; unset selects the explicit form for separable flows and 0.5 otherwise" },
    KeyDef { name: "scheme.beta", aliases: &["beta"], kind: KeyKind::Float, default: Some("0.5"), doc: "time-freezing fraction of the deterministic substep" },
    KeyDef { name: "scheme.implicit_iters", aliases: &["implicit_iters"], kind: KeyKind::Int, default: Some("8"), doc: "fixed-point iteration cap" },
    KeyDef { name: "scheme.implicit_tol", aliases: &["implicit_tol"], kind: KeyKind::Float, default: Some("1e-12"), doc: "fixed-point tolerance (absolute, per component)" },
    KeyDef { name: "scheme.sigma", aliases: &["sigma"], kind: KeyKind::Float, default: None, doc: "noise amplitude; exclusive with D0" },
    KeyDef { name: "scheme.D0", aliases: &["D0", "d0"], kind: KeyKind::Float, default: Some("0.01"), doc: "molecular diffusivity sigma^2/2; exclusive with sigma" },
    KeyDef { name: "noise.seed", aliases: &["seed"], kind: KeyKind::Int, default: Some("1"), doc: "master seed" },
    KeyDef { name: "noise.n_ou", aliases: &["n_ou"], kind: KeyKind::Int, default: Some("40"), doc: "number of OU driver paths" },
    KeyDef { name: "noise.theta_ou", aliases: &["theta_ou"], kind: KeyKind::Float, default: Some("1"), doc: "OU reversion rate" },
    KeyDef { name: "noise.mu_ou", aliases: &["mu_ou"], kind: KeyKind::Float, default: Some("0"), doc: "OU mean" },
    KeyDef { name: "noise.sigma_ou", aliases: &["sigma_ou"], kind: KeyKind::Float, default: Some("1"), doc: "OU volatility" },
    KeyDef { name: "ensemble.n_particles", aliases: &["n_particles", "n"], kind: KeyKind::Int, default: Some("5000"), doc: "number of particles" },
    KeyDef { name: "ensemble.T", aliases: &["T", "horizon"], kind: KeyKind::Float, default: Some("5000"), doc: "final time; a multiple of dt" },
    KeyDef { name: "ensemble.p0", aliases: &["p0"], kind: KeyKind::Float, default: Some("0"), doc: "initial first coordinate" },
    KeyDef { name: "ensemble.q0", aliases: &["q0"], kind: KeyKind::Float, default: Some("0"), doc: "initial second coordinate" },
    KeyDef { name: "ensemble.grid", aliases: &["grid"], kind: KeyKind::Choice(GRIDS), default: Some("final"), doc: "observation grid; ignored when times is set" },
    KeyDef { name: "ensemble.samples", aliases: &["samples"], kind: KeyKind::Int, default: Some("40"), doc: "number of observation times for linear and geometric grids" },
    KeyDef { name: "ensemble.t_first", aliases: &["t_first"], kind: KeyKind::Float, default: Some("1"), doc: "first observation time of the geometric grid" },
    KeyDef { name: "ensemble.times", aliases: &["times"], kind: KeyKind::FloatList, default: None, doc: "explicit observation times" },
    KeyDef { name: "ensemble.threads", aliases: &["threads"], kind: KeyKind::Int, default: Some("0"), doc: "worker threads; 0 uses all cores; never changes results" },
    KeyDef { name: "sweep.theta", aliases: &[], kind: KeyKind::FloatList, default: None, doc: "sweep axis over theta" },
    KeyDef { name: "sweep.B", aliases: &[], kind: KeyKind::FloatList, default: None, doc: "sweep axis over the oscillation amplitude" },
    KeyDef { name: "sweep.D0", aliases: &[], kind: KeyKind::FloatList, default: None, doc: "sweep axis over D0" },
    KeyDef { name: "sweep.sigma", aliases: &[], kind: KeyKind::FloatList, default: None, doc: "sweep axis over sigma" },
    KeyDef { name: "sweep.dt", aliases: &[], kind: KeyKind::FloatList, default: None, doc: "sweep axis over the step size" },
    KeyDef { name: "sweep.scheme", aliases: &[], kind: KeyKind::ChoiceList(SCHEMES), default: None, doc: "sweep axis over schemes (cells share seeds)" },
    KeyDef { name: "bea.variant", aliases: &["variant"], kind: KeyKind::Choice(VARIANTS), default: None, doc: "scheme whose modified flow is simulated; overrides scheme.kind in the bea command" },
    KeyDef { name: "bea.fine_factor", aliases: &["fine_factor"], kind: KeyKind::Int, default: Some("25"), doc: "ratio of coarse to fine step" },
    KeyDef { name: "cell.modes", aliases: &["modes"], kind: KeyKind::Int, default: Some("64"), doc: "Fourier grid points per axis (power of two)" },
    KeyDef { name: "cell.tol", aliases: &["tol"], kind: KeyKind::Float, default: Some("1e-10"), doc: "RMS residual tolerance" },
    KeyDef { name: "output.out", aliases: &["out"], kind: KeyKind::Text, default: Some("results"), doc: "output directory" },
    KeyDef { name: "output.scale", aliases: &["scale"], kind: KeyKind::Choice(SCALES), default: Some("desk"), doc: "preset scale of reproduce targets" },
];

/// Looks up a key by canonical name or alias.
pub fn lookup(key: &str) -> Option<&'static KeyDef> {
    KEYS.iter().find(|k| k.name == key || k.aliases.contains(&key))
}

fn parse_float(key: &str, value: &str) -> Result<f64, ConfigError> {
    value.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| ConfigError::TypeMismatch {
        key: key.to_string(),
        expected: KeyKind::Float.expected(),
        value: value.to_string(),
    })
}

fn list_items(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn check_value(def: &KeyDef, value: &str) -> Result<(), ConfigError> {
    let mismatch = || ConfigError::TypeMismatch {
        key: def.name.to_string(),
        expected: def.kind.expected(),
        value: value.to_string(),
    };
    let unknown = |v: &str, allowed: &[&str]| ConfigError::UnknownValue {
        key: def.name.to_string(),
        value: v.to_string(),
        allowed: allowed.join(", "),
    };
    match def.kind {
        KeyKind::Float => parse_float(def.name, value).map(|_| ()),
        KeyKind::Int => value.trim().parse::<u64>().map(|_| ()).map_err(|_| mismatch()),
        KeyKind::Text => Ok(()),
        KeyKind::Choice(allowed) => {
            let v = value.trim();
            if def.name == "flow.family" {
                v.parse::<FlowFamily>().map(|_| ()).map_err(|_| unknown(v, allowed))
            } else if allowed.contains(&v.to_ascii_lowercase().as_str()) {
                Ok(())
            } else {
                Err(unknown(v, allowed))
            }
        }
        KeyKind::FloatList => {
            for item in list_items(value) {
                parse_float(def.name, item).map_err(|_| mismatch())?;
            }
            Ok(())
        }
        KeyKind::ChoiceList(allowed) => {
            for item in list_items(value) {
                if !allowed.contains(&item.to_ascii_lowercase().as_str()) {
                    return Err(unknown(item, allowed));
                }
            }
            Ok(())
        }
    }
}

/// Key/value pairs keyed by canonical name, each checked against its type.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<&'static str, String>,
}

impl RawConfig {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets `key` (canonical or alias) after checking the value's type.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let def = lookup(key.trim()).ok_or_else(|| ConfigError::UnknownKey(key.trim().to_string()))?;
        check_value(def, value)?;
        self.values.insert(def.name, value.trim().to_string());
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_text(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                origin: origin.to_string(),
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse_text(&text, &path.display().to_string())
    }

    /// Applies `--key value` / `--key=value` pairs.
    pub fn apply_cli<S: AsRef<str>>(&mut self, args: &[S]) -> Result<(), ConfigError> {
        let mut it = args.iter().map(AsRef::as_ref);
        while let Some(arg) = it.next() {
            let flag = arg.strip_prefix("--").ok_or_else(|| ConfigError::Syntax {
                origin: "command line".into(),
                line: 0,
                message: format!("expected `--key value`, got `{arg}`"),
            })?;
            match flag.split_once('=') {
                Some((k, v)) => self.set(k, v)?,
                None => {
                    let value = it.next().ok_or_else(|| ConfigError::DanglingFlag(arg.to_string()))?;
                    self.set(flag, value)?;
                }
            }
        }
        Ok(())
    }

    /// Layers `top` over `self`.
    pub fn merged_with(mut self, top: &RawConfig) -> Self {
        for (k, v) in &top.values {
            self.values.insert(k, v.clone());
        }
        self
    }

    pub fn remove(&mut self, canonical: &str) -> Option<String> {
        self.values.remove(canonical)
    }

    pub fn is_set(&self, canonical: &str) -> bool {
        self.values.contains_key(canonical)
    }

    pub fn get(&self, canonical: &str) -> Option<&str> {
        self.values.get(canonical).map(String::as_str)
    }

    fn value_or_default(&self, canonical: &'static str) -> Option<&str> {
        self.get(canonical)
            .or_else(|| lookup(canonical).and_then(|d| d.default))
    }

    fn float(&self, key: &'static str) -> Result<Option<f64>, ConfigError> {
        self.value_or_default(key).map(|v| parse_float(key, v)).transpose()
    }

    fn float_req(&self, key: &'static str) -> Result<f64, ConfigError> {
        self.float(key)?.ok_or_else(|| ConfigError::MissingRequired(key.to_string()))
    }

    fn int(&self, key: &'static str) -> Result<u64, ConfigError> {
        let v = self
            .value_or_default(key)
            .ok_or_else(|| ConfigError::MissingRequired(key.to_string()))?;
        v.trim().parse().map_err(|_| ConfigError::TypeMismatch {
            key: key.to_string(),
            expected: KeyKind::Int.expected(),
            value: v.to_string(),
        })
    }

    fn text(&self, key: &'static str) -> Result<&str, ConfigError> {
        self.value_or_default(key)
            .ok_or_else(|| ConfigError::MissingRequired(key.to_string()))
    }

    fn float_list(&self, key: &'static str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.get(key)
            .map(|v| list_items(v).map(|x| parse_float(key, x)).collect())
            .transpose()
    }

    /// Every documented key with its effective value (`<unset>` when it has
    /// none), in table order.
    pub fn effective_entries(&self) -> Vec<(String, String)> {
        KEYS.iter()
            .map(|d| {
                let shadowed = d.name == "scheme.D0" && self.is_set("scheme.sigma");
                let v = match self.value_or_default(d.name) {
                    Some(v) if !shadowed => v,
                    _ => "<unset>",
                };
                (d.name.to_string(), v.to_string())
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Desk,
    Paper,
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Desk => "desk",
            Scale::Paper => "paper",
        })
    }
}

impl FromStr for Scale {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            other => Err(ConfigError::UnknownValue {
                key: "output.scale".into(),
                value: other.into(),
                allowed: SCALES.join(", "),
            }),
        }
    }
}

/// Fully validated settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub ensemble: EnsembleConfig,
    /// Non-empty only when some `sweep.*` key is set.
    pub sweep: Vec<SweepAxis>,
    pub fine_factor: usize,
    pub cell: CellOptions,
    pub d0: f64,
    pub out: PathBuf,
    pub scale: Scale,
    pub raw: RawConfig,
}

fn invalid(key: &str, message: impl fmt::Display) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        message: message.to_string(),
    }
}

impl ExperimentConfig {
    pub fn from_raw(raw: RawConfig) -> Result<Self, ConfigError> {
        let family: FlowFamily = raw
            .text("flow.family")?
            .parse()
            .map_err(|_| invalid("flow.family", "unknown family"))?;
        let mut params = BTreeMap::new();
        for (name, key) in [("k", "flow.k"), ("B", "flow.B"), ("omega", "flow.omega"), ("theta", "flow.theta")] {
            if let Some(v) = raw.float(key)? {
                params.insert(name.to_string(), v);
            }
        }
        let flow = FlowSpec::from_params(family, &params).map_err(|e| match e {
            crate::flows::FlowError::MissingParameter { param, .. } => {
                ConfigError::MissingRequired(format!("flow.{param}"))
            }
            other => invalid("flow", other),
        })?;

        let (sigma, d0) = match (raw.get("scheme.sigma"), raw.get("scheme.D0")) {
            (Some(_), Some(_)) => return Err(invalid("scheme.sigma", "set either sigma or D0, not both")),
            (Some(_), None) => {
                let sigma = raw.float_req("scheme.sigma")?;
                (sigma, 0.5 * sigma * sigma)
            }
            _ => {
                let d0 = raw.float_req("scheme.D0")?;
                if d0 < 0.0 {
                    return Err(invalid("scheme.D0", "must be non-negative"));
                }
                ((2.0 * d0).sqrt(), d0)
            }
        };
        let default_dt = match family {
            FlowFamily::TaylorGreen | FlowFamily::OscillatingVortex | FlowFamily::TimeDependentTaylorGreen => 0.01,
            _ => 0.05,
        };
        let kind: SchemeKind = raw
            .text("scheme.kind")?
            .parse()
            .map_err(|_| invalid("scheme.kind", "unknown scheme"))?;
        let scheme = SchemeConfig {
            kind,
            tau: raw.float("scheme.dt")?.unwrap_or(default_dt),
            alpha: raw.float("scheme.alpha")?,
            beta: raw.float_req("scheme.beta")?,
            implicit_max_iters: raw.int("scheme.implicit_iters")? as usize,
            implicit_tol: raw.float_req("scheme.implicit_tol")?,
            sigma: [sigma, sigma],
        };
        scheme.validate().map_err(|e| invalid("scheme", e))?;

        let ou = flow.needs_driver().then(|| -> Result<OuLayout, ConfigError> {
            Ok(OuLayout {
                params: OuParams {
                    theta: raw.float_req("noise.theta_ou")?,
                    mu: raw.float_req("noise.mu_ou")?,
                    sigma: raw.float_req("noise.sigma_ou")?,
                },
                n_paths: raw.int("noise.n_ou")? as usize,
            })
        });
        let ou = ou.transpose()?;

        let samples = match raw.float_list("ensemble.times")? {
            Some(times) => SampleGrid::Times(times),
            None => {
                let count = raw.int("ensemble.samples")? as usize;
                match raw.text("ensemble.grid")?.to_ascii_lowercase().as_str() {
                    "linear" => SampleGrid::Linear { count },
                    "geometric" => SampleGrid::Geometric {
                        count,
                        first: raw.float_req("ensemble.t_first")?,
                    },
                    _ => SampleGrid::Final,
                }
            }
        };
        let ensemble = EnsembleConfig {
            flow,
            scheme,
            n_particles: raw.int("ensemble.n_particles")? as usize,
            x0: [raw.float_req("ensemble.p0")?, raw.float_req("ensemble.q0")?],
            horizon: raw.float_req("ensemble.T")?,
            samples,
            seed: raw.int("noise.seed")?,
            threads: raw.int("ensemble.threads")? as usize,
            ou,
        };
        ensemble.validate().map_err(|e| invalid("ensemble", e))?;

        let mut sweep = Vec::new();
        if let Some(v) = raw.float_list("sweep.theta")? {
            sweep.push(SweepAxis::Theta(v));
        }
        if let Some(v) = raw.float_list("sweep.B")? {
            sweep.push(SweepAxis::Amplitude(v));
        }
        if let Some(v) = raw.float_list("sweep.D0")? {
            sweep.push(SweepAxis::D0(v));
        }
        if let Some(v) = raw.float_list("sweep.sigma")? {
            sweep.push(SweepAxis::Sigma(v));
        }
        if let Some(v) = raw.float_list("sweep.dt")? {
            sweep.push(SweepAxis::Tau(v));
        }
        if let Some(v) = raw.get("sweep.scheme") {
            let kinds = list_items(v)
                .map(|s| s.parse::<SchemeKind>().map_err(|e| invalid("sweep.scheme", e)))
                .collect::<Result<_, _>>()?;
            sweep.push(SweepAxis::Scheme(kinds));
        }

        let cell = CellOptions {
            modes: raw.int("cell.modes")? as usize,
            tol: raw.float_req("cell.tol")?,
            ..CellOptions::default()
        };
        Ok(Self {
            ensemble,
            sweep,
            fine_factor: raw.int("bea.fine_factor")? as usize,
            cell,
            d0,
            out: PathBuf::from(raw.text("output.out")?),
            scale: raw.text("output.scale")?.parse()?,
            raw,
        })
    }

    /// The header block echoed into every output file.
    pub fn metadata(&self, command: &str) -> Vec<(String, String)> {
        let mut meta = vec![
            ("program".to_string(), format!("effdiff {}", env!("CARGO_PKG_VERSION"))),
            ("command".to_string(), command.to_string()),
        ];
        meta.extend(self.raw.effective_entries());
        meta
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_default_cellular_run() {
        let cfg = ExperimentConfig::from_raw(RawConfig::parse_text("", "empty").unwrap()).unwrap();
        assert_eq!(cfg.ensemble.flow, FlowSpec::chaotic_cellular(0.1));
        assert_eq!(cfg.ensemble.scheme.kind, SchemeKind::LieTrotter);
        assert_eq!(cfg.ensemble.scheme.tau, 0.05);
        assert!((cfg.d0 - 0.01).abs() < 1e-15);
    }

    #[test]
    fn cli_overrides_file() {
        let mut raw = RawConfig::parse_text("dt = 0.05\n# comment\n", "file").unwrap();
        raw.apply_cli(&["--dt", "0.01"]).unwrap();
        let cfg = ExperimentConfig::from_raw(raw).unwrap();
        assert_eq!(cfg.ensemble.scheme.tau, 0.01);
    }

    #[test]
    fn unknown_scheme_lists_choices() {
        let err = RawConfig::parse_text("scheme = milstein", "file").unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownValue {
                key: "scheme.kind".into(),
                value: "milstein".into(),
                allowed: "em, lt, strang".into()
            }
        );
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(
            RawConfig::parse_text("flow.bogus = 1", "f").unwrap_err(),
            ConfigError::UnknownKey("flow.bogus".into())
        );
        let err = RawConfig::parse_text("dt = fast", "f").unwrap_err();
        assert!(matches!(err, ConfigError::TypeMismatch { ref key, .. } if key == "scheme.dt"));
        let raw = RawConfig::parse_text("family = oscillating-vortex", "f").unwrap();
        assert_eq!(
            ExperimentConfig::from_raw(raw).unwrap_err(),
            ConfigError::MissingRequired("flow.B".into())
        );
    }
}
