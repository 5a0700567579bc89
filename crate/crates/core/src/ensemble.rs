//! Monte-Carlo estimation of the Lagrangian effective diffusivity
//! `D_ij(t) = ⟨Δx_i(t) Δx_j(t)⟩ / 2t`.
//!
//! Particles are grouped into fixed-size blocks. Each block is simulated
//! sequentially, its statistics are accumulated in particle order, and the
//! block results are merged in a fixed pairwise tree. The output is
//! therefore bit-identical for any worker count.

use rayon::prelude::*;
use thiserror::Error;

use crate::flows::{FlowSpec, Vec2};
use crate::noise::{derive_seed, NoiseStream, OuDriver, OuParams};
use crate::schemes::{steps_for, Integrator, SchemeConfig, SchemeError, SchemeKind, StepState};

/// Particles per work unit. Fixed so that reduction order never depends on
/// the number of workers.
pub const PARTICLE_BLOCK: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleError {
    #[error("invalid ensemble configuration: {0}")]
    InvalidConfig(String),
    #[error("particle {particle}: {source}")]
    Particle {
        particle: u64,
        #[source]
        source: SchemeError,
    },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("time series spans {decades:.2} decades with {points} points; at least 2 decades and 10 points are needed")]
    InsufficientHorizon { decades: f64, points: usize },
    #[error("could not build worker pool: {0}")]
    Pool(String),
}

/// A symmetric 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2 {
    pub d11: f64,
    pub d12: f64,
    pub d22: f64,
}

impl Sym2 {
    pub fn new(d11: f64, d12: f64, d22: f64) -> Self {
        Self { d11, d12, d22 }
    }

    pub fn trace(&self) -> f64 {
        self.d11 + self.d22
    }

    pub fn as_matrix(&self) -> [[f64; 2]; 2] {
        [[self.d11, self.d12], [self.d12, self.d22]]
    }

    fn map(self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(f(self.d11), f(self.d12), f(self.d22))
    }
}

/// Observation times of an ensemble run.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleGrid {
    /// Only the horizon.
    Final,
    /// `count` equally spaced times ending at the horizon.
    Linear { count: usize },
    /// `count` log-spaced times from `first` to the horizon.
    Geometric { count: usize, first: f64 },
    /// Explicit times; each must lie on the step grid.
    Times(Vec<f64>),
}

/// Sample times resolved to step counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSchedule {
    pub steps: Vec<usize>,
    pub times: Vec<f64>,
}

impl SampleSchedule {
    pub fn resolve(grid: &SampleGrid, horizon: f64, tau: f64) -> Result<Self, EnsembleError> {
        let n = steps_for(horizon, tau)?;
        if n == 0 {
            return Err(EnsembleError::InvalidConfig("horizon must be positive".into()));
        }
        let mut steps: Vec<usize> = match grid {
            SampleGrid::Final => vec![n],
            SampleGrid::Linear { count } => {
                let c = (*count).max(1);
                (1..=c).map(|i| ((i * n) as f64 / c as f64).round() as usize).collect()
            }
            SampleGrid::Geometric { count, first } => {
                let c = (*count).max(1);
                let lo = (first / tau).round().max(1.0);
                let ratio = (n as f64 / lo).max(1.0);
                (0..c)
                    .map(|i| {
                        let frac = if c == 1 { 1.0 } else { i as f64 / (c - 1) as f64 };
                        (lo * ratio.powf(frac)).round() as usize
                    })
                    .collect()
            }
            SampleGrid::Times(times) => times
                .iter()
                .map(|&t| steps_for(t, tau).map_err(EnsembleError::from))
                .collect::<Result<_, _>>()?,
        };
        steps.retain(|&s| s >= 1 && s <= n);
        steps.sort_unstable();
        steps.dedup();
        if steps.is_empty() {
            return Err(EnsembleError::InvalidConfig(format!(
                "no sample time falls inside (0, {horizon}]"
            )));
        }
        let times = steps.iter().map(|&s| s as f64 * tau).collect();
        Ok(Self { steps, times })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// How OU-driven ensembles are laid out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuLayout {
    pub params: OuParams,
    /// Number of independent driver realisations.
    pub n_paths: usize,
}

impl Default for OuLayout {
    fn default() -> Self {
        Self {
            params: OuParams::default(),
            n_paths: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub flow: FlowSpec,
    pub scheme: SchemeConfig,
    pub n_particles: usize,
    pub x0: Vec2,
    pub horizon: f64,
    pub samples: SampleGrid,
    pub seed: u64,
    /// Worker count; 0 uses every available core.
    pub threads: usize,
    /// Required for driver-dependent flows, ignored otherwise.
    pub ou: Option<OuLayout>,
}

impl EnsembleConfig {
    pub fn new(flow: FlowSpec, scheme: SchemeConfig, n_particles: usize, horizon: f64) -> Self {
        Self {
            flow,
            scheme,
            n_particles,
            x0: [0.0, 0.0],
            horizon,
            samples: SampleGrid::Final,
            seed: 0,
            threads: 0,
            ou: flow.needs_driver().then(OuLayout::default),
        }
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        if self.n_particles < 2 {
            return Err(EnsembleError::InvalidConfig(format!(
                "n_particles must be at least 2, got {}",
                self.n_particles
            )));
        }
        if !(self.x0[0].is_finite() && self.x0[1].is_finite()) {
            return Err(EnsembleError::InvalidConfig("x0 must be finite".into()));
        }
        if self.flow.needs_driver() {
            let ou = self.ou.ok_or_else(|| {
                EnsembleError::InvalidConfig(format!("flow `{}` needs an OU driver layout", self.flow.family()))
            })?;
            ou.params.validate().map_err(EnsembleError::InvalidConfig)?;
            if ou.n_paths == 0 || ou.n_paths > self.n_particles {
                return Err(EnsembleError::InvalidConfig(format!(
                    "n_ou must lie in [1, n_particles = {}], got {}",
                    self.n_particles, ou.n_paths
                )));
            }
        }
        self.scheme.validate()?;
        Ok(())
    }

    fn driver_layout(&self) -> Option<OuLayout> {
        if self.flow.needs_driver() {
            self.ou
        } else {
            None
        }
    }
}

/// Result of an ensemble run.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusivityEstimate {
    pub times: Vec<f64>,
    pub d: Vec<Sym2>,
    pub stderr: Vec<Sym2>,
    /// Number of simulated particles.
    pub n: usize,
    /// Per-driver-path estimates, `per_path[path][sample]`; empty unless the
    /// run was OU-driven.
    pub per_path: Vec<Vec<Sym2>>,
}

impl DiffusivityEstimate {
    pub fn final_d(&self) -> Sym2 {
        *self.d.last().expect("estimate has at least one sample")
    }

    pub fn final_stderr(&self) -> Sym2 {
        *self.stderr.last().expect("estimate has at least one sample")
    }
}

/// Running mean and centred second moment.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    #[inline]
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(a: Self, b: Self) -> Self {
        if a.n == 0 {
            return b;
        }
        if b.n == 0 {
            return a;
        }
        let n = a.n + b.n;
        let delta = b.mean - a.mean;
        let (na, nb, nf) = (a.n as f64, b.n as f64, n as f64);
        Self {
            n,
            mean: a.mean + delta * nb / nf,
            m2: a.m2 + b.m2 + delta * delta * na * nb / nf,
        }
    }

    fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

type SampleMoments = Vec<[Moments; 3]>;

fn merge_samples(a: SampleMoments, b: SampleMoments) -> SampleMoments {
    a.into_iter()
        .zip(b)
        .map(|(x, y)| std::array::from_fn(|k| Moments::merge(x[k], y[k])))
        .collect()
}

/// Merges in a fixed balanced binary tree over index order.
fn tree_merge<T: Clone>(items: &[T], merge: &impl Fn(T, T) -> T) -> T {
    match items.len() {
        0 => panic!("tree_merge on empty input"),
        1 => items[0].clone(),
        len => {
            let mid = len / 2;
            merge(tree_merge(&items[..mid], merge), tree_merge(&items[mid..], merge))
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Block {
    group: usize,
    start: u64,
    end: u64,
}

/// Contiguous split of `n` items into `groups` nearly equal parts.
fn group_ranges(n: usize, groups: usize) -> Vec<(u64, u64)> {
    let base = n / groups;
    let rem = n % groups;
    let mut start = 0u64;
    (0..groups)
        .map(|g| {
            let len = (base + usize::from(g < rem)) as u64;
            let range = (start, start + len);
            start += len;
            range
        })
        .collect()
}

pub(crate) fn with_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> Result<T, EnsembleError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| EnsembleError::Pool(e.to_string()))?;
    Ok(pool.install(job))
}

/// Generic ensemble engine.
///
/// `simulate(particle, group, out)` must write the displacement of
/// `particle` at every scheduled sample into `out` and be a pure function
/// of its arguments. Particles are split contiguously into `groups`
/// (driver paths); with more than one group the reported estimate is the
/// mean of the per-group estimates and its standard error is taken across
/// groups.
pub fn run_paths<F>(
    n_particles: usize,
    groups: usize,
    schedule: &SampleSchedule,
    threads: usize,
    simulate: F,
) -> Result<DiffusivityEstimate, EnsembleError>
where
    F: Fn(u64, usize, &mut [Vec2]) -> Result<(), EnsembleError> + Sync,
{
    let groups = groups.max(1);
    if n_particles < groups.max(2) {
        return Err(EnsembleError::InvalidConfig(format!(
            "need at least max(2, groups = {groups}) particles, got {n_particles}"
        )));
    }
    let ranges = group_ranges(n_particles, groups);
    let blocks: Vec<Block> = ranges
        .iter()
        .enumerate()
        .flat_map(|(group, &(start, end))| {
            (start..end).step_by(PARTICLE_BLOCK).map(move |s| Block {
                group,
                start: s,
                end: (s + PARTICLE_BLOCK as u64).min(end),
            })
        })
        .collect();
    let n_samples = schedule.len();
    let inv_2t: Vec<f64> = schedule.times.iter().map(|t| 0.5 / t).collect();

    let run_block = |block: &Block| -> Result<SampleMoments, EnsembleError> {
        let mut acc = vec![[Moments::default(); 3]; n_samples];
        let mut disp = vec![[0.0; 2]; n_samples];
        for particle in block.start..block.end {
            simulate(particle, block.group, &mut disp)?;
            for ((a, d), w) in acc.iter_mut().zip(&disp).zip(&inv_2t) {
                a[0].push(d[0] * d[0] * w);
                a[1].push(d[0] * d[1] * w);
                a[2].push(d[1] * d[1] * w);
            }
        }
        Ok(acc)
    };
    let results: Vec<SampleMoments> =
        with_pool(threads, || blocks.par_iter().map(run_block).collect::<Result<Vec<_>, _>>())??;

    let mut per_group: Vec<SampleMoments> = Vec::with_capacity(groups);
    let mut cursor = 0;
    for g in 0..groups {
        let len = blocks[cursor..].iter().take_while(|b| b.group == g).count();
        per_group.push(tree_merge(&results[cursor..cursor + len], &merge_samples));
        cursor += len;
    }

    let to_sym = |m: &[Moments; 3], f: &dyn Fn(&Moments) -> f64| Sym2::new(f(&m[0]), f(&m[1]), f(&m[2]));
    let (d, stderr, per_path) = if groups == 1 {
        let all = &per_group[0];
        (
            all.iter().map(|m| to_sym(m, &|x| x.mean)).collect(),
            all.iter().map(|m| to_sym(m, &|x| x.stderr())).collect(),
            Vec::new(),
        )
    } else {
        let per_path: Vec<Vec<Sym2>> = per_group
            .iter()
            .map(|g| g.iter().map(|m| to_sym(m, &|x| x.mean)).collect())
            .collect();
        let mut d = Vec::with_capacity(n_samples);
        let mut se = Vec::with_capacity(n_samples);
        for s in 0..n_samples {
            let mut across = [Moments::default(); 3];
            for path in &per_path {
                across[0].push(path[s].d11);
                across[1].push(path[s].d12);
                across[2].push(path[s].d22);
            }
            d.push(to_sym(&across, &|x| x.mean));
            se.push(to_sym(&across, &|x| x.stderr()));
        }
        (d, se, per_path)
    };
    Ok(DiffusivityEstimate {
        times: schedule.times.clone(),
        d,
        stderr,
        n: n_particles,
        per_path,
    })
}

/// Runs the ensemble described by `cfg`.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<DiffusivityEstimate, EnsembleError> {
    cfg.validate()?;
    let integrator = Integrator::new(cfg.flow, cfg.scheme)?;
    let schedule = SampleSchedule::resolve(&cfg.samples, cfg.horizon, cfg.scheme.tau)?;
    let layout = cfg.driver_layout();
    let groups = layout.map_or(1, |l| l.n_paths);
    let tau = cfg.scheme.tau;
    let x0 = cfg.x0;
    let seed = cfg.seed;
    let horizon = cfg.horizon;
    run_paths(cfg.n_particles, groups, &schedule, cfg.threads, |particle, group, out| {
        let mut noise = NoiseStream::new(seed, particle);
        let mut driver = layout.map(|l| OuDriver::new(l.params, seed, group as u64, tau));
        integrator
            .integrate_path(
                StepState::new(0.0, x0),
                horizon,
                &mut noise,
                driver.as_mut(),
                &schedule.steps,
                |i, s| out[i] = [s.x[0] - x0[0], s.x[1] - x0[1]],
            )
            .map_err(|source| EnsembleError::Particle { particle, source })?;
        Ok(())
    })
}

/// One parameter axis of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    /// Noise amplitude σ (both components).
    Sigma(Vec<f64>),
    /// Molecular diffusivity `D0 = σ²/2`.
    D0(Vec<f64>),
    Theta(Vec<f64>),
    /// Oscillation amplitude.
    Amplitude(Vec<f64>),
    Tau(Vec<f64>),
    Scheme(Vec<SchemeKind>),
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Sigma(_) => "sigma",
            SweepAxis::D0(_) => "D0",
            SweepAxis::Theta(_) => "theta",
            SweepAxis::Amplitude(_) => "B",
            SweepAxis::Tau(_) => "dt",
            SweepAxis::Scheme(_) => "scheme",
        }
    }

    fn len(&self) -> usize {
        match self {
            SweepAxis::Sigma(v) | SweepAxis::D0(v) | SweepAxis::Theta(v) | SweepAxis::Amplitude(v) | SweepAxis::Tau(v) => {
                v.len()
            }
            SweepAxis::Scheme(v) => v.len(),
        }
    }

    fn label(&self, i: usize) -> String {
        match self {
            SweepAxis::Sigma(v) | SweepAxis::D0(v) | SweepAxis::Theta(v) | SweepAxis::Amplitude(v) | SweepAxis::Tau(v) => {
                format!("{}", v[i])
            }
            SweepAxis::Scheme(v) => v[i].name().to_string(),
        }
    }

    fn apply(&self, i: usize, cfg: &mut EnsembleConfig) -> Result<(), EnsembleError> {
        match self {
            SweepAxis::Sigma(v) => cfg.scheme.sigma = [v[i], v[i]],
            SweepAxis::D0(v) => {
                let s = (2.0 * v[i]).sqrt();
                cfg.scheme.sigma = [s, s];
            }
            SweepAxis::Theta(v) => cfg.flow = cfg.flow.with_theta(v[i]),
            SweepAxis::Amplitude(v) => cfg.flow = cfg.flow.with_amplitude(v[i]),
            SweepAxis::Tau(v) => cfg.scheme.tau = v[i],
            SweepAxis::Scheme(v) => cfg.scheme.kind = v[i],
        }
        Ok(())
    }
}

/// One evaluated grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Grid coordinates, one label per axis.
    pub coords: Vec<String>,
    pub seed: u64,
    pub outcome: Result<DiffusivityEstimate, EnsembleError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axes: Vec<&'static str>,
    pub rows: Vec<SweepRow>,
}

/// Evaluates `base` over the Cartesian product of `axes` (first axis
/// slowest). Cells that differ only in the scheme share a seed, so schemes
/// are compared on common random numbers; all other cells get independent
/// seeds derived from `base.seed`. Failing cells are recorded and the sweep
/// continues.
pub fn sweep(base: &EnsembleConfig, axes: &[SweepAxis]) -> SweepTable {
    let names = axes.iter().map(SweepAxis::name).collect();
    if axes.is_empty() || axes.iter().any(|a| a.len() == 0) {
        return SweepTable { axes: names, rows: Vec::new() };
    }
    let mut rows = Vec::new();
    let mut index = vec![0usize; axes.len()];
    loop {
        let mut cfg = base.clone();
        let mut seed_index = 0u64;
        for (axis, &i) in axes.iter().zip(&index) {
            if !matches!(axis, SweepAxis::Scheme(_)) {
                seed_index = seed_index * axis.len() as u64 + i as u64;
            }
        }
        cfg.seed = derive_seed(base.seed, seed_index);
        let coords = axes.iter().zip(&index).map(|(a, &i)| a.label(i)).collect();
        let outcome = axes
            .iter()
            .zip(&index)
            .try_for_each(|(a, &i)| a.apply(i, &mut cfg))
            .and_then(|_| run_ensemble(&cfg));
        rows.push(SweepRow {
            coords,
            seed: cfg.seed,
            outcome,
        });
        // Odometer increment, last axis fastest.
        let mut axis = axes.len();
        loop {
            if axis == 0 {
                return SweepTable { axes: names, rows };
            }
            axis -= 1;
            index[axis] += 1;
            if index[axis] < axes[axis].len() {
                break;
            }
            index[axis] = 0;
        }
    }
}

/// Spread of per-path `D11` at one sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct PathHistogram {
    pub time: f64,
    pub values: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    /// `(lower edge, count)` per bin.
    pub bins: Vec<(f64, usize)>,
    pub bin_width: f64,
}

impl PathHistogram {
    pub fn new(time: f64, values: Vec<f64>, n_bins: usize) -> Self {
        let mut m = Moments::default();
        values.iter().for_each(|&v| m.push(v));
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let n_bins = n_bins.max(1);
        let width = if hi > lo { (hi - lo) / n_bins as f64 } else { 1.0 };
        let mut counts = vec![0usize; n_bins];
        for &v in &values {
            let b = (((v - lo) / width) as usize).min(n_bins - 1);
            counts[b] += 1;
        }
        Self {
            time,
            mean: m.mean,
            variance: m.variance(),
            bins: counts.into_iter().enumerate().map(|(i, c)| (lo + i as f64 * width, c)).collect(),
            bin_width: width,
            values,
        }
    }
}

/// Long-time behaviour of an estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// Estimate at the horizon.
    pub final_d: Sym2,
    /// Mean over sample times in the last decade `[T/10, T]`.
    pub plateau: Sym2,
    /// `(D11(T) - D11(T/10)) / plateau.d11`.
    pub relative_drift: f64,
    /// `D11(T) - D11(T/10)` and its standard error (independent-error bound).
    pub drift: f64,
    pub drift_stderr: f64,
    /// `2 (D11 + D22)` at the horizon, the `(⟨Δx1²⟩ + ⟨Δx2²⟩) / t` convention.
    pub trace_sum: f64,
    /// `(D11 + D22) / 2` at the horizon.
    pub half_trace: f64,
    pub histograms: Vec<PathHistogram>,
}

/// Plateau, drift and per-path spread of `est`. Histograms are produced for
/// the sample times nearest to each entry of `histogram_times` when the
/// estimate carries per-path data.
pub fn time_series_diagnostics(
    est: &DiffusivityEstimate,
    histogram_times: &[f64],
    n_bins: usize,
) -> Result<StabilityReport, EnsembleError> {
    let points = est.times.len();
    let decades = match (est.times.first(), est.times.last()) {
        (Some(&a), Some(&b)) if a > 0.0 => (b / a).log10(),
        _ => 0.0,
    };
    if points < 10 || decades < 2.0 - 1e-9 {
        return Err(EnsembleError::InsufficientHorizon { decades, points });
    }
    let horizon = est.times[points - 1];
    let start = est.times.iter().position(|&t| t >= horizon / 10.0 * (1.0 - 1e-9)).unwrap_or(0);
    let tail = &est.d[start..];
    let k = tail.len() as f64;
    let plateau = tail
        .iter()
        .fold(Sym2::default(), |a, d| Sym2::new(a.d11 + d.d11, a.d12 + d.d12, a.d22 + d.d22))
        .map(|x| x / k);
    let final_d = est.final_d();
    let drift = final_d.d11 - est.d[start].d11;
    let drift_stderr = (est.stderr[start].d11.powi(2) + est.final_stderr().d11.powi(2)).sqrt();
    let histograms = if est.per_path.is_empty() {
        Vec::new()
    } else {
        histogram_times
            .iter()
            .map(|&t| {
                let s = nearest_index(&est.times, t);
                let values = est.per_path.iter().map(|p| p[s].d11).collect();
                PathHistogram::new(est.times[s], values, n_bins)
            })
            .collect()
    };
    Ok(StabilityReport {
        final_d,
        plateau,
        relative_drift: drift / plateau.d11,
        drift,
        drift_stderr,
        trace_sum: 2.0 * final_d.trace(),
        half_trace: 0.5 * final_d.trace(),
        histograms,
    })
}

fn nearest_index(times: &[f64], t: f64) -> usize {
    times
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
        .map_or(0, |(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..37).map(|i| ((i * 7919) % 101) as f64 * 0.37 - 4.0).collect();
        let mut seq = Moments::default();
        xs.iter().for_each(|&x| seq.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..15].iter().for_each(|&x| a.push(x));
        xs[15..].iter().for_each(|&x| b.push(x));
        let merged = Moments::merge(a, b);
        assert_eq!(merged.n, seq.n);
        assert!((merged.mean - seq.mean).abs() < 1e-12);
        assert!((merged.m2 - seq.m2).abs() < 1e-9);
    }

    #[test]
    fn groups_split_contiguously() {
        assert_eq!(group_ranges(10, 3), vec![(0, 4), (4, 7), (7, 10)]);
        assert_eq!(group_ranges(4, 1), vec![(0, 4)]);
    }

    #[test]
    fn geometric_schedule_is_on_grid_and_increasing() {
        let s = SampleSchedule::resolve(&SampleGrid::Geometric { count: 30, first: 1.0 }, 1000.0, 0.05).unwrap();
        assert_eq!(*s.steps.last().unwrap(), 20000);
        assert!(s.steps.windows(2).all(|w| w[0] < w[1]));
        assert!((s.times[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn off_grid_sample_time_is_rejected() {
        let err = SampleSchedule::resolve(&SampleGrid::Times(vec![0.123]), 1.0, 0.05).unwrap_err();
        assert!(matches!(err, EnsembleError::Scheme(SchemeError::NonCommensurateHorizon { .. })));
    }

    #[test]
    fn short_series_is_insufficient() {
        let est = DiffusivityEstimate {
            times: vec![1.0, 2.0, 3.0],
            d: vec![Sym2::default(); 3],
            stderr: vec![Sym2::default(); 3],
            n: 10,
            per_path: Vec::new(),
        };
        assert!(matches!(
            time_series_diagnostics(&est, &[], 10),
            Err(EnsembleError::InsufficientHorizon { points: 3, .. })
        ));
    }
}
