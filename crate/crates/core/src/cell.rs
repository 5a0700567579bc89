//! Eulerian effective diffusivity from the steady periodic cell problem
//! `v·∇w_i - D0 Δw_i = -v_i`, `D_ij = D0 (δ_ij + ⟨∇w_i·∇w_j⟩)`.
//!
//! The corrector is discretised on an `N × N` Fourier grid over one spatial
//! period. Unknowns are restricted to wavenumbers `|m| ≤ N/3` per axis and
//! the mean mode is pinned to zero. The advection term is evaluated
//! pseudo-spectrally and projected back onto the retained modes. The linear
//! system is solved by restarted GMRES, right-preconditioned with the
//! inverse Laplacian `(D0 |κ|²)⁻¹`.

use std::f64::consts::TAU;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::flows::FlowSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CellError {
    #[error("cell solver supports steady flows only; `{0}` is time dependent")]
    Unsupported(String),
    #[error("invalid cell-problem input: {0}")]
    InvalidInput(String),
    #[error("right-hand side of component {component} has non-zero mean {mean:e}; the cell problem has no periodic solution")]
    Incompatible { component: usize, mean: f64 },
    #[error(
        "cell solve for component {component} stalled at residual {residual:e} after {iterations} iterations \
         (increase modes or D0)"
    )]
    NoConvergence {
        component: usize,
        residual: f64,
        iterations: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellOptions {
    /// Grid points (and FFT length) per axis; a power of two.
    pub modes: usize,
    /// Bound on the RMS residual of the projected cell equation.
    pub tol: f64,
    /// Krylov subspace size between restarts.
    pub restart: usize,
    pub max_iters: usize,
}

impl Default for CellOptions {
    fn default() -> Self {
        Self {
            modes: 64,
            tol: 1e-10,
            restart: 80,
            max_iters: 4000,
        }
    }
}

/// Converged corrector and the resulting diffusivity.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSolution {
    pub n: usize,
    pub d0: f64,
    /// Side length of the periodic cell.
    pub period: f64,
    /// Normalised Fourier coefficients `ŵ_i[a·n + b]` of each component,
    /// index `a` along the first axis, FFT ordering.
    pub modes: [Vec<Complex64>; 2],
    pub d_matrix: [[f64; 2]; 2],
    /// Final RMS residual per component.
    pub residual: [f64; 2],
    pub iterations: [usize; 2],
}

/// Signed wavenumber index for FFT position `i`.
#[inline]
fn signed(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

struct Spectral {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Physical wavenumbers along one axis.
    kappa: Vec<f64>,
    /// Retained-mode mask in FFT order.
    keep: Vec<bool>,
}

impl Spectral {
    fn new(n: usize, period: f64) -> Self {
        let mut planner = FftPlanner::new();
        let cutoff = (n / 3) as i64;
        let kappa: Vec<f64> = (0..n).map(|i| TAU / period * signed(i, n) as f64).collect();
        let mut keep = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                let (ma, mb) = (signed(a, n), signed(b, n));
                keep[a * n + b] = ma.abs() <= cutoff && mb.abs() <= cutoff && (ma, mb) != (0, 0);
            }
        }
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            kappa,
            keep,
        }
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        plan.process(data);
        let mut col = vec![Complex64::default(); n];
        for b in 0..n {
            for a in 0..n {
                col[a] = data[a * n + b];
            }
            plan.process(&mut col);
            for a in 0..n {
                data[a * n + b] = col[a];
            }
        }
    }

    /// Normalised coefficients of a real field.
    fn forward(&self, u: &[f64]) -> Vec<Complex64> {
        let scale = 1.0 / (self.n * self.n) as f64;
        let mut data: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform(&mut data, &self.fwd);
        data.iter_mut().for_each(|c| *c *= scale);
        data
    }

    /// Real field from normalised coefficients.
    fn inverse(&self, c: &[Complex64]) -> Vec<f64> {
        let mut data = c.to_vec();
        self.transform(&mut data, &self.inv);
        data.iter().map(|z| z.re).collect()
    }

    fn project(&self, c: &mut [Complex64]) {
        for (z, &k) in c.iter_mut().zip(&self.keep) {
            if !k {
                *z = Complex64::default();
            }
        }
    }

    fn k2(&self, idx: usize) -> f64 {
        let (a, b) = (idx / self.n, idx % self.n);
        self.kappa[a] * self.kappa[a] + self.kappa[b] * self.kappa[b]
    }

    /// `(∂1 u, ∂2 u)` in physical space from coefficients.
    fn gradient(&self, c: &[Complex64]) -> [Vec<f64>; 2] {
        let n = self.n;
        let mut d1 = c.to_vec();
        let mut d2 = c.to_vec();
        for idx in 0..n * n {
            let (a, b) = (idx / n, idx % n);
            d1[idx] *= Complex64::new(0.0, self.kappa[a]);
            d2[idx] *= Complex64::new(0.0, self.kappa[b]);
        }
        [self.inverse(&d1), self.inverse(&d2)]
    }
}

/// The projected operator `w ↦ P[v·∇w - D0 Δw]` and its preconditioner.
struct CellOperator<'a> {
    sp: &'a Spectral,
    velocity: [Vec<f64>; 2],
    d0: f64,
}

impl CellOperator<'_> {
    fn apply(&self, w: &[f64]) -> Vec<f64> {
        let sp = self.sp;
        let mut c = sp.forward(w);
        sp.project(&mut c);
        let [gx, gy] = sp.gradient(&c);
        let adv: Vec<f64> = (0..w.len())
            .map(|i| self.velocity[0][i] * gx[i] + self.velocity[1][i] * gy[i])
            .collect();
        let mut out = sp.forward(&adv);
        for (idx, z) in out.iter_mut().enumerate() {
            *z += c[idx] * (self.d0 * sp.k2(idx));
        }
        sp.project(&mut out);
        sp.inverse(&out)
    }

    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        let sp = self.sp;
        let mut c = sp.forward(r);
        for (idx, z) in c.iter_mut().enumerate() {
            *z = if sp.keep[idx] {
                *z / (self.d0 * sp.k2(idx))
            } else {
                Complex64::default()
            };
        }
        sp.inverse(&c)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct GmresOutcome {
    x: Vec<f64>,
    residual: f64,
    iterations: usize,
    converged: bool,
}

/// Restarted GMRES with right preconditioning; `tol` bounds the Euclidean
/// norm of the true residual.
fn gmres(op: &CellOperator, b: &[f64], tol: f64, restart: usize, max_iters: usize) -> GmresOutcome {
    let len = b.len();
    let mut x = vec![0.0; len];
    let mut iterations = 0;
    loop {
        let ax = op.apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        if beta <= tol || iterations >= max_iters {
            return GmresOutcome {
                x,
                residual: beta,
                iterations,
                converged: beta <= tol,
            };
        }
        let m = restart.min(max_iters - iterations).max(1);
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut cols = 0;
        for j in 0..m {
            let mut w = op.apply(&op.precondition(&basis[j]));
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                h[i][j] = hij;
                w.iter_mut().zip(v).for_each(|(wk, vk)| *wk -= hij * vk);
            }
            let hn = norm(&w);
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let rho = h[j][j].hypot(h[j + 1][j]);
            cs[j] = h[j][j] / rho;
            sn[j] = h[j + 1][j] / rho;
            h[j][j] = rho;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            cols = j + 1;
            iterations += 1;
            if g[j + 1].abs() <= 0.5 * tol || hn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        let mut y = vec![0.0; cols];
        for i in (0..cols).rev() {
            let s: f64 = ((i + 1)..cols).map(|k| h[i][k] * y[k]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        let mut z = vec![0.0; len];
        for (yi, v) in y.iter().zip(&basis) {
            z.iter_mut().zip(v).for_each(|(zk, vk)| *zk += yi * vk);
        }
        let update = op.precondition(&z);
        x.iter_mut().zip(&update).for_each(|(xk, uk)| *xk += uk);
    }
}

/// Solves the steady cell problem of `flow` at molecular diffusivity `d0`.
pub fn solve_cell(flow: &FlowSpec, d0: f64, opts: &CellOptions) -> Result<CellSolution, CellError> {
    if !flow.is_steady() {
        return Err(CellError::Unsupported(flow.family().to_string()));
    }
    let n = opts.modes;
    if n < 8 || !n.is_power_of_two() {
        return Err(CellError::InvalidInput(format!("modes must be a power of two ≥ 8, got {n}")));
    }
    if !(d0.is_finite() && d0 > 0.0) {
        return Err(CellError::InvalidInput(format!("D0 must be positive, got {d0}")));
    }
    if !(opts.tol.is_finite() && opts.tol > 0.0) || opts.restart == 0 {
        return Err(CellError::InvalidInput("tol and restart must be positive".into()));
    }
    let period = flow.space_period().unwrap_or(TAU);
    let drive = flow
        .drive(0.0, Some(0.0))
        .map_err(|e| CellError::InvalidInput(e.to_string()))?;
    let sp = Spectral::new(n, period);
    let h = period / n as f64;
    let mut velocity = [vec![0.0; n * n], vec![0.0; n * n]];
    for a in 0..n {
        for b in 0..n {
            let v = flow.velocity_driven(drive, [a as f64 * h, b as f64 * h]);
            velocity[0][a * n + b] = v[0];
            velocity[1][a * n + b] = v[1];
        }
    }
    let op = CellOperator {
        sp: &sp,
        velocity: velocity.clone(),
        d0,
    };
    let scale = n as f64;
    let mut modes: [Vec<Complex64>; 2] = [Vec::new(), Vec::new()];
    let mut residual = [0.0; 2];
    let mut iterations = [0; 2];
    for comp in 0..2 {
        let mut rhs = sp.forward(&velocity[comp]);
        let mean = rhs[0].norm();
        let vmax = velocity[comp].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if mean > 1e-12 * vmax.max(1.0) {
            return Err(CellError::Incompatible { component: comp + 1, mean });
        }
        rhs.iter_mut().for_each(|z| *z = -*z);
        sp.project(&mut rhs);
        let b = sp.inverse(&rhs);
        let out = gmres(&op, &b, opts.tol * scale, opts.restart, opts.max_iters);
        let rms = out.residual / scale;
        if !out.converged {
            return Err(CellError::NoConvergence {
                component: comp + 1,
                residual: rms,
                iterations: out.iterations,
            });
        }
        let mut c = sp.forward(&out.x);
        sp.project(&mut c);
        modes[comp] = c;
        residual[comp] = rms;
        iterations[comp] = out.iterations;
    }
    let mut sol = CellSolution {
        n,
        d0,
        period,
        modes,
        d_matrix: [[0.0; 2]; 2],
        residual,
        iterations,
    };
    sol.d_matrix = effective_diffusivity_eulerian(&sol);
    Ok(sol)
}

/// `D0 (δ_ij + Σ_m |κ_m|² Re(ŵ_i(m) conj ŵ_j(m)))`.
pub fn effective_diffusivity_eulerian(sol: &CellSolution) -> [[f64; 2]; 2] {
    let n = sol.n;
    let kappa: Vec<f64> = (0..n).map(|i| TAU / sol.period * signed(i, n) as f64).collect();
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let s: f64 = sol.modes[i]
                .iter()
                .zip(&sol.modes[j])
                .enumerate()
                .map(|(idx, (a, b))| {
                    let (ka, kb) = (kappa[idx / n], kappa[idx % n]);
                    (ka * ka + kb * kb) * (a * b.conj()).re
                })
                .sum();
            sol.d0 * (f64::from(u8::from(i == j)) + s)
        })
    })
}

/// `⟨∇w_i·∇w_j⟩` evaluated as a grid average of physical-space gradients.
pub fn gradient_correlation_physical(sol: &CellSolution) -> [[f64; 2]; 2] {
    let sp = Spectral::new(sol.n, sol.period);
    let grads = [sp.gradient(&sol.modes[0]), sp.gradient(&sol.modes[1])];
    let cells = (sol.n * sol.n) as f64;
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let s: f64 = (0..sol.n * sol.n)
                .map(|k| grads[i][0][k] * grads[j][0][k] + grads[i][1][k] * grads[j][1][k])
                .sum();
            out[i][j] = s / cells;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn still_flow_gives_molecular_diffusivity() {
        let sol = solve_cell(&FlowSpec::still(), 0.3, &CellOptions::default()).unwrap();
        assert_eq!(sol.d_matrix, [[0.3, 0.0], [0.0, 0.3]]);
        assert!(sol.modes.iter().all(|m| m.iter().all(|z| z.norm() == 0.0)));
    }

    #[test]
    fn rejects_time_dependent_flow() {
        let flow = FlowSpec::chaotic_cellular(0.1);
        assert!(matches!(
            solve_cell(&flow, 0.1, &CellOptions::default()),
            Err(CellError::Unsupported(_))
        ));
    }

    #[test]
    fn rejects_non_power_of_two_grid() {
        let opts = CellOptions {
            modes: 48,
            ..CellOptions::default()
        };
        assert!(matches!(
            solve_cell(&FlowSpec::taylor_green(TAU), 0.1, &opts),
            Err(CellError::InvalidInput(_))
        ));
    }

    #[test]
    fn mean_mode_is_zero() {
        let opts = CellOptions {
            modes: 32,
            ..CellOptions::default()
        };
        let sol = solve_cell(&FlowSpec::taylor_green(TAU), 0.1, &opts).unwrap();
        assert_eq!(sol.modes[0][0], Complex64::default());
        assert_eq!(sol.modes[1][0], Complex64::default());
    }
}
