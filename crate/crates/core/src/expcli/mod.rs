//! Experiment orchestration behind the `effdiff` binary.

pub mod config;
pub mod output;
pub mod reproduce;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::bea::{compare_against_modified, BeaError, ModifiedComparison};
use crate::cell::{solve_cell, CellError};
use crate::ensemble::{run_ensemble, sweep, EnsembleError, SweepTable};
use crate::schemes::SchemeKind;

pub use config::{ConfigError, ExperimentConfig, RawConfig, Scale, KEYS};
pub use output::CsvWriter;
pub use reproduce::{reproduce, ReproduceTarget};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Bea(#[from] BeaError),
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("unknown reproduce target `{0}` (expected one of: {list})", list = ReproduceTarget::names().join(", "))]
    UnknownTarget(String),
    #[error("{} partially written: {message}", path.display())]
    Partial { path: PathBuf, message: String },
}

/// Writes `rows` under `columns`, or the failure marker when `rows` is an
/// error.
pub(crate) fn write_table<E: std::fmt::Display>(
    path: PathBuf,
    metadata: &[(String, String)],
    columns: &[&str],
    rows: Result<Vec<Vec<String>>, E>,
) -> Result<PathBuf, CliError>
where
    CliError: From<E>,
{
    let mut w = CsvWriter::create(&path, metadata)?;
    w.header(columns)?;
    match rows {
        Ok(rows) => {
            for r in &rows {
                w.row(r)?;
            }
            Ok(w.finish()?)
        }
        Err(e) => {
            w.fail(&e.to_string())?;
            Err(e.into())
        }
    }
}

/// Sweep rows with the grid coordinates leading and a trailing status.
pub(crate) fn sweep_rows(table: &SweepTable) -> Vec<Vec<String>> {
    let width = output::ESTIMATE_COLUMNS.len();
    let mut rows = Vec::new();
    for row in &table.rows {
        match &row.outcome {
            Ok(est) => {
                for mut r in output::estimate_rows(&row.coords, est) {
                    r.push("ok".into());
                    rows.push(r);
                }
            }
            Err(e) => {
                let mut r = row.coords.clone();
                r.extend(std::iter::repeat_n("NaN".to_string(), width));
                r.push(format!("\"failed: {}\"", e.to_string().replace('"', "'")));
                rows.push(r);
            }
        }
    }
    rows
}

pub(crate) fn sweep_columns(table: &SweepTable) -> Vec<&str> {
    let mut cols: Vec<&str> = table.axes.clone();
    cols.extend(output::ESTIMATE_COLUMNS);
    cols.push("status");
    cols
}

/// `run`: one ensemble, written to `<out>/run.csv`.
pub fn run_command(cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let rows = run_ensemble(&cfg.ensemble).map(|est| output::estimate_rows(&[], &est));
    write_table(cfg.out.join("run.csv"), &cfg.metadata("run"), &output::ESTIMATE_COLUMNS, rows)
}

/// `sweep`: the Cartesian product of every `sweep.*` axis.
pub fn sweep_command(cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let table = sweep(&cfg.ensemble, &cfg.sweep);
    let path = cfg.out.join("sweep.csv");
    let mut w = CsvWriter::create(&path, &cfg.metadata("sweep"))?;
    w.header(&sweep_columns(&table))?;
    for r in sweep_rows(&table) {
        w.row(&r)?;
    }
    Ok(w.finish()?)
}

/// `cell`: the Eulerian diffusivity of a steady flow.
pub fn cell_command(cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let rows = solve_cell(&cfg.ensemble.flow, cfg.d0, &cfg.cell).map(|sol| {
        vec![vec![
            output::num(sol.d0),
            sol.n.to_string(),
            output::num(sol.d_matrix[0][0]),
            output::num(sol.d_matrix[0][1]),
            output::num(sol.d_matrix[1][1]),
            output::num(sol.residual[0]),
            output::num(sol.residual[1]),
            sol.iterations[0].to_string(),
            sol.iterations[1].to_string(),
        ]]
    });
    write_table(
        cfg.out.join("cell.csv"),
        &cfg.metadata("cell"),
        &["D0", "modes", "D11", "D12", "D22", "residual1", "residual2", "iterations1", "iterations2"],
        rows,
    )
}

pub(crate) fn comparison_rows(cmp: &ModifiedComparison) -> Vec<Vec<String>> {
    let gap = cmp.relative_gap();
    cmp.coarse
        .times
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let (c, m) = (cmp.coarse.d[i], cmp.modified.d[i]);
            let (cs, ms) = (cmp.coarse.stderr[i], cmp.modified.stderr[i]);
            vec![
                output::num(*t),
                output::num(2.0 * c.trace()),
                output::num(2.0 * cs.d11.hypot(cs.d22)),
                output::num(2.0 * m.trace()),
                output::num(2.0 * ms.d11.hypot(ms.d22)),
                output::num(gap[i]),
            ]
        })
        .collect()
}

pub(crate) const COMPARISON_COLUMNS: [&str; 6] = ["t", "coarse_2trD", "coarse_se", "modified_2trD", "modified_se", "rel_gap"];

/// `bea`: the integrator against its modified flow.
pub fn bea_command(cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let mut ens = cfg.ensemble.clone();
    match cfg.raw.get("bea.variant") {
        Some("em") => ens.scheme.kind = SchemeKind::EulerMaruyama,
        Some(_) => ens.scheme.kind = SchemeKind::LieTrotter,
        None => {}
    }
    let rows = compare_against_modified(&ens, cfg.fine_factor).map(|c| comparison_rows(&c));
    write_table(cfg.out.join("bea.csv"), &cfg.metadata("bea"), &COMPARISON_COLUMNS, rows)
}
