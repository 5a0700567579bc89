//! CSV files with a `#`-prefixed metadata block.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::ensemble::DiffusivityEstimate;

/// Column names of a diffusivity time series.
pub const ESTIMATE_COLUMNS: [&str; 8] = ["t", "D11", "D12", "D22", "se11", "se12", "se22", "n"];

pub struct CsvWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvWriter {
    /// Creates `path` (and its parent directories) and writes the metadata
    /// block.
    pub fn create(path: &Path, metadata: &[(String, String)]) -> io::Result<Self> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut out = BufWriter::new(File::create(path)?);
        for (k, v) in metadata {
            writeln!(out, "# {k} = {v}")?;
        }
        Ok(Self {
            path: path.to_path_buf(),
            out,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn header<S: AsRef<str>>(&mut self, columns: &[S]) -> io::Result<()> {
        self.row(columns)
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> io::Result<()> {
        let line: Vec<&str> = fields.iter().map(AsRef::as_ref).collect();
        writeln!(self.out, "{}", line.join(","))
    }

    /// Appends the failure marker and flushes what was written so far.
    pub fn fail(mut self, message: &str) -> io::Result<PathBuf> {
        writeln!(self.out, "# FAILED: {}", message.replace('\n', " "))?;
        self.out.flush()?;
        Ok(self.path)
    }

    pub fn finish(mut self) -> io::Result<PathBuf> {
        self.out.flush()?;
        Ok(self.path)
    }
}

/// Shortest round-trip representation; identical inputs give identical text.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// One row per sample time, `prefix` prepended.
pub fn estimate_rows(prefix: &[String], est: &DiffusivityEstimate) -> Vec<Vec<String>> {
    est.times
        .iter()
        .zip(est.d.iter().zip(&est.stderr))
        .map(|(t, (d, se))| {
            let mut row = prefix.to_vec();
            row.extend([
                num(*t),
                num(d.d11),
                num(d.d12),
                num(d.d22),
                num(se.d11),
                num(se.d12),
                num(se.d22),
                est.n.to_string(),
            ]);
            row
        })
        .collect()
}

/// Data rows of a CSV file, skipping metadata and the header row.
pub fn csv_body(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}
