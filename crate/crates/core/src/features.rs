//! Column-wise feature propagation `Z = sum_i w_i (D^-a A D^-b)^i X`.
//!
//! Each column is split into its positive and negative parts, each part is
//! L1-normalized and propagated on its own, and the results are recombined
//! with the stored scales. Columns run in parallel; every part draws from a
//! stream keyed by `(seed, column, part)` so the worker count never changes
//! the output.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{AgpError, Result};
use crate::graph::Graph;
use crate::propagation::basic::basic_propagate;
use crate::propagation::randomized::{randomized_propagate_with, RandomizedConfig};
use crate::propagation::{Exponents, SparseSignal};
use crate::sampling::RandomStreams;
use crate::weights::WeightScheme;

pub const MAT_MAGIC: &[u8; 8] = b"AGPMAT1\0";

/// Dense column-major matrix with one row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
    /// `(||x+||_1, ||x-||_1)` per column, filled in by propagation.
    col_scale: Vec<(f64, f64)>,
}

impl FeatureMatrix {
    /// Wraps column-major `values` of shape `n x d`.
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<FeatureMatrix> {
        if values.len() != n * d {
            return Err(AgpError::Shape(format!("{} values for a {n}x{d} matrix", values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(AgpError::Numeric(format!("entry ({}, {}) is {}", i % n.max(1), i / n.max(1), values[i])));
        }
        Ok(FeatureMatrix { n, d, values, col_scale: vec![(0.0, 0.0); d] })
    }

    pub fn zeros(n: usize, d: usize) -> FeatureMatrix {
        FeatureMatrix { n, d, values: vec![0.0; n * d], col_scale: vec![(0.0, 0.0); d] }
    }

    /// Builds from row-major rows of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<FeatureMatrix> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(AgpError::Shape(format!("row {i} has {} columns, expected {d}", rows[i].len())));
        }
        let mut values = vec![0.0; n * d];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                values[j * n + i] = v;
            }
        }
        FeatureMatrix::new(n, d, values)
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n + i]
    }

    pub fn col_scale(&self) -> &[(f64, f64)] {
        &self.col_scale
    }

    pub fn write_bin<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAT_MAGIC)?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(self.d as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_bin<R: Read>(mut r: R) -> Result<FeatureMatrix> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAT_MAGIC {
            return Err(AgpError::Format("not an AGPMAT1 matrix".into()));
        }
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let d = u64::from_le_bytes(word) as usize;
        let len = n.checked_mul(d).ok_or_else(|| AgpError::Format(format!("matrix {n}x{d} overflows")))?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != len * 8 {
            return Err(AgpError::Format(format!("expected {} payload bytes, found {}", len * 8, bytes.len())));
        }
        let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        FeatureMatrix::new(n, d, values)
    }

    /// One row per line, comma separated. `#` lines are skipped.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for i in 0..self.n {
            let row: Vec<String> = (0..self.d).map(|j| format!("{:.16e}", self.get(i, j))).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<FeatureMatrix> {
        let mut rows = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(|t| {
                    t.trim().parse::<f64>().map_err(|e| AgpError::Parse {
                        line: i + 1,
                        message: format!("bad value {t:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        FeatureMatrix::from_rows(&rows)
    }

    /// Reads the binary format when the file starts with its magic, CSV otherwise.
    pub fn load(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
        let mut file = BufReader::new(File::open(path)?);
        if file.fill_buf()?.starts_with(MAT_MAGIC) {
            FeatureMatrix::read_bin(file)
        } else {
            FeatureMatrix::read_csv(file)
        }
    }

    /// Writes CSV for `.csv` paths, the binary format otherwise.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let w = BufWriter::new(File::create(path)?);
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            self.write_csv(w)
        } else {
            self.write_bin(w)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureResult {
    pub matrix: FeatureMatrix,
    pub push_count: u64,
    pub epsilon: f64,
}

/// Propagates every column of `x`. Uses the exact engine when the effective
/// `epsilon` is zero, the randomized one otherwise.
pub fn propagate_features(
    g: &Graph,
    scheme: &WeightScheme,
    exps: Exponents,
    x: &FeatureMatrix,
    cfg: &RandomizedConfig,
    workers: usize,
) -> Result<FeatureResult> {
    if x.n != g.n() {
        return Err(AgpError::Shape(format!("feature matrix has {} rows, graph has {} nodes", x.n, g.n())));
    }
    if workers == 0 {
        return Err(AgpError::config("workers must be at least 1"));
    }
    cfg.validate()?;
    let eps = cfg.epsilon_for(scheme.levels());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| AgpError::config(format!("thread pool: {e}")))?;
    let columns: Vec<Result<(Vec<f64>, (f64, f64), u64)>> = pool.install(|| {
        (0..x.d)
            .into_par_iter()
            .map(|j| propagate_column(g, scheme, exps, x.column(j), cfg, eps, j))
            .collect()
    });

    let mut out = FeatureMatrix::zeros(x.n, x.d);
    let mut push_count = 0;
    for (j, col) in columns.into_iter().enumerate() {
        let (values, scale, pushes) = col?;
        out.values[j * x.n..(j + 1) * x.n].copy_from_slice(&values);
        out.col_scale[j] = scale;
        push_count += pushes;
    }
    Ok(FeatureResult { matrix: out, push_count, epsilon: eps })
}

fn propagate_column(
    g: &Graph,
    scheme: &WeightScheme,
    exps: Exponents,
    column: &[f64],
    cfg: &RandomizedConfig,
    eps: f64,
    j: usize,
) -> Result<(Vec<f64>, (f64, f64), u64)> {
    let mut out = vec![0.0; column.len()];
    let mut scales = [0.0; 2];
    let mut pushes = 0;
    for (part, sign) in [(0usize, 1.0f64), (1, -1.0)] {
        let entries: Vec<(u32, f64)> = column
            .iter()
            .enumerate()
            .filter(|(_, &v)| v * sign > 0.0)
            .map(|(i, &v)| (i as u32, v * sign))
            .collect();
        let scale: f64 = entries.iter().map(|e| e.1).sum();
        scales[part] = scale;
        if scale == 0.0 {
            continue;
        }
        let signal = SparseSignal::new(entries.into_iter().map(|(i, v)| (i, v / scale)).collect());
        let res = if eps == 0.0 {
            basic_propagate(g, scheme, exps, &signal)?
        } else {
            let streams = RandomStreams::keyed(cfg.seed, j as u64, part as u64);
            randomized_propagate_with(g, scheme, exps, &signal, cfg, &streams)?
        };
        pushes += res.provenance.push_count;
        for (o, v) in out.iter_mut().zip(&res.values) {
            *o += sign * scale * v;
        }
    }
    Ok((out, (scales[0], scales[1]), pushes))
}
