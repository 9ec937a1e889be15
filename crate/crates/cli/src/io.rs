//! File formats: numeric CSV, whitespace corpora and process JSON.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use kc_core::contrastive::PairProcess;
use kc_core::linalg::format_f64;
use kc_core::{FiniteSpace, Mat, SymMatrix};
use serde::{Deserialize, Serialize};

/// Reads a comma-separated numeric table. Lines starting with `#` are
/// comments; every row must have the same number of fields.
pub fn read_matrix(path: &Path) -> Result<Mat> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_matrix(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn parse_matrix(text: &str) -> Result<Mat> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => bail!("line {line}: expected {c} fields, found {}", record.len()),
            _ => {}
        }
        for (field, raw) in record.iter().enumerate() {
            let v: f64 = raw.parse().map_err(|_| anyhow::anyhow!("line {line}, field {}: cannot parse `{raw}`", field + 1))?;
            values.push(v);
        }
        rows += 1;
    }
    let Some(cols) = cols else { bail!("no data rows") };
    Ok(Mat::from_row_slice(rows, cols, &values))
}

/// A probability vector stored as a single row or a single column.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let m = read_matrix(path)?;
    if m.nrows() != 1 && m.ncols() != 1 {
        bail!("{}: expected a single row or column, found {}×{}", path.display(), m.nrows(), m.ncols());
    }
    Ok(m.iter().copied().collect())
}

pub fn read_kernel(path: &Path) -> Result<SymMatrix> {
    let m = read_matrix(path)?;
    Ok(SymMatrix::try_from_dense(m, 1e-9).with_context(|| format!("kernel table in {}", path.display()))?)
}

pub fn format_matrix(m: &Mat) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let fields: Vec<String> = row.iter().map(|v| format_f64(*v)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: &Path, m: &Mat) -> Result<()> {
    fs::write(path, format_matrix(m)).with_context(|| format!("writing {}", path.display()))
}

/// Whitespace-separated tokens; line breaks carry no meaning.
pub fn read_corpus(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_corpus(&text))
}

pub fn parse_corpus(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_owned).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessFile {
    pub items: Vec<String>,
    pub p: Vec<f64>,
    pub augment: Vec<Vec<f64>>,
}

impl ProcessFile {
    pub fn into_process(self) -> Result<PairProcess> {
        let n = self.items.len();
        if self.p.len() != n {
            bail!("`p` has {} entries for {n} items", self.p.len());
        }
        if self.augment.len() != n {
            bail!("`augment` has {} rows for {n} items", self.augment.len());
        }
        for (i, row) in self.augment.iter().enumerate() {
            if row.len() != n {
                bail!("`augment` row {i} has {} entries for {n} items", row.len());
            }
        }
        let space = FiniteSpace::new(self.items, self.p).context("base distribution")?;
        let augment = Mat::from_fn(n, n, |i, j| self.augment[i][j]);
        Ok(PairProcess::new(space, augment).context("augmentation kernel")?)
    }

    pub fn from_process(process: &PairProcess) -> Self {
        let n = process.len();
        Self {
            items: process.space().items().to_vec(),
            p: process.space().probability().to_vec(),
            augment: (0..n).map(|i| process.augment().row(i).iter().copied().collect()).collect(),
        }
    }
}

pub fn parse_process(text: &str) -> Result<PairProcess> {
    let file: ProcessFile = serde_json::from_str(text)?;
    file.into_process()
}

pub fn read_process(path: &Path) -> Result<PairProcess> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_process(&text).with_context(|| format!("process file {}", path.display()))
}
