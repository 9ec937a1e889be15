use crate::error::{Error, Result};
use crate::linalg::format_f64;
use crate::rng::SeededRng;
use crate::Mat;

/// One learned vector per item of a finite space.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    rows: Mat,
}

impl EmbeddingTable {
    pub fn new(rows: Mat) -> Result<Self> {
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("embedding table entry".into()));
        }
        Ok(Self { rows })
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        Self { rows: Mat::zeros(n, d) }
    }

    /// Entries uniform on `(-0.1, 0.1)` from a seeded generator.
    pub fn random(n: usize, d: usize, seed: u64) -> Self {
        let mut rng = SeededRng::new(seed);
        Self::from_params(n, d, &(0..n * d).map(|_| rng.uniform(-0.1, 0.1)).collect::<Vec<_>>())
    }

    /// Row-major parameter vector.
    pub fn from_params(n: usize, d: usize, params: &[f64]) -> Self {
        assert_eq!(params.len(), n * d, "parameter count");
        Self { rows: Mat::from_row_slice(n, d, params) }
    }

    pub fn params(&self) -> Vec<f64> {
        let (n, d) = self.rows.shape();
        let mut out = Vec::with_capacity(n * d);
        for i in 0..n {
            out.extend(self.rows.row(i).iter());
        }
        out
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn as_mat(&self) -> &Mat {
        &self.rows
    }

    pub fn forward(&self, item: usize) -> Result<Vec<f64>> {
        if item >= self.len() {
            return Err(Error::IndexOutOfRange { index: item, len: self.len() });
        }
        Ok(self.rows.row(item).iter().copied().collect())
    }

    /// One row per line, `d` comma-separated columns.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.len() {
            let row: Vec<String> = self.rows.row(i).iter().map(|v| format_f64(*v)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}
