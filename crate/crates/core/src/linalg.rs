//! Dense symmetric matrices and a cyclic Jacobi eigen-solver.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::Mat;

/// Symmetric tolerance accepted when wrapping a dense matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Dense real symmetric matrix. Entry `(i, j)` and `(j, i)` are bitwise equal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    inner: Mat,
}

impl SymMatrix {
    /// Builds the matrix from the upper triangle of `f(i, j)`, `i <= j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut inner = Mat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                inner[(i, j)] = v;
                inner[(j, i)] = v;
            }
        }
        Self { inner }
    }

    pub fn zeros(n: usize) -> Self {
        Self { inner: Mat::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: Mat::identity(n, n) }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    /// Wraps a square matrix whose asymmetry is at most `tol`; the upper
    /// triangle wins.
    pub fn try_from_dense(m: Mat, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let n = m.nrows();
        let mut max_deviation: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                max_deviation = max_deviation.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if max_deviation > tol || max_deviation.is_nan() {
            return Err(Error::NotSymmetric { max_deviation });
        }
        Ok(Self::from_fn(n, |i, j| m[(i, j)]))
    }

    /// Symmetrises `(m + mᵀ)/2`; for matrices that are symmetric up to round-off.
    pub fn symmetrize(m: &Mat) -> Self {
        Self::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn n(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn as_mat(&self) -> &Mat {
        &self.inner
    }

    pub fn into_mat(self) -> Mat {
        self.inner
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    /// Entrywise map; the result stays symmetric.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(self.n(), |i, j| f(self.get(i, j)))
    }

    /// Principal submatrix on the given indices.
    pub fn restrict(&self, idx: &[usize]) -> Result<Self> {
        let n = self.n();
        if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, len: n });
        }
        Ok(Self::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b])))
    }

    /// Eigen-decomposition by cyclic Jacobi rotations.
    pub fn eigen(&self) -> Result<EigenDecomposition> {
        jacobi_eigen(self)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigen()?.values.last().copied().unwrap_or(0.0))
    }

    /// CSV with a `# symmetric n=<n>` header, one row per line.
    pub fn to_csv(&self) -> String {
        let n = self.n();
        let mut out = String::new();
        let _ = writeln!(out, "# symmetric n={n}");
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| format_f64(self.get(i, j))).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut declared: Option<usize> = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(rest) = comment.trim().strip_prefix("symmetric n=") {
                    declared = Some(rest.trim().parse().map_err(|_| Error::Parse {
                        line: lineno + 1,
                        message: format!("bad order in header `{line}`"),
                    })?);
                }
                continue;
            }
            let row = line
                .split(',')
                .enumerate()
                .map(|(col, field)| {
                    field.trim().parse::<f64>().map_err(|_| Error::Parse {
                        line: lineno + 1,
                        message: format!("column {}: cannot parse `{}`", col + 1, field.trim()),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        let n = rows.len();
        if let Some(d) = declared {
            if d != n {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("header declares n={d} but {n} rows follow"),
                });
            }
        }
        let mut m = Mat::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected {n} columns, found {}", row.len()),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Self::try_from_dense(m, SYMMETRY_TOL)
    }
}

/// Shortest representation that round-trips through `str::parse::<f64>`.
pub fn format_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

/// Eigenpairs sorted by nonincreasing eigenvalue; eigenvectors are columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

impl EigenDecomposition {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.column(j).iter().copied().collect()
    }

    /// `Q Λ Qᵀ`.
    pub fn reconstruct(&self) -> Mat {
        let lambda = Mat::from_diagonal(&nalgebra::DVector::from_column_slice(&self.values));
        &self.vectors * lambda * self.vectors.transpose()
    }

    /// Orthogonal projector onto the span of eigenvectors `range`.
    pub fn projector(&self, range: std::ops::Range<usize>) -> Mat {
        let q = self.vectors.columns(range.start, range.len());
        &q * q.transpose()
    }
}

/// Cyclic Jacobi for dense symmetric matrices.
///
/// Sweeps visit `(p, q)` pairs in row order; iteration stops once the
/// off-diagonal Frobenius mass drops below `1e-12 · ‖A‖_F`.
pub fn jacobi_eigen(m: &SymMatrix) -> Result<EigenDecomposition> {
    let n = m.n();
    let mut a: Vec<f64> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            a.push(m.get(i, j));
        }
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix passed to eigen-solver".into()));
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm = m.frobenius_norm();
    let threshold = OFF_DIAGONAL_TOL * norm;

    let off_mass = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    let mut off = off_mass(&a);
    while off > threshold {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NotConverged { sweeps, off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    let new_rp = c * arp - s * arq;
                    let new_rq = s * arp + c * arq;
                    a[r * n + p] = new_rp;
                    a[p * n + r] = new_rp;
                    a[r * n + q] = new_rq;
                    a[q * n + r] = new_rq;
                }
                for r in 0..n {
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
        off = off_mass(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps the sweep order for exact ties.
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));

    let values: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut pivot = 0;
        let mut best = -1.0;
        for r in 0..n {
            let mag = v[r * n + src].abs();
            if mag > best {
                best = mag;
                pivot = r;
            }
        }
        let sign = if v[pivot * n + src] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            vectors[(r, col)] = sign * v[r * n + src];
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// `true` iff the smallest eigenvalue is at least `-tol`.
pub fn is_psd(m: &SymMatrix, tol: f64) -> Result<bool> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be >= 0, got {tol}")));
    }
    Ok(m.min_eigenvalue()? >= -tol)
}

/// Default PSD tolerance: `1e-8` scaled by `max(1, |trace|)`.
pub fn default_psd_tol(m: &SymMatrix) -> f64 {
    1e-8 * m.trace().abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn random_orthogonal(n: usize, rng: &mut SeededRng) -> Mat {
        let g = Mat::from_fn(n, n, |_, _| rng.standard_normal());
        g.qr().q()
    }

    #[test]
    fn two_by_two_indefinite() {
        let m = SymMatrix::from_fn(2, |i, j| if i == j { 2.0 } else { -3.0 });
        let e = m.eigen().unwrap();
        assert!((e.values[0] - 5.0).abs() < 1e-12);
        assert!((e.values[1] + 1.0).abs() < 1e-12);
        assert!(!is_psd(&m, 1e-9).unwrap());
        assert!(is_psd(&SymMatrix::identity(2), 0.0).unwrap());
    }

    #[test]
    fn recovers_constructed_spectrum() {
        let mut rng = SeededRng::new(42);
        for &n in &[3usize, 7, 20] {
            let q = random_orthogonal(n, &mut rng);
            let spectrum: Vec<f64> = (0..n).map(|i| (n - i) as f64 * 1.5 - 4.0).collect();
            let d = Mat::from_diagonal(&nalgebra::DVector::from_vec(spectrum.clone()));
            let a = SymMatrix::symmetrize(&(&q * d * q.transpose()));
            let e = a.eigen().unwrap();
            for (got, want) in e.values.iter().zip(&spectrum) {
                assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{got} vs {want}");
            }
            let recon = e.reconstruct();
            let err = (&recon - a.as_mat()).norm();
            assert!(err <= 1e-8 * a.frobenius_norm().max(1.0));
            let qtq = e.vectors.transpose() * &e.vectors;
            assert!((qtq - Mat::identity(n, n)).norm() <= 1e-10);
        }
    }

    #[test]
    fn agrees_with_nalgebra_symmetric_eigen() {
        let mut rng = SeededRng::new(5);
        let g = Mat::from_fn(9, 9, |_, _| rng.standard_normal());
        let a = SymMatrix::symmetrize(&(&g + g.transpose()));
        let ours = a.eigen().unwrap();
        let mut theirs: Vec<f64> = a.as_mat().clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(|x, y| y.total_cmp(x));
        for (x, y) in ours.values.iter().zip(&theirs) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn sign_convention_largest_component_positive() {
        let mut rng = SeededRng::new(9);
        let g = Mat::from_fn(6, 6, |_, _| rng.uniform(-1.0, 1.0));
        let e = SymMatrix::symmetrize(&(&g * g.transpose())).eigen().unwrap();
        for j in 0..6 {
            let col = e.vector(j);
            let (idx, _) = col
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
            assert!(col[idx] > 0.0);
        }
    }

    #[test]
    fn repeated_eigenvalues_compare_by_projector() {
        let m = SymMatrix::from_diagonal(&[2.0, 2.0, 1.0]);
        let e = m.eigen().unwrap();
        let p = e.projector(0..2);
        let mut want = Mat::zeros(3, 3);
        want[(0, 0)] = 1.0;
        want[(1, 1)] = 1.0;
        assert!((p - want).norm() < 1e-12);
    }

    #[test]
    fn csv_round_trip_with_header() {
        let m = SymMatrix::from_fn(3, |i, j| (i * 3 + j) as f64 / 7.0);
        let text = m.to_csv();
        assert!(text.starts_with("# symmetric n=3\n"));
        assert_eq!(SymMatrix::from_csv(&text).unwrap(), m);
    }

    #[test]
    fn csv_rejects_asymmetric() {
        let err = SymMatrix::from_csv("1,2\n3,4\n").unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { .. }));
    }

    #[test]
    fn empty_and_zero_matrices() {
        let e = SymMatrix::zeros(4).eigen().unwrap();
        assert!(e.values.iter().all(|&v| v == 0.0));
        assert_eq!(SymMatrix::zeros(0).eigen().unwrap().n(), 0);
    }
}
