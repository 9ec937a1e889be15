//! PCA, classical MDS and the Eckart–Young low-rank factorization.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{default_psd_tol, SymMatrix};
use crate::Mat;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `n₀ × d`, orthonormal columns.
    pub basis: Mat,
    pub eigenvalues: Vec<f64>,
}

/// Mean-centers `data` (rows are observations) and keeps the top-`d`
/// eigenvectors of the biased (`1/N`) sample covariance.
pub fn pca_fit(data: &Mat, d: usize) -> Result<PcaModel> {
    let (n, dim) = data.shape();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("PCA needs at least 2 points, got {n}")));
    }
    if d == 0 || d > dim {
        return Err(Error::InvalidParameter(format!("target dimension {d} not in 1..={dim}")));
    }
    let mean: Vec<f64> = (0..dim).map(|j| data.column(j).sum() / n as f64).collect();
    let centered = center_rows(data, &mean);
    let cov = SymMatrix::symmetrize(&(centered.transpose() * &centered / n as f64));
    let eig = cov.eigen()?;
    Ok(PcaModel {
        mean,
        basis: eig.vectors.columns(0, d).into_owned(),
        eigenvalues: eig.values[..d].to_vec(),
    })
}

fn center_rows(data: &Mat, mean: &[f64]) -> Mat {
    let mut c = data.clone();
    for mut row in c.row_iter_mut() {
        for (v, m) in row.iter_mut().zip(mean) {
            *v -= m;
        }
    }
    c
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// `Bᵀ(x − mean)`.
    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.mean.len() {
            return Err(Error::DimensionMismatch { expected: self.mean.len(), found: x.len() });
        }
        let c = DVector::from_iterator(x.len(), x.iter().zip(&self.mean).map(|(a, m)| a - m));
        Ok((self.basis.transpose() * c).iter().copied().collect())
    }

    /// Transforms every row of `data`.
    pub fn transform_rows(&self, data: &Mat) -> Result<Mat> {
        if data.ncols() != self.mean.len() {
            return Err(Error::DimensionMismatch { expected: self.mean.len(), found: data.ncols() });
        }
        Ok(center_rows(data, &self.mean) * &self.basis)
    }

    /// `mean + B y`.
    pub fn reconstruct(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: y.len() });
        }
        let v = &self.basis * DVector::from_column_slice(y);
        Ok(v.iter().zip(&self.mean).map(|(a, m)| a + m).collect())
    }
}

/// Mean squared distance between each row and its projection onto the
/// affine subspace `mean + span(basis)`. The basis must be orthonormal.
pub fn projection_error(data: &Mat, mean: &[f64], basis: &Mat) -> f64 {
    let c = center_rows(data, mean);
    let resid = &c - &c * basis * basis.transpose();
    resid.norm_squared() / data.nrows() as f64
}

/// Gram matrix from squared distances,
/// `G = −½ (S − row means − column means + grand mean)`.
pub fn double_center(squared: &SymMatrix) -> Result<SymMatrix> {
    let n = squared.n();
    let s = squared.as_mat();
    if let Some(v) = s.iter().find(|v| **v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("squared distance {v} is not a nonnegative number")));
    }
    let row: Vec<f64> = (0..n).map(|i| s.row(i).sum() / n as f64).collect();
    let total = row.iter().sum::<f64>() / n as f64;
    Ok(SymMatrix::from_fn(n, |i, j| -0.5 * (s[(i, j)] - row[i] - row[j] + total)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdsResult {
    /// `N × d`.
    pub embeddings: Mat,
    /// Retained eigenvalues after clamping, nonincreasing.
    pub eigenvalues: Vec<f64>,
    /// `‖G − ΦΦᵀ‖_F` against the double-centered Gram matrix.
    pub reconstruction_error: f64,
    /// Number of negative eigenvalues of `G` clamped to zero.
    pub clamped_negative: usize,
    /// Requested columns beyond the positive spectrum, filled with zeros.
    pub padded: usize,
}

/// Classical MDS on a matrix of (unsquared) distances.
pub fn mds_embed(distances: &SymMatrix, d: usize) -> Result<MdsResult> {
    let n = distances.n();
    if d == 0 || d > n {
        return Err(Error::InvalidParameter(format!("target dimension {d} not in 1..={n}")));
    }
    if (0..n).any(|i| distances.get(i, i) != 0.0) {
        return Err(Error::InvalidParameter("distance matrix has a nonzero diagonal".into()));
    }
    let g = double_center(&distances.map(|v| v * v))?;
    let eig = g.eigen()?;
    let tol = default_psd_tol(&g);
    let clamped_negative = eig.values.iter().filter(|&&l| l < -tol).count();
    let positive = eig.values.iter().filter(|&&l| l > tol).count();
    let eigenvalues: Vec<f64> = eig.values[..d].iter().map(|&l| l.max(0.0)).collect();
    let mut embeddings = Mat::zeros(n, d);
    for j in 0..d.min(positive) {
        let s = eigenvalues[j].sqrt();
        for i in 0..n {
            embeddings[(i, j)] = eig.vectors[(i, j)] * s;
        }
    }
    let reconstruction_error = (g.as_mat() - &embeddings * embeddings.transpose()).norm();
    Ok(MdsResult {
        embeddings,
        eigenvalues,
        reconstruction_error,
        clamped_negative,
        padded: d.saturating_sub(positive),
    })
}

/// `U_d Λ_d^{1/2}`: the best rank-`d` factor `F` with `FFᵀ ≈ A` in Frobenius norm.
pub fn low_rank_factor(psd: &SymMatrix, d: usize) -> Result<Mat> {
    let n = psd.n();
    if d == 0 || d > n {
        return Err(Error::InvalidParameter(format!("rank {d} not in 1..={n}")));
    }
    let eig = psd.eigen()?;
    let min = *eig.values.last().unwrap();
    if min < -default_psd_tol(psd) {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let mut f = eig.vectors.columns(0, d).into_owned();
    for j in 0..d {
        let s = eig.values[j].max(0.0).sqrt();
        f.column_mut(j).scale_mut(s);
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dist_matrix(points: &Mat) -> SymMatrix {
        SymMatrix::from_fn(points.nrows(), |i, j| (points.row(i) - points.row(j)).norm())
    }

    #[test]
    fn pca_axis_aligned() {
        let data = Mat::from_row_slice(4, 2, &[-2.0, 0.0, -1.0, 0.0, 1.0, 0.0, 3.0, 0.0]);
        let m = pca_fit(&data, 1).unwrap();
        assert_abs_diff_eq!(m.basis[(0, 0)].abs(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.basis[(1, 0)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pca_diagonal_pair() {
        let data = Mat::from_row_slice(2, 2, &[1.0, 1.0, -1.0, -1.0]);
        let m = pca_fit(&data, 1).unwrap();
        let h = 0.5f64.sqrt();
        assert_abs_diff_eq!(m.basis[(0, 0)], h, epsilon = 1e-12);
        assert_abs_diff_eq!(m.basis[(1, 0)], h, epsilon = 1e-12);
        assert_abs_diff_eq!(m.eigenvalues[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn pca_transform_of_mean_and_basis() {
        let data = Mat::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, 1.0, 2.0, 0.0, 3.0]);
        let m = pca_fit(&data, 2).unwrap();
        assert!(m.transform(&m.mean).unwrap().iter().all(|v| v.abs() < 1e-15));
        let x: Vec<f64> = m.mean.iter().zip(m.basis.column(1).iter()).map(|(a, b)| a + b).collect();
        let y = m.transform(&x).unwrap();
        assert_abs_diff_eq!(y[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y[1], 1.0, epsilon = 1e-12);
        assert!(m.transform(&[1.0]).is_err());
        assert!(pca_fit(&data, 4).is_err());
        assert!(pca_fit(&data, 0).is_err());
    }

    #[test]
    fn double_center_two_points() {
        let s = SymMatrix::from_fn(2, |i, j| if i == j { 0.0 } else { 4.0 });
        let g = double_center(&s).unwrap();
        assert_eq!(g.as_mat(), &Mat::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        assert!(double_center(&SymMatrix::from_fn(2, |_, _| -1.0)).is_err());
    }

    #[test]
    fn double_center_collinear() {
        let x = [-1.0, 0.0, 1.0];
        let s = SymMatrix::from_fn(3, |i, j| (x[i] - x[j]) * (x[i] - x[j]));
        let g = double_center(&s).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(g.get(i, j), x[i] * x[j], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn mds_two_points() {
        let d = SymMatrix::from_fn(2, |i, j| if i == j { 0.0 } else { 2.0 });
        let r = mds_embed(&d, 1).unwrap();
        assert_abs_diff_eq!(r.embeddings[(0, 0)].abs(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.embeddings[(0, 0)], -r.embeddings[(1, 0)], epsilon = 1e-12);
        assert!(r.reconstruction_error <= 1e-8);
    }

    #[test]
    fn mds_triangle_is_isometric() {
        let h = 3f64.sqrt() / 2.0;
        let pts = Mat::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.5, h]);
        let r = mds_embed(&dist_matrix(&pts), 2).unwrap();
        for i in 0..3 {
            for j in (i + 1)..3 {
                let e = (r.embeddings.row(i) - r.embeddings.row(j)).norm();
                assert_abs_diff_eq!(e, 1.0, epsilon = 1e-9);
            }
        }
        assert_eq!(r.padded, 0);
    }

    #[test]
    fn mds_pads_beyond_rank() {
        let pts = Mat::from_row_slice(3, 1, &[0.0, 1.0, 3.0]);
        let r = mds_embed(&dist_matrix(&pts), 3).unwrap();
        assert_eq!(r.padded, 2);
        assert!(r.embeddings.column(2).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn mds_clamps_non_euclidean_input() {
        // Four points with a violated triangle inequality.
        let d = SymMatrix::from_fn(4, |i, j| match (i, j) {
            _ if i == j => 0.0,
            (0, 3) => 10.0,
            _ => 1.0,
        });
        let r = mds_embed(&d, 2).unwrap();
        assert!(r.clamped_negative >= 1);
        assert!(r.eigenvalues.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn low_rank_examples() {
        let f = low_rank_factor(&SymMatrix::identity(3), 3).unwrap();
        assert_abs_diff_eq!(&f * f.transpose(), Mat::identity(3, 3), epsilon = 1e-12);

        let v = [1.0, -2.0, 0.5];
        let a = SymMatrix::from_fn(3, |i, j| v[i] * v[j]);
        let f = low_rank_factor(&a, 1).unwrap();
        assert!((a.as_mat() - &f * f.transpose()).norm() <= 1e-10);

        let a = SymMatrix::from_diagonal(&[3.0, 1.0]);
        let f = low_rank_factor(&a, 1).unwrap();
        assert_abs_diff_eq!((a.as_mat() - &f * f.transpose()).norm(), 1.0, epsilon = 1e-12);

        let bad = SymMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(low_rank_factor(&bad, 1), Err(Error::NotPsd { .. })));
    }
}
