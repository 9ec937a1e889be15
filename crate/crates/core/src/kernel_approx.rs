//! Nyström eigenfunction estimates and random Fourier features.

use crate::error::{Error, Result};
use crate::kernels::{Kernel, Point};
use crate::linalg::default_psd_tol;
use crate::rng::SeededRng;
use crate::Mat;

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const NYSTROM_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct NystromModel {
    pub kernel: Kernel,
    pub landmarks: Vec<Point>,
    /// All `M` Gram eigenvalues, nonincreasing.
    pub gram_eigenvalues: Vec<f64>,
    /// Gram eigenvectors as columns.
    pub gram_eigenvectors: Mat,
    /// Requested rank.
    pub rank: usize,
    /// Leading eigenvalues above the conditioning floor (may be below `rank`).
    pub usable_rank: usize,
}

pub fn nystrom_fit(kernel: &Kernel, landmarks: &[Point], d: usize) -> Result<NystromModel> {
    let m = landmarks.len();
    if d == 0 || d > m {
        return Err(Error::InvalidParameter(format!("rank {d} not in 1..={m}")));
    }
    let gram = kernel.gram(landmarks)?;
    let eig = gram.eigen()?;
    let min = *eig.values.last().unwrap();
    if min < -default_psd_tol(&gram) {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let floor = NYSTROM_RANK_TOL * eig.values[0].max(0.0);
    let usable_rank = eig.values.iter().take_while(|&&l| l > floor && l > 0.0).count();
    Ok(NystromModel {
        kernel: kernel.clone(),
        landmarks: landmarks.to_vec(),
        gram_eigenvalues: eig.values,
        gram_eigenvectors: eig.vectors,
        rank: d,
        usable_rank,
    })
}

/// `m` distinct landmark indices out of `n`, uniformly without replacement,
/// returned in increasing order.
pub fn sample_landmarks(n: usize, m: usize, seed: u64) -> Result<Vec<usize>> {
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!("cannot pick {m} landmarks out of {n}")));
    }
    let mut idx = SeededRng::new(seed).sample_without_replacement(n, m);
    idx.sort_unstable();
    Ok(idx)
}

impl NystromModel {
    pub fn landmark_count(&self) -> usize {
        self.landmarks.len()
    }

    /// Operator eigenvalue estimate `λ_i^{(G)} / M`.
    pub fn eigenvalue(&self, i: usize) -> f64 {
        self.gram_eigenvalues[i] / self.landmark_count() as f64
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.rank {
            return Err(Error::IndexOutOfRange { index: i, len: self.rank });
        }
        if i >= self.usable_rank {
            return Err(Error::IllConditioned(format!(
                "Gram eigenvalue {i} is {:.3e}, below {NYSTROM_RANK_TOL:e} of the largest",
                self.gram_eigenvalues[i]
            )));
        }
        Ok(())
    }

    fn kernel_row(&self, z: &Point) -> Result<Vec<f64>> {
        self.landmarks.iter().map(|x| self.kernel.eval(x, z)).collect()
    }

    /// `φ_i(z) ≈ (√M / λ_i^{(G)}) Σ_k K(x_k, z) u_{ik}`.
    pub fn eigenfunction(&self, i: usize, z: &Point) -> Result<f64> {
        self.check_index(i)?;
        let row = self.kernel_row(z)?;
        Ok(self.extend(i, &row))
    }

    fn extend(&self, i: usize, row: &[f64]) -> f64 {
        let m = self.landmark_count() as f64;
        let u = self.gram_eigenvectors.column(i);
        let s: f64 = row.iter().zip(u.iter()).map(|(k, u)| k * u).sum();
        m.sqrt() / self.gram_eigenvalues[i] * s
    }

    /// First `rank` (or usable) eigenfunctions evaluated at `z`.
    pub fn features(&self, z: &Point) -> Result<Vec<f64>> {
        let row = self.kernel_row(z)?;
        Ok((0..self.rank.min(self.usable_rank)).map(|i| self.extend(i, &row)).collect())
    }

    /// `Σ_i λ_i φ_i(x) φ_i(z)` over all points, with `i` ranging over the
    /// usable part of the requested rank.
    pub fn reconstruct(&self, points: &[Point]) -> Result<Mat> {
        let feats = points.iter().map(|p| self.features(p)).collect::<Result<Vec<_>>>()?;
        let n = points.len();
        let r = self.rank.min(self.usable_rank);
        let lambdas: Vec<f64> = (0..r).map(|i| self.eigenvalue(i)).collect();
        Ok(Mat::from_fn(n, n, |a, b| (0..r).map(|i| lambdas[i] * feats[a][i] * feats[b][i]).sum()))
    }
}

/// Random Fourier features for the Gaussian kernel `exp(−‖x−z‖²/(2σ²))`.
#[derive(Debug, Clone, PartialEq)]
pub struct RffModel {
    /// `d × n₀`; row `j` is frequency `ω_j`.
    pub frequencies: Mat,
    pub sigma2: f64,
    pub seed: u64,
}

/// Draws `d` frequencies from `N(0, I/σ²)`.
pub fn rff_sample(sigma2: f64, d: usize, n0: usize, seed: u64) -> Result<RffModel> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidParameter(format!("bandwidth {sigma2} must be positive")));
    }
    if d == 0 || n0 == 0 {
        return Err(Error::InvalidParameter("need at least one frequency and one input dimension".into()));
    }
    let mut rng = SeededRng::new(seed);
    let scale = 1.0 / sigma2.sqrt();
    // Filled row by row so the stream order does not depend on storage layout.
    let mut frequencies = Mat::zeros(d, n0);
    for j in 0..d {
        for c in 0..n0 {
            frequencies[(j, c)] = scale * rng.standard_normal();
        }
    }
    Ok(RffModel { frequencies, sigma2, seed })
}

impl RffModel {
    pub fn feature_count(&self) -> usize {
        self.frequencies.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.frequencies.ncols()
    }

    /// `(1/√d) [cos(ω_1ᵀx), …, cos(ω_dᵀx), sin(ω_1ᵀx), …, sin(ω_dᵀx)]`.
    pub fn features(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), found: x.len() });
        }
        let d = self.feature_count();
        let s = 1.0 / (d as f64).sqrt();
        let mut out = vec![0.0; 2 * d];
        for j in 0..d {
            let a: f64 = self.frequencies.row(j).iter().zip(x).map(|(w, v)| w * v).sum();
            out[j] = s * a.cos();
            out[d + j] = s * a.sin();
        }
        Ok(out)
    }

    /// `φ(x)·φ(z)`.
    pub fn kernel_estimate(&self, x: &[f64], z: &[f64]) -> Result<f64> {
        let fx = self.features(x)?;
        let fz = self.features(z)?;
        Ok(fx.iter().zip(&fz).map(|(a, b)| a * b).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::mercer_decompose;
    use crate::linalg::SymMatrix;
    use approx::assert_abs_diff_eq;

    fn items(n: usize) -> Vec<Point> {
        (0..n).map(Point::Item).collect()
    }

    #[test]
    fn single_landmark() {
        let k = Kernel::gaussian(2.0).unwrap();
        let m = nystrom_fit(&k, &[Point::from(vec![0.3, 1.0])], 1).unwrap();
        assert_abs_diff_eq!(m.gram_eigenvalues[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn identity_table_has_unit_spectrum() {
        let k = Kernel::table(SymMatrix::identity(6));
        let m = nystrom_fit(&k, &items(6)[1..5], 2).unwrap();
        assert!(m.gram_eigenvalues.iter().all(|l| (l - 1.0).abs() < 1e-14));
    }

    #[test]
    fn full_sampling_matches_mercer() {
        let base = [1.0, 0.5, -0.3, 0.8, 0.1];
        let t = SymMatrix::from_fn(5, |i, j| (-(base[i] - base[j] as f64).powi(2)).exp() + if i == j { 0.1 } else { 0.0 });
        let m = nystrom_fit(&Kernel::table(t.clone()), &items(5), 5).unwrap();
        let mercer = mercer_decompose(&t, &[0.2; 5]).unwrap();
        for i in 0..5 {
            assert_abs_diff_eq!(m.eigenvalue(i), mercer.eigenvalues[i], epsilon = 1e-10);
            let psi = mercer.eigenfunction(i);
            let phi: Vec<f64> = (0..5).map(|x| m.eigenfunction(i, &Point::Item(x)).unwrap()).collect();
            let sign = if psi.iter().zip(&phi).map(|(a, b)| a * b).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
            for x in 0..5 {
                assert_abs_diff_eq!(sign * phi[x], psi[x], epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn landmark_extension_collapses() {
        let k = Kernel::gaussian(1.0).unwrap();
        let pts: Vec<Point> = [[0.0, 0.0], [1.0, 0.2], [-0.5, 0.7]].iter().map(|p| Point::from(p.to_vec())).collect();
        let m = nystrom_fit(&k, &pts, 3).unwrap();
        for i in 0..3 {
            for (j, p) in pts.iter().enumerate() {
                let want = 3f64.sqrt() * m.gram_eigenvectors[(j, i)];
                assert_abs_diff_eq!(m.eigenfunction(i, p).unwrap(), want, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn rank_one_kernel() {
        let v = [1.0, 2.0, -1.0, 0.5];
        let k = Kernel::table(SymMatrix::from_fn(4, |i, j| v[i] * v[j]));
        let m = nystrom_fit(&k, &items(4)[..2], 2).unwrap();
        assert_eq!(m.usable_rank, 1);
        let f0 = m.eigenfunction(0, &Point::Item(0)).unwrap();
        for z in 1..4 {
            assert_abs_diff_eq!(m.eigenfunction(0, &Point::Item(z)).unwrap() / f0, v[z] / v[0], epsilon = 1e-12);
        }
        assert!(matches!(m.eigenfunction(1, &Point::Item(0)), Err(Error::IllConditioned(_))));
        assert!(matches!(m.eigenfunction(2, &Point::Item(0)), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn landmarks_are_distinct_and_seeded() {
        let a = sample_landmarks(32, 8, 1).unwrap();
        assert_eq!(a, sample_landmarks(32, 8, 1).unwrap());
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!(sample_landmarks(3, 4, 0).is_err());
    }

    #[test]
    fn rff_unit_norm_and_seeded() {
        let m = rff_sample(1.0, 50, 3, 9).unwrap();
        assert_eq!(m, rff_sample(1.0, 50, 3, 9).unwrap());
        let x = [0.3, -1.0, 2.0];
        assert_abs_diff_eq!(m.kernel_estimate(&x, &x).unwrap(), 1.0, epsilon = 1e-12);
        assert!(m.features(&[1.0]).is_err());
        assert!(rff_sample(0.0, 5, 1, 0).is_err());
    }

    #[test]
    fn rff_frequency_moments() {
        let sigma2 = 4.0;
        let d = 100_000;
        let m = rff_sample(sigma2, d, 2, 3).unwrap();
        for c in 0..2 {
            let col = m.frequencies.column(c);
            let mean = col.sum() / d as f64;
            let var = col.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / d as f64;
            assert!(mean.abs() <= 3.0 / (sigma2.sqrt() * (d as f64).sqrt()));
            assert!((var * sigma2 - 1.0).abs() <= 0.05);
        }
        let c01 = m.frequencies.column(0).dot(&m.frequencies.column(1)) / d as f64;
        assert!(c01.abs() * sigma2 <= 0.05);
    }
}
