use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::Mat;

use super::graph::k_nearest;

/// Reconstruction weights: row `i` is supported on `neighbors[i]` and sums to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LleWeights {
    pub weights: Mat,
    pub neighbors: Vec<Vec<usize>>,
    /// Points whose local system was singular and needed the ridge term.
    pub regularized: Vec<usize>,
}

impl LleWeights {
    /// `‖x_i − Σ_j W_ij x_j‖` per point.
    pub fn residuals(&self, data: &Mat) -> Vec<f64> {
        let recon = &self.weights * data;
        (0..data.nrows()).map(|i| (data.row(i) - recon.row(i)).norm()).collect()
    }
}

const SINGULAR_RATIO: f64 = 1e-10;
const RIDGE: f64 = 1e-3;

/// Affine reconstruction weights from the `k` nearest neighbours of each row.
///
/// Each row solves `min ‖x_i − Σ_j w_j x_j‖²` subject to `Σ_j w_j = 1`
/// through the bordered system `[[C, 1], [1ᵀ, 0]]` on the local Gram matrix
/// `C_jl = (x_i − x_j)·(x_i − x_l)`. When that system is singular the
/// diagonal of `C` is raised by `1e-3 · tr(C) / k`.
pub fn lle_weights(data: &Mat, k: usize) -> Result<LleWeights> {
    let n = data.nrows();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("neighbour count {k} not in 1..{n}")));
    }
    let mut weights = Mat::zeros(n, n);
    let mut neighbors = Vec::with_capacity(n);
    let mut regularized = Vec::new();
    for i in 0..n {
        let nb = k_nearest(data, i, k);
        let diffs: Vec<DVector<f64>> = nb.iter().map(|&j| (data.row(i) - data.row(j)).transpose()).collect();
        let c = Mat::from_fn(k, k, |a, b| diffs[a].dot(&diffs[b]));
        let w = match solve_bordered(&c)? {
            Some(w) => w,
            None => {
                regularized.push(i);
                let ridge = RIDGE * c.trace().max(f64::MIN_POSITIVE) / k as f64;
                let c_reg = &c + Mat::identity(k, k) * ridge;
                solve_bordered(&c_reg)?.ok_or_else(|| {
                    Error::DegenerateGeometry(format!("local system at point {i} stays singular"))
                })?
            }
        };
        for (&j, wj) in nb.iter().zip(w.iter()) {
            weights[(i, j)] = *wj;
        }
        neighbors.push(nb);
    }
    Ok(LleWeights { weights, neighbors, regularized })
}

/// Solves `[[C, 1], [1ᵀ, 0]] [w; ν] = [0; 1]`, or `None` if the system is
/// numerically singular.
fn solve_bordered(c: &Mat) -> Result<Option<Vec<f64>>> {
    let k = c.nrows();
    // The weights are invariant to rescaling C; normalizing keeps the
    // singularity test independent of the data's units.
    let scale = c.trace() / k as f64;
    let mut a = Mat::zeros(k + 1, k + 1);
    if scale > 0.0 {
        a.view_mut((0, 0), (k, k)).copy_from(&(c / scale));
    }
    for j in 0..k {
        a[(j, k)] = 1.0;
        a[(k, j)] = 1.0;
    }
    let sym = SymMatrix::symmetrize(&a);
    let eig = sym.eigen()?;
    let largest = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let smallest = eig.values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if smallest <= SINGULAR_RATIO * largest {
        return Ok(None);
    }
    // Solve through the eigendecomposition to reuse the work above.
    let mut rhs = DVector::zeros(k + 1);
    rhs[k] = 1.0;
    let coeffs = eig.vectors.transpose() * rhs;
    let scaled = DVector::from_iterator(k + 1, coeffs.iter().zip(&eig.values).map(|(c, l)| c / l));
    let sol = &eig.vectors * scaled;
    let mut w: Vec<f64> = sol.iter().take(k).copied().collect();
    // Remove the last bits of drift from the affine constraint.
    let s: f64 = w.iter().sum();
    for v in &mut w {
        *v /= s;
    }
    Ok(Some(w))
}

/// Bottom eigenvectors of `M = (I − W)ᵀ(I − W)` orthogonal to the constant
/// vector, scaled so that `(1/N) VᵀV = I`.
pub fn lle_embed(weights: &Mat, d: usize) -> Result<Mat> {
    let n = weights.nrows();
    if weights.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: weights.ncols() });
    }
    if d == 0 || d + 1 > n {
        return Err(Error::DegenerateGeometry(format!(
            "{n} points cannot carry {d} coordinates besides the constant mode"
        )));
    }
    for i in 0..n {
        let s = weights.row(i).sum();
        if (s - 1.0).abs() > 1e-8 {
            return Err(Error::NotStochastic { row: i, sum: s });
        }
    }
    let iw = Mat::identity(n, n) - weights;
    let m = iw.transpose() * &iw;
    // The constant vector spans ker M; lifting it above the spectrum leaves
    // the remaining eigenvectors at the bottom.
    let lift = m.trace() + 1.0;
    let deflated = SymMatrix::symmetrize(&m.add_scalar(lift / n as f64));
    let eig = deflated.eigen()?;
    let scale = (n as f64).sqrt();
    let mut v = Mat::zeros(n, d);
    for j in 0..d {
        let col = n - 1 - j;
        for i in 0..n {
            v[(i, j)] = eig.vectors[(i, col)] * scale;
        }
    }
    Ok(v)
}
