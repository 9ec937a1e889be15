use crate::encoders::{minimize, Minimized, OptimizerConfig};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::linear_dr::low_rank_factor;
use crate::rng::SeededRng;
use crate::Mat;

use super::process::{check_rows, PairProcess};

/// `−2 E_{p₊}[φ(x)ᵀφ(x')] + E_{q⊗q}[(φ(z)ᵀφ(z'))²]`, computed exactly.
pub fn spectral_loss(phi: &Mat, process: &PairProcess) -> Result<f64> {
    Ok(spectral_loss_and_gradient(phi, process)?.0)
}

/// Loss and its gradient with respect to `phi` (same shape).
pub fn spectral_loss_and_gradient(phi: &Mat, process: &PairProcess) -> Result<(f64, Mat)> {
    let n = process.len();
    check_rows(phi, n)?;
    let q = process.marginal();
    let joint = process.joint().as_mat();
    let s = phi * phi.transpose();
    let mut loss = 0.0;
    // Weighted similarity: −p₊ + (q qᵀ) ∘ S.
    let mut w = Mat::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let qq = q[a] * q[b];
            loss += -2.0 * joint[(a, b)] * s[(a, b)] + qq * s[(a, b)] * s[(a, b)];
            w[(a, b)] = -joint[(a, b)] + qq * s[(a, b)];
        }
    }
    Ok((loss, 4.0 * w * phi))
}

/// Rows `√q(x) φ(x)`.
pub fn spectral_factor(phi: &Mat, process: &PairProcess) -> Result<Mat> {
    check_rows(phi, process.len())?;
    let mut f = phi.clone();
    for (mut row, q) in f.row_iter_mut().zip(process.marginal()) {
        row *= q.sqrt();
    }
    Ok(f)
}

/// `‖Ā − FFᵀ‖_F²` with `F` from [`spectral_factor`].
pub fn factorization_error(phi: &Mat, process: &PairProcess) -> Result<f64> {
    let f = spectral_factor(phi, process)?;
    Ok((process.abar().as_mat() - &f * f.transpose()).norm_squared())
}

/// The constant separating the loss from the factorization error, `−‖Ā‖_F²`.
pub fn spectral_constant(process: &PairProcess) -> f64 {
    -process.abar().as_mat().norm_squared()
}

/// Best rank-`d` approximation of `Ā`, the Gram matrix an optimal `F` reaches.
pub fn spectral_target(process: &PairProcess, d: usize) -> Result<SymMatrix> {
    let f = low_rank_factor(process.abar(), d)?;
    Ok(SymMatrix::symmetrize(&(&f * f.transpose())))
}

#[derive(Debug, Clone)]
pub struct SpectralFit {
    pub phi: Mat,
    pub optimization: Minimized,
}

impl SpectralFit {
    pub fn gram(&self, process: &PairProcess) -> Result<Mat> {
        let f = spectral_factor(&self.phi, process)?;
        Ok(&f * f.transpose())
    }
}

/// Minimizes the spectral loss over `|X| × d` tables from a seeded uniform
/// `(−0.1, 0.1)` start.
pub fn train_spectral(process: &PairProcess, d: usize, cfg: &OptimizerConfig) -> Result<SpectralFit> {
    let n = process.len();
    if d == 0 || d > n {
        return Err(Error::InvalidParameter(format!("dimension {d} not in 1..={n}")));
    }
    let mut rng = SeededRng::new(cfg.seed);
    let init: Vec<f64> = (0..n * d).map(|_| rng.uniform(-0.1, 0.1)).collect();
    let obj = |params: &[f64]| {
        let phi = Mat::from_row_slice(n, d, params);
        let (f, g) = spectral_loss_and_gradient(&phi, process).expect("shape fixed above");
        (f, row_major(&g))
    };
    let optimization = minimize(&obj, &init, cfg)?;
    let phi = Mat::from_row_slice(n, d, &optimization.params);
    Ok(SpectralFit { phi, optimization })
}

pub(crate) fn row_major(m: &Mat) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for row in m.row_iter() {
        out.extend(row.iter());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoders::grad_check;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_table_has_zero_loss() {
        let p = PairProcess::random(5, 1).unwrap();
        assert_eq!(spectral_loss(&Mat::zeros(5, 2), &p).unwrap(), 0.0);
        assert_abs_diff_eq!(
            factorization_error(&Mat::zeros(5, 2), &p).unwrap(),
            -spectral_constant(&p),
            epsilon = 1e-14
        );
    }

    #[test]
    fn loss_minus_factorization_error_is_constant() {
        let p = PairProcess::random(6, 2).unwrap();
        let c = spectral_constant(&p);
        let mut rng = SeededRng::new(3);
        for _ in 0..20 {
            let phi = Mat::from_fn(6, 3, |_, _| rng.uniform(-2.0, 2.0));
            let gap = spectral_loss(&phi, &p).unwrap() - factorization_error(&phi, &p).unwrap();
            assert_abs_diff_eq!(gap, c, epsilon = 1e-10);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = PairProcess::random(4, 5).unwrap();
        let obj = |params: &[f64]| {
            let phi = Mat::from_row_slice(4, 2, params);
            let (f, g) = spectral_loss_and_gradient(&phi, &p).unwrap();
            (f, row_major(&g))
        };
        let x: Vec<f64> = (0..8).map(|i| (i as f64 * 0.37).sin()).collect();
        assert!(grad_check(&obj, &x, 1e-5).unwrap() <= 1e-6);
    }

    #[test]
    fn trained_rank_one_hits_top_eigenpair() {
        let p = PairProcess::blocks(&[2, 3], 0.1).unwrap();
        let cfg = OptimizerConfig { grad_tol: 1e-10, max_iterations: 20_000, ..Default::default() };
        let fit = train_spectral(&p, 1, &cfg).unwrap();
        let target = spectral_target(&p, 1).unwrap();
        assert!((fit.gram(&p).unwrap() - target.as_mat()).norm() <= 1e-6);
    }
}
