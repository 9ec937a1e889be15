use crate::encoders::{minimize, Activation, Minimized, OptimizerConfig};
use crate::encoders::sigmoid;
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::Mat;

use super::corpus::CorpusStats;
use super::spectral::row_major;

#[derive(Debug, Clone, PartialEq)]
pub struct SgnsConfig {
    pub dim: usize,
    /// Negatives per positive.
    pub k: f64,
    pub activation: Activation,
    /// Exponent applied to unigram frequencies for negative sampling.
    pub neg_exponent: f64,
    pub optimizer: OptimizerConfig,
}

impl SgnsConfig {
    pub fn new(dim: usize, k: f64) -> Self {
        Self {
            dim,
            k,
            activation: Activation::Sigmoid,
            neg_exponent: 1.0,
            optimizer: OptimizerConfig::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidParameter(format!("k = {} must be positive", self.k)));
        }
        if self.dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(())
    }
}

/// Expected negative counts `N⁽⁰⁾(x, z) = k · N⁽¹⁾_x · p̂_neg(z)`.
pub fn expected_negative_counts(stats: &CorpusStats, k: f64, neg_exponent: f64) -> Result<Mat> {
    let neg = stats.negative_distribution(neg_exponent)?;
    let n1 = stats.target_counts();
    Ok(Mat::from_fn(stats.len(), stats.len(), |x, z| k * n1[x] * neg[z]))
}

/// `Σ −N⁽¹⁾ log act(φ(x)ᵀψ(z)) − N⁽⁰⁾ log(1 − act(φ(x)ᵀψ(z)))` and its
/// gradients with respect to `φ` and `ψ`.
pub fn sgns_loss_and_gradient(
    phi: &Mat,
    psi: &Mat,
    positives: &Mat,
    negatives: &Mat,
    activation: Activation,
) -> Result<(f64, Mat, Mat)> {
    let v = positives.nrows();
    for t in [phi, psi] {
        if t.nrows() != v {
            return Err(Error::DimensionMismatch { expected: v, found: t.nrows() });
        }
    }
    if phi.ncols() != psi.ncols() {
        return Err(Error::DimensionMismatch { expected: phi.ncols(), found: psi.ncols() });
    }
    let s = phi * psi.transpose();
    let shift = activation.shift();
    let mut loss = 0.0;
    let mut g = Mat::zeros(v, v);
    for x in 0..v {
        for z in 0..v {
            let (n1, n0) = (positives[(x, z)], negatives[(x, z)]);
            let sxz = s[(x, z)];
            if n1 > 0.0 {
                loss += n1 * activation.neg_log(sxz);
            }
            if n0 > 0.0 {
                loss += n0 * activation.neg_log_complement(sxz);
            }
            let a = sigmoid(sxz - shift);
            g[(x, z)] = -n1 * (1.0 - a) + n0 * a;
        }
    }
    Ok((loss, &g * psi, g.transpose() * phi))
}

/// SGNS loss with expected negative counts.
pub fn sgns_expected_loss(phi: &Mat, psi: &Mat, stats: &CorpusStats, cfg: &SgnsConfig) -> Result<f64> {
    cfg.validate()?;
    let neg = expected_negative_counts(stats, cfg.k, cfg.neg_exponent)?;
    Ok(sgns_loss_and_gradient(phi, psi, &stats.pair_counts, &neg, cfg.activation)?.0)
}

/// `log(p̂(x,z) / (p̂(x) p̂_neg(z))) − log k` with `p̂(x,z) = N⁽¹⁾(x,z)/N` and
/// `p̂(x) = N⁽¹⁾_x/N`; entries with a zero count are `None`. This is the
/// table `φ(x)ᵀψ(z)` converges to under the plain sigmoid.
pub fn shifted_pmi_matrix(stats: &CorpusStats, k: f64, neg_exponent: f64) -> Result<Vec<Vec<Option<f64>>>> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!("k = {k} must be positive")));
    }
    let total = stats.total();
    let n1 = stats.target_counts();
    let neg = stats.negative_distribution(neg_exponent)?;
    let v = stats.len();
    Ok((0..v)
        .map(|x| {
            (0..v)
                .map(|z| {
                    let c = stats.pair_counts[(x, z)];
                    (c > 0.0 && neg[z] > 0.0).then(|| (c / total / (n1[x] / total * neg[z])).ln() - k.ln())
                })
                .collect()
        })
        .collect())
}

/// The value each score converges to for the configured activation.
pub fn sgns_target(stats: &CorpusStats, cfg: &SgnsConfig) -> Result<Vec<Vec<Option<f64>>>> {
    let mut t = shifted_pmi_matrix(stats, cfg.k, cfg.neg_exponent)?;
    let shift = cfg.activation.shift();
    for v in t.iter_mut().flatten().flatten() {
        *v += shift;
    }
    Ok(t)
}

#[derive(Debug, Clone)]
pub struct SgnsFit {
    pub phi: Mat,
    pub psi: Mat,
    pub optimization: Minimized,
}

impl SgnsFit {
    pub fn scores(&self) -> Mat {
        &self.phi * self.psi.transpose()
    }

    /// Largest gap to `target` over its defined entries.
    pub fn max_error(&self, target: &[Vec<Option<f64>>]) -> f64 {
        let s = self.scores();
        let mut worst = 0.0f64;
        for (x, row) in target.iter().enumerate() {
            for (z, t) in row.iter().enumerate() {
                if let Some(t) = t {
                    worst = worst.max((s[(x, z)] - t).abs());
                }
            }
        }
        worst
    }
}

/// Full-batch minimization of the expected SGNS loss divided by `N`.
pub fn train_sgns(stats: &CorpusStats, cfg: &SgnsConfig) -> Result<SgnsFit> {
    cfg.validate()?;
    let total = stats.total();
    if !(total > 0.0) {
        return Err(Error::InvalidParameter("corpus has no positive pairs".into()));
    }
    let v = stats.len();
    let d = cfg.dim;
    let neg = expected_negative_counts(stats, cfg.k, cfg.neg_exponent)?;
    let pos = &stats.pair_counts / total;
    let neg = neg / total;
    let mut rng = SeededRng::new(cfg.optimizer.seed);
    let init: Vec<f64> = (0..2 * v * d).map(|_| rng.uniform(-0.1, 0.1)).collect();
    let obj = |p: &[f64]| {
        let phi = Mat::from_row_slice(v, d, &p[..v * d]);
        let psi = Mat::from_row_slice(v, d, &p[v * d..]);
        let (f, gphi, gpsi) = sgns_loss_and_gradient(&phi, &psi, &pos, &neg, cfg.activation).expect("shapes fixed");
        let mut g = row_major(&gphi);
        g.extend(row_major(&gpsi));
        (f, g)
    };
    let optimization = minimize(&obj, &init, &cfg.optimizer)?;
    let phi = Mat::from_row_slice(v, d, &optimization.params[..v * d]);
    let psi = Mat::from_row_slice(v, d, &optimization.params[v * d..]);
    Ok(SgnsFit { phi, psi, optimization })
}
