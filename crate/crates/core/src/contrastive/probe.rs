use crate::encoders::{log_softmax, minimize, softmax, OptimizerConfig};
use crate::error::{Error, Result};
use crate::Mat;

use super::process::{check_probability, check_rows};
use super::spectral::row_major;

/// Ground-truth class per item.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTask {
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl ProbeTask {
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        let classes = labels.iter().max().map_or(0, |m| m + 1);
        if classes < 2 {
            return Err(Error::InvalidParameter("a probe needs at least two classes".into()));
        }
        for c in 0..classes {
            if !labels.contains(&c) {
                return Err(Error::InvalidParameter(format!("class {c} has no items")));
            }
        }
        Ok(Self { labels, classes })
    }
}

#[derive(Debug, Clone)]
pub struct ProbeResult {
    /// `p`-weighted argmax error of the trained classifier.
    pub error: f64,
    /// `C × d` classifier weights.
    pub weights: Mat,
    pub predictions: Vec<usize>,
}

/// Fits `h(x) = argmax_c (W φ(x))_c` by minimizing the `p`-weighted softmax
/// cross-entropy from `W = 0`, then reports the weighted misclassification
/// rate. Ties in the argmax go to the lowest class.
pub fn linear_probe_error(phi: &Mat, task: &ProbeTask, p: &[f64], cfg: &OptimizerConfig) -> Result<ProbeResult> {
    let n = task.labels.len();
    check_rows(phi, n)?;
    check_probability(p, n)?;
    let (c, d) = (task.classes, phi.ncols());
    let obj = |w: &[f64]| {
        let w = Mat::from_row_slice(c, d, w);
        let logits = phi * w.transpose();
        let mut loss = 0.0;
        let mut g = Mat::zeros(c, d);
        for x in 0..n {
            if p[x] == 0.0 {
                continue;
            }
            let row: Vec<f64> = logits.row(x).iter().copied().collect();
            let ls = log_softmax(&row);
            loss -= p[x] * ls[task.labels[x]];
            for k in 0..c {
                let coef = p[x] * (ls[k].exp() - if k == task.labels[x] { 1.0 } else { 0.0 });
                for j in 0..d {
                    g[(k, j)] += coef * phi[(x, j)];
                }
            }
        }
        (loss, row_major(&g))
    };
    let fit = minimize(&obj, &vec![0.0; c * d], cfg)?;
    let weights = Mat::from_row_slice(c, d, &fit.params);
    let logits = phi * weights.transpose();
    let predictions: Vec<usize> = (0..n)
        .map(|x| {
            let row: Vec<f64> = logits.row(x).iter().copied().collect();
            argmax(&softmax(&row))
        })
        .collect();
    let error = (0..n).filter(|&x| predictions[x] != task.labels[x]).map(|x| p[x]).sum();
    Ok(ProbeResult { error, weights, predictions })
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}
