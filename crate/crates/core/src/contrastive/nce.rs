use crate::encoders::{minimize, sigmoid, Activation, Minimized, OptimizerConfig};
use crate::error::{Error, Result};

/// Logistic noise-contrastive loss averaged over all `N⁽¹⁾ + N⁽⁰⁾` samples:
/// `−log act(s)` for data samples and `−log(1 − act(s))` for noise samples.
pub fn nce_loss(scores: &[f64], labels: &[bool], activation: Activation) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: scores.len(), found: labels.len() });
    }
    if scores.is_empty() {
        return Err(Error::InvalidParameter("no samples".into()));
    }
    let mut total = 0.0;
    for (&s, &y) in scores.iter().zip(labels) {
        if !s.is_finite() {
            return Err(Error::NonFinite(format!("score {s}")));
        }
        total += if y { activation.neg_log(s) } else { activation.neg_log_complement(s) };
    }
    Ok(total / scores.len() as f64)
}

/// Per-item counts of data (`positives`) and noise (`negatives`) samples on a
/// finite space; the score is a free parameter per item.
#[derive(Debug, Clone, PartialEq)]
pub struct NceCounts {
    pub positives: Vec<f64>,
    pub negatives: Vec<f64>,
}

impl NceCounts {
    pub fn new(positives: Vec<f64>, negatives: Vec<f64>) -> Result<Self> {
        if positives.len() != negatives.len() || positives.is_empty() {
            return Err(Error::DimensionMismatch { expected: positives.len(), found: negatives.len() });
        }
        if positives.iter().chain(&negatives).any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::InvalidParameter("counts must be nonnegative".into()));
        }
        let c = Self { positives, negatives };
        if !(c.n1() > 0.0 && c.n0() > 0.0) {
            return Err(Error::InvalidParameter("both classes need samples".into()));
        }
        Ok(c)
    }

    pub fn n1(&self) -> f64 {
        self.positives.iter().sum()
    }

    pub fn n0(&self) -> f64 {
        self.negatives.iter().sum()
    }

    /// `k = N⁽⁰⁾ / N⁽¹⁾`.
    pub fn k(&self) -> f64 {
        self.n0() / self.n1()
    }

    /// `log(p̂₁(x) / p̂₀(x))` per item; `None` where either count is zero.
    pub fn log_ratio(&self) -> Vec<Option<f64>> {
        let (n1, n0) = (self.n1(), self.n0());
        self.positives
            .iter()
            .zip(&self.negatives)
            .map(|(&a, &b)| (a > 0.0 && b > 0.0).then(|| ((a / n1) / (b / n0)).ln()))
            .collect()
    }

    /// Loss of a per-item score table and its gradient.
    pub fn loss_and_gradient(&self, scores: &[f64], activation: Activation) -> (f64, Vec<f64>) {
        let total = self.n1() + self.n0();
        let shift = activation.shift();
        let mut loss = 0.0;
        let mut grad = vec![0.0; scores.len()];
        for (i, &s) in scores.iter().enumerate() {
            let (a, b) = (self.positives[i], self.negatives[i]);
            if a > 0.0 {
                loss += a * activation.neg_log(s);
            }
            if b > 0.0 {
                loss += b * activation.neg_log_complement(s);
            }
            let sig = sigmoid(s - shift);
            grad[i] = (-a * (1.0 - sig) + b * sig) / total;
        }
        (loss / total, grad)
    }
}

#[derive(Debug, Clone)]
pub struct NceFit {
    pub scores: Vec<f64>,
    pub optimization: Minimized,
}

/// Fits one score per item from zero.
pub fn train_nce(counts: &NceCounts, activation: Activation, cfg: &OptimizerConfig) -> Result<NceFit> {
    let obj = |s: &[f64]| counts.loss_and_gradient(s, activation);
    let optimization = minimize(&obj, &vec![0.0; counts.positives.len()], cfg)?;
    Ok(NceFit { scores: optimization.params.clone(), optimization })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoders::grad_check;
    use approx::assert_abs_diff_eq;

    #[test]
    fn midpoint_scores_cost_log_two() {
        let k: f64 = 3.0;
        let l = nce_loss(&[k.ln(); 4], &[true, false, false, true], Activation::KSigmoid(k)).unwrap();
        assert_abs_diff_eq!(l, 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn separated_scores_cost_nothing() {
        let l = nce_loss(&[60.0, -60.0], &[true, false], Activation::Sigmoid).unwrap();
        assert!(l < 1e-25);
        assert!(nce_loss(&[0.0], &[true, false], Activation::Sigmoid).is_err());
    }

    #[test]
    fn count_loss_matches_sample_loss() {
        let c = NceCounts::new(vec![2.0, 1.0], vec![1.0, 3.0]).unwrap();
        let s = [0.4, -0.2];
        let samples = [0.4, 0.4, 0.4, -0.2, -0.2, -0.2, -0.2];
        let labels = [true, true, false, true, false, false, false];
        let act = Activation::KSigmoid(c.k());
        assert_abs_diff_eq!(c.loss_and_gradient(&s, act).0, nce_loss(&samples, &labels, act).unwrap(), epsilon = 1e-15);
        let obj = |p: &[f64]| c.loss_and_gradient(p, act);
        assert!(grad_check(&obj, &s, 1e-5).unwrap() <= 1e-8);
    }

    #[test]
    fn optimum_is_the_log_ratio() {
        let c = NceCounts::new(vec![30.0, 10.0], vec![20.0, 60.0]).unwrap();
        let cfg = OptimizerConfig { grad_tol: 1e-12, ..Default::default() };
        let target = c.log_ratio();
        let fit = train_nce(&c, Activation::KSigmoid(c.k()), &cfg).unwrap();
        let plain = train_nce(&c, Activation::Sigmoid, &cfg).unwrap();
        for i in 0..2 {
            assert_abs_diff_eq!(fit.scores[i], target[i].unwrap(), epsilon = 1e-6);
            assert_abs_diff_eq!(plain.scores[i], target[i].unwrap() - c.k().ln(), epsilon = 1e-6);
        }
    }
}
