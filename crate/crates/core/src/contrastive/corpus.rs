use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::kernels::FiniteSpace;
use crate::Mat;

/// Co-occurrence counts of (target, context) pairs from a token stream.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    /// Vocabulary in order of first appearance, with unigram frequencies.
    pub vocab: FiniteSpace,
    pub token_counts: Vec<f64>,
    /// `N⁽¹⁾(x, z)`: row = target, column = context.
    pub pair_counts: Mat,
    pub window: usize,
}

impl CorpusStats {
    /// Counts every ordered pair `(x_t, x_{t+j})` with `1 ≤ |j| ≤ window`,
    /// truncated at the ends of the sequence.
    pub fn from_tokens<S: AsRef<str>>(tokens: &[S], window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidParameter("window must be at least 1".into()));
        }
        if tokens.is_empty() {
            return Err(Error::InvalidParameter("empty token sequence".into()));
        }
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut labels = Vec::new();
        let ids: Vec<usize> = tokens
            .iter()
            .map(|t| {
                let t = t.as_ref();
                *index.entry(t).or_insert_with(|| {
                    labels.push(t.to_string());
                    labels.len() - 1
                })
            })
            .collect();
        let v = labels.len();
        let mut token_counts = vec![0.0; v];
        for &i in &ids {
            token_counts[i] += 1.0;
        }
        let mut pair_counts = Mat::zeros(v, v);
        for (t, &x) in ids.iter().enumerate() {
            let lo = t.saturating_sub(window);
            let hi = (t + window).min(ids.len() - 1);
            for (s, &z) in ids.iter().enumerate().take(hi + 1).skip(lo) {
                if s != t {
                    pair_counts[(x, z)] += 1.0;
                }
            }
        }
        let total = ids.len() as f64;
        let vocab = FiniteSpace::new(labels, token_counts.iter().map(|c| c / total).collect())?;
        Ok(Self { vocab, token_counts, pair_counts, window })
    }

    /// Statistics given directly as counts; unigram counts default to the
    /// context (column) totals.
    pub fn from_counts(pair_counts: Mat, token_counts: Option<Vec<f64>>) -> Result<Self> {
        let v = pair_counts.nrows();
        if pair_counts.ncols() != v || v == 0 {
            return Err(Error::DimensionMismatch { expected: v, found: pair_counts.ncols() });
        }
        if pair_counts.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::InvalidParameter("pair counts must be nonnegative".into()));
        }
        let token_counts = token_counts.unwrap_or_else(|| (0..v).map(|z| pair_counts.column(z).sum()).collect());
        if token_counts.len() != v {
            return Err(Error::DimensionMismatch { expected: v, found: token_counts.len() });
        }
        let total: f64 = token_counts.iter().sum();
        if !(total > 0.0) || token_counts.iter().any(|c| *c < 0.0) {
            return Err(Error::InvalidParameter("unigram counts must be nonnegative with a positive total".into()));
        }
        let vocab = FiniteSpace::indexed(token_counts.iter().map(|c| c / total).collect())?;
        Ok(Self { vocab, token_counts, pair_counts, window: 0 })
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    /// `N`, the number of positive pairs.
    pub fn total(&self) -> f64 {
        self.pair_counts.sum()
    }

    /// `N⁽¹⁾_x`, positives with target `x`.
    pub fn target_counts(&self) -> Vec<f64> {
        (0..self.len()).map(|x| self.pair_counts.row(x).sum()).collect()
    }

    /// Negative-sampling distribution: unigram frequencies raised to
    /// `exponent` and renormalized.
    pub fn negative_distribution(&self, exponent: f64) -> Result<Vec<f64>> {
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::InvalidParameter(format!("negative-sampling exponent {exponent} must be positive")));
        }
        let w: Vec<f64> = self.vocab.probability().iter().map(|p| p.powf(exponent)).collect();
        let s: f64 = w.iter().sum();
        Ok(w.into_iter().map(|v| v / s).collect())
    }
}
