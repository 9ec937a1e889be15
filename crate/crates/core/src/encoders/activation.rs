use crate::error::{Error, Result};

/// Smallest argument passed to `ln` by the loss guards.
pub const LOG_FLOOR: f64 = 1e-300;

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `1 / (1 + k e^{-z})`, i.e. `σ(z - ln k)`.
pub fn k_sigmoid(z: f64, k: f64) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("k-sigmoid needs k > 0, got {k}")));
    }
    Ok(sigmoid(z - k.ln()))
}

/// Max-subtracted softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let s: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / s).collect()
}

pub fn log_softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    z.iter().map(|v| v - lse).collect()
}

/// `ln(max(x, 1e-300))`, rejecting an exact zero.
pub fn guarded_ln(x: f64, what: &str) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::LogOfZero(what.to_string()));
    }
    Ok(x.max(LOG_FLOOR).ln())
}

/// `-ln probs[class]`.
pub fn cross_entropy(class: usize, probs: &[f64]) -> Result<f64> {
    let p = *probs.get(class).ok_or(Error::IndexOutOfRange {
        index: class,
        len: probs.len(),
    })?;
    Ok(-guarded_ln(p, "cross-entropy at the true class")?)
}

/// Output activation of a binary logistic model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Sigmoid,
    /// `σ_k`, which moves the prior log-odds `ln k` into the activation.
    KSigmoid(f64),
}

impl Activation {
    /// Offset subtracted from the score before a plain sigmoid.
    pub fn shift(&self) -> f64 {
        match self {
            Activation::Sigmoid => 0.0,
            Activation::KSigmoid(k) => k.ln(),
        }
    }

    pub fn apply(&self, z: f64) -> f64 {
        sigmoid(z - self.shift())
    }

    /// `-ln act(z)` computed without cancellation.
    pub fn neg_log(&self, z: f64) -> f64 {
        softplus(-(z - self.shift()))
    }

    /// `-ln(1 - act(z))`.
    pub fn neg_log_complement(&self, z: f64) -> f64 {
        softplus(z - self.shift())
    }
}

/// `ln(1 + e^x)`.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}
