use crate::error::{Error, Result};

/// A differentiable scalar function of a flat parameter vector.
pub trait Objective {
    fn value(&self, params: &[f64]) -> f64;
    fn value_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>);
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    fn value(&self, params: &[f64]) -> f64 {
        self(params).0
    }

    fn value_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>) {
        self(params)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub step_size: f64,
    pub max_iterations: usize,
    pub grad_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            step_size: 0.1,
            max_iterations: 10_000,
            grad_tol: 1e-8,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidParameter(format!("step size {} must be positive", self.step_size)));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("gradient tolerance {} must be positive", self.grad_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimized {
    pub params: Vec<f64>,
    /// Loss at the initial point followed by the loss after every accepted step.
    pub trace: Vec<f64>,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl Minimized {
    pub fn loss(&self) -> f64 {
        *self.trace.last().unwrap()
    }
}

const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 80;

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Backtracking line search along `-grad` from `params`, starting at `step`
/// and halving until the sufficient-decrease condition holds. Returns the new
/// point, its loss and the accepted step, or `None` if no step was accepted.
pub fn armijo_step<O: Objective + ?Sized>(
    obj: &O,
    params: &[f64],
    loss: f64,
    grad: &[f64],
    step: f64,
) -> Option<(Vec<f64>, f64, f64)> {
    let g2 = norm_sq(grad);
    let mut t = step;
    for _ in 0..MAX_HALVINGS {
        let trial: Vec<f64> = params.iter().zip(grad).map(|(p, g)| p - t * g).collect();
        let f = obj.value(&trial);
        if f.is_finite() && f <= loss - ARMIJO_C * t * g2 {
            return Some((trial, f, t));
        }
        t *= 0.5;
    }
    None
}

/// Full-batch gradient descent with Armijo backtracking. Each search starts
/// at twice the previously accepted step.
pub fn minimize<O: Objective + ?Sized>(obj: &O, init: &[f64], cfg: &OptimizerConfig) -> Result<Minimized> {
    cfg.validate()?;
    let mut params = init.to_vec();
    let (mut loss, mut grad) = obj.value_and_gradient(&params);
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Diverged { iteration: 0, loss });
    }
    if grad.len() != params.len() {
        return Err(Error::DimensionMismatch { expected: params.len(), found: grad.len() });
    }
    let mut trace = vec![loss];
    let mut step = cfg.step_size;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        if norm_sq(&grad).sqrt() <= cfg.grad_tol {
            converged = true;
            break;
        }
        let Some((next, f, t)) = armijo_step(obj, &params, loss, &grad, (2.0 * step).min(1e12)) else {
            // No representable decrease remains along the gradient.
            break;
        };
        iterations += 1;
        step = t;
        params = next;
        let (f2, g2) = obj.value_and_gradient(&params);
        if !f2.is_finite() || g2.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged { iteration: iterations, loss: f2 });
        }
        debug_assert!((f2 - f).abs() <= 1e-9 * f.abs().max(1.0));
        loss = f2.min(f);
        grad = g2;
        trace.push(loss);
    }
    let grad_norm = norm_sq(&grad).sqrt();
    converged |= grad_norm <= cfg.grad_tol;
    Ok(Minimized { params, trace, grad_norm, iterations, converged })
}

/// Largest relative disagreement between the analytic gradient and central
/// differences, `max_i |a_i − fd_i| / max(1, |a_i|)`.
pub fn grad_check<O: Objective + ?Sized>(obj: &O, params: &[f64], epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} must be positive")));
    }
    let (f0, analytic) = obj.value_and_gradient(params);
    if !f0.is_finite() {
        return Err(Error::NonFinite(format!("loss {f0} at check point")));
    }
    if analytic.len() != params.len() {
        return Err(Error::DimensionMismatch { expected: params.len(), found: analytic.len() });
    }
    let mut x = params.to_vec();
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + epsilon;
        let fp = obj.value(&x);
        x[i] = orig - epsilon;
        let fm = obj.value(&x);
        x[i] = orig;
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::NonFinite(format!("loss near parameter {i}")));
        }
        let fd = (fp - fm) / (2.0 * epsilon);
        worst = worst.max((analytic[i] - fd).abs() / analytic[i].abs().max(1.0));
    }
    Ok(worst)
}
