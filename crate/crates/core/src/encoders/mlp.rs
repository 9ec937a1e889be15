use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::Mat;
use nalgebra::DVector;

/// Feedforward network with ramp (`max(0, ·)`) hidden layers and a linear
/// output layer. Parameters flatten layer by layer as `W` (row-major) then `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpEncoder {
    sizes: Vec<usize>,
    weights: Vec<Mat>,
    biases: Vec<DVector<f64>>,
}

impl MlpEncoder {
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidParameter(format!("bad layer sizes {sizes:?}")));
        }
        let weights = sizes.windows(2).map(|w| Mat::zeros(w[1], w[0])).collect();
        let biases = sizes[1..].iter().map(|&s| DVector::zeros(s)).collect();
        Ok(Self { sizes: sizes.to_vec(), weights, biases })
    }

    /// Parameters uniform on `(-scale, scale)`.
    pub fn random(sizes: &[usize], scale: f64, seed: u64) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        let mut rng = SeededRng::new(seed);
        let params: Vec<f64> = (0..net.num_params()).map(|_| rng.uniform(-scale, scale)).collect();
        net.set_params(&params)?;
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn num_params(&self) -> usize {
        self.sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            for i in 0..w.nrows() {
                out.extend(w.row(i).iter());
            }
            out.extend(b.iter());
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                found: params.len(),
            });
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("MLP parameter".into()));
        }
        let mut at = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            let (r, c) = w.shape();
            *w = Mat::from_row_slice(r, c, &params[at..at + r * c]);
            at += r * c;
            *b = DVector::from_column_slice(&params[at..at + r]);
            at += r;
        }
        Ok(())
    }

    pub fn with_params(&self, params: &[f64]) -> Result<Self> {
        let mut net = self.clone();
        net.set_params(params)?;
        Ok(net)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_trace(x)?.pop().unwrap().iter().copied().collect())
    }

    /// Activations of every layer, input first.
    fn forward_trace(&self, x: &[f64]) -> Result<Vec<DVector<f64>>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), found: x.len() });
        }
        let mut acts = vec![DVector::from_column_slice(x)];
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = w * acts.last().unwrap() + b;
            if l < last {
                z.apply(|v| *v = v.max(0.0));
            }
            acts.push(z);
        }
        Ok(acts)
    }

    /// Gradient of `⟨grad_out, f(x)⟩` with respect to the flattened parameters.
    pub fn backward(&self, x: &[f64], grad_out: &[f64]) -> Result<Vec<f64>> {
        if grad_out.len() != self.output_dim() {
            return Err(Error::DimensionMismatch { expected: self.output_dim(), found: grad_out.len() });
        }
        let acts = self.forward_trace(x)?;
        let nl = self.weights.len();
        let mut grads: Vec<(Mat, DVector<f64>)> = Vec::with_capacity(nl);
        let mut delta = DVector::from_column_slice(grad_out);
        for l in (0..nl).rev() {
            let gw = &delta * acts[l].transpose();
            let gb = delta.clone();
            if l > 0 {
                let mut back = self.weights[l].transpose() * &delta;
                // acts[l] is post-ramp, so a zero entry means the unit was inactive.
                for (g, a) in back.iter_mut().zip(acts[l].iter()) {
                    if *a <= 0.0 {
                        *g = 0.0;
                    }
                }
                delta = back;
            }
            grads.push((gw, gb));
        }
        grads.reverse();
        let mut out = Vec::with_capacity(self.num_params());
        for (gw, gb) in grads {
            for i in 0..gw.nrows() {
                out.extend(gw.row(i).iter());
            }
            out.extend(gb.iter());
        }
        Ok(out)
    }
}
