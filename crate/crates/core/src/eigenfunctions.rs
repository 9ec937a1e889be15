//! Top Mercer eigenfunctions recovered by sequential constrained
//! maximization with a stop-gradient penalty.
//!
//! For functions `φ_1, …, φ_d` normalized so that `Σ_a w_a φ_j(a)² = 1`, the
//! objective is
//!
//! ```text
//! L = −Σ_j [ R_jj − Σ_{i<j} sg(R_ij)² / sg(R_ii) ],   R_ij = φ_iᵀ W K W φ_j
//! ```
//!
//! where `sg` holds its argument fixed under differentiation (only the
//! `φ_i` inside the penalty is held; `φ_j` stays live). With `W = diag(p)`
//! over all of `X`, the maximizers are the eigenfunctions of the
//! `p`-weighted operator and `R_jj` its eigenvalues.

use crate::encoders::{armijo_step, MlpEncoder, Objective, OptimizerConfig};
use crate::error::{Error, Result};
use crate::kernels::{check_distribution, Kernel, MercerDecomposition};
use crate::linalg::SymMatrix;
use crate::rng::SeededRng;
use crate::Mat;

/// `R_ij = Σ_x Σ_z p(x) ψ_i(x) K(x, z) ψ_j(z) p(z)`.
pub fn r_entry(psi_i: &[f64], psi_j: &[f64], kernel: &SymMatrix, p: &[f64]) -> Result<f64> {
    let n = kernel.n();
    for len in [psi_i.len(), psi_j.len(), p.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    let mut s = 0.0;
    for x in 0..n {
        let mut inner = 0.0;
        for z in 0..n {
            inner += kernel.get(x, z) * psi_j[z] * p[z];
        }
        s += p[x] * psi_i[x] * inner;
    }
    Ok(s)
}

/// Divides each column by its `w`-weighted root mean square.
fn normalize(values: &Mat, weights: &[f64]) -> Result<(Mat, Vec<f64>)> {
    let mut out = values.clone();
    let mut norms = Vec::with_capacity(values.ncols());
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let n = col.iter().zip(weights).map(|(v, w)| w * v * v).sum::<f64>().sqrt();
        if !(n > 0.0) {
            return Err(Error::IllConditioned(format!("function {j} vanishes on the batch")));
        }
        col /= n;
        norms.push(n);
    }
    Ok((out, norms))
}

/// Loss and gradient with respect to the raw (unnormalized) batch values.
///
/// `values` is `B × d`, `gram` the kernel on the batch, `weights` the
/// quadrature weights (`p` for a full pass over `X`, `1/B` for a sampled
/// batch). Stop-gradient occurrences are evaluated at `frozen` (same shape),
/// which defaults to `values`; at `frozen == values` the gradient is the one
/// obtained by treating `sg(·)` as constant.
pub fn neuralef_batch_loss(values: &Mat, gram: &Mat, weights: &[f64], frozen: Option<&Mat>) -> Result<(f64, Mat)> {
    let b = values.nrows();
    if b == 0 {
        return Err(Error::InvalidParameter("empty batch".into()));
    }
    if gram.shape() != (b, b) || weights.len() != b {
        return Err(Error::DimensionMismatch { expected: b, found: gram.nrows().max(weights.len()) });
    }
    let d = values.ncols();
    let (phi, norms) = normalize(values, weights)?;
    let (fixed, _) = match frozen {
        Some(f) if f.shape() != values.shape() => {
            return Err(Error::DimensionMismatch { expected: values.len(), found: f.len() })
        }
        Some(f) => normalize(f, weights)?,
        None => (phi.clone(), norms.clone()),
    };
    // A = W G W applied to columns.
    let weigh = |m: &Mat| {
        let mut out = m.clone();
        for (mut row, w) in out.row_iter_mut().zip(weights) {
            row *= *w;
        }
        out
    };
    let a_phi = weigh(&(gram * weigh(&phi)));
    let a_fixed = weigh(&(gram * weigh(&fixed)));
    let mut loss = 0.0;
    let mut g = Mat::zeros(b, d);
    for j in 0..d {
        let phij = phi.column(j);
        loss -= phij.dot(&a_phi.column(j));
        let mut gj = -2.0 * a_phi.column(j);
        for i in 0..j {
            let rii = fixed.column(i).dot(&a_fixed.column(i));
            if !(rii > 0.0) {
                return Err(Error::IllConditioned(format!("R_{i}{i} = {rii} is not positive")));
            }
            let rij = a_fixed.column(i).dot(&phij);
            loss += rij * rij / rii;
            gj += 2.0 * rij / rii * a_fixed.column(i);
        }
        // Chain rule through the normalization φ = u / ‖u‖_w.
        let radial = phij.dot(&gj);
        for a in 0..b {
            g[(a, j)] = (gj[a] - weights[a] * phij[a] * radial) / norms[j];
        }
    }
    Ok((loss, g))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeuralEfConfig {
    pub dim: usize,
    /// Items per sampled batch; `None` uses all of `X` weighted by `p`.
    pub batch: Option<usize>,
    pub optimizer: OptimizerConfig,
}

impl NeuralEfConfig {
    pub fn full_batch(dim: usize) -> Self {
        Self { dim, batch: None, optimizer: OptimizerConfig { max_iterations: 20_000, grad_tol: 1e-9, ..Default::default() } }
    }
}

/// Learned function tables with their eigenvalue estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenfunctionSet {
    /// `|X| × d`, columns normalized in `L²(p)`.
    pub tables: Mat,
    /// `R_jj` under `p`.
    pub eigenvalues: Vec<f64>,
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    /// Loss after each accepted step.
    pub trace: Vec<f64>,
}

impl EigenfunctionSet {
    pub fn function(&self, j: usize) -> Vec<f64> {
        self.tables.column(j).iter().copied().collect()
    }

    /// `Σ_x p(x) ψ̂_i(x) ψ̂_j(x)`.
    pub fn overlap(&self, i: usize, j: usize) -> f64 {
        (0..self.tables.nrows()).map(|x| self.weights[x] * self.tables[(x, i)] * self.tables[(x, j)]).sum()
    }
}

/// The surrogate with `sg` terms pinned at `frozen`, over the full space.
struct Surrogate<'a> {
    gram: &'a Mat,
    weights: &'a [f64],
    frozen: Mat,
    n: usize,
    d: usize,
}

impl Objective for Surrogate<'_> {
    fn value(&self, params: &[f64]) -> f64 {
        self.value_and_gradient(params).0
    }

    fn value_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let values = Mat::from_row_slice(self.n, self.d, params);
        match neuralef_batch_loss(&values, self.gram, self.weights, Some(&self.frozen)) {
            Ok((f, g)) => (f, crate::contrastive::row_major(&g)),
            Err(_) => (f64::NAN, vec![0.0; params.len()]),
        }
    }
}

/// Gradient descent on the stop-gradient objective: each iteration freezes
/// the current tables inside `sg` and takes an Armijo step on the resulting
/// surrogate.
pub fn train_eigenfunctions(kernel: &SymMatrix, p: &[f64], cfg: &NeuralEfConfig) -> Result<EigenfunctionSet> {
    let n = kernel.n();
    let d = cfg.dim;
    if p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: p.len() });
    }
    check_distribution(p)?;
    if d == 0 || d > n {
        return Err(Error::InvalidParameter(format!("dimension {d} not in 1..={n}")));
    }
    cfg.optimizer.validate()?;
    let mut rng = SeededRng::new(cfg.optimizer.seed);
    let mut params: Vec<f64> = (0..n * d).map(|_| rng.uniform(-0.1, 0.1)).collect();
    let full = kernel.as_mat().clone();
    let mut step = cfg.optimizer.step_size;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut grad_norm = f64::INFINITY;
    let mut converged = false;
    while iterations < cfg.optimizer.max_iterations {
        let (gram, weights, rows) = match cfg.batch {
            None => (full.clone(), p.to_vec(), (0..n).collect::<Vec<_>>()),
            Some(b) => {
                let rows: Vec<usize> = (0..b).map(|_| rng.categorical(p)).collect();
                let g = Mat::from_fn(b, b, |i, j| full[(rows[i], rows[j])]);
                (g, vec![1.0 / b as f64; b], rows)
            }
        };
        let table = Mat::from_row_slice(n, d, &params);
        let batch_values = Mat::from_fn(rows.len(), d, |i, j| table[(rows[i], j)]);
        let surrogate = Surrogate { gram: &gram, weights: &weights, frozen: batch_values.clone(), n: rows.len(), d };
        let flat = crate::contrastive::row_major(&batch_values);
        let (f, g) = surrogate.value_and_gradient(&flat);
        if !f.is_finite() {
            return Err(Error::Diverged { iteration: iterations, loss: f });
        }
        grad_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if cfg.batch.is_none() {
            trace.push(f);
            if grad_norm <= cfg.optimizer.grad_tol {
                converged = true;
                break;
            }
        }
        let Some((next, _, t)) = armijo_step(&surrogate, &flat, f, &g, (2.0 * step).min(1e12)) else {
            break;
        };
        step = t;
        iterations += 1;
        // Scatter the batch update back into the tables.
        let mut table = table;
        for (i, &x) in rows.iter().enumerate() {
            for j in 0..d {
                table[(x, j)] += next[i * d + j] - flat[i * d + j];
            }
        }
        params = crate::contrastive::row_major(&table);
    }
    let table = Mat::from_row_slice(n, d, &params);
    let (tables, _) = normalize(&table, p)?;
    let eigenvalues = (0..d)
        .map(|j| {
            let c: Vec<f64> = tables.column(j).iter().copied().collect();
            r_entry(&c, &c, kernel, p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EigenfunctionSet { tables, eigenvalues, weights: p.to_vec(), iterations, grad_norm, converged, trace })
}

/// Agreement of one learned function with the oracle decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenComparison {
    pub eigenvalue: f64,
    pub estimate: f64,
    /// Sign-adjusted `p`-weighted cosine with the oracle eigenfunction.
    pub cosine: f64,
    /// Distance to the nearest other eigenvalue, relative to this one.
    pub relative_gap: f64,
}

pub fn compare_with_oracle(set: &EigenfunctionSet, oracle: &MercerDecomposition) -> Vec<EigenComparison> {
    let lambdas = &oracle.eigenvalues;
    let gaps = relative_gaps(lambdas, set.tables.ncols());
    (0..set.tables.ncols())
        .map(|j| {
            let learned = set.function(j);
            let truth = oracle.eigenfunction(j);
            let num = oracle.inner(&learned, &truth);
            let den = (oracle.inner(&learned, &learned) * oracle.inner(&truth, &truth)).sqrt();
            EigenComparison {
                eigenvalue: lambdas[j],
                estimate: set.eigenvalues[j],
                cosine: (num / den).abs(),
                relative_gap: gaps[j],
            }
        })
        .collect()
}

/// Relative gap of each of the top `d` eigenvalues to its nearest neighbour
/// in the full spectrum.
pub fn relative_gaps(eigenvalues: &[f64], d: usize) -> Vec<f64> {
    (0..d.min(eigenvalues.len()))
        .map(|j| {
            let gap = eigenvalues
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, l)| (eigenvalues[j] - l).abs())
                .fold(f64::INFINITY, f64::min);
            gap / eigenvalues[j].abs()
        })
        .collect()
}

/// Subspace-level agreement for near-degenerate spectra: the mean squared
/// `p`-weighted cosine between the learned span and the top-`d` oracle span,
/// `(1/d) Σ_{i,j} ⟨ψ̂_i, ψ_j⟩_p²`. Equals 1 when the spans coincide.
pub fn subspace_alignment(set: &EigenfunctionSet, oracle: &MercerDecomposition) -> f64 {
    let d = set.tables.ncols();
    let mut s = 0.0;
    for i in 0..d {
        let learned = set.function(i);
        for j in 0..d {
            let c = oracle.inner(&learned, &oracle.eigenfunction(j));
            s += c * c;
        }
    }
    s / d as f64
}

/// Eigenfunctions parameterized by a network evaluated on coordinate data,
/// trained full-batch with uniform weights over the points.
#[derive(Debug, Clone)]
pub struct MlpEigenfunctions {
    pub net: MlpEncoder,
    /// Normalization applied to the network outputs on the training points.
    pub norms: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub iterations: usize,
}

impl MlpEigenfunctions {
    /// Normalized function values at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.net.forward(x)?.iter().zip(&self.norms).map(|(v, n)| v / n).collect())
    }
}

/// Stop-gradient loss as a function of network parameters, with `sg`
/// occurrences evaluated through `frozen`.
pub fn mlp_neuralef_objective(
    net: &MlpEncoder,
    params: &[f64],
    frozen: &[f64],
    points: &Mat,
    gram: &Mat,
) -> Result<(f64, Vec<f64>)> {
    let live = net.with_params(params)?;
    let held = net.with_params(frozen)?;
    let b = points.nrows();
    let d = net.output_dim();
    let outputs = |m: &MlpEncoder| -> Result<Mat> {
        let mut v = Mat::zeros(b, d);
        for i in 0..b {
            let x: Vec<f64> = points.row(i).iter().copied().collect();
            for (j, o) in m.forward(&x)?.into_iter().enumerate() {
                v[(i, j)] = o;
            }
        }
        Ok(v)
    };
    let values = outputs(&live)?;
    let fixed = outputs(&held)?;
    let weights = vec![1.0 / b as f64; b];
    let (loss, gv) = neuralef_batch_loss(&values, gram, &weights, Some(&fixed))?;
    let mut grad = vec![0.0; params.len()];
    for i in 0..b {
        let x: Vec<f64> = points.row(i).iter().copied().collect();
        let go: Vec<f64> = gv.row(i).iter().copied().collect();
        for (g, v) in grad.iter_mut().zip(live.backward(&x, &go)?) {
            *g += v;
        }
    }
    Ok((loss, grad))
}

pub fn train_eigenfunctions_mlp(
    kernel: &Kernel,
    points: &Mat,
    hidden: &[usize],
    cfg: &NeuralEfConfig,
) -> Result<MlpEigenfunctions> {
    let b = points.nrows();
    let mut sizes = vec![points.ncols()];
    sizes.extend_from_slice(hidden);
    sizes.push(cfg.dim);
    let mut net = MlpEncoder::random(&sizes, 0.5, cfg.optimizer.seed)?;
    let gram = kernel.gram_rows(points)?.into_mat();
    let mut step = cfg.optimizer.step_size;
    let mut iterations = 0;
    while iterations < cfg.optimizer.max_iterations {
        let frozen = net.params();
        let obj = |q: &[f64]| mlp_neuralef_objective(&net, q, &frozen, points, &gram).unwrap_or((f64::NAN, vec![]));
        let (f, g) = obj(&frozen);
        if !f.is_finite() {
            return Err(Error::Diverged { iteration: iterations, loss: f });
        }
        if g.iter().map(|v| v * v).sum::<f64>().sqrt() <= cfg.optimizer.grad_tol {
            break;
        }
        let Some((next, _, t)) = armijo_step(&obj, &frozen, f, &g, (2.0 * step).min(1e12)) else {
            break;
        };
        step = t;
        net.set_params(&next)?;
        iterations += 1;
    }
    let mut values = Mat::zeros(b, cfg.dim);
    for i in 0..b {
        let x: Vec<f64> = points.row(i).iter().copied().collect();
        for (j, o) in net.forward(&x)?.into_iter().enumerate() {
            values[(i, j)] = o;
        }
    }
    let weights = vec![1.0 / b as f64; b];
    let (phi, norms) = normalize(&values, &weights)?;
    let k = SymMatrix::symmetrize(&gram);
    let eigenvalues = (0..cfg.dim)
        .map(|j| {
            let c: Vec<f64> = phi.column(j).iter().copied().collect();
            r_entry(&c, &c, &k, &weights)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MlpEigenfunctions { net, norms, eigenvalues, iterations })
}
