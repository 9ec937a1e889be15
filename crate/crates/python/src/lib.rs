//! Python module `kernel_contrast`. Matrices cross the boundary as lists of
//! rows.

use kc_core::contrastive::{
    max_conditional_tv, normalized_score_error, shifted_pmi_matrix, sparsest_partition, spectral_target,
    train_infonce, train_sgns, train_spectral, CorpusStats, InfoNceConfig, PairProcess, ScoreMode, SgnsConfig,
};
use kc_core::eigenfunctions::{compare_with_oracle, train_eigenfunctions, NeuralEfConfig};
use kc_core::encoders::{Activation, OptimizerConfig};
use kc_core::kernel_approx::{nystrom_fit, rff_sample};
use kc_core::kernels::mercer_decompose;
use kc_core::linalg::is_psd as core_is_psd;
use kc_core::linear_dr::{mds_embed, pca_fit};
use kc_core::manifold::{self, GraphRule};
use kc_core::{FiniteSpace, Kernel, Mat, Point, SymMatrix};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

type Rows = Vec<Vec<f64>>;

fn err(e: kc_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_mat(rows: &Rows) -> PyResult<Mat> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    Ok(Mat::from_fn(n, m, |i, j| rows[i][j]))
}

fn to_sym(rows: &Rows) -> PyResult<SymMatrix> {
    SymMatrix::try_from_dense(to_mat(rows)?, 1e-9).map_err(err)
}

fn to_rows(m: &Mat) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn rule(k: Option<usize>, epsilon: Option<f64>) -> GraphRule {
    match epsilon {
        Some(e) => GraphRule::Epsilon(e),
        None => GraphRule::Knn(k.unwrap_or(10)),
    }
}

fn optimizer(max_iterations: usize, seed: u64) -> OptimizerConfig {
    OptimizerConfig { max_iterations, grad_tol: 1e-9, seed, ..Default::default() }
}

#[pyfunction]
fn sigmoid(z: f64) -> f64 {
    kc_core::encoders::sigmoid(z)
}

#[pyfunction]
fn k_sigmoid(z: f64, k: f64) -> PyResult<f64> {
    kc_core::encoders::k_sigmoid(z, k).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (matrix, tol = 1e-8))]
fn is_psd(matrix: Rows, tol: f64) -> PyResult<bool> {
    core_is_psd(&to_sym(&matrix)?, tol).map_err(err)
}

/// Gram matrix of a built-in kernel: `"linear"`, `"polynomial"` (uses
/// `degree`) or `"gaussian"` (uses `sigma2`).
#[pyfunction]
#[pyo3(signature = (data, kind, degree = 2, sigma2 = 1.0))]
fn gram(data: Rows, kind: &str, degree: u32, sigma2: f64) -> PyResult<Rows> {
    let k = match kind {
        "linear" => Kernel::Linear,
        "polynomial" => Kernel::polynomial(degree).map_err(err)?,
        "gaussian" => Kernel::gaussian(sigma2).map_err(err)?,
        other => return Err(PyValueError::new_err(format!("unknown kernel `{other}`"))),
    };
    Ok(to_rows(k.gram_rows(&to_mat(&data)?).map_err(err)?.as_mat()))
}

/// Eigenvalues and eigenfunction tables (columns) of a kernel table under `p`.
#[pyfunction]
fn mercer(kernel: Rows, p: Vec<f64>) -> PyResult<(Vec<f64>, Rows)> {
    let m = mercer_decompose(&to_sym(&kernel)?, &p).map_err(err)?;
    Ok((m.eigenvalues, to_rows(&m.eigenfunctions)))
}

/// Returns `(data, t, h)`.
#[pyfunction]
#[pyo3(signature = (n, noise = 0.0, seed = 0))]
fn swiss_roll(n: usize, noise: f64, seed: u64) -> (Rows, Vec<f64>, Vec<f64>) {
    let r = manifold::swiss_roll(n, noise, seed);
    (to_rows(&r.data), r.t, r.h)
}

/// Returns `(embeddings, eigenvalues)`.
#[pyfunction]
fn pca(data: Rows, dim: usize) -> PyResult<(Rows, Vec<f64>)> {
    let x = to_mat(&data)?;
    let model = pca_fit(&x, dim).map_err(err)?;
    Ok((to_rows(&model.transform_rows(&x).map_err(err)?), model.eigenvalues))
}

#[pyfunction]
fn mds(distances: Rows, dim: usize) -> PyResult<Rows> {
    Ok(to_rows(&mds_embed(&to_sym(&distances)?, dim).map_err(err)?.embeddings))
}

#[pyfunction]
#[pyo3(signature = (data, dim, k = None, epsilon = None))]
fn isomap(data: Rows, dim: usize, k: Option<usize>, epsilon: Option<f64>) -> PyResult<Rows> {
    let iso = manifold::isomap(&to_mat(&data)?, rule(k, epsilon), dim).map_err(err)?;
    Ok(to_rows(iso.embeddings()))
}

#[pyfunction]
#[pyo3(signature = (data, dim, k = 10))]
fn lle(data: Rows, dim: usize, k: usize) -> PyResult<Rows> {
    let w = manifold::lle_weights(&to_mat(&data)?, k).map_err(err)?;
    Ok(to_rows(&manifold::lle_embed(&w.weights, dim).map_err(err)?))
}

#[pyfunction]
#[pyo3(signature = (data, dim, t = 1.0, k = None, epsilon = None))]
fn laplacian_eigenmaps(data: Rows, dim: usize, t: f64, k: Option<usize>, epsilon: Option<f64>) -> PyResult<Rows> {
    let emb = manifold::laplacian_eigenmaps(&to_mat(&data)?, rule(k, epsilon), t, dim).map_err(err)?;
    Ok(to_rows(&emb.embeddings))
}

/// Nyström features of every row of `data` from the given landmark rows.
#[pyfunction]
#[pyo3(signature = (data, landmarks, dim, sigma2 = 1.0))]
fn nystrom_features(data: Rows, landmarks: Vec<usize>, dim: usize, sigma2: f64) -> PyResult<Rows> {
    let points: Vec<Point> = data.into_iter().map(Point::Coords).collect();
    let chosen = landmarks
        .iter()
        .map(|&i| points.get(i).cloned().ok_or_else(|| PyValueError::new_err(format!("landmark {i} out of range"))))
        .collect::<PyResult<Vec<_>>>()?;
    let model = nystrom_fit(&Kernel::gaussian(sigma2).map_err(err)?, &chosen, dim).map_err(err)?;
    points.iter().map(|p| model.features(p).map_err(err)).collect()
}

#[pyfunction]
#[pyo3(signature = (data, features, sigma2 = 1.0, seed = 0))]
fn rff_features(data: Rows, features: usize, sigma2: f64, seed: u64) -> PyResult<Rows> {
    let dim = data.first().map_or(0, Vec::len);
    let model = rff_sample(sigma2, features, dim, seed).map_err(err)?;
    data.iter().map(|x| model.features(x).map_err(err)).collect()
}

/// Learned eigenfunction tables with their estimates and, per function,
/// `(eigenvalue, estimate, cosine, relative_gap)` against the exact decomposition.
#[pyfunction]
#[pyo3(signature = (kernel, p, dim, seed = 0))]
fn eigenfunctions(kernel: Rows, p: Vec<f64>, dim: usize, seed: u64) -> PyResult<(Rows, Vec<(f64, f64, f64, f64)>)> {
    let k = to_sym(&kernel)?;
    let mut cfg = NeuralEfConfig::full_batch(dim);
    cfg.optimizer.seed = seed;
    let set = train_eigenfunctions(&k, &p, &cfg).map_err(err)?;
    let oracle = mercer_decompose(&k, &p).map_err(err)?;
    let cmp = compare_with_oracle(&set, &oracle)
        .into_iter()
        .map(|c| (c.eigenvalue, c.estimate, c.cosine, c.relative_gap))
        .collect();
    Ok((to_rows(&set.tables), cmp))
}

/// Trains SGNS on a token list; returns `(phi, psi, max_error)` where the
/// error is measured against the shifted PMI target.
#[pyfunction]
#[pyo3(signature = (tokens, dim, k = 1.0, window = 2, use_k_sigmoid = false, max_iterations = 20000, seed = 0))]
fn sgns(
    tokens: Vec<String>,
    dim: usize,
    k: f64,
    window: usize,
    use_k_sigmoid: bool,
    max_iterations: usize,
    seed: u64,
) -> PyResult<(Rows, Rows, f64)> {
    let stats = CorpusStats::from_tokens(&tokens, window).map_err(err)?;
    let mut cfg = SgnsConfig::new(dim, k);
    cfg.optimizer = optimizer(max_iterations, seed);
    let shift = if use_k_sigmoid {
        cfg.activation = Activation::KSigmoid(k);
        1.0
    } else {
        k
    };
    let fit = train_sgns(&stats, &cfg).map_err(err)?;
    let target = shifted_pmi_matrix(&stats, shift, cfg.neg_exponent).map_err(err)?;
    Ok((to_rows(&fit.phi), to_rows(&fit.psi), fit.max_error(&target)))
}

/// A finite augmentation process: base distribution `p` and row-stochastic
/// augmentation kernel.
#[pyclass(name = "PairProcess", module = "kernel_contrast")]
struct PyPairProcess {
    inner: PairProcess,
}

#[pymethods]
impl PyPairProcess {
    #[new]
    fn new(items: Vec<String>, p: Vec<f64>, augment: Rows) -> PyResult<Self> {
        let space = FiniteSpace::new(items, p).map_err(err)?;
        Ok(Self { inner: PairProcess::new(space, to_mat(&augment)?).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (sizes, leak = 0.0))]
    fn blocks(sizes: Vec<usize>, leak: f64) -> PyResult<Self> {
        Ok(Self { inner: PairProcess::blocks(&sizes, leak).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (n, seed = 0))]
    fn random(n: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: PairProcess::random(n, seed).map_err(err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn items(&self) -> Vec<String> {
        self.inner.space().items().to_vec()
    }

    #[getter]
    fn marginal(&self) -> Vec<f64> {
        self.inner.marginal().to_vec()
    }

    #[getter]
    fn joint(&self) -> Rows {
        to_rows(self.inner.joint().as_mat())
    }

    #[getter]
    fn kplus(&self) -> Rows {
        to_rows(self.inner.kplus().as_mat())
    }

    #[getter]
    fn abar(&self) -> Rows {
        to_rows(self.inner.abar().as_mat())
    }

    /// Best rank-`dim` factorization target of the normalized adjacency.
    fn spectral_target(&self, dim: usize) -> PyResult<Rows> {
        Ok(to_rows(spectral_target(&self.inner, dim).map_err(err)?.as_mat()))
    }

    /// Trains the spectral contrastive loss; returns `(phi, ‖FFᵀ − target‖_F)`.
    #[pyo3(signature = (dim, max_iterations = 20000, seed = 0))]
    fn train_spectral(&self, dim: usize, max_iterations: usize, seed: u64) -> PyResult<(Rows, f64)> {
        let fit = train_spectral(&self.inner, dim, &optimizer(max_iterations, seed)).map_err(err)?;
        let target = spectral_target(&self.inner, dim).map_err(err)?;
        let gap = (fit.gram(&self.inner).map_err(err)? - target.as_mat()).norm();
        Ok((to_rows(&fit.phi), gap))
    }

    /// Trains untied (or tied) InfoNCE on the exact expected loss; returns
    /// `(scores, max conditional TV, normalized score error)`.
    #[pyo3(signature = (dim, tau = 1.0, batch = 2, tied = false, max_iterations = 20000, seed = 0))]
    fn train_infonce(
        &self,
        dim: usize,
        tau: f64,
        batch: usize,
        tied: bool,
        max_iterations: usize,
        seed: u64,
    ) -> PyResult<(Rows, f64, f64)> {
        let cfg = InfoNceConfig {
            dim,
            tau,
            batch,
            mode: if tied { ScoreMode::Tied } else { ScoreMode::Untied },
            optimizer: optimizer(max_iterations, seed),
        };
        let fit = train_infonce(&self.inner, &cfg).map_err(err)?;
        let tv = max_conditional_tv(&fit.scores, &self.inner, batch).map_err(err)?;
        let ne = normalized_score_error(&fit.scores, &self.inner).map_err(err)?;
        Ok((to_rows(&fit.scores), tv, ne))
    }

    /// Sparsest `parts`-way partition: `(value, assignment)`.
    #[pyo3(signature = (parts = 2))]
    fn sparsest_partition(&self, parts: usize) -> PyResult<(f64, Vec<usize>)> {
        let s = sparsest_partition(&self.inner, parts).map_err(err)?;
        Ok((s.value, s.assignment))
    }
}

#[pymodule]
pub fn kernel_contrast(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPairProcess>()?;
    m.add_function(wrap_pyfunction!(sigmoid, m)?)?;
    m.add_function(wrap_pyfunction!(k_sigmoid, m)?)?;
    m.add_function(wrap_pyfunction!(is_psd, m)?)?;
    m.add_function(wrap_pyfunction!(gram, m)?)?;
    m.add_function(wrap_pyfunction!(mercer, m)?)?;
    m.add_function(wrap_pyfunction!(swiss_roll, m)?)?;
    m.add_function(wrap_pyfunction!(pca, m)?)?;
    m.add_function(wrap_pyfunction!(mds, m)?)?;
    m.add_function(wrap_pyfunction!(isomap, m)?)?;
    m.add_function(wrap_pyfunction!(lle, m)?)?;
    m.add_function(wrap_pyfunction!(laplacian_eigenmaps, m)?)?;
    m.add_function(wrap_pyfunction!(nystrom_features, m)?)?;
    m.add_function(wrap_pyfunction!(rff_features, m)?)?;
    m.add_function(wrap_pyfunction!(eigenfunctions, m)?)?;
    m.add_function(wrap_pyfunction!(sgns, m)?)?;
    Ok(())
}
