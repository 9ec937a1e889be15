//! Verification suites: fixed-seed experiments compared against closed-form
//! oracles, each reported as a list of named checks.

use anyhow::{bail, Result};
use kc_core::contrastive::{
    expected_negative_counts, expected_simclr_loss, expected_simclr_loss_and_gradient, factorization_error,
    infonce_objective, max_conditional_tv, normalized_score_error, sgns_loss_and_gradient, shifted_pmi_matrix,
    spectral_loss, spectral_loss_and_gradient, spectral_target, train_infonce, train_nce, train_sgns,
    train_spectral, CorpusStats, InfoNceConfig, NceCounts, PairProcess, ScoreMode, SgnsConfig,
};
use kc_core::eigenfunctions::{
    compare_with_oracle, mlp_neuralef_objective, neuralef_batch_loss, relative_gaps, train_eigenfunctions,
    NeuralEfConfig,
};
use kc_core::encoders::{grad_check, Activation, MlpEncoder, OptimizerConfig};
use kc_core::kernel_approx::{nystrom_fit, rff_sample, sample_landmarks};
use kc_core::kernels::mercer_decompose;
use kc_core::linalg::is_psd;
use kc_core::linear_dr::{double_center, mds_embed, pca_fit, projection_error};
use kc_core::manifold::{
    laplacian_eigenmaps_graph, lle_embed, lle_weights, pairwise_distances, shortest_paths, swiss_roll, GraphRule,
    NeighborGraph, WeightRule,
};
use kc_core::rng::SeededRng;
use kc_core::{FiniteSpace, Kernel, Mat, Point, SymMatrix};
use serde::Serialize;

pub const SUITES: &[&str] = &[
    "sgns-pmi",
    "infonce-kplus",
    "spectral-ey",
    "nystrom",
    "rff",
    "manifold",
    "eigenfun",
    "classification",
    "gradients",
    "psd",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Bound {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub bound: Bound,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: impl Into<String>, observed: f64, bound: Bound, tolerance: f64) {
        let passed = match bound {
            Bound::AtMost => observed <= tolerance,
            Bound::AtLeast => observed >= tolerance,
        };
        self.0.push(Check { name: name.into(), observed, bound, tolerance, passed });
    }

    fn at_most(&mut self, name: impl Into<String>, observed: f64, tolerance: f64) {
        self.push(name, observed, Bound::AtMost, tolerance);
    }

    fn at_least(&mut self, name: impl Into<String>, observed: f64, tolerance: f64) {
        self.push(name, observed, Bound::AtLeast, tolerance);
    }
}

pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    let mut c = Checks::default();
    match name {
        "sgns-pmi" => sgns_pmi(&mut c, seed)?,
        "infonce-kplus" => infonce_kplus(&mut c, seed)?,
        "spectral-ey" => spectral_ey(&mut c, seed)?,
        "nystrom" => nystrom(&mut c, seed)?,
        "rff" => rff(&mut c, seed)?,
        "manifold" => manifold(&mut c, seed)?,
        "eigenfun" => eigenfun(&mut c, seed)?,
        "classification" => classification(&mut c)?,
        "gradients" => gradients(&mut c, seed)?,
        "psd" => psd(&mut c, seed)?,
        other => bail!("unknown suite `{other}`; expected one of {}", SUITES.join(", ")),
    }
    let passed = c.0.iter().all(|k| k.passed);
    Ok(SuiteReport { suite: name.to_string(), seed, passed, checks: c.0 })
}

fn tight(max_iterations: usize, grad_tol: f64, seed: u64) -> OptimizerConfig {
    OptimizerConfig { max_iterations, grad_tol, seed, ..Default::default() }
}

/// Every ordered pair of the `v` words appears adjacently, followed by a
/// seeded skewed tail so that the PMI table is not flat.
pub fn toy_corpus(v: usize, tail: usize, seed: u64) -> Vec<String> {
    let mut ids = Vec::new();
    for a in 0..v {
        for b in 0..v {
            ids.push(a);
            ids.push(b);
        }
    }
    let weights: Vec<f64> = (0..v).map(|i| 1.0 / (i + 1) as f64).collect();
    let total: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let mut rng = SeededRng::new(seed);
    ids.extend((0..tail).map(|_| rng.categorical(&probs)));
    ids.into_iter().map(|i| format!("w{i}")).collect()
}

fn sgns_pmi(c: &mut Checks, seed: u64) -> Result<()> {
    let v = 5;
    let stats = CorpusStats::from_tokens(&toy_corpus(v, 60, seed), 1)?;
    let missing = stats.pair_counts.iter().filter(|&&n| n <= 0.0).count();
    c.at_most("pairs never co-occurring", missing as f64, 0.0);
    let pmi = shifted_pmi_matrix(&stats, 1.0, 1.0)?;
    for k in [1.0, 2.0, 4.0] {
        let mut cfg = SgnsConfig::new(v, k);
        cfg.optimizer = tight(200_000, 1e-10, seed);
        let fit = train_sgns(&stats, &cfg)?;
        c.at_most(format!("k={k} sigmoid: max |φψᵀ − (PMI − log k)|"), fit.max_error(&shifted_pmi_matrix(&stats, k, 1.0)?), 1e-3);
        cfg.activation = Activation::KSigmoid(k);
        let fit = train_sgns(&stats, &cfg)?;
        c.at_most(format!("k={k} k-sigmoid: max |φψᵀ − PMI|"), fit.max_error(&pmi), 1e-3);
    }
    Ok(())
}

/// Four items with a nonuniform base distribution and overlapping views.
pub fn constructed_process() -> Result<PairProcess> {
    let aug = Mat::from_row_slice(4, 4, &[0.6, 0.2, 0.1, 0.1, 0.2, 0.5, 0.2, 0.1, 0.1, 0.1, 0.7, 0.1, 0.1, 0.2, 0.2, 0.5]);
    Ok(PairProcess::new(FiniteSpace::indexed(vec![0.3, 0.2, 0.25, 0.25])?, aug)?)
}

fn infonce_kplus(c: &mut Checks, seed: u64) -> Result<()> {
    let process = constructed_process()?;
    let batch = 2;
    let optimum = process.kplus().as_mat().map(f64::ln);
    let (_, g) = expected_simclr_loss_and_gradient(&optimum, &process, batch)?;
    c.at_most("gradient at log K₊ scores", g.amax(), 1e-10);
    let cfg = InfoNceConfig {
        dim: 4,
        tau: 1.0,
        batch,
        mode: ScoreMode::Untied,
        optimizer: tight(50_000, 1e-9, seed),
    };
    let fit = train_infonce(&process, &cfg)?;
    let estimate = expected_simclr_loss(&fit.scores, &process, batch, None)?;
    c.at_most("Monte Carlo fallback used", if estimate.std_error.is_some() { 1.0 } else { 0.0 }, 0.0);
    let best = expected_simclr_loss(&optimum, &process, batch, None)?.value;
    c.at_most("trained loss − optimal loss", estimate.value - best, 1e-6);
    c.at_most("max TV of candidate conditionals", max_conditional_tv(&fit.scores, &process, batch)?, 1e-2);
    c.at_most("max |softmax(s) − K₊/ΣK₊|", normalized_score_error(&fit.scores, &process)?, 1e-2);
    Ok(())
}

fn spectral_ey(c: &mut Checks, seed: u64) -> Result<()> {
    let process = PairProcess::random(8, seed)?;
    let mut rng = SeededRng::new(seed.wrapping_add(1));
    let gaps = (0..20)
        .map(|_| {
            let phi = Mat::from_fn(8, 3, |_, _| rng.standard_normal());
            Ok(spectral_loss(&phi, &process)? - factorization_error(&phi, &process)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (gaps.len() - 1) as f64;
    c.at_most("relative variance of loss − ‖Ā − FFᵀ‖²", var / mean.powi(2).max(f64::MIN_POSITIVE), 1e-18);
    let abar = process.abar().as_mat();
    let full = train_spectral(&process, 8, &tight(100_000, 1e-10, seed))?;
    c.at_most("full rank ‖FFᵀ − Ā‖_F", (full.gram(&process)? - abar).norm(), 1e-3);
    let one = train_spectral(&process, 1, &tight(100_000, 1e-10, seed))?;
    let target = spectral_target(&process, 1)?;
    c.at_most("rank 1 ‖FFᵀ − best rank-1‖_F", (one.gram(&process)? - target.as_mat()).norm(), 1e-3);
    Ok(())
}

fn classification(c: &mut Checks) -> Result<()> {
    let counts = NceCounts::new(vec![30.0, 10.0, 5.0, 15.0], vec![20.0, 60.0, 40.0, 30.0])?;
    let cfg = tight(100_000, 1e-12, 0);
    let ratio = counts.log_ratio();
    let shifted = train_nce(&counts, Activation::KSigmoid(counts.k()), &cfg)?;
    let plain = train_nce(&counts, Activation::Sigmoid, &cfg)?;
    let mut worst_k = 0.0f64;
    let mut worst = 0.0f64;
    for (i, r) in ratio.iter().enumerate() {
        let r = r.expect("all counts positive");
        worst_k = worst_k.max((shifted.scores[i] - r).abs());
        worst = worst.max((plain.scores[i] - (r - counts.k().ln())).abs());
    }
    c.at_most("k-sigmoid: max |s − log(p̂₁/p̂₀)|", worst_k, 1e-3);
    c.at_most("sigmoid: max |s − (log(p̂₁/p̂₀) − log k)|", worst, 1e-3);
    Ok(())
}

fn random_points(n: usize, dim: usize, lo: f64, hi: f64, rng: &mut SeededRng) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.uniform(lo, hi)).collect()).collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

fn nystrom(c: &mut Checks, seed: u64) -> Result<()> {
    let n = 16;
    let mut rng = SeededRng::new(seed);
    let points: Vec<Point> = random_points(n, 2, 0.0, 2.0, &mut rng).into_iter().map(Point::Coords).collect();
    let kernel = Kernel::gaussian(1.0)?;
    let gram = kernel.gram(&points)?;
    let oracle = mercer_decompose(&gram, &vec![1.0 / n as f64; n])?;
    let model = nystrom_fit(&kernel, &points, n)?;
    let top = 8.min(model.usable_rank);
    let mut value_err = 0.0f64;
    let mut fn_err = 0.0f64;
    for i in 0..top {
        value_err = value_err.max((model.eigenvalue(i) - oracle.eigenvalues[i]).abs());
        let truth = oracle.eigenfunction(i);
        let est = points.iter().map(|z| model.eigenfunction(i, z)).collect::<kc_core::Result<Vec<_>>>()?;
        let sign = if truth.iter().zip(&est).map(|(a, b)| a * b).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        for (a, b) in truth.iter().zip(&est) {
            fn_err = fn_err.max((a - sign * b).abs());
        }
    }
    c.at_least("eigenpairs compared", top as f64, 8.0);
    c.at_most("full sampling: max eigenvalue error", value_err, 1e-8);
    c.at_most("full sampling: max eigenfunction error up to sign", fn_err, 1e-8);
    let mut medians = Vec::new();
    for m in [4, 8, 16] {
        let errs = (0..20u64)
            .map(|s| {
                let idx = sample_landmarks(n, m, seed.wrapping_add(100 + s))?;
                let landmarks: Vec<Point> = idx.iter().map(|&i| points[i].clone()).collect();
                let approx = nystrom_fit(&kernel, &landmarks, m)?.reconstruct(&points)?;
                Ok((approx - gram.as_mat()).amax())
            })
            .collect::<Result<Vec<f64>>>()?;
        medians.push(median(errs));
    }
    c.at_most("median error M=8 minus M=4", medians[1] - medians[0], 0.0);
    c.at_most("median error M=16 minus M=8", medians[2] - medians[1], 0.0);
    Ok(())
}

fn rff(c: &mut Checks, seed: u64) -> Result<()> {
    let mut rng = SeededRng::new(seed);
    let exact = Kernel::gaussian(1.0)?;
    let model = rff_sample(1.0, 2000, 2, seed)?;
    let mut worst = 0.0f64;
    let mut pairs = Vec::new();
    for _ in 0..100 {
        let x = random_points(1, 2, -2.0, 2.0, &mut rng).remove(0);
        let z = random_points(1, 2, -2.0, 2.0, &mut rng).remove(0);
        worst = worst.max((model.kernel_estimate(&x, &z)? - exact.eval_coords(&x, &z)?).abs());
        pairs.push((x, z));
    }
    c.at_most("d=2000: max |φ(x)·φ(z) − K(x,z)| over 100 pairs", worst, 0.15);
    let (x, z) = &pairs[0];
    let k = exact.eval_coords(x, z)?;
    let (d, eps, trials) = (500usize, 0.1, 1000u64);
    let mut failures = 0;
    for t in 0..trials {
        let m = rff_sample(1.0, d, 2, seed.wrapping_add(10_000 + t))?;
        if (m.kernel_estimate(x, z)? - k).abs() > eps {
            failures += 1;
        }
    }
    let bound = 2.0 * (-(d as f64) * eps * eps / 2.0).exp() + 0.01;
    c.at_most("d=500: empirical failure rate at ε=0.1", failures as f64 / trials as f64, bound);
    Ok(())
}

fn manifold(c: &mut Checks, seed: u64) -> Result<()> {
    // Geodesics along a half circle.
    let n = 200;
    let angles: Vec<f64> = (0..n).map(|i| std::f64::consts::PI * i as f64 / (n - 1) as f64).collect();
    let arc = Mat::from_fn(n, 2, |i, j| if j == 0 { angles[i].cos() } else { angles[i].sin() });
    let graph = NeighborGraph::build(&arc, GraphRule::Epsilon(0.15), WeightRule::Euclidean)?;
    c.at_most("half circle: graph components", graph.component_count() as f64, 1.0);
    let geo = shortest_paths(&graph);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let truth = (angles[j] - angles[i]).abs();
            worst = worst.max((geo.get(i, j) - truth).abs() / truth);
        }
    }
    c.at_most("half circle: max relative geodesic error", worst, 0.05);

    // LLE on a Swiss roll.
    let roll = swiss_roll(300, 0.0, seed);
    let lw = lle_weights(&roll.data, 10)?;
    let rows = (0..roll.data.nrows()).map(|i| (lw.weights.row(i).sum() - 1.0).abs()).fold(0.0, f64::max);
    c.at_most("LLE: max |Σ_j W_ij − 1|", rows, 1e-8);
    let outside = (0..roll.data.nrows())
        .flat_map(|i| (0..roll.data.nrows()).map(move |j| (i, j)))
        .filter(|&(i, j)| !lw.neighbors[i].contains(&j))
        .map(|(i, j)| lw.weights[(i, j)].abs())
        .fold(0.0, f64::max);
    c.at_most("LLE: max |W_ij| outside the neighbourhood", outside, 0.0);
    let i_w = Mat::identity(300, 300) - &lw.weights;
    let m = i_w.transpose() * &i_w;
    c.at_most("LLE: max |M1|", (m * Mat::from_element(300, 1, 1.0)).amax(), 1e-10);
    let y = lle_embed(&lw.weights, 2)?;
    let cov = y.transpose() * &y / 300.0 - Mat::identity(2, 2);
    c.at_most("LLE: max |YᵀY/N − I|", cov.amax(), 1e-8);
    c.at_most("LLE: max |Σ_i y_i|", y.row_sum().amax(), 1e-8);

    // Laplacian eigenmaps on the same roll and on a path graph.
    let g = NeighborGraph::build(&roll.data, GraphRule::Knn(10), WeightRule::Gaussian(4.0))?;
    let le = laplacian_eigenmaps_graph(&g, 2)?;
    let deg = diag(&g.laplacian().degrees);
    let v = &le.embeddings;
    c.at_most("eigenmaps: max |VᵀDV − I|", (v.transpose() * &deg * v - Mat::identity(2, 2)).amax(), 1e-8);
    c.at_most("eigenmaps: max |VᵀD1|", (v.transpose() * &deg * Mat::from_element(300, 1, 1.0)).amax(), 1e-8);
    let path: Vec<(usize, usize, f64)> = (0..29).map(|i| (i, i + 1, 1.0)).collect();
    let fiedler = laplacian_eigenmaps_graph(&NeighborGraph::from_edge_list(30, &path)?, 1)?.embeddings;
    let steps: Vec<f64> = (0..29).map(|i| fiedler[(i + 1, 0)] - fiedler[(i, 0)]).collect();
    let sign = steps[0].signum();
    let violations = steps.iter().filter(|s| s.signum() != sign || **s == 0.0).count();
    c.at_most("path graph: non-monotone Fiedler steps", violations as f64, 0.0);

    // PCA against random projections, MDS at full rank.
    let mut rng = SeededRng::new(seed.wrapping_add(7));
    let scales = [5.0, 3.0, 1.0, 0.5, 0.2];
    let rot = Mat::from_fn(5, 5, |_, _| rng.standard_normal()).qr().q();
    let data = Mat::from_fn(50, 5, |_, j| scales[j] * rng.standard_normal()) * rot.transpose();
    let pca = pca_fit(&data, 2)?;
    let pca_err = projection_error(&data, &pca.mean, &pca.basis);
    let best_random = (0..100)
        .map(|_| projection_error(&data, &pca.mean, &Mat::from_fn(5, 2, |_, _| rng.standard_normal()).qr().q()))
        .fold(f64::INFINITY, f64::min);
    c.at_most("PCA error minus best of 100 random rank-2 projections", pca_err - best_random, 0.0);
    let dist = pairwise_distances(&data);
    let mds = mds_embed(&dist, 5)?;
    let y = &mds.embeddings;
    let centered = double_center(&dist.map(|d| d * d))?;
    c.at_most("MDS: max |YYᵀ − centered Gram|", (y * y.transpose() - centered.as_mat()).amax(), 1e-8);
    c.at_most("MDS: max pairwise distance error", (pairwise_distances(y).as_mat() - dist.as_mat()).amax(), 1e-7);
    Ok(())
}

/// `K = D^{-1/2} Q Λ Qᵀ D^{-1/2}`: a table whose `p`-weighted eigenpairs are
/// `λ` and the columns of `D^{-1/2} Q`.
pub fn kernel_with_spectrum(spectrum: &[f64], p: &[f64], rng: &mut SeededRng) -> SymMatrix {
    let n = p.len();
    let q = Mat::from_fn(n, n, |_, _| rng.standard_normal()).qr().q();
    let lam = diag(spectrum);
    let m = &q * lam * q.transpose();
    SymMatrix::symmetrize(&Mat::from_fn(n, n, |i, j| m[(i, j)] / (p[i] * p[j]).sqrt()))
}

fn random_distribution(n: usize, rng: &mut SeededRng) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.uniform(0.5, 1.5)).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|v| v / total).collect()
}

fn eigenfun(c: &mut Checks, seed: u64) -> Result<()> {
    let mut rng = SeededRng::new(seed);
    let mut cases: Vec<(String, SymMatrix, Vec<f64>, usize)> =
        vec![("diag(3,2,1)".into(), SymMatrix::from_diagonal(&[3.0, 2.0, 1.0]), vec![1.0 / 3.0; 3], 2)];
    for (n, ratio, d) in [(12, 0.8, 4), (16, 0.94, 4), (8, 0.7, 3)] {
        let spectrum: Vec<f64> = (0..n).map(|i| f64::powi(ratio, i as i32)).collect();
        let p = random_distribution(n, &mut rng);
        let k = kernel_with_spectrum(&spectrum, &p, &mut rng);
        cases.push((format!("n={n} ratio={ratio}"), k, p, d));
    }
    for (label, k, p, d) in cases {
        let oracle = mercer_decompose(&k, &p)?;
        let min_gap = relative_gaps(&oracle.eigenvalues, d).into_iter().fold(f64::INFINITY, f64::min);
        c.at_least(format!("{label}: smallest relative gap"), min_gap, 0.05);
        let mut cfg = NeuralEfConfig::full_batch(d);
        cfg.optimizer.seed = seed;
        let set = train_eigenfunctions(&k, &p, &cfg)?;
        let cmp = compare_with_oracle(&set, &oracle);
        let value_err = cmp.iter().map(|e| (e.estimate - e.eigenvalue).abs()).fold(0.0, f64::max);
        let cosine = cmp.iter().map(|e| e.cosine).fold(1.0, f64::min);
        let order = set.eigenvalues.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        let norm = (0..d).map(|j| (set.overlap(j, j) - 1.0).abs()).fold(0.0, f64::max);
        let ortho = (0..d)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| set.overlap(i, j).abs())
            .fold(0.0, f64::max);
        c.at_most(format!("{label}: max |R̃_jj − λ_j|"), value_err, 1e-2);
        c.at_least(format!("{label}: min sign-adjusted cosine"), cosine, 0.99);
        c.at_most(format!("{label}: max R̃_(j+1) − R̃_j"), order, 1e-3);
        c.at_most(format!("{label}: max |C_j − 1|"), norm, 1e-6);
        c.at_most(format!("{label}: max |⟨ψ̂_i, ψ̂_j⟩_p|"), ortho, 1e-2);
    }
    Ok(())
}

fn diag(v: &[f64]) -> Mat {
    Mat::from_fn(v.len(), v.len(), |i, j| if i == j { v[i] } else { 0.0 })
}

fn row_major(m: &Mat) -> Vec<f64> {
    m.transpose().iter().copied().collect()
}

fn gradients(c: &mut Checks, seed: u64) -> Result<()> {
    let tol = 1e-5;
    let eps = 1e-5;
    let mut worst = std::collections::BTreeMap::<&str, f64>::new();
    let mut record = |name: &'static str, err: f64| {
        let e = worst.entry(name).or_insert(0.0);
        *e = e.max(err);
    };
    for s in seed..seed + 3 {
        let mut rng = SeededRng::new(s);
        let mut normal = |n: usize| -> Vec<f64> { (0..n).map(|_| 0.5 * rng.standard_normal()).collect() };

        let stats = CorpusStats::from_tokens(&toy_corpus(4, 30, s), 2)?;
        let total = stats.total();
        let pos = &stats.pair_counts / total;
        let neg = expected_negative_counts(&stats, 2.0, 0.75)? / total;
        for act in [Activation::Sigmoid, Activation::KSigmoid(2.0)] {
            let obj = |q: &[f64]| {
                let phi = Mat::from_row_slice(4, 3, &q[..12]);
                let psi = Mat::from_row_slice(4, 3, &q[12..]);
                let (f, gp, gq) = sgns_loss_and_gradient(&phi, &psi, &pos, &neg, act).expect("shapes fixed");
                let mut g = row_major(&gp);
                g.extend(row_major(&gq));
                (f, g)
            };
            record("SGNS", grad_check(&obj, &normal(24), eps)?);
        }

        let process = PairProcess::random(4, s)?;
        for mode in [ScoreMode::Untied, ScoreMode::Tied] {
            let cfg = InfoNceConfig { dim: 3, tau: 0.5, batch: 2, mode, optimizer: OptimizerConfig::default() };
            let len = if mode == ScoreMode::Untied { 24 } else { 12 };
            let obj = |q: &[f64]| infonce_objective(q, &process, &cfg).expect("shapes fixed");
            record("InfoNCE", grad_check(&obj, &normal(len), eps)?);
        }

        let obj = |q: &[f64]| {
            let phi = Mat::from_row_slice(4, 2, q);
            let (f, g) = spectral_loss_and_gradient(&phi, &process).expect("shape fixed");
            (f, row_major(&g))
        };
        record("spectral", grad_check(&obj, &normal(8), eps)?);

        let counts = NceCounts::new(vec![3.0, 1.0, 2.0], vec![2.0, 6.0, 4.0])?;
        for act in [Activation::Sigmoid, Activation::KSigmoid(counts.k())] {
            let obj = |q: &[f64]| counts.loss_and_gradient(q, act);
            record("NCE", grad_check(&obj, &normal(3), eps)?);
        }

        let k = kernel_with_spectrum(&[1.0, 0.6, 0.3, 0.1, 0.05], &[0.2; 5], &mut SeededRng::new(s));
        let frozen = Mat::from_row_slice(5, 3, &normal(15));
        let obj = |q: &[f64]| {
            let v = Mat::from_row_slice(5, 3, q);
            let (f, g) = neuralef_batch_loss(&v, k.as_mat(), &[0.2; 5], Some(&frozen)).expect("shapes fixed");
            (f, row_major(&g))
        };
        record("NeuralEF with stop-gradient", grad_check(&obj, &row_major(&frozen), eps)?);

        let net = MlpEncoder::random(&[2, 6, 3], 0.8, s)?;
        let xs = Mat::from_row_slice(5, 2, &normal(10));
        let weights = Mat::from_row_slice(5, 3, &normal(15));
        let obj = |q: &[f64]| {
            let m = net.with_params(q).expect("same shape");
            let mut f = 0.0;
            let mut g = vec![0.0; q.len()];
            for i in 0..5 {
                let x: Vec<f64> = xs.row(i).iter().copied().collect();
                let w: Vec<f64> = weights.row(i).iter().copied().collect();
                f += m.forward(&x).expect("dims").iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
                for (gi, v) in g.iter_mut().zip(m.backward(&x, &w).expect("dims")) {
                    *gi += v;
                }
            }
            (f, g)
        };
        record("MLP", grad_check(&obj, &net.params(), eps)?);
        let gram = Kernel::gaussian(1.0)?.gram_rows(&xs)?.into_mat();
        let held = net.params();
        let obj = |q: &[f64]| mlp_neuralef_objective(&net, q, &held, &xs, &gram).expect("dims");
        record("MLP NeuralEF with stop-gradient", grad_check(&obj, &held, eps)?);
    }
    for (name, err) in worst {
        c.at_most(format!("{name}: max relative gradient error over 3 seeds"), err, tol);
    }
    Ok(())
}

fn psd(c: &mut Checks, seed: u64) -> Result<()> {
    let tol = 1e-8;
    let mut rng = SeededRng::new(seed);
    let data = Mat::from_fn(20, 3, |_, _| rng.uniform(-1.0, 1.0));
    let mut kernels = vec![("linear".to_string(), Kernel::Linear)];
    for d in 1..=3 {
        kernels.push((format!("polynomial degree {d}"), Kernel::polynomial(d)?));
    }
    for s2 in [0.25, 1.0, 4.0] {
        kernels.push((format!("gaussian σ²={s2}"), Kernel::gaussian(s2)?));
    }
    for (name, k) in kernels {
        let g = k.gram_rows(&data)?;
        c.at_least(format!("{name}: min Gram eigenvalue"), g.min_eigenvalue()?, -tol);
    }
    let mut kplus = f64::INFINITY;
    let mut abar = f64::INFINITY;
    let mut ok = 0;
    for i in 0..50u64 {
        let p = PairProcess::random(2 + (i as usize % 7), seed.wrapping_add(i))?;
        kplus = kplus.min(p.kplus().min_eigenvalue()?);
        abar = abar.min(p.abar().min_eigenvalue()?);
        ok += usize::from(is_psd(p.kplus(), tol)? && is_psd(p.abar(), tol)?);
    }
    c.at_least("50 processes: min eigenvalue of K₊", kplus, -tol);
    c.at_least("50 processes: min eigenvalue of Ā", abar, -tol);
    c.at_least("50 processes: count passing is_psd", ok as f64, 50.0);
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let f = Mat::from_fn(6, 3, |_, _| rng.uniform(-1.0, 1.0));
        let t = SymMatrix::symmetrize(&(&f * f.transpose()));
        worst = worst.min(t.map(f64::exp).min_eigenvalue()?);
    }
    c.at_least("entrywise exp of PSD tables: min eigenvalue", worst, -tol);
    Ok(())
}
