use crate::encoders::{log_softmax, minimize, softmax, Minimized, OptimizerConfig};
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::Mat;

use super::process::PairProcess;
use super::spectral::row_major;

/// Candidate tuples are enumerated exactly up to this many.
pub const ENUMERATION_BUDGET: u64 = 1_000_000;

/// `−log softmax` of the positive's score among `{positive} ∪ negatives`.
pub fn infonce_from_scores(positive: f64, negatives: &[f64]) -> f64 {
    let mut all = Vec::with_capacity(negatives.len() + 1);
    all.push(positive);
    all.extend_from_slice(negatives);
    -log_softmax(&all)[0]
}

/// InfoNCE loss for one anchor under a score table `s(x, z)`.
pub fn infonce_loss(scores: &Mat, anchor: usize, positive: usize, negatives: &[usize]) -> Result<f64> {
    if anchor >= scores.nrows() {
        return Err(Error::IndexOutOfRange { index: anchor, len: scores.nrows() });
    }
    for &z in std::iter::once(&positive).chain(negatives) {
        if z >= scores.ncols() {
            return Err(Error::IndexOutOfRange { index: z, len: scores.ncols() });
        }
    }
    if negatives.contains(&positive) {
        return Err(Error::InvalidParameter(format!("positive {positive} also listed as a negative")));
    }
    let neg: Vec<f64> = negatives.iter().map(|&z| scores[(anchor, z)]).collect();
    Ok(infonce_from_scores(scores[(anchor, positive)], &neg))
}

/// An expected loss, exact or Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Standard error of a Monte Carlo estimate; `None` when exact.
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub samples: usize,
    pub seed: u64,
}

/// Number of tuples `(x̃₁, …, x̃_{2B})` in the anchor-term expectation.
pub fn tuple_count(n: usize, batch: usize) -> Option<u64> {
    (n as u64).checked_pow(2 * batch as u32)
}

fn check_batch(batch: usize) -> Result<()> {
    if batch < 2 {
        return Err(Error::InvalidParameter(format!("batch {batch} leaves no negatives")));
    }
    Ok(())
}

fn enumerable(n: usize, batch: usize) -> bool {
    tuple_count(n, batch).is_some_and(|c| c <= ENUMERATION_BUDGET)
}

/// Visits every `(anchor, candidates)` tuple with its probability. The first
/// candidate is the positive view; the other `2B − 2` are independent views.
fn for_each_tuple(process: &PairProcess, batch: usize, mut visit: impl FnMut(usize, &[usize], f64)) {
    let n = process.len();
    let q = process.marginal();
    let joint = process.joint();
    let m = 2 * batch - 1;
    let mut cand = vec![0usize; m];
    for x in 0..n {
        for pos in 0..n {
            let w0 = joint.get(x, pos);
            if w0 == 0.0 {
                continue;
            }
            cand[0] = pos;
            for c in cand[1..].iter_mut() {
                *c = 0;
            }
            loop {
                let w: f64 = cand[1..].iter().map(|&c| q[c]).product::<f64>() * w0;
                if w > 0.0 {
                    visit(x, &cand, w);
                }
                // Odometer over the negatives.
                let mut k = 1;
                while k < m {
                    cand[k] += 1;
                    if cand[k] < n {
                        break;
                    }
                    cand[k] = 0;
                    k += 1;
                }
                if k == m {
                    break;
                }
            }
        }
    }
}

/// Expected SimCLR anchor loss: `x̃₁, x̃₂ ~ p₊`, `x̃₃ … x̃_{2B} ~ q` i.i.d.,
/// and the positive `x̃₂` is identified among the `2B − 1` candidates
/// `x̃₂ … x̃_{2B}` by `softmax_i s(x̃₁, x̃ᵢ)`.
///
/// Exact when the tuple count is within [`ENUMERATION_BUDGET`]; otherwise a
/// Monte Carlo estimate if `mc` is given, else an error.
pub fn expected_simclr_loss(
    scores: &Mat,
    process: &PairProcess,
    batch: usize,
    mc: Option<MonteCarlo>,
) -> Result<Estimate> {
    check_batch(batch)?;
    let n = process.len();
    if scores.shape() != (n, n) {
        return Err(Error::DimensionMismatch { expected: n, found: scores.nrows() });
    }
    if enumerable(n, batch) {
        return Ok(Estimate { value: expected_loss_and_score_gradient(scores, process, batch, false).0, std_error: None });
    }
    let Some(mc) = mc else {
        return Err(Error::BudgetExceeded(format!(
            "{n}^{} tuples exceed {ENUMERATION_BUDGET}; request a Monte Carlo estimate",
            2 * batch
        )));
    };
    if mc.samples < 2 {
        return Err(Error::InvalidParameter("Monte Carlo needs at least 2 samples".into()));
    }
    let mut rng = SeededRng::new(mc.seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut neg = vec![0.0; 2 * batch - 2];
    for _ in 0..mc.samples {
        let (x, pos) = process.sample_positive(&mut rng);
        for v in neg.iter_mut() {
            *v = scores[(x, process.sample_negative(&mut rng))];
        }
        let l = infonce_from_scores(scores[(x, pos)], &neg);
        sum += l;
        sum_sq += l * l;
    }
    let m = mc.samples as f64;
    let mean = sum / m;
    let var = (sum_sq / m - mean * mean).max(0.0) * m / (m - 1.0);
    Ok(Estimate { value: mean, std_error: Some((var / m).sqrt()) })
}

fn expected_loss_and_score_gradient(scores: &Mat, process: &PairProcess, batch: usize, grad: bool) -> (f64, Mat) {
    let n = process.len();
    let mut loss = 0.0;
    let mut g = Mat::zeros(if grad { n } else { 0 }, if grad { n } else { 0 });
    let mut row = vec![0.0; 2 * batch - 1];
    for_each_tuple(process, batch, |x, cand, w| {
        for (r, &c) in row.iter_mut().zip(cand) {
            *r = scores[(x, c)];
        }
        let ls = log_softmax(&row);
        loss -= w * ls[0];
        if grad {
            g[(x, cand[0])] -= w;
            for (&c, l) in cand.iter().zip(&ls) {
                g[(x, c)] += w * l.exp();
            }
        }
    });
    (loss, g)
}

/// Exact expected loss and its gradient with respect to every score entry.
pub fn expected_simclr_loss_and_gradient(scores: &Mat, process: &PairProcess, batch: usize) -> Result<(f64, Mat)> {
    check_batch(batch)?;
    let n = process.len();
    if scores.shape() != (n, n) {
        return Err(Error::DimensionMismatch { expected: n, found: scores.nrows() });
    }
    if !enumerable(n, batch) {
        return Err(Error::BudgetExceeded(format!("{n}^{} tuples exceed {ENUMERATION_BUDGET}", 2 * batch)));
    }
    Ok(expected_loss_and_score_gradient(scores, process, batch, true))
}

/// Largest total-variation distance, over candidate tuples of positive
/// probability, between the model's `softmax_i s(x̃₁, x̃ᵢ)` and the true
/// posterior `∝ K₊(x̃₁, x̃ᵢ)` that candidate `i` is the positive.
pub fn max_conditional_tv(scores: &Mat, process: &PairProcess, batch: usize) -> Result<f64> {
    check_batch(batch)?;
    let n = process.len();
    if !enumerable(n, batch) {
        return Err(Error::BudgetExceeded(format!("{n}^{} tuples exceed {ENUMERATION_BUDGET}", 2 * batch)));
    }
    let kplus = process.kplus();
    let mut worst = 0.0f64;
    let mut s = vec![0.0; 2 * batch - 1];
    let mut k = vec![0.0; 2 * batch - 1];
    for_each_tuple(process, batch, |x, cand, _| {
        for (i, &c) in cand.iter().enumerate() {
            s[i] = scores[(x, c)];
            k[i] = kplus.get(x, c);
        }
        let model = softmax(&s);
        let total: f64 = k.iter().sum();
        let tv: f64 = model.iter().zip(&k).map(|(m, kk)| (m - kk / total).abs()).sum::<f64>() / 2.0;
        worst = worst.max(tv);
    });
    Ok(worst)
}

/// Largest entrywise gap between the row-normalized `exp(s)` and the
/// row-normalized `K₊`. Rows of items with zero view probability are skipped.
pub fn normalized_score_error(scores: &Mat, process: &PairProcess) -> Result<f64> {
    let n = process.len();
    if scores.shape() != (n, n) {
        return Err(Error::DimensionMismatch { expected: n, found: scores.nrows() });
    }
    let mut worst = 0.0f64;
    for x in 0..n {
        let row: Vec<f64> = scores.row(x).iter().copied().collect();
        let model = softmax(&row);
        let k: Vec<f64> = (0..n).map(|z| process.kplus().get(x, z)).collect();
        let total: f64 = k.iter().sum();
        for z in 0..n {
            worst = worst.max((model[z] - k[z] / total).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreMode {
    /// `s(x, z) = f(x)ᵀ g(z) / τ` with separate tables.
    Untied,
    /// `s(x, z) = cos(f(x), f(z)) / τ` with one table.
    Tied,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfoNceConfig {
    pub dim: usize,
    pub tau: f64,
    pub batch: usize,
    pub mode: ScoreMode,
    pub optimizer: OptimizerConfig,
}

impl Default for InfoNceConfig {
    fn default() -> Self {
        Self { dim: 4, tau: 0.5, batch: 2, mode: ScoreMode::Untied, optimizer: OptimizerConfig::default() }
    }
}

/// Score table of a parameter vector laid out as `f` then (untied) `g`, both row-major.
pub fn score_table(params: &[f64], n: usize, cfg: &InfoNceConfig) -> Mat {
    let d = cfg.dim;
    let f = Mat::from_row_slice(n, d, &params[..n * d]);
    match cfg.mode {
        ScoreMode::Untied => {
            let g = Mat::from_row_slice(n, d, &params[n * d..2 * n * d]);
            &f * g.transpose() / cfg.tau
        }
        ScoreMode::Tied => {
            let u = normalize_rows(&f);
            &u * u.transpose() / cfg.tau
        }
    }
}

fn normalize_rows(f: &Mat) -> Mat {
    let mut u = f.clone();
    for mut row in u.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    u
}

/// Expected loss and gradient with respect to the flattened encoder parameters.
pub fn infonce_objective(params: &[f64], process: &PairProcess, cfg: &InfoNceConfig) -> Result<(f64, Vec<f64>)> {
    let n = process.len();
    let d = cfg.dim;
    let want = match cfg.mode {
        ScoreMode::Untied => 2 * n * d,
        ScoreMode::Tied => n * d,
    };
    if params.len() != want {
        return Err(Error::DimensionMismatch { expected: want, found: params.len() });
    }
    let scores = score_table(params, n, cfg);
    let (loss, gs) = expected_simclr_loss_and_gradient(&scores, process, cfg.batch)?;
    let f = Mat::from_row_slice(n, d, &params[..n * d]);
    let grad = match cfg.mode {
        ScoreMode::Untied => {
            let g = Mat::from_row_slice(n, d, &params[n * d..]);
            let mut out = row_major(&(&gs * &g / cfg.tau));
            out.extend(row_major(&(gs.transpose() * &f / cfg.tau)));
            out
        }
        ScoreMode::Tied => {
            let u = normalize_rows(&f);
            let gu = (&gs + gs.transpose()) * &u / cfg.tau;
            let mut gf = Mat::zeros(n, d);
            for x in 0..n {
                let norm = f.row(x).norm();
                if norm == 0.0 {
                    continue;
                }
                let ux = u.row(x);
                let gx = gu.row(x);
                let radial = ux.dot(&gx);
                gf.set_row(x, &((gx - ux * radial) / norm));
            }
            row_major(&gf)
        }
    };
    Ok((loss, grad))
}

#[derive(Debug, Clone)]
pub struct InfoNceFit {
    pub f: Mat,
    /// Second table in untied mode.
    pub g: Option<Mat>,
    pub scores: Mat,
    pub optimization: Minimized,
}

/// Minimizes the exact expected SimCLR loss from a seeded uniform `(−0.1, 0.1)` start.
pub fn train_infonce(process: &PairProcess, cfg: &InfoNceConfig) -> Result<InfoNceFit> {
    let n = process.len();
    let d = cfg.dim;
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    if !(cfg.tau > 0.0) {
        return Err(Error::InvalidParameter(format!("temperature {} must be positive", cfg.tau)));
    }
    check_batch(cfg.batch)?;
    if !enumerable(n, cfg.batch) {
        return Err(Error::BudgetExceeded(format!(
            "training needs the exact expectation; {n}^{} tuples exceed {ENUMERATION_BUDGET}",
            2 * cfg.batch
        )));
    }
    let count = match cfg.mode {
        ScoreMode::Untied => 2 * n * d,
        ScoreMode::Tied => n * d,
    };
    let mut rng = SeededRng::new(cfg.optimizer.seed);
    let init: Vec<f64> = (0..count).map(|_| rng.uniform(-0.1, 0.1)).collect();
    let obj = |p: &[f64]| infonce_objective(p, process, cfg).expect("validated above");
    let optimization = minimize(&obj, &init, &cfg.optimizer)?;
    let params = &optimization.params;
    let f = Mat::from_row_slice(n, d, &params[..n * d]);
    let g = (cfg.mode == ScoreMode::Untied).then(|| Mat::from_row_slice(n, d, &params[n * d..]));
    let scores = score_table(params, n, cfg);
    Ok(InfoNceFit { f, g, scores, optimization })
}

/// Whether a tied cosine score at temperature `tau` and dimension `d` can
/// reach the optimum `log K₊(x, z) + c(x)`: the shifted table
/// `τ (log K₊(x, z) − log K₊(x, x)) + 1` must be symmetric, bounded by one
/// in magnitude, PSD, and of rank at most `d`.
pub fn tied_representable(process: &PairProcess, tau: f64, d: usize) -> bool {
    let n = process.len();
    let k = process.kplus();
    if (0..n).any(|x| (0..n).any(|z| !(k.get(x, z) > 0.0))) {
        return false;
    }
    let c = Mat::from_fn(n, n, |x, z| tau * (k.get(x, z).ln() - k.get(x, x).ln()) + 1.0);
    let Ok(sym) = crate::linalg::SymMatrix::try_from_dense(c, 1e-9) else {
        return false;
    };
    if sym.as_mat().iter().any(|v| v.abs() > 1.0 + 1e-9) {
        return false;
    }
    let Ok(eig) = sym.eigen() else { return false };
    let scale = eig.values[0].abs().max(1.0);
    let min = *eig.values.last().unwrap();
    let rank = eig.values.iter().filter(|&&l| l > 1e-9 * scale).count();
    min >= -1e-9 * scale && rank <= d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoders::grad_check;
    use crate::kernels::FiniteSpace;
    use approx::assert_abs_diff_eq;

    fn soft_process() -> PairProcess {
        let aug = Mat::from_row_slice(
            4,
            4,
            &[0.6, 0.2, 0.1, 0.1, 0.2, 0.5, 0.2, 0.1, 0.1, 0.1, 0.7, 0.1, 0.1, 0.2, 0.2, 0.5],
        );
        PairProcess::new(FiniteSpace::indexed(vec![0.3, 0.2, 0.25, 0.25]).unwrap(), aug).unwrap()
    }

    #[test]
    fn single_anchor_examples() {
        let s = Mat::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let want = -(1f64.exp() / (1f64.exp() + 2.0)).ln();
        assert_abs_diff_eq!(infonce_loss(&s, 0, 0, &[1, 2]).unwrap(), want, epsilon = 1e-14);
        let flat = Mat::from_element(1, 5, 0.3);
        assert_abs_diff_eq!(infonce_loss(&flat, 0, 1, &[0, 2, 3, 4]).unwrap(), 5f64.ln(), epsilon = 1e-14);
        assert!(infonce_from_scores(800.0, &[0.0, 0.0]) < 1e-300);
        assert!(infonce_loss(&flat, 0, 1, &[1]).is_err());
    }

    #[test]
    fn constant_scores_give_log_candidates() {
        let p = soft_process();
        for batch in [2, 3] {
            let e = expected_simclr_loss(&Mat::from_element(4, 4, 1.7), &p, batch, None).unwrap();
            assert_abs_diff_eq!(e.value, ((2 * batch - 1) as f64).ln(), epsilon = 1e-12);
            assert!(e.std_error.is_none());
        }
        assert!(expected_simclr_loss(&Mat::zeros(4, 4), &p, 1, None).is_err());
    }

    #[test]
    fn enumeration_matches_monte_carlo() {
        let p = soft_process();
        let s = Mat::from_fn(4, 4, |i, j| ((i * 3 + j) as f64 * 0.7).sin());
        let exact = expected_simclr_loss(&s, &p, 2, None).unwrap().value;
        let big = PairProcess::random(40, 1).unwrap();
        assert!(matches!(
            expected_simclr_loss(&Mat::zeros(40, 40), &big, 2, None),
            Err(Error::BudgetExceeded(_))
        ));
        let mut rng = SeededRng::new(0);
        let mut sum = 0.0;
        let m = 200_000;
        for _ in 0..m {
            let (x, pos) = p.sample_positive(&mut rng);
            let negs = [s[(x, p.sample_negative(&mut rng))], s[(x, p.sample_negative(&mut rng))]];
            sum += infonce_from_scores(s[(x, pos)], &negs);
        }
        assert!((sum / m as f64 - exact).abs() < 0.01);
        let mc = expected_simclr_loss(&Mat::zeros(40, 40), &big, 2, Some(MonteCarlo { samples: 1000, seed: 1 })).unwrap();
        assert_abs_diff_eq!(mc.value, 3f64.ln(), epsilon = 1e-12);
        assert_eq!(mc.std_error, Some(0.0));
    }

    #[test]
    fn block_aligned_scores_beat_anti_aligned() {
        let p = PairProcess::blocks(&[2, 2], 0.1).unwrap();
        let aligned = Mat::from_fn(4, 4, |a, b| if a / 2 == b / 2 { 1.0 } else { -1.0 });
        let anti = -&aligned;
        let la = expected_simclr_loss(&aligned, &p, 2, None).unwrap().value;
        let lb = expected_simclr_loss(&anti, &p, 2, None).unwrap().value;
        assert!(la < lb);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let p = soft_process();
        for mode in [ScoreMode::Untied, ScoreMode::Tied] {
            let cfg = InfoNceConfig { dim: 3, mode, ..Default::default() };
            let count = if mode == ScoreMode::Untied { 24 } else { 12 };
            let x: Vec<f64> = (0..count).map(|i| (i as f64 * 1.3).cos()).collect();
            let obj = |q: &[f64]| infonce_objective(q, &p, &cfg).unwrap();
            assert!(grad_check(&obj, &x, 1e-5).unwrap() <= 1e-6, "{mode:?}");
        }
    }

    #[test]
    fn score_shift_leaves_softmax_unchanged() {
        let p = soft_process();
        let s = Mat::from_fn(4, 4, |i, j| (i as f64 - j as f64) * 0.4);
        let shifted = s.map(|v| v + 3.0);
        assert_abs_diff_eq!(
            max_conditional_tv(&s, &p, 2).unwrap(),
            max_conditional_tv(&shifted, &p, 2).unwrap(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn log_kplus_scores_are_optimal() {
        let p = soft_process();
        let s = p.kplus().as_mat().map(f64::ln);
        assert!(max_conditional_tv(&s, &p, 2).unwrap() < 1e-12);
        assert!(normalized_score_error(&s, &p).unwrap() < 1e-12);
        let (_, g) = expected_simclr_loss_and_gradient(&s, &p, 2).unwrap();
        assert!(g.amax() < 1e-12);
    }

    #[test]
    fn identity_process_untied_training() {
        let p = PairProcess::new(FiniteSpace::uniform(3), Mat::identity(3, 3)).unwrap();
        let cfg = InfoNceConfig {
            dim: 3,
            optimizer: OptimizerConfig { max_iterations: 3000, ..Default::default() },
            ..Default::default()
        };
        let fit = train_infonce(&p, &cfg).unwrap();
        assert!(normalized_score_error(&fit.scores, &p).unwrap() <= 1e-2);
    }

    #[test]
    fn independence_is_tied_representable() {
        let p = PairProcess::new(FiniteSpace::uniform(3), Mat::from_element(3, 3, 1.0 / 3.0)).unwrap();
        assert!(tied_representable(&p, 0.5, 1));
        assert!(!tied_representable(&soft_process(), 0.5, 4));
    }
}
