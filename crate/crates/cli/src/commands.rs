//! Subcommand definitions and handlers.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kc_core::contrastive::{
    max_conditional_tv, normalized_score_error, sgns_target, sparsest_partition, spectral_target, train_infonce,
    train_sgns, train_spectral, CorpusStats, InfoNceConfig, ScoreMode, SgnsConfig,
};
use kc_core::eigenfunctions::{compare_with_oracle, subspace_alignment, train_eigenfunctions, NeuralEfConfig};
use kc_core::encoders::{Activation, OptimizerConfig};
use kc_core::kernel_approx::{nystrom_fit, rff_sample, sample_landmarks};
use kc_core::kernels::mercer_decompose;
use kc_core::linear_dr::{mds_embed, pca_fit, projection_error};
use kc_core::manifold::{isomap, laplacian_eigenmaps, lle_embed, lle_weights, swiss_roll, GraphRule};
use kc_core::{Kernel, Mat, Point};
use serde_json::json;

use crate::config::{pick, Config};
use crate::io;
use crate::manifest::RunManifest;
use crate::plots;
use crate::suites::{run_suite, SUITES};

#[derive(Debug, Parser)]
#[command(name = "kc", version, about = "Kernels, spectral embeddings and contrastive-learning optima")]
pub struct Cli {
    /// TOML configuration; `[section]` tables apply to the subcommand of that name.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Random seed (overrides KC_SEED and the config file).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Where to write the run manifest.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset.
    Gen(GenArgs),
    /// Reduce the dimension of a data matrix.
    Reduce(ReduceArgs),
    /// Approximate a Gaussian kernel with Nyström or random Fourier features.
    KernelApprox(KernelApproxArgs),
    /// Train a contrastive objective to its optimum.
    Contrast(ContrastArgs),
    /// Learn the top eigenfunctions of a kernel table.
    Eigenfun(EigenfunArgs),
    /// Graph analyses of a pair process.
    Analyze(AnalyzeArgs),
    /// Run a verification suite against its closed-form oracles.
    Verify(VerifyArgs),
    /// Summarize manifests and draw figures.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Dataset {
    SwissRoll,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub dataset: Dataset,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the latent coordinates (arc length, height).
    #[arg(long)]
    pub latent: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum ReduceMethod {
    Pca,
    Mds,
    Isomap,
    Lle,
    Le,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[arg(long, value_enum)]
    pub method: ReduceMethod,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Neighbours for k-NN graphs and LLE.
    #[arg(long)]
    pub k: Option<usize>,
    /// Use an ε-ball graph instead of k-NN.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Heat-kernel width for Laplacian eigenmaps.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ApproxMethod {
    Nystrom,
    Rff,
}

#[derive(Debug, Args)]
pub struct KernelApproxArgs {
    #[arg(long, value_enum)]
    pub method: ApproxMethod,
    #[arg(long)]
    pub input: PathBuf,
    /// Gaussian kernel width σ².
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Nyström landmark count.
    #[arg(long)]
    pub landmarks: Option<usize>,
    /// Nyström rank.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Number of random frequencies.
    #[arg(long)]
    pub features: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ContrastMethod {
    Sgns,
    Infonce,
    Spectral,
}

#[derive(Debug, Args)]
pub struct ContrastArgs {
    #[arg(long, value_enum)]
    pub method: ContrastMethod,
    /// Token corpus (SGNS).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Pair-process JSON (InfoNCE, spectral).
    #[arg(long)]
    pub process: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Negatives per positive (SGNS).
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub window: Option<usize>,
    /// Use the prior-corrected sigmoid 1/(1 + k e^{−z}).
    #[arg(long)]
    pub k_sigmoid: bool,
    /// Exponent on unigram counts for the negative distribution.
    #[arg(long)]
    pub neg_exponent: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    /// Cosine score on a single shared table.
    #[arg(long)]
    pub tied: bool,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Primary embedding table.
    #[arg(long)]
    pub out: PathBuf,
    /// Context table (SGNS) or second encoder (untied InfoNCE).
    #[arg(long)]
    pub context_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EigenfunArgs {
    #[arg(long)]
    pub kernel: PathBuf,
    #[arg(long)]
    pub p: PathBuf,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// JSON comparison against the exact decomposition.
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Analysis {
    Conductance,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub analysis: Analysis,
    #[arg(long)]
    pub process: PathBuf,
    /// Number of parts in the partition.
    #[arg(long)]
    pub parts: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// One of: sgns-pmi, infonce-kplus, spectral-ey, nystrom, rff, manifold,
    /// eigenfun, classification, gradients, psd.
    pub suite: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub manifests: Vec<PathBuf>,
    /// Swiss-roll points drawn in the ISOMAP figure.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Command outcome, mapped onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable or invalid input: exit 2.
    Usage(anyhow::Error),
    /// A computation failed or a verification check did not hold: exit 1.
    Run(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Run(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(e) | Failure::Run(e) => write!(f, "{e:#}"),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

trait Classify<T> {
    fn usage(self) -> Outcome<T>;
    fn failed(self) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for std::result::Result<T, E> {
    fn usage(self) -> Outcome<T> {
        self.map_err(|e| Failure::Usage(e.into()))
    }

    fn failed(self) -> Outcome<T> {
        self.map_err(|e| Failure::Run(e.into()))
    }
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}

struct Ctx {
    cfg: Config,
    section: &'static str,
    manifest: RunManifest,
    manifest_path: Option<PathBuf>,
}

impl Ctx {
    fn pick<T: serde::de::DeserializeOwned + ToString>(&mut self, key: &str, flag: Option<T>, default: T) -> Outcome<T> {
        let v = pick(&self.cfg, self.section, key, flag, default).usage()?;
        self.manifest.flag(key, v.to_string());
        Ok(v)
    }

    fn input(&mut self, path: &Path) -> Outcome<()> {
        self.manifest.input(path).usage()
    }

    fn seed(&self) -> u64 {
        self.manifest.seed
    }

    fn finish(mut self) -> Outcome<()> {
        self.manifest.finish();
        if let Some(path) = &self.manifest_path {
            fs::write(path, self.manifest.to_json())
                .with_context(|| format!("writing {}", path.display()))
                .failed()?;
        }
        Ok(())
    }
}

fn section(cmd: &Command) -> &'static str {
    match cmd {
        Command::Gen(_) => "gen",
        Command::Reduce(_) => "reduce",
        Command::KernelApprox(_) => "kernel-approx",
        Command::Contrast(_) => "contrast",
        Command::Eigenfun(_) => "eigenfun",
        Command::Analyze(_) => "analyze",
        Command::Verify(_) => "verify",
        Command::Report(_) => "report",
    }
}

pub fn run(cli: &Cli) -> Outcome<()> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p).usage()?,
        None => Config::default(),
    };
    let section = section(&cli.command);
    let seed = cfg.seed(section, cli.seed).usage()?;
    let mut manifest = RunManifest::new(section, seed);
    manifest.config_hash = cfg.hash.clone();
    let mut ctx = Ctx { cfg, section, manifest, manifest_path: cli.manifest.clone() };
    match &cli.command {
        Command::Gen(a) => gen(&mut ctx, a)?,
        Command::Reduce(a) => reduce(&mut ctx, a)?,
        Command::KernelApprox(a) => kernel_approx(&mut ctx, a)?,
        Command::Contrast(a) => contrast(&mut ctx, a)?,
        Command::Eigenfun(a) => eigenfun(&mut ctx, a)?,
        Command::Analyze(a) => analyze(&mut ctx, a)?,
        Command::Verify(a) => {
            let passed = verify(&mut ctx, a)?;
            ctx.finish()?;
            return if passed { Ok(()) } else { Err(Failure::Run(anyhow!("suite `{}` failed", a.suite))) };
        }
        Command::Report(a) => report(&mut ctx, a)?,
    }
    ctx.finish()
}

fn write(path: &Path, text: &str) -> Outcome<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display())).failed()
}

fn gen(ctx: &mut Ctx, a: &GenArgs) -> Outcome<()> {
    match a.dataset {
        Dataset::SwissRoll => {
            ctx.manifest.flag("dataset", "swiss-roll");
            let n = ctx.pick("n", a.n, 1000usize)?;
            let noise = ctx.pick("noise", a.noise, 0.0f64)?;
            if n == 0 || !(noise >= 0.0) {
                return Err(Failure::Usage(anyhow!("need n > 0 and noise >= 0")));
            }
            let roll = swiss_roll(n, noise, ctx.seed());
            io::write_matrix(&a.out, &roll.data).failed()?;
            if let Some(path) = &a.latent {
                io::write_matrix(path, &roll.latent()).failed()?;
            }
            ctx.manifest.metric("points", n as f64);
        }
    }
    Ok(())
}

fn graph_rule(ctx: &mut Ctx, a: &ReduceArgs) -> Outcome<GraphRule> {
    match a.epsilon.or(ctx.cfg.get(ctx.section, "epsilon").usage()?) {
        Some(eps) => {
            ctx.manifest.flag("epsilon", eps);
            Ok(GraphRule::Epsilon(eps))
        }
        None => Ok(GraphRule::Knn(ctx.pick("k", a.k, 10usize)?)),
    }
}

fn reduce(ctx: &mut Ctx, a: &ReduceArgs) -> Outcome<()> {
    ctx.input(&a.input)?;
    let data = io::read_matrix(&a.input).usage()?;
    let d = ctx.pick("dim", a.dim, 2usize)?;
    ctx.manifest.flag("method", format!("{:?}", a.method).to_lowercase());
    let out = match a.method {
        ReduceMethod::Pca => {
            let model = pca_fit(&data, d).failed()?;
            let err = projection_error(&data, &model.mean, &model.basis);
            ctx.manifest.metric("reconstruction_error", err);
            for (i, l) in model.eigenvalues.iter().enumerate() {
                ctx.manifest.metric(&format!("eigenvalue_{i}"), *l);
            }
            model.transform_rows(&data).failed()?
        }
        ReduceMethod::Mds => {
            let mds = mds_embed(&kc_core::manifold::pairwise_distances(&data), d).failed()?;
            ctx.manifest.metric("reconstruction_error", mds.reconstruction_error);
            mds.embeddings
        }
        ReduceMethod::Isomap => {
            let rule = graph_rule(ctx, a)?;
            let iso = isomap(&data, rule, d).failed()?;
            ctx.manifest.metric("reconstruction_error", iso.mds.reconstruction_error);
            ctx.manifest.metric("edges", iso.graph.edges().len() as f64);
            iso.mds.embeddings
        }
        ReduceMethod::Lle => {
            let k = ctx.pick("k", a.k, 10usize)?;
            let w = lle_weights(&data, k).failed()?;
            let worst = w.residuals(&data).into_iter().fold(0.0, f64::max);
            ctx.manifest.metric("max_reconstruction_residual", worst);
            ctx.manifest.metric("regularized_points", w.regularized.len() as f64);
            lle_embed(&w.weights, d).failed()?
        }
        ReduceMethod::Le => {
            let rule = graph_rule(ctx, a)?;
            let t = ctx.pick("t", a.t, 1.0f64)?;
            let emb = laplacian_eigenmaps(&data, rule, t, d).failed()?;
            for (i, l) in emb.eigenvalues.iter().enumerate() {
                ctx.manifest.metric(&format!("eigenvalue_{i}"), *l);
            }
            emb.embeddings
        }
    };
    io::write_matrix(&a.out, &out).failed()
}

fn kernel_approx(ctx: &mut Ctx, a: &KernelApproxArgs) -> Outcome<()> {
    ctx.input(&a.input)?;
    let data = io::read_matrix(&a.input).usage()?;
    let n = data.nrows();
    let sigma2 = ctx.pick("sigma2", a.sigma2, 1.0f64)?;
    let kernel = Kernel::gaussian(sigma2).usage()?;
    let exact = kernel.gram_rows(&data).failed()?;
    let points: Vec<Point> = data.row_iter().map(|r| Point::Coords(r.iter().copied().collect())).collect();
    let (features, approx) = match a.method {
        ApproxMethod::Nystrom => {
            ctx.manifest.flag("method", "nystrom");
            let m = ctx.pick("landmarks", a.landmarks, n.min(50))?;
            let d = ctx.pick("dim", a.dim, m)?;
            let idx = sample_landmarks(n, m, ctx.seed()).usage()?;
            let landmarks: Vec<Point> = idx.iter().map(|&i| points[i].clone()).collect();
            let model = nystrom_fit(&kernel, &landmarks, d).failed()?;
            ctx.manifest.metric("usable_rank", model.usable_rank as f64);
            let rows = points.iter().map(|p| model.features(p)).collect::<kc_core::Result<Vec<_>>>().failed()?;
            let r = rows.first().map_or(0, Vec::len);
            let feats = Mat::from_fn(n, r, |i, j| rows[i][j]);
            let approx = model.reconstruct(&points).failed()?;
            (feats, approx)
        }
        ApproxMethod::Rff => {
            ctx.manifest.flag("method", "rff");
            let d = ctx.pick("features", a.features, 500usize)?;
            let model = rff_sample(sigma2, d, data.ncols(), ctx.seed()).usage()?;
            let rows = data
                .row_iter()
                .map(|r| model.features(&r.iter().copied().collect::<Vec<_>>()))
                .collect::<kc_core::Result<Vec<_>>>()
                .failed()?;
            let feats = Mat::from_fn(n, 2 * d, |i, j| rows[i][j]);
            let approx = &feats * feats.transpose();
            (feats, approx)
        }
    };
    ctx.manifest.metric("max_gram_error", (approx - exact.as_mat()).amax());
    io::write_matrix(&a.out, &features).failed()
}

fn optimizer(ctx: &mut Ctx, max_iter: Option<usize>) -> Outcome<OptimizerConfig> {
    let max_iterations = ctx.pick("max_iter", max_iter, 20_000usize)?;
    Ok(OptimizerConfig { max_iterations, grad_tol: 1e-9, seed: ctx.seed(), ..Default::default() })
}

fn record_fit(ctx: &mut Ctx, opt: &kc_core::encoders::Minimized) {
    ctx.manifest.metric("loss", opt.loss());
    ctx.manifest.metric("grad_norm", opt.grad_norm);
    ctx.manifest.metric("iterations", opt.iterations as f64);
}

fn contrast(ctx: &mut Ctx, a: &ContrastArgs) -> Outcome<()> {
    let load_process = |ctx: &mut Ctx| -> Outcome<_> {
        let path = a.process.as_ref().ok_or_else(|| Failure::Usage(anyhow!("--process is required")))?;
        ctx.input(path)?;
        io::read_process(path).usage()
    };
    match a.method {
        ContrastMethod::Sgns => {
            ctx.manifest.flag("method", "sgns");
            let path = a.corpus.as_ref().ok_or_else(|| Failure::Usage(anyhow!("--corpus is required")))?;
            ctx.input(path)?;
            let tokens = io::read_corpus(path).usage()?;
            let window = ctx.pick("window", a.window, 2usize)?;
            let stats = CorpusStats::from_tokens(&tokens, window).usage()?;
            let mut cfg = SgnsConfig::new(ctx.pick("dim", a.dim, stats.len())?, ctx.pick("k", a.k, 1.0f64)?);
            cfg.neg_exponent = ctx.pick("neg_exponent", a.neg_exponent, 1.0f64)?;
            let k_sig = a.k_sigmoid || ctx.cfg.get(ctx.section, "k_sigmoid").usage()?.unwrap_or(false);
            ctx.manifest.flag("k_sigmoid", k_sig);
            if k_sig {
                cfg.activation = Activation::KSigmoid(cfg.k);
            }
            cfg.optimizer = optimizer(ctx, a.max_iter)?;
            let fit = train_sgns(&stats, &cfg).failed()?;
            let target = sgns_target(&stats, &cfg).failed()?;
            record_fit(ctx, &fit.optimization);
            ctx.manifest.metric("max_target_error", fit.max_error(&target));
            io::write_matrix(&a.out, &fit.phi).failed()?;
            if let Some(p) = &a.context_out {
                io::write_matrix(p, &fit.psi).failed()?;
            }
        }
        ContrastMethod::Infonce => {
            ctx.manifest.flag("method", "infonce");
            let process = load_process(ctx)?;
            let cfg = InfoNceConfig {
                dim: ctx.pick("dim", a.dim, process.len())?,
                tau: ctx.pick("tau", a.tau, 1.0f64)?,
                batch: ctx.pick("batch", a.batch, 2usize)?,
                mode: if a.tied { ScoreMode::Tied } else { ScoreMode::Untied },
                optimizer: optimizer(ctx, a.max_iter)?,
            };
            ctx.manifest.flag("tied", a.tied);
            let fit = train_infonce(&process, &cfg).failed()?;
            record_fit(ctx, &fit.optimization);
            ctx.manifest.metric("max_conditional_tv", max_conditional_tv(&fit.scores, &process, cfg.batch).failed()?);
            ctx.manifest.metric("normalized_score_error", normalized_score_error(&fit.scores, &process).failed()?);
            io::write_matrix(&a.out, &fit.f).failed()?;
            if let (Some(p), Some(g)) = (&a.context_out, &fit.g) {
                io::write_matrix(p, g).failed()?;
            }
        }
        ContrastMethod::Spectral => {
            ctx.manifest.flag("method", "spectral");
            let process = load_process(ctx)?;
            let d = ctx.pick("dim", a.dim, process.len())?;
            let cfg = optimizer(ctx, a.max_iter)?;
            let fit = train_spectral(&process, d, &cfg).failed()?;
            record_fit(ctx, &fit.optimization);
            let target = spectral_target(&process, d).failed()?;
            ctx.manifest.metric("target_error", (fit.gram(&process).failed()? - target.as_mat()).norm());
            io::write_matrix(&a.out, &fit.phi).failed()?;
        }
    }
    Ok(())
}

fn eigenfun(ctx: &mut Ctx, a: &EigenfunArgs) -> Outcome<()> {
    ctx.input(&a.kernel)?;
    ctx.input(&a.p)?;
    let kernel = io::read_kernel(&a.kernel).usage()?;
    let p = io::read_vector(&a.p).usage()?;
    let d = ctx.pick("dim", a.dim, 2usize.min(kernel.n()))?;
    let mut cfg = NeuralEfConfig::full_batch(d);
    cfg.optimizer.seed = ctx.seed();
    cfg.optimizer.max_iterations = ctx.pick("max_iter", a.max_iter, cfg.optimizer.max_iterations)?;
    let oracle = mercer_decompose(&kernel, &p).usage()?;
    let set = train_eigenfunctions(&kernel, &p, &cfg).failed()?;
    let cmp = compare_with_oracle(&set, &oracle);
    let separated = cmp.iter().all(|c| c.relative_gap >= 0.05);
    let alignment = subspace_alignment(&set, &oracle);
    ctx.manifest.metric("subspace_alignment", alignment);
    ctx.manifest.metric("iterations", set.iterations as f64);
    let functions: Vec<_> = cmp
        .iter()
        .enumerate()
        .map(|(j, c)| {
            ctx.manifest.metric(&format!("eigenvalue_estimate_{j}"), c.estimate);
            json!({
                "index": j,
                "eigenvalue": c.eigenvalue,
                "estimate": c.estimate,
                "cosine": c.cosine,
                "relative_gap": c.relative_gap,
            })
        })
        .collect();
    let report = json!({
        "dim": d,
        "converged": set.converged,
        "iterations": set.iterations,
        "grad_norm": set.grad_norm,
        "verification": if separated { "per-function" } else { "subspace" },
        "subspace_alignment": alignment,
        "functions": functions,
    });
    ctx.manifest.oracle.insert("eigenfunctions".into(), report.clone());
    write(&a.report, &(serde_json::to_string_pretty(&report).expect("json") + "\n"))?;
    io::write_matrix(&a.out, &set.tables).failed()
}

fn analyze(ctx: &mut Ctx, a: &AnalyzeArgs) -> Outcome<()> {
    ctx.input(&a.process)?;
    let process = io::read_process(&a.process).usage()?;
    let report = match a.analysis {
        Analysis::Conductance => {
            let parts = ctx.pick("parts", a.parts, 2usize)?;
            let best = sparsest_partition(&process, parts).usage()?;
            let spectrum = process.abar().eigen().failed()?.values;
            ctx.manifest.metric("sparsest_partition", best.value);
            let items = process.space().items();
            let groups: Vec<Vec<&str>> = (0..parts)
                .map(|g| {
                    best.assignment
                        .iter()
                        .enumerate()
                        .filter(|&(_, &a)| a == g)
                        .map(|(i, _)| items[i].as_str())
                        .collect()
                })
                .collect();
            json!({
                "analysis": "conductance",
                "parts": parts,
                "value": best.value,
                "assignment": best.assignment,
                "groups": groups,
                "abar_spectrum": spectrum,
            })
        }
    };
    let text = serde_json::to_string_pretty(&report).expect("json") + "\n";
    match &a.out {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verify(ctx: &mut Ctx, a: &VerifyArgs) -> Outcome<bool> {
    if !SUITES.contains(&a.suite.as_str()) {
        return Err(Failure::Usage(anyhow!("unknown suite `{}`; expected one of {}", a.suite, SUITES.join(", "))));
    }
    ctx.manifest.flag("suite", &a.suite);
    let report = run_suite(&a.suite, ctx.seed()).failed()?;
    for c in &report.checks {
        ctx.manifest.metric(&c.name, c.observed);
    }
    ctx.manifest.oracle.insert("passed".into(), json!(report.passed));
    let text = report.to_json();
    match &a.out {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    for c in report.failures() {
        eprintln!("FAILED {}: observed {} (bound {:?} {})", c.name, c.observed, c.bound, c.tolerance);
    }
    Ok(report.passed)
}

fn report(ctx: &mut Ctx, a: &ReportArgs) -> Outcome<()> {
    if a.manifests.is_empty() {
        return Err(Failure::Usage(anyhow!("report needs at least one manifest")));
    }
    let manifests = a
        .manifests
        .iter()
        .map(|p| {
            ctx.input(p)?;
            RunManifest::load(p).usage()
        })
        .collect::<Outcome<Vec<_>>>()?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display())).failed()?;
    let mut csv = String::from("manifest,subcommand,seed,metric,value\n");
    for (path, m) in a.manifests.iter().zip(&manifests) {
        for (k, v) in &m.metrics {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                path.display(),
                m.subcommand,
                m.seed,
                k.replace(',', ";"),
                kc_core::linalg::format_f64(*v)
            ));
        }
    }
    write(&a.out_dir.join("summary.csv"), &csv)?;
    write(&a.out_dir.join("k_sigmoid.svg"), &plots::sigmoid_family_svg(&[0.5, 1.0, 2.0, 4.0]).failed()?)?;
    let seed = manifests[0].seed;
    let n = ctx.pick("points", a.points, 400usize)?;
    let roll = swiss_roll(n, 0.0, seed);
    let iso = isomap(&roll.data, GraphRule::Knn(10), 2).failed()?;
    write(&a.out_dir.join("swiss_roll.svg"), &plots::swiss_roll_svg(&roll.data, &roll.t, iso.embeddings()).failed()?)?;
    ctx.manifest.metric("manifests", manifests.len() as f64);
    Ok(())
}
