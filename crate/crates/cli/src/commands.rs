use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, ValueEnum};
use flrank::dataset::orders_to_comparisons;
use flrank::diagnostics::{diagnose, DiagnosticSettings, MarginSource};
use flrank::imc::{ImcConfig, StepRule};
use flrank::model::{generate_synthetic, link_scores, SyntheticModel};
use flrank::pipeline::{ipr, lrpr_baseline, Clamp, IprConfig, RankingOutcome};
use flrank::sampling::{sample_comparisons, sample_orders, sample_support, seeded_rng, Stream, SupportScheme};
use flrank::{dist, io, ComparisonDataset, Link};
use serde::{Deserialize, Serialize};

use crate::data::{self, DataArgs};
use crate::error::{CliError, CliResult};
use crate::sizes::{resolve_pairs, resolve_trials, LogBase, Size};
use crate::Global;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ipr,
    Lrpr,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ipr => "ipr",
            Algorithm::Lrpr => "lrpr",
        }
    }

    pub fn run(self, data: &ComparisonDataset, config: &IprConfig) -> flrank::Result<RankingOutcome> {
        match self {
            Algorithm::Ipr => ipr(data, config),
            Algorithm::Lrpr => lrpr_baseline(data, config),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StepArg {
    Fixed,
    Backtracking,
}

/// Solver and pipeline settings shared by `rank`.
#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value = "logit")]
    pub link: Link,
    /// Trace-norm weight on the latent matrix.
    #[arg(long, default_value_t = 1e-2)]
    pub lambda_l: f64,
    /// Trace-norm weight on the sparse noise matrix.
    #[arg(long, default_value_t = 1e2)]
    pub lambda_n: f64,
    /// Fit a separate noise matrix on the observed entries.
    #[arg(long)]
    pub noise_term: bool,
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = StepArg::Fixed)]
    pub step_rule: StepArg,
    /// Truncate the completed link matrix to this rank.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Fixed clamp level; defaults to 1/(2K) per pair.
    #[arg(long)]
    pub clamp: Option<f64>,
}

impl SolverArgs {
    pub fn config(&self) -> IprConfig {
        IprConfig {
            link: self.link,
            rank: self.rank,
            imc: ImcConfig {
                lambda_l: self.lambda_l,
                lambda_n: self.lambda_n,
                max_iters: self.max_iters,
                tol: self.tol,
                step_rule: match self.step_rule {
                    StepArg::Fixed => StepRule::Fixed,
                    StepArg::Backtracking => StepRule::Backtracking,
                },
                step: None,
                use_noise_term: self.noise_term,
            },
            clamp: self.clamp.map_or(Clamp::PerPair, Clamp::Fixed),
        }
    }
}

fn model_parser(s: &str) -> Result<SyntheticModel, String> {
    s.parse().map_err(|e: flrank::Error| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// Synthetic model: 1 (W = 0), 2 (dense W) or 3 (low-rank W).
    #[arg(long, default_value = "1", value_parser = model_parser)]
    pub model: SyntheticModel,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    /// Rank of W for model 3.
    #[arg(long, default_value_t = 2)]
    pub rank: usize,
    /// Compared pairs, or `auto` for ceil(d^2 log n).
    #[arg(long, default_value = "auto")]
    pub m: Size,
    /// Comparisons per pair, or `auto` for 50 ceil(d^2 log^2 n / n^2).
    #[arg(long = "K", default_value = "auto")]
    pub k: Size,
    #[arg(long, default_value = "uniform")]
    pub scheme: SupportScheme,
    /// Logarithm base for the `auto` formulas (`e` or a number).
    #[arg(long, default_value = "e")]
    pub log_base: LogBase,
    /// Emit per-user orders from this many users instead of pair counts.
    #[arg(long, value_name = "USERS")]
    pub orders: Option<usize>,
    /// Items per user order; defaults to all items.
    #[arg(long, requires = "orders")]
    pub order_len: Option<usize>,
}

pub fn generate(args: &GenerateArgs, global: &Global) -> CliResult<()> {
    let (n, d) = (args.n, args.d);
    if n < 2 || d == 0 || d > n {
        return Err(CliError::Usage(format!("need n >= 2 and 1 <= d <= n, got n={n}, d={d}")));
    }
    let inst = generate_synthetic(args.model, n, d, args.rank, global.seed).map_err(|e| CliError::Usage(e.to_string()))?;
    let out = &global.out;
    std::fs::create_dir_all(out).map_err(|e| CliError::at(out, e))?;

    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "model={} n={n} d={d} seed={}", args.model, global.seed)?;
    let data = match args.orders {
        Some(users) => {
            // Random-utility orders whose utilities are the row means of psi(P).
            let scores = link_scores(&inst.params, &inst.features)?;
            let utility: Vec<f64> = (0..n).map(|i| scores.row(i).mean()).collect();
            let len = args.order_len.unwrap_or(n);
            let orders = sample_orders(&utility, users, len, &mut seeded_rng(global.seed, Stream::Orders))
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let path = out.join("orders.csv");
            let mut file = data::create(&path)?;
            io::write_orders(&orders, &mut file)?;
            file.flush()?;
            let data = orders_to_comparisons(&orders, &inst.features)?;
            writeln!(stdout, "users={users} order_len={len} m={}", data.m())?;
            data
        }
        None => {
            let m = resolve_pairs(args.m, n, d, args.log_base);
            let k = resolve_trials(args.k, n, d, args.log_base);
            let support = sample_support(n, m, args.scheme, &mut seeded_rng(global.seed, Stream::Support))
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let data = sample_comparisons(
                &inst.preference,
                &inst.features,
                &support,
                k,
                &mut seeded_rng(global.seed, Stream::Comparisons),
            )?;
            writeln!(stdout, "m={} K={k}", data.m())?;
            data
        }
    };
    data::save_features(&out.join("features.csv"), &inst.features)?;
    data::save_comparisons(&out.join("comparisons.csv"), &data)?;
    let truth_path = out.join("truth.csv");
    let mut truth = data::create(&truth_path)?;
    io::write_matrix(inst.preference.entries(), &mut truth)?;
    truth.flush()?;
    writeln!(stdout, "wrote {}", out.display())?;
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = Algorithm::Ipr)]
    pub algo: Algorithm,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Ground-truth preference matrix; adds `dist` to the report.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Write the solver objective trace to this CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct SolverReport {
    iterations: usize,
    objective: f64,
    final_step: f64,
}

#[derive(Debug, Serialize)]
struct RankReport {
    algorithm: &'static str,
    features_used: bool,
    link: String,
    n: usize,
    d: usize,
    m: usize,
    comparisons: u64,
    solver: SolverReport,
    ranking: Vec<usize>,
    copeland_scores: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dist: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_ms: Option<f64>,
}

pub fn rank(args: &RankArgs, global: &Global) -> CliResult<()> {
    let data = args.data.load()?;
    let truth = args.truth.as_deref().map(data::load_truth).transpose()?;
    if let Some(t) = &truth {
        if t.n() != data.n() {
            return Err(CliError::Data(format!("truth covers {} items, data {}", t.n(), data.n())));
        }
    }
    let config = args.solver.config();
    let start = Instant::now();
    let outcome = args.algo.run(&data, &config)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;

    let out = &global.out;
    std::fs::create_dir_all(out).map_err(|e| CliError::at(out, e))?;
    let mut file = data::create(&out.join("ranking.txt"))?;
    io::write_ranking(&outcome.ranking, &mut file)?;
    file.flush()?;
    if let Some(path) = &args.trace {
        let mut file = data::create(path)?;
        outcome.solution.write_trace(&mut file)?;
        file.flush()?;
    }

    let report = RankReport {
        algorithm: args.algo.name(),
        features_used: args.algo == Algorithm::Ipr,
        link: config.link.to_string(),
        n: data.n(),
        d: data.d(),
        m: data.m(),
        comparisons: data.pairs().iter().map(|c| c.trials).sum(),
        solver: SolverReport {
            iterations: outcome.solution.iterations,
            objective: outcome.solution.objective(),
            final_step: outcome.solution.final_step,
        },
        ranking: outcome.ranking.order(),
        copeland_scores: outcome.scores.0.clone(),
        dist: truth.as_ref().map(|t| dist(&outcome.ranking, t)).transpose()?,
        wall_ms: (!global.no_timing).then_some(wall_ms),
    };
    let json = serde_json::to_string_pretty(&report)?;
    let mut file = data::create(&out.join("report.json"))?;
    writeln!(file, "{json}")?;
    file.flush()?;
    println!("{json}");
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Ranking file, one item id per line, best first.
    #[arg(long)]
    pub ranking: PathBuf,
    /// Ground-truth preference matrix CSV.
    #[arg(long)]
    pub truth: PathBuf,
}

pub fn eval(args: &EvalArgs) -> CliResult<()> {
    let ranking = data::load_ranking(&args.ranking)?;
    let truth = data::load_truth(&args.truth)?;
    if ranking.len() != truth.n() {
        return Err(CliError::Data(format!(
            "ranking covers {} items, truth {}",
            ranking.len(),
            truth.n()
        )));
    }
    println!("{:.6}", dist(&ranking, &truth)?);
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value = "logit")]
    pub link: Link,
    /// Target accuracy.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Approximation factor of the aggregation step.
    #[arg(long, default_value_t = 5.0)]
    pub gamma: f64,
    /// Constant of the completion bound.
    #[arg(long, default_value_t = 1.0)]
    pub c2: f64,
}

pub fn diagnose_cmd(args: &DiagnoseArgs) -> CliResult<()> {
    if !(args.epsilon > 0.0 && args.gamma > 0.0 && args.c2 > 0.0) {
        return Err(CliError::Usage("epsilon, gamma and c2 must be positive".into()));
    }
    let data = args.data.load()?;
    let truth = args.truth.as_deref().map(data::load_truth).transpose()?;
    let settings = DiagnosticSettings { link: args.link, epsilon: args.epsilon, gamma: args.gamma, c2: args.c2, ..DiagnosticSettings::default() };
    let diag = diagnose(&data, truth.as_ref(), &settings)?;
    let source = match diag.delta_source {
        MarginSource::GroundTruth => "ground truth",
        MarginSource::Empirical => "empirical",
    };
    let req = diag.requirements;
    let mut out = std::io::stdout().lock();
    writeln!(out, "n: {}", diag.n)?;
    writeln!(out, "d: {}", diag.d)?;
    writeln!(out, "m: {}", diag.m)?;
    writeln!(out, "mean K: {:.3}", diag.mean_trials)?;
    writeln!(out, "P_min: {:.6}", diag.p_min)?;
    writeln!(out, "Delta: {:.6e} ({source})", diag.delta)?;
    writeln!(out, "kappa: {:.3}", diag.kappa)?;
    writeln!(out, "gamma: {}", diag.gamma)?;
    writeln!(out, "epsilon: {}", diag.epsilon)?;
    writeln!(out, "L: {:.6}", diag.lipschitz)?;
    writeln!(out, "tau: {:.6e}", diag.tau)?;
    writeln!(out, "m_required: {:.6e}", req.m_required)?;
    writeln!(out, "m_required (explicit failure probability): {:.6e}", req.m_required_explicit)?;
    writeln!(out, "K_required: {:.6e}", req.k_required)?;
    Ok(())
}

pub fn path_or_default(path: &Option<PathBuf>, out: &Path, name: &str) -> PathBuf {
    path.clone().unwrap_or_else(|| out.join(name))
}
