//! Sample-complexity sweeps: one synthetic dataset per (model, value, seed),
//! every algorithm run on it, one CSV row per run plus per-group means.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use flrank::imc::ImcConfig;
use flrank::model::{generate_synthetic, SyntheticModel};
use flrank::pipeline::IprConfig;
use flrank::sampling::{sample_comparisons, sample_support, seeded_rng, Stream, SupportScheme};
use flrank::{dist, Link};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::commands::{path_or_default, Algorithm};
use crate::data;
use crate::error::{CliError, CliResult};
use crate::sizes::{resolve_pairs, resolve_trials, LogBase, Size};
use crate::Global;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Vary {
    #[serde(rename = "m")]
    Pairs,
    #[serde(rename = "K")]
    Trials,
    #[serde(rename = "d")]
    Dim,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixed {
    pub n: usize,
    pub d: usize,
    #[serde(default = "auto")]
    pub m: Size,
    #[serde(rename = "K", default = "auto")]
    pub k: Size,
    /// Rank of W for model 3.
    #[serde(default = "two")]
    pub rank: usize,
}

fn auto() -> Size {
    Size::Auto
}

fn two() -> usize {
    2
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub lambda_l: f64,
    pub lambda_n: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = ImcConfig::default();
        Self { lambda_l: d.lambda_l, lambda_n: d.lambda_n, max_iters: d.max_iters, tol: d.tol }
    }
}

/// Sweep description, read from TOML.
///
/// `values` are absolute unless `relative = true`, in which case they
/// multiply the `auto` value of the varied quantity (`m` or `K`) and are
/// rounded up.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub vary: Vary,
    pub values: Vec<f64>,
    #[serde(default)]
    pub relative: bool,
    pub fixed: Fixed,
    #[serde(default = "all_models")]
    pub models: Vec<u8>,
    #[serde(default = "five_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "both_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub log_base: Option<LogBase>,
}

fn all_models() -> Vec<u8> {
    vec![1, 2, 3]
}

fn five_seeds() -> Vec<u64> {
    (0..5).collect()
}

fn both_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Ipr, Algorithm::Lrpr]
}

impl SweepSpec {
    pub fn validate(&self) -> CliResult<Vec<SyntheticModel>> {
        let bad = |msg: &str| Err(CliError::Usage(format!("sweep spec: {msg}")));
        if self.values.is_empty() || self.values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return bad("values must be a nonempty list of positive numbers");
        }
        if self.relative && self.vary == Vary::Dim {
            return bad("relative values apply to m or K only");
        }
        if !self.relative && self.values.iter().any(|v| v.fract() != 0.0) {
            return bad("absolute values must be whole numbers");
        }
        if self.seeds.is_empty() || self.algorithms.is_empty() {
            return bad("seeds and algorithms must be nonempty");
        }
        self.models
            .iter()
            .map(|m| m.to_string().parse::<SyntheticModel>().map_err(|e| CliError::Usage(format!("sweep spec: {e}"))))
            .collect()
    }

    /// `(d, m, K)` for one swept value.
    fn point(&self, value: f64) -> (usize, usize, u64) {
        let base = self.log_base.unwrap_or_default();
        let n = self.fixed.n;
        let scaled = |auto: u64| (value * auto as f64).ceil() as u64;
        let d = match self.vary {
            Vary::Dim => value as usize,
            _ => self.fixed.d,
        };
        let mut m = resolve_pairs(self.fixed.m, n, d, base);
        let mut k = resolve_trials(self.fixed.k, n, d, base);
        match (self.vary, self.relative) {
            (Vary::Pairs, true) => m = scaled(crate::sizes::auto_pairs(n, d, base)) as usize,
            (Vary::Pairs, false) => m = value as usize,
            (Vary::Trials, true) => k = scaled(crate::sizes::auto_trials(n, d, base)).max(1),
            (Vary::Trials, false) => k = value as u64,
            (Vary::Dim, _) => {}
        }
        (d, m, k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub algorithm: String,
    pub model: String,
    pub n: usize,
    pub d: usize,
    pub m: usize,
    #[serde(rename = "K")]
    pub k: u64,
    /// Seed, or `mean` for aggregate rows.
    pub seed: String,
    pub dist: f64,
    pub solver_iters: f64,
    pub wall_ms: f64,
    pub error: String,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// TOML sweep specification.
    #[arg(long)]
    pub spec: PathBuf,
    /// Metrics CSV; defaults to `metrics.csv` under `--out`.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

struct Job {
    model: SyntheticModel,
    d: usize,
    m: usize,
    k: u64,
    seed: u64,
}

fn run_job(job: &Job, spec: &SweepSpec, timing: bool) -> Vec<MetricsRow> {
    let n = spec.fixed.n;
    let row = |alg: Algorithm, dist: f64, iters: f64, ms: f64, error: String| MetricsRow {
        algorithm: alg.name().to_string(),
        model: job.model.to_string(),
        n,
        d: job.d,
        m: job.m,
        k: job.k,
        seed: job.seed.to_string(),
        dist,
        solver_iters: iters,
        wall_ms: if timing { ms } else { 0.0 },
        error,
    };
    let data = generate_synthetic(job.model, n, job.d, spec.fixed.rank, job.seed).and_then(|inst| {
        let support = sample_support(n, job.m, SupportScheme::Uniform, &mut seeded_rng(job.seed, Stream::Support))?;
        let mut rng = seeded_rng(job.seed, Stream::Comparisons);
        let data = sample_comparisons(&inst.preference, &inst.features, &support, job.k, &mut rng)?;
        Ok((data, inst.preference))
    });
    let (data, truth) = match data {
        Ok(v) => v,
        Err(e) => return spec.algorithms.iter().map(|&a| row(a, f64::NAN, f64::NAN, 0.0, e.to_string())).collect(),
    };
    let config = IprConfig {
        imc: ImcConfig {
            lambda_l: spec.solver.lambda_l,
            lambda_n: spec.solver.lambda_n,
            max_iters: spec.solver.max_iters,
            tol: spec.solver.tol,
            ..ImcConfig::default()
        },
        ..IprConfig::new(Link::Logit)
    };
    spec.algorithms
        .iter()
        .map(|&alg| {
            let start = Instant::now();
            let result = alg.run(&data, &config).and_then(|out| Ok((dist(&out.ranking, &truth)?, out.solution.iterations)));
            let ms = start.elapsed().as_secs_f64() * 1e3;
            match result {
                Ok((d, iters)) => row(alg, d, iters as f64, ms, String::new()),
                Err(e) => {
                    log::warn!("{} on {} seed {}: {e}", alg.name(), job.model, job.seed);
                    row(alg, f64::NAN, f64::NAN, ms, e.to_string())
                }
            }
        })
        .collect()
}

fn mean(rows: &[&MetricsRow], field: impl Fn(&MetricsRow) -> f64) -> f64 {
    rows.iter().map(|r| field(r)).sum::<f64>() / rows.len() as f64
}

/// Runs every job and returns rows ordered by algorithm, model, value and
/// seed, followed by one mean row per (algorithm, model, value).
pub fn run_sweep(spec: &SweepSpec, global: &Global) -> CliResult<Vec<MetricsRow>> {
    let models = spec.validate()?;
    let mut jobs = Vec::new();
    for &model in &models {
        for &value in &spec.values {
            let (d, m, k) = spec.point(value);
            for &seed in &spec.seeds {
                jobs.push(Job { model, d, m, k, seed });
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(global.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let timing = !global.no_timing;
    let per_job: Vec<Vec<MetricsRow>> = pool.install(|| jobs.par_iter().map(|j| run_job(j, spec, timing)).collect());

    let mut rows = Vec::new();
    for a in 0..spec.algorithms.len() {
        rows.extend(per_job.iter().map(|r| r[a].clone()));
    }
    let groups = rows.len() / spec.seeds.len();
    let mut means = Vec::with_capacity(groups);
    for group in rows.chunks(spec.seeds.len()) {
        let refs: Vec<&MetricsRow> = group.iter().collect();
        let errors: Vec<&str> = group.iter().map(|r| r.error.as_str()).filter(|e| !e.is_empty()).collect();
        means.push(MetricsRow {
            seed: "mean".into(),
            dist: mean(&refs, |r| r.dist),
            solver_iters: mean(&refs, |r| r.solver_iters),
            wall_ms: mean(&refs, |r| r.wall_ms),
            error: if errors.is_empty() { String::new() } else { format!("{} failed runs", errors.len()) },
            ..group[0].clone()
        });
    }
    rows.extend(means);
    Ok(rows)
}

pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(data::create(path)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn sweep(args: &SweepArgs, global: &Global) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.spec).map_err(|e| CliError::at(&args.spec, e))?;
    let spec: SweepSpec = toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", args.spec.display())))?;
    let rows = run_sweep(&spec, global)?;
    std::fs::create_dir_all(&global.out).map_err(|e| CliError::at(&global.out, e))?;
    let path = path_or_default(&args.metrics, &global.out, "metrics.csv");
    write_metrics(&path, &rows)?;
    let failed = rows.iter().filter(|r| r.seed != "mean" && !r.error.is_empty()).count();
    println!("{} rows written to {} ({failed} failed runs)", rows.len(), path.display());
    Ok(())
}
