//! Online evaluation of fixed, random and learned policies.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use de_ddqn_core::de::FeatureConfig;
use de_ddqn_core::episode::{run_policy, FixedPolicy, GreedyPolicy, UniformPolicy};
use de_ddqn_core::rng::{derive_seed, run_seed};
use de_ddqn_core::{DeParams, ObjectiveFunction, QNetwork, Strategy};
use rayon::prelude::*;

use crate::checkpoint;
use crate::error::{Error, Result};

pub const RESULTS_HEADER: &str = "method,problem,dim,run,final_error,evals_used";
pub const SUMMARY_HEADER: &str = "method,problem,dim,mean_error,std_error";
pub const RANKS_HEADER: &str = "method,mean_rank";

/// How strategies are chosen during an evaluation run.
#[derive(Clone, Debug, PartialEq)]
pub enum PolicyKind {
    Fixed(Strategy),
    RandomUniform,
    /// Greedy over the network stored at this path.
    Ddqn(PathBuf),
}

impl PolicyKind {
    /// Column value in the output files: `de-<strategy>`, `random` or
    /// `ddqn-<checkpoint file stem>`.
    pub fn method_name(&self) -> String {
        match self {
            PolicyKind::Fixed(s) => format!("de-{}", s.name()),
            PolicyKind::RandomUniform => "random".into(),
            PolicyKind::Ddqn(p) => format!(
                "ddqn-{}",
                p.file_stem().map_or("model".into(), |s| s.to_string_lossy())
            ),
        }
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    /// `fixed:<strategy>`, `random` or `ddqn:<checkpoint>`.
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "random" {
            return Ok(PolicyKind::RandomUniform);
        }
        if let Some(name) = s.strip_prefix("fixed:") {
            return name
                .parse()
                .map(PolicyKind::Fixed)
                .map_err(|e| format!("{e}; expected one of rand1, rand2, rand-to-best2, curr-to-rand1"));
        }
        if let Some(path) = s.strip_prefix("ddqn:") {
            if path.is_empty() {
                return Err("ddqn policy needs a checkpoint path".into());
            }
            return Ok(PolicyKind::Ddqn(PathBuf::from(path)));
        }
        Err(format!(
            "unknown policy `{s}`; expected fixed:<strategy>, random or ddqn:<checkpoint>"
        ))
    }
}

/// The four fixed strategies followed by random selection.
pub fn baselines() -> Vec<PolicyKind> {
    Strategy::ALL
        .into_iter()
        .map(PolicyKind::Fixed)
        .chain([PolicyKind::RandomUniform])
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub method: String,
    pub problem: String,
    pub dim: usize,
    pub run: usize,
    pub final_error: f64,
    pub evals_used: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub problem: String,
    pub dim: usize,
    pub mean_error: f64,
    /// Sample standard deviation (0 for a single run).
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalResults {
    /// Ordered by method, then problem, then run.
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    /// Mean rank per method, in policy order.
    pub ranks: Vec<(String, f64)>,
}

enum Prepared {
    Fixed(Strategy),
    Random,
    Ddqn(QNetwork, usize),
}

/// Runs every policy `runs` times on every problem.
///
/// Each run uses `run_seed(seed, method, problem id, run)`, so results do
/// not depend on `jobs` or on which other policies are evaluated.
pub fn evaluate(
    policies: &[PolicyKind],
    suite: &[ObjectiveFunction],
    params: DeParams,
    features: FeatureConfig,
    runs: usize,
    seed: u64,
    jobs: usize,
) -> Result<EvalResults> {
    if policies.is_empty() {
        return Err(Error::Config("no policies to evaluate".into()));
    }
    if runs == 0 {
        return Err(Error::Config("runs must be at least 1".into()));
    }
    let methods: Vec<String> = policies.iter().map(PolicyKind::method_name).collect();
    let unique: BTreeSet<&String> = methods.iter().collect();
    if unique.len() != methods.len() {
        return Err(Error::Config(format!("duplicate method names in {methods:?}")));
    }
    let prepared: Vec<Prepared> = policies
        .iter()
        .map(|p| {
            Ok(match p {
                PolicyKind::Fixed(s) => Prepared::Fixed(*s),
                PolicyKind::RandomUniform => Prepared::Random,
                PolicyKind::Ddqn(path) => {
                    let ck = checkpoint::load(path)?;
                    GreedyPolicy::new(&ck.network)?;
                    Prepared::Ddqn(ck.network, ck.sidecar.dim_max)
                }
            })
        })
        .collect::<Result<_>>()?;

    let tasks: Vec<(usize, usize, usize)> = (0..policies.len())
        .flat_map(|m| (0..suite.len()).flat_map(move |p| (0..runs).map(move |r| (m, p, r))))
        .collect();
    let one = |&(m, p, r): &(usize, usize, usize)| -> Result<RunRecord> {
        let f = &suite[p];
        let s = run_seed(seed, &methods[m], &f.id(), r as u64);
        let mut fc = features;
        let summary = match &prepared[m] {
            Prepared::Fixed(st) => run_policy(f, params, fc, &mut FixedPolicy(*st), s, &mut |_| {}),
            Prepared::Random => {
                let mut pol = UniformPolicy::new(derive_seed(s, &[b"policy"]));
                run_policy(f, params, fc, &mut pol, s, &mut |_| {})
            }
            Prepared::Ddqn(net, dim_max) => {
                fc.dim_max = *dim_max;
                let mut pol = GreedyPolicy::new(net)?;
                run_policy(f, params, fc, &mut pol, s, &mut |_| {})
            }
        }?;
        Ok(RunRecord {
            method: methods[m].clone(),
            problem: f.name().to_string(),
            dim: f.dim(),
            run: r,
            final_error: summary.final_error,
            evals_used: summary.evals_used,
        })
    };
    let records: Vec<RunRecord> = if jobs <= 1 {
        tasks.iter().map(one).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Runtime(e.to_string()))?;
        pool.install(|| tasks.par_iter().map(one).collect::<Result<_>>())?
    };

    let summary = summarize(&records, runs);
    let n_problems = suite.len();
    let matrix: Vec<Vec<f64>> = (0..methods.len())
        .map(|m| {
            (0..n_problems)
                .map(|p| summary[m * n_problems + p].mean_error)
                .collect()
        })
        .collect();
    let ranks = rank(&matrix).map_err(Error::Runtime)?;
    Ok(EvalResults {
        records,
        summary,
        ranks: methods.into_iter().zip(ranks).collect(),
    })
}

/// Mean and sample standard deviation over consecutive blocks of `runs`.
fn summarize(records: &[RunRecord], runs: usize) -> Vec<SummaryRow> {
    records
        .chunks(runs)
        .map(|block| {
            let n = block.len() as f64;
            let mean = block.iter().map(|r| r.final_error).sum::<f64>() / n;
            let var = if block.len() > 1 {
                block.iter().map(|r| (r.final_error - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            SummaryRow {
                method: block[0].method.clone(),
                problem: block[0].problem.clone(),
                dim: block[0].dim,
                mean_error: mean,
                std_error: var.sqrt(),
            }
        })
        .collect()
}

/// Mean rank of each method (row) across problems (columns); lower values
/// rank better and ties share the average of their positions.
pub fn rank(matrix: &[Vec<f64>]) -> Result<Vec<f64>, String> {
    let m = matrix.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    let p = matrix[0].len();
    if matrix.iter().any(|row| row.len() != p) {
        return Err("every method needs one entry per problem".into());
    }
    if matrix.iter().flatten().any(|v| !v.is_finite()) {
        return Err("cannot rank non-finite errors".into());
    }
    if p == 0 {
        return Err("no problems to rank on".into());
    }
    let mut total = vec![0.0; m];
    let mut order: Vec<usize> = (0..m).collect();
    for col in 0..p {
        order.sort_by(|&a, &b| matrix[a][col].total_cmp(&matrix[b][col]));
        let mut i = 0;
        while i < m {
            let mut j = i + 1;
            while j < m && matrix[order[j]][col] == matrix[order[i]][col] {
                j += 1;
            }
            // Positions i..j are tied; 1-based ranks i+1..=j.
            let avg = (i + 1 + j) as f64 / 2.0;
            for &k in &order[i..j] {
                total[k] += avg;
            }
            i = j;
        }
    }
    Ok(total.into_iter().map(|t| t / p as f64).collect())
}

pub fn results_csv(records: &[RunRecord]) -> String {
    let mut s = format!("{RESULTS_HEADER}\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.method, r.problem, r.dim, r.run, r.final_error, r.evals_used
        );
    }
    s
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.method, r.problem, r.dim, r.mean_error, r.std_error
        );
    }
    s
}

pub fn ranks_csv(ranks: &[(String, f64)]) -> String {
    let mut s = format!("{RANKS_HEADER}\n");
    for (m, r) in ranks {
        let _ = writeln!(s, "{m},{r}");
    }
    s
}

/// `results.csv` becomes `results.<suffix>.csv`.
pub fn sibling_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map_or("results".into(), |s| s.to_string_lossy());
    let ext = out.extension().map_or("csv".into(), |s| s.to_string_lossy());
    out.with_file_name(format!("{stem}.{suffix}.{ext}"))
}
