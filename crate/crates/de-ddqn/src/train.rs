//! Offline training over the training suite.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use de_ddqn_core::ddqn::Agent;
use de_ddqn_core::episode::{run_training_episode, TrainMode};
use de_ddqn_core::rng::{derive_seed, seeded};
use rand::seq::SliceRandom;

use crate::checkpoint::{self, ensure_writable, Sidecar};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::transform_io::{build_suite, SuitePart};

pub const LOG_HEADER: &str = "cycle,mean_reward,checkpointed";

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    /// Mean per-step reward of every completed cycle, first cycle first.
    pub cycle_means: Vec<f64>,
    /// 1-based cycle whose weights are in the checkpoint.
    pub best_cycle: usize,
    pub checkpoint: PathBuf,
    pub log: PathBuf,
    /// Function evaluations over warm-up and all cycles.
    pub total_evals: u64,
    pub warmup_steps: usize,
    pub stopped_early: bool,
}

/// Default training log location: `<checkpoint>.log.csv`.
pub fn default_log_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".log.csv");
    PathBuf::from(s)
}

/// Warm-up once, then cycles of one learning run per training problem in a
/// freshly shuffled order. The checkpoint is rewritten whenever a cycle's
/// mean reward beats every earlier cycle; training stops after
/// `cfg.cycles` cycles or `cfg.patience` cycles without improvement.
///
/// `progress` is called after each cycle with `(cycle, mean, checkpointed)`.
pub fn train(
    cfg: &Config,
    out: &Path,
    log: Option<&Path>,
    progress: &mut dyn FnMut(usize, f64, bool),
) -> Result<TrainReport> {
    if cfg.cycles == 0 {
        return Err(Error::Config("cycles must be at least 1".into()));
    }
    let suite = build_suite(cfg, SuitePart::Train)?;
    if suite.is_empty() {
        return Err(Error::Config("the training suite is empty".into()));
    }
    for f in &suite {
        cfg.reward
            .validate_for(f.f_optimum())
            .map_err(|e| Error::Config(format!("{}: {e}", f.id())))?;
    }
    let log_path = log.map_or_else(|| default_log_path(out), Path::to_path_buf);
    ensure_writable(out)?;
    ensure_writable(&checkpoint::sidecar_path(out))?;
    let log_file = fs::File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;
    let mut log_w = BufWriter::new(log_file);
    let log_err = |e| Error::io(&log_path, e);
    writeln!(log_w, "# mean_reward: mean reward per DE step over all runs of the cycle").map_err(log_err)?;
    writeln!(log_w, "{LOG_HEADER}").map_err(log_err)?;

    let features = cfg.features();
    let mut agent = Agent::new(cfg.agent.clone(), derive_seed(cfg.seed, &[b"agent"]))?;
    let mut order_rng = seeded(derive_seed(cfg.seed, &[b"order"]));
    let mut episode: u64 = 0;
    let mut next_seed = || {
        episode += 1;
        derive_seed(cfg.seed, &[b"episode", &episode.to_le_bytes()])
    };

    let mut total_evals: u64 = 0;
    let warmup_target = cfg.agent.warmup.min(cfg.agent.memory_capacity);
    let mut warmup_steps = 0;
    let mut k = 0;
    while agent.memory().len() < warmup_target {
        let f = &suite[k % suite.len()];
        let remaining = warmup_target - agent.memory().len();
        let stats = run_training_episode(
            &mut agent,
            f,
            cfg.de,
            features,
            cfg.reward,
            next_seed(),
            TrainMode::Warmup,
            Some(remaining),
        )?;
        warmup_steps += stats.steps;
        total_evals += stats.evals_used as u64;
        k += 1;
    }

    let mut order: Vec<usize> = (0..suite.len()).collect();
    let mut best = f64::NEG_INFINITY;
    let mut best_cycle = 0;
    let mut since_best = 0;
    let mut cycle_means = Vec::new();
    let mut stopped_early = false;
    let mut sidecar = Sidecar::new(
        agent.primary(),
        agent.adam(),
        cfg.hash(),
        features.dim_max,
        cfg.reward.name(),
    );
    for cycle in 1..=cfg.cycles {
        order.shuffle(&mut order_rng);
        let mut reward_sum = 0.0;
        let mut steps = 0usize;
        for &p in &order {
            let stats = run_training_episode(
                &mut agent,
                &suite[p],
                cfg.de,
                features,
                cfg.reward,
                next_seed(),
                TrainMode::Learn,
                None,
            )?;
            reward_sum += stats.reward_sum;
            steps += stats.steps;
            total_evals += stats.evals_used as u64;
        }
        let mean = if steps == 0 { 0.0 } else { reward_sum / steps as f64 };
        cycle_means.push(mean);
        let improved = mean > best;
        if improved {
            best = mean;
            best_cycle = cycle;
            since_best = 0;
            sidecar.cycle = cycle;
            sidecar.mean_reward = mean;
            checkpoint::save(out, agent.primary(), Some(agent.adam()), &sidecar)?;
        } else {
            since_best += 1;
        }
        writeln!(log_w, "{cycle},{mean},{}", u8::from(improved)).map_err(log_err)?;
        log_w.flush().map_err(log_err)?;
        progress(cycle, mean, improved);
        if cfg.patience > 0 && since_best >= cfg.patience && cycle < cfg.cycles {
            stopped_early = true;
            break;
        }
    }
    Ok(TrainReport {
        cycle_means,
        best_cycle,
        checkpoint: out.to_path_buf(),
        log: log_path,
        total_evals,
        warmup_steps,
        stopped_early,
    })
}
