//! Command line interface.
//!
//! Exit status: 0 success, 1 usage error, 2 configuration or data error,
//! 3 runtime failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use de_ddqn_core::bench::registry;
use de_ddqn_core::episode::{FixedPolicy, GreedyPolicy, StrategyPolicy, UniformPolicy};
use de_ddqn_core::rng::{derive_seed, run_seed};

use crate::checkpoint;
use crate::config::Config;
use crate::dump;
use crate::error::{Error, Result};
use crate::eval::{self, PolicyKind};
use crate::train;
use crate::transform_io::{build_suite, SuitePart};

#[derive(Debug, Parser)]
#[command(name = "de-ddqn", version, about = "Differential evolution with DDQN strategy selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Part {
    Train,
    Test,
}

impl From<Part> for SuitePart {
    fn from(p: Part) -> Self {
        match p {
            Part::Train => SuitePart::Train,
            Part::Test => SuitePart::Test,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a Q-network on the training suite.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Checkpoint path; the sidecar goes to `<out>.json`.
        #[arg(long)]
        out: PathBuf,
        /// Training log CSV (default `<out>.log.csv`).
        #[arg(long)]
        log: Option<PathBuf>,
        /// Overrides the configured master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        quiet: bool,
    },
    /// Evaluate policies on the test suite.
    Eval {
        #[arg(long)]
        config: PathBuf,
        /// fixed:<strategy>, random or ddqn:<checkpoint>; repeatable.
        #[arg(long = "policy", required = true)]
        policies: Vec<PolicyKind>,
        #[arg(long, default_value_t = 25)]
        runs: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Per-run results CSV.
        #[arg(long)]
        out: PathBuf,
        /// Mean/std CSV (default `<out stem>.summary.csv`).
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Mean rank CSV (default `<out stem>.ranks.csv`).
        #[arg(long)]
        ranks: Option<PathBuf>,
        /// Worker threads; output order does not depend on it.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value_t = Part::Test)]
        suite: Part,
    },
    /// Write the per-step 99-dimensional state vectors as CSV.
    FeaturesDump {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "random")]
        policy: PolicyKind,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Part::Train)]
        suite: Part,
    },
    /// List the registered benchmark functions.
    BenchList,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status. Messages go to stdout/stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Train {
            config,
            out,
            log,
            seed,
            quiet,
        } => {
            let mut cfg = Config::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let report = train::train(&cfg, &out, log.as_deref(), &mut |c, mean, saved| {
                if !quiet {
                    eprintln!("cycle {c}: mean reward {mean}{}", if saved { " (saved)" } else { "" });
                }
            })?;
            println!(
                "trained {} cycles, best cycle {} (mean reward {}), {} evaluations",
                report.cycle_means.len(),
                report.best_cycle,
                report.cycle_means[report.best_cycle - 1],
                report.total_evals
            );
            println!("checkpoint: {}", report.checkpoint.display());
            println!("log: {}", report.log.display());
        }
        Command::Eval {
            config,
            policies,
            runs,
            seed,
            out,
            summary,
            ranks,
            jobs,
            suite,
        } => {
            let cfg = Config::load(&config)?;
            let problems = build_suite(&cfg, suite.into())?;
            if problems.is_empty() {
                return Err(Error::Config("the evaluation suite is empty".into()));
            }
            let results = eval::evaluate(
                &policies,
                &problems,
                cfg.de,
                cfg.features(),
                runs,
                seed.unwrap_or(cfg.seed),
                jobs,
            )?;
            write_file(&out, &eval::results_csv(&results.records))?;
            let summary = summary.unwrap_or_else(|| eval::sibling_path(&out, "summary"));
            write_file(&summary, &eval::summary_csv(&results.summary))?;
            let ranks = ranks.unwrap_or_else(|| eval::sibling_path(&out, "ranks"));
            write_file(&ranks, &eval::ranks_csv(&results.ranks))?;
            for (m, r) in &results.ranks {
                println!("{m}: mean rank {r}");
            }
        }
        Command::FeaturesDump {
            config,
            out,
            policy,
            runs,
            seed,
            suite,
        } => {
            let cfg = Config::load(&config)?;
            let problems = build_suite(&cfg, suite.into())?;
            let master = seed.unwrap_or(cfg.seed);
            let method = policy.method_name();
            let mut features = cfg.features();
            let loaded = match &policy {
                PolicyKind::Ddqn(path) => {
                    let ck = checkpoint::load(path)?;
                    features.dim_max = ck.sidecar.dim_max;
                    Some(ck.network)
                }
                _ => None,
            };
            let file = fs::File::create(&out).map_err(|e| Error::io(&out, e))?;
            let mut w = BufWriter::new(file);
            writeln!(w, "{}", dump::header()).map_err(|e| Error::io(&out, e))?;
            let mut rows = 0;
            for f in &problems {
                for r in 0..runs {
                    let s = run_seed(master, &method, &f.id(), r as u64);
                    let mut pol: Box<dyn StrategyPolicy + '_> = match (&policy, &loaded) {
                        (PolicyKind::Fixed(st), _) => Box::new(FixedPolicy(*st)),
                        (PolicyKind::RandomUniform, _) => Box::new(UniformPolicy::new(derive_seed(s, &[b"policy"]))),
                        (PolicyKind::Ddqn(_), Some(net)) => Box::new(GreedyPolicy::new(net)?),
                        (PolicyKind::Ddqn(_), None) => unreachable!("checkpoint loaded above"),
                    };
                    rows += dump::dump_run(&mut w, f, cfg.de, features, pol.as_mut(), r, s)?;
                }
            }
            w.flush().map_err(|e| Error::io(&out, e))?;
            println!("{rows} rows written to {}", out.display());
        }
        Command::BenchList => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            let _ = writeln!(w, "id,class,default_suite,bound");
            for r in registry() {
                let role = format!("{:?}", r.membership).to_lowercase();
                let _ = writeln!(w, "{},{},{},{}", r.id, r.class.name(), role, r.bound());
            }
        }
    }
    Ok(())
}
