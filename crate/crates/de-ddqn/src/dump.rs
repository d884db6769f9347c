//! Per-step state vector traces.

use std::fmt::Write as _;
use std::io::{self, Write};

use de_ddqn_core::de::FeatureConfig;
use de_ddqn_core::episode::{run_policy, StrategyPolicy};
use de_ddqn_core::neural::NeuralError;
use de_ddqn_core::{DeParams, ObjectiveFunction, Strategy, STATE_DIM};

use crate::error::{Error, Result};

/// Forces the state to be computed even for policies that ignore it.
struct Traced<'p>(&'p mut dyn StrategyPolicy);

impl StrategyPolicy for Traced<'_> {
    fn needs_state(&self) -> bool {
        true
    }

    fn choose(&mut self, state: Option<&[f64; STATE_DIM]>) -> Result<Strategy, NeuralError> {
        self.0.choose(state)
    }
}

pub fn header() -> String {
    let mut s = String::from("problem,dim,run,step,parent,action");
    for k in 1..=STATE_DIM {
        let _ = write!(s, ",f{k}");
    }
    s
}

/// Writes one CSV row per DE step: the state the action was chosen from.
/// Computing the state does not consume randomness, so the trajectory is
/// the same as an untraced run with the same seed.
#[allow(clippy::too_many_arguments)]
pub fn dump_run(
    out: &mut dyn Write,
    func: &ObjectiveFunction,
    params: DeParams,
    features: FeatureConfig,
    policy: &mut dyn StrategyPolicy,
    run: usize,
    seed: u64,
) -> Result<usize> {
    let mut io_err: Option<io::Error> = None;
    let mut line = String::new();
    let name = func.name().to_string();
    let dim = func.dim();
    let summary = run_policy(func, params, features, &mut Traced(policy), seed, &mut |v| {
        if io_err.is_some() {
            return;
        }
        line.clear();
        let _ = write!(
            line,
            "{name},{dim},{run},{},{},{}",
            v.step,
            v.outcome.parent,
            v.outcome.strategy.name()
        );
        for x in v.state.expect("traced policy always sees the state") {
            let _ = write!(line, ",{x}");
        }
        line.push('\n');
        if let Err(e) = out.write_all(line.as_bytes()) {
            io_err = Some(e);
        }
    })?;
    if let Some(e) = io_err {
        return Err(Error::Runtime(format!("writing trace: {e}")));
    }
    Ok(summary.steps)
}
