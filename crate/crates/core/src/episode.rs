//! Drivers for a single DE run: under a fixed policy (evaluation) or under
//! the learning agent (training).

use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::bench::ObjectiveFunction;
use crate::ddqn::{greedy_action, Agent, DdqnError, Observation};
use crate::de::{DeError, DeParams, DeRun, FeatureConfig, StepOutcome, Strategy};
use crate::features::{RunState, STATE_DIM};
use crate::neural::{NeuralError, QNetwork};
use crate::rewards::{reward, RewardError, RewardKind};
use crate::rng::{seeded, RunRng};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EpisodeError {
    #[error(transparent)]
    De(#[from] DeError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Ddqn(#[from] DdqnError),
    #[error(transparent)]
    Reward(#[from] RewardError),
}

/// Chooses the strategy for each parent.
pub trait StrategyPolicy {
    /// Whether [`StrategyPolicy::choose`] looks at the state vector.
    fn needs_state(&self) -> bool;
    fn choose(&mut self, state: Option<&[f64; STATE_DIM]>) -> Result<Strategy, NeuralError>;
}

/// Always the same strategy.
#[derive(Clone, Copy, Debug)]
pub struct FixedPolicy(pub Strategy);

impl StrategyPolicy for FixedPolicy {
    fn needs_state(&self) -> bool {
        false
    }

    fn choose(&mut self, _: Option<&[f64; STATE_DIM]>) -> Result<Strategy, NeuralError> {
        Ok(self.0)
    }
}

/// Uniformly random strategy per parent.
#[derive(Clone, Debug)]
pub struct UniformPolicy {
    rng: RunRng,
}

impl UniformPolicy {
    pub fn new(seed: u64) -> Self {
        UniformPolicy { rng: seeded(seed) }
    }
}

impl StrategyPolicy for UniformPolicy {
    fn needs_state(&self) -> bool {
        false
    }

    fn choose(&mut self, _: Option<&[f64; STATE_DIM]>) -> Result<Strategy, NeuralError> {
        Ok(Strategy::ALL[self.rng.random_range(0..Strategy::COUNT)])
    }
}

/// Greedy over a frozen Q-network.
#[derive(Clone, Copy, Debug)]
pub struct GreedyPolicy<'n> {
    net: &'n QNetwork,
}

impl<'n> GreedyPolicy<'n> {
    pub fn new(net: &'n QNetwork) -> Result<Self, NeuralError> {
        if net.input_dim() != STATE_DIM || net.output_dim() != Strategy::COUNT {
            return Err(NeuralError::ArchitectureMismatch);
        }
        Ok(GreedyPolicy { net })
    }
}

impl StrategyPolicy for GreedyPolicy<'_> {
    fn needs_state(&self) -> bool {
        true
    }

    fn choose(&mut self, state: Option<&[f64; STATE_DIM]>) -> Result<Strategy, NeuralError> {
        let state = state.ok_or(NeuralError::InputLength {
            expected: STATE_DIM,
            found: 0,
        })?;
        Ok(greedy_action(&self.net.forward(state)?))
    }
}

/// What an observer sees after each step.
#[derive(Clone, Copy, Debug)]
pub struct StepView<'a> {
    /// Zero-based step index within the run.
    pub step: usize,
    /// State the action was chosen from, when the policy used one.
    pub state: Option<&'a [f64; STATE_DIM]>,
    pub outcome: &'a StepOutcome,
    pub run: &'a RunState,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunSummary {
    pub best_fitness: f64,
    pub final_error: f64,
    pub evals_used: usize,
    pub steps: usize,
}

/// One complete run under `policy`.
pub fn run_policy(
    func: &ObjectiveFunction,
    params: DeParams,
    features: FeatureConfig,
    policy: &mut dyn StrategyPolicy,
    seed: u64,
    observer: &mut dyn FnMut(&StepView<'_>),
) -> Result<RunSummary, EpisodeError> {
    let mut de = DeRun::new(func, params, features, seed)?;
    let mut state = [0.0; STATE_DIM];
    let mut step = 0;
    while !de.is_done() {
        let s = if policy.needs_state() {
            de.state_into(&mut state);
            Some(&state)
        } else {
            None
        };
        let action = policy.choose(s)?;
        let outcome = de.step(action)?;
        observer(&StepView {
            step,
            state: s,
            outcome: &outcome,
            run: de.run_state(),
        });
        step += 1;
    }
    Ok(RunSummary {
        best_fitness: de.best_fitness(),
        final_error: de.final_error(),
        evals_used: de.evals(),
        steps: step,
    })
}

/// How the agent acts during a training run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrainMode {
    /// Uniform random strategies; observations are stored without learning.
    Warmup,
    /// ε-greedy actions and one agent step per application.
    Learn,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeStats {
    pub steps: usize,
    pub reward_sum: f64,
    pub final_error: f64,
    pub evals_used: usize,
    /// Whether the run ended by itself rather than by `max_steps`.
    pub completed: bool,
}

/// One DE run feeding the agent. Stops early after `max_steps` steps when
/// given.
#[allow(clippy::too_many_arguments)]
pub fn run_training_episode(
    agent: &mut Agent,
    func: &ObjectiveFunction,
    params: DeParams,
    features: FeatureConfig,
    reward_kind: RewardKind,
    seed: u64,
    mode: TrainMode,
    max_steps: Option<usize>,
) -> Result<EpisodeStats, EpisodeError> {
    reward_kind.validate_for(func.f_optimum())?;
    let mut de = DeRun::new(func, params, features, seed)?;
    let mut state: Vec<f64> = de.state().to_vec();
    let mut stats = EpisodeStats {
        steps: 0,
        reward_sum: 0.0,
        final_error: de.final_error(),
        evals_used: de.evals(),
        completed: de.is_done(),
    };
    while !de.is_done() {
        if max_steps.is_some_and(|m| stats.steps >= m) {
            break;
        }
        let action = match mode {
            TrainMode::Warmup => agent.random_action(),
            TrainMode::Learn => agent.act(&state)?,
        };
        let o = de.step(action)?;
        let r = reward(
            reward_kind,
            o.parent_fitness,
            o.trial_fitness,
            o.bsf_before,
            func.f_optimum(),
        )?;
        let next = de.state().to_vec();
        let obs = Observation {
            state: core::mem::replace(&mut state, next.clone()),
            action,
            reward: r,
            next_state: next,
            terminal: o.done,
        };
        match mode {
            TrainMode::Warmup => agent.remember(obs),
            TrainMode::Learn => {
                agent.step(obs)?;
            }
        }
        stats.steps += 1;
        stats.reward_sum += r;
    }
    stats.final_error = de.final_error();
    stats.evals_used = de.evals();
    stats.completed = de.is_done();
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::registered;
    use crate::ddqn::AgentConfig;

    #[test]
    fn fixed_policy_run_uses_budget() {
        let f = registered("rastrigin_shifted").unwrap().instantiate(5).unwrap();
        let params = DeParams {
            max_evals: 1000,
            ..DeParams::default()
        };
        let mut steps = 0;
        let s = run_policy(
            &f,
            params,
            FeatureConfig::new(10),
            &mut FixedPolicy(Strategy::Rand1),
            7,
            &mut |_| steps += 1,
        )
        .unwrap();
        assert_eq!(s.evals_used, 1000);
        assert_eq!(s.steps, 900);
        assert_eq!(steps, 900);
        assert!(s.final_error >= 0.0);
    }

    #[test]
    fn training_episode_feeds_memory() {
        let f = registered("sphere_shifted").unwrap().instantiate(5).unwrap();
        let params = DeParams {
            population_size: 20,
            max_evals: 400,
            ..DeParams::default()
        };
        let cfg = AgentConfig {
            batch_size: 8,
            memory_capacity: 1000,
            ..AgentConfig::default()
        };
        let mut agent = Agent::new(cfg, 1).unwrap();
        let fc = FeatureConfig::new(10);
        let w = run_training_episode(&mut agent, &f, params, fc, RewardKind::R2, 1, TrainMode::Warmup, Some(50))
            .unwrap();
        assert_eq!(w.steps, 50);
        assert!(!w.completed);
        assert_eq!(agent.memory().len(), 50);
        assert_eq!(agent.steps(), 0);
        let l = run_training_episode(&mut agent, &f, params, fc, RewardKind::R2, 2, TrainMode::Learn, None).unwrap();
        assert!(l.completed);
        assert_eq!(l.steps, 380);
        assert_eq!(agent.steps(), 380);
        assert!(agent.memory().iter().last().unwrap().terminal);
        assert!(agent.memory().iter().rev().skip(1).all(|o| !o.terminal));
    }
}
