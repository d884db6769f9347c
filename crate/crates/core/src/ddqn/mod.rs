//! Double deep Q-learning over the four mutation strategies.

mod replay;

use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::de::Strategy;
use crate::neural::{train_step_with, Adam, NeuralError, QNetwork, TrainSample, Workspace, DQN_LAYERS};
use crate::rng::{derive_seed, seeded, RunRng};

pub use replay::ReplayMemory;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum DdqnError {
    #[error("replay memory holds {have} observations, batch needs {need}")]
    InsufficientMemory { have: usize, need: usize },
    #[error("invalid agent configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Network(#[from] NeuralError),
}

/// One transition `(s, a, r, s', terminal)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub state: Vec<f64>,
    pub action: Strategy,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

/// Argmax, lowest ordinal on ties.
pub fn greedy_action(q: &[f64]) -> Strategy {
    let mut best = 0;
    for (a, &v) in q.iter().enumerate().take(Strategy::COUNT) {
        if v > q[best] {
            best = a;
        }
    }
    Strategy::ALL[best]
}

/// ε-greedy. One uniform draw decides exploration; exploring draws the
/// action uniformly.
pub fn select_action<R: Rng + ?Sized>(q: &[f64], epsilon: f64, rng: &mut R) -> Strategy {
    let u: f64 = rng.random();
    if u < epsilon {
        Strategy::ALL[rng.random_range(0..Strategy::COUNT)]
    } else {
        greedy_action(q)
    }
}

/// Double-Q targets: `r` for terminal transitions, otherwise
/// `r + γ·Q_target(s', argmax_a Q_primary(s', a))`.
pub fn compute_targets(
    batch: &[&Observation],
    primary: &QNetwork,
    target: &QNetwork,
    gamma: f64,
) -> Result<Vec<f64>, NeuralError> {
    let mut ws = Workspace::new();
    compute_targets_with(batch, primary, target, gamma, &mut ws)
}

pub fn compute_targets_with(
    batch: &[&Observation],
    primary: &QNetwork,
    target: &QNetwork,
    gamma: f64,
    ws: &mut Workspace,
) -> Result<Vec<f64>, NeuralError> {
    if !primary.same_architecture(target) {
        return Err(NeuralError::ArchitectureMismatch);
    }
    let live: Vec<usize> = (0..batch.len()).filter(|&b| !batch[b].terminal).collect();
    let mut out: Vec<f64> = batch.iter().map(|o| o.reward).collect();
    if live.is_empty() {
        return Ok(out);
    }
    let d = primary.input_dim();
    let k = primary.output_dim();
    let mut next = Vec::with_capacity(live.len() * d);
    for &b in &live {
        next.extend_from_slice(&batch[b].next_state);
    }
    let choice: Vec<usize> = primary
        .forward_batch_with(&next, live.len(), ws)?
        .chunks_exact(k)
        .map(|q| greedy_action(q).ordinal())
        .collect();
    let qt = target.forward_batch_with(&next, live.len(), ws)?;
    for (j, &b) in live.iter().enumerate() {
        out[b] += gamma * qt[j * k + choice[j]];
    }
    Ok(out)
}

/// Learning hyperparameters.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentConfig {
    pub epsilon: f64,
    pub gamma: f64,
    /// Target sync period `C`, in agent steps.
    pub sync_period: u64,
    pub batch_size: usize,
    pub memory_capacity: usize,
    /// Observations collected with random strategies before learning.
    pub warmup: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    pub clip_norm: Option<f64>,
    /// Layer widths, input first.
    pub layers: Vec<usize>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            epsilon: 0.1,
            gamma: 0.99,
            sync_period: 1000,
            batch_size: 64,
            memory_capacity: 100_000,
            warmup: 10_000,
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-8,
            clip_norm: None,
            layers: DQN_LAYERS.to_vec(),
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), DdqnError> {
        let bad = |m| Err(DdqnError::InvalidConfig(m));
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad("epsilon must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1)");
        }
        if self.sync_period == 0 {
            return bad("sync period must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if self.memory_capacity < self.batch_size {
            return bad("memory capacity must hold one batch");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if !(self.adam_epsilon.is_finite() && self.adam_epsilon > 0.0) {
            return bad("Adam epsilon must be positive");
        }
        if matches!(self.clip_norm, Some(c) if !(c.is_finite() && c > 0.0)) {
            return bad("clip norm must be positive");
        }
        if self.layers.len() < 2 || self.layers.contains(&0) {
            return bad("network needs at least two positive layer sizes");
        }
        if self.layers[self.layers.len() - 1] != Strategy::COUNT {
            return bad("network must have one output per strategy");
        }
        Ok(())
    }

    pub fn adam_for(&self, net: &QNetwork) -> Adam {
        let mut adam = Adam::with_hyperparameters(
            net.parameter_count(),
            self.learning_rate,
            self.beta1,
            self.beta2,
            self.adam_epsilon,
        );
        adam.clip_norm = self.clip_norm;
        adam
    }
}

/// Primary and target networks, optimizer and replay memory.
#[derive(Debug)]
pub struct Agent {
    config: AgentConfig,
    primary: QNetwork,
    target: QNetwork,
    adam: Adam,
    memory: ReplayMemory,
    steps: u64,
    rng: RunRng,
    ws: Workspace,
    last_loss: Option<f64>,
}

impl Agent {
    pub fn new(config: AgentConfig, seed: u64) -> Result<Self, DdqnError> {
        config.validate()?;
        let primary = QNetwork::new(&config.layers, derive_seed(seed, &[b"weights"]))?;
        Self::with_network(config, primary, None, seed)
    }

    /// Starts from existing weights (and optimizer state, if given).
    pub fn with_network(
        config: AgentConfig,
        primary: QNetwork,
        adam: Option<Adam>,
        seed: u64,
    ) -> Result<Self, DdqnError> {
        config.validate()?;
        if primary.sizes() != config.layers {
            return Err(DdqnError::Network(NeuralError::ArchitectureMismatch));
        }
        let adam = match adam {
            Some(a) if a.parameter_count() == primary.parameter_count() => a,
            Some(_) => return Err(DdqnError::Network(NeuralError::ArchitectureMismatch)),
            None => config.adam_for(&primary),
        };
        Ok(Agent {
            memory: ReplayMemory::new(config.memory_capacity),
            target: primary.clone(),
            primary,
            adam,
            config,
            steps: 0,
            rng: seeded(derive_seed(seed, &[b"agent"])),
            ws: Workspace::new(),
            last_loss: None,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn primary(&self) -> &QNetwork {
        &self.primary
    }

    pub fn target(&self) -> &QNetwork {
        &self.target
    }

    pub fn adam(&self) -> &Adam {
        &self.adam
    }

    pub fn memory(&self) -> &ReplayMemory {
        &self.memory
    }

    /// Agent training steps taken so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn last_loss(&self) -> Option<f64> {
        self.last_loss
    }

    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>, NeuralError> {
        self.primary.forward(state)
    }

    /// ε-greedy over the primary network.
    pub fn act(&mut self, state: &[f64]) -> Result<Strategy, NeuralError> {
        let q = self.primary.forward(state)?;
        Ok(select_action(&q, self.config.epsilon, &mut self.rng))
    }

    pub fn greedy(&self, state: &[f64]) -> Result<Strategy, NeuralError> {
        Ok(greedy_action(&self.primary.forward(state)?))
    }

    /// Uniform random strategy from the agent's stream.
    pub fn random_action(&mut self) -> Strategy {
        Strategy::ALL[self.rng.random_range(0..Strategy::COUNT)]
    }

    /// Stores an observation without learning (warm-up).
    pub fn remember(&mut self, obs: Observation) {
        self.memory.push(obs);
    }

    /// Stores `obs`, trains on one batch when enough data is held, counts
    /// the step and syncs the target every `C` steps. Returns the batch
    /// loss when a gradient step ran.
    pub fn step(&mut self, obs: Observation) -> Result<Option<f64>, DdqnError> {
        self.memory.push(obs);
        let loss = if self.memory.len() >= self.config.batch_size {
            let idx = self.memory.sample_indices(self.config.batch_size, &mut self.rng)?;
            let batch: Vec<&Observation> = idx.iter().map(|&i| self.memory.get(i).unwrap()).collect();
            let targets =
                compute_targets_with(&batch, &self.primary, &self.target, self.config.gamma, &mut self.ws)?;
            let samples: Vec<TrainSample<'_>> = batch
                .iter()
                .zip(&targets)
                .map(|(o, &t)| TrainSample {
                    state: &o.state,
                    action: o.action.ordinal(),
                    target: t,
                })
                .collect();
            Some(train_step_with(&mut self.primary, &mut self.adam, &samples, &mut self.ws)?)
        } else {
            None
        };
        self.steps += 1;
        if self.steps % self.config.sync_period == 0 {
            self.target.copy_from(&self.primary)?;
        }
        self.last_loss = loss;
        Ok(loss)
    }

    /// Copies primary into target now.
    pub fn sync_target(&mut self) {
        self.target
            .copy_from(&self.primary)
            .expect("primary and target share one architecture");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::Layer;
    use alloc::vec;

    /// Network whose output is `q` for every input.
    fn constant_net(q: [f64; 4]) -> QNetwork {
        QNetwork::from_layers(vec![Layer::new(3, 4, vec![0.0; 12], q.to_vec()).unwrap()]).unwrap()
    }

    fn obs(reward: f64, terminal: bool) -> Observation {
        Observation {
            state: vec![0.0; 3],
            action: Strategy::Rand1,
            reward,
            next_state: vec![0.5; 3],
            terminal,
        }
    }

    #[test]
    fn double_q_decouples_selection_and_evaluation() {
        let primary = constant_net([0.2, 0.9, 0.1, 0.0]);
        let target = constant_net([5.0, 2.0, 7.0, 1.0]);
        let o = obs(1.0, false);
        let t = compute_targets(&[&o], &primary, &target, 0.99).unwrap();
        assert_eq!(t, [1.0 + 0.99 * 2.0]);
        assert!((t[0] - 2.98).abs() < 1e-12);
        // plain max over the target would give 1 + 0.99·7
        assert_ne!(t[0], 1.0 + 0.99 * 7.0);
        let term = obs(10.0, true);
        assert_eq!(compute_targets(&[&term, &o], &primary, &target, 0.99).unwrap()[0], 10.0);
        assert_eq!(compute_targets(&[&o], &primary, &target, 0.0).unwrap(), [1.0]);
    }

    #[test]
    fn greedy_ties_to_lowest() {
        assert_eq!(greedy_action(&[1.0, 3.0, 3.0, 0.0]), Strategy::Rand2);
        let mut rng = seeded(0);
        for _ in 0..100 {
            assert_eq!(select_action(&[1.0, 3.0, 3.0, 0.0], 0.0, &mut rng), Strategy::Rand2);
        }
    }

    #[test]
    fn full_exploration_is_uniform() {
        let mut rng = seeded(3);
        let mut counts = [0usize; 4];
        let n = 10_000;
        for _ in 0..n {
            counts[select_action(&[0.0, 9.0, 0.0, 0.0], 1.0, &mut rng).ordinal()] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() <= 0.02, "{counts:?}");
        }
    }

    #[test]
    fn config_validation() {
        assert!(AgentConfig::default().validate().is_ok());
        let c = AgentConfig {
            gamma: 1.0,
            ..AgentConfig::default()
        };
        assert!(c.validate().is_err());
        let c = AgentConfig {
            sync_period: 0,
            ..AgentConfig::default()
        };
        assert!(c.validate().is_err());
        let c = AgentConfig {
            layers: vec![99, 10, 3],
            ..AgentConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn no_training_below_batch_size() {
        let cfg = AgentConfig {
            layers: vec![3, 4, 4],
            batch_size: 4,
            memory_capacity: 10,
            ..AgentConfig::default()
        };
        let mut agent = Agent::new(cfg, 1).unwrap();
        let before = agent.primary().clone();
        for _ in 0..3 {
            assert_eq!(agent.step(obs(1.0, true)).unwrap(), None);
        }
        assert_eq!(agent.primary(), &before);
        assert!(agent.step(obs(1.0, true)).unwrap().is_some());
        assert_ne!(agent.primary(), &before);
        assert_eq!(agent.steps(), 4);
    }
}
