//! Dense ReLU network with a squared loss on the chosen output, trained by
//! Adam. Everything is `f64`.

mod adam;
pub mod codec;
mod gemm;

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::features::STATE_DIM;
use crate::rng::{fnv1a, seeded};
use crate::de::Strategy;
use gemm::gemm;

pub use adam::Adam;

/// Layer widths of the default Q-network.
pub const DQN_LAYERS: [usize; 6] = [STATE_DIM, 100, 100, 100, 100, Strategy::COUNT];

#[derive(Clone, Debug, PartialEq, Error)]
pub enum NeuralError {
    #[error("a network needs at least two positive layer sizes")]
    InvalidArchitecture,
    #[error("input length {found}, expected {expected}")]
    InputLength { expected: usize, found: usize },
    #[error("input contains a non-finite value")]
    NonFiniteInput,
    #[error("training target is not finite")]
    NonFiniteTarget,
    #[error("action {action} out of range for {outputs} outputs")]
    InvalidAction { action: usize, outputs: usize },
    #[error("empty training batch")]
    EmptyBatch,
    #[error("network architectures differ")]
    ArchitectureMismatch,
    #[error("parameter vector has length {found}, expected {expected}")]
    ParameterCount { expected: usize, found: usize },
}

/// Fully connected layer. `weights` is `inputs × outputs`, row-major, so
/// a row vector times `weights` gives the pre-activation.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    inputs: usize,
    outputs: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Layer {
    pub fn new(inputs: usize, outputs: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self, NeuralError> {
        if inputs == 0 || outputs == 0 || weights.len() != inputs * outputs || bias.len() != outputs {
            return Err(NeuralError::InvalidArchitecture);
        }
        Ok(Layer {
            inputs,
            outputs,
            weights,
            bias,
        })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }
}

/// ReLU on every hidden layer, identity on the output layer.
#[derive(Clone, Debug, PartialEq)]
pub struct QNetwork {
    layers: Vec<Layer>,
}

/// One supervised sample: move output `action` towards `target`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainSample<'a> {
    pub state: &'a [f64],
    pub action: usize,
    pub target: f64,
}

/// Reusable buffers for batched passes.
#[derive(Clone, Debug, Default)]
pub struct Workspace {
    /// Post-activation outputs per layer, input batch first.
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
    grad: Vec<f64>,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Gradient from the last [`QNetwork::loss_and_gradient_with`] call.
    pub fn gradient(&self) -> &[f64] {
        &self.grad
    }
}

impl QNetwork {
    /// Uniform Glorot initialization, zero biases.
    pub fn new(sizes: &[usize], seed: u64) -> Result<Self, NeuralError> {
        check_sizes(sizes)?;
        let mut rng = seeded(seed);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = init_bound(fan_in, fan_out);
                let weights = (0..fan_in * fan_out)
                    .map(|_| rng.random_range(-bound..=bound))
                    .collect();
                Layer {
                    inputs: fan_in,
                    outputs: fan_out,
                    weights,
                    bias: vec![0.0; fan_out],
                }
            })
            .collect();
        Ok(QNetwork { layers })
    }

    /// The 99 → 100×4 → 4 network.
    pub fn dqn_default(seed: u64) -> Self {
        Self::new(&DQN_LAYERS, seed).expect("default sizes are valid")
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self, NeuralError> {
        check_sizes(sizes)?;
        let layers = sizes
            .windows(2)
            .map(|w| Layer {
                inputs: w[0],
                outputs: w[1],
                weights: vec![0.0; w[0] * w[1]],
                bias: vec![0.0; w[1]],
            })
            .collect();
        Ok(QNetwork { layers })
    }

    /// Chains explicit layers; adjacent sizes must agree.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self, NeuralError> {
        if layers.is_empty() || layers.windows(2).any(|w| w[0].outputs != w[1].inputs) {
            return Err(NeuralError::InvalidArchitecture);
        }
        Ok(QNetwork { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.layers[0].inputs];
        s.extend(self.layers.iter().map(|l| l.outputs));
        s
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Parameter slices in canonical order: per layer, weights then bias.
    pub fn param_slices(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
    }

    pub fn param_slices_mut(&mut self) -> impl Iterator<Item = &mut [f64]> + '_ {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
    }

    /// All parameters flattened in canonical order.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for s in self.param_slices() {
            out.extend_from_slice(s);
        }
        out
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<(), NeuralError> {
        let expected = self.parameter_count();
        if params.len() != expected {
            return Err(NeuralError::ParameterCount {
                expected,
                found: params.len(),
            });
        }
        let mut rest = params;
        for s in self.param_slices_mut() {
            let (head, tail) = rest.split_at(s.len());
            s.copy_from_slice(head);
            rest = tail;
        }
        Ok(())
    }

    /// FNV-1a over the parameter bit patterns.
    pub fn fingerprint(&self) -> u64 {
        let mut bytes = Vec::with_capacity(self.parameter_count() * 8);
        for s in self.param_slices() {
            for v in s {
                bytes.extend_from_slice(&v.to_bits().to_le_bytes());
            }
        }
        fnv1a(&bytes)
    }

    pub fn same_architecture(&self, other: &QNetwork) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.inputs == b.inputs && a.outputs == b.outputs)
    }

    /// Overwrites every parameter with `src`'s.
    pub fn copy_from(&mut self, src: &QNetwork) -> Result<(), NeuralError> {
        if !self.same_architecture(src) {
            return Err(NeuralError::ArchitectureMismatch);
        }
        for (d, s) in self.layers.iter_mut().zip(&src.layers) {
            d.weights.copy_from_slice(&s.weights);
            d.bias.copy_from_slice(&s.bias);
        }
        Ok(())
    }

    /// Output values for one input.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, NeuralError> {
        let mut ws = Workspace::new();
        self.forward_batch_with(input, 1, &mut ws)?;
        Ok(ws.acts.last().unwrap().clone())
    }

    /// Outputs for `n` row-major inputs, `n × output_dim` row-major.
    pub fn forward_batch(&self, inputs: &[f64], n: usize) -> Result<Vec<f64>, NeuralError> {
        let mut ws = Workspace::new();
        self.forward_batch_with(inputs, n, &mut ws)?;
        Ok(ws.acts.pop().unwrap())
    }

    /// Batched forward pass into `ws`; returns the output block.
    pub fn forward_batch_with<'w>(
        &self,
        inputs: &[f64],
        n: usize,
        ws: &'w mut Workspace,
    ) -> Result<&'w [f64], NeuralError> {
        let d = self.input_dim();
        if inputs.len() != n * d {
            return Err(NeuralError::InputLength {
                expected: n * d,
                found: inputs.len(),
            });
        }
        if inputs.iter().any(|v| !v.is_finite()) {
            return Err(NeuralError::NonFiniteInput);
        }
        ws.acts.resize_with(self.layers.len() + 1, Vec::new);
        ws.acts[0].clear();
        ws.acts[0].extend_from_slice(inputs);
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let (before, after) = ws.acts.split_at_mut(l + 1);
            let a = &before[l];
            let z = &mut after[0];
            z.clear();
            for _ in 0..n {
                z.extend_from_slice(&layer.bias);
            }
            gemm(n, layer.inputs, layer.outputs, a, (layer.inputs, 1), &layer.weights, (layer.outputs, 1), z, 1.0);
            if l < last {
                for v in z.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
        }
        Ok(&ws.acts[self.layers.len()])
    }

    /// Mean over the batch of `(Q(s, a) − target)²` and its gradient in
    /// canonical parameter order.
    pub fn loss_and_gradient(&self, batch: &[TrainSample<'_>]) -> Result<(f64, Vec<f64>), NeuralError> {
        let mut ws = Workspace::new();
        let loss = self.loss_and_gradient_with(batch, &mut ws)?;
        Ok((loss, ws.grad))
    }

    /// As [`QNetwork::loss_and_gradient`], leaving the gradient in `ws`.
    pub fn loss_and_gradient_with(&self, batch: &[TrainSample<'_>], ws: &mut Workspace) -> Result<f64, NeuralError> {
        let n = batch.len();
        if n == 0 {
            return Err(NeuralError::EmptyBatch);
        }
        let d = self.input_dim();
        let k = self.output_dim();
        let mut inputs = Vec::with_capacity(n * d);
        for s in batch {
            if s.state.len() != d {
                return Err(NeuralError::InputLength {
                    expected: d,
                    found: s.state.len(),
                });
            }
            if s.action >= k {
                return Err(NeuralError::InvalidAction {
                    action: s.action,
                    outputs: k,
                });
            }
            if !s.target.is_finite() {
                return Err(NeuralError::NonFiniteTarget);
            }
            inputs.extend_from_slice(s.state);
        }
        self.forward_batch_with(&inputs, n, ws)?;

        let scale = 2.0 / n as f64;
        let mut loss = 0.0;
        let out = &ws.acts[self.layers.len()];
        ws.delta.clear();
        ws.delta.resize(n * k, 0.0);
        for (b, s) in batch.iter().enumerate() {
            let e = out[b * k + s.action] - s.target;
            loss += e * e;
            ws.delta[b * k + s.action] = scale * e;
        }
        loss /= n as f64;

        ws.grad.clear();
        ws.grad.resize(self.parameter_count(), 0.0);
        let mut offsets = Vec::with_capacity(self.layers.len());
        let mut off = 0;
        for l in &self.layers {
            offsets.push(off);
            off += l.weights.len() + l.bias.len();
        }

        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let (fi, fo) = (layer.inputs, layer.outputs);
            let a = &ws.acts[l];
            let (gw, gb) = ws.grad[offsets[l]..offsets[l] + fi * fo + fo].split_at_mut(fi * fo);
            // dW = Aᵀ δ
            gemm(fi, n, fo, a, (1, fi), &ws.delta, (fo, 1), gw, 0.0);
            for b in 0..n {
                for (g, dv) in gb.iter_mut().zip(&ws.delta[b * fo..(b + 1) * fo]) {
                    *g += dv;
                }
            }
            if l > 0 {
                // δ_prev = (δ Wᵀ) ⊙ relu'(A)
                ws.delta_prev.clear();
                ws.delta_prev.resize(n * fi, 0.0);
                gemm(n, fo, fi, &ws.delta, (fo, 1), &layer.weights, (1, fo), &mut ws.delta_prev, 0.0);
                for (dp, av) in ws.delta_prev.iter_mut().zip(a) {
                    if *av <= 0.0 {
                        *dp = 0.0;
                    }
                }
                core::mem::swap(&mut ws.delta, &mut ws.delta_prev);
            }
        }
        Ok(loss)
    }
}

fn check_sizes(sizes: &[usize]) -> Result<(), NeuralError> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(NeuralError::InvalidArchitecture);
    }
    Ok(())
}

/// Half-width of the uniform initialization range.
pub fn init_bound(fan_in: usize, fan_out: usize) -> f64 {
    libm::sqrt(6.0 / (fan_in + fan_out) as f64)
}

/// One Adam step on the batch loss; returns the loss before the update.
pub fn train_step(net: &mut QNetwork, adam: &mut Adam, batch: &[TrainSample<'_>]) -> Result<f64, NeuralError> {
    let mut ws = Workspace::new();
    train_step_with(net, adam, batch, &mut ws)
}

pub fn train_step_with(
    net: &mut QNetwork,
    adam: &mut Adam,
    batch: &[TrainSample<'_>],
    ws: &mut Workspace,
) -> Result<f64, NeuralError> {
    let loss = net.loss_and_gradient_with(batch, ws)?;
    adam.update(net, &ws.grad)?;
    Ok(loss)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> QNetwork {
        let l1 = Layer::new(2, 2, vec![1.0, -1.0, 2.0, 0.5], vec![0.0, 0.1]).unwrap();
        let l2 = Layer::new(2, 2, vec![1.0, 2.0, -1.0, 3.0], vec![0.5, -0.5]).unwrap();
        QNetwork::from_layers(vec![l1, l2]).unwrap()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
    }

    #[test]
    fn hand_network() {
        // h = relu([1, 2] W1 + b1) = [5, 0.1]
        let q = toy().forward(&[1.0, 2.0]).unwrap();
        assert!(close(&q, &[5.0 - 0.1 + 0.5, 10.0 + 0.3 - 0.5]), "{q:?}");
        // h = relu([-1, 1.1]) = [0, 1.1]
        let q = toy().forward(&[-1.0, 0.0]).unwrap();
        assert!(close(&q, &[-1.1 + 0.5, 3.3 - 0.5]), "{q:?}");
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = QNetwork::zeros(&DQN_LAYERS).unwrap();
        assert_eq!(net.forward(&[0.3; STATE_DIM]).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = QNetwork::dqn_default(4);
        assert_eq!(a, QNetwork::dqn_default(4));
        assert_ne!(a, QNetwork::dqn_default(5));
        for l in a.layers() {
            let b = init_bound(l.inputs(), l.outputs());
            assert!(l.weights().iter().all(|w| w.abs() <= b));
            assert!(l.bias().iter().all(|&v| v == 0.0));
        }
        assert!(a.forward(&[0.5; STATE_DIM]).unwrap().iter().all(|q| q.is_finite()));
    }

    #[test]
    fn rejects_bad_input() {
        let net = toy();
        assert_eq!(net.forward(&[f64::NAN, 0.0]), Err(NeuralError::NonFiniteInput));
        assert!(matches!(net.forward(&[0.0]), Err(NeuralError::InputLength { .. })));
    }

    #[test]
    fn output_layer_is_linear() {
        let mut net = QNetwork::dqn_default(1);
        let s = [0.25; STATE_DIM];
        let q = net.forward(&s).unwrap();
        let last = net.layers_mut().last_mut().unwrap();
        for w in last.weights_mut() {
            *w *= 3.0;
        }
        let q3 = net.forward(&s).unwrap();
        for (a, b) in q.iter().zip(&q3) {
            assert!((3.0 * a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn batch_forward_matches_single() {
        let net = QNetwork::new(&[7, 9, 3], 2).unwrap();
        let inputs: Vec<f64> = (0..35).map(|k| (k as f64 * 0.37).sin()).collect();
        let out = net.forward_batch(&inputs, 5).unwrap();
        for b in 0..5 {
            let single = net.forward(&inputs[b * 7..(b + 1) * 7]).unwrap();
            for j in 0..3 {
                assert!((single[j] - out[b * 3 + j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn other_outputs_get_no_gradient() {
        // only the last layer's column for the chosen action moves
        let net = QNetwork::new(&[3, 4, 3], 6).unwrap();
        let s = [0.2, 0.7, 0.4];
        let batch = [TrainSample {
            state: &s,
            action: 1,
            target: 5.0,
        }];
        let (_, g) = net.loss_and_gradient(&batch).unwrap();
        let off = 3 * 4 + 4;
        for i in 0..4 {
            assert_eq!(g[off + i * 3], 0.0);
            assert_eq!(g[off + i * 3 + 2], 0.0);
        }
        assert_eq!(g[off + 12], 0.0);
        assert_eq!(g[off + 14], 0.0);
        assert_ne!(g[off + 13], 0.0);
    }

    #[test]
    fn copy_and_mismatch() {
        let src = QNetwork::dqn_default(1);
        let mut dst = QNetwork::dqn_default(2);
        dst.copy_from(&src).unwrap();
        assert_eq!(dst, src);
        dst.copy_from(&src).unwrap();
        assert_eq!(dst, src);
        let mut other = QNetwork::new(&[99, 10, 4], 0).unwrap();
        assert_eq!(other.copy_from(&src), Err(NeuralError::ArchitectureMismatch));
    }

    #[test]
    fn parameters_round_trip() {
        let mut net = QNetwork::new(&[5, 4, 4, 2], 3).unwrap();
        let p = net.parameters();
        assert_eq!(p.len(), net.parameter_count());
        let doubled: Vec<f64> = p.iter().map(|v| v * 2.0).collect();
        net.set_parameters(&doubled).unwrap();
        assert_eq!(net.parameters(), doubled);
        assert!(net.set_parameters(&p[1..]).is_err());
    }
}
