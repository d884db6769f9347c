use alloc::vec;
use alloc::vec::Vec;

use super::{NeuralError, QNetwork};

/// Adam with bias-corrected moments.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Rescale the gradient to this L2 norm when it is larger. Off by default.
    pub clip_norm: Option<f64>,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    /// Defaults: lr 1e-4, β₁ 0.9, β₂ 0.999, ε 1e-8.
    pub fn new(parameter_count: usize) -> Self {
        Self::with_hyperparameters(parameter_count, 1e-4, 0.9, 0.999, 1e-8)
    }

    pub fn for_network(net: &QNetwork) -> Self {
        Self::new(net.parameter_count())
    }

    pub fn with_hyperparameters(parameter_count: usize, learning_rate: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Adam {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            clip_norm: None,
            step: 0,
            m: vec![0.0; parameter_count],
            v: vec![0.0; parameter_count],
        }
    }

    /// Restores a saved state.
    pub fn from_state(
        learning_rate: f64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
        clip_norm: Option<f64>,
        step: u64,
        m: Vec<f64>,
        v: Vec<f64>,
    ) -> Result<Self, NeuralError> {
        if m.len() != v.len() {
            return Err(NeuralError::ParameterCount {
                expected: m.len(),
                found: v.len(),
            });
        }
        Ok(Adam {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            clip_norm,
            step,
            m,
            v,
        })
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.v
    }

    pub fn parameter_count(&self) -> usize {
        self.m.len()
    }

    /// Applies one update to `params` given `grad` (both flat).
    pub fn update_flat(&mut self, params: &mut [f64], grad: &[f64]) -> Result<(), NeuralError> {
        self.check(params.len())?;
        self.check(grad.len())?;
        let (scale, lr_t) = self.advance(grad);
        self.apply(0, params, grad, scale, lr_t);
        Ok(())
    }

    /// Applies one update to every parameter of `net`.
    pub fn update(&mut self, net: &mut QNetwork, grad: &[f64]) -> Result<(), NeuralError> {
        self.check(net.parameter_count())?;
        self.check(grad.len())?;
        let (scale, lr_t) = self.advance(grad);
        let mut off = 0;
        for s in net.param_slices_mut() {
            let n = s.len();
            self.apply(off, s, &grad[off..off + n], scale, lr_t);
            off += n;
        }
        Ok(())
    }

    fn check(&self, n: usize) -> Result<(), NeuralError> {
        if n != self.m.len() {
            return Err(NeuralError::ParameterCount {
                expected: self.m.len(),
                found: n,
            });
        }
        Ok(())
    }

    /// Bumps the step; returns the gradient scale and the bias-corrected
    /// step size.
    fn advance(&mut self, grad: &[f64]) -> (f64, f64) {
        self.step += 1;
        let scale = match self.clip_norm {
            Some(c) => {
                let norm = libm::sqrt(grad.iter().map(|g| g * g).sum::<f64>());
                if norm > c && norm > 0.0 {
                    c / norm
                } else {
                    1.0
                }
            }
            None => 1.0,
        };
        let t = self.step as f64;
        let bc1 = 1.0 - libm::pow(self.beta1, t);
        let bc2 = 1.0 - libm::pow(self.beta2, t);
        (scale, self.learning_rate * libm::sqrt(bc2) / bc1)
    }

    fn apply(&mut self, off: usize, params: &mut [f64], grad: &[f64], scale: f64, lr_t: f64) {
        let (b1, b2) = (self.beta1, self.beta2);
        let eps_hat = self.epsilon * libm::sqrt(1.0 - libm::pow(b2, self.step as f64));
        let m = &mut self.m[off..off + params.len()];
        let v = &mut self.v[off..off + params.len()];
        for (((p, &g), m), v) in params.iter_mut().zip(grad).zip(m).zip(v) {
            let g = g * scale;
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= lr_t * *m / (libm::sqrt(*v) + eps_hat);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        for g in [3.0, -0.02, 1e3] {
            let mut adam = Adam::new(1);
            let mut w = [0.7];
            adam.update_flat(&mut w, &[g]).unwrap();
            let dw = w[0] - 0.7;
            assert!((dw.abs() - 1e-4).abs() < 1e-9, "{dw}");
            assert_eq!(dw.signum(), -g.signum());
        }
    }

    #[test]
    fn matches_textbook_form() {
        // m̂ / (sqrt(v̂) + ε) with explicit bias correction
        let mut adam = Adam::new(2);
        let mut p = [0.5, -0.25];
        let grads = [[0.1, -0.3], [0.2, 0.05], [-0.4, 0.0]];
        let (mut m, mut v, mut q) = ([0.0; 2], [0.0; 2], p);
        for (t, g) in grads.iter().enumerate() {
            adam.update_flat(&mut p, g).unwrap();
            let t = (t + 1) as i32;
            for j in 0..2 {
                m[j] = 0.9 * m[j] + 0.1 * g[j];
                v[j] = 0.999 * v[j] + 0.001 * g[j] * g[j];
                let mh = m[j] / (1.0 - 0.9f64.powi(t));
                let vh = v[j] / (1.0 - 0.999f64.powi(t));
                q[j] -= 1e-4 * mh / (vh.sqrt() + 1e-8);
            }
        }
        for j in 0..2 {
            assert!((p[j] - q[j]).abs() < 1e-15, "{p:?} {q:?}");
        }
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut adam = Adam::new(3);
        let mut p = [1.0, 2.0, 3.0];
        adam.update_flat(&mut p, &[0.0; 3]).unwrap();
        assert_eq!(p, [1.0, 2.0, 3.0]);
        assert_eq!(adam.step_count(), 1);
    }

    #[test]
    fn clipping_rescales() {
        let mut adam = Adam::new(2);
        adam.clip_norm = Some(1.0);
        let mut p = [0.0; 2];
        adam.update_flat(&mut p, &[30.0, 40.0]).unwrap();
        assert!((adam.first_moment()[0] - 0.1 * 0.6).abs() < 1e-15);
    }
}
