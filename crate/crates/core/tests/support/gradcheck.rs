//! Central finite-difference check of the batch loss gradient.

use de_ddqn_core::neural::{QNetwork, TrainSample};

/// Largest relative error between analytic and numerical gradients.
/// Pairs where both magnitudes are below `floor` are compared absolutely.
pub fn max_relative_error(net: &QNetwork, batch: &[TrainSample<'_>], h: f64, floor: f64) -> f64 {
    let (_, analytic) = net.loss_and_gradient(batch).unwrap();
    let base = net.parameters();
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for (k, &a) in analytic.iter().enumerate() {
        let mut p = base.clone();
        p[k] = base[k] + h;
        probe.set_parameters(&p).unwrap();
        let (up, _) = probe.loss_and_gradient(batch).unwrap();
        p[k] = base[k] - h;
        probe.set_parameters(&p).unwrap();
        let (down, _) = probe.loss_and_gradient(batch).unwrap();
        let numeric = (up - down) / (2.0 * h);
        let scale = a.abs().max(numeric.abs());
        let err = if scale < floor {
            (a - numeric).abs()
        } else {
            (a - numeric).abs() / scale
        };
        worst = worst.max(err);
    }
    worst
}
