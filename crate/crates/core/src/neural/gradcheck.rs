//! Central finite-difference gradients for verifying backpropagation.

use ndarray::ArrayView2;

use super::network::QNetwork;

/// `(f(θ + h) − f(θ − h)) / 2h` per parameter for the batch TD loss.
pub fn numerical_td_gradient(
    net: &QNetwork,
    x: ArrayView2<'_, f64>,
    actions: &[usize],
    targets: &[f64],
    h: f64,
) -> Vec<f64> {
    let mut probe = net.clone();
    let loss = |n: &QNetwork| {
        let q = n.forward_batch(x);
        let b = actions.len() as f64;
        actions
            .iter()
            .zip(targets)
            .enumerate()
            .map(|(i, (&a, &y))| 0.5 * (q[[i, a]] - y).powi(2) / b)
            .sum::<f64>()
    };
    (0..net.n_params())
        .map(|k| {
            let orig = probe.params()[k];
            probe.params_mut()[k] = orig + h;
            let plus = loss(&probe);
            probe.params_mut()[k] = orig - h;
            let minus = loss(&probe);
            probe.params_mut()[k] = orig;
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

/// Relative error `|a − b| / max(|a|, |b|, floor)`. The floor keeps
/// near-zero gradients from producing meaningless ratios.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Largest relative error over all parameters.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| relative_error(a, n, floor))
        .fold(0.0, f64::max)
}
