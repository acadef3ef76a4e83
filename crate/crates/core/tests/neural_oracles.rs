//! Independent checks of the Q-network: a plain-loop forward pass built from
//! checkpoint tensors, and central finite differences for every gradient.

use hvacrl_core::neural::gradcheck::{max_relative_error, numerical_td_gradient};
use hvacrl_core::neural::{Architecture, Checkpoint, QNetwork, LAYER_NORM_EPS};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Textbook forward pass using only nested loops over the stored tensors.
fn reference_forward(ck: &Checkpoint, x: &[f64]) -> Vec<f64> {
    let t = |name: &str| ck.tensors.iter().find(|t| t.name == name).unwrap();
    let n_layers = ck.architecture.hidden_dims.len() + 1;
    let mut a = x.to_vec();
    for l in 0..n_layers {
        let w = t(&format!("dense{l}.weight"));
        let b = t(&format!("dense{l}.bias"));
        let (fan_in, fan_out) = (w.shape[0], w.shape[1]);
        let mut h = vec![0.0; fan_out];
        for j in 0..fan_out {
            let mut acc = b.values[j];
            for i in 0..fan_in {
                acc += a[i] * w.values[i * fan_out + j];
            }
            h[j] = acc;
        }
        if l == n_layers - 1 {
            return h;
        }
        if ck.architecture.layer_norm {
            let gain = &t(&format!("norm{l}.gain")).values;
            let shift = &t(&format!("norm{l}.shift")).values;
            let n = fan_out as f64;
            let mean = h.iter().sum::<f64>() / n;
            let var = h.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let sd = (var + LAYER_NORM_EPS).sqrt();
            for j in 0..fan_out {
                h[j] = gain[j] * (h[j] - mean) / sd + shift[j];
            }
        }
        a = h.into_iter().map(|v| if v > 0.0 { v } else { 0.0 }).collect();
    }
    unreachable!()
}

fn perturbed(arch: Architecture, seed: u64) -> QNetwork {
    let mut net = QNetwork::new(arch, seed).unwrap();
    // Non-trivial gains and shifts so their gradients are exercised.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for p in net.params_mut() {
        *p += rng.random_range(-0.2..0.2);
    }
    net
}

#[test]
fn forward_matches_loop_oracle() {
    for seed in 0..10 {
        let net = perturbed(Architecture::default(), seed);
        let ck = Checkpoint::from_network(&net);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..5 {
            let x: Vec<f64> = (0..10).map(|_| rng.random()).collect();
            let q = net.forward(&x).unwrap();
            let r = reference_forward(&ck, &x);
            for (a, b) in q.iter().zip(&r) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }
}

#[test]
fn forward_oracle_without_layer_norm() {
    let arch = Architecture {
        layer_norm: false,
        ..Architecture::default()
    };
    let net = perturbed(arch, 3);
    let ck = Checkpoint::from_network(&net);
    let x = [0.1, 0.9, 0.2, 0.8, 0.3, 0.7, 0.4, 0.6, 0.5, 0.5];
    for (a, b) in net.forward(&x).unwrap().iter().zip(reference_forward(&ck, &x)) {
        assert!((a - b).abs() < 1e-10);
    }
}

fn gradient_agreement(arch: Architecture, seed: u64, batch: usize) -> f64 {
    let net = perturbed(arch.clone(), seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
    let x = Array2::from_shape_fn((batch, arch.input_dim), |_| rng.random::<f64>());
    let actions: Vec<usize> = (0..batch).map(|_| rng.random_range(0..arch.output_dim)).collect();
    let targets: Vec<f64> = (0..batch).map(|_| rng.random_range(-2.0..2.0)).collect();
    let (_, analytic) = net.td_loss_gradient(x.view(), &actions, &targets);
    let numeric = numerical_td_gradient(&net, x.view(), &actions, &targets, 1e-5);
    max_relative_error(&analytic, &numeric, 1e-6)
}

#[test]
fn gradients_match_finite_differences() {
    let arch = Architecture {
        input_dim: 10,
        hidden_dims: vec![16, 12],
        output_dim: 11,
        layer_norm: true,
    };
    for seed in 0..12 {
        let err = gradient_agreement(arch.clone(), seed, 4);
        assert!(err < 1e-4, "seed {seed}: max relative error {err}");
    }
}

#[test]
fn single_sample_gradient_matches_finite_differences() {
    let arch = Architecture {
        input_dim: 5,
        hidden_dims: vec![7, 6],
        output_dim: 3,
        layer_norm: true,
    };
    for seed in 0..5 {
        let err = gradient_agreement(arch.clone(), seed, 1);
        assert!(err < 1e-4, "seed {seed}: {err}");
    }
    let plain = Architecture {
        layer_norm: false,
        ..arch
    };
    assert!(gradient_agreement(plain, 9, 3) < 1e-4);
}
