use serde::{Deserialize, Serialize};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Adam moment estimates for one flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    step: u64,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        AdamState {
            first_moment: vec![0.0; n_params],
            second_moment: vec![0.0; n_params],
            step: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        assert_eq!(params.len(), self.first_moment.len());
        assert_eq!(grads.len(), params.len());
        debug_assert!(lr > 0.0);
        self.step += 1;
        let t = self.step as i32;
        let correction1 = 1.0 - BETA1.powi(t);
        let correction2 = 1.0 - BETA2.powi(t);
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.first_moment)
            .zip(&mut self.second_moment)
        {
            *m = BETA1 * *m + (1.0 - BETA1) * g;
            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
            let m_hat = *m / correction1;
            let v_hat = *v / correction2;
            *p -= lr * m_hat / (v_hat.sqrt() + EPSILON);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = vec![0.5, -1.0, 2.0];
        let mut adam = AdamState::new(3);
        adam.step(&mut p, &[0.0; 3], 0.1);
        assert_eq!(p, vec![0.5, -1.0, 2.0]);
        assert_eq!(adam.steps(), 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // m̂ = 1, v̂ = 1 after bias correction, so Δ = -lr / (1 + ε).
        let mut p = vec![0.0];
        let mut adam = AdamState::new(1);
        adam.step(&mut p, &[1.0], 0.1);
        assert!((p[0] + 0.1 / (1.0 + EPSILON)).abs() < 1e-15);
    }

    #[test]
    fn identical_streams_identical_trajectories() {
        let mut a = vec![0.1, 0.2];
        let mut b = a.clone();
        let (mut sa, mut sb) = (AdamState::new(2), AdamState::new(2));
        for k in 0..50 {
            let g = [(k as f64).sin(), (k as f64 * 0.3).cos()];
            sa.step(&mut a, &g, 0.01);
            sb.step(&mut b, &g, 0.01);
        }
        assert_eq!(a, b);
        assert_eq!(sa, sb);
    }
}
