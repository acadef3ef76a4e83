//! Q-learning agents: online/target networks, Adam, replay, DQN and DDQN
//! targets.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::replay::{ReplayBuffer, SampleRef};
use crate::error::{Error, Result};
use crate::neural::{AdamState, Architecture, QNetwork};
use crate::sim::{MAX_SETPOINT, MIN_SETPOINT};

pub const N_ACTIONS: usize = 11;
pub const SETPOINT_STEP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Dqn,
    #[default]
    Ddqn,
}

pub fn action_to_setpoint(index: usize) -> Result<f64> {
    if index >= N_ACTIONS {
        return Err(Error::Input(format!("action {index} outside 0..{N_ACTIONS}")));
    }
    let sp = MIN_SETPOINT + index as f64 * SETPOINT_STEP;
    debug_assert!(sp <= MAX_SETPOINT);
    Ok(sp)
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

/// Online network, target network, optimizer state and replay memory of
/// one learning agent (or of all agents while they share parameters).
#[derive(Debug, Clone)]
pub struct Learner {
    pub online: QNetwork,
    pub target: QNetwork,
    pub adam: AdamState,
    pub buffer: ReplayBuffer,
    learn_steps: u64,
}

impl Learner {
    pub fn new(arch: Architecture, seed: u64, buffer_capacity: usize) -> Result<Self> {
        let online = QNetwork::new(arch, seed)?;
        Ok(Self::from_network(online, buffer_capacity))
    }

    pub fn from_network(online: QNetwork, buffer_capacity: usize) -> Self {
        Learner {
            target: online.clone(),
            adam: AdamState::new(online.n_params()),
            buffer: ReplayBuffer::new(buffer_capacity),
            online,
            learn_steps: 0,
        }
    }

    pub fn learn_steps(&self) -> u64 {
        self.learn_steps
    }

    pub fn greedy_action(&self, observation: &[f64]) -> Result<usize> {
        Ok(argmax(self.online.forward(observation)?))
    }

    /// ε-greedy: a uniform random action with probability ε, else greedy.
    pub fn select_action<R: Rng>(
        &self,
        observation: &[f64],
        epsilon: f64,
        rng: &mut R,
    ) -> Result<usize> {
        if rng.random::<f64>() < epsilon {
            Ok(rng.random_range(0..self.online.n_actions()))
        } else {
            self.greedy_action(observation)
        }
    }

    pub fn update_target(&mut self) {
        self.target.copy_from(&self.online);
    }

    /// Bootstrap targets for a batch of samples.
    pub fn targets(&self, batch: &[SampleRef<'_>], gamma: f64, variant: Variant) -> Vec<f64> {
        let dim = self.online.input_dim();
        let next = Array2::from_shape_fn((batch.len(), dim), |(i, j)| {
            batch[i].sample.next_observation[j]
        });
        let q_target = self.target.forward_batch(next.view());
        let q_online = match variant {
            Variant::Ddqn => Some(self.online.forward_batch(next.view())),
            Variant::Dqn => None,
        };
        batch
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if s.terminal {
                    return s.reward;
                }
                let row = q_target.row(i);
                let bootstrap = match &q_online {
                    Some(q) => row[argmax(q.row(i).iter().copied())],
                    None => row.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                };
                s.reward + gamma * bootstrap
            })
            .collect()
    }

    /// One Adam step on the mean squared TD error of `batch`.
    /// Returns the loss before the update.
    pub fn train_on(&mut self, batch: &[SampleRef<'_>], gamma: f64, lr: f64, variant: Variant) -> f64 {
        let targets = self.targets(batch, gamma, variant);
        let dim = self.online.input_dim();
        let x = Array2::from_shape_fn((batch.len(), dim), |(i, j)| batch[i].sample.observation[j]);
        let actions: Vec<usize> = batch.iter().map(|s| s.sample.action).collect();
        let (loss, grad) = self.online.td_loss_gradient(x.view(), &actions, &targets);
        self.adam.step(self.online.params_mut(), &grad, lr);
        self.learn_steps += 1;
        loss
    }

    /// Samples up to `batch_size` transitions from the replay buffer and
    /// trains on them. Does nothing while the buffer is empty.
    pub fn learn_step<R: Rng>(
        &mut self,
        batch_size: usize,
        gamma: f64,
        lr: f64,
        variant: Variant,
        rng: &mut R,
    ) -> Option<f64> {
        if self.buffer.is_empty() {
            return None;
        }
        let n = batch_size.min(self.buffer.len());
        // Sampling borrows the buffer; detach it so the networks can update.
        let buffer = std::mem::replace(&mut self.buffer, ReplayBuffer::new(1));
        let batch = buffer.sample(n, rng);
        let loss = self.train_on(&batch, gamma, lr, variant);
        drop(batch);
        self.buffer = buffer;
        Some(loss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::replay::{AgentSample, Transition};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn learner(seed: u64) -> Learner {
        Learner::new(Architecture::default(), seed, 576).unwrap()
    }

    #[test]
    fn setpoint_grid() {
        assert_eq!(action_to_setpoint(0).unwrap(), 15.0);
        assert_eq!(action_to_setpoint(10).unwrap(), 25.0);
        assert_eq!(action_to_setpoint(5).unwrap(), 20.0);
        assert!(action_to_setpoint(11).is_err());
    }

    #[test]
    fn argmax_ties_lowest() {
        assert_eq!(argmax([0.0; 11]), 0);
        let mut q = [0.0; 11];
        q[7] = 1.0;
        assert_eq!(argmax(q), 7);
        assert_eq!(argmax([1.0, 3.0, 3.0]), 1);
    }

    #[test]
    fn greedy_with_zero_epsilon() {
        let mut l = learner(0);
        l.online.zero_output_layer();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(l.select_action(&[0.5; 10], 0.0, &mut rng).unwrap(), 0);
        // Bias on head 7 makes it the argmax everywhere.
        let out = *l.online.layout().last().unwrap();
        l.online.params_mut()[out.bias + 7] = 1.0;
        assert_eq!(l.select_action(&[0.5; 10], 0.0, &mut rng).unwrap(), 7);
    }

    #[test]
    fn uniform_exploration() {
        let l = learner(1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = [0usize; N_ACTIONS];
        let n = 100_000;
        for _ in 0..n {
            counts[l.select_action(&[0.5; 10], 1.0, &mut rng).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 1.0 / 11.0).abs() < 0.01);
        }
    }

    fn sample(terminal: bool, reward: f64) -> (AgentSample, f64, bool) {
        (
            AgentSample {
                agent: 0,
                observation: vec![0.3; 10],
                action: 2,
                next_observation: vec![0.7; 10],
            },
            reward,
            terminal,
        )
    }

    #[test]
    fn terminal_target_is_reward() {
        let l = learner(2);
        let (s, r, t) = sample(true, -0.5);
        let batch = [SampleRef { sample: &s, reward: r, terminal: t }];
        assert_eq!(l.targets(&batch, 0.9, Variant::Dqn), vec![-0.5]);
        assert_eq!(l.targets(&batch, 0.9, Variant::Ddqn), vec![-0.5]);
    }

    #[test]
    fn dqn_and_ddqn_agree_when_networks_match() {
        let l = learner(3);
        let (s, r, t) = sample(false, -0.2);
        let batch = [SampleRef { sample: &s, reward: r, terminal: t }];
        let a = l.targets(&batch, 0.9, Variant::Dqn);
        let b = l.targets(&batch, 0.9, Variant::Ddqn);
        assert!((a[0] - b[0]).abs() < 1e-15);
    }

    #[test]
    fn ddqn_evaluates_target_at_online_argmax() {
        let mut l = learner(4);
        l.online = QNetwork::new(Architecture::default(), 99).unwrap();
        let (s, r, t) = sample(false, -0.2);
        let batch = [SampleRef { sample: &s, reward: r, terminal: t }];
        let qt = l.target.forward(&s.next_observation).unwrap();
        let qo = l.online.forward(&s.next_observation).unwrap();
        let ddqn = l.targets(&batch, 0.9, Variant::Ddqn)[0];
        let dqn = l.targets(&batch, 0.9, Variant::Dqn)[0];
        assert!((ddqn - (r + 0.9 * qt[argmax(qo)])).abs() < 1e-12);
        assert!(ddqn <= dqn + 1e-15);
    }

    #[test]
    fn target_sync_and_divergence() {
        let mut l = learner(5);
        let (s, r, t) = sample(false, -1.0);
        l.buffer.push(Transition {
            entries: vec![s],
            reward: r,
            terminal: t,
        });
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(l.learn_step(256, 0.9, 1e-3, Variant::Ddqn, &mut rng).is_some());
        let obs = [0.3; 10];
        assert_ne!(l.online.forward(&obs).unwrap(), l.target.forward(&obs).unwrap());
        l.update_target();
        assert_eq!(l.online.forward(&obs).unwrap(), l.target.forward(&obs).unwrap());
    }

    #[test]
    fn empty_buffer_is_no_op() {
        let mut l = learner(6);
        let before = l.online.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(l.learn_step(256, 0.9, 1e-3, Variant::Dqn, &mut rng).is_none());
        assert_eq!(l.online, before);
    }
}
