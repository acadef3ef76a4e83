//! Fixtures shared by the benchmarks.

use hvacrl_core::agents::{AgentSample, Learner, Transition, OBSERVATION_DIM};
use hvacrl_core::neural::Architecture;

/// A learner whose replay buffer is full of plausible five-agent bundles.
pub fn filled_learner(hidden: &[usize], capacity: usize) -> Learner {
    let arch = Architecture {
        hidden_dims: hidden.to_vec(),
        ..Architecture::default()
    };
    let mut learner = Learner::new(arch, 0, capacity).expect("valid architecture");
    for k in 0..capacity {
        let obs = |shift: usize| -> Vec<f64> {
            (0..OBSERVATION_DIM)
                .map(|i| ((k + i + shift) % 13) as f64 / 13.0)
                .collect()
        };
        learner.buffer.push(Transition {
            entries: (0..5)
                .map(|agent| AgentSample {
                    agent,
                    observation: obs(agent),
                    action: (k + agent) % 11,
                    next_observation: obs(agent + 1),
                })
                .collect(),
            reward: -0.1 - (k % 7) as f64 * 0.05,
            terminal: false,
        });
    }
    learner
}
