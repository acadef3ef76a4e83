use std::collections::VecDeque;

use rand::Rng;

/// One agent's part of an environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentSample {
    /// Zone the agent controls.
    pub agent: usize,
    pub observation: Vec<f64>,
    pub action: usize,
    pub next_observation: Vec<f64>,
}

/// Everything one learner saw in one environment step. All entries share
/// the building-level reward.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub entries: Vec<AgentSample>,
    pub reward: f64,
    pub terminal: bool,
}

/// A sampled training example.
#[derive(Debug, Clone, Copy)]
pub struct SampleRef<'a> {
    pub sample: &'a AgentSample,
    pub reward: f64,
    pub terminal: bool,
}

/// FIFO ring buffer of transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            capacity,
            items: VecDeque::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, transition: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(transition);
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }

    /// Draws `n` samples with replacement: a uniform transition, then a
    /// uniform entry within it (uniform over samples when every transition
    /// holds the same number of agents).
    pub fn sample<'a, R: Rng>(&'a self, n: usize, rng: &mut R) -> Vec<SampleRef<'a>> {
        if self.items.is_empty() {
            return Vec::new();
        }
        (0..n)
            .filter_map(|_| {
                let t = &self.items[rng.random_range(0..self.items.len())];
                if t.entries.is_empty() {
                    return None;
                }
                let sample = &t.entries[rng.random_range(0..t.entries.len())];
                Some(SampleRef {
                    sample,
                    reward: t.reward,
                    terminal: t.terminal,
                })
            })
            .collect()
    }

    /// Copy of this buffer keeping only one agent's entries.
    pub fn for_agent(&self, agent: usize) -> ReplayBuffer {
        let mut out = ReplayBuffer::new(self.capacity);
        for t in &self.items {
            let entries: Vec<_> = t.entries.iter().filter(|e| e.agent == agent).cloned().collect();
            if !entries.is_empty() {
                out.push(Transition {
                    entries,
                    reward: t.reward,
                    terminal: t.terminal,
                });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tr(tag: usize, agents: usize) -> Transition {
        Transition {
            entries: (0..agents)
                .map(|a| AgentSample {
                    agent: a,
                    observation: vec![tag as f64],
                    action: a,
                    next_observation: vec![tag as f64 + 1.0],
                })
                .collect(),
            reward: -(tag as f64),
            terminal: false,
        }
    }

    #[test]
    fn keeps_last_capacity_in_order() {
        let mut b = ReplayBuffer::new(576);
        for k in 0..1000 {
            b.push(tr(k, 1));
        }
        assert_eq!(b.len(), 576);
        let tags: Vec<f64> = b.iter().map(|t| t.entries[0].observation[0]).collect();
        let expected: Vec<f64> = (424..1000).map(|k| k as f64).collect();
        assert_eq!(tags, expected);
    }

    #[test]
    fn sampling_is_seeded_and_covers_agents() {
        let mut b = ReplayBuffer::new(10);
        for k in 0..10 {
            b.push(tr(k, 5));
        }
        let mut r1 = ChaCha8Rng::seed_from_u64(1);
        let mut r2 = ChaCha8Rng::seed_from_u64(1);
        let s1: Vec<_> = b.sample(200, &mut r1).iter().map(|s| (s.sample.agent, s.reward)).collect();
        let s2: Vec<_> = b.sample(200, &mut r2).iter().map(|s| (s.sample.agent, s.reward)).collect();
        assert_eq!(s1, s2);
        for a in 0..5 {
            assert!(s1.iter().any(|&(x, _)| x == a));
        }
        assert!(ReplayBuffer::new(3).sample(5, &mut r1).is_empty());
    }

    #[test]
    fn split_by_agent() {
        let mut b = ReplayBuffer::new(10);
        for k in 0..4 {
            b.push(tr(k, 3));
        }
        let one = b.for_agent(1);
        assert_eq!(one.len(), 4);
        assert!(one.iter().all(|t| t.entries.len() == 1 && t.entries[0].agent == 1));
    }
}
