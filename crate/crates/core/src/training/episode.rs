//! One pass over the simulated period under a given control plan.

use std::time::Instant;

use rand::Rng;

use crate::agents::{action_to_setpoint, build_observation, AgentSample, RuleBasedAgent, Transition, Variant};
use crate::error::{Error, Result};

use super::env::Environment;
use super::metrics::{EpisodeMetrics, Phase, StepRecord};
use super::pool::AgentPool;

/// Who sets each zone's setpoint.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlPlan {
    /// Every zone follows the rule-based schedule.
    Baseline,
    /// Zones with an agent in the pool are agent-controlled, the rest
    /// follow the rule.
    Agents,
    /// The agent of `leader` decides one setpoint that is applied to every
    /// zone in `zones`; other zones follow the rule.
    Broadcast { leader: usize, zones: Vec<usize> },
}

/// Learning hyperparameters used when an episode trains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnSettings {
    pub gamma: f64,
    pub batch_size: usize,
    pub learn_start: usize,
    pub variant: Variant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSettings {
    pub phase: Phase,
    pub episode: usize,
    pub steps: usize,
    /// ε at each step; index = step.
    pub epsilon: EpsilonProfile,
    pub lr: f64,
    pub learn: Option<LearnSettings>,
    pub keep_trace: bool,
}

/// Linear ε over the episode, from `start` at step 0 to `end` after the
/// last step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonProfile {
    pub start: f64,
    pub end: f64,
}

impl EpsilonProfile {
    pub fn constant(epsilon: f64) -> Self {
        EpsilonProfile {
            start: epsilon,
            end: epsilon,
        }
    }

    fn at(&self, step: usize, steps: usize) -> f64 {
        if self.start == self.end {
            return self.start;
        }
        let f = step as f64 / steps as f64;
        (1.0 - f) * self.start + f * self.end
    }
}

/// Callback invoked after every simulated step.
pub type StepHook<'a> = &'a mut dyn FnMut(&StepRecord);

pub fn run_episode<R: Rng>(
    env: &mut Environment,
    plan: &ControlPlan,
    mut pool: Option<&mut AgentPool>,
    settings: &EpisodeSettings,
    rng: &mut R,
    mut on_step: Option<StepHook<'_>>,
) -> Result<EpisodeMetrics> {
    let started = Instant::now();
    let n = env.n_zones();
    let rule = RuleBasedAgent::default();
    if settings.steps > env.horizon() {
        return Err(Error::Config(format!(
            "episode of {} steps exceeds {} hours of weather",
            settings.steps,
            env.horizon()
        )));
    }
    if settings.learn.is_some() && pool.is_none() {
        return Err(Error::Config("learning episode without agents".into()));
    }
    // Zones whose agent picks an action this step.
    let acting: Vec<usize> = match (plan, pool.as_deref()) {
        (ControlPlan::Baseline, _) | (_, None) => Vec::new(),
        (ControlPlan::Agents, Some(p)) => p.zones().collect(),
        (ControlPlan::Broadcast { leader, .. }, Some(p)) => {
            if !p.controls(*leader) {
                return Err(Error::Config(format!("broadcast leader {leader} has no agent")));
            }
            vec![*leader]
        }
    };
    if acting.iter().any(|&z| z >= n) {
        return Err(Error::Config("agent assigned to a missing zone".into()));
    }

    let mut metrics = EpisodeMetrics::new(settings.phase, settings.episode, n);
    metrics.epsilon = settings.epsilon.start;
    metrics.lr = settings.lr;

    env.reset();
    let mut state = env.global_state()?;
    for step in 0..settings.steps {
        let wrap = |e: Error| e.at_step(step);
        let epsilon = settings.epsilon.at(step, settings.steps);
        let time = env.time();
        let mut setpoints = vec![rule.setpoint(&time); n];
        let mut actions = vec![None; n];
        let mut observations = Vec::with_capacity(acting.len());
        if let Some(p) = pool.as_deref() {
            for &zone in &acting {
                let obs = build_observation(&state, zone).map_err(wrap)?;
                let action = p
                    .learner(zone)
                    .and_then(|l| l.select_action(&obs, epsilon, rng))
                    .map_err(wrap)?;
                let sp = action_to_setpoint(action).map_err(wrap)?;
                match plan {
                    ControlPlan::Broadcast { zones, .. } => {
                        for &z in zones {
                            setpoints[z] = sp;
                            actions[z] = Some(action);
                        }
                    }
                    _ => {
                        setpoints[zone] = sp;
                        actions[zone] = Some(action);
                    }
                }
                observations.push((zone, obs, action));
            }
        }

        let feedback = env.step(&setpoints).map_err(wrap)?;
        let next_state = env.global_state().map_err(wrap)?;
        let terminal = step + 1 == settings.steps;

        if let (Some(learn), Some(p)) = (settings.learn, pool.as_deref_mut()) {
            let mut per_learner: Vec<Vec<AgentSample>> = vec![Vec::new(); p.learners().len()];
            for (zone, obs, action) in observations {
                let next = build_observation(&next_state, zone).map_err(wrap)?;
                let idx = p.learner_index(zone).expect("acting zone has a learner");
                per_learner[idx].push(AgentSample {
                    agent: zone,
                    observation: obs.to_vec(),
                    action,
                    next_observation: next.to_vec(),
                });
            }
            for (learner, entries) in p.learners_mut().iter_mut().zip(per_learner) {
                if entries.is_empty() {
                    continue;
                }
                learner.buffer.push(Transition {
                    entries,
                    reward: feedback.reward,
                    terminal,
                });
                if learner.buffer.len() >= learn.learn_start {
                    learner.learn_step(learn.batch_size, learn.gamma, settings.lr, learn.variant, rng);
                    metrics.learn_steps += 1;
                    if !learner.online.all_finite() {
                        return Err(Error::Divergence {
                            episode: settings.episode,
                            step,
                        });
                    }
                }
            }
        }

        let record = StepRecord {
            hour: env.hour() - 1,
            e_all: feedback.e_all,
            e_flat: feedback.e_flat,
            complaints: feedback.complaints,
            reward: feedback.reward,
            actions,
            setpoints,
            temperatures: feedback.temperatures,
        };
        if let Some(hook) = on_step.as_mut() {
            hook(&record);
        }
        metrics.record(&record, &feedback.zone_energy, settings.keep_trace);
        state = next_state;
    }
    metrics.finish();
    metrics.seconds = started.elapsed().as_secs_f64();
    Ok(metrics)
}
