//! The three-phase training protocol and evaluation runs.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agents::Learner;
use crate::calendar::HOURS_PER_DAY;
use crate::error::Result;

use super::config::{PretrainingMode, TrainingConfig};
use super::env::Environment;
use super::episode::{run_episode, ControlPlan, EpisodeSettings, EpsilonProfile, LearnSettings};
use super::metrics::{EpisodeMetrics, Phase, StepLogWriter, StepRecord, SummaryWriter, TimingWriter};
use super::pool::AgentPool;

const EXPLORATION_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// Hooks into a training run. Every method defaults to doing nothing.
pub trait TrainingObserver {
    fn on_step(&mut self, _phase: Phase, _episode: usize, _record: &StepRecord) {}
    fn on_episode(&mut self, _metrics: &EpisodeMetrics, _pool: &mut AgentPool) {}
    fn on_phase_start(&mut self, _phase: Phase, _pool: &mut AgentPool) {}
    fn on_phase_end(&mut self, _phase: Phase, _pool: &mut AgentPool) {}
}

pub struct NoObserver;

impl TrainingObserver for NoObserver {}

#[derive(Debug)]
pub struct TrainingOutcome {
    pub pool: AgentPool,
    pub episodes: Vec<EpisodeMetrics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationResult {
    pub e_total: f64,
    pub m_total: f64,
    pub zone_energy: Vec<f64>,
    pub zone_complaints: Vec<f64>,
    pub trace: Vec<StepRecord>,
}

impl From<EpisodeMetrics> for EvaluationResult {
    fn from(m: EpisodeMetrics) -> Self {
        EvaluationResult {
            e_total: m.e_total,
            m_total: m.m_total,
            zone_energy: m.zone_energy,
            zone_complaints: m.zone_complaints,
            trace: m.trace,
        }
    }
}

/// Runs the configured protocol on its own world. Independent trainers
/// share nothing mutable and may run on separate threads.
pub struct Trainer {
    config: TrainingConfig,
    env: Environment,
    rng: ChaCha8Rng,
    output: Option<PathBuf>,
    episode: usize,
    since_target_update: usize,
    summary: Option<SummaryWriter>,
    timing: Option<TimingWriter>,
    step_log: Option<StepLogWriter>,
}

impl Trainer {
    pub fn new(config: TrainingConfig) -> Result<Self> {
        config.validate()?;
        let env = Environment::from_config(&config)?;
        let rng = ChaCha8Rng::seed_from_u64(config.seed ^ EXPLORATION_STREAM);
        Ok(Trainer {
            config,
            env,
            rng,
            output: None,
            episode: 0,
            since_target_update: 0,
            summary: None,
            timing: None,
            step_log: None,
        })
    }

    /// Write `summary.csv`, `timing.csv`, optional `steps.jsonl` and
    /// checkpoints under `dir`.
    pub fn with_output(mut self, dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        self.summary = Some(SummaryWriter::create(
            dir.join("summary.csv"),
            self.config.metrics.wall_clock,
        )?);
        self.timing = Some(TimingWriter::create(dir.join("timing.csv"))?);
        if self.config.metrics.step_log_every > 0 {
            self.step_log = Some(StepLogWriter::create(dir.join("steps.jsonl"))?);
        }
        self.output = Some(dir);
        Ok(self)
    }

    pub fn config(&self) -> &TrainingConfig {
        &self.config
    }

    pub fn environment(&self) -> &Environment {
        &self.env
    }

    fn steps_per_episode(&self) -> usize {
        self.config.environment.episode_days * HOURS_PER_DAY
    }

    fn learn_settings(&self) -> LearnSettings {
        LearnSettings {
            gamma: self.config.gamma,
            batch_size: self.config.batch_size,
            learn_start: self.config.learn_start,
            variant: self.config.variant,
        }
    }

    fn controlled_zones(&self) -> Vec<usize> {
        self.config.environment.controlled(self.env.n_zones())
    }

    fn fresh_learner(&self) -> Result<Learner> {
        Learner::new(
            self.config.network.clone(),
            self.config.seed,
            self.config.buffer_capacity,
        )
    }

    /// Runs `episodes` training episodes of one phase. ε anneals over the
    /// phase per the config (held at its final value in the individual
    /// phase); the learning rate steps over the phase.
    fn run_phase(
        &mut self,
        phase: Phase,
        episodes: usize,
        plan: &ControlPlan,
        pool: &mut AgentPool,
        observer: &mut dyn TrainingObserver,
        history: &mut Vec<EpisodeMetrics>,
    ) -> Result<()> {
        observer.on_phase_start(phase, pool);
        let steps = self.steps_per_episode();
        let eps = self.config.epsilon;
        let lr = self.config.learning_rate.clone();
        for k in 0..episodes {
            let (epsilon, rate) = match phase {
                Phase::Individual => (EpsilonProfile::constant(eps.end), lr.final_value()),
                _ => {
                    let from = k as f64 / episodes as f64;
                    let to = (k + 1) as f64 / episodes as f64;
                    (
                        EpsilonProfile {
                            start: eps.value(from),
                            end: eps.value(to),
                        },
                        lr.value(from),
                    )
                }
            };
            self.episode += 1;
            let keep_trace = self.step_log.is_some()
                && self.episode % self.config.metrics.step_log_every == 0;
            let settings = EpisodeSettings {
                phase,
                episode: self.episode,
                steps,
                epsilon,
                lr: rate,
                learn: Some(self.learn_settings()),
                keep_trace,
            };
            let episode_no = self.episode;
            let mut hook = |r: &StepRecord| observer.on_step(phase, episode_no, r);
            let mut metrics = run_episode(
                &mut self.env,
                plan,
                Some(pool),
                &settings,
                &mut self.rng,
                Some(&mut hook),
            )?;

            self.since_target_update += 1;
            if self.since_target_update == self.config.target_update_episodes {
                pool.update_targets();
                self.since_target_update = 0;
                metrics.target_updated = true;
            }
            if let Some(s) = self.summary.as_mut() {
                s.write(&metrics)?;
            }
            if let Some(t) = self.timing.as_mut() {
                t.write(&metrics)?;
            }
            if let Some(log) = self.step_log.as_mut() {
                if keep_trace {
                    log.write_episode(&metrics)?;
                }
            }
            observer.on_episode(&metrics, pool);
            metrics.trace = Vec::new();
            history.push(metrics);
        }
        observer.on_phase_end(phase, pool);
        self.checkpoint(phase.as_str(), pool)
    }

    fn checkpoint(&self, name: &str, pool: &AgentPool) -> Result<()> {
        if let (Some(dir), true) = (&self.output, self.config.metrics.checkpoints) {
            pool.save_checkpoints(&dir.join("checkpoints").join(name))?;
        }
        Ok(())
    }

    /// Single agent whose setpoint is applied to every controlled zone.
    pub fn pretrain_broadcast(
        &mut self,
        observer: &mut dyn TrainingObserver,
        history: &mut Vec<EpisodeMetrics>,
    ) -> Result<Learner> {
        let zones = self.controlled_zones();
        let leader = zones[0];
        let mut pool = AgentPool::single(self.fresh_learner()?, leader);
        let plan = ControlPlan::Broadcast { leader, zones };
        let episodes = self.config.pretraining_episodes;
        self.run_phase(Phase::Pretraining, episodes, &plan, &mut pool, observer, history)?;
        Ok(pool.into_first_learner())
    }

    /// One learning agent on the first controlled zone, rule-based control
    /// everywhere else.
    pub fn pretrain_partial_rule_based(
        &mut self,
        observer: &mut dyn TrainingObserver,
        history: &mut Vec<EpisodeMetrics>,
    ) -> Result<Learner> {
        let leader = self.controlled_zones()[0];
        let mut pool = AgentPool::single(self.fresh_learner()?, leader);
        let episodes = self.config.pretraining_episodes;
        self.run_phase(
            Phase::Pretraining,
            episodes,
            &ControlPlan::Agents,
            &mut pool,
            observer,
            history,
        )?;
        Ok(pool.into_first_learner())
    }

    /// Optional pretraining, shared-parameter main training, then
    /// individual fine-tuning.
    pub fn train(&mut self, observer: &mut dyn TrainingObserver) -> Result<TrainingOutcome> {
        let mut history = Vec::with_capacity(self.config.total_episodes());
        let learner = match self.config.pretraining {
            PretrainingMode::None => self.fresh_learner()?,
            PretrainingMode::Broadcast => self.pretrain_broadcast(observer, &mut history)?,
            PretrainingMode::PartialRuleBased => {
                self.pretrain_partial_rule_based(observer, &mut history)?
            }
        };

        // Every agent starts from (and during this phase, is) the same network.
        let zones = self.controlled_zones();
        let mut pool = AgentPool::shared(learner, &zones);
        let main = self.config.effective_main_episodes();
        self.run_phase(Phase::Main, main, &ControlPlan::Agents, &mut pool, observer, &mut history)?;

        pool.individualize();
        self.checkpoint("individual_start", &pool)?;
        let individual = self.config.individual_episodes;
        self.run_phase(
            Phase::Individual,
            individual,
            &ControlPlan::Agents,
            &mut pool,
            observer,
            &mut history,
        )?;

        if let Some(s) = self.summary.as_mut() {
            s.flush()?;
        }
        if let Some(t) = self.timing.as_mut() {
            t.flush()?;
        }
        if let Some(log) = self.step_log.as_mut() {
            log.flush()?;
        }
        Ok(TrainingOutcome {
            pool,
            episodes: history,
        })
    }

    pub fn output_dir(&self) -> Option<&Path> {
        self.output.as_deref()
    }
}

/// Greedy, non-learning rollout over the first `days` days. With `pool`
/// `None` (or a baseline plan) every zone follows the rule.
pub fn evaluate(
    env: &mut Environment,
    plan: &ControlPlan,
    pool: Option<&AgentPool>,
    days: usize,
) -> Result<EvaluationResult> {
    let mut owned = pool.cloned();
    let settings = EpisodeSettings {
        phase: Phase::Evaluation,
        episode: 0,
        steps: days * HOURS_PER_DAY,
        epsilon: EpsilonProfile::constant(0.0),
        lr: 0.0,
        learn: None,
        keep_trace: true,
    };
    // ε = 0 never consults the generator's output for exploration.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let m = run_episode(env, plan, owned.as_mut(), &settings, &mut rng, None)?;
    Ok(m.into())
}

/// Relative comparison of an evaluated policy against the baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    /// (E_base − E_agent) / E_base, as a percentage.
    pub energy_savings_pct: f64,
    /// M_agent / M_base.
    pub complaints_ratio: f64,
}

pub fn compare(agent: (f64, f64), baseline: (f64, f64)) -> Comparison {
    let (e_agent, m_agent) = agent;
    let (e_base, m_base) = baseline;
    let complaints_ratio = if m_base == 0.0 {
        if m_agent == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        m_agent / m_base
    };
    Comparison {
        energy_savings_pct: 100.0 * (e_base - e_agent) / e_base,
        complaints_ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::StepSchedule;
    use crate::neural::Architecture;

    fn tiny(mode: PretrainingMode) -> TrainingConfig {
        let mut c = TrainingConfig::desk();
        c.pretraining = mode;
        c.network = Architecture {
            hidden_dims: vec![8],
            ..Architecture::default()
        };
        c.batch_size = 16;
        c.learn_start = 16;
        c.pretraining_episodes = 2;
        c.main_episodes = 2;
        c.individual_episodes = 1;
        c.learning_rate = StepSchedule {
            values: vec![1e-3],
            milestones: vec![],
        };
        c.environment.episode_days = 2;
        c.environment.eval_days = 1;
        c.metrics.checkpoints = false;
        c
    }

    struct Recorder(Vec<(Phase, StepRecord)>);

    impl TrainingObserver for Recorder {
        fn on_step(&mut self, phase: Phase, _episode: usize, record: &StepRecord) {
            self.0.push((phase, record.clone()));
        }
    }

    #[test]
    fn january_episode_has_744_steps() {
        let c = TrainingConfig::desk();
        let mut env = Environment::from_config(&c).unwrap();
        let r = evaluate(&mut env, &ControlPlan::Baseline, None, c.environment.episode_days).unwrap();
        assert_eq!(r.trace.len(), 744);
        let week = evaluate(&mut env, &ControlPlan::Baseline, None, 7).unwrap();
        assert_eq!(week.trace.len(), 168);
        let again = evaluate(&mut env, &ControlPlan::Baseline, None, 7).unwrap();
        assert_eq!(week, again);
        assert!(week.e_total > 0.0 && week.m_total >= 0.0);
    }

    #[test]
    fn phases_run_in_order_with_expected_lengths() {
        let mut t = Trainer::new(tiny(PretrainingMode::Broadcast)).unwrap();
        let out = t.train(&mut NoObserver).unwrap();
        let phases: Vec<Phase> = out.episodes.iter().map(|m| m.phase).collect();
        use Phase::*;
        assert_eq!(phases, [Pretraining, Pretraining, Main, Main, Individual]);
        assert!(out.episodes.iter().all(|m| m.steps == 48));
        assert_eq!(out.pool.n_agents(), 5);
        // Target updates every second episode, counted across phases.
        let updated: Vec<bool> = out.episodes.iter().map(|m| m.target_updated).collect();
        assert_eq!(updated, [false, true, false, true, false]);

        let mut none = Trainer::new(tiny(PretrainingMode::None)).unwrap();
        let out = none.train(&mut NoObserver).unwrap();
        assert_eq!(out.episodes.len(), 4 + 1);
        assert!(out.episodes[..4].iter().all(|m| m.phase == Main));
    }

    #[test]
    fn broadcast_pretraining_applies_one_setpoint_everywhere() {
        let mut t = Trainer::new(tiny(PretrainingMode::Broadcast)).unwrap();
        let mut rec = Recorder(Vec::new());
        t.train(&mut rec).unwrap();
        let pre: Vec<_> = rec.0.iter().filter(|(p, _)| *p == Phase::Pretraining).collect();
        assert_eq!(pre.len(), 2 * 48);
        for (_, r) in pre {
            assert!(r.setpoints.iter().all(|&s| s == r.setpoints[0]));
        }
    }

    #[test]
    fn partial_rule_pretraining_keeps_other_zones_on_the_rule() {
        let mut t = Trainer::new(tiny(PretrainingMode::PartialRuleBased)).unwrap();
        let mut rec = Recorder(Vec::new());
        t.train(&mut rec).unwrap();
        for (_, r) in rec.0.iter().filter(|(p, _)| *p == Phase::Pretraining) {
            assert!(r.actions[0].is_some());
            for z in 1..5 {
                assert!(r.actions[z].is_none());
                assert!(r.setpoints[z] == 15.0 || r.setpoints[z] == 21.0);
            }
        }
    }

    #[test]
    fn reward_in_trace_matches_reward_function() {
        let mut t = Trainer::new(tiny(PretrainingMode::None)).unwrap();
        let mut rec = Recorder(Vec::new());
        t.train(&mut rec).unwrap();
        let cfg = crate::reward::RewardConfig::default();
        for (_, r) in &rec.0 {
            let want = crate::reward::compute_reward(r.e_all, &r.complaints, &cfg);
            assert_eq!(r.reward, want);
        }
    }

    #[test]
    fn comparison_axes() {
        let c = compare((90.0, 12.0), (100.0, 10.0));
        assert!((c.energy_savings_pct - 10.0).abs() < 1e-12);
        assert!((c.complaints_ratio - 1.2).abs() < 1e-12);
        let same = compare((100.0, 10.0), (100.0, 10.0));
        assert_eq!((same.energy_savings_pct, same.complaints_ratio), (0.0, 1.0));
    }
}
