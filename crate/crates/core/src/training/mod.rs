//! Episode management, the multi-phase training protocol and evaluation.

mod config;
mod env;
mod episode;
pub mod metrics;
mod pool;
mod trainer;

pub use config::{
    BuildingSource, EnvironmentConfig, MetricsConfig, PretrainingMode, ScheduleSource,
    TrainingConfig,
};
pub use env::{Environment, StepFeedback};
pub use episode::{run_episode, ControlPlan, EpisodeSettings, EpsilonProfile, LearnSettings};
pub use metrics::{EpisodeMetrics, Phase, StepRecord};
pub use pool::{AgentPool, CheckpointEntry, CheckpointManifest};
pub use trainer::{
    compare, evaluate, Comparison, EvaluationResult, NoObserver, Trainer, TrainingObserver,
    TrainingOutcome,
};
