//! Zone agents: observations, replay memory, exploration and learning-rate
//! schedules, DQN/DDQN learners and the rule-based baseline.

mod baseline;
mod dqn;
pub mod observation;
mod replay;
mod schedule;

pub use baseline::RuleBasedAgent;
pub use dqn::{action_to_setpoint, argmax, Learner, Variant, N_ACTIONS, SETPOINT_STEP};
pub use observation::{build_observation, GlobalState, ZoneReading, OBSERVATION_DIM};
pub use replay::{AgentSample, ReplayBuffer, SampleRef, Transition};
pub use schedule::{LinearSchedule, StepSchedule};
