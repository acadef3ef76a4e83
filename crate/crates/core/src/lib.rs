//! Multi-agent deep Q-learning for heating-setpoint control of a multi-zone
//! office building.
//!
//! The crate bundles a lumped RC building simulator, weekly occupancy
//! schedules, the energy/complaint reward, a small from-scratch Q-network,
//! DQN/DDQN agents with a rule-based baseline, and the three-phase training
//! pipeline (pretraining, shared-parameter main training, individual
//! fine-tuning).

pub mod agents;
pub mod calendar;
mod error;
pub mod neural;
pub mod occupancy;
pub mod reward;
pub mod sim;
pub mod training;

pub use error::{Error, Result};
