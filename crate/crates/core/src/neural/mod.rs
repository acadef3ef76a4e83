//! Fully connected Q-network with layer normalization, explicit
//! backpropagation and Adam.

mod adam;
pub mod checkpoint;
pub mod gradcheck;
mod network;

pub use adam::AdamState;
pub use checkpoint::{load_network, save_network, Checkpoint};
pub use network::{Architecture, QNetwork, LAYER_NORM_EPS};
