//! Numerics for the PPO policy: MLP, Adam, GAE, clipped-surrogate updates.

pub mod adam;
pub mod checkpoint;
pub mod gae;
pub mod mlp;
pub mod ppo;

pub use adam::Adam;
pub use checkpoint::{Checkpoint, CheckpointError};
pub use gae::compute_gae;
pub use mlp::Mlp;
pub use ppo::{ActorCritic, PpoConfig, PpoError, PpoLearner, RolloutBuffer, Transition};
