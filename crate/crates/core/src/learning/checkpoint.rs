//! Versioned JSON checkpoint of the actor and critic parameter vectors.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::mlp::Mlp;
use super::ppo::{ActorCritic, PpoConfig};

pub const FORMAT: &str = "legalsim-ppo";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("not a {FORMAT} v{VERSION} checkpoint (found {format} v{version})")]
    Format { format: String, version: u32 },
    #[error("checkpoint dimensions {found:?} do not match expected {expected:?}")]
    Dimensions { found: (usize, usize), expected: (usize, usize) },
    #[error("checkpoint parameter vector has the wrong length or non-finite entries")]
    Params,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub obs_dim: usize,
    pub n_actions: usize,
    pub hidden: usize,
    /// Hash of the environment config the network was trained under.
    pub config_hash: String,
    pub ppo: PpoConfig,
    pub episodes: u64,
    pub actor: Vec<f64>,
    pub critic: Vec<f64>,
}

impl Checkpoint {
    pub fn from_net(net: &ActorCritic, ppo: &PpoConfig, config_hash: &str, episodes: u64) -> Self {
        Checkpoint {
            format: FORMAT.to_string(),
            version: VERSION,
            obs_dim: net.actor.input_dim(),
            n_actions: net.actor.output_dim(),
            hidden: ppo.hidden,
            config_hash: config_hash.to_string(),
            ppo: ppo.clone(),
            episodes,
            actor: net.actor_params.clone(),
            critic: net.critic_params.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    /// Parses and checks format, version and dimensions.
    pub fn from_json(text: &str, obs_dim: usize, n_actions: usize) -> Result<Self, CheckpointError> {
        let ck: Checkpoint = serde_json::from_str(text)?;
        if ck.format != FORMAT || ck.version != VERSION {
            return Err(CheckpointError::Format { format: ck.format, version: ck.version });
        }
        if (ck.obs_dim, ck.n_actions) != (obs_dim, n_actions) {
            return Err(CheckpointError::Dimensions {
                found: (ck.obs_dim, ck.n_actions),
                expected: (obs_dim, n_actions),
            });
        }
        ck.net()?;
        Ok(ck)
    }

    pub fn net(&self) -> Result<ActorCritic, CheckpointError> {
        let actor = Mlp::new(&[self.obs_dim, self.hidden, self.hidden, self.n_actions]);
        let critic = Mlp::new(&[self.obs_dim, self.hidden, self.hidden, 1]);
        let finite = self.actor.iter().chain(&self.critic).all(|p| p.is_finite());
        if actor.num_params() != self.actor.len() || critic.num_params() != self.critic.len() || !finite {
            return Err(CheckpointError::Params);
        }
        Ok(ActorCritic::from_parts(actor, critic, self.actor.clone(), self.critic.clone()))
    }
}
