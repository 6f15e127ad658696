//! Discrete-event simulation of cluster joins and key updates over a shared
//! radio medium, with a per-node energy account.

pub mod config;
pub mod energy;
pub mod engine;
pub mod honest;
pub mod mobility;
pub mod sweep;
pub mod swarm;

use casku::error::ProtocolError;
use casku::registry::RegistryError;
use casku::wire::WireError;

pub use config::ScenarioConfig;
pub use engine::{run_scenario, Metrics};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("protocol aborted: {0}")]
    ProtocolAbort(#[from] ProtocolError),
    #[error("registry: {0}")]
    Registry(#[from] RegistryError),
    #[error("undecodable frame: {0}")]
    Wire(#[from] WireError),
    #[error("simulation invariant broken: {0}")]
    Unexpected(&'static str),
}
