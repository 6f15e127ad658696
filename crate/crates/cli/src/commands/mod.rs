mod attack;
mod demo;
mod keyupdate;
mod overhead;
mod sweep;

pub use attack::attack;
pub use demo::demo;
pub use keyupdate::keyupdate;
pub use overhead::overhead;
pub use sweep::sweep;

use casku::error::ProtocolConfig;
use casku::group::GroupParams;
use casku_sim::ScenarioConfig;

fn group(cfg: &ScenarioConfig) -> GroupParams {
    GroupParams::preset(cfg.group.preset())
}

/// Honest protocol runs outside the simulator use the protocol's own
/// freshness window.
fn protocol_config(cfg: &ScenarioConfig) -> ProtocolConfig {
    ProtocolConfig { mode: cfg.mode(), ..ProtocolConfig::default() }
}
