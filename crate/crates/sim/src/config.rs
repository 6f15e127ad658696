use casku::error::Mode;
use casku::group::Preset;
use casku::opcount::OpCounts;
use serde::{Deserialize, Serialize};

use crate::SimError;

/// Radio power draw per state, in mW. Radios never sleep and enter
/// transmitter mode only for their own bursts, so `sleep` and `tx_idle`
/// never accrue in the medium model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerModel {
    pub sleep: f64,
    pub rx_idle: f64,
    pub rx_busy: f64,
    pub rx_receiving: f64,
    pub tx_idle: f64,
    pub tx_transmitting: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        PowerModel { sleep: 0.0, rx_idle: 2.0, rx_busy: 5.0, rx_receiving: 100.0, tx_idle: 2.0, tx_transmitting: 300.0 }
    }
}

/// CPU time charged per primitive, in µs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProcDelays {
    pub t_me: f64,
    pub t_mm: f64,
    pub t_hf: f64,
    pub t_xor: f64,
    pub t_sss: f64,
}

impl Default for ProcDelays {
    fn default() -> Self {
        ProcDelays { t_me: 200.0, t_mm: 2.0, t_hf: 5.0, t_xor: 0.1, t_sss: 2.0 }
    }
}

impl ProcDelays {
    pub fn cost_ns(&self, c: &OpCounts) -> u64 {
        let us = c.t_me as f64 * self.t_me
            + c.t_mm as f64 * self.t_mm
            + c.t_hf as f64 * self.t_hf
            + c.t_xor as f64 * self.t_xor
            + c.t_sss as f64 * self.t_sss;
        (us * 1000.0).round() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupChoice {
    Tiny,
    Full,
}

impl GroupChoice {
    pub fn preset(self) -> Preset {
        match self {
            GroupChoice::Tiny => Preset::Tiny,
            GroupChoice::Full => Preset::Full,
        }
    }
}

impl std::str::FromStr for GroupChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tiny" => Ok(GroupChoice::Tiny),
            "full" => Ok(GroupChoice::Full),
            _ => Err(format!("unknown group {s:?} (expected tiny or full)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub n_nuav: usize,
    pub n_cm: usize,
    pub n_ch: usize,
    /// bits per second
    pub bitrate: u64,
    pub mam: bool,
    pub power: PowerModel,
    /// J
    pub initial_energy: f64,
    pub proc_delay_per_op: ProcDelays,
    pub link: LinkModel,
    /// Long enough for an unaggregated run at 1 Mb/s.
    pub freshness_window_ms: u64,
    /// Energy is integrated over at least this long.
    pub energy_window_ms: f64,
    pub rng_seed: u64,
    pub group: GroupChoice,
    pub paper_literal: bool,
    /// Run a session-key update over the enlarged roster after the join.
    pub key_update: bool,
    /// Track node positions. Nothing in the loss-free channel depends on
    /// them.
    pub mobility: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_nuav: 5,
            n_cm: 5,
            n_ch: 5,
            bitrate: 48_000_000,
            mam: true,
            power: PowerModel::default(),
            initial_energy: 0.01,
            proc_delay_per_op: ProcDelays::default(),
            link: LinkModel::default(),
            freshness_window_ms: 1000,
            energy_window_ms: 500.0,
            rng_seed: 1,
            group: GroupChoice::Full,
            paper_literal: false,
            key_update: true,
            mobility: false,
        }
    }
}

/// Framing and channel access around every payload. The default is an
/// OFDM 802.11 DCF exchange carrying UDP/IPv4 with no competing stations:
/// DIFS, the mean of a CWmin=15 backoff at 9 µs slots, PLCP preamble, and
/// for unicast frames SIFS plus an acknowledgement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkModel {
    /// MAC header, FCS, LLC/SNAP, IPv4 and UDP headers.
    pub header_bytes: usize,
    pub difs_us: f64,
    pub backoff_us: f64,
    pub preamble_us: f64,
    pub sifs_us: f64,
    pub ack_bytes: usize,
}

impl Default for LinkModel {
    fn default() -> Self {
        LinkModel { header_bytes: 24 + 4 + 8 + 20 + 8, difs_us: 34.0, backoff_us: 67.5, preamble_us: 20.0, sifs_us: 16.0, ack_bytes: 14 }
    }
}

impl LinkModel {
    /// Payload bits only, nothing else on the air.
    pub fn ideal() -> Self {
        LinkModel { header_bytes: 0, difs_us: 0.0, backoff_us: 0.0, preamble_us: 0.0, sifs_us: 0.0, ack_bytes: 0 }
    }

    fn times(&self) -> [f64; 4] {
        [self.difs_us, self.backoff_us, self.preamble_us, self.sifs_us]
    }
}

impl ScenarioConfig {
    pub fn mode(&self) -> Mode {
        if self.paper_literal {
            Mode::PaperLiteral
        } else {
            Mode::Hardened
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::ConfigInvalid(m.to_owned()));
        if self.bitrate == 0 {
            return bad("bitrate must be positive");
        }
        if self.n_cm == 0 {
            return bad("a cluster needs at least one member");
        }
        if self.n_ch == 0 {
            return bad("at least one cluster head is required");
        }
        if self.n_nuav + self.n_cm + self.n_ch > u16::MAX as usize {
            return bad("too many nodes");
        }
        let p = &self.power;
        let powers = [p.rx_idle, p.rx_busy, p.rx_receiving, p.tx_idle, p.tx_transmitting];
        if powers.iter().any(|v| !(v.is_finite() && *v > 0.0)) || !(p.sleep.is_finite() && p.sleep >= 0.0) {
            return bad("power draws must be positive");
        }
        let d = &self.proc_delay_per_op;
        if [d.t_me, d.t_mm, d.t_hf, d.t_xor, d.t_sss].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("per-operation delays must be non-negative");
        }
        if self.link.times().iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("link timings must be non-negative");
        }
        if !(self.energy_window_ms.is_finite() && self.energy_window_ms >= 0.0) {
            return bad("energy window must be non-negative");
        }
        if !(self.initial_energy.is_finite() && self.initial_energy > 0.0) {
            return bad("initial energy must be positive");
        }
        if self.group == GroupChoice::Tiny {
            // 10 distinct non-zero abscissas exist mod 11.
            if self.key_update && self.n_cm + self.n_nuav > 10 {
                return bad("tiny group cannot rekey more than 10 members");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_roundtrip_json() {
        let c = ScenarioConfig::default();
        c.validate().unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ScenarioConfig>(&s).unwrap(), c);
        let partial: ScenarioConfig = serde_json::from_str(r#"{"n_nuav": 3, "group": "tiny"}"#).unwrap();
        assert_eq!(partial.n_nuav, 3);
        assert_eq!(partial.n_cm, 5);
        assert!(serde_json::from_str::<ScenarioConfig>(r#"{"n_uav": 3}"#).is_err());
    }

    #[test]
    fn rejects_bad_values() {
        let base = ScenarioConfig::default();
        let cases = [
            ScenarioConfig { bitrate: 0, ..base.clone() },
            ScenarioConfig { n_cm: 0, ..base.clone() },
            ScenarioConfig { n_ch: 0, ..base.clone() },
            ScenarioConfig { group: GroupChoice::Tiny, n_cm: 6, n_nuav: 5, ..base.clone() },
            ScenarioConfig { link: LinkModel { sifs_us: -1.0, ..LinkModel::default() }, ..base.clone() },
            ScenarioConfig { power: PowerModel { rx_busy: 0.0, ..PowerModel::default() }, ..base.clone() },
        ];
        for c in cases {
            assert!(matches!(c.validate(), Err(SimError::ConfigInvalid(_))), "{c:?}");
        }
        ScenarioConfig { group: GroupChoice::Tiny, n_cm: 6, n_nuav: 5, key_update: false, ..base }.validate().unwrap();
    }

    #[test]
    fn cost_of_ops() {
        let d = ProcDelays::default();
        assert_eq!(d.cost_ns(&OpCounts::new(1, 1, 1, 10, 0)), 5_000 + 200_000 + 2_000 + 1_000);
        assert_eq!(d.cost_ns(&OpCounts::ZERO), 0);
    }
}
