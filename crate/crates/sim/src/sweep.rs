//! Parameter sweeps and their CSV table.

use std::io::Write;
use std::str::FromStr;

use casku::par::Execution;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::engine::{run_scenario, Metrics};
use crate::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    NNuav,
    NCm,
    NCh,
    Bitrate,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::NNuav => "n_nuav",
            SweepParam::NCm => "n_cm",
            SweepParam::NCh => "n_ch",
            SweepParam::Bitrate => "bitrate",
        }
    }

    pub fn apply(self, cfg: &mut ScenarioConfig, v: u64) {
        match self {
            SweepParam::NNuav => cfg.n_nuav = v as usize,
            SweepParam::NCm => cfg.n_cm = v as usize,
            SweepParam::NCh => cfg.n_ch = v as usize,
            SweepParam::Bitrate => cfg.bitrate = v,
        }
    }
}

impl FromStr for SweepParam {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "n_nuav" => Ok(SweepParam::NNuav),
            "n_cm" => Ok(SweepParam::NCm),
            "n_ch" => Ok(SweepParam::NCh),
            "bitrate" => Ok(SweepParam::Bitrate),
            _ => Err(format!("unknown sweep parameter {s:?} (n_nuav, n_cm, n_ch, bitrate)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub scenario_id: String,
    pub cfg: ScenarioConfig,
}

/// One point per `(value, mam)`. Both protocol variants at a value share a
/// seed, so they run over identical credentials.
pub fn points(base: &ScenarioConfig, param: SweepParam, values: &[u64], mams: &[bool]) -> Vec<SweepPoint> {
    let mut out = Vec::with_capacity(values.len() * mams.len());
    for (i, &v) in values.iter().enumerate() {
        for &mam in mams {
            let mut cfg = base.clone();
            param.apply(&mut cfg, v);
            cfg.mam = mam;
            cfg.rng_seed = derive_seed(base.rng_seed, i as u64);
            let variant = if mam { "mam" } else { "base" };
            out.push(SweepPoint { scenario_id: format!("{}={v}/{variant}", param.name()), cfg });
        }
    }
    out
}

fn derive_seed(base: u64, i: u64) -> u64 {
    // splitmix64 step
    let mut z = base.wrapping_add(i.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub point: SweepPoint,
    pub metrics: Metrics,
}

/// Runs every point. The first failure, in point order, is returned.
pub fn run(points: Vec<SweepPoint>, exec: Execution) -> Result<Vec<SweepResult>, SimError> {
    exec.map(points, |point| run_scenario(&point.cfg).map(|metrics| SweepResult { point, metrics }))
        .into_iter()
        .collect()
}

#[derive(Serialize)]
struct CsvRow<'a> {
    #[serde(rename = "scenario-id")]
    scenario_id: &'a str,
    n_nuav: usize,
    n_cm: usize,
    n_ch: usize,
    bitrate: u64,
    mam: bool,
    latency_ms: f64,
    e_nuav_j: f64,
    e_cm_j: f64,
    e_ch_j: f64,
    e_otherch_j: f64,
    bytes_join: usize,
    bytes_keyupdate: usize,
}

pub fn write_csv<W: Write>(results: &[SweepResult], w: W) -> Result<(), csv::Error> {
    let mut wr = csv::Writer::from_writer(w);
    for r in results {
        let (c, m) = (&r.point.cfg, &r.metrics);
        wr.serialize(CsvRow {
            scenario_id: &r.point.scenario_id,
            n_nuav: c.n_nuav,
            n_cm: c.n_cm,
            n_ch: c.n_ch,
            bitrate: c.bitrate,
            mam: c.mam,
            latency_ms: m.join_latency_ms,
            e_nuav_j: m.e_nuav_j,
            e_cm_j: m.e_cm_j,
            e_ch_j: m.e_ch_j,
            e_otherch_j: m.e_otherch_j,
            bytes_join: m.bytes_join,
            bytes_keyupdate: m.bytes_keyupdate,
        })?;
    }
    wr.flush()?;
    Ok(())
}
