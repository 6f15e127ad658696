//! Untimed end-to-end runs of every phase, used for completeness checks.

use casku::block::Timestamp;
use casku::cross_cluster::{dest_ch_verify_transfer, expected_new_pid, source_ch_build_transfer};
use casku::error::{ProtocolConfig, ProtocolError};
use casku::group::GroupParams;
use casku::join::{
    ch_aggregate, ch_collect_and_verify, ch_finalize, cm_verify_and_respond, nuav_build_request, nuav_verify_ch,
    peer_ch_verify, JoinRequest, PeerAck,
};
use casku::key_update;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::swarm::Swarm;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WorkflowReport {
    /// Every accept decision taken along the way.
    pub verifications: usize,
    pub nuavs_admitted: usize,
    pub transferred: bool,
    /// Whether the enlarged roster fitted in the group and was rekeyed.
    pub post_join_rekey: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum WorkflowError {
    #[error("protocol: {0}")]
    Protocol(#[from] ProtocolError),
    #[error("registry: {0}")]
    Registry(#[from] casku::registry::RegistryError),
    #[error("{0}")]
    Disagreement(&'static str),
}

fn rekey(sw: &mut Swarm, t: Timestamp, cfg: &ProtocolConfig, rng: &mut ChaCha20Rng) -> Result<usize, WorkflowError> {
    let (key, keys) = key_update::run_honest(&sw.gp, &sw.ch, t, t, cfg, rng)?;
    if keys.iter().any(|k| *k != key) {
        return Err(WorkflowError::Disagreement("members reconstructed different keys"));
    }
    sw.net.record_key(sw.ch.cluster, key)?;
    for cm in &mut sw.cms {
        cm.key = key;
    }
    sw.refresh()?;
    Ok(keys.len())
}

/// Rekey of the `n_cm` members, aggregated join of `n_nuav` NUAVs, transfer
/// of one admitted NUAV to another cluster (when there is one), then a rekey
/// of the resulting roster when the group has room for it.
pub fn run_workflow(
    gp: &GroupParams,
    n_nuav: usize,
    n_cm: usize,
    n_ch: usize,
    cfg: &ProtocolConfig,
    seed: u64,
) -> Result<WorkflowReport, WorkflowError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut sw = Swarm::build(gp, n_nuav, n_cm, n_ch, &mut rng)?;
    let mut rep = WorkflowReport::default();

    rep.verifications += rekey(&mut sw, Timestamp(10), cfg, &mut rng)?;

    let reqs: Vec<JoinRequest> = sw.nuavs.iter().map(|n| nuav_build_request(gp, n, &mut rng)).collect();
    let t1 = Timestamp(1_000);
    let (mut st, chals) = ch_aggregate(gp, &sw.ch, &reqs, t1, &mut rng)?;
    let m = n_cm as u64;
    let mut resps = Vec::with_capacity(n_cm);
    for (l, (cm, chal)) in sw.cms.iter().zip(&chals).enumerate() {
        resps.push((l, cm_verify_and_respond(gp, cm, &sw.ch.pid, m, chal, Timestamp(1_005), cfg)?));
        rep.verifications += 1;
    }
    let bc = ch_collect_and_verify(gp, &sw.ch, &mut st, &resps, m, Timestamp(1_010), Timestamp(1_010), cfg)?;
    rep.verifications += 1;
    let acks: Vec<PeerAck> =
        sw.peers.iter().map(|p| peer_ch_verify(gp, p, &bc, m * m, Timestamp(1_015), cfg)).collect::<Result<_, _>>()?;
    rep.verifications += acks.len();
    let peer_pids = sw.peer_pids();
    let confs = ch_finalize(gp, &sw.ch, &st, &acks, &peer_pids, &mut sw.net, Timestamp(1_020), cfg)?;
    rep.verifications += 1;
    for (n, c) in sw.nuavs.iter().zip(&confs) {
        if !nuav_verify_ch(gp, n, c) {
            return Err(WorkflowError::Disagreement("NUAV rejected its cluster head"));
        }
        rep.verifications += 1;
    }
    rep.nuavs_admitted = confs.len();
    sw.refresh()?;

    if let (Some(dest), Some(mover)) = (sw.peers.first().cloned(), sw.nuavs.first()) {
        let t3 = Timestamp(2_000);
        let req = source_ch_build_transfer(&sw.ch, &mover.pid, t3)?;
        let new_pid = dest_ch_verify_transfer(&dest, &mut sw.net, &req, Timestamp(2_003), cfg)?;
        if new_pid != expected_new_pid(&mover.pid, t3, &sw.ch.ct, cfg.mode) {
            return Err(WorkflowError::Disagreement("source and destination derived different pseudonyms"));
        }
        rep.verifications += 1;
        rep.transferred = true;
        sw.refresh()?;
    }

    let roster = sw.ch.members.len();
    if !gp.is_tiny() || (roster as u64) < small_q(gp) {
        rep.verifications += rekey(&mut sw, Timestamp(3_000), cfg, &mut rng)?;
        rep.post_join_rekey = true;
    }
    Ok(rep)
}

fn small_q(gp: &GroupParams) -> u64 {
    gp.q().iter_u64_digits().next().unwrap_or(0)
}
