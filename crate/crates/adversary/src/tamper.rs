//! Exhaustive single-bit tampering at tiny scale.
//!
//! One honest pipeline (join with two NUAVs, three members and two peer
//! CHs, one transfer, one rekey) is replayed once per bit of every encoded
//! message. The flipped copy is decoded and delivered in place of the
//! original. A flip counts as rejected if decoding fails or any later check
//! refuses; a member that answers with the fallback result is a refusal.

use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use casku::block::{xor32, Block32, Timestamp};
use casku::cross_cluster::{dest_ch_verify_transfer, source_ch_build_transfer};
use casku::error::ProtocolConfig;
use casku::group::GroupParams;
use casku::join::{
    ch_aggregate, ch_collect_and_verify, ch_finalize, cm_verify_and_respond, fallback_result, nuav_build_request,
    nuav_verify_ch, peer_ch_verify,
};
use casku::key_update::{cm_reconstruct, cm_recover_and_share, Dealer, KeyUpdateInit};
use casku::par::Execution;
use casku::registry::GbsNetwork;
use casku::wire::Wire;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MsgKind {
    JoinRequest,
    AggregateChallenge,
    CmResponse,
    PeerBroadcast,
    PeerAck,
    NuavConfirm,
    TransferRequest,
    KeyUpdateInit,
    ShareEnvelope,
}

impl fmt::Display for MsgKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flip {
    pub kind: MsgKind,
    pub instance: usize,
    pub bit: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Accepted,
    Rejected(&'static str),
}

const N_NUAV: usize = 2;
const N_CM: usize = 3;
const N_PEER: usize = 2;

struct Run {
    flip: Option<Flip>,
    sizes: Vec<(MsgKind, usize, usize)>,
}

impl Run {
    fn pass<T: Wire>(&mut self, gp: &GroupParams, kind: MsgKind, instance: usize, msg: T) -> Result<T, &'static str> {
        let mut bytes = msg.encode(gp);
        self.sizes.push((kind, instance, bytes.len()));
        match self.flip {
            Some(f) if f.kind == kind && f.instance == instance => {
                bytes[f.bit / 8] ^= 1 << (f.bit % 8);
                T::decode(gp, &bytes).map_err(|_| "decode")
            }
            _ => Ok(msg),
        }
    }
}

fn pipeline(seed: u64, run: &mut Run) -> Result<(), &'static str> {
    let gp = GroupParams::tiny();
    let cfg = ProtocolConfig::default();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let setup = "setup";
    let mut net = GbsNetwork::setup(&gp, 1, &mut rng).map_err(|_| setup)?;
    let a = net.register_ch(0, b"a", &mut rng).map_err(|_| setup)?;
    let peers = (0..N_PEER)
        .map(|i| net.register_ch(0, format!("p{i}").as_bytes(), &mut rng))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| setup)?;
    let cms = (0..N_CM)
        .map(|i| net.register_cm(a.cluster, format!("m{i}").as_bytes(), &mut rng))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| setup)?;
    let nuavs = (0..N_NUAV).map(|_| net.provision_nuav(a.cluster, &mut rng)).collect::<Result<Vec<_>, _>>().map_err(|_| setup)?;
    let ch = net.ch_credential(a.cluster).map_err(|_| setup)?;

    let t1 = Timestamp(10_000);
    let mut reqs = Vec::new();
    for (k, n) in nuavs.iter().enumerate() {
        let r = nuav_build_request(&gp, n, &mut rng);
        reqs.push(run.pass(&gp, MsgKind::JoinRequest, k, r)?);
    }
    let (mut state, chals) = ch_aggregate(&gp, &ch, &reqs, t1, &mut rng).map_err(|_| "ch aggregate")?;
    let mut responses = Vec::new();
    let now = Timestamp(t1.0 + 1);
    for (l, (cm, c)) in cms.iter().zip(chals).enumerate() {
        let c = run.pass(&gp, MsgKind::AggregateChallenge, l, c)?;
        let r = cm_verify_and_respond(&gp, cm, &ch.pid, N_CM as u64, &c, now, &cfg).map_err(|_| "cm verify")?;
        if xor32(&r.c_cm, &cm.key) == fallback_result(c.t1, &cm.key) {
            return Err("cm verify");
        }
        responses.push((l, run.pass(&gp, MsgKind::CmResponse, l, r)?));
    }
    let t2 = Timestamp(t1.0 + 2);
    let bc = ch_collect_and_verify(&gp, &ch, &mut state, &responses, N_CM as u64, t2, t2, &cfg).map_err(|_| "ch collect")?;
    let bc = run.pass(&gp, MsgKind::PeerBroadcast, 0, bc)?;
    let now = Timestamp(t2.0 + 1);
    let mut acks = Vec::new();
    for (p, peer) in peers.iter().enumerate() {
        let ack = peer_ch_verify(&gp, peer, &bc, (N_CM * N_CM) as u64, now, &cfg).map_err(|_| "peer verify")?;
        acks.push(run.pass(&gp, MsgKind::PeerAck, p, ack)?);
    }
    let peer_pids: Vec<Block32> = peers.iter().map(|p| p.pid).collect();
    let confirms = ch_finalize(&gp, &ch, &state, &acks, &peer_pids, &mut net, now, &cfg).map_err(|_| "ch finalize")?;
    for (k, (n, c)) in nuavs.iter().zip(confirms).enumerate() {
        let c = run.pass(&gp, MsgKind::NuavConfirm, k, c)?;
        if !nuav_verify_ch(&gp, n, &c) {
            return Err("nuav verify");
        }
    }

    let t3 = Timestamp(t2.0 + 10);
    let ch = net.ch_credential(a.cluster).map_err(|_| setup)?;
    let req = source_ch_build_transfer(&ch, &cms[0].pid, t3).map_err(|_| "transfer build")?;
    let req = run.pass(&gp, MsgKind::TransferRequest, 0, req)?;
    dest_ch_verify_transfer(&peers[0], &mut net, &req, t3, &cfg).map_err(|_| "transfer verify")?;

    let t4 = Timestamp(t3.0 + 10);
    let ch = net.ch_credential(a.cluster).map_err(|_| setup)?;
    let dealer = Dealer::new(&gp, &ch, &mut rng).map_err(|_| "rekey deal")?;
    let mut inits: Vec<KeyUpdateInit> = Vec::new();
    let mut shares = Vec::new();
    let mut envelopes = Vec::new();
    for (l, m) in ch.members.iter().enumerate() {
        let init = run.pass(&gp, MsgKind::KeyUpdateInit, l, dealer.init_for(l, t4))?;
        let (s, e) = cm_recover_and_share(&gp, m, l, &init, t4, &cfg).map_err(|_| "rekey share")?;
        inits.push(init);
        shares.push(s);
        envelopes.push(e);
    }
    let envelopes = envelopes
        .into_iter()
        .enumerate()
        .map(|(l, e)| run.pass(&gp, MsgKind::ShareEnvelope, l, e))
        .collect::<Result<Vec<_>, _>>()?;
    let roster: Vec<Block32> = ch.members.iter().map(|m| m.pid).collect();
    for l in 0..roster.len() {
        let key = cm_reconstruct(&gp, l, &shares[l], &envelopes, &inits[l], &roster).map_err(|_| "rekey reconstruct")?;
        if key != dealer.key() {
            // Accepted a wrong key without noticing: still an accept.
            return Ok(());
        }
    }
    Ok(())
}

/// Runs the pipeline with one flip, or honestly with `None`.
pub fn outcome(seed: u64, flip: Option<Flip>) -> Outcome {
    let mut run = Run { flip, sizes: Vec::new() };
    match pipeline(seed, &mut run) {
        Ok(()) => Outcome::Accepted,
        Err(stage) => Outcome::Rejected(stage),
    }
}

/// Every flip position of the honest transcript for `seed`.
pub fn flips(seed: u64) -> Vec<Flip> {
    let mut run = Run { flip: None, sizes: Vec::new() };
    pipeline(seed, &mut run).expect("honest pipeline completes");
    run.sizes
        .into_iter()
        .flat_map(|(kind, instance, len)| (0..len * 8).map(move |bit| Flip { kind, instance, bit }))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KindStats {
    pub flips: u64,
    pub rejected: u64,
    pub accepted: u64,
    /// Rejections per stage name.
    pub stages: BTreeMap<&'static str, u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TamperReport {
    pub by_kind: BTreeMap<MsgKind, KindStats>,
    /// `(seed, flip)` for every flip no check refused.
    pub false_accepts: Vec<(u64, Flip)>,
}

impl TamperReport {
    pub fn flips(&self) -> u64 {
        self.by_kind.values().map(|s| s.flips).sum()
    }
}

/// The full sweep over each seed's transcript.
pub fn sweep(seeds: &[u64], exec: Execution) -> TamperReport {
    let mut report = TamperReport::default();
    for &seed in seeds {
        let all = flips(seed);
        let outcomes = exec.map(all, |f| (f, outcome(seed, Some(f))));
        for (f, o) in outcomes {
            let s = report.by_kind.entry(f.kind).or_default();
            s.flips += 1;
            match o {
                Outcome::Accepted => {
                    s.accepted += 1;
                    report.false_accepts.push((seed, f));
                }
                Outcome::Rejected(stage) => {
                    s.rejected += 1;
                    *s.stages.entry(stage).or_default() += 1;
                }
            }
        }
    }
    report
}
