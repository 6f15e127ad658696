//! Event loop.
//!
//! One shared half-duplex medium carries every frame in FIFO order of
//! readiness, with no loss. Each node has one CPU; a job starts when both
//! its input has arrived and the previous job on that node has finished,
//! and lasts `Σ ops × per-op delay`. The cryptography is executed for real
//! and every message crosses the medium in its wire encoding.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use casku::block::{Block32, Timestamp};
use casku::error::{ProtocolConfig, ProtocolError};
use casku::group::{GroupParams, Scalar};
use casku::join::{
    ch_aggregate, ch_check_acks, ch_collect_and_verify, ch_finalize, cm_verify_and_respond, nuav_build_request,
    nuav_verify_ch, peer_ch_verify, AggregateChallenge, ChJoinState, CmResponse, JoinRequest, NuavConfirm, PeerAck,
    PeerBroadcast,
};
use casku::key_update::{cm_reconstruct, cm_recover_and_share, Dealer, KeyUpdateInit, ShareEnvelope};
use casku::opcount::{self, OpCounts};
use casku::registry::MemberKeys;
use casku::wire::{tag, Wire};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::config::{LinkModel, ScenarioConfig};
use crate::energy::{energy_account, AirFrame, Timeline};
use crate::mobility::LinearMobility;
use crate::swarm::Swarm;
use crate::SimError;

const NS_PER_MS: u64 = 1_000_000;

/// Serialization delay of `bytes` at `bitrate` bits/s.
pub fn tx_time(bytes: usize, bitrate: u64) -> std::time::Duration {
    std::time::Duration::from_nanos(tx_time_ns(bytes, bitrate))
}

pub fn tx_time_ns(bytes: usize, bitrate: u64) -> u64 {
    let bits = bytes as u128 * 8 * 1_000_000_000;
    bits.div_ceil(bitrate as u128) as u64
}

fn us(v: f64) -> u64 {
    (v * 1000.0).round() as u64
}

/// Air schedule of one frame exchange that begins contending at `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exchange {
    pub data: AirFrame,
    pub ack: Option<AirFrame>,
    /// Medium free again.
    pub end_ns: u64,
}

/// `acker` is the single addressee of a unicast frame; group frames are
/// not acknowledged.
pub fn exchange(link: &LinkModel, bitrate: u64, sender: usize, acker: Option<usize>, bytes: usize, start: u64) -> Exchange {
    let burst = |sender, at, body| {
        let sync = at + us(link.preamble_us);
        AirFrame { sender, start_ns: at, payload_start_ns: sync, end_ns: sync + tx_time_ns(body, bitrate) }
    };
    let data = burst(sender, start + us(link.difs_us + link.backoff_us), link.header_bytes + bytes);
    let ack = acker.map(|a| burst(a, data.end_ns + us(link.sifs_us), link.ack_bytes));
    Exchange { data, ack, end_ns: ack.map_or(data.end_ns, |a| a.end_ns) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Join,
    KeyUpdate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Nuav,
    Ch,
    Cm,
    OtherCh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub join_latency_ms: f64,
    pub keyupdate_latency_ms: f64,
    /// Mean per node of each role, joules, over the join phase.
    pub e_nuav_j: f64,
    pub e_cm_j: f64,
    pub e_ch_j: f64,
    pub e_otherch_j: f64,
    /// Sum over every node.
    pub e_total_j: f64,
    pub bytes_join: usize,
    pub bytes_keyupdate: usize,
    pub frames_join: usize,
    pub frames_keyupdate: usize,
    pub events: usize,
    /// Nodes whose join-phase draw exceeded the initial energy.
    pub depleted: usize,
    /// Operation totals over the join phase, all nodes.
    pub ops_join: OpCounts,
    pub energy_window_ms: f64,
    /// Node positions (m) at the end of the join, when tracking is on.
    pub positions: Option<Vec<(f64, f64)>>,
}

struct Frame {
    src: usize,
    dsts: Vec<usize>,
    bytes: Vec<u8>,
    phase: Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Ev {
    Ready(usize),
    Sent(usize),
    Deliver { frame: usize, to: usize },
    StartKeyUpdate,
}

struct AckGroup {
    t2: Timestamp,
    state: ChJoinState,
    acks: Vec<PeerAck>,
}

struct Run {
    state: ChJoinState,
    nuav_nodes: Vec<usize>,
    responses: Vec<(usize, CmResponse)>,
    groups: Vec<AckGroup>,
    groups_done: usize,
    groups_expected: usize,
}

#[derive(Default)]
struct Member {
    index: usize,
    keys: Option<MemberKeys>,
    init: Option<KeyUpdateInit>,
    share: Option<Scalar>,
    envelopes: Vec<ShareEnvelope>,
    done: bool,
}

struct Sim {
    cfg: ScenarioConfig,
    pcfg: ProtocolConfig,
    gp: GroupParams,
    sw: Swarm,
    rng: ChaCha20Rng,

    heap: BinaryHeap<Reverse<(u64, u64, Ev)>>,
    seq: u64,
    events: usize,
    frames: Vec<Frame>,
    air: Vec<(AirFrame, Phase)>,
    bytes_on_air: [usize; 2],
    frames_on_air: [usize; 2],
    medium_free: u64,
    cpu_free: Vec<u64>,
    ops_join: OpCounts,
    phase: Phase,

    nuav_of_pid: BTreeMap<Block32, usize>,
    pending_reqs: Vec<JoinRequest>,
    run: Option<Run>,
    nuav_done: Vec<Option<u64>>,
    first_request_on_air: Option<u64>,

    dealer: Option<Dealer>,
    next_init: usize,
    roster_nodes: Vec<usize>,
    roster_pids: Vec<Block32>,
    members: BTreeMap<usize, Member>,
    ku_start: u64,
    ku_end: u64,
}

impl Sim {
    fn n(&self) -> usize {
        self.cfg.n_nuav
    }
    fn m(&self) -> usize {
        self.cfg.n_cm
    }
    fn p(&self) -> usize {
        self.cfg.n_ch - 1
    }
    fn ch_node(&self) -> usize {
        self.n()
    }
    fn cm_node(&self, l: usize) -> usize {
        self.n() + 1 + l
    }
    fn peer_node(&self, p: usize) -> usize {
        self.n() + 1 + self.m() + p
    }
    fn n_nodes(&self) -> usize {
        self.n() + 1 + self.m() + self.p()
    }
    fn role(&self, node: usize) -> Role {
        let (n, m) = (self.n(), self.m());
        if node < n {
            Role::Nuav
        } else if node == n {
            Role::Ch
        } else if node <= n + m {
            Role::Cm
        } else {
            Role::OtherCh
        }
    }

    fn schedule(&mut self, t: u64, ev: Ev) {
        self.seq += 1;
        self.heap.push(Reverse((t, self.seq, ev)));
    }

    fn send(&mut self, src: usize, dsts: Vec<usize>, bytes: Vec<u8>, ready: u64) {
        let id = self.frames.len();
        self.frames.push(Frame { src, dsts, bytes, phase: self.phase });
        self.schedule(ready, Ev::Ready(id));
    }

    /// Runs `f` on `node`'s CPU once it is free and the input has arrived.
    /// Returns the result and the finish time.
    fn compute<T>(
        &mut self,
        node: usize,
        arrival: u64,
        f: impl FnOnce(&mut Self, Timestamp) -> Result<T, SimError>,
    ) -> Result<(T, u64), SimError> {
        let start = arrival.max(self.cpu_free[node]);
        let (r, ops) = opcount::measure(|| f(&mut *self, Timestamp(start / NS_PER_MS)));
        let finish = start + self.cfg.proc_delay_per_op.cost_ns(&ops);
        self.cpu_free[node] = finish;
        if self.phase == Phase::Join {
            self.ops_join += ops;
        }
        Ok((r?, finish))
    }

    fn on_ready(&mut self, t: u64, id: usize) {
        let f = &self.frames[id];
        let acker = if f.dsts.len() == 1 { Some(f.dsts[0]) } else { None };
        let x = exchange(&self.cfg.link, self.cfg.bitrate, f.src, acker, f.bytes.len(), t.max(self.medium_free));
        self.medium_free = x.end_ns;
        self.air.push((x.data, f.phase));
        self.air.extend(x.ack.map(|a| (a, f.phase)));
        self.bytes_on_air[f.phase as usize] += f.bytes.len();
        self.frames_on_air[f.phase as usize] += 1;
        if f.bytes.first() == Some(&tag::JOIN_REQUEST) && self.first_request_on_air.is_none() {
            self.first_request_on_air = Some(x.data.start_ns);
        }
        for to in f.dsts.clone() {
            self.schedule(x.data.end_ns, Ev::Deliver { frame: id, to });
        }
        self.schedule(x.end_ns, Ev::Sent(id));
    }

    fn decode<T: Wire>(&self, id: usize) -> Result<T, SimError> {
        opcount::uncounted(|| T::decode(&self.gp, &self.frames[id].bytes)).map_err(SimError::Wire)
    }

    fn on_deliver(&mut self, t: u64, id: usize, to: usize) -> Result<(), SimError> {
        let src = self.frames[id].src;
        let kind = self.frames[id].bytes[0];
        match (self.role(to), kind) {
            (Role::Ch, tag::JOIN_REQUEST) => {
                let req = self.decode::<JoinRequest>(id)?;
                self.pending_reqs.push(req);
                self.maybe_start_run(t)
            }
            (Role::Cm, tag::AGGREGATE_CHALLENGE) => {
                let chal = self.decode::<AggregateChallenge>(id)?;
                let l = to - self.n() - 1;
                let m = self.m() as u64;
                let (resp, fin) = self.compute(to, t, |s, now| {
                    Ok(cm_verify_and_respond(&s.gp, &s.sw.cms[l], &s.sw.ch.pid, m, &chal, now, &s.pcfg)?)
                })?;
                let bytes = resp.encode(&self.gp);
                self.send(to, vec![self.ch_node()], bytes, fin);
                Ok(())
            }
            (Role::Ch, tag::CM_RESPONSE) => {
                let resp = self.decode::<CmResponse>(id)?;
                let l = src - self.n() - 1;
                self.on_response(t, l, resp)
            }
            (Role::OtherCh, tag::PEER_BROADCAST) => {
                let bc = self.decode::<PeerBroadcast>(id)?;
                let p = to - self.n() - 1 - self.m();
                let m = self.m() as u64;
                let weight = if self.cfg.mam { m * m } else { m };
                let (ack, fin) = self.compute(to, t, |s, now| {
                    Ok(peer_ch_verify(&s.gp, &s.sw.peers[p], &bc, weight, now, &s.pcfg)?)
                })?;
                let bytes = ack.encode(&self.gp);
                self.send(to, vec![self.ch_node()], bytes, fin);
                Ok(())
            }
            (Role::Ch, tag::PEER_ACK | tag::PEER_ACK_BOUND) => {
                let ack = self.decode::<PeerAck>(id)?;
                self.on_ack(t, ack)
            }
            (Role::Nuav, tag::NUAV_CONFIRM) => {
                let conf = self.decode::<NuavConfirm>(id)?;
                let (ok, fin) = self.compute(to, t, |s, _| Ok(nuav_verify_ch(&s.gp, &s.sw.nuavs[to], &conf)))?;
                if !ok {
                    return Err(SimError::ProtocolAbort(ProtocolError::ResultMismatch));
                }
                self.nuav_done[to] = Some(fin);
                Ok(())
            }
            (_, tag::KEY_UPDATE_INIT) => {
                let init = self.decode::<KeyUpdateInit>(id)?;
                self.on_init(t, to, init)
            }
            (_, tag::SHARE_ENVELOPE) => {
                let env = self.decode::<ShareEnvelope>(id)?;
                let mem = self.members.get_mut(&to).ok_or(SimError::Unexpected("envelope for non-member"))?;
                mem.envelopes.push(env);
                self.maybe_reconstruct(t, to)
            }
            _ => Err(SimError::Unexpected("message delivered to the wrong role")),
        }
    }

    fn maybe_start_run(&mut self, t: u64) -> Result<(), SimError> {
        if self.run.is_some() {
            return Ok(());
        }
        let batch: Vec<JoinRequest> = if self.cfg.mam {
            if self.pending_reqs.len() < self.n() {
                return Ok(());
            }
            std::mem::take(&mut self.pending_reqs)
        } else {
            if self.pending_reqs.is_empty() {
                return Ok(());
            }
            vec![self.pending_reqs.remove(0)]
        };
        let ch = self.ch_node();
        let ((state, chals), fin) = self.compute(ch, t, |s, now| {
            let ChRng { gp, ch, rng } = s.split();
            Ok(ch_aggregate(gp, ch, &batch, now, rng)?)
        })?;
        let nuav_nodes = batch
            .iter()
            .map(|r| self.nuav_of_pid.get(&r.nuav_pid).copied().ok_or(SimError::Unexpected("unknown NUAV")))
            .collect::<Result<Vec<_>, _>>()?;
        for (l, chal) in chals.iter().enumerate() {
            let bytes = chal.encode(&self.gp);
            self.send(ch, vec![self.cm_node(l)], bytes, fin);
        }
        let groups_expected = if self.cfg.mam { 1 } else { self.m() };
        self.run = Some(Run { state, nuav_nodes, responses: Vec::new(), groups: Vec::new(), groups_done: 0, groups_expected });
        Ok(())
    }

    fn on_response(&mut self, t: u64, l: usize, resp: CmResponse) -> Result<(), SimError> {
        let ch = self.ch_node();
        let m = self.m() as u64;
        let (mam, want) = (self.cfg.mam, self.m());
        let run = self.run.as_mut().ok_or(SimError::Unexpected("response outside a run"))?;
        run.responses.push((l, resp));
        // MAm answers all members in one broadcast; the baseline forwards
        // each response as it arrives.
        if mam && run.responses.len() < want {
            return Ok(());
        }
        let subset = std::mem::take(&mut run.responses);
        let mut state = run.state.clone();
        let (bc, fin) = self.compute(ch, t, |s, now| {
            Ok(ch_collect_and_verify(&s.gp, &s.sw.ch, &mut state, &subset, m, now, now, &s.pcfg)?)
        })?;
        if self.p() == 0 {
            return self.close_group(fin, state, Vec::new());
        }
        let peers: Vec<usize> = (0..self.p()).map(|p| self.peer_node(p)).collect();
        let bytes = bc.encode(&self.gp);
        if self.cfg.mam {
            self.send(ch, peers, bytes, fin);
        } else {
            // relayed to each peer head on its own
            for p in peers {
                self.send(ch, vec![p], bytes.clone(), fin);
            }
        }
        let run = self.run.as_mut().expect("run in progress");
        run.groups.push(AckGroup { t2: bc.t2, state, acks: Vec::new() });
        Ok(())
    }

    fn on_ack(&mut self, t: u64, ack: PeerAck) -> Result<(), SimError> {
        let p = self.p();
        let run = self.run.as_mut().ok_or(SimError::Unexpected("ack outside a run"))?;
        let pos = run
            .groups
            .iter()
            .position(|g| {
                g.t2 == ack.t2
                    && g.acks.len() < p
                    && (ack.responder_pid.is_none() || g.acks.iter().all(|a| a.responder_pid != ack.responder_pid))
            })
            .ok_or(SimError::ProtocolAbort(ProtocolError::AckInvalid))?;
        run.groups[pos].acks.push(ack);
        if run.groups[pos].acks.len() < p {
            return Ok(());
        }
        let g = run.groups.remove(pos);
        self.close_group(t, g.state, g.acks)
    }

    /// One broadcast fully acknowledged (or none needed). The last one of a
    /// run admits the NUAVs and sends their confirmations.
    fn close_group(&mut self, t: u64, state: ChJoinState, acks: Vec<PeerAck>) -> Result<(), SimError> {
        let ch = self.ch_node();
        let run = self.run.as_mut().expect("run in progress");
        run.groups_done += 1;
        let last = run.groups_done == run.groups_expected;
        let peer_pids = self.sw.peer_pids();
        if !last {
            self.compute(ch, t, |s, now| Ok(ch_check_acks(&state, &acks, &peer_pids, now, &s.pcfg)?))?;
            return Ok(());
        }
        let (confs, fin) = self.compute(ch, t, |s, now| {
            Ok(ch_finalize(&s.gp, &s.sw.ch, &state, &acks, &peer_pids, &mut s.sw.net, now, &s.pcfg)?)
        })?;
        let run = self.run.take().expect("run in progress");
        for (k, conf) in run.nuav_nodes.iter().zip(&confs) {
            let bytes = conf.encode(&self.gp);
            self.send(ch, vec![*k], bytes, fin);
        }
        self.maybe_start_run(fin)
    }

    fn start_key_update(&mut self, t: u64) -> Result<(), SimError> {
        self.phase = Phase::KeyUpdate;
        self.ku_start = t;
        self.sw.refresh()?;
        let mut node_of: BTreeMap<Block32, usize> = self.nuav_of_pid.clone();
        for (l, cm) in self.sw.cms.iter().enumerate() {
            node_of.insert(cm.pid, self.n() + 1 + l);
        }
        self.roster_pids = self.sw.ch.members.iter().map(|m| m.pid).collect();
        self.roster_nodes = self
            .roster_pids
            .iter()
            .map(|pid| node_of.get(pid).copied().ok_or(SimError::Unexpected("roster entry without a node")))
            .collect::<Result<_, _>>()?;
        for (l, (node, keys)) in self.roster_nodes.iter().zip(&self.sw.ch.members).enumerate() {
            self.members.insert(*node, Member { index: l, keys: Some(keys.clone()), ..Member::default() });
        }
        let ch = self.ch_node();
        let (dealer, fin) = self.compute(ch, t, |s, _| {
            let ChRng { gp, ch, rng } = s.split();
            Ok(Dealer::new(gp, ch, rng)?)
        })?;
        self.dealer = Some(dealer);
        self.next_init = 0;
        self.send_next_init(fin)
    }

    /// Inits go out one at a time, each stamped when it is produced, so a
    /// slow link cannot age the last one past the freshness window.
    fn send_next_init(&mut self, t: u64) -> Result<(), SimError> {
        let l = self.next_init;
        if l >= self.roster_nodes.len() {
            return Ok(());
        }
        self.next_init += 1;
        let ch = self.ch_node();
        let (init, fin) =
            self.compute(ch, t, |s, now| Ok(s.dealer.as_ref().expect("dealer").init_for(l, now)))?;
        let bytes = init.encode(&self.gp);
        self.send(ch, vec![self.roster_nodes[l]], bytes, fin);
        Ok(())
    }

    fn on_init(&mut self, t: u64, node: usize, init: KeyUpdateInit) -> Result<(), SimError> {
        let mem = self.members.get(&node).ok_or(SimError::Unexpected("init for non-member"))?;
        let (l, keys) = (mem.index, mem.keys.clone().expect("member keys"));
        let ((share, env), fin) =
            self.compute(node, t, |s, now| Ok(cm_recover_and_share(&s.gp, &keys, l, &init, now, &s.pcfg)?))?;
        let mem = self.members.get_mut(&node).expect("member");
        mem.init = Some(init);
        mem.share = Some(share);
        if self.roster_nodes.len() > 1 {
            let dsts: Vec<usize> = self.roster_nodes.iter().copied().filter(|n| *n != node).collect();
            let bytes = env.encode(&self.gp);
            self.send(node, dsts, bytes, fin);
        }
        self.maybe_reconstruct(fin, node)
    }

    fn maybe_reconstruct(&mut self, t: u64, node: usize) -> Result<(), SimError> {
        let need = self.roster_nodes.len() - 1;
        let mem = self.members.get(&node).expect("member");
        if mem.done || mem.share.is_none() || mem.envelopes.len() < need {
            return Ok(());
        }
        let (l, share, init, envs) =
            (mem.index, mem.share.clone().expect("share"), mem.init.clone().expect("init"), mem.envelopes.clone());
        let roster = self.roster_pids.clone();
        let (key, fin) = self.compute(node, t, |s, _| Ok(cm_reconstruct(&s.gp, l, &share, &envs, &init, &roster)?))?;
        if Some(key) != self.dealer.as_ref().map(Dealer::key) {
            return Err(SimError::ProtocolAbort(ProtocolError::ConfirmMismatch));
        }
        self.members.get_mut(&node).expect("member").done = true;
        self.ku_end = self.ku_end.max(fin);
        Ok(())
    }

    fn split(&mut self) -> ChRng<'_> {
        ChRng { gp: &self.gp, ch: &self.sw.ch, rng: &mut self.rng }
    }

    fn drain(&mut self) -> Result<(), SimError> {
        while let Some(Reverse((t, _, ev))) = self.heap.pop() {
            self.events += 1;
            match ev {
                Ev::Ready(id) => self.on_ready(t, id),
                Ev::Sent(id) => {
                    let f = &self.frames[id];
                    if f.phase == Phase::KeyUpdate && f.bytes[0] == tag::KEY_UPDATE_INIT {
                        self.send_next_init(t)?;
                    }
                }
                Ev::Deliver { frame, to } => self.on_deliver(t, frame, to)?,
                Ev::StartKeyUpdate => self.start_key_update(t)?,
            }
        }
        Ok(())
    }
}

struct ChRng<'a> {
    gp: &'a GroupParams,
    ch: &'a casku::registry::ChCredential,
    rng: &'a mut ChaCha20Rng,
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Metrics, SimError> {
    cfg.validate()?;
    let gp = GroupParams::preset(cfg.group.preset());
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.rng_seed);
    let sw = opcount::uncounted(|| Swarm::build(&gp, cfg.n_nuav, cfg.n_cm, cfg.n_ch, &mut rng))?;
    let nuav_of_pid = sw.nuavs.iter().enumerate().map(|(k, n)| (n.pid, k)).collect();
    let mut sim = Sim {
        pcfg: ProtocolConfig { mode: cfg.mode(), freshness_ms: cfg.freshness_window_ms },
        gp: gp.clone(),
        sw,
        rng,
        heap: BinaryHeap::new(),
        seq: 0,
        events: 0,
        frames: Vec::new(),
        air: Vec::new(),
        bytes_on_air: [0; 2],
        frames_on_air: [0; 2],
        medium_free: 0,
        cpu_free: Vec::new(),
        ops_join: OpCounts::ZERO,
        phase: Phase::Join,
        nuav_of_pid,
        pending_reqs: Vec::new(),
        run: None,
        nuav_done: vec![None; cfg.n_nuav],
        first_request_on_air: None,
        dealer: None,
        next_init: 0,
        roster_nodes: Vec::new(),
        roster_pids: Vec::new(),
        members: BTreeMap::new(),
        ku_start: 0,
        ku_end: 0,
        cfg: cfg.clone(),
    };
    sim.cpu_free = vec![0; sim.n_nodes()];

    let ch = sim.ch_node();
    for k in 0..cfg.n_nuav {
        let (req, fin) = sim.compute(k, 0, |s, _| Ok(nuav_build_request(&s.gp, &s.sw.nuavs[k], &mut s.rng)))?;
        let bytes = req.encode(&gp);
        sim.send(k, vec![ch], bytes, fin);
    }
    sim.drain()?;
    if sim.nuav_done.iter().any(Option::is_none) {
        return Err(SimError::Unexpected("join did not complete"));
    }
    let join_end = sim.nuav_done.iter().flatten().copied().max().unwrap_or(0);
    let join_latency_ns = join_end.saturating_sub(sim.first_request_on_air.unwrap_or(join_end));
    let quiet = sim.medium_free.max(sim.cpu_free.iter().copied().max().unwrap_or(0));

    if cfg.key_update {
        sim.schedule(quiet, Ev::StartKeyUpdate);
        sim.drain()?;
        if sim.members.values().any(|m| !m.done) {
            return Err(SimError::Unexpected("key update did not complete"));
        }
    }

    let join_air: Vec<AirFrame> = sim.air.iter().filter(|(_, p)| *p == Phase::Join).map(|(f, _)| *f).collect();
    let window_ns = ((cfg.energy_window_ms * 1e6).round() as u64).max(quiet);
    let mut sums = [0.0f64; 4];
    let mut counts = [0usize; 4];
    let mut depleted = 0;
    for node in 0..sim.n_nodes() {
        let e = energy_account(&cfg.power, &Timeline::from_air(node, &join_air, window_ns));
        if e > cfg.initial_energy {
            depleted += 1;
        }
        let r = sim.role(node) as usize;
        sums[r] += e;
        counts[r] += 1;
    }
    let mean = |r: Role| if counts[r as usize] == 0 { 0.0 } else { sums[r as usize] / counts[r as usize] as f64 };
    Ok(Metrics {
        join_latency_ms: join_latency_ns as f64 / 1e6,
        keyupdate_latency_ms: sim.ku_end.saturating_sub(sim.ku_start) as f64 / 1e6,
        e_nuav_j: mean(Role::Nuav),
        e_cm_j: mean(Role::Cm),
        e_ch_j: mean(Role::Ch),
        e_otherch_j: mean(Role::OtherCh),
        e_total_j: sums.iter().sum(),
        bytes_join: sim.bytes_on_air[Phase::Join as usize],
        bytes_keyupdate: sim.bytes_on_air[Phase::KeyUpdate as usize],
        frames_join: sim.frames_on_air[Phase::Join as usize],
        frames_keyupdate: sim.frames_on_air[Phase::KeyUpdate as usize],
        events: sim.events,
        depleted,
        ops_join: sim.ops_join,
        energy_window_ms: window_ns as f64 / 1e6,
        positions: cfg.mobility.then(|| {
            let mob = LinearMobility::new(sim.n_nodes(), cfg.rng_seed);
            (0..sim.n_nodes()).map(|k| mob.position(k, join_end)).collect()
        }),
    })
}
