use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use casku::block::{Block32, Timestamp};
use casku::cross_cluster::{dest_ch_verify_transfer, source_ch_build_transfer};
use casku::error::{ProtocolConfig, ProtocolError};
use casku::group::GroupParams;
use casku::join::{ch_aggregate, ch_collect_and_verify, ch_finalize, cm_verify_and_respond, nuav_build_request, nuav_verify_ch, peer_ch_verify};
use casku::key_update::{cm_reconstruct, cm_recover_and_share, Dealer};
use casku::wire::Wire;
use casku_sim::swarm::Swarm;
use casku_sim::ScenarioConfig;

use crate::args::DemoArgs;
use crate::output::{csv_bytes, write_atomic};
use crate::CliError;

#[derive(Debug, Serialize)]
struct Row {
    step: usize,
    phase: &'static str,
    message: &'static str,
    from: String,
    to: String,
    bytes: usize,
    outcome: String,
}

struct Transcript<'a> {
    gp: &'a GroupParams,
    rows: Vec<Row>,
}

impl Transcript<'_> {
    fn sent<T: Wire>(&mut self, phase: &'static str, message: &'static str, from: String, to: String, msg: &T) {
        let bytes = msg.encode(self.gp).len();
        println!("{:>4}  {phase:<10} {message:<18} {from:>6} -> {to:<6} {bytes:>6} B", self.rows.len() + 1);
        self.rows.push(Row { step: self.rows.len() + 1, phase, message, from, to, bytes, outcome: "accepted".into() });
    }

    /// Marks the last message with the receiver's verdict.
    fn verdict<T>(&mut self, r: Result<T, ProtocolError>) -> Result<T, CliError> {
        r.map_err(|e| {
            if let Some(last) = self.rows.last_mut() {
                last.outcome = e.to_string();
            }
            println!("        rejected: {e}");
            CliError::Abort(e.to_string())
        })
    }
}

fn short(pid: &Block32) -> String {
    pid.0[..4].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn demo(a: &DemoArgs) -> Result<(), CliError> {
    let cfg = a.scenario.resolve(ScenarioConfig::default())?;
    let gp = super::group(&cfg);
    let pc = super::protocol_config(&cfg);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.rng_seed);
    let mut sw = Swarm::build(&gp, cfg.n_nuav, cfg.n_cm, cfg.n_ch, &mut rng).map_err(|e| CliError::Abort(e.to_string()))?;
    println!(
        "group {} | {} NUAV, {} CM, {} CH | {:?} mode | seed {}",
        cfg.group.preset().name(),
        cfg.n_nuav,
        cfg.n_cm,
        cfg.n_ch,
        pc.mode,
        cfg.rng_seed
    );
    println!("origin CH {}", short(&sw.ch.pid));
    let mut tr = Transcript { gp: &gp, rows: Vec::new() };
    let result = run(&gp, &pc, &mut sw, &mut tr, &mut rng);
    if let Some(p) = &a.out {
        write_atomic(p, &csv_bytes(&tr.rows)?)?;
    }
    result
}

fn run(gp: &GroupParams, pc: &ProtocolConfig, sw: &mut Swarm, tr: &mut Transcript, rng: &mut ChaCha20Rng) -> Result<(), CliError> {
    let abort = |e: casku::registry::RegistryError| CliError::Abort(e.to_string());
    let n_cm = sw.cms.len() as u64;
    if !sw.nuavs.is_empty() {
        let t1 = Timestamp(1_000);
        let reqs: Vec<_> = sw.nuavs.iter().map(|n| nuav_build_request(gp, n, rng)).collect();
        for (k, r) in reqs.iter().enumerate() {
            tr.sent("join", "JoinRequest", format!("NUAV{k}"), "CH".into(), r);
        }
        let (mut st, chals) = tr.verdict(ch_aggregate(gp, &sw.ch, &reqs, t1, rng))?;
        let now = Timestamp(t1.0 + 5);
        let mut resps = Vec::new();
        for (l, (cm, c)) in sw.cms.iter().zip(&chals).enumerate() {
            tr.sent("join", "AggregateChallenge", "CH".into(), format!("CM{l}"), c);
            let r = tr.verdict(cm_verify_and_respond(gp, cm, &sw.ch.pid, n_cm, c, now, pc))?;
            tr.sent("join", "CmResponse", format!("CM{l}"), "CH".into(), &r);
            resps.push((l, r));
        }
        let t2 = Timestamp(t1.0 + 10);
        let bc = tr.verdict(ch_collect_and_verify(gp, &sw.ch, &mut st, &resps, n_cm, t2, t2, pc))?;
        let mut acks = Vec::new();
        if !sw.peers.is_empty() {
            tr.sent("join", "PeerBroadcast", "CH".into(), "*".into(), &bc);
        }
        for (j, p) in sw.peers.iter().enumerate() {
            let ack = tr.verdict(peer_ch_verify(gp, p, &bc, n_cm * n_cm, Timestamp(t2.0 + 5), pc))?;
            tr.sent("join", "PeerAck", format!("CH{}", j + 1), "CH".into(), &ack);
            acks.push(ack);
        }
        let peer_pids = sw.peer_pids();
        let confs = tr.verdict(ch_finalize(gp, &sw.ch, &st, &acks, &peer_pids, &mut sw.net, Timestamp(t2.0 + 10), pc))?;
        for (k, (n, c)) in sw.nuavs.iter().zip(&confs).enumerate() {
            tr.sent("join", "NuavConfirm", "CH".into(), format!("NUAV{k}"), c);
            let ok = nuav_verify_ch(gp, n, c);
            tr.verdict(if ok { Ok(()) } else { Err(ProtocolError::ResultMismatch) })?;
        }
        sw.refresh().map_err(abort)?;
        println!("admitted {} NUAVs; roster now {} members", confs.len(), sw.ch.members.len());

        if let (Some(dest), Some(mover)) = (sw.peers.first().cloned(), sw.nuavs.first()) {
            let t3 = Timestamp(2_000);
            let req = tr.verdict(source_ch_build_transfer(&sw.ch, &mover.pid, t3))?;
            tr.sent("transfer", "TransferRequest", "CH".into(), "CH1".into(), &req);
            let new_pid = tr.verdict(dest_ch_verify_transfer(&dest, &mut sw.net, &req, Timestamp(t3.0 + 3), pc))?;
            sw.refresh().map_err(abort)?;
            println!("NUAV0 moved to CH1 as {}", short(&new_pid));
        }
    }

    let roster = sw.ch.members.len();
    if gp.is_tiny() && roster >= 11 {
        println!("roster of {roster} does not fit the tiny group; key update skipped");
        return Ok(());
    }
    let t4 = Timestamp(3_000);
    let dealer = tr.verdict(Dealer::new(gp, &sw.ch, rng))?;
    let mut inits = Vec::with_capacity(roster);
    let mut shares = Vec::with_capacity(roster);
    let mut envs = Vec::with_capacity(roster);
    for (l, m) in sw.ch.members.iter().enumerate() {
        let init = dealer.init_for(l, t4);
        tr.sent("key-update", "KeyUpdateInit", "CH".into(), format!("M{l}"), &init);
        let (s, e) = tr.verdict(cm_recover_and_share(gp, m, l, &init, t4, pc))?;
        inits.push(init);
        shares.push(s);
        envs.push(e);
    }
    for (l, e) in envs.iter().enumerate() {
        tr.sent("key-update", "ShareEnvelope", format!("M{l}"), "*".into(), e);
    }
    let pids: Vec<Block32> = sw.ch.members.iter().map(|m| m.pid).collect();
    for l in 0..roster {
        let key = tr.verdict(cm_reconstruct(gp, l, &shares[l], &envs, &inits[l], &pids))?;
        if key != dealer.key() {
            return Err(CliError::Abort(format!("member {l} reconstructed a different key")));
        }
    }
    println!("all {roster} members hold the new session key");
    Ok(())
}
