use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use casku::block::{Block32, Timestamp};
use casku::key_update::{ch_init_update, cm_reconstruct, cm_recover_and_share};
use casku::opcount;
use casku::overhead::{derived_key_update, key_update_bytes};
use casku::wire::Wire;
use casku_sim::swarm::Swarm;
use casku_sim::ScenarioConfig;

use crate::args::KeyupdateArgs;
use crate::output::{csv_bytes, write_atomic};
use crate::CliError;

#[derive(Debug, Serialize)]
struct Row {
    n_cm: usize,
    agreed: bool,
    t_hf: u64,
    t_me: u64,
    t_mm: u64,
    t_xor: u64,
    t_sss: u64,
    bytes: usize,
    matches: bool,
}

pub fn keyupdate(a: &KeyupdateArgs) -> Result<(), CliError> {
    // Only the members are rekeyed; no NUAVs join first.
    let cfg = a.scenario.resolve(ScenarioConfig { n_nuav: 0, ..ScenarioConfig::default() })?;
    let gp = super::group(&cfg);
    let pc = super::protocol_config(&cfg);
    let abort = |e: &dyn std::fmt::Display| CliError::Abort(e.to_string());
    if gp.is_tiny() && cfg.n_cm >= 11 {
        return Err(CliError::Config("the tiny group rekeys at most 10 members".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.rng_seed);
    let sw = Swarm::build(&gp, 0, cfg.n_cm, 1, &mut rng).map_err(|e| abort(&e))?;
    let t4 = Timestamp(1_000);
    let pids: Vec<Block32> = sw.ch.members.iter().map(|m| m.pid).collect();
    let (res, ops) = opcount::measure(|| {
        let (key, inits) = ch_init_update(&gp, &sw.ch, t4, &mut rng)?;
        let mut shares = Vec::new();
        let mut envs = Vec::new();
        for (l, (m, init)) in sw.ch.members.iter().zip(&inits).enumerate() {
            let (s, e) = cm_recover_and_share(&gp, m, l, init, t4, &pc)?;
            shares.push(s);
            envs.push(e);
        }
        let keys = (0..pids.len())
            .map(|l| cm_reconstruct(&gp, l, &shares[l], &envs, &inits[l], &pids))
            .collect::<Result<Vec<_>, _>>()?;
        let bytes = inits.iter().map(|i| i.encode(&gp).len()).sum::<usize>()
            + envs.iter().map(|e| e.encode(&gp).len()).sum::<usize>();
        Ok::<_, casku::error::ProtocolError>((key, keys, bytes))
    });
    let (key, keys, bytes) = res.map_err(|e| abort(&e))?;
    let agreed = keys.iter().all(|k| *k == key);
    let want_ops = derived_key_update(cfg.n_cm as u64);
    let want_bytes = key_update_bytes(gp.elem_len(), cfg.n_cm);
    let matches = ops == want_ops && bytes == want_bytes;
    println!("{} members rekeyed in the {} group; all agree: {agreed}", cfg.n_cm, cfg.group.preset().name());
    println!("  ops   {ops}  (closed form {want_ops})");
    println!("  bytes {bytes}  (closed form {want_bytes})");
    if gp.is_tiny() && ops.t_hf > want_ops.t_hf {
        println!("  abscissa collisions mod q cost {} extra hashes", ops.t_hf - want_ops.t_hf);
    }
    if let Some(p) = &a.out {
        let row = Row {
            n_cm: cfg.n_cm,
            agreed,
            t_hf: ops.t_hf,
            t_me: ops.t_me,
            t_mm: ops.t_mm,
            t_xor: ops.t_xor,
            t_sss: ops.t_sss,
            bytes,
            matches,
        };
        write_atomic(p, &csv_bytes(&[row])?)?;
    }
    if !agreed {
        return Err(CliError::Abort("members reconstructed different keys".into()));
    }
    Ok(())
}
