use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use casku::block::Timestamp;
use casku::cross_cluster::{dest_ch_verify_transfer, source_ch_build_transfer};
use casku::opcount::{self, OpCounts};
use casku::overhead::{
    delta_csv, delta_report, derived_join, derived_measurements, derived_transfer, join_bytes, key_update_bytes,
    predict_comm, predict_comp, predict_p2, predict_transfer, FieldSizes, Stage,
};
use casku_sim::swarm::Swarm;
use casku_sim::{run_scenario, ScenarioConfig};

use crate::args::OverheadArgs;
use crate::output::write_atomic;
use crate::CliError;

fn check(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "MISMATCH"
    }
}

/// Operation counts of one transfer, source and destination together.
fn measured_transfer(cfg: &ScenarioConfig) -> Result<OpCounts, CliError> {
    let gp = super::group(cfg);
    let pc = super::protocol_config(cfg);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.rng_seed);
    let mut sw = Swarm::build(&gp, 0, 1, 2, &mut rng).map_err(|e| CliError::Abort(e.to_string()))?;
    let mover = sw.cms[0].pid;
    let dest = sw.peers[0].clone();
    let t3 = Timestamp(1_000);
    let (res, ops) = opcount::measure(|| {
        let req = source_ch_build_transfer(&sw.ch, &mover, t3)?;
        dest_ch_verify_transfer(&dest, &mut sw.net, &req, t3, &pc)
    });
    res.map_err(|e| CliError::Abort(e.to_string()))?;
    Ok(ops)
}

pub fn overhead(a: &OverheadArgs) -> Result<(), CliError> {
    let mut cfg = a.scenario.resolve(ScenarioConfig::default())?;
    cfg.mam = true;
    let sizes = FieldSizes { z_bits: a.z_bits, t_bits: a.t_bits };
    let (n, m, c) = (cfg.n_nuav as u64, cfg.n_cm as u64, cfg.n_ch as u64);
    let elem = super::group(&cfg).elem_len();
    let mode = cfg.mode();

    println!("published polynomials at N_NUAV={n}, N_CM={m}, N_CH={c}, |Zp*|={} bits, |T|={} bits", a.z_bits, a.t_bits);
    for s in Stage::ALL {
        println!("  {s:<11} {}  comm {} bits", predict_comp(s, n, m), predict_comm(s, m, c).total_bits(sizes));
    }
    let p2 = predict_p2(n, m, sizes);
    println!("  join volume comparison: aggregated {} bits, per-request {} bits", p2.mam_bits, p2.baseline_bits);
    println!("  transfer    {}", predict_transfer());

    let metrics = run_scenario(&cfg)?;
    let want_join = join_bytes(elem, cfg.n_nuav, cfg.n_cm, cfg.n_ch, true, mode);
    let want_ku = key_update_bytes(elem, cfg.n_nuav + cfg.n_cm);
    let want_ops = derived_join(n, m, c, mode);
    let transfer = measured_transfer(&cfg)?;
    println!("this implementation ({elem}-byte group elements), simulator against closed form");
    println!("  join bytes        {:>8} {:>8}  {}", metrics.bytes_join, want_join, check(metrics.bytes_join == want_join));
    println!("  key-update bytes  {:>8} {:>8}  {}", metrics.bytes_keyupdate, want_ku, check(metrics.bytes_keyupdate == want_ku));
    println!("  join ops          {}  {}", metrics.ops_join, check(metrics.ops_join == want_ops));
    println!("  transfer ops      {}  {}", transfer, check(transfer == derived_transfer()));

    let rows = delta_report(&derived_measurements(elem, n, m, c, mode), n, m, c, sizes);
    println!("deltas (measured - published)");
    for r in &rows {
        println!("  {:<11} {:<6} {:>10} {:>10} {:>+10}", r.stage.to_string(), r.term, r.paper_value, r.measured_value, r.delta());
    }
    if let Some(p) = &a.out {
        write_atomic(p, delta_csv(&rows).as_bytes())?;
    }
    if metrics.bytes_join != want_join || metrics.bytes_keyupdate != want_ku || metrics.ops_join != want_ops {
        return Err(CliError::Abort("simulator counters disagree with the closed forms".into()));
    }
    Ok(())
}
