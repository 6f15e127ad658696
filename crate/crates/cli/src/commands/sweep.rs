use casku::par::Execution;
use casku_sim::sweep::{self, SweepParam};
use casku_sim::ScenarioConfig;

use crate::args::{mbps, SweepArgs};
use crate::output::emit;
use crate::CliError;

pub fn sweep(a: &SweepArgs, exec: Execution) -> Result<(), CliError> {
    let base = a.scenario.resolve(ScenarioConfig::default())?;
    let param: SweepParam = a.param.parse().map_err(CliError::Config)?;
    let values = match param {
        SweepParam::Bitrate => a.values.iter().map(|&v| mbps(v)).collect::<Result<Vec<_>, _>>()?,
        _ => a.values.clone(),
    };
    let points = sweep::points(&base, param, &values, a.mam.variants());
    for p in &points {
        p.cfg.validate().map_err(|e| CliError::Config(format!("{}: {e}", p.scenario_id)))?;
    }
    let results = sweep::run(points, exec)?;
    let mut csv = Vec::new();
    sweep::write_csv(&results, &mut csv).map_err(|e| CliError::Config(e.to_string()))?;
    emit(a.out.as_deref(), &csv)?;
    if a.out.is_some() {
        println!("{:<28} {:>12} {:>12} {:>12} {:>12}", "scenario-id", "latency_ms", "e_ch_j", "e_cm_j", "bytes_join");
        for r in &results {
            let m = &r.metrics;
            println!(
                "{:<28} {:>12.3} {:>12.6} {:>12.6} {:>12}",
                r.point.scenario_id, m.join_latency_ms, m.e_ch_j, m.e_cm_j, m.bytes_join
            );
        }
    }
    Ok(())
}
