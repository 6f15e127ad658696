use casku::group::GroupParams;
use casku::par::Execution;
use casku_adversary::suite::{self, Game, SuiteConfig};

use crate::args::AttackArgs;
use crate::output::emit;
use crate::CliError;

pub fn attack(a: &AttackArgs, exec: Execution) -> Result<(), CliError> {
    let games = a.suite.iter().map(|s| s.parse::<Game>()).collect::<Result<Vec<_>, _>>().map_err(CliError::Config)?;
    if a.sessions == 0 {
        return Err(CliError::Config("--sessions must be at least 1".into()));
    }
    let gp = GroupParams::preset(a.group.preset());
    let cfg = SuiteConfig {
        dug_trials: a.trials,
        dcg_rounds: a.trials,
        unlink_trials: a.trials,
        sessions: a.sessions,
        seed: a.seed,
    };
    let rows = suite::run(&gp, &cfg, &games, exec)?;
    let mut csv = Vec::new();
    suite::write_csv(&rows, &mut csv).map_err(|e| CliError::Config(e.to_string()))?;
    emit(a.out.as_deref(), &csv)?;
    if a.out.is_some() {
        for r in &rows {
            let verdict = if r.pass { "pass" } else { "FAIL" };
            println!("{:<20} {:>7} trials {:>7} wins  threshold {:<8.4} {verdict}", r.suite, r.trials, r.wins, r.threshold);
        }
    }
    Ok(())
}
