//! The combined suite table: one row per game and strategy.

use std::io::Write;

use serde::Serialize;

use casku::error::{Mode, ProtocolConfig};
use casku::group::GroupParams;
use casku::par::Execution;

use crate::dcg::{run_dcg, Guesser};
use crate::dug::{run_dug, Strategy};
use crate::unlink::unlink_trial;
use crate::AdversaryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Game {
    Dug,
    Dcg,
    Unlink,
}

impl Game {
    pub const ALL: [Game; 3] = [Game::Dug, Game::Dcg, Game::Unlink];
}

impl std::str::FromStr for Game {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dug" => Ok(Game::Dug),
            "dcg" => Ok(Game::Dcg),
            "unlink" => Ok(Game::Unlink),
            _ => Err(format!("unknown suite {s:?} (dug, dcg, unlink)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub dug_trials: usize,
    pub dcg_rounds: usize,
    pub unlink_trials: usize,
    /// Independent sessions each game's trials are split over.
    pub sessions: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { dug_trials: 10_000, dcg_rounds: 10_000, unlink_trials: 10_000, sessions: 16, seed: 1 }
    }
}

/// One table row. `wins` counts forgeries accepted (DUG) or correct
/// guesses (DCG, unlinkability). `threshold` is the largest passing value:
/// a win count for DUG, an accuracy for the others.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteRow {
    pub suite: String,
    pub trials: usize,
    pub wins: u64,
    pub threshold: f64,
    pub pass: bool,
}

/// DCG accuracies must sit within this distance of one half.
pub const DCG_BAND: f64 = 0.02;

/// Rows for every game in `games`, in the order given.
pub fn run(gp: &GroupParams, cfg: &SuiteConfig, games: &[Game], exec: Execution) -> Result<Vec<SuiteRow>, AdversaryError> {
    let mut rows = Vec::new();
    for g in games {
        match g {
            Game::Dug => dug_rows(gp, cfg, exec, &mut rows)?,
            Game::Dcg => dcg_rows(gp, cfg, exec, &mut rows)?,
            Game::Unlink => unlink_rows(gp, cfg, exec, &mut rows)?,
        }
    }
    Ok(rows)
}

fn dug_rows(gp: &GroupParams, cfg: &SuiteConfig, exec: Execution, rows: &mut Vec<SuiteRow>) -> Result<(), AdversaryError> {
    for s in Strategy::ALL {
        let r = run_dug(gp, s, cfg.dug_trials, cfg.sessions, ProtocolConfig::default(), cfg.seed, exec)?;
        rows.push(SuiteRow {
            suite: format!("dug/{}", s.name()),
            trials: r.trials,
            wins: r.wins,
            threshold: 0.0,
            pass: r.wins == 0,
        });
    }
    Ok(())
}

fn dcg_rows(gp: &GroupParams, cfg: &SuiteConfig, exec: Execution, rows: &mut Vec<SuiteRow>) -> Result<(), AdversaryError> {
    // Two members keep a round at two dealer encryptions and two shares.
    let r = run_dcg(gp, cfg.dcg_rounds, 2, cfg.sessions, cfg.seed, exec)?;
    for (g, name) in [(Guesser::Random, "dcg/random"), (Guesser::Correlation, "dcg/correlation")] {
        let wins = match g {
            Guesser::Random => r.correct_random,
            Guesser::Correlation => r.correct_correlation,
        };
        rows.push(SuiteRow {
            suite: name.into(),
            trials: r.rounds,
            wins,
            threshold: 0.5 + DCG_BAND,
            pass: (r.accuracy(g) - 0.5).abs() <= DCG_BAND,
        });
    }
    Ok(())
}

fn unlink_rows(gp: &GroupParams, cfg: &SuiteConfig, exec: Execution, rows: &mut Vec<SuiteRow>) -> Result<(), AdversaryError> {
    let r = unlink_trial(gp, cfg.unlink_trials, Mode::Hardened, false, cfg.sessions, cfg.seed, exec)?;
    rows.push(SuiteRow {
        suite: "unlink/outsider".into(),
        trials: r.trials,
        wins: r.correct,
        threshold: r.threshold(),
        pass: r.accuracy() <= r.threshold(),
    });
    Ok(())
}

pub fn write_csv<W: Write>(rows: &[SuiteRow], w: W) -> Result<(), csv::Error> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_tiny_run_writes_one_row_per_game() {
        let cfg = SuiteConfig { dug_trials: 8, dcg_rounds: 8, unlink_trials: 8, sessions: 2, seed: 3 };
        let rows = run(&GroupParams::tiny(), &cfg, &Game::ALL, Execution::Sequential).unwrap();
        assert_eq!(rows.len(), Strategy::ALL.len() + 3);
        let mut out = Vec::new();
        write_csv(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("suite,trials,wins,threshold,pass\n"));
        assert_eq!(text.lines().count(), rows.len() + 1);
    }
}
