use casku::group::GroupParams;
use casku::par::Execution;
use casku_adversary::suite::{self, Game, SuiteConfig};
use casku_adversary::tamper;

#[test]
fn small_full_group_suite_passes_forgery_rows() {
    let cfg = SuiteConfig { dug_trials: 60, dcg_rounds: 60, unlink_trials: 60, sessions: 2, seed: 9 };
    let rows = suite::run(&GroupParams::full(), &cfg, &[Game::Dug], Execution::Parallel).unwrap();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!(r.suite.starts_with("dug/"));
        assert_eq!(r.trials, 60);
        assert_eq!(r.wins, 0, "{r:?}");
        assert!(r.pass);
    }
}

#[test]
fn suite_is_reproducible_and_execution_independent() {
    let cfg = SuiteConfig { dug_trials: 30, dcg_rounds: 200, unlink_trials: 200, sessions: 3, seed: 4 };
    let gp = GroupParams::tiny();
    let a = suite::run(&gp, &cfg, &Game::ALL, Execution::Parallel).unwrap();
    let b = suite::run(&gp, &cfg, &Game::ALL, Execution::Sequential).unwrap();
    assert_eq!(a, b);
    let mut csv = Vec::new();
    suite::write_csv(&a, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), a.len() + 1);
}

#[test]
fn one_transcript_tamper_sweep_has_no_false_accepts() {
    let report = tamper::sweep(&[41], Execution::Parallel);
    assert!(report.flips() > 10_000);
    assert!(report.false_accepts.is_empty(), "{:?}", report.false_accepts);
}
