use casku::error::Mode;
use casku::overhead::{derived_join, join_bytes, key_update_bytes};
use casku_sim::config::{GroupChoice, LinkModel, ScenarioConfig};
use casku_sim::engine::tx_time_ns;
use casku_sim::{run_scenario, SimError};
use proptest::prelude::*;

fn tiny(n: usize, m: usize, c: usize, mam: bool) -> ScenarioConfig {
    ScenarioConfig { n_nuav: n, n_cm: m, n_ch: c, mam, group: GroupChoice::Tiny, ..Default::default() }
}

#[test]
fn full_group_bytes_and_ops_match_closed_forms() {
    for mam in [true, false] {
        let cfg = ScenarioConfig { n_nuav: 3, n_cm: 4, n_ch: 3, mam, ..Default::default() };
        let m = run_scenario(&cfg).unwrap();
        assert_eq!(m.bytes_join, join_bytes(256, 3, 4, 3, mam, Mode::Hardened), "mam={mam}");
        assert_eq!(m.bytes_keyupdate, key_update_bytes(256, 3 + 4));
        if mam {
            assert_eq!(m.ops_join, derived_join(3, 4, 3, Mode::Hardened));
        }
    }
}

#[test]
fn literal_mode_shrinks_acks() {
    let mut cfg = tiny(2, 3, 4, false);
    cfg.paper_literal = true;
    let m = run_scenario(&cfg).unwrap();
    assert_eq!(m.bytes_join, join_bytes(1, 2, 3, 4, false, Mode::PaperLiteral));
}

#[test]
fn same_seed_same_metrics() {
    let cfg = ScenarioConfig { n_nuav: 2, n_cm: 3, n_ch: 2, ..Default::default() };
    assert_eq!(run_scenario(&cfg).unwrap(), run_scenario(&cfg).unwrap());
    let other = ScenarioConfig { rng_seed: 2, ..cfg.clone() };
    // timing does not depend on key material
    assert_eq!(run_scenario(&other).unwrap().join_latency_ms, run_scenario(&cfg).unwrap().join_latency_ms);
}

#[test]
fn no_newcomers_no_join() {
    for mam in [true, false] {
        let m = run_scenario(&tiny(0, 3, 3, mam)).unwrap();
        assert_eq!(m.join_latency_ms, 0.0);
        assert_eq!(m.bytes_join, 0);
        assert_eq!(m.frames_join, 0);
        assert_eq!(m.bytes_keyupdate, key_update_bytes(1, 3));
    }
}

#[test]
fn latency_covers_the_critical_transmissions() {
    let cfg = ScenarioConfig { n_nuav: 4, n_cm: 3, n_ch: 3, link: LinkModel::ideal(), key_update: false, ..Default::default() };
    let m = run_scenario(&cfg).unwrap();
    // every request, one challenge, one response, the broadcast, the acks
    // and the last confirmation are sequential on the medium
    let e = 256;
    let sizes = casku::wire::sizes::join_request(e) * 4
        + casku::wire::sizes::aggregate_challenge(e)
        + casku::wire::sizes::cm_response(e)
        + casku::wire::sizes::peer_broadcast(e)
        + 2 * casku::wire::sizes::peer_ack(true)
        + casku::wire::sizes::nuav_confirm(e);
    assert!(m.join_latency_ms * 1e6 >= tx_time_ns(sizes, cfg.bitrate) as f64);
    assert_eq!(m.bytes_keyupdate, 0);
}

#[test]
fn energy_is_conserved_across_roles() {
    let cfg = ScenarioConfig { n_nuav: 3, n_cm: 4, n_ch: 3, key_update: false, ..Default::default() };
    let m = run_scenario(&cfg).unwrap();
    let by_role = 3.0 * m.e_nuav_j + 4.0 * m.e_cm_j + m.e_ch_j + 2.0 * m.e_otherch_j;
    assert!((by_role - m.e_total_j).abs() < 1e-12);
    // nobody is idler than an idle radio
    let floor = cfg.power.rx_idle * m.energy_window_ms * 1e-6;
    for e in [m.e_nuav_j, m.e_cm_j, m.e_ch_j, m.e_otherch_j] {
        assert!(e > floor);
    }
    assert_eq!(m.depleted, 0);
    let starved = ScenarioConfig { initial_energy: 1e-4, ..cfg };
    assert_eq!(run_scenario(&starved).unwrap().depleted, 3 + 4 + 3);
}

#[test]
fn single_cluster_has_no_peers() {
    let m = run_scenario(&tiny(2, 2, 1, true)).unwrap();
    assert_eq!(m.e_otherch_j, 0.0);
    assert_eq!(m.bytes_join, join_bytes(1, 2, 2, 1, true, Mode::Hardened));
}

#[test]
fn invalid_configs_are_refused() {
    let bad = [
        ScenarioConfig { bitrate: 0, ..Default::default() },
        ScenarioConfig { n_cm: 0, ..Default::default() },
        ScenarioConfig { n_ch: 0, ..Default::default() },
        tiny(6, 5, 2, true),
    ];
    for cfg in bad {
        assert!(matches!(run_scenario(&cfg), Err(SimError::ConfigInvalid(_))), "{cfg:?}");
    }
    // a tiny swarm too big to rekey still joins
    let cfg = ScenarioConfig { key_update: false, ..tiny(6, 5, 2, true) };
    assert!(run_scenario(&cfg).is_ok());
}

#[test]
fn tracking_positions_changes_nothing_else() {
    let cfg = tiny(2, 2, 2, true);
    let plain = run_scenario(&cfg).unwrap();
    let tracked = run_scenario(&ScenarioConfig { mobility: true, ..cfg }).unwrap();
    assert_eq!(tracked.positions.as_ref().map(Vec::len), Some(2 + 1 + 2 + 1));
    assert!(!ScenarioConfig::default().mobility);
    assert_eq!(casku_sim::Metrics { positions: None, ..tracked }, plain);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn on_air_bytes_match_closed_forms(n in 0usize..5, m in 1usize..5, c in 1usize..5, mam: bool, seed: u64) {
        let cfg = ScenarioConfig { rng_seed: seed, ..tiny(n, m, c, mam) };
        let out = run_scenario(&cfg).unwrap();
        prop_assert_eq!(out.bytes_join, join_bytes(1, n, m, c, mam, Mode::Hardened));
        prop_assert_eq!(out.bytes_keyupdate, key_update_bytes(1, n + m));
        if mam && n > 0 {
            prop_assert_eq!(out.ops_join, derived_join(n as u64, m as u64, c as u64, Mode::Hardened));
        }
    }
}
