//! Cost formulas.
//!
//! Two families live here. The published polynomials (`predict_*`) give
//! operation and bit counts per stage as functions of the cluster sizes. The
//! `derived_*` functions give what this implementation actually does, from
//! its own message inventory and primitive calls; those are exact and are
//! what the simulator and the counters are checked against. [`delta_report`]
//! lines the two up.

use std::fmt;
use std::str::FromStr;

use crate::error::Mode;
use crate::opcount::OpCounts;
use crate::wire::sizes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Init,
    UavAuth,
    KeyUpdate,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Init, Stage::UavAuth, Stage::KeyUpdate];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Init => "init",
            Stage::UavAuth => "uav_auth",
            Stage::KeyUpdate => "key_update",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown stage {0:?}")]
pub struct UnknownStage(pub String);

impl FromStr for Stage {
    type Err = UnknownStage;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "init" => Ok(Stage::Init),
            "uav_auth" | "join" => Ok(Stage::UavAuth),
            "key_update" | "keyupdate" => Ok(Stage::KeyUpdate),
            _ => Err(UnknownStage(s.to_owned())),
        }
    }
}

/// Field widths in bits: a group/exponent-sized field and a timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldSizes {
    pub z_bits: u64,
    pub t_bits: u64,
}

impl Default for FieldSizes {
    fn default() -> Self {
        FieldSizes { z_bits: 256, t_bits: 32 }
    }
}

/// A message volume counted in fields rather than bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CommBits {
    pub zp_elems: u64,
    pub timestamps: u64,
}

impl CommBits {
    pub fn total_bits(&self, sizes: FieldSizes) -> u64 {
        self.zp_elems * sizes.z_bits + self.timestamps * sizes.t_bits
    }
}

/// Published computation polynomial for one stage.
pub fn predict_comp(stage: Stage, n_nuav: u64, n_cm: u64) -> OpCounts {
    match stage {
        Stage::Init => OpCounts::new(3, 2, 1, 0, 0),
        Stage::UavAuth => OpCounts::new(n_cm + 18, 8, n_nuav + 2 * n_cm + 3, n_cm + 10, 0),
        // N² − 1 and 3N − 1 are evaluated in the integers; N = 0 is clamped
        // to the empty cluster.
        Stage::KeyUpdate => OpCounts::new(
            n_cm + 2,
            (3 * n_cm).saturating_sub(1),
            (n_cm * n_cm).saturating_sub(1),
            2 * n_cm + 10,
            n_cm,
        ),
    }
}

/// Published communication polynomial for one stage.
pub fn predict_comm(stage: Stage, n_cm: u64, n_ch: u64) -> CommBits {
    match stage {
        Stage::Init => CommBits { zp_elems: 10, timestamps: 0 },
        Stage::UavAuth => CommBits { zp_elems: 6 * n_cm + 4 * n_ch + 18, timestamps: 6 * n_cm + n_ch + 4 },
        Stage::KeyUpdate => CommBits { zp_elems: (n_cm * n_cm + 5 * n_cm).saturating_sub(1), timestamps: n_cm },
    }
}

/// Aggregated versus per-request join volume as given by the closed-form
/// comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct P2 {
    pub mam_bits: u64,
    pub baseline_bits: u64,
    /// Set when there is nothing to join.
    pub degenerate: bool,
}

pub fn predict_p2(n_nuav: u64, n_cm: u64, sizes: FieldSizes) -> P2 {
    let mam = CommBits { zp_elems: 20, timestamps: 4 };
    let base = CommBits { zp_elems: 7 * n_nuav + 3 * n_cm + 8, timestamps: 2 * n_nuav + n_cm + 1 };
    P2 { mam_bits: mam.total_bits(sizes), baseline_bits: base.total_bits(sizes), degenerate: n_nuav == 0 }
}

/// Published per-transfer cost of a cross-cluster hand-over.
pub fn predict_transfer() -> OpCounts {
    OpCounts::new(3, 0, 0, 2, 0)
}

// ---- this implementation ----

/// One ground station key plus one CH registration.
pub fn derived_init() -> OpCounts {
    OpCounts::new(2, 2, 0, 0, 0)
}

/// A whole aggregated join: `n_nuav` requests, `n_cm` members, `n_ch`
/// clusters in the swarm. Requires at least one NUAV and one member.
pub fn derived_join(n_nuav: u64, n_cm: u64, n_ch: u64, mode: Mode) -> OpCounts {
    let (n, m, p) = (n_nuav, n_cm, n_ch.saturating_sub(1));
    let ack_hashes = match mode {
        Mode::Hardened => 2 * p,
        Mode::PaperLiteral => 0,
    };
    OpCounts::new(
        4 * n + 6 * m + 2 * p + ack_hashes + 5,
        4 * n + 2 * m + p + 3,
        3 * n + 2 * m + p - 3,
        5 * m + 2 * p + 3,
        0,
    )
}

/// A full rekey of `n_cm` members, assuming every abscissa is found on the
/// first try.
pub fn derived_key_update(n_cm: u64) -> OpCounts {
    let m = n_cm;
    OpCounts::new(3 * m * m + 3 * m, (2 * m * m).saturating_sub(m), 0, 2 * m * m, m)
}

pub fn derived_transfer() -> OpCounts {
    OpCounts::new(3, 0, 0, 2, 0)
}

/// Bytes of one aggregated join round. Peer traffic exists only when there
/// are other clusters.
pub fn mam_join_bytes(elem_len: usize, n_nuav: usize, n_cm: usize, n_ch: usize, mode: Mode) -> usize {
    if n_nuav == 0 {
        return 0;
    }
    let e = elem_len;
    let peers = n_ch.saturating_sub(1);
    let bound = mode == Mode::Hardened;
    let peer_bytes = if peers > 0 { sizes::peer_broadcast(e) + peers * sizes::peer_ack(bound) } else { 0 };
    n_nuav * (sizes::join_request(e) + sizes::nuav_confirm(e))
        + n_cm * (sizes::aggregate_challenge(e) + sizes::cm_response(e))
        + peer_bytes
}

/// Bytes when each request is handled alone and each member response is
/// relayed to every other cluster head separately.
pub fn baseline_join_bytes(elem_len: usize, n_nuav: usize, n_cm: usize, n_ch: usize, mode: Mode) -> usize {
    let e = elem_len;
    let peers = n_ch.saturating_sub(1);
    let bound = mode == Mode::Hardened;
    let per_response = peers * (sizes::peer_broadcast(e) + sizes::peer_ack(bound));
    let one = sizes::join_request(e)
        + sizes::nuav_confirm(e)
        + n_cm * (sizes::aggregate_challenge(e) + sizes::cm_response(e) + per_response);
    n_nuav * one
}

pub fn join_bytes(elem_len: usize, n_nuav: usize, n_cm: usize, n_ch: usize, mam: bool, mode: Mode) -> usize {
    if mam {
        mam_join_bytes(elem_len, n_nuav, n_cm, n_ch, mode)
    } else {
        baseline_join_bytes(elem_len, n_nuav, n_cm, n_ch, mode)
    }
}

/// One init per member plus one share envelope per member (none when the
/// member is alone).
pub fn key_update_bytes(elem_len: usize, n_cm: usize) -> usize {
    if n_cm == 0 {
        return 0;
    }
    let peers = n_cm - 1;
    let envelopes = if peers > 0 { n_cm * sizes::share_envelope(peers) } else { 0 };
    n_cm * sizes::key_update_init(elem_len, peers) + envelopes
}

/// Bytes of one cross-cluster request.
pub fn transfer_bytes() -> usize {
    sizes::transfer_request()
}

/// Measured-side inputs for [`delta_report`].
#[derive(Debug, Clone, Copy)]
pub struct Measured {
    pub stage: Stage,
    pub ops: OpCounts,
    pub bits: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaRow {
    pub stage: Stage,
    pub term: &'static str,
    pub paper_value: u64,
    pub measured_value: u64,
}

impl DeltaRow {
    pub fn delta(&self) -> i128 {
        self.measured_value as i128 - self.paper_value as i128
    }
}

pub const DELTA_HEADER: [&str; 5] = ["stage", "term", "paper_value", "measured_value", "delta"];

/// Row-by-row comparison of measured costs with the published polynomials,
/// evaluated at the same sizes.
pub fn delta_report(measured: &[Measured], n_nuav: u64, n_cm: u64, n_ch: u64, sizes: FieldSizes) -> Vec<DeltaRow> {
    let mut rows = Vec::new();
    for m in measured {
        let published = predict_comp(m.stage, n_nuav, n_cm);
        for (term, p, v) in [
            ("t_hf", published.t_hf, m.ops.t_hf),
            ("t_me", published.t_me, m.ops.t_me),
            ("t_mm", published.t_mm, m.ops.t_mm),
            ("t_xor", published.t_xor, m.ops.t_xor),
            ("t_sss", published.t_sss, m.ops.t_sss),
        ] {
            rows.push(DeltaRow { stage: m.stage, term, paper_value: p, measured_value: v });
        }
        let bits = predict_comm(m.stage, n_cm, n_ch).total_bits(sizes);
        rows.push(DeltaRow { stage: m.stage, term: "bits", paper_value: bits, measured_value: m.bits });
    }
    rows
}

/// The implementation's own figures for every stage at the given sizes.
/// Init bits count the credential bundle handed to a cluster head.
pub fn derived_measurements(elem_len: usize, n_nuav: u64, n_cm: u64, n_ch: u64, mode: Mode) -> Vec<Measured> {
    let e = elem_len as u64;
    let init_bits = 8 * (5 * 32 + 2 * e);
    vec![
        Measured { stage: Stage::Init, ops: derived_init(), bits: init_bits },
        Measured {
            stage: Stage::UavAuth,
            ops: derived_join(n_nuav, n_cm, n_ch, mode),
            bits: 8 * mam_join_bytes(elem_len, n_nuav as usize, n_cm as usize, n_ch as usize, mode) as u64,
        },
        Measured {
            stage: Stage::KeyUpdate,
            ops: derived_key_update(n_cm),
            bits: 8 * key_update_bytes(elem_len, n_cm as usize) as u64,
        },
    ]
}

/// CSV text with [`DELTA_HEADER`] columns.
pub fn delta_csv(rows: &[DeltaRow]) -> String {
    let mut s = DELTA_HEADER.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&format!("{},{},{},{},{}\n", r.stage, r.term, r.paper_value, r.measured_value, r.delta()));
    }
    s
}
