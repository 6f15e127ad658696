//! Data-confidentiality game.
//!
//! Each round the challenger rekeys the cluster with the real key-update
//! messages, flips `b`, and hands out `m_b ⊕ H(key_new)`. Guessers see the
//! ciphertext, both messages and the full rekey transcript (inits and share
//! envelopes are broadcast).

use std::collections::HashSet;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use casku::block::{xor32, Block32, Timestamp};
use casku::error::ProtocolConfig;
use casku::group::GroupParams;
use casku::hash::hash_to_block;
use casku::key_update::{cm_recover_and_share, Dealer, KeyUpdateInit, ShareEnvelope};
use casku::par::Execution;
use casku::registry::{ChCredential, GbsNetwork};

use crate::{chunk_ranges, derive_seed, AdversaryError};

const KEYSTREAM_TAG: &str = "dcg/keystream";

/// `m ⊕ H(key)`: the game's encryption under the fresh session key.
pub fn encrypt(key: &Block32, m: &Block32) -> Block32 {
    xor32(m, &hash_to_block(KEYSTREAM_TAG, &[&key.0]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guesser {
    /// A fair coin.
    Random,
    /// Picks the message whose XOR with the ciphertext sits closest, in
    /// Hamming distance, to some block of the rekey transcript.
    Correlation,
}

/// What the adversary sees in one round.
#[derive(Debug, Clone)]
pub struct RoundView {
    pub m0: Block32,
    pub m1: Block32,
    pub ciphertext: Block32,
    pub inits: Vec<KeyUpdateInit>,
    pub envelopes: Vec<ShareEnvelope>,
}

impl RoundView {
    fn transcript_blocks(&self) -> Vec<Block32> {
        let mut out = Vec::new();
        for i in &self.inits {
            out.push(i.f_masked);
            out.push(i.confirm);
        }
        for e in &self.envelopes {
            out.extend(e.entries.iter().map(|(_, u)| *u));
        }
        out
    }
}

fn distance(a: &Block32, b: &Block32) -> u32 {
    a.0.iter().zip(&b.0).map(|(x, y)| (x ^ y).count_ones()).sum()
}

pub fn guess(g: Guesser, view: &RoundView, rng: &mut dyn RngCore) -> bool {
    match g {
        Guesser::Random => rng.gen(),
        Guesser::Correlation => {
            let blocks = view.transcript_blocks();
            let score = |m: &Block32| {
                let pad = xor32(&view.ciphertext, m);
                blocks.iter().map(|t| distance(&pad, t)).min().unwrap_or(256)
            };
            score(&view.m1) < score(&view.m0)
        }
    }
}

pub struct DcgSession {
    gp: GroupParams,
    ch: ChCredential,
    cfg: ProtocolConfig,
    used: HashSet<Block32>,
    clock: u64,
}

impl DcgSession {
    pub fn new(gp: &GroupParams, n_cm: usize, seed: u64) -> Result<Self, AdversaryError> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut net = GbsNetwork::setup(gp, 1, &mut rng)?;
        let ch = net.register_ch(0, b"ch", &mut rng)?;
        for l in 0..n_cm {
            net.register_cm(ch.cluster, format!("cm{l}").as_bytes(), &mut rng)?;
        }
        Ok(DcgSession {
            gp: gp.clone(),
            ch: net.ch_credential(ch.cluster)?,
            cfg: ProtocolConfig::default(),
            used: HashSet::new(),
            clock: 1_000,
        })
    }

    /// One challenge: rekey, encrypt `m_b`, return `b` and the view.
    pub fn dcg_round(&mut self, m0: Block32, m1: Block32, rng: &mut dyn RngCore) -> Result<(bool, RoundView), AdversaryError> {
        if m0 == m1 || self.used.contains(&m0) || self.used.contains(&m1) {
            return Err(AdversaryError::RepeatedChallenge);
        }
        self.used.insert(m0);
        self.used.insert(m1);
        self.clock += 1_000;
        let t4 = Timestamp(self.clock);
        let dealer = Dealer::new(&self.gp, &self.ch, rng)?;
        let inits: Vec<KeyUpdateInit> = (0..dealer.len()).map(|l| dealer.init_for(l, t4)).collect();
        let envelopes = self
            .ch
            .members
            .iter()
            .zip(&inits)
            .enumerate()
            .map(|(l, (m, init))| cm_recover_and_share(&self.gp, m, l, init, t4, &self.cfg).map(|(_, e)| e))
            .collect::<Result<Vec<_>, _>>()?;
        let b: bool = rng.gen();
        let ciphertext = encrypt(&dealer.key(), if b { &m1 } else { &m0 });
        Ok((b, RoundView { m0, m1, ciphertext, inits, envelopes }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcgReport {
    pub rounds: usize,
    pub correct_random: u64,
    pub correct_correlation: u64,
}

impl DcgReport {
    pub fn accuracy(&self, g: Guesser) -> f64 {
        let c = match g {
            Guesser::Random => self.correct_random,
            Guesser::Correlation => self.correct_correlation,
        };
        c as f64 / self.rounds.max(1) as f64
    }
}

/// `rounds` challenge rounds; both guessers answer every round.
pub fn run_dcg(
    gp: &GroupParams,
    rounds: usize,
    n_cm: usize,
    sessions: usize,
    seed: u64,
    exec: Execution,
) -> Result<DcgReport, AdversaryError> {
    let ranges = chunk_ranges(rounds, sessions);
    let parts = exec.map(ranges.into_iter().enumerate().collect(), |(s, range)| -> Result<(u64, u64), AdversaryError> {
        let mut hits = (0, 0);
        if range.is_empty() {
            return Ok(hits);
        }
        let mut session = DcgSession::new(gp, n_cm, derive_seed(seed, 2, s as u64))?;
        for i in range {
            let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, 3, i as u64));
            let (m0, m1) = (Block32::random(&mut rng), Block32::random(&mut rng));
            let (b, view) = session.dcg_round(m0, m1, &mut rng)?;
            hits.0 += u64::from(guess(Guesser::Random, &view, &mut rng) == b);
            hits.1 += u64::from(guess(Guesser::Correlation, &view, &mut rng) == b);
        }
        Ok(hits)
    });
    let mut report = DcgReport { rounds, correct_random: 0, correct_correlation: 0 };
    for p in parts {
        let (a, b) = p?;
        report.correct_random += a;
        report.correct_correlation += b;
    }
    Ok(report)
}
