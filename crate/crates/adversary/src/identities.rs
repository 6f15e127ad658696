//! Randomized checks of the algebra the protocols rely on. Each check
//! recomputes the identity from its definition rather than calling the
//! verifier that depends on it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use casku::block::{Block32, Timestamp};
use casku::error::ProtocolConfig;
use casku::group::{GroupElem, GroupParams, Scalar};
use casku::hash::{hash_to_block, hash_to_nonzero_scalar, hash_to_scalar, mask_elem, tags};
use casku::join::{accept_result, ch_aggregate, ch_collect_and_verify, cm_verify_and_respond, d_base, nuav_build_request};
use casku::key_update::{abscissas, cm_recover_and_share, Dealer, KeyUpdateInit};
use casku::par::Execution;
use casku::poly::{lagrange_at_zero, poly_eval};
use casku::registry::{ChCredential, CmCredential, GbsNetwork};

use crate::{chunk_ranges, derive_seed, AdversaryError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identity {
    /// `pk_GBS^H(CJT) · pk_CH = g^sk_CH` for issued CH keys.
    DEqualsGSk,
    /// `(∏ sig_k)^(1/sk_CH) = ∏ V_k^(w_k)` for honest request batches.
    RequestBatch,
    /// `g^(N²·H(result)) = sig_CMs · pk_CMs` for a full member batch.
    MemberAggregate,
    /// `(g^f(x_n))^f(x_l) = (g^f(x_l))^f(x_n)` between rekey peers.
    DhMask,
    /// Interpolation at zero returns the constant term.
    Lagrange,
}

impl Identity {
    pub const ALL: [Identity; 5] =
        [Identity::DEqualsGSk, Identity::RequestBatch, Identity::MemberAggregate, Identity::DhMask, Identity::Lagrange];

    pub fn name(self) -> &'static str {
        match self {
            Identity::DEqualsGSk => "d-equals-g-sk",
            Identity::RequestBatch => "request-batch",
            Identity::MemberAggregate => "member-aggregate",
            Identity::DhMask => "dh-mask-symmetry",
            Identity::Lagrange => "lagrange",
        }
    }
}

/// Trials sharing one set of credentials before a fresh swarm is drawn.
const TRIALS_PER_SWARM: usize = 25;

struct Swarm {
    net: GbsNetwork,
    ch: ChCredential,
    cms: Vec<CmCredential>,
}

fn swarm(gp: &GroupParams, n_cm: usize, rng: &mut ChaCha20Rng) -> Result<Swarm, AdversaryError> {
    let mut net = GbsNetwork::setup(gp, 1, rng)?;
    let ch = net.register_ch(0, b"ch", rng)?;
    let cms = (0..n_cm)
        .map(|l| net.register_cm(ch.cluster, format!("m{l}").as_bytes(), rng))
        .collect::<Result<Vec<_>, _>>()?;
    let ch = net.ch_credential(ch.cluster)?;
    Ok(Swarm { net, ch, cms })
}

fn w(gp: &GroupParams, pid: &Block32, ch_pid: &Block32, pk: &GroupElem) -> Scalar {
    hash_to_nonzero_scalar(gp, tags::JOIN_W, &[&pid.0, &ch_pid.0, &gp.encode_elem(pk)])
}

fn one_trial(gp: &GroupParams, id: Identity, s: &mut Swarm, rng: &mut ChaCha20Rng) -> Result<bool, AdversaryError> {
    Ok(match id {
        Identity::DEqualsGSk => {
            // A fresh CH per trial; the station key and CJT vary across swarms.
            let ch = s.net.register_ch(0, format!("ch{}", rng.gen::<u64>()).as_bytes(), rng)?;
            let gbs_pk = s.net.station(0)?.pk().clone();
            d_base(gp, &gbs_pk, &ch.h_cjt, &ch.pk) == gp.exp_g(&ch.sk)
        }
        Identity::RequestBatch => {
            let k = rng.gen_range(1..=3);
            let nuavs = (0..k).map(|_| s.net.provision_nuav(s.ch.cluster, rng)).collect::<Result<Vec<_>, _>>()?;
            let reqs: Vec<_> = nuavs.iter().map(|n| nuav_build_request(gp, n, rng)).collect();
            let lhs = gp.mod_exp(&gp.product(reqs.iter().map(|r| &r.sig)), &gp.scalar_inv(&s.ch.sk)?);
            let terms: Vec<GroupElem> =
                reqs.iter().map(|r| gp.mod_exp(&r.v, &w(gp, &r.nuav_pid, &r.ch_pid, &r.nuav_pk))).collect();
            lhs == gp.product(terms.iter())
        }
        Identity::MemberAggregate => {
            let cfg = ProtocolConfig::default();
            let n = s.cms.len() as u64;
            let nuav = s.net.provision_nuav(s.ch.cluster, rng)?;
            let req = nuav_build_request(gp, &nuav, rng);
            let t1 = Timestamp(1_000);
            let (mut state, chals) = ch_aggregate(gp, &s.ch, &[req], t1, rng)?;
            let responses = s
                .cms
                .iter()
                .zip(&chals)
                .enumerate()
                .map(|(l, (cm, c))| cm_verify_and_respond(gp, cm, &s.ch.pid, n, c, t1, &cfg).map(|r| (l, r)))
                .collect::<Result<Vec<_>, _>>()?;
            let Ok(bc) = ch_collect_and_verify(gp, &s.ch, &mut state, &responses, n, t1, t1, &cfg) else {
                return Ok(false);
            };
            let result = accept_result(&s.ch.pid, t1, &s.ch.key);
            let h = hash_to_scalar(gp, tags::JOIN_RESULT_SCALAR, &[&result.0]);
            gp.exp_g(&gp.scalar_mul(&gp.scalar(n * n), &h)) == gp.mul(&bc.sig_cms, &bc.pk_cms)
        }
        Identity::DhMask => {
            let dealer = Dealer::new(gp, &s.ch, rng)?;
            let t4 = Timestamp(1_000);
            let inits: Vec<KeyUpdateInit> = (0..dealer.len()).map(|l| dealer.init_for(l, t4)).collect();
            let shares = s
                .ch
                .members
                .iter()
                .zip(&inits)
                .enumerate()
                .map(|(l, (m, i))| cm_recover_and_share(gp, m, l, i, t4, &ProtocolConfig::default()).map(|(x, _)| x))
                .collect::<Result<Vec<_>, _>>()?;
            let commit = |of: usize, seen_by: usize| {
                inits[seen_by].peer_commitments.iter().find(|(i, _)| *i as usize == of).map(|(_, c)| c.clone())
            };
            let (l, n) = (0, rng.gen_range(1..shares.len()));
            match (commit(n, l), commit(l, n)) {
                (Some(cn), Some(cl)) => {
                    let a = gp.mod_exp(&cn, &shares[l]);
                    let b = gp.mod_exp(&cl, &shares[n]);
                    a == b && mask_elem(gp, &a) == mask_elem(gp, &b)
                }
                _ => false,
            }
        }
        Identity::Lagrange => {
            let q_small = gp.is_tiny();
            let max_deg = if q_small { 9 } else { 12 };
            let n = rng.gen_range(1..=max_deg);
            let coeffs: Vec<Scalar> = (0..n).map(|_| gp.random_scalar_incl_zero(rng)).collect();
            let pids: Vec<Block32> = (0..n).map(|_| Block32::random(rng)).collect();
            let xs = abscissas(gp, &pids)?;
            let points: Vec<(Scalar, Scalar)> = xs.iter().map(|x| (x.clone(), poly_eval(gp, &coeffs, x))).collect();
            lagrange_at_zero(gp, &points)? == coeffs[0]
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentityReport {
    pub identity: Identity,
    pub trials: usize,
    pub failures: u64,
}

/// `trials` randomized checks of one identity. Swarms have two or three
/// members.
pub fn check(gp: &GroupParams, id: Identity, trials: usize, seed: u64, exec: Execution) -> Result<IdentityReport, AdversaryError> {
    let stream = 10 + Identity::ALL.iter().position(|i| *i == id).unwrap_or(0) as u64;
    let chunks = trials.div_ceil(TRIALS_PER_SWARM);
    let parts = exec.map(chunk_ranges(trials, chunks).into_iter().enumerate().collect(), |(c, range)| -> Result<u64, AdversaryError> {
        if range.is_empty() {
            return Ok(0);
        }
        let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, stream, c as u64));
        let n_cm = 2 + (c % 2);
        let mut s = swarm(gp, n_cm, &mut rng)?;
        let mut failures = 0;
        for _ in range {
            failures += u64::from(!one_trial(gp, id, &mut s, &mut rng)?);
        }
        Ok(failures)
    });
    let mut failures = 0;
    for p in parts {
        failures += p?;
    }
    Ok(IdentityReport { identity: id, trials, failures })
}

/// The CJT hash as issued, for callers that rebuild `D` themselves.
pub fn cjt_hash(cjt: &Block32) -> Block32 {
    hash_to_block(tags::CJT, &[&cjt.0])
}
