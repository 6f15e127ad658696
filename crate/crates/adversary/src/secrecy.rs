//! Exhaustive key posteriors in the tiny group (q = 11).
//!
//! A view is the set of polynomial points a party can actually open: its own
//! shares plus anything it manages to unmask from the rekey transcript with
//! its own secrets. [`posterior`] then counts, for every candidate key, the
//! polynomials of the right degree consistent with those points. The count
//! comes from elimination over Z_q; [`posterior_enumerated`] walks every
//! polynomial instead and is kept as its check for small degrees.
//!
//! Masked shares, commitments and the confirmation digest are treated as
//! opaque here. At q = 11 they fall to brute force (see
//! [`confirm_candidates`]); the enumeration measures what the sharing itself
//! reveals.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use casku::block::{xor32, Block32, Timestamp};
use casku::error::ProtocolConfig;
use casku::group::{decode_scalar32, encode_scalar32, GroupParams, Scalar};
use casku::hash::{hash_to_block, mask_elem, tags};
use casku::key_update::{abscissas, cm_recover_and_share, Dealer, KeyUpdateInit, ShareEnvelope};
use casku::registry::{ClusterId, GbsNetwork, MemberKeys};

use crate::AdversaryError;

fn small(x: &Scalar) -> u64 {
    x.value().iter_u64_digits().next().unwrap_or(0)
}

fn inv_mod(a: u64, q: u64) -> u64 {
    let (mut r, mut b, mut e) = (1u64, a % q, q - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % q;
        }
        b = b * b % q;
        e >>= 1;
    }
    r
}

/// Number of solutions over Z_q of the linear system whose augmented rows
/// are `rows`: 0 when inconsistent, `q^(cols − rank)` otherwise.
fn solutions(mut rows: Vec<Vec<u64>>, cols: usize, q: u64) -> u64 {
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else { continue };
        rows.swap(rank, p);
        let inv = inv_mod(rows[rank][col], q);
        for v in rows[rank].iter_mut() {
            *v = *v * inv % q;
        }
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col] != 0 {
                let f = row[col];
                for (v, p) in row.iter_mut().zip(&pivot) {
                    *v = (*v + (q - f) * p) % q;
                }
            }
        }
        rank += 1;
    }
    if rows[rank..].iter().any(|r| r[cols] != 0) {
        return 0;
    }
    q.pow((cols - rank) as u32)
}

/// Counts, per value of `f(0)`, the polynomials with `n_coeffs`
/// coefficients over Z_q that pass through every point in `known`.
///
/// # Panics
/// If q does not fit in 32 bits; this is meant for the tiny group only.
pub fn posterior(gp: &GroupParams, known: &[(Scalar, Scalar)], n_coeffs: usize) -> Vec<u64> {
    let q = gp.q().iter_u64_digits().next().unwrap_or(0);
    assert!(gp.q().bits() <= 32, "modulus too large");
    let mut base: Vec<Vec<u64>> = Vec::with_capacity(known.len() + 1);
    for (x, y) in known {
        let (x, y) = (small(x), small(y));
        let mut row = Vec::with_capacity(n_coeffs + 1);
        let mut pow = 1;
        for _ in 0..n_coeffs {
            row.push(pow);
            pow = pow * x % q;
        }
        row.push(y);
        base.push(row);
    }
    (0..q)
        .map(|k| {
            let mut rows = base.clone();
            let mut pin = vec![0; n_coeffs + 1];
            pin[0] = 1;
            pin[n_coeffs] = k;
            rows.push(pin);
            solutions(rows, n_coeffs, q)
        })
        .collect()
}

/// [`posterior`] by walking all `q^n_coeffs` polynomials.
///
/// # Panics
/// If `q^n_coeffs` exceeds 2^24.
pub fn posterior_enumerated(gp: &GroupParams, known: &[(Scalar, Scalar)], n_coeffs: usize) -> Vec<u64> {
    let q = gp.q().iter_u64_digits().next().unwrap_or(0);
    let total = (q as u128).pow(n_coeffs as u32);
    assert!(total <= 1 << 24, "enumeration too large");
    let pts: Vec<(u64, u64)> = known.iter().map(|(x, y)| (small(x), small(y))).collect();
    let mut counts = vec![0u64; q as usize];
    let mut coeffs = vec![0u64; n_coeffs];
    for _ in 0..total {
        let on_curve = pts.iter().all(|&(x, y)| coeffs.iter().rev().fold(0, |acc, c| (acc * x + c) % q) == y);
        if on_curve {
            counts[coeffs[0] as usize] += 1;
        }
        for c in coeffs.iter_mut() {
            *c += 1;
            if *c < q {
                break;
            }
            *c = 0;
        }
    }
    counts
}

pub fn is_uniform(counts: &[u64]) -> bool {
    counts.first().is_some_and(|&c| c > 0 && counts.iter().all(|&x| x == c))
}

/// Key candidates `k ∈ Z_q` whose confirmation digest matches the init.
pub fn confirm_candidates(gp: &GroupParams, init: &KeyUpdateInit) -> Vec<u64> {
    let q = gp.q().iter_u64_digits().next().unwrap_or(0);
    let mut commitments = Vec::new();
    for (n, c) in &init.peer_commitments {
        commitments.extend_from_slice(&n.to_be_bytes());
        commitments.extend_from_slice(&gp.encode_elem(c));
    }
    (0..q)
        .filter(|&k| {
            let key = encode_scalar32(&gp.scalar(k));
            hash_to_block(tags::KU_CONFIRM, &[&key.0, &init.t4.to_be_bytes(), &commitments]) == init.confirm
        })
        .collect()
}

struct Round {
    key: Block32,
    pids: Vec<Block32>,
    xs: Vec<Scalar>,
    inits: Vec<KeyUpdateInit>,
    shares: Vec<Scalar>,
    envelopes: Vec<ShareEnvelope>,
}

fn rekey(gp: &GroupParams, net: &GbsNetwork, c: ClusterId, t4: Timestamp, rng: &mut ChaCha20Rng) -> Result<Round, AdversaryError> {
    let ch = net.ch_credential(c)?;
    let dealer = Dealer::new(gp, &ch, rng)?;
    let inits: Vec<KeyUpdateInit> = (0..dealer.len()).map(|l| dealer.init_for(l, t4)).collect();
    let mut shares = Vec::new();
    let mut envelopes = Vec::new();
    for (l, (m, init)) in ch.members.iter().zip(&inits).enumerate() {
        let (s, e) = cm_recover_and_share(gp, m, l, init, t4, &ProtocolConfig::default())?;
        shares.push(s);
        envelopes.push(e);
    }
    let pids: Vec<Block32> = ch.members.iter().map(|m| m.pid).collect();
    Ok(Round { key: dealer.key(), xs: abscissas(gp, &pids)?, pids, inits, shares, envelopes })
}

/// Points a party holding `sk` and `share` unmasks from `round`. Only
/// openings of messages addressed to `pid` count as points; the rest are
/// chance hits of the 11-element exponent space and are only counted.
fn opened_points(
    gp: &GroupParams,
    round: &Round,
    pid: &Block32,
    sk: &Scalar,
    share: Option<&Scalar>,
) -> (Vec<(Scalar, Scalar)>, usize) {
    let mut out: Vec<(Scalar, Scalar)> = Vec::new();
    let mut chance = 0;
    for (l, init) in round.inits.iter().enumerate() {
        let mask = hash_to_block(tags::KU_MASK, &[&encode_scalar32(sk).0, &init.t4.to_be_bytes()]);
        if let Ok(y) = decode_scalar32(gp, &xor32(&init.f_masked, &mask)) {
            if round.pids[l] == *pid {
                out.push((round.xs[l].clone(), y));
            } else {
                chance += 1;
            }
        }
    }
    if let Some(s) = share {
        for env in &round.envelopes {
            let x = &round.xs[env.sender as usize];
            for (to, u) in &env.entries {
                let opened = round
                    .inits
                    .iter()
                    .flat_map(|i| &i.peer_commitments)
                    .find_map(|(_, c)| decode_scalar32(gp, &xor32(u, &mask_elem(gp, &gp.mod_exp(c, s)))).ok());
                let Some(y) = opened else { continue };
                if round.pids[*to as usize] != *pid {
                    chance += 1;
                } else if !out.iter().any(|(px, _)| px == x) {
                    out.push((x.clone(), y));
                }
            }
        }
    }
    (out, chance)
}

fn cluster(gp: &GroupParams, n: usize, seed: u64) -> Result<(GbsNetwork, ClusterId, Vec<MemberKeys>, ChaCha20Rng), AdversaryError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut net = GbsNetwork::setup(gp, 1, &mut rng)?;
    let c = net.register_ch(0, b"ch", &mut rng)?.cluster;
    let members = (0..n)
        .map(|l| net.register_cm(c, format!("m{l}").as_bytes(), &mut rng).map(|m| m.member_keys()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((net, c, members, rng))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecrecyCase {
    pub view: &'static str,
    pub members: usize,
    pub counts: Vec<u64>,
    /// The real key has positive count.
    pub key_in_support: bool,
    /// Masks the party opened by coincidence rather than by address. Zero
    /// outside the tiny group in practice; not fed to the posterior.
    pub chance_openings: usize,
}

impl SecrecyCase {
    pub fn passes(&self) -> bool {
        is_uniform(&self.counts) && self.key_in_support
    }
}

fn key_value(key: &Block32) -> usize {
    key.0[24..].iter().fold(0usize, |acc, b| (acc << 8) | *b as usize)
}

/// A coalition of `n − 1` members of an `n`-member rekey.
pub fn threshold_view(gp: &GroupParams, n: usize, seed: u64) -> Result<SecrecyCase, AdversaryError> {
    let (net, c, _, mut rng) = cluster(gp, n, seed)?;
    let r = rekey(gp, &net, c, Timestamp(1_000), &mut rng)?;
    let known: Vec<(Scalar, Scalar)> = r.xs.iter().cloned().zip(r.shares.iter().cloned()).take(n - 1).collect();
    let counts = posterior(gp, &known, n);
    Ok(SecrecyCase {
        view: "n-1 shares",
        members: n,
        key_in_support: counts[key_value(&r.key)] > 0,
        counts,
        chance_openings: 0,
    })
}

/// A member of an `n`-member cluster leaves; the other `n − 1` rekey. The
/// departed member keeps its old share and key and hears the new round.
pub fn departed_view(gp: &GroupParams, n: usize, seed: u64) -> Result<SecrecyCase, AdversaryError> {
    let (mut net, c, members, mut rng) = cluster(gp, n, seed)?;
    let old = rekey(gp, &net, c, Timestamp(1_000), &mut rng)?;
    let gone = members.last().expect("n >= 2");
    net.remove_member(c, &gone.pid)?;
    let new = rekey(gp, &net, c, Timestamp(2_000), &mut rng)?;
    let (known, chance_openings) = opened_points(gp, &new, &gone.pid, &gone.sk, old.shares.last());
    let counts = posterior(gp, &known, n - 1);
    Ok(SecrecyCase {
        view: "departed member",
        members: n,
        key_in_support: counts[key_value(&new.key)] > 0,
        counts,
        chance_openings,
    })
}

/// A new member joins an `n`-member cluster after it rekeyed, then the
/// `n + 1` members rekey. The newcomer overheard the old round.
pub fn newcomer_view(gp: &GroupParams, n: usize, seed: u64) -> Result<SecrecyCase, AdversaryError> {
    let (mut net, c, _, mut rng) = cluster(gp, n, seed)?;
    let old = rekey(gp, &net, c, Timestamp(1_000), &mut rng)?;
    let joined = net.register_cm(c, b"newcomer", &mut rng)?.member_keys();
    let new = rekey(gp, &net, c, Timestamp(2_000), &mut rng)?;
    let (known, chance_openings) = opened_points(gp, &old, &joined.pid, &joined.sk, new.shares.last());
    let counts = posterior(gp, &known, n);
    Ok(SecrecyCase { view: "new member", members: n, key_in_support: counts[key_value(&old.key)] > 0, counts, chance_openings })
}

/// All three views for every roster size in `sizes`.
pub fn run_all(gp: &GroupParams, sizes: std::ops::RangeInclusive<usize>, seed: u64) -> Result<Vec<SecrecyCase>, AdversaryError> {
    let mut out = Vec::new();
    for n in sizes {
        let s = seed.wrapping_add(n as u64);
        out.push(threshold_view(gp, n, s)?);
        if n >= 2 {
            out.push(departed_view(gp, n, s)?);
        }
        out.push(newcomer_view(gp, n, s)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_counts_match_hand_cases() {
        let gp = GroupParams::tiny();
        let posterior = posterior_enumerated;
        // No points: every key has 11^(n-1) polynomials.
        assert_eq!(posterior(&gp, &[], 2), vec![11; 11]);
        // Degree 0 through (3, 7): only f = 7.
        let c = posterior(&gp, &[(gp.scalar(3u32), gp.scalar(7u32))], 1);
        assert_eq!(c.iter().sum::<u64>(), 1);
        assert_eq!(c[7], 1);
        // Full set of n points pins the key.
        let pts = [(gp.scalar(1u32), gp.scalar(5u32)), (gp.scalar(2u32), gp.scalar(9u32))];
        let c = posterior(&gp, &pts, 2);
        assert_eq!(c[1], 1, "f = 1 + 4x");
        assert_eq!(c.iter().sum::<u64>(), 1);
        assert!(!is_uniform(&c));
    }

    #[test]
    fn elimination_agrees_with_enumeration() {
        use rand::Rng;
        let gp = GroupParams::tiny();
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        for _ in 0..300 {
            let n = rng.gen_range(1..=5);
            let k = rng.gen_range(0..=n + 1);
            // Repeated abscissas included on purpose: they test the
            // rank-deficient and inconsistent branches.
            let pts: Vec<_> =
                (0..k).map(|_| (gp.scalar(rng.gen_range(0u32..11)), gp.scalar(rng.gen_range(0u32..11)))).collect();
            assert_eq!(posterior(&gp, &pts, n), posterior_enumerated(&gp, &pts, n), "{pts:?} n={n}");
        }
    }

    #[test]
    fn every_view_is_uniform() {
        let gp = GroupParams::tiny();
        for case in run_all(&gp, 1..=4, 3).unwrap() {
            assert!(case.passes(), "{case:?}");
        }
    }

    #[test]
    fn all_shares_determine_the_key() {
        let gp = GroupParams::tiny();
        let (net, c, _, mut rng) = cluster(&gp, 3, 5).unwrap();
        let r = rekey(&gp, &net, c, Timestamp(1_000), &mut rng).unwrap();
        let known: Vec<_> = r.xs.iter().cloned().zip(r.shares.iter().cloned()).collect();
        let counts = posterior(&gp, &known, 3);
        assert_eq!(counts.iter().sum::<u64>(), 1);
        assert_eq!(counts[key_value(&r.key)], 1);
    }

    #[test]
    fn confirm_digest_names_the_key_at_tiny_size() {
        let gp = GroupParams::tiny();
        let (net, c, _, mut rng) = cluster(&gp, 3, 6).unwrap();
        let r = rekey(&gp, &net, c, Timestamp(1_000), &mut rng).unwrap();
        assert_eq!(confirm_candidates(&gp, &r.inits[0]), vec![key_value(&r.key) as u64]);
    }

    #[test]
    fn member_opens_its_own_messages() {
        let gp = GroupParams::tiny();
        let (net, c, members, mut rng) = cluster(&gp, 3, 7).unwrap();
        let r = rekey(&gp, &net, c, Timestamp(1_000), &mut rng).unwrap();
        let (pts, _) = opened_points(&gp, &r, &members[0].pid, &members[0].sk, Some(&r.shares[0]));
        // Its own share from the dealer plus one from each peer.
        assert_eq!(pts.len(), 3);
        for (x, y) in pts {
            let l = r.xs.iter().position(|v| *v == x).unwrap();
            assert_eq!(y, r.shares[l]);
        }
    }
}
