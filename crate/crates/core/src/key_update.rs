//! Cluster session-key update.
//!
//! The CH deals a random polynomial `f` of degree `n − 1` with `f(0)` the
//! new key, sends each member its share `f(x_l)` masked under
//! `H(sk_l, T4)` together with commitments `g^f(x_n)` for the other members,
//! and a confirmation digest over the new key, `T4` and those commitments.
//! Every member then seals its
//! share for every other member under the Diffie-Hellman value
//! `g^(f(x_l)·f(x_n))`, and each member interpolates all `n` shares at zero.
//!
//! Abscissas are `x_l = H(ctr, PID_l) mod q`, with the counter bumped
//! past zero and past values already assigned to earlier roster entries.
//! Every party runs the same search over the roster, so nothing extra is
//! transmitted.

use rand::RngCore;

use crate::block::{xor32, Block32, Timestamp};
use crate::error::{ProtocolConfig, ProtocolError};
use crate::group::{decode_scalar32, encode_scalar32, GroupElem, GroupParams, Scalar};
use crate::hash::{hash_to_block, hash_to_scalar, mask_elem, tags};
use crate::poly::{lagrange_at_zero, poly_eval};
use crate::registry::{ChCredential, MemberKeys};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyUpdateInit {
    pub t4: Timestamp,
    pub f_masked: Block32,
    /// `(member index, g^f(x_n))` for every other member.
    pub peer_commitments: Vec<(u16, GroupElem)>,
    pub confirm: Block32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareEnvelope {
    pub sender: u16,
    /// `(recipient index, mask(g^(f(x_n)·f(x_l))) ⊕ enc(f(x_l)))`.
    pub entries: Vec<(u16, Block32)>,
}

/// Counter values tried per member before giving up on a fresh abscissa.
pub const MAX_ABSCISSA_TRIES: u32 = 1 << 16;

/// Derives the roster's abscissas in roster order. Member `l` takes
/// `H(ctr, PID_l) mod q` for the smallest counter giving a nonzero value not
/// already taken by an earlier member.
pub fn abscissas(gp: &GroupParams, pids: &[Block32]) -> Result<Vec<Scalar>, ProtocolError> {
    let mut xs: Vec<Scalar> = Vec::with_capacity(pids.len());
    for pid in pids {
        let mut found = None;
        for ctr in 0..MAX_ABSCISSA_TRIES {
            let x = hash_to_scalar(gp, tags::KU_ABSCISSA, &[&ctr.to_be_bytes(), &pid.0]);
            if !x.is_zero() && !xs.contains(&x) {
                found = Some(x);
                break;
            }
        }
        xs.push(found.ok_or(ProtocolError::AbscissaCollision)?);
    }
    Ok(xs)
}

fn valid_abscissas(xs: &[Scalar]) -> bool {
    xs.iter().enumerate().all(|(i, x)| !x.is_zero() && !xs[..i].contains(x))
}

fn share_mask(sk: &Scalar, t4: Timestamp) -> Block32 {
    hash_to_block(tags::KU_MASK, &[&encode_scalar32(sk).0, &t4.to_be_bytes()])
}

/// `H(key_new, T4, (n, g^f(x_n))...)` over the commitments in one init. A
/// member whose share is zero cannot notice a swapped commitment any
/// other way.
fn confirm_digest(gp: &GroupParams, key: &Block32, t4: Timestamp, commitments: &[(u16, GroupElem)]) -> Block32 {
    let mut enc = Vec::with_capacity(commitments.len() * (2 + gp.elem_len()));
    for (n, c) in commitments {
        enc.extend_from_slice(&n.to_be_bytes());
        enc.extend_from_slice(&gp.encode_elem(c));
    }
    hash_to_block(tags::KU_CONFIRM, &[&key.0, &t4.to_be_bytes(), &enc])
}

/// Dealer side. Returns the new key (as a 32-byte encoding of a scalar) and
/// one init message per roster entry, in roster order.
pub fn ch_init_update<R: RngCore + ?Sized>(
    gp: &GroupParams,
    ch: &ChCredential,
    t4: Timestamp,
    rng: &mut R,
) -> Result<(Block32, Vec<KeyUpdateInit>), ProtocolError> {
    if ch.members.is_empty() {
        return Err(ProtocolError::EmptyCluster);
    }
    let pids: Vec<Block32> = ch.members.iter().map(|m| m.pid).collect();
    let xs = abscissas(gp, &pids)?;
    deal(gp, &ch.members, &xs, t4, rng)
}

/// As [`ch_init_update`] with caller-chosen abscissas.
pub fn ch_init_update_with_abscissas<R: RngCore + ?Sized>(
    gp: &GroupParams,
    members: &[MemberKeys],
    xs: &[Scalar],
    t4: Timestamp,
    rng: &mut R,
) -> Result<(Block32, Vec<KeyUpdateInit>), ProtocolError> {
    if members.is_empty() {
        return Err(ProtocolError::EmptyCluster);
    }
    if xs.len() != members.len() || !valid_abscissas(xs) {
        return Err(ProtocolError::AbscissaCollision);
    }
    deal(gp, members, xs, t4, rng)
}

fn deal<R: RngCore + ?Sized>(
    gp: &GroupParams,
    members: &[MemberKeys],
    xs: &[Scalar],
    t4: Timestamp,
    rng: &mut R,
) -> Result<(Block32, Vec<KeyUpdateInit>), ProtocolError> {
    let dealer = Dealer::from_parts(gp, members, xs.to_vec(), rng);
    let inits = (0..members.len()).map(|l| dealer.init_for(l, t4)).collect();
    Ok((dealer.key_new, inits))
}

/// The dealer's polynomial and commitments, for a CH that timestamps each
/// member's init separately as it goes out.
#[derive(Debug, Clone)]
pub struct Dealer {
    gp: GroupParams,
    members: Vec<MemberKeys>,
    shares: Vec<Scalar>,
    commitments: Vec<GroupElem>,
    key_new: Block32,
}

impl Dealer {
    pub fn new<R: RngCore + ?Sized>(gp: &GroupParams, ch: &ChCredential, rng: &mut R) -> Result<Self, ProtocolError> {
        if ch.members.is_empty() {
            return Err(ProtocolError::EmptyCluster);
        }
        let pids: Vec<Block32> = ch.members.iter().map(|m| m.pid).collect();
        let xs = abscissas(gp, &pids)?;
        Ok(Self::from_parts(gp, &ch.members, xs, rng))
    }

    fn from_parts<R: RngCore + ?Sized>(gp: &GroupParams, members: &[MemberKeys], xs: Vec<Scalar>, rng: &mut R) -> Self {
        let coeffs: Vec<Scalar> = (0..members.len()).map(|_| gp.random_scalar_incl_zero(rng)).collect();
        let key_new = encode_scalar32(&coeffs[0]);
        let shares: Vec<Scalar> = xs.iter().map(|x| poly_eval(gp, &coeffs, x)).collect();
        let commitments = shares.iter().map(|s| gp.exp_g(s)).collect();
        Dealer { gp: gp.clone(), members: members.to_vec(), shares, commitments, key_new }
    }

    pub fn key(&self) -> Block32 {
        self.key_new
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Init for roster entry `l` under its own timestamp.
    pub fn init_for(&self, l: usize, t4: Timestamp) -> KeyUpdateInit {
        let peer_commitments: Vec<(u16, GroupElem)> = self
            .commitments
            .iter()
            .enumerate()
            .filter(|(n, _)| *n != l)
            .map(|(n, c)| (n as u16, c.clone()))
            .collect();
        KeyUpdateInit {
            t4,
            f_masked: xor32(&encode_scalar32(&self.shares[l]), &share_mask(&self.members[l].sk, t4)),
            confirm: confirm_digest(&self.gp, &self.key_new, t4, &peer_commitments),
            peer_commitments,
        }
    }
}

/// Member side, round two: unmask the own share and seal it for every
/// other member.
pub fn cm_recover_and_share(
    gp: &GroupParams,
    me: &MemberKeys,
    my_index: usize,
    init: &KeyUpdateInit,
    now: Timestamp,
    cfg: &ProtocolConfig,
) -> Result<(Scalar, ShareEnvelope), ProtocolError> {
    cfg.check_fresh(init.t4, now)?;
    let raw = xor32(&init.f_masked, &share_mask(&me.sk, init.t4));
    let share = decode_scalar32(gp, &raw).map_err(|_| ProtocolError::MalformedShare)?;
    let entries = init
        .peer_commitments
        .iter()
        .map(|(n, commit)| {
            let mask = mask_elem(gp, &gp.mod_exp(commit, &share));
            (*n, xor32(&mask, &raw))
        })
        .collect();
    Ok((share, ShareEnvelope { sender: my_index as u16, entries }))
}

/// Member side, round three: open every peer's envelope, interpolate at
/// zero and check the dealer's confirmation digest.
pub fn cm_reconstruct(
    gp: &GroupParams,
    my_index: usize,
    own_share: &Scalar,
    envelopes: &[ShareEnvelope],
    init: &KeyUpdateInit,
    roster: &[Block32],
) -> Result<Block32, ProtocolError> {
    let n_cm = roster.len();
    let xs = abscissas(gp, roster)?;
    let mut points = Vec::with_capacity(n_cm);
    for (n, x) in xs.iter().enumerate() {
        if n == my_index {
            points.push((x.clone(), own_share.clone()));
            continue;
        }
        let u = envelopes
            .iter()
            .find(|e| e.sender as usize == n)
            .and_then(|e| e.entries.iter().find(|(r, _)| *r as usize == my_index))
            .map(|(_, u)| *u)
            .ok_or(ProtocolError::MissingEnvelope(n))?;
        let commit = init
            .peer_commitments
            .iter()
            .find(|(i, _)| *i as usize == n)
            .map(|(_, c)| c)
            .ok_or(ProtocolError::MissingEnvelope(n))?;
        let mask = mask_elem(gp, &gp.mod_exp(commit, own_share));
        let share = decode_scalar32(gp, &xor32(&u, &mask)).map_err(|_| ProtocolError::ConfirmMismatch)?;
        points.push((x.clone(), share));
    }
    let key = encode_scalar32(&lagrange_at_zero(gp, &points)?);
    if confirm_digest(gp, &key, init.t4, &init.peer_commitments) != init.confirm {
        return Err(ProtocolError::ConfirmMismatch);
    }
    Ok(key)
}

/// Runs all three rounds for an honest roster and returns every member's
/// reconstructed key (the dealer's key first).
pub fn run_honest<R: RngCore + ?Sized>(
    gp: &GroupParams,
    ch: &ChCredential,
    t4: Timestamp,
    now: Timestamp,
    cfg: &ProtocolConfig,
    rng: &mut R,
) -> Result<(Block32, Vec<Block32>), ProtocolError> {
    let (key, inits) = ch_init_update(gp, ch, t4, rng)?;
    let mut shares = Vec::with_capacity(inits.len());
    let mut envelopes = Vec::with_capacity(inits.len());
    for (l, (m, init)) in ch.members.iter().zip(&inits).enumerate() {
        let (s, env) = cm_recover_and_share(gp, m, l, init, now, cfg)?;
        shares.push(s);
        envelopes.push(env);
    }
    let roster: Vec<Block32> = ch.members.iter().map(|m| m.pid).collect();
    let keys = (0..inits.len())
        .map(|l| cm_reconstruct(gp, l, &shares[l], &envelopes, &inits[l], &roster))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((key, keys))
}
