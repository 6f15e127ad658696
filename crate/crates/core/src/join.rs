//! Batch join with message aggregation.
//!
//! Flow for one batch:
//!
//! 1. each NUAV builds a [`JoinRequest`] ([`nuav_build_request`]);
//! 2. the CH folds all requests into one [`AggregateChallenge`] per member
//!    ([`ch_aggregate`]);
//! 3. each member checks the batch and answers with a [`CmResponse`]
//!    ([`cm_verify_and_respond`]);
//! 4. the CH checks the aggregated member signatures and broadcasts a
//!    [`PeerBroadcast`] to the other CHs ([`ch_collect_and_verify`]);
//! 5. each peer CH returns a [`PeerAck`] ([`peer_ch_verify`]);
//! 6. the CH checks the acks, registers the NUAVs and sends each a
//!    [`NuavConfirm`] ([`ch_finalize`], [`nuav_verify_ch`]).
//!
//! The aggregate member check is `g^(N·|S|·h) = ∏ sig_l^(s_l) · (∏ pk_l)^M`
//! where `N` is the cluster size each member signed with and `S` the set of
//! responses being checked. For a full batch this is `g^(N²·h)`.

use rand::RngCore;

use crate::block::{xor32, Block32, Timestamp};
use crate::error::{Mode, ProtocolConfig, ProtocolError};
use crate::group::{decode_scalar32, encode_scalar32, GroupElem, GroupParams, Scalar};
use crate::hash::{hash_to_block, hash_to_nonzero_scalar, hash_to_scalar, tags};
use crate::registry::{ChCredential, CmCredential, GbsNetwork, NuavCredential};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinRequest {
    pub nuav_pid: Block32,
    pub nuav_pk: GroupElem,
    pub ch_pid: Block32,
    pub v: GroupElem,
    pub sig: GroupElem,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateChallenge {
    pub ch_pid: Block32,
    pub t1: Timestamp,
    pub sig_nuavs: Block32,
    pub c_nuavs: GroupElem,
    /// `enc(s_l) ⊕ H(key, T1)`, per recipient.
    pub share: Block32,
    pub m_total: Scalar,
    /// `H(s_l, PID_l, M)`, per recipient.
    pub k_tag: Block32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CmResponse {
    pub t1: Timestamp,
    pub sig_cm: GroupElem,
    pub c_cm: Block32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeerBroadcast {
    pub sig_cms: GroupElem,
    pub pk_cms: GroupElem,
    pub c_ch: Block32,
    pub q_ch: Block32,
    pub t2: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeerAck {
    pub q_ack: Block32,
    pub t2: Timestamp,
    /// Present in hardened mode only.
    pub responder_pid: Option<Block32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NuavConfirm {
    pub res: Block32,
    pub ch_pk: GroupElem,
}

/// What the CH keeps between aggregation and finalization.
#[derive(Debug, Clone)]
pub struct ChJoinState {
    pub t1: Timestamp,
    pub shares: Vec<Scalar>,
    pub m_total: Scalar,
    pub nuav_pids: Vec<Block32>,
    pub nuav_pks: Vec<GroupElem>,
    result: Option<Block32>,
    broadcast: Option<(Timestamp, Block32)>,
}

impl ChJoinState {
    /// The agreed result, once member responses have been verified.
    pub fn result(&self) -> Option<&Block32> {
        self.result.as_ref()
    }
}

/// `w_k`, never zero: a zero weight would leave `V_k` and `sig_k` unchecked.
fn w_scalar(gp: &GroupParams, nuav_pid: &Block32, ch_pid: &Block32, nuav_pk: &GroupElem) -> Scalar {
    hash_to_nonzero_scalar(gp, tags::JOIN_W, &[&nuav_pid.0, &ch_pid.0, &gp.encode_elem(nuav_pk)])
}

fn join_pad(key: &Block32, t1: Timestamp) -> Block32 {
    hash_to_block(tags::JOIN_PAD, &[&key.0, &t1.to_be_bytes()])
}

fn k_tag(share_bytes: &Block32, pid: &Block32, m: &Scalar) -> Block32 {
    hash_to_block(tags::JOIN_K, &[&share_bytes.0, &pid.0, &encode_scalar32(m).0])
}

/// `H(PID_CH, T1, key)`: the result every honest member derives.
pub fn accept_result(ch_pid: &Block32, t1: Timestamp, key: &Block32) -> Block32 {
    hash_to_block(tags::JOIN_RESULT, &[&ch_pid.0, &t1.to_be_bytes(), &key.0])
}

/// `H(T1, key)`: what a member reports when its share tag does not verify.
pub fn fallback_result(t1: Timestamp, key: &Block32) -> Block32 {
    hash_to_block(tags::JOIN_FALLBACK, &[&t1.to_be_bytes(), &key.0])
}

fn result_scalar(gp: &GroupParams, result: &Block32) -> Scalar {
    hash_to_scalar(gp, tags::JOIN_RESULT_SCALAR, &[&result.0])
}

fn q_value(result: &Block32, t2: Timestamp) -> Block32 {
    hash_to_block(tags::JOIN_Q, &[&result.0, &t2.to_be_bytes()])
}

fn hardened_ack(result: &Block32, t2: Timestamp, responder: &Block32) -> Block32 {
    hash_to_block(tags::JOIN_ACK, &[&result.0, &t2.to_be_bytes(), &responder.0])
}

/// `res_k = H(H(CJT), PID_k, pk_CH, pk_k)`. The NUAV's key is the one the
/// CH received; otherwise it is covered only by the reduced weight `w_k`.
fn confirm_res(gp: &GroupParams, h_cjt: &Block32, nuav_pid: &Block32, ch_pk: &GroupElem, nuav_pk: &GroupElem) -> Block32 {
    hash_to_block(tags::JOIN_RES, &[&h_cjt.0, &nuav_pid.0, &gp.encode_elem(ch_pk), &gp.encode_elem(nuav_pk)])
}

/// `D = pk_GBS^H(CJT) · pk_CH`, which equals `g^sk_CH` for an honestly
/// issued CH.
pub fn d_base(gp: &GroupParams, gbs_pk: &GroupElem, h_cjt: &Block32, ch_pk: &GroupElem) -> GroupElem {
    gp.mul(&gp.mod_exp(gbs_pk, &gp.reduce_block(h_cjt)), ch_pk)
}

/// `V = g^v`, `sig = D^(v·w)`, `w = H(PID_NUAV, PID_CH, pk_NUAV)`.
pub fn nuav_build_request<R: RngCore + ?Sized>(gp: &GroupParams, cred: &NuavCredential, rng: &mut R) -> JoinRequest {
    let w = w_scalar(gp, &cred.pid, &cred.ch_pid, &cred.pk);
    let d = d_base(gp, &cred.gbs_pk, &cred.h_cjt, &cred.ch_pk);
    let v = gp.random_scalar(rng);
    let big_v = gp.exp_g(&v);
    let sig = gp.mod_exp(&d, &gp.scalar_mul(&v, &w));
    JoinRequest { nuav_pid: cred.pid, nuav_pk: cred.pk.clone(), ch_pid: cred.ch_pid, v: big_v, sig }
}

/// Folds a batch of requests into one challenge per cluster member, in
/// `ch.members` order.
pub fn ch_aggregate<R: RngCore + ?Sized>(
    gp: &GroupParams,
    ch: &ChCredential,
    reqs: &[JoinRequest],
    t1: Timestamp,
    rng: &mut R,
) -> Result<(ChJoinState, Vec<AggregateChallenge>), ProtocolError> {
    if reqs.is_empty() {
        return Err(ProtocolError::EmptyBatch);
    }
    if ch.members.is_empty() {
        return Err(ProtocolError::EmptyCluster);
    }
    if reqs.iter().any(|r| r.ch_pid != ch.pid) {
        return Err(ProtocolError::MismatchedCluster);
    }
    let sig_prod = gp.product(reqs.iter().map(|r| &r.sig));
    let agg = gp.mod_exp(&sig_prod, &gp.scalar_inv(&ch.sk)?);
    let weighted: Vec<GroupElem> = reqs
        .iter()
        .map(|r| {
            let w = w_scalar(gp, &r.nuav_pid, &r.ch_pid, &r.nuav_pk);
            gp.mod_exp(&r.v, &w)
        })
        .collect();
    let c_nuavs = gp.product(weighted.iter());
    let sig_nuavs = xor32(&hash_to_block(tags::JOIN_AGG, &[&gp.encode_elem(&agg)]), &ch.key);
    let pad = join_pad(&ch.key, t1);

    let shares: Vec<Scalar> = ch.members.iter().map(|_| gp.random_scalar(rng)).collect();
    let m_total = shares.iter().fold(gp.scalar_zero(), |acc, s| gp.scalar_add(&acc, s));
    let challenges = ch
        .members
        .iter()
        .zip(&shares)
        .map(|(m, s)| {
            let enc = encode_scalar32(s);
            AggregateChallenge {
                ch_pid: ch.pid,
                t1,
                sig_nuavs,
                c_nuavs: c_nuavs.clone(),
                share: xor32(&enc, &pad),
                m_total: m_total.clone(),
                k_tag: k_tag(&enc, &m.pid, &m_total),
            }
        })
        .collect();
    let state = ChJoinState {
        t1,
        shares,
        m_total,
        nuav_pids: reqs.iter().map(|r| r.nuav_pid).collect(),
        nuav_pks: reqs.iter().map(|r| r.nuav_pk.clone()).collect(),
        result: None,
        broadcast: None,
    };
    Ok((state, challenges))
}

/// Member-side batch check and signed response. `n_cm` is the cluster size
/// the member signs for.
pub fn cm_verify_and_respond(
    gp: &GroupParams,
    cm: &CmCredential,
    ch_pid: &Block32,
    n_cm: u64,
    chal: &AggregateChallenge,
    now: Timestamp,
    cfg: &ProtocolConfig,
) -> Result<CmResponse, ProtocolError> {
    if chal.ch_pid != *ch_pid {
        return Err(ProtocolError::MismatchedCluster);
    }
    cfg.check_fresh(chal.t1, now)?;
    let expect = hash_to_block(tags::JOIN_AGG, &[&gp.encode_elem(&chal.c_nuavs)]);
    if xor32(&chal.sig_nuavs, &cm.key) != expect {
        return Err(ProtocolError::BatchRejected);
    }
    let pad = join_pad(&cm.key, chal.t1);
    let share_bytes = xor32(&chal.share, &pad);
    let tag_ok = k_tag(&share_bytes, &cm.pid, &chal.m_total) == chal.k_tag;
    let share = decode_scalar32(gp, &share_bytes).ok().filter(|s| !s.is_zero());
    let result = if tag_ok && share.is_some() {
        accept_result(&chal.ch_pid, chal.t1, &cm.key)
    } else {
        fallback_result(chal.t1, &cm.key)
    };
    let h = result_scalar(gp, &result);
    let nh = gp.scalar_mul(&gp.scalar(n_cm), &h);
    let mut e = gp.scalar_sub(&nh, &gp.scalar_mul(&cm.sk, &chal.m_total));
    if let Some(s) = &share {
        e = gp.scalar_mul(&e, &gp.scalar_inv(s)?);
    }
    Ok(CmResponse { t1: chal.t1, sig_cm: gp.exp_g(&e), c_cm: xor32(&result, &cm.key) })
}

/// CH-side check of member responses. `responses` pairs each response with
/// the responder's index in `ch.members`; any non-empty subset may be
/// checked. On success returns the broadcast for peer CHs.
#[allow(clippy::too_many_arguments)]
pub fn ch_collect_and_verify(
    gp: &GroupParams,
    ch: &ChCredential,
    state: &mut ChJoinState,
    responses: &[(usize, CmResponse)],
    n_cm: u64,
    t2: Timestamp,
    now: Timestamp,
    cfg: &ProtocolConfig,
) -> Result<PeerBroadcast, ProtocolError> {
    if responses.is_empty() {
        return Err(ProtocolError::EmptyBatch);
    }
    let mut seen = vec![false; ch.members.len()];
    for (i, r) in responses {
        if *i >= seen.len() || seen[*i] {
            return Err(ProtocolError::UnexpectedResponder(*i));
        }
        seen[*i] = true;
        if r.t1 != state.t1 {
            return Err(ProtocolError::StaleTimestamp);
        }
    }
    cfg.check_fresh(state.t1, now)?;
    let reported: Vec<Block32> = responses.iter().map(|(_, r)| xor32(&r.c_cm, &ch.key)).collect();
    let result = accept_result(&ch.pid, state.t1, &ch.key);
    if reported.iter().any(|r| *r != result) {
        return Err(ProtocolError::ResultMismatch);
    }
    let h = result_scalar(gp, &result);
    let raised: Vec<GroupElem> =
        responses.iter().map(|(i, r)| gp.mod_exp(&r.sig_cm, &state.shares[*i])).collect();
    let sig_cms = gp.product(raised.iter());
    let pk_prod = gp.product(responses.iter().map(|(i, _)| &ch.members[*i].pk));
    let pk_cms = gp.mod_exp(&pk_prod, &state.m_total);
    let weight = n_cm * responses.len() as u64;
    if !aggregate_holds(gp, weight, &h, &sig_cms, &pk_cms) {
        return Err(ProtocolError::AggregateInvalid);
    }
    state.result = Some(result);
    let c_ch = xor32(&xor32(&result, &ch.ct), &t2.to_block());
    let q_ch = q_value(&result, t2);
    state.broadcast = Some((t2, q_ch));
    Ok(PeerBroadcast { sig_cms, pk_cms, c_ch, q_ch, t2 })
}

/// `g^(weight·h) = sig_cms · pk_cms`.
fn aggregate_holds(gp: &GroupParams, weight: u64, h: &Scalar, sig_cms: &GroupElem, pk_cms: &GroupElem) -> bool {
    let lhs = gp.exp_g(&gp.scalar_mul(&gp.scalar(weight), h));
    lhs == gp.mul(sig_cms, pk_cms)
}

/// Peer-CH check of a broadcast. `weight` is `N·|S|` for the origin
/// cluster: `N²` for a full aggregate.
pub fn peer_ch_verify(
    gp: &GroupParams,
    peer: &ChCredential,
    bc: &PeerBroadcast,
    weight: u64,
    now: Timestamp,
    cfg: &ProtocolConfig,
) -> Result<PeerAck, ProtocolError> {
    cfg.check_fresh(bc.t2, now)?;
    let result = xor32(&xor32(&bc.c_ch, &peer.ct), &bc.t2.to_block());
    let q = q_value(&result, bc.t2);
    if q != bc.q_ch {
        return Err(ProtocolError::TokenMismatch);
    }
    let h = result_scalar(gp, &result);
    if !aggregate_holds(gp, weight, &h, &bc.sig_cms, &bc.pk_cms) {
        return Err(ProtocolError::AggregateInvalid);
    }
    Ok(match cfg.mode {
        Mode::Hardened => PeerAck {
            q_ack: hardened_ack(&result, bc.t2, &peer.pid),
            t2: bc.t2,
            responder_pid: Some(peer.pid),
        },
        Mode::PaperLiteral => PeerAck { q_ack: q, t2: bc.t2, responder_pid: None },
    })
}

/// Checks one ack per expected peer, stores the NUAV PIDs at the ground
/// stations and issues one confirmation per request.
#[allow(clippy::too_many_arguments)]
pub fn ch_finalize(
    gp: &GroupParams,
    ch: &ChCredential,
    state: &ChJoinState,
    acks: &[PeerAck],
    peer_pids: &[Block32],
    net: &mut GbsNetwork,
    now: Timestamp,
    cfg: &ProtocolConfig,
) -> Result<Vec<NuavConfirm>, ProtocolError> {
    let (Some(result), Some((t2, q_ch))) = (state.result, state.broadcast) else {
        return Err(ProtocolError::AckInvalid);
    };
    verify_acks(&result, t2, &q_ch, acks, peer_pids, now, cfg)?;
    net.admit_nuavs(ch.cluster, &state.nuav_pids)?;
    Ok(state
        .nuav_pids
        .iter()
        .zip(&state.nuav_pks)
        .map(|(pid, pk)| NuavConfirm { res: confirm_res(gp, &ch.h_cjt, pid, &ch.pk, pk), ch_pk: ch.pk.clone() })
        .collect())
}

/// The ack check of [`ch_finalize`] on its own, for a CH that sends several
/// broadcasts for one batch and confirms only after the last.
pub fn ch_check_acks(
    state: &ChJoinState,
    acks: &[PeerAck],
    peer_pids: &[Block32],
    now: Timestamp,
    cfg: &ProtocolConfig,
) -> Result<(), ProtocolError> {
    let (Some(result), Some((t2, q_ch))) = (state.result, state.broadcast) else {
        return Err(ProtocolError::AckInvalid);
    };
    verify_acks(&result, t2, &q_ch, acks, peer_pids, now, cfg)
}

fn verify_acks(
    result: &Block32,
    t2: Timestamp,
    q_ch: &Block32,
    acks: &[PeerAck],
    peer_pids: &[Block32],
    now: Timestamp,
    cfg: &ProtocolConfig,
) -> Result<(), ProtocolError> {
    if acks.len() != peer_pids.len() {
        return Err(ProtocolError::AckInvalid);
    }
    let mut pending: Vec<&Block32> = peer_pids.iter().collect();
    for ack in acks {
        if ack.t2 != t2 {
            return Err(ProtocolError::AckInvalid);
        }
        cfg.check_fresh(ack.t2, now)?;
        match cfg.mode {
            Mode::Hardened => {
                let Some(who) = ack.responder_pid else {
                    return Err(ProtocolError::AckInvalid);
                };
                let Some(pos) = pending.iter().position(|p| **p == who) else {
                    return Err(ProtocolError::AckInvalid);
                };
                if hardened_ack(result, t2, &who) != ack.q_ack {
                    return Err(ProtocolError::AckInvalid);
                }
                pending.swap_remove(pos);
            }
            Mode::PaperLiteral => {
                if ack.q_ack != *q_ch {
                    return Err(ProtocolError::AckInvalid);
                }
            }
        }
    }
    Ok(())
}

/// NUAV-side check: `H(H(CJT), PID, pk_CH)` with the CH key it was
/// provisioned with.
pub fn nuav_verify_ch(gp: &GroupParams, cred: &NuavCredential, conf: &NuavConfirm) -> bool {
    conf.ch_pk == cred.ch_pk && confirm_res(gp, &cred.h_cjt, &cred.pid, &cred.ch_pk, &cred.pk) == conf.res
}
