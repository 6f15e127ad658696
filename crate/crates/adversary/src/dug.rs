//! Data-unforgeability game.
//!
//! An [`OracleSession`] holds a small swarm (target cluster, one peer
//! cluster) whose secrets never leave the session. The adversary talks to it
//! through [`OracleSession::dug_query`], then gets a [`Challenge`] naming
//! identities it never queried, and wins a trial if any forged join request,
//! member response, peer broadcast or transfer token passes the honest
//! verifier.
//!
//! Registration queries are answered for a separate sandbox cluster: the
//! response follows the issuance equations with the real station key, but
//! the CJT, cluster key and cross-cluster token are fresh values unrelated to
//! the challenge swarm. Handing out the swarm's own token or target-cluster
//! key would make every forgery below trivial.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use casku::block::{xor32, Block32, Timestamp};
use casku::cross_cluster::{dest_ch_verify_transfer, source_ch_build_transfer, TransferRequest};
use casku::error::ProtocolConfig;
use casku::group::{GroupElem, GroupParams, Scalar};
use casku::hash::{hash_to_block, hash_to_nonzero_scalar, tags};
use casku::join::{
    ch_aggregate, ch_collect_and_verify, cm_verify_and_respond, nuav_build_request, peer_ch_verify,
    AggregateChallenge, ChJoinState, CmResponse, JoinRequest, PeerBroadcast,
};
use casku::par::Execution;
use casku::registry::{derive_pid, ChCredential, CmCredential, GbsNetwork, NuavCredential, PublicParams, Role};

use crate::{chunk_ranges, derive_seed, AdversaryError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    Registration(Role),
    JoiningRequest,
    CmVerification,
    ChVerification,
    CrossCluster,
}

impl QueryKind {
    pub const ALL: [QueryKind; 7] = [
        QueryKind::Registration(Role::Ch),
        QueryKind::Registration(Role::Cm),
        QueryKind::Registration(Role::Nuav),
        QueryKind::JoiningRequest,
        QueryKind::CmVerification,
        QueryKind::ChVerification,
        QueryKind::CrossCluster,
    ];
}

impl FromStr for QueryKind {
    type Err = AdversaryError;
    fn from_str(s: &str) -> Result<Self, AdversaryError> {
        Ok(match s {
            "registration-ch" => QueryKind::Registration(Role::Ch),
            "registration-cm" => QueryKind::Registration(Role::Cm),
            "registration-nuav" => QueryKind::Registration(Role::Nuav),
            "joining-request" => QueryKind::JoiningRequest,
            "cm-verification" => QueryKind::CmVerification,
            "ch-verification" => QueryKind::ChVerification,
            "cross-cluster" => QueryKind::CrossCluster,
            _ => return Err(AdversaryError::UnknownQueryKind(s.to_string())),
        })
    }
}

/// What the adversary sees. Only the fields each query returns in the game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Response {
    ChRegistration { pid: Block32, key: Block32, sk: Scalar, pk: GroupElem, ct: Block32, cjt: Block32 },
    CmRegistration { pid: Block32, key: Block32, sk: Scalar, pk: GroupElem },
    NuavRegistration { pid: Block32, h_cjt: Block32, sk: Scalar, pk: GroupElem },
    JoiningRequest(JoinRequest),
    CmVerification { cm_pid: Block32, response: CmResponse },
    ChVerification(PeerBroadcast),
    CrossCluster(TransferRequest),
}

/// Public data for the guess phase. The member challenge and the other
/// members' responses to the same batch are on the air anyway.
#[derive(Debug, Clone)]
pub struct Challenge {
    pub nuav_pid: Block32,
    pub nuav_pk: GroupElem,
    pub cm_pid: Block32,
    pub cm_pk: GroupElem,
    pub cm_index: usize,
    pub ch_pid: Block32,
    pub ch_pk: GroupElem,
    pub n_cm: u64,
    pub t1: Timestamp,
    pub t2: Timestamp,
    pub t3: Timestamp,
    pub cm_challenge: AggregateChallenge,
    pub batch_responses: Vec<(usize, CmResponse)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Fresh random values in every forged field.
    Random,
    /// Logged responses re-sent with their original, now expired, timestamps.
    ReplayStale,
    /// Fields mixed across logged responses and the challenge batch.
    SpliceFields,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Random, Strategy::ReplayStale, Strategy::SpliceFields];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::ReplayStale => "replay-stale",
            Strategy::SpliceFields => "splice-fields",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The message a trial forges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    JoinRequest,
    CmResponse,
    PeerBroadcast,
    TransferRequest,
}

impl Target {
    pub const ALL: [Target; 4] = [Target::JoinRequest, Target::CmResponse, Target::PeerBroadcast, Target::TransferRequest];
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Forgery {
    Join(JoinRequest),
    Cm(CmResponse),
    Broadcast(PeerBroadcast),
    Transfer(TransferRequest),
}

const QUERY_START_MS: u64 = 1_000_000;
/// Gap between the last query and the challenge, well past any freshness
/// window used here.
const CHALLENGE_GAP_MS: u64 = 10_000;

pub struct OracleSession {
    pp: PublicParams,
    net: GbsNetwork,
    target: ChCredential,
    peer: ChCredential,
    /// Target-cluster members; the last one is the challenge member.
    cms: Vec<CmCredential>,
    /// Queryable NUAVs provisioned for the target cluster.
    nuavs: Vec<NuavCredential>,
    chal_nuav: NuavCredential,
    sandbox_key: Block32,
    sandbox_h_cjt: Block32,
    log: Vec<Response>,
    clock: u64,
    cfg: ProtocolConfig,
    rng: ChaCha20Rng,
    challenge: Option<(Challenge, ChJoinState)>,
}

impl OracleSession {
    /// `n_cm >= 2`: one member is held back as the challenge identity.
    pub fn new(gp: &GroupParams, n_cm: usize, cfg: ProtocolConfig, seed: u64) -> Result<Self, AdversaryError> {
        if n_cm < 2 {
            return Err(AdversaryError::NoIdentity);
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut net = GbsNetwork::setup(gp, 2, &mut rng)?;
        let target = net.register_ch(0, b"target", &mut rng)?;
        let peer = net.register_ch(1, b"peer", &mut rng)?;
        let cms = (0..n_cm)
            .map(|i| net.register_cm(target.cluster, format!("cm{i}").as_bytes(), &mut rng))
            .collect::<Result<Vec<_>, _>>()?;
        let nuavs = (0..3).map(|_| net.provision_nuav(target.cluster, &mut rng)).collect::<Result<Vec<_>, _>>()?;
        let chal_nuav = net.provision_nuav(target.cluster, &mut rng)?;
        let target = net.ch_credential(target.cluster)?;
        let sandbox_key = Block32::random(&mut rng);
        let sandbox_h_cjt = hash_to_block(tags::CJT, &[&Block32::random(&mut rng).0]);
        Ok(OracleSession {
            pp: net.pp.clone(),
            net,
            target,
            peer,
            cms,
            nuavs,
            chal_nuav,
            sandbox_key,
            sandbox_h_cjt,
            log: Vec::new(),
            clock: QUERY_START_MS,
            cfg,
            rng,
            challenge: None,
        })
    }

    pub fn public_params(&self) -> &PublicParams {
        &self.pp
    }

    pub fn log(&self) -> &[Response] {
        &self.log
    }

    fn gp(&self) -> &GroupParams {
        &self.pp.group
    }

    fn tick(&mut self) -> Timestamp {
        self.clock += 1;
        Timestamp(self.clock)
    }

    /// One oracle query. `who` picks among the queryable identities of that
    /// kind (wrapping); registration ignores it.
    pub fn dug_query(&mut self, kind: QueryKind, who: usize) -> Result<Response, AdversaryError> {
        let gp = self.pp.group.clone();
        let now = self.tick();
        let queryable_cms = self.cms.len() - 1;
        let resp = match kind {
            QueryKind::Registration(Role::Ch) => {
                let sk_gbs = self.net.station(0)?.secret_key().clone();
                let cjt = Block32::random(&mut self.rng);
                let h = gp.reduce_block(&hash_to_block(tags::CJT, &[&cjt.0]));
                let tweak = gp.scalar_mul(&sk_gbs, &h);
                let (r, sk) = loop {
                    let r = gp.random_scalar(&mut self.rng);
                    let sk = gp.scalar_add(&r, &tweak);
                    if !sk.is_zero() {
                        break (r, sk);
                    }
                };
                Response::ChRegistration {
                    pid: derive_pid(&sk, &r),
                    key: Block32::random(&mut self.rng),
                    pk: gp.exp_g(&r),
                    sk,
                    ct: Block32::random(&mut self.rng),
                    cjt,
                }
            }
            QueryKind::Registration(role) => {
                let sk = gp.random_scalar(&mut self.rng);
                let r = gp.random_scalar(&mut self.rng);
                let pid = derive_pid(&sk, &r);
                let pk = gp.exp_g(&sk);
                if role == Role::Cm {
                    Response::CmRegistration { pid, key: self.sandbox_key, sk, pk }
                } else {
                    Response::NuavRegistration { pid, h_cjt: self.sandbox_h_cjt, sk, pk }
                }
            }
            QueryKind::JoiningRequest => {
                let n = &self.nuavs[who % self.nuavs.len()];
                Response::JoiningRequest(nuav_build_request(&gp, n, &mut self.rng))
            }
            QueryKind::CmVerification => {
                let n = &self.nuavs[who % self.nuavs.len()];
                let req = nuav_build_request(&gp, n, &mut self.rng);
                let (_, chals) = ch_aggregate(&gp, &self.target, &[req], now, &mut self.rng)?;
                let l = who % queryable_cms;
                let cm = &self.cms[l];
                let response = cm_verify_and_respond(&gp, cm, &self.target.pid, self.n_cm(), &chals[l], now, &self.cfg)?;
                Response::CmVerification { cm_pid: cm.pid, response }
            }
            QueryKind::ChVerification => {
                Response::ChVerification(self.honest_batch(now, who)?)
            }
            QueryKind::CrossCluster => {
                let pid = self.cms[who % queryable_cms].pid;
                Response::CrossCluster(source_ch_build_transfer(&self.target, &pid, now)?)
            }
        };
        self.log.push(resp.clone());
        Ok(resp)
    }

    fn n_cm(&self) -> u64 {
        self.cms.len() as u64
    }

    /// Aggregates one queryable NUAV's request, collects every member's
    /// response and returns the peer broadcast.
    fn honest_batch(&mut self, t: Timestamp, who: usize) -> Result<PeerBroadcast, AdversaryError> {
        let gp = self.pp.group.clone();
        let n = &self.nuavs[who % self.nuavs.len()];
        let req = nuav_build_request(&gp, n, &mut self.rng);
        let (mut state, chals) = ch_aggregate(&gp, &self.target, &[req], t, &mut self.rng)?;
        let responses = self
            .cms
            .iter()
            .zip(&chals)
            .enumerate()
            .map(|(l, (cm, c))| {
                cm_verify_and_respond(&gp, cm, &self.target.pid, self.n_cm(), c, t, &self.cfg).map(|r| (l, r))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ch_collect_and_verify(&gp, &self.target, &mut state, &responses, self.n_cm(), t, t, &self.cfg)?)
    }

    /// A few queries of every kind, so replay and splice have material.
    pub fn scripted_queries(&mut self, per_kind: usize) -> Result<(), AdversaryError> {
        for i in 0..per_kind {
            for kind in QueryKind::ALL {
                self.dug_query(kind, i)?;
            }
        }
        Ok(())
    }

    /// Fixes the challenge on first call. Its identities are never handed to
    /// [`dug_query`](Self::dug_query).
    pub fn challenge(&mut self) -> Result<Challenge, AdversaryError> {
        if let Some((c, _)) = &self.challenge {
            return Ok(c.clone());
        }
        let gp = self.pp.group.clone();
        let t = Timestamp(self.clock + CHALLENGE_GAP_MS);
        let cm_index = self.cms.len() - 1;
        let n = self.nuavs[0].clone();
        let req = nuav_build_request(&gp, &n, &mut self.rng);
        let (state, chals) = ch_aggregate(&gp, &self.target, &[req], t, &mut self.rng)?;
        let batch_responses = self.cms[..cm_index]
            .iter()
            .zip(&chals)
            .enumerate()
            .map(|(l, (cm, c))| {
                cm_verify_and_respond(&gp, cm, &self.target.pid, self.n_cm(), c, t, &self.cfg).map(|r| (l, r))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let cm = &self.cms[cm_index];
        let c = Challenge {
            nuav_pid: self.chal_nuav.pid,
            nuav_pk: self.chal_nuav.pk.clone(),
            cm_pid: cm.pid,
            cm_pk: cm.pk.clone(),
            cm_index,
            ch_pid: self.target.pid,
            ch_pk: self.target.pk.clone(),
            n_cm: self.n_cm(),
            t1: t,
            t2: t,
            t3: t,
            cm_challenge: chals[cm_index].clone(),
            batch_responses,
        };
        self.challenge = Some((c.clone(), state));
        Ok(c)
    }

    /// Runs the honest verifier on a forgery. A forgery equal to a logged
    /// oracle response never counts.
    pub fn verify(&mut self, forgery: &Forgery, rng: &mut dyn RngCore) -> Result<bool, AdversaryError> {
        let chal = self.challenge()?;
        let (_, state) = self.challenge.as_ref().expect("challenge fixed above");
        let state = state.clone();
        let gp = self.pp.group.clone();
        let now = chal.t1;
        if self.is_logged(forgery) {
            return Ok(false);
        }
        let ok = match forgery {
            Forgery::Join(req) => match ch_aggregate(&gp, &self.target, std::slice::from_ref(req), now, rng) {
                Ok((_, chals)) => {
                    cm_verify_and_respond(&gp, &self.cms[0], &self.target.pid, self.n_cm(), &chals[0], now, &self.cfg)
                        .is_ok()
                }
                Err(_) => false,
            },
            Forgery::Cm(resp) => {
                let mut state = state;
                ch_collect_and_verify(
                    &gp,
                    &self.target,
                    &mut state,
                    &[(chal.cm_index, resp.clone())],
                    self.n_cm(),
                    chal.t2,
                    now,
                    &self.cfg,
                )
                .is_ok()
            }
            Forgery::Broadcast(bc) => {
                peer_ch_verify(&gp, &self.peer, bc, self.n_cm() * self.n_cm(), now, &self.cfg).is_ok()
            }
            Forgery::Transfer(req) => dest_ch_verify_transfer(&self.peer, &mut self.net, req, now, &self.cfg).is_ok(),
        };
        Ok(ok)
    }

    fn is_logged(&self, forgery: &Forgery) -> bool {
        self.log.iter().any(|r| match (r, forgery) {
            (Response::JoiningRequest(a), Forgery::Join(b)) => a == b,
            (Response::CmVerification { response, .. }, Forgery::Cm(b)) => response == b,
            (Response::ChVerification(a), Forgery::Broadcast(b)) => a == b,
            (Response::CrossCluster(a), Forgery::Transfer(b)) => a == b,
            _ => false,
        })
    }

    /// Builds the forged message for one trial from public data only: the
    /// challenge, the public parameters and the query log.
    pub fn forge(&mut self, strategy: Strategy, target: Target, rng: &mut dyn RngCore) -> Result<Forgery, AdversaryError> {
        let chal = self.challenge()?;
        let gp = self.gp().clone();
        let log = &self.log;
        let reqs: Vec<&JoinRequest> = log.iter().filter_map(|r| if let Response::JoiningRequest(q) = r { Some(q) } else { None }).collect();
        let resps: Vec<&CmResponse> = log
            .iter()
            .filter_map(|r| if let Response::CmVerification { response, .. } = r { Some(response) } else { None })
            .collect();
        let bcs: Vec<&PeerBroadcast> = log.iter().filter_map(|r| if let Response::ChVerification(b) = r { Some(b) } else { None }).collect();
        let xfers: Vec<&TransferRequest> = log.iter().filter_map(|r| if let Response::CrossCluster(x) = r { Some(x) } else { None }).collect();

        let pick = |n: usize, rng: &mut dyn RngCore| rng.gen_range(0..n);
        let strategy = match (strategy, target) {
            (Strategy::Random, _) => Strategy::Random,
            (_, Target::JoinRequest) if reqs.is_empty() => Strategy::Random,
            (_, Target::CmResponse) if resps.is_empty() => Strategy::Random,
            (_, Target::PeerBroadcast) if bcs.is_empty() => Strategy::Random,
            (_, Target::TransferRequest) if xfers.is_empty() => Strategy::Random,
            (s, _) => s,
        };

        Ok(match (strategy, target) {
            (Strategy::Random, Target::JoinRequest) => Forgery::Join(JoinRequest {
                nuav_pid: chal.nuav_pid,
                nuav_pk: chal.nuav_pk.clone(),
                ch_pid: chal.ch_pid,
                v: gp.random_element(rng),
                sig: gp.random_element(rng),
            }),
            (Strategy::Random, Target::CmResponse) => Forgery::Cm(CmResponse {
                t1: chal.t1,
                sig_cm: gp.random_element(rng),
                c_cm: Block32::random(rng),
            }),
            (Strategy::Random, Target::PeerBroadcast) => Forgery::Broadcast(PeerBroadcast {
                sig_cms: gp.random_element(rng),
                pk_cms: gp.random_element(rng),
                c_ch: Block32::random(rng),
                q_ch: Block32::random(rng),
                t2: chal.t2,
            }),
            (Strategy::Random, Target::TransferRequest) => {
                Forgery::Transfer(TransferRequest { c: Block32::random(rng), euav_pid: chal.cm_pid, t3: chal.t3 })
            }

            (Strategy::ReplayStale, Target::JoinRequest) => {
                let r = reqs[pick(reqs.len(), rng)];
                Forgery::Join(JoinRequest { nuav_pid: chal.nuav_pid, nuav_pk: chal.nuav_pk.clone(), ..r.clone() })
            }
            (Strategy::ReplayStale, Target::CmResponse) => Forgery::Cm(resps[pick(resps.len(), rng)].clone()),
            (Strategy::ReplayStale, Target::PeerBroadcast) => Forgery::Broadcast(bcs[pick(bcs.len(), rng)].clone()),
            (Strategy::ReplayStale, Target::TransferRequest) => {
                let x = xfers[pick(xfers.len(), rng)];
                Forgery::Transfer(TransferRequest { euav_pid: chal.cm_pid, ..x.clone() })
            }

            (Strategy::SpliceFields, Target::JoinRequest) => {
                let a = reqs[pick(reqs.len(), rng)];
                let b = reqs[pick(reqs.len(), rng)];
                Forgery::Join(JoinRequest {
                    nuav_pid: chal.nuav_pid,
                    nuav_pk: chal.nuav_pk.clone(),
                    ch_pid: chal.ch_pid,
                    v: a.v.clone(),
                    sig: b.sig.clone(),
                })
            }
            (Strategy::SpliceFields, Target::CmResponse) => {
                // The batch's result is the same for every member, so the
                // neighbours' c is already right; only sig must be found.
                let c_cm = if chal.batch_responses.is_empty() || rng.gen_bool(0.25) {
                    resps[pick(resps.len(), rng)].c_cm
                } else {
                    chal.batch_responses[pick(chal.batch_responses.len(), rng)].1.c_cm
                };
                let sig_cm = if !chal.batch_responses.is_empty() && rng.gen_bool(0.5) {
                    chal.batch_responses[pick(chal.batch_responses.len(), rng)].1.sig_cm.clone()
                } else {
                    resps[pick(resps.len(), rng)].sig_cm.clone()
                };
                Forgery::Cm(CmResponse { t1: chal.t1, sig_cm, c_cm })
            }
            (Strategy::SpliceFields, Target::PeerBroadcast) => {
                let a = bcs[pick(bcs.len(), rng)];
                let b = bcs[pick(bcs.len(), rng)];
                // Keep the hidden result of `b` under the new T2.
                let c_ch = xor32(&xor32(&b.c_ch, &b.t2.to_block()), &chal.t2.to_block());
                Forgery::Broadcast(PeerBroadcast {
                    sig_cms: a.sig_cms.clone(),
                    pk_cms: a.pk_cms.clone(),
                    c_ch,
                    q_ch: b.q_ch,
                    t2: chal.t2,
                })
            }
            (Strategy::SpliceFields, Target::TransferRequest) => {
                let a = xfers[pick(xfers.len(), rng)];
                let b = xfers[pick(xfers.len(), rng)];
                // C ⊕ C' cancels the token: move the difference of the two
                // pseudonyms onto a logged token.
                let c = xor32(&xor32(&a.c, &a.euav_pid), &xor32(&b.euav_pid, &chal.cm_pid));
                Forgery::Transfer(TransferRequest { c, euav_pid: chal.cm_pid, t3: chal.t3 })
            }
        })
    }

    /// One trial: forge, then verify.
    pub fn forgery_trial(&mut self, strategy: Strategy, target: Target, rng: &mut dyn RngCore) -> Result<bool, AdversaryError> {
        let f = self.forge(strategy, target, rng)?;
        self.verify(&f, rng)
    }

    /// Turns a logged join request of a queried NUAV into one for the
    /// challenge NUAV: `sig' = sig^(w_A / w_k)` with the same `V`. Not part
    /// of the suite; kept to document that the request does not bind the
    /// sender's key.
    pub fn reweight_forgery(&mut self) -> Result<Option<Forgery>, AdversaryError> {
        let chal = self.challenge()?;
        let gp = self.gp().clone();
        let Some(r) = self.log.iter().find_map(|r| if let Response::JoiningRequest(q) = r { Some(q.clone()) } else { None }) else {
            return Ok(None);
        };
        let w = |pid: &Block32, pk: &GroupElem| hash_to_nonzero_scalar(&gp, tags::JOIN_W, &[&pid.0, &r.ch_pid.0, &gp.encode_elem(pk)]);
        let w_k = w(&r.nuav_pid, &r.nuav_pk);
        let w_a = w(&chal.nuav_pid, &chal.nuav_pk);
        let e = gp.scalar_mul(&w_a, &gp.scalar_inv(&w_k)?);
        Ok(Some(Forgery::Join(JoinRequest {
            nuav_pid: chal.nuav_pid,
            nuav_pk: chal.nuav_pk.clone(),
            ch_pid: r.ch_pid,
            v: r.v.clone(),
            sig: gp.mod_exp(&r.sig, &e),
        })))
    }

    #[cfg(test)]
    fn swarm_token(&self) -> Block32 {
        self.target.ct
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DugReport {
    pub strategy: Strategy,
    pub trials: usize,
    pub wins: u64,
    /// Wins per [`Target::ALL`] entry.
    pub wins_by_target: [u64; 4],
}

/// `trials` forgery trials, targets in rotation. Trials are split over
/// `sessions` independent sessions.
pub fn run_dug(
    gp: &GroupParams,
    strategy: Strategy,
    trials: usize,
    sessions: usize,
    cfg: ProtocolConfig,
    seed: u64,
    exec: Execution,
) -> Result<DugReport, AdversaryError> {
    let ranges = chunk_ranges(trials, sessions);
    let parts = exec.map(ranges.into_iter().enumerate().collect(), |(s, range)| -> Result<[u64; 4], AdversaryError> {
        let mut wins = [0u64; 4];
        if range.is_empty() {
            return Ok(wins);
        }
        let mut session = OracleSession::new(gp, 3, cfg, derive_seed(seed, 0, s as u64))?;
        session.scripted_queries(3)?;
        for i in range {
            let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, 1, i as u64));
            let t = i % Target::ALL.len();
            if session.forgery_trial(strategy, Target::ALL[t], &mut rng)? {
                wins[t] += 1;
            }
        }
        Ok(wins)
    });
    let mut wins_by_target = [0u64; 4];
    for p in parts {
        for (acc, w) in wins_by_target.iter_mut().zip(p?) {
            *acc += w;
        }
    }
    Ok(DugReport { strategy, trials, wins: wins_by_target.iter().sum(), wins_by_target })
}
