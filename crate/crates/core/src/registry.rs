//! System setup, ground-station state and credential issuance.
//!
//! Registration happens over an assumed secure channel, so it is modeled as
//! direct calls on [`GbsNetwork`]. Every PID write is mirrored to all
//! stations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::RngCore;

use crate::block::Block32;
use crate::group::{encode_scalar32, GroupElem, GroupError, GroupParams, Scalar};
use crate::hash::{hash_to_block, tags};
use crate::opcount;

/// Label describing the hash construction all parties agreed on.
pub const HASH_SUITE: &str = "sha256/tagged/len32be";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("at least one ground station is required")]
    NoStations,
    #[error("no ground station with index {0}")]
    UnknownStation(usize),
    #[error("real identity already registered")]
    DuplicateRegistration,
    #[error("unknown cluster {0}")]
    UnknownCluster(ClusterId),
    #[error("pid already present in the database")]
    DuplicateInsert,
    #[error("pid not present in the database")]
    UnknownPid,
}

/// A cluster, named by its ground station and its index there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClusterId {
    pub gbs: u16,
    pub index: u16,
}

impl fmt::Display for ClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.gbs, self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Ch,
    Cm,
    Nuav,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Ch => "ch",
            Role::Cm => "cm",
            Role::Nuav => "nuav",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PidRecord {
    pub role: Role,
    pub cluster: ClusterId,
    pub superseded: bool,
}

/// The PID database held by each ground station.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PidDb {
    entries: BTreeMap<Block32, PidRecord>,
}

impl PidDb {
    pub fn insert(&mut self, pid: Block32, role: Role, cluster: ClusterId) -> Result<(), RegistryError> {
        if self.entries.contains_key(&pid) {
            return Err(RegistryError::DuplicateInsert);
        }
        self.entries.insert(pid, PidRecord { role, cluster, superseded: false });
        Ok(())
    }

    /// Active entries only; superseded PIDs are kept for audit but not found.
    pub fn lookup(&self, pid: &Block32) -> Option<&PidRecord> {
        self.entries.get(pid).filter(|r| !r.superseded)
    }

    pub fn contains(&self, pid: &Block32) -> bool {
        self.lookup(pid).is_some()
    }

    /// Any entry, including superseded ones.
    pub fn record(&self, pid: &Block32) -> Option<&PidRecord> {
        self.entries.get(pid)
    }

    pub fn supersede(&mut self, pid: &Block32) -> Result<(), RegistryError> {
        match self.entries.get_mut(pid) {
            Some(r) if !r.superseded => {
                r.superseded = true;
                Ok(())
            }
            _ => Err(RegistryError::UnknownPid),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Block32, &PidRecord)> {
        self.entries.iter()
    }

    /// One line per PID: `hex,role,cluster[,superseded]`, sorted by PID.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (pid, r) in &self.entries {
            out.push_str(&format!("{},{},{}", pid.to_hex(), r.role.as_str(), r.cluster));
            if r.superseded {
                out.push_str(",superseded");
            }
            out.push('\n');
        }
        out
    }
}

/// `{p, q, g, pk_GBS_1.., hash suite}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicParams {
    pub group: GroupParams,
    pub gbs_pubs: Vec<GroupElem>,
    pub hash_suite: String,
}

/// Secret and public key material of one member, as needed for rekeying.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemberKeys {
    pub pid: Block32,
    pub sk: Scalar,
    pub pk: GroupElem,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChCredential {
    pub cluster: ClusterId,
    pub pid: Block32,
    pub key: Block32,
    pub cjt: Block32,
    /// `H(CJT)`, cached at issuance.
    pub h_cjt: Block32,
    pub sk: Scalar,
    pub pk: GroupElem,
    pub r: Scalar,
    pub ct: Block32,
    /// Current members in registration/admission order. The CH needs their
    /// secret keys to mask rekey shares.
    pub members: Vec<MemberKeys>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CmCredential {
    pub cluster: ClusterId,
    pub pid: Block32,
    pub sk: Scalar,
    pub pk: GroupElem,
    pub key: Block32,
    pub r: Scalar,
}

impl CmCredential {
    pub fn member_keys(&self) -> MemberKeys {
        MemberKeys { pid: self.pid, sk: self.sk.clone(), pk: self.pk.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NuavCredential {
    pub cluster: ClusterId,
    pub pid: Block32,
    pub sk: Scalar,
    pub pk: GroupElem,
    pub r: Scalar,
    pub h_cjt: Block32,
    pub gbs_pk: GroupElem,
    pub ch_pk: GroupElem,
    pub ch_pid: Block32,
}

impl NuavCredential {
    pub fn member_keys(&self) -> MemberKeys {
        MemberKeys { pid: self.pid, sk: self.sk.clone(), pk: self.pk.clone() }
    }

    /// A cluster-member credential for an admitted NUAV once it holds the
    /// cluster key.
    pub fn into_member(self, key: Block32) -> CmCredential {
        CmCredential { cluster: self.cluster, pid: self.pid, sk: self.sk, pk: self.pk, key, r: self.r }
    }
}

#[derive(Debug, Clone)]
struct ClusterRecord {
    ch_pid: Block32,
    ch_pk: GroupElem,
    ch_sk: Scalar,
    ch_r: Scalar,
    key: Block32,
    cjt: Block32,
    h_cjt: Block32,
    members: Vec<MemberKeys>,
}

/// One ground station.
#[derive(Debug, Clone)]
pub struct GbsState {
    index: u16,
    sk: Scalar,
    pk: GroupElem,
    ct: Block32,
    db: PidDb,
    rids: BTreeSet<Vec<u8>>,
    clusters: BTreeMap<u16, ClusterRecord>,
    pending_nuavs: BTreeMap<Block32, (ClusterId, MemberKeys)>,
}

impl GbsState {
    pub fn index(&self) -> usize {
        self.index as usize
    }
    pub fn pk(&self) -> &GroupElem {
        &self.pk
    }
    pub fn ct(&self) -> &Block32 {
        &self.ct
    }
    pub fn db(&self) -> &PidDb {
        &self.db
    }
    /// Challenger-side access for security games; never sent on the wire.
    pub fn secret_key(&self) -> &Scalar {
        &self.sk
    }
    pub fn cluster_ids(&self) -> Vec<ClusterId> {
        self.clusters.keys().map(|&index| ClusterId { gbs: self.index, index }).collect()
    }
}

/// Generates station keys and the shared cross-cluster token.
pub fn setup_system<R: RngCore + ?Sized>(
    group: &GroupParams,
    n_gbs: usize,
    rng: &mut R,
) -> Result<(PublicParams, Vec<GbsState>), RegistryError> {
    let sks: Vec<Scalar> = (0..n_gbs).map(|_| group.random_scalar(rng)).collect();
    setup_with_keys(group, sks, rng)
}

/// As [`setup_system`] with caller-chosen station secret keys.
pub fn setup_with_keys<R: RngCore + ?Sized>(
    group: &GroupParams,
    sks: Vec<Scalar>,
    rng: &mut R,
) -> Result<(PublicParams, Vec<GbsState>), RegistryError> {
    if sks.is_empty() {
        return Err(RegistryError::NoStations);
    }
    if sks.iter().any(Scalar::is_zero) {
        return Err(GroupError::OutOfRange.into());
    }
    let ct = Block32::random(rng);
    let mut states = Vec::with_capacity(sks.len());
    for (i, sk) in sks.into_iter().enumerate() {
        let pk = group.exp_g(&sk);
        states.push(GbsState {
            index: i as u16,
            sk,
            pk,
            ct,
            db: PidDb::default(),
            rids: BTreeSet::new(),
            clusters: BTreeMap::new(),
            pending_nuavs: BTreeMap::new(),
        });
    }
    let pp = PublicParams {
        group: group.clone(),
        gbs_pubs: states.iter().map(|s| s.pk.clone()).collect(),
        hash_suite: HASH_SUITE.to_string(),
    };
    Ok((pp, states))
}

/// `PID = H(sk, r)`.
pub fn derive_pid(sk: &Scalar, r: &Scalar) -> Block32 {
    hash_to_block(tags::PID, &[&encode_scalar32(sk).0, &encode_scalar32(r).0])
}

/// All ground stations plus the public parameters.
#[derive(Debug, Clone)]
pub struct GbsNetwork {
    pub pp: PublicParams,
    stations: Vec<GbsState>,
}

impl GbsNetwork {
    pub fn setup<R: RngCore + ?Sized>(group: &GroupParams, n_gbs: usize, rng: &mut R) -> Result<Self, RegistryError> {
        let (pp, stations) = setup_system(group, n_gbs, rng)?;
        Ok(GbsNetwork { pp, stations })
    }

    pub fn from_parts(pp: PublicParams, stations: Vec<GbsState>) -> Self {
        GbsNetwork { pp, stations }
    }

    pub fn group(&self) -> &GroupParams {
        &self.pp.group
    }

    pub fn stations(&self) -> &[GbsState] {
        &self.stations
    }

    pub fn station(&self, i: usize) -> Result<&GbsState, RegistryError> {
        self.stations.get(i).ok_or(RegistryError::UnknownStation(i))
    }

    fn station_mut(&mut self, i: usize) -> Result<&mut GbsState, RegistryError> {
        self.stations.get_mut(i).ok_or(RegistryError::UnknownStation(i))
    }

    fn cluster(&self, id: ClusterId) -> Result<&ClusterRecord, RegistryError> {
        self.station(id.gbs as usize)
            .ok()
            .and_then(|s| s.clusters.get(&id.index))
            .ok_or(RegistryError::UnknownCluster(id))
    }

    fn cluster_mut(&mut self, id: ClusterId) -> Result<&mut ClusterRecord, RegistryError> {
        self.stations
            .get_mut(id.gbs as usize)
            .and_then(|s| s.clusters.get_mut(&id.index))
            .ok_or(RegistryError::UnknownCluster(id))
    }

    fn claim_rid(&mut self, gbs: usize, rid: &[u8]) -> Result<(), RegistryError> {
        let st = self.station_mut(gbs)?;
        if !st.rids.insert(rid.to_vec()) {
            return Err(RegistryError::DuplicateRegistration);
        }
        Ok(())
    }

    fn pid_taken(&self, pid: &Block32) -> bool {
        self.stations.iter().any(|s| s.db.record(pid).is_some() || s.pending_nuavs.contains_key(pid))
    }

    /// Draws `(sk, r)` until `H(sk, r)` is unused anywhere.
    fn fresh_identity<R: RngCore + ?Sized>(&self, gp: &GroupParams, rng: &mut R) -> (Scalar, Scalar, Block32) {
        loop {
            let sk = gp.random_scalar(rng);
            let r = gp.random_scalar(rng);
            let pid = derive_pid(&sk, &r);
            if !self.pid_taken(&pid) {
                return (sk, r, pid);
            }
        }
    }

    /// Inserts `pid` at every station, or nowhere if any already holds it.
    pub fn db_insert(&mut self, pid: Block32, role: Role, cluster: ClusterId) -> Result<(), RegistryError> {
        if self.stations.iter().any(|s| s.db.record(&pid).is_some()) {
            return Err(RegistryError::DuplicateInsert);
        }
        for s in &mut self.stations {
            s.db.insert(pid, role, cluster)?;
        }
        Ok(())
    }

    pub fn db_lookup(&self, gbs: usize, pid: &Block32) -> Result<Option<PidRecord>, RegistryError> {
        Ok(self.station(gbs)?.db.lookup(pid).copied())
    }

    /// Issues a cluster head: `sk = r + sk_GBS·H(CJT)`, `pk = g^r`,
    /// `PID = H(sk, r)`. Creates the cluster.
    pub fn register_ch<R: RngCore + ?Sized>(
        &mut self,
        gbs: usize,
        rid: &[u8],
        rng: &mut R,
    ) -> Result<ChCredential, RegistryError> {
        self.station(gbs)?;
        let gp = self.pp.group.clone();
        let st = &self.stations[gbs];
        let index = st.clusters.keys().next_back().map_or(0, |i| i + 1);
        let id = ClusterId { gbs: gbs as u16, index };
        let key = Block32::random(rng);
        let cjt = Block32::random(rng);
        let h_cjt = hash_to_block(tags::CJT, &[&cjt.0]);
        let tweak = gp.scalar_mul(&st.sk, &gp.reduce_block(&h_cjt));
        // Small groups can give sk = 0 or a PID already in use; redraw r.
        let (r, sk, pid) = loop {
            let r = gp.random_scalar(rng);
            let sk = gp.scalar_add(&r, &tweak);
            if sk.is_zero() {
                continue;
            }
            let pid = derive_pid(&sk, &r);
            if !self.pid_taken(&pid) {
                break (r, sk, pid);
            }
        };
        let pk = gp.exp_g(&r);
        let gbs_pk = st.pk.clone();
        opcount::uncounted(|| {
            let lhs = gp.exp_g(&sk);
            let rhs = gp.mul(&gp.mod_exp(&gbs_pk, &gp.reduce_block(&h_cjt)), &pk);
            assert_eq!(lhs, rhs, "issued CH key fails g^sk = pk_GBS^H(CJT)·pk");
        });
        self.claim_rid(gbs, rid)?;
        self.db_insert(pid, Role::Ch, id)?;
        let ct = self.stations[gbs].ct;
        self.stations[gbs].clusters.insert(
            index,
            ClusterRecord {
                ch_pid: pid,
                ch_pk: pk.clone(),
                ch_sk: sk.clone(),
                ch_r: r.clone(),
                key,
                cjt,
                h_cjt,
                members: Vec::new(),
            },
        );
        Ok(ChCredential { cluster: id, pid, key, cjt, h_cjt, sk, pk, r, ct, members: Vec::new() })
    }

    /// Issues a cluster member sharing the cluster key.
    pub fn register_cm<R: RngCore + ?Sized>(
        &mut self,
        cluster: ClusterId,
        rid: &[u8],
        rng: &mut R,
    ) -> Result<CmCredential, RegistryError> {
        let key = self.cluster(cluster)?.key;
        let gp = self.pp.group.clone();
        let (sk, r, pid) = self.fresh_identity(&gp, rng);
        let pk = gp.exp_g(&sk);
        self.claim_rid(cluster.gbs as usize, rid)?;
        self.db_insert(pid, Role::Cm, cluster)?;
        let cred = CmCredential { cluster, pid, sk, pk, key, r };
        self.cluster_mut(cluster)?.members.push(cred.member_keys());
        Ok(cred)
    }

    /// Dispatches a new UAV towards `cluster`. Its PID is not stored until
    /// the join completes.
    pub fn provision_nuav<R: RngCore + ?Sized>(
        &mut self,
        cluster: ClusterId,
        rng: &mut R,
    ) -> Result<NuavCredential, RegistryError> {
        let rec = self.cluster(cluster)?.clone();
        let gbs_pk = self.station(cluster.gbs as usize)?.pk.clone();
        let gp = self.pp.group.clone();
        let (sk, r, pid) = self.fresh_identity(&gp, rng);
        let pk = gp.exp_g(&sk);
        let cred = NuavCredential {
            cluster,
            pid,
            sk,
            pk,
            r,
            h_cjt: rec.h_cjt,
            gbs_pk,
            ch_pk: rec.ch_pk,
            ch_pid: rec.ch_pid,
        };
        self.station_mut(cluster.gbs as usize)?.pending_nuavs.insert(pid, (cluster, cred.member_keys()));
        Ok(cred)
    }

    /// Stores the PIDs of NUAVs that completed the join at every station and
    /// adds them to the cluster roster.
    pub fn admit_nuavs(&mut self, cluster: ClusterId, pids: &[Block32]) -> Result<(), RegistryError> {
        self.cluster(cluster)?;
        for pid in pids {
            self.db_insert(*pid, Role::Nuav, cluster)?;
            let pending = self.station_mut(cluster.gbs as usize)?.pending_nuavs.remove(pid);
            if let Some((c, keys)) = pending {
                if c == cluster {
                    self.cluster_mut(cluster)?.members.push(keys);
                }
            }
        }
        Ok(())
    }

    /// Records a cross-cluster move: the new PID is stored everywhere, the
    /// old one is marked superseded, and the roster entry moves clusters.
    pub fn record_transfer(&mut self, old_pid: &Block32, new_pid: Block32, dest: ClusterId) -> Result<(), RegistryError> {
        self.cluster(dest)?;
        let Some(rec) = self.stations[0].db.lookup(old_pid).copied() else {
            return Err(RegistryError::UnknownPid);
        };
        self.db_insert(new_pid, rec.role, dest)?;
        for s in &mut self.stations {
            s.db.supersede(old_pid)?;
        }
        let mut moved = None;
        if let Ok(src) = self.cluster_mut(rec.cluster) {
            if let Some(pos) = src.members.iter().position(|m| m.pid == *old_pid) {
                moved = Some(src.members.remove(pos));
            }
        }
        if let Some(mut m) = moved {
            m.pid = new_pid;
            self.cluster_mut(dest)?.members.push(m);
        }
        Ok(())
    }

    /// Removes a member from a cluster roster (departure).
    pub fn remove_member(&mut self, cluster: ClusterId, pid: &Block32) -> Result<(), RegistryError> {
        let rec = self.cluster_mut(cluster)?;
        let pos = rec.members.iter().position(|m| m.pid == *pid).ok_or(RegistryError::UnknownPid)?;
        rec.members.remove(pos);
        Ok(())
    }

    /// Installs a new cluster session key after a rekey.
    pub fn record_key(&mut self, cluster: ClusterId, key: Block32) -> Result<(), RegistryError> {
        self.cluster_mut(cluster)?.key = key;
        Ok(())
    }

    /// Current view of the cluster head's credential, including the roster.
    pub fn ch_credential(&self, cluster: ClusterId) -> Result<ChCredential, RegistryError> {
        let rec = self.cluster(cluster)?;
        Ok(ChCredential {
            cluster,
            pid: rec.ch_pid,
            key: rec.key,
            cjt: rec.cjt,
            h_cjt: rec.h_cjt,
            sk: rec.ch_sk.clone(),
            pk: rec.ch_pk.clone(),
            r: rec.ch_r.clone(),
            ct: self.stations[cluster.gbs as usize].ct,
            members: rec.members.clone(),
        })
    }

    pub fn cluster_key(&self, cluster: ClusterId) -> Result<Block32, RegistryError> {
        Ok(self.cluster(cluster)?.key)
    }

    pub fn cluster_ids(&self) -> Vec<ClusterId> {
        self.stations.iter().flat_map(|s| s.cluster_ids()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    #[test]
    fn forced_station_key_tiny() {
        let gp = GroupParams::tiny();
        let (pp, st) = setup_with_keys(&gp, vec![gp.scalar(3u32)], &mut rng(1)).unwrap();
        assert_eq!(st[0].pk().value(), &BigUint::from(8u32));
        assert_eq!(pp.gbs_pubs, vec![st[0].pk().clone()]);
        assert_eq!(pp.hash_suite, HASH_SUITE);
    }

    #[test]
    fn stations_share_ct() {
        let (_, st) = setup_system(&GroupParams::tiny(), 3, &mut rng(2)).unwrap();
        assert!(st.iter().all(|s| s.ct() == st[0].ct()));
        assert!(matches!(setup_system(&GroupParams::tiny(), 0, &mut rng(2)), Err(RegistryError::NoStations)));
    }

    #[test]
    fn ch_issuance_identity_and_uniqueness() {
        let gp = GroupParams::full();
        let mut r = rng(3);
        let mut net = GbsNetwork::setup(&gp, 2, &mut r).unwrap();
        let a = net.register_ch(0, b"ch-a", &mut r).unwrap();
        let b = net.register_ch(0, b"ch-b", &mut r).unwrap();
        for ch in [&a, &b] {
            let lhs = gp.exp_g(&ch.sk);
            let rhs = gp.mul(&gp.mod_exp(net.stations()[0].pk(), &gp.reduce_block(&ch.h_cjt)), &ch.pk);
            assert_eq!(lhs, rhs);
            assert_eq!(ch.pid, derive_pid(&ch.sk, &ch.r));
            assert_eq!(ch.pk, gp.exp_g(&ch.r));
        }
        assert_ne!(a.cjt, b.cjt);
        assert_ne!(a.key, b.key);
        assert_ne!(a.pid, b.pid);
        assert_ne!(a.cluster, b.cluster);
        assert_eq!(net.register_ch(0, b"ch-a", &mut r).unwrap_err(), RegistryError::DuplicateRegistration);
        for s in net.stations() {
            assert!(s.db().contains(&a.pid) && s.db().contains(&b.pid));
        }
    }

    #[test]
    fn cm_registration() {
        let gp = GroupParams::tiny();
        let mut r = rng(4);
        let mut net = GbsNetwork::setup(&gp, 2, &mut r).unwrap();
        let ch = net.register_ch(1, b"ch", &mut r).unwrap();
        let cm = net.register_cm(ch.cluster, b"cm", &mut r).unwrap();
        assert_eq!(cm.key, ch.key);
        assert_eq!(gp.exp_g(&cm.sk), cm.pk);
        let view = net.ch_credential(ch.cluster).unwrap();
        assert_eq!(view.members, vec![cm.member_keys()]);
        let bad = ClusterId { gbs: 1, index: 9 };
        assert_eq!(net.register_cm(bad, b"x", &mut r).unwrap_err(), RegistryError::UnknownCluster(bad));
        assert_eq!(net.register_cm(ch.cluster, b"cm", &mut r).unwrap_err(), RegistryError::DuplicateRegistration);
        assert!(net.stations()[0].db().contains(&cm.pid));
    }

    #[test]
    fn nuav_provisioning_and_admission() {
        let gp = GroupParams::tiny();
        let mut r = rng(5);
        let mut net = GbsNetwork::setup(&gp, 1, &mut r).unwrap();
        let ch = net.register_ch(0, b"ch", &mut r).unwrap();
        let n1 = net.provision_nuav(ch.cluster, &mut r).unwrap();
        let n2 = net.provision_nuav(ch.cluster, &mut r).unwrap();
        assert_eq!(n1.h_cjt, hash_to_block(tags::CJT, &[&ch.cjt.0]));
        assert_eq!(n1.h_cjt, n2.h_cjt);
        assert_ne!(n1.pid, n2.pid);
        assert_eq!((n1.ch_pk.clone(), n1.ch_pid), (ch.pk.clone(), ch.pid));
        assert!(!net.stations()[0].db().contains(&n1.pid));
        net.admit_nuavs(ch.cluster, &[n1.pid]).unwrap();
        assert!(net.stations()[0].db().contains(&n1.pid));
        assert_eq!(net.ch_credential(ch.cluster).unwrap().members, vec![n1.member_keys()]);
    }

    #[test]
    fn db_set_semantics() {
        let mut db = PidDb::default();
        let c = ClusterId { gbs: 0, index: 0 };
        let p = Block32([7; 32]);
        assert!(db.lookup(&p).is_none());
        db.insert(p, Role::Cm, c).unwrap();
        assert!(db.contains(&p));
        assert_eq!(db.insert(p, Role::Cm, c), Err(RegistryError::DuplicateInsert));
        db.supersede(&p).unwrap();
        assert!(!db.contains(&p));
        assert!(db.record(&p).unwrap().superseded);
        assert_eq!(db.dump(), format!("{},cm,0.0,superseded\n", p.to_hex()));
    }

    #[test]
    fn transfer_moves_roster_entry() {
        let gp = GroupParams::tiny();
        let mut r = rng(6);
        let mut net = GbsNetwork::setup(&gp, 2, &mut r).unwrap();
        let a = net.register_ch(0, b"a", &mut r).unwrap();
        let b = net.register_ch(1, b"b", &mut r).unwrap();
        let cm = net.register_cm(a.cluster, b"cm", &mut r).unwrap();
        let new_pid = Block32([9; 32]);
        net.record_transfer(&cm.pid, new_pid, b.cluster).unwrap();
        for s in net.stations() {
            assert!(!s.db().contains(&cm.pid));
            assert_eq!(s.db().lookup(&new_pid).unwrap().cluster, b.cluster);
        }
        assert!(net.ch_credential(a.cluster).unwrap().members.is_empty());
        assert_eq!(net.ch_credential(b.cluster).unwrap().members[0].pid, new_pid);
    }

    #[test]
    fn registration_costs() {
        let gp = GroupParams::full();
        let mut r = rng(7);
        let (mut net, c) = opcount::measure(|| GbsNetwork::setup(&gp, 2, &mut r).unwrap());
        assert_eq!((c.t_me, c.t_hf), (2, 0));
        let (ch, c) = opcount::measure(|| net.register_ch(0, b"ch", &mut r).unwrap());
        assert_eq!((c.t_hf, c.t_me, c.t_mm), (2, 1, 0));
        let (_, c) = opcount::measure(|| net.register_cm(ch.cluster, b"cm", &mut r).unwrap());
        assert_eq!((c.t_hf, c.t_me, c.t_mm), (1, 1, 0));
    }
}
