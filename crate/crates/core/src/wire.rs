//! Byte-exact message encoding.
//!
//! Layout: one tag byte, then fields in declaration order. Group elements
//! are fixed-width big-endian (`GroupParams::elem_len` bytes), blocks and
//! scalars are 32 raw bytes, timestamps 8 bytes big-endian, and lists carry
//! a 2-byte big-endian count. Decoding rejects trailing bytes, out-of-range
//! scalars and elements outside the order-q subgroup.

use num_bigint::BigUint;

use crate::block::{Block32, Timestamp};
use crate::cross_cluster::TransferRequest;
use crate::group::{decode_scalar32, encode_scalar32, GroupElem, GroupError, GroupParams, Scalar};
use crate::join::{AggregateChallenge, CmResponse, JoinRequest, NuavConfirm, PeerAck, PeerBroadcast};
use crate::key_update::{KeyUpdateInit, ShareEnvelope};
use crate::registry::PublicParams;

pub mod tag {
    pub const JOIN_REQUEST: u8 = 0x01;
    pub const AGGREGATE_CHALLENGE: u8 = 0x02;
    pub const CM_RESPONSE: u8 = 0x03;
    pub const PEER_BROADCAST: u8 = 0x04;
    pub const PEER_ACK: u8 = 0x05;
    pub const PEER_ACK_BOUND: u8 = 0x06;
    pub const NUAV_CONFIRM: u8 = 0x07;
    pub const TRANSFER_REQUEST: u8 = 0x08;
    pub const KEY_UPDATE_INIT: u8 = 0x09;
    pub const SHARE_ENVELOPE: u8 = 0x0a;
    pub const PUBLIC_PARAMS: u8 = 0x10;
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WireError {
    #[error("message truncated")]
    Truncated,
    #[error("{0} trailing bytes")]
    TrailingBytes(usize),
    #[error("unexpected tag 0x{found:02x}")]
    BadTag { found: u8 },
    #[error("bad field: {0}")]
    BadField(#[from] GroupError),
    #[error("invalid text field")]
    BadText,
    #[error("list longer than 65535 entries")]
    ListTooLong,
}

pub struct Writer<'a> {
    gp: &'a GroupParams,
    buf: Vec<u8>,
}

impl<'a> Writer<'a> {
    pub fn new(gp: &'a GroupParams, tag: u8) -> Self {
        Writer { gp, buf: vec![tag] }
    }
    pub fn block(&mut self, b: &Block32) -> &mut Self {
        self.buf.extend_from_slice(&b.0);
        self
    }
    pub fn elem(&mut self, e: &GroupElem) -> &mut Self {
        let enc = self.gp.encode_elem(e);
        self.buf.extend_from_slice(&enc);
        self
    }
    pub fn scalar(&mut self, s: &Scalar) -> &mut Self {
        self.block(&encode_scalar32(s))
    }
    pub fn ts(&mut self, t: Timestamp) -> &mut Self {
        self.buf.extend_from_slice(&t.to_be_bytes());
        self
    }
    pub fn u16(&mut self, v: u16) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }
    pub fn count(&mut self, n: usize) -> Result<&mut Self, WireError> {
        let n = u16::try_from(n).map_err(|_| WireError::ListTooLong)?;
        Ok(self.u16(n))
    }
    pub fn bytes16(&mut self, b: &[u8]) -> Result<&mut Self, WireError> {
        self.count(b.len())?;
        self.buf.extend_from_slice(b);
        Ok(self)
    }
    pub fn finish(&mut self) -> Vec<u8> {
        std::mem::take(&mut self.buf)
    }
}

pub struct Reader<'a> {
    gp: &'a GroupParams,
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    /// Checks the tag and positions after it. Returns the tag found.
    pub fn new(gp: &'a GroupParams, buf: &'a [u8], accept: &[u8]) -> Result<(Self, u8), WireError> {
        let &t = buf.first().ok_or(WireError::Truncated)?;
        if !accept.contains(&t) {
            return Err(WireError::BadTag { found: t });
        }
        Ok((Reader { gp, buf, pos: 1 }, t))
    }
    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        let end = self.pos.checked_add(n).ok_or(WireError::Truncated)?;
        let s = self.buf.get(self.pos..end).ok_or(WireError::Truncated)?;
        self.pos = end;
        Ok(s)
    }
    pub fn block(&mut self) -> Result<Block32, WireError> {
        Ok(Block32::from_slice(self.take(32)?).expect("32 bytes"))
    }
    pub fn elem(&mut self) -> Result<GroupElem, WireError> {
        let n = self.gp.elem_len();
        Ok(self.gp.decode_elem(self.take(n)?)?)
    }
    pub fn scalar(&mut self) -> Result<Scalar, WireError> {
        let b = self.block()?;
        Ok(decode_scalar32(self.gp, &b)?)
    }
    pub fn ts(&mut self) -> Result<Timestamp, WireError> {
        let b = self.take(8)?;
        Ok(Timestamp(u64::from_be_bytes(b.try_into().expect("8 bytes"))))
    }
    pub fn u16(&mut self) -> Result<u16, WireError> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }
    pub fn bytes16(&mut self) -> Result<&'a [u8], WireError> {
        let n = self.u16()? as usize;
        self.take(n)
    }
    pub fn finish(self) -> Result<(), WireError> {
        match self.buf.len() - self.pos {
            0 => Ok(()),
            n => Err(WireError::TrailingBytes(n)),
        }
    }
}

/// A message with a canonical byte form.
pub trait Wire: Sized {
    fn encode(&self, gp: &GroupParams) -> Vec<u8>;
    fn decode(gp: &GroupParams, bytes: &[u8]) -> Result<Self, WireError>;
}

impl Wire for JoinRequest {
    fn encode(&self, gp: &GroupParams) -> Vec<u8> {
        Writer::new(gp, tag::JOIN_REQUEST)
            .block(&self.nuav_pid)
            .elem(&self.nuav_pk)
            .block(&self.ch_pid)
            .elem(&self.v)
            .elem(&self.sig)
            .finish()
    }
    fn decode(gp: &GroupParams, bytes: &[u8]) -> Result<Self, WireError> {
        let (mut r, _) = Reader::new(gp, bytes, &[tag::JOIN_REQUEST])?;
        let m = JoinRequest { nuav_pid: r.block()?, nuav_pk: r.elem()?, ch_pid: r.block()?, v: r.elem()?, sig: r.elem()? };
        r.finish()?;
        Ok(m)
    }
}

impl Wire for AggregateChallenge {
    fn encode(&self, gp: &GroupParams) -> Vec<u8> {
        Writer::new(gp, tag::AGGREGATE_CHALLENGE)
            .block(&self.ch_pid)
            .ts(self.t1)
            .block(&self.sig_nuavs)
            .elem(&self.c_nuavs)
            .block(&self.share)
            .scalar(&self.m_total)
            .block(&self.k_tag)
            .finish()
    }
    fn decode(gp: &GroupParams, bytes: &[u8]) -> Result<Self, WireError> {
        let (mut r, _) = Reader::new(gp, bytes, &[tag::AGGREGATE_CHALLENGE])?;
        let m = AggregateChallenge {
            ch_pid: r.block()?,
            t1: r.ts()?,
            sig_nuavs: r.block()?,
            c_nuavs: r.elem()?,
            share: r.block()?,
            m_total: r.scalar()?,
            k_tag: r.block()?,
        };
        r.finish()?;
        Ok(m)
    }
}

impl Wire for CmResponse {
    fn encode(&self, gp: &GroupParams) -> Vec<u8> {
        Writer::new(gp, tag::CM_RESPONSE).ts(self.t1).elem(&self.sig_cm).block(&self.c_cm).finish()
    }
    fn decode(gp: &GroupParams, bytes: &[u8]) -> Result<Self, WireError> {
        let (mut r, _) = Reader::new(gp, bytes, &[tag::CM_RESPONSE])?;
        let m = CmResponse { t1: r.ts()?, sig_cm: r.elem()?, c_cm: r.block()? };
        r.finish()?;
        Ok(m)
    }
}

impl Wire for PeerBroadcast {
    fn encode(&self, gp: &GroupParams) -> Vec<u8> {
        Writer::new(gp, tag::PEER_BROADCAST)
            .elem(&self.sig_cms)
            .elem(&self.pk_cms)
            .block(&self.c_ch)
            .block(&self.q_ch)
            .ts(self.t2)
            .finish()
    }
    fn decode(gp: &GroupParams, bytes: &[u8]) -> Result<Self, WireError> {
        let (mut r, _) = Reader::new(gp, bytes, &[tag::PEER_BROADCAST])?;
        let m = PeerBroadcast { sig_cms: r.elem()?, pk_cms: r.elem()?, c_ch: r.block()?, q_ch: r.block()?, t2: r.ts()? };
        r.finish()?;
        Ok(m)
    }
}

impl Wire for PeerAck {
    fn encode(&self, gp: &GroupParams) -> Vec<u8> {
        match &self.responder_pid {
            None => Writer::new(gp, tag::PEER_ACK).block(&self.q_ack).ts(self.t2).finish(),
            Some(pid) => Writer::new(gp, tag::PEER_ACK_BOUND).block(&self.q_ack).ts(self.t2).block(pid).finish(),
        }
    }
    fn decode(gp: &GroupParams, bytes: &[u8]) -> Result<Self, WireError> {
        let (mut r, t) = Reader::new(gp, bytes, &[tag::PEER_ACK, tag::PEER_ACK_BOUND])?;
        let q_ack = r.block()?;
        let t2 = r.ts()?;
        let responder_pid = if t == tag::PEER_ACK_BOUND { Some(r.block()?) } else { None };
        r.finish()?;
        Ok(PeerAck { q_ack, t2, responder_pid })
    }
}

impl Wire for NuavConfirm {
    fn encode(&self, gp: &GroupParams) -> Vec<u8> {
        Writer::new(gp, tag::NUAV_CONFIRM).block(&self.res).elem(&self.ch_pk).finish()
    }
    fn decode(gp: &GroupParams, bytes: &[u8]) -> Result<Self, WireError> {
        let (mut r, _) = Reader::new(gp, bytes, &[tag::NUAV_CONFIRM])?;
        let m = NuavConfirm { res: r.block()?, ch_pk: r.elem()? };
        r.finish()?;
        Ok(m)
    }
}

impl Wire for TransferRequest {
    fn encode(&self, gp: &GroupParams) -> Vec<u8> {
        Writer::new(gp, tag::TRANSFER_REQUEST).block(&self.c).block(&self.euav_pid).ts(self.t3).finish()
    }
    fn decode(gp: &GroupParams, bytes: &[u8]) -> Result<Self, WireError> {
        let (mut r, _) = Reader::new(gp, bytes, &[tag::TRANSFER_REQUEST])?;
        let m = TransferRequest { c: r.block()?, euav_pid: r.block()?, t3: r.ts()? };
        r.finish()?;
        Ok(m)
    }
}

impl Wire for KeyUpdateInit {
    fn encode(&self, gp: &GroupParams) -> Vec<u8> {
        let mut w = Writer::new(gp, tag::KEY_UPDATE_INIT);
        w.ts(self.t4).block(&self.f_masked);
        w.count(self.peer_commitments.len()).expect("roster fits in u16");
        for (i, c) in &self.peer_commitments {
            w.u16(*i).elem(c);
        }
        w.block(&self.confirm).finish()
    }
    fn decode(gp: &GroupParams, bytes: &[u8]) -> Result<Self, WireError> {
        let (mut r, _) = Reader::new(gp, bytes, &[tag::KEY_UPDATE_INIT])?;
        let t4 = r.ts()?;
        let f_masked = r.block()?;
        let n = r.u16()?;
        let mut peer_commitments = Vec::with_capacity(n as usize);
        for _ in 0..n {
            peer_commitments.push((r.u16()?, r.elem()?));
        }
        let confirm = r.block()?;
        r.finish()?;
        Ok(KeyUpdateInit { t4, f_masked, peer_commitments, confirm })
    }
}

impl Wire for ShareEnvelope {
    fn encode(&self, gp: &GroupParams) -> Vec<u8> {
        let mut w = Writer::new(gp, tag::SHARE_ENVELOPE);
        w.u16(self.sender);
        w.count(self.entries.len()).expect("roster fits in u16");
        for (i, u) in &self.entries {
            w.u16(*i).block(u);
        }
        w.finish()
    }
    fn decode(gp: &GroupParams, bytes: &[u8]) -> Result<Self, WireError> {
        let (mut r, _) = Reader::new(gp, bytes, &[tag::SHARE_ENVELOPE])?;
        let sender = r.u16()?;
        let n = r.u16()?;
        let mut entries = Vec::with_capacity(n as usize);
        for _ in 0..n {
            entries.push((r.u16()?, r.block()?));
        }
        r.finish()?;
        Ok(ShareEnvelope { sender, entries })
    }
}

impl PublicParams {
    /// `p` and `q` length-prefixed, then `g` and each station key at element
    /// width, then the hash-suite label.
    pub fn encode(&self) -> Vec<u8> {
        let gp = &self.group;
        let mut w = Writer::new(gp, tag::PUBLIC_PARAMS);
        w.bytes16(&gp.p().to_bytes_be()).expect("p fits");
        w.bytes16(&gp.q().to_bytes_be()).expect("q fits");
        w.elem(&gp.generator());
        w.count(self.gbs_pubs.len()).expect("station count fits");
        for pk in &self.gbs_pubs {
            w.elem(pk);
        }
        w.bytes16(self.hash_suite.as_bytes()).expect("label fits");
        w.finish()
    }

    /// Rebuilds and validates the group, then the station keys.
    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        let placeholder = GroupParams::tiny();
        let (mut r, _) = Reader::new(&placeholder, bytes, &[tag::PUBLIC_PARAMS])?;
        let p = BigUint::from_bytes_be(r.bytes16()?);
        let q = BigUint::from_bytes_be(r.bytes16()?);
        let width = (p.bits() as usize).div_ceil(8);
        let g = BigUint::from_bytes_be(r.take(width)?);
        let full = GroupParams::full();
        let group = if *full.p() == p && *full.q() == q && *full.generator().value() == g {
            full
        } else {
            match GroupParams::new(p, q, g)? {
                t if t.kind() == crate::group::Preset::Tiny => GroupParams::tiny(),
                other => other,
            }
        };
        let mut r = Reader { gp: &group, buf: r.buf, pos: r.pos };
        let n = r.u16()?;
        let mut gbs_pubs = Vec::with_capacity(n as usize);
        for _ in 0..n {
            gbs_pubs.push(r.elem()?);
        }
        let hash_suite = String::from_utf8(r.bytes16()?.to_vec()).map_err(|_| WireError::BadText)?;
        r.finish()?;
        Ok(PublicParams { group, gbs_pubs, hash_suite })
    }
}

/// Encoded sizes in bytes as functions of the element width `e`.
pub mod sizes {
    pub fn join_request(e: usize) -> usize {
        1 + 32 + e + 32 + e + e
    }
    pub fn aggregate_challenge(e: usize) -> usize {
        1 + 32 + 8 + 32 + e + 32 + 32 + 32
    }
    pub fn cm_response(e: usize) -> usize {
        1 + 8 + e + 32
    }
    pub fn peer_broadcast(e: usize) -> usize {
        1 + e + e + 32 + 32 + 8
    }
    pub fn peer_ack(bound: bool) -> usize {
        1 + 32 + 8 + if bound { 32 } else { 0 }
    }
    pub fn nuav_confirm(e: usize) -> usize {
        1 + 32 + e
    }
    pub fn transfer_request() -> usize {
        1 + 32 + 32 + 8
    }
    /// `peers` = number of other roster members.
    pub fn key_update_init(e: usize, peers: usize) -> usize {
        1 + 8 + 32 + 2 + peers * (2 + e) + 32
    }
    pub fn share_envelope(peers: usize) -> usize {
        1 + 2 + 2 + peers * (2 + 32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::join::nuav_build_request;
    use crate::registry::GbsNetwork;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn sample(gp: &GroupParams, seed: u64) -> Vec<(Vec<u8>, usize)> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let e = gp.elem_len();
        let el = |rng: &mut ChaCha20Rng| gp.random_element(rng);
        let bl = |rng: &mut ChaCha20Rng| Block32::random(rng);
        let mut out = Vec::new();
        let jr = JoinRequest { nuav_pid: bl(&mut rng), nuav_pk: el(&mut rng), ch_pid: bl(&mut rng), v: el(&mut rng), sig: el(&mut rng) };
        out.push((jr.encode(gp), sizes::join_request(e)));
        let ac = AggregateChallenge {
            ch_pid: bl(&mut rng),
            t1: Timestamp(7),
            sig_nuavs: bl(&mut rng),
            c_nuavs: el(&mut rng),
            share: bl(&mut rng),
            m_total: gp.random_scalar(&mut rng),
            k_tag: bl(&mut rng),
        };
        out.push((ac.encode(gp), sizes::aggregate_challenge(e)));
        let cr = CmResponse { t1: Timestamp(9), sig_cm: el(&mut rng), c_cm: bl(&mut rng) };
        out.push((cr.encode(gp), sizes::cm_response(e)));
        let pb = PeerBroadcast { sig_cms: el(&mut rng), pk_cms: el(&mut rng), c_ch: bl(&mut rng), q_ch: bl(&mut rng), t2: Timestamp(3) };
        out.push((pb.encode(gp), sizes::peer_broadcast(e)));
        let a0 = PeerAck { q_ack: bl(&mut rng), t2: Timestamp(1), responder_pid: None };
        out.push((a0.encode(gp), sizes::peer_ack(false)));
        let a1 = PeerAck { responder_pid: Some(bl(&mut rng)), ..a0 };
        out.push((a1.encode(gp), sizes::peer_ack(true)));
        let nc = NuavConfirm { res: bl(&mut rng), ch_pk: el(&mut rng) };
        out.push((nc.encode(gp), sizes::nuav_confirm(e)));
        let tr = TransferRequest { c: bl(&mut rng), euav_pid: bl(&mut rng), t3: Timestamp(5) };
        out.push((tr.encode(gp), sizes::transfer_request()));
        let ki = KeyUpdateInit {
            t4: Timestamp(11),
            f_masked: bl(&mut rng),
            peer_commitments: vec![(0, el(&mut rng)), (2, el(&mut rng))],
            confirm: bl(&mut rng),
        };
        out.push((ki.encode(gp), sizes::key_update_init(e, 2)));
        let se = ShareEnvelope { sender: 1, entries: vec![(0, bl(&mut rng)), (2, bl(&mut rng))] };
        out.push((se.encode(gp), sizes::share_envelope(2)));
        out
    }

    #[test]
    fn encoded_sizes_match_size_table() {
        for gp in [GroupParams::tiny(), GroupParams::full()] {
            for (bytes, want) in sample(&gp, 1) {
                assert_eq!(bytes.len(), want, "tag 0x{:02x}", bytes[0]);
            }
        }
        assert_eq!(sizes::join_request(256), 833);
    }

    fn roundtrip_all(gp: &GroupParams, seed: u64) {
        for (bytes, _) in sample(gp, seed) {
            let again = match bytes[0] {
                tag::JOIN_REQUEST => JoinRequest::decode(gp, &bytes).unwrap().encode(gp),
                tag::AGGREGATE_CHALLENGE => AggregateChallenge::decode(gp, &bytes).unwrap().encode(gp),
                tag::CM_RESPONSE => CmResponse::decode(gp, &bytes).unwrap().encode(gp),
                tag::PEER_BROADCAST => PeerBroadcast::decode(gp, &bytes).unwrap().encode(gp),
                tag::PEER_ACK | tag::PEER_ACK_BOUND => PeerAck::decode(gp, &bytes).unwrap().encode(gp),
                tag::NUAV_CONFIRM => NuavConfirm::decode(gp, &bytes).unwrap().encode(gp),
                tag::TRANSFER_REQUEST => TransferRequest::decode(gp, &bytes).unwrap().encode(gp),
                tag::KEY_UPDATE_INIT => KeyUpdateInit::decode(gp, &bytes).unwrap().encode(gp),
                tag::SHARE_ENVELOPE => ShareEnvelope::decode(gp, &bytes).unwrap().encode(gp),
                t => panic!("unexpected tag {t}"),
            };
            assert_eq!(again, bytes);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn every_message_roundtrips_tiny(seed in any::<u64>()) {
            roundtrip_all(&GroupParams::tiny(), seed);
        }
    }

    #[test]
    fn every_message_roundtrips_full() {
        roundtrip_all(&GroupParams::full(), 3);
    }

    #[test]
    fn decoder_rejections() {
        let gp = GroupParams::tiny();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let mut net = GbsNetwork::setup(&gp, 1, &mut rng).unwrap();
        let ch = net.register_ch(0, b"c", &mut rng).unwrap();
        let n = net.provision_nuav(ch.cluster, &mut rng).unwrap();
        let bytes = nuav_build_request(&gp, &n, &mut rng).encode(&gp);
        assert_eq!(JoinRequest::decode(&gp, &bytes[..bytes.len() - 1]), Err(WireError::Truncated));
        let mut longer = bytes.clone();
        longer.push(0);
        assert_eq!(JoinRequest::decode(&gp, &longer), Err(WireError::TrailingBytes(1)));
        assert_eq!(CmResponse::decode(&gp, &bytes), Err(WireError::BadTag { found: tag::JOIN_REQUEST }));
        let mut bad = bytes.clone();
        bad[33] = 5; // nuav_pk: 5 is not a quadratic residue mod 23
        assert_eq!(JoinRequest::decode(&gp, &bad), Err(WireError::BadField(GroupError::NotInSubgroup)));
        assert_eq!(JoinRequest::decode(&gp, &[]), Err(WireError::Truncated));
    }

    #[test]
    fn public_params_roundtrip() {
        for gp in [GroupParams::tiny(), GroupParams::full()] {
            let mut rng = ChaCha20Rng::seed_from_u64(4);
            let net = GbsNetwork::setup(&gp, 3, &mut rng).unwrap();
            let bytes = net.pp.encode();
            let back = PublicParams::decode(&bytes).unwrap();
            assert_eq!(back, net.pp);
            assert_eq!(back.group.kind(), gp.kind());
        }
    }
}
