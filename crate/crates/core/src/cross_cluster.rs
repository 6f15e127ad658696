//! Token-based transfer of an existing UAV between clusters.
//!
//! The source CH sends `C = H(PID, T3, CT) ⊕ CT`; the destination CH checks
//! it with the swarm-wide token, confirms the PID with its ground station
//! and issues a fresh pseudonym.
//!
//! In [`Mode::PaperLiteral`] the new pseudonym equals the check hash itself,
//! so `C ⊕ PID_new = CT` for anyone who later sees the new PID on the air.
//! Hardened mode derives the pseudonym under a separate hash label.

use crate::block::{xor32, Block32, Timestamp};
use crate::error::{Mode, ProtocolConfig, ProtocolError};
use crate::hash::{hash_to_block, tags};
use crate::registry::{ChCredential, GbsNetwork};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferRequest {
    pub c: Block32,
    pub euav_pid: Block32,
    pub t3: Timestamp,
}

fn check_hash(pid: &Block32, t3: Timestamp, ct: &Block32) -> Block32 {
    hash_to_block(tags::XFER_CHECK, &[&pid.0, &t3.to_be_bytes(), &ct.0])
}

/// The pseudonym the destination will assign. Lets the source side (and the
/// transferred UAV) learn it without a further message.
pub fn expected_new_pid(pid: &Block32, t3: Timestamp, ct: &Block32, mode: Mode) -> Block32 {
    match mode {
        Mode::Hardened => hash_to_block(tags::XFER_NEW_PID, &[&pid.0, &t3.to_be_bytes(), &ct.0]),
        Mode::PaperLiteral => check_hash(pid, t3, ct),
    }
}

/// Source CH side. The UAV must be on the CH's roster.
pub fn source_ch_build_transfer(
    ch: &ChCredential,
    euav_pid: &Block32,
    t3: Timestamp,
) -> Result<TransferRequest, ProtocolError> {
    if !ch.members.iter().any(|m| m.pid == *euav_pid) {
        return Err(ProtocolError::UnknownMember);
    }
    let c = xor32(&check_hash(euav_pid, t3, &ch.ct), &ch.ct);
    Ok(TransferRequest { c, euav_pid: *euav_pid, t3 })
}

/// Destination CH side. On success the ground stations hold the new PID and
/// mark the old one superseded.
pub fn dest_ch_verify_transfer(
    ch: &ChCredential,
    net: &mut GbsNetwork,
    req: &TransferRequest,
    now: Timestamp,
    cfg: &ProtocolConfig,
) -> Result<Block32, ProtocolError> {
    cfg.check_fresh(req.t3, now)?;
    if check_hash(&req.euav_pid, req.t3, &ch.ct) != xor32(&req.c, &ch.ct) {
        return Err(ProtocolError::TokenMismatch);
    }
    if net.db_lookup(ch.cluster.gbs as usize, &req.euav_pid)?.is_none() {
        return Err(ProtocolError::UnknownPid);
    }
    let new_pid = expected_new_pid(&req.euav_pid, req.t3, &ch.ct, cfg.mode);
    net.record_transfer(&req.euav_pid, new_pid, ch.cluster)?;
    Ok(new_pid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupParams;
    use crate::opcount::{self, OpCounts};
    use crate::registry::CmCredential;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn setup(seed: u64) -> (GbsNetwork, ChCredential, ChCredential, Vec<CmCredential>, ChaCha20Rng) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let gp = GroupParams::tiny();
        let mut net = GbsNetwork::setup(&gp, 2, &mut rng).unwrap();
        let a = net.register_ch(0, b"a", &mut rng).unwrap();
        let b = net.register_ch(1, b"b", &mut rng).unwrap();
        let cms = (0..3).map(|i| net.register_cm(a.cluster, &[i], &mut rng).unwrap()).collect();
        let a = net.ch_credential(a.cluster).unwrap();
        (net, a, b, cms, rng)
    }

    #[test]
    fn honest_transfer_both_sides_agree() {
        for cfg in [ProtocolConfig::default(), ProtocolConfig::literal()] {
            let (mut net, a, b, cms, _) = setup(1);
            let req = source_ch_build_transfer(&a, &cms[1].pid, Timestamp(50)).unwrap();
            let new_pid = dest_ch_verify_transfer(&b, &mut net, &req, Timestamp(60), &cfg).unwrap();
            assert_eq!(new_pid, expected_new_pid(&cms[1].pid, Timestamp(50), &a.ct, cfg.mode));
            for s in net.stations() {
                assert!(s.db().contains(&new_pid));
                assert!(!s.db().contains(&cms[1].pid));
                assert!(s.db().record(&cms[1].pid).unwrap().superseded);
            }
            assert!(net.ch_credential(b.cluster).unwrap().members.iter().any(|m| m.pid == new_pid));
        }
    }

    #[test]
    fn distinct_timestamps_give_distinct_tokens() {
        let (_, a, _, cms, _) = setup(2);
        let x = source_ch_build_transfer(&a, &cms[0].pid, Timestamp(1)).unwrap();
        let y = source_ch_build_transfer(&a, &cms[0].pid, Timestamp(2)).unwrap();
        assert_ne!(x.c, y.c);
    }

    #[test]
    fn rejections() {
        let cfg = ProtocolConfig::default();
        let (mut net, a, b, cms, mut rng) = setup(3);
        assert_eq!(
            source_ch_build_transfer(&a, &Block32([5; 32]), Timestamp(0)).unwrap_err(),
            ProtocolError::UnknownMember
        );
        let req = source_ch_build_transfer(&a, &cms[0].pid, Timestamp(0)).unwrap();
        assert_eq!(
            dest_ch_verify_transfer(&b, &mut net, &req, Timestamp(101), &cfg).unwrap_err(),
            ProtocolError::StaleTimestamp
        );
        for _ in 0..10_000 {
            let forged = TransferRequest { c: Block32::random(&mut rng), ..req.clone() };
            assert_eq!(
                dest_ch_verify_transfer(&b, &mut net, &forged, Timestamp(0), &cfg).unwrap_err(),
                ProtocolError::TokenMismatch
            );
        }
        // A correct token for a PID the stations never stored.
        let ghost = Block32([6; 32]);
        let mut a2 = a.clone();
        a2.members.push(crate::registry::MemberKeys { pid: ghost, ..a.members[0].clone() });
        let req = source_ch_build_transfer(&a2, &ghost, Timestamp(0)).unwrap();
        assert_eq!(
            dest_ch_verify_transfer(&b, &mut net, &req, Timestamp(0), &cfg).unwrap_err(),
            ProtocolError::UnknownPid
        );
    }

    #[test]
    fn transfer_costs_three_hashes_two_xors() {
        for cfg in [ProtocolConfig::default(), ProtocolConfig::literal()] {
            let (mut net, a, b, cms, _) = setup(4);
            let ((), one) = opcount::measure(|| {
                let req = source_ch_build_transfer(&a, &cms[0].pid, Timestamp(0)).unwrap();
                dest_ch_verify_transfer(&b, &mut net, &req, Timestamp(0), &cfg).unwrap();
            });
            assert_eq!(one, OpCounts::new(3, 0, 0, 2, 0));
            let ((), two) = opcount::measure(|| {
                for cm in &cms[1..] {
                    let req = source_ch_build_transfer(&a, &cm.pid, Timestamp(0)).unwrap();
                    dest_ch_verify_transfer(&b, &mut net, &req, Timestamp(0), &cfg).unwrap();
                }
            });
            assert_eq!(two, one * 2);
        }
    }
}
