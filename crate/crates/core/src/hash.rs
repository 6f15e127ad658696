//! Domain-separated SHA-256.
//!
//! Input framing: `len(tag) ‖ tag ‖ len(part_1) ‖ part_1 ‖ …` with 4-byte
//! big-endian lengths, so moving a boundary between parts changes the
//! digest.

use num_bigint::BigUint;
use sha2::{Digest, Sha256};

use crate::block::Block32;
use crate::group::{encode_scalar32, GroupElem, GroupParams, Scalar};
use crate::opcount::{self, Op};

/// Call-site labels. Each tag gives an independent function.
pub mod tags {
    pub const PID: &str = "pid";
    pub const CJT: &str = "cjt";
    pub const MASK: &str = "mask";
    pub const JOIN_W: &str = "join/w";
    pub const JOIN_AGG: &str = "join/agg";
    pub const JOIN_PAD: &str = "join/pad";
    pub const JOIN_K: &str = "join/k";
    pub const JOIN_RESULT: &str = "join/result";
    pub const JOIN_FALLBACK: &str = "join/fallback";
    pub const JOIN_RESULT_SCALAR: &str = "join/h-result";
    pub const JOIN_Q: &str = "join/q";
    pub const JOIN_ACK: &str = "join/ack";
    pub const JOIN_RES: &str = "join/res";
    pub const XFER_CHECK: &str = "xfer/check";
    pub const XFER_NEW_PID: &str = "xfer/new-pid";
    pub const KU_ABSCISSA: &str = "ku/abscissa";
    pub const KU_MASK: &str = "ku/mask";
    pub const KU_CONFIRM: &str = "ku/confirm";
}

/// One `T_HF`.
pub fn hash_to_block(tag: &str, parts: &[&[u8]]) -> Block32 {
    opcount::record(Op::Hash);
    let mut h = Sha256::new();
    h.update((tag.len() as u32).to_be_bytes());
    h.update(tag.as_bytes());
    for p in parts {
        h.update((p.len() as u32).to_be_bytes());
        h.update(p);
    }
    let mut out = [0u8; 32];
    out.copy_from_slice(&h.finalize());
    Block32(out)
}

/// `hash_to_block` reduced mod q. One `T_HF`.
pub fn hash_to_scalar(gp: &GroupParams, tag: &str, parts: &[&[u8]]) -> Scalar {
    gp.reduce_block(&hash_to_block(tag, parts))
}

/// `1 + (H(...) mod (q − 1))`, for exponents that must not vanish. One
/// `T_HF`.
pub fn hash_to_nonzero_scalar(gp: &GroupParams, tag: &str, parts: &[&[u8]]) -> Scalar {
    let h = BigUint::from_bytes_be(&hash_to_block(tag, parts).0);
    gp.scalar(h % (gp.q() - 1u32) + 1u32)
}

/// Canonical 32-byte mask of a group element. One `T_HF`.
pub fn mask_elem(gp: &GroupParams, x: &GroupElem) -> Block32 {
    hash_to_block(tags::MASK, &[&gp.encode_elem(x)])
}

/// Convenience for hashing a scalar in its 32-byte form.
pub fn scalar_bytes(x: &Scalar) -> [u8; 32] {
    encode_scalar32(x).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn deterministic_and_tag_separated() {
        let a = hash_to_block("t", &[b"x"]);
        assert_eq!(a, hash_to_block("t", &[b"x"]));
        assert_ne!(a, hash_to_block("u", &[b"x"]));
    }

    #[test]
    fn boundary_moves_change_digest() {
        assert_ne!(hash_to_block("t", &[b"a", b"b"]), hash_to_block("t", &[b"ab"]));
        assert_ne!(hash_to_block("t", &[b"ab", b""]), hash_to_block("t", &[b"a", b"b"]));
        assert_ne!(hash_to_block("ta", &[b"b"]), hash_to_block("t", &[b"ab"]));
    }

    #[test]
    fn framing_matches_manual_sha256() {
        let mut buf = Vec::new();
        buf.extend_from_slice(&3u32.to_be_bytes());
        buf.extend_from_slice(b"tag");
        buf.extend_from_slice(&2u32.to_be_bytes());
        buf.extend_from_slice(b"hi");
        let want: [u8; 32] = Sha256::digest(&buf).into();
        assert_eq!(hash_to_block("tag", &[b"hi"]).0, want);
    }

    #[test]
    fn no_collisions_in_ten_thousand() {
        let mut seen = HashSet::new();
        for i in 0u32..10_000 {
            assert!(seen.insert(hash_to_block("mc", &[&i.to_le_bytes()])));
        }
    }

    #[test]
    fn scalar_hash_covers_all_residues_mod_11() {
        let gp = GroupParams::tiny();
        let mut freq = [0u32; 11];
        for i in 0u32..10_000 {
            let s = hash_to_scalar(&gp, "freq", &[&i.to_be_bytes()]);
            let v = s.value().to_u32_digits().first().copied().unwrap_or(0);
            assert!(v < 11);
            freq[v as usize] += 1;
        }
        // Expected 909 per bucket; a 6σ band is roughly ±170.
        for f in freq {
            assert!((740..1080).contains(&f), "{freq:?}");
        }
    }

    #[test]
    fn masks_of_distinct_elements_differ() {
        let gp = GroupParams::full();
        let mut seen = HashSet::new();
        let mut x = gp.generator();
        let g = gp.generator();
        for _ in 0..10_000 {
            assert!(seen.insert(mask_elem(&gp, &x)));
            x = gp.mul(&x, &g);
        }
        assert_eq!(mask_elem(&gp, &gp.identity()), mask_elem(&gp, &gp.identity()));
    }

    #[test]
    fn hash_variants_count_once() {
        let gp = GroupParams::tiny();
        let (_, c) = opcount::measure(|| {
            hash_to_block("a", &[]);
            hash_to_scalar(&gp, "b", &[]);
            mask_elem(&gp, &gp.generator());
        });
        assert_eq!(c.t_hf, 3);
        assert_eq!(c.t_me + c.t_mm + c.t_xor, 0);
    }

    #[test]
    fn nonzero_scalar_covers_one_to_q_minus_one() {
        let gp = GroupParams::tiny();
        let seen: HashSet<_> = (0u32..500)
            .map(|i| hash_to_nonzero_scalar(&gp, "t", &[&i.to_be_bytes()]))
            .map(|s| s.value().iter_u64_digits().next().unwrap_or(0))
            .collect();
        assert_eq!(seen, (1..11).collect());
    }
}
