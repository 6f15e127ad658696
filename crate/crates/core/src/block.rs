//! 32-byte XOR-domain values and millisecond timestamps.

use std::fmt;

use rand::RngCore;

use crate::opcount::{self, Op};

/// A fixed 32-byte string: digests, tokens, session keys, PIDs and masked
/// scalars all live here.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Block32(pub [u8; 32]);

impl Block32 {
    pub const ZERO: Block32 = Block32([0u8; 32]);

    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut b = [0u8; 32];
        rng.fill_bytes(&mut b);
        Block32(b)
    }

    pub fn from_slice(bytes: &[u8]) -> Option<Self> {
        <[u8; 32]>::try_from(bytes).ok().map(Block32)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let v = hex::decode(s).ok()?;
        Self::from_slice(&v)
    }

    /// Flips bit `i` (0 = most significant bit of byte 0).
    pub fn flip_bit(&mut self, i: usize) {
        self.0[i / 8] ^= 0x80 >> (i % 8);
    }
}

impl fmt::Debug for Block32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Block32({}..)", &self.to_hex()[..12])
    }
}

impl fmt::Display for Block32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Bytewise XOR. Counted as one `T_XOR`.
pub fn xor32(a: &Block32, b: &Block32) -> Block32 {
    opcount::record(Op::Xor);
    let mut out = [0u8; 32];
    for (o, (x, y)) in out.iter_mut().zip(a.0.iter().zip(b.0.iter())) {
        *o = x ^ y;
    }
    Block32(out)
}

/// Simulation-time timestamp in milliseconds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub fn to_be_bytes(self) -> [u8; 8] {
        self.0.to_be_bytes()
    }

    /// Left-zero-padded to 32 bytes for XOR contexts.
    pub fn to_block(self) -> Block32 {
        let mut b = [0u8; 32];
        b[24..].copy_from_slice(&self.0.to_be_bytes());
        Block32(b)
    }

    pub fn abs_diff(self, other: Timestamp) -> u64 {
        self.0.abs_diff(other.0)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ms", self.0)
    }
}
