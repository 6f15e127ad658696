//! Executable security games and Monte-Carlo suites against the cluster
//! protocols.
//!
//! None of this proves anything about an unbounded adversary. Each suite
//! runs a fixed set of strategies and reports how often they win.

pub mod dcg;
pub mod dug;
pub mod identities;
pub mod secrecy;
pub mod suite;
pub mod tamper;
pub mod unlink;

use casku::error::ProtocolError;
use casku::group::GroupError;
use casku::registry::RegistryError;

#[derive(Debug, thiserror::Error)]
pub enum AdversaryError {
    #[error("unknown query kind {0:?}")]
    UnknownQueryKind(String),
    #[error("challenge messages must differ and must not repeat an earlier challenge")]
    RepeatedChallenge,
    #[error("query needs a queryable identity and none is left")]
    NoIdentity,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// splitmix64 over `(base, stream, index)`. Every trial draws its own RNG
/// from this, so results do not depend on how trials are scheduled.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0xd1b5_4a32_d192_ed03))
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Splits `n` trials into at most `chunks` contiguous ranges.
pub(crate) fn chunk_ranges(n: usize, chunks: usize) -> Vec<std::ops::Range<usize>> {
    let chunks = chunks.clamp(1, n.max(1));
    let base = n / chunks;
    let extra = n % chunks;
    let mut out = Vec::with_capacity(chunks);
    let mut start = 0;
    for c in 0..chunks {
        let len = base + usize::from(c < extra);
        out.push(start..start + len);
        start += len;
    }
    out
}
