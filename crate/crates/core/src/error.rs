use crate::group::GroupError;
use crate::registry::RegistryError;

/// Verification and state failures across the join, transfer and rekey
/// protocols.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error("timestamp outside the freshness window")]
    StaleTimestamp,
    #[error("no join requests to aggregate")]
    EmptyBatch,
    #[error("message addressed to a different cluster head")]
    MismatchedCluster,
    #[error("aggregate NUAV signature check failed")]
    BatchRejected,
    #[error("cluster members reported inconsistent results")]
    ResultMismatch,
    #[error("aggregate member signature check failed")]
    AggregateInvalid,
    #[error("token check failed")]
    TokenMismatch,
    #[error("peer acknowledgement invalid")]
    AckInvalid,
    #[error("pid is not a member of the source cluster")]
    UnknownMember,
    #[error("pid not found in the ground-station database")]
    UnknownPid,
    #[error("response from unknown or duplicate member index {0}")]
    UnexpectedResponder(usize),
    #[error("cluster has no members")]
    EmptyCluster,
    #[error("member abscissas collide")]
    AbscissaCollision,
    #[error("recovered share is not a valid scalar")]
    MalformedShare,
    #[error("missing share envelope from member {0}")]
    MissingEnvelope(usize),
    #[error("reconstructed key does not match the confirmation digest")]
    ConfirmMismatch,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

/// How literally to follow the published equations where they are weak.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Mode {
    /// Peer acknowledgements bind the responder's PID, and the new
    /// pseudonym after a transfer is derived under its own hash label.
    #[default]
    Hardened,
    /// Reproduces the equations verbatim, including the reflectable peer
    /// acknowledgement.
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProtocolConfig {
    pub mode: Mode,
    /// Maximum |now − t| in milliseconds for a timestamp to be fresh.
    pub freshness_ms: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig { mode: Mode::Hardened, freshness_ms: 100 }
    }
}

impl ProtocolConfig {
    pub fn literal() -> Self {
        ProtocolConfig { mode: Mode::PaperLiteral, ..Self::default() }
    }

    pub fn check_fresh(&self, t: crate::block::Timestamp, now: crate::block::Timestamp) -> Result<(), ProtocolError> {
        if t.abs_diff(now) <= self.freshness_ms {
            Ok(())
        } else {
            Err(ProtocolError::StaleTimestamp)
        }
    }
}
