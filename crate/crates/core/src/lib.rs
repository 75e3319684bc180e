//! Slotted-time wireless-network simulator and verification harness for
//! randomized local broadcasting under the SINR and protocol interference
//! models.
//!
//! The crate is organized around a small pipeline:
//!
//! - [`model`] — geometry, physical parameters, scenarios and neighborhood
//!   queries.
//! - [`channel`] — per-slot interference oracles (received power, SINR and
//!   protocol-model decode decisions, the low-power event).
//! - [`automaton`] — the two per-node transmit automata with multiplicative
//!   probability adjustment and reception-triggered fallback.
//! - [`sim`] — the slotted scheduler that drives automata against the channel
//!   and records traces.
//! - [`lowerbound`] — the two-region protocol-model construction and the
//!   range-partition machinery for bounding the no-solo-transmission event.
//! - [`analysis`] — scaling-law fits and fallback-count statistics over run
//!   summaries.
//! - [`cli`] — batch front-end (scenario generation, sweeps, verification
//!   suites).
//!
//! Everything is deterministic: randomness comes from counter-based streams
//! keyed by `(seed, lane, counter)`, so identical inputs produce bit-identical
//! outputs regardless of thread count or iteration order.

pub mod analysis;
pub mod automaton;
pub mod channel;
pub mod cli;
pub mod lowerbound;
pub mod model;
pub mod rng;
pub mod sim;

pub use automaton::{AlgoVariant, HaltReason, NodeState, SlotFeedback};
pub use channel::SlotOutcome;
pub use model::{AlgoConsts, InterferenceModel, NodeId, PhysParams, Point, Scenario};
pub use sim::Trace;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("unknown node id {0}")]
    UnknownNode(u32),

    #[error("nodes {0} and {1} are co-located")]
    Colocated(u32, u32),

    #[error("infeasible geometry: {0}")]
    Infeasible(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("automaton stepped after halting")]
    SteppedAfterHalt,

    #[error("degenerate design matrix")]
    DegenerateFit,

    #[error("probability {0} lies above the top partition range")]
    OutOfPartition(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
