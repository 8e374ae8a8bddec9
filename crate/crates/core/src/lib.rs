//! Temporal graph engine: an immutable event store over continuous time,
//! leakage-free neighborhood and negative sampling, conversion to and from
//! snapshot sequences, feature preprocessing, and evaluation pipelines for
//! future link prediction and node classification.

pub mod edgebank;
pub mod eval;
pub mod features;
pub mod graph;
pub mod index;
pub mod io;
pub mod negatives;
pub mod rng;
pub mod sampling;
pub mod snapshot;

#[cfg(test)]
pub(crate) mod testutil;

pub use graph::{Event, EventId, EventKind, NodeId, RawEvent, TemporalGraph, Timestamp};
pub use index::{Directionality, Neighbor, TemporalAdjacency};
pub use rng::RngState;
pub use sampling::{KhopConfig, SamplingStrategy, TemporalBatch, TimeAnchor};
