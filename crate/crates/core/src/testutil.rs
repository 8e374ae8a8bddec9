//! Shared fixtures for unit tests.

use crate::graph::{EventKind, NodeId, TemporalGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The canonical five-event desk example.
pub const D0_EDGES: [(NodeId, NodeId, f64); 5] =
    [(0, 1, 1.0), (0, 2, 2.0), (1, 2, 3.0), (0, 1, 4.0), (2, 3, 5.0)];

pub fn d0() -> TemporalGraph {
    TemporalGraph::from_edges(4, &D0_EDGES).unwrap()
}

/// D0 plus a delete of (0,1) at 4.5.
pub fn d0_with_delete() -> TemporalGraph {
    let events = D0_EDGES
        .iter()
        .map(|&(u, v, t)| (EventKind::EdgeAdd, u, Some(v), t))
        .chain([(EventKind::EdgeDelete, 0, Some(1), 4.5)]);
    TemporalGraph::from_dense(4, events).unwrap()
}

/// Random edge-add stream with integer-valued timestamps in `0..t_range`
/// (so ties are common).
pub fn random_graph(seed: u64, nodes: u32, events: usize, t_range: u32) -> TemporalGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<_> = (0..events)
        .map(|_| {
            (
                rng.random_range(0..nodes),
                rng.random_range(0..nodes),
                rng.random_range(0..t_range) as f64,
            )
        })
        .collect();
    TemporalGraph::from_edges(nodes as usize, &edges).unwrap()
}
