//! Per-node, time-sorted adjacency in CSR layout.
//!
//! All queries are strict in time: an interaction at exactly the query time
//! is never visible. Lookups are a binary search over the node's timestamp
//! slice followed by a contiguous view.

use thiserror::Error;

use crate::graph::{EventId, EventKind, NodeId, TemporalGraph};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Directionality {
    Directed,
    /// Each interaction is visible from both endpoints.
    #[default]
    Symmetrized,
}

impl Directionality {
    /// Canonical key for a node pair under this mode.
    #[inline]
    pub fn key(self, u: NodeId, v: NodeId) -> (NodeId, NodeId) {
        match self {
            Directionality::Directed => (u, v),
            Directionality::Symmetrized => (u.min(v), u.max(v)),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum IndexError {
    #[error("node {node} out of range for {num_nodes} nodes")]
    NodeOutOfRange { node: NodeId, num_nodes: usize },
    #[error("window must be positive, got {0}")]
    InvalidWindow(f64),
}

/// One adjacency entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub node: NodeId,
    pub t: f64,
    pub event_id: EventId,
}

/// Immutable temporal adjacency. Each node's entries are sorted by
/// `(t, event position)`, which matches `(t, event_id)` ordering.
#[derive(Clone, Debug)]
pub struct TemporalAdjacency {
    directionality: Directionality,
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
    times: Vec<f64>,
    event_ids: Vec<EventId>,
}

/// Contiguous, time-ordered run of adjacency entries.
#[derive(Clone, Copy, Debug)]
pub struct NeighborSlice<'a> {
    neighbors: &'a [NodeId],
    times: &'a [f64],
    event_ids: &'a [EventId],
}

impl<'a> NeighborSlice<'a> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn get(&self, i: usize) -> Neighbor {
        Neighbor {
            node: self.neighbors[i],
            t: self.times[i],
            event_id: self.event_ids[i],
        }
    }

    pub fn last(&self) -> Option<Neighbor> {
        self.len().checked_sub(1).map(|i| self.get(i))
    }

    pub fn times(&self) -> &'a [f64] {
        self.times
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = Neighbor> + ExactSizeIterator + 'a {
        let s = *self;
        (0..s.len()).map(move |i| s.get(i))
    }

    fn sub(&self, lo: usize, hi: usize) -> NeighborSlice<'a> {
        NeighborSlice {
            neighbors: &self.neighbors[lo..hi],
            times: &self.times[lo..hi],
            event_ids: &self.event_ids[lo..hi],
        }
    }

    pub fn to_vec(&self) -> Vec<Neighbor> {
        self.iter().collect()
    }
}

impl TemporalAdjacency {
    /// Indexes every `EdgeAdd` of `g`. Deletions are ignored here; they only
    /// matter when materializing snapshots.
    pub fn build(g: &TemporalGraph, directionality: Directionality) -> Self {
        let n = g.num_nodes();
        let mut counts = vec![0usize; n + 1];
        for e in g.edge_adds() {
            let (u, v) = e.pair().expect("edge event");
            counts[u as usize + 1] += 1;
            if directionality == Directionality::Symmetrized && u != v {
                counts[v as usize + 1] += 1;
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts;
        let total = offsets[n];
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0; total];
        let mut times = vec![0.0; total];
        let mut event_ids = vec![0; total];

        let mut put = |from: NodeId, to: NodeId, t: f64, id: EventId| {
            let slot = &mut cursor[from as usize];
            neighbors[*slot] = to;
            times[*slot] = t;
            event_ids[*slot] = id;
            *slot += 1;
        };
        // Events are already in (t, id) order, so appending keeps every
        // per-node list sorted.
        for e in g.events().iter().filter(|e| e.kind == EventKind::EdgeAdd) {
            let (u, v) = e.pair().unwrap();
            put(u, v, e.time(), e.id);
            if directionality == Directionality::Symmetrized && u != v {
                put(v, u, e.time(), e.id);
            }
        }

        TemporalAdjacency {
            directionality,
            offsets,
            neighbors,
            times,
            event_ids,
        }
    }

    pub fn directionality(&self) -> Directionality {
        self.directionality
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_entries(&self) -> usize {
        self.times.len()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Entire adjacency list of `u`, in time order.
    pub fn neighbors(&self, u: NodeId) -> Result<NeighborSlice<'_>, IndexError> {
        let i = u as usize;
        if i >= self.num_nodes() {
            return Err(IndexError::NodeOutOfRange {
                node: u,
                num_nodes: self.num_nodes(),
            });
        }
        let (lo, hi) = (self.offsets[i], self.offsets[i + 1]);
        Ok(NeighborSlice {
            neighbors: &self.neighbors[lo..hi],
            times: &self.times[lo..hi],
            event_ids: &self.event_ids[lo..hi],
        })
    }

    /// Entries of `u` with `t' < t`.
    pub fn neighbors_before(&self, u: NodeId, t: f64) -> Result<NeighborSlice<'_>, IndexError> {
        let all = self.neighbors(u)?;
        let hi = all.times.partition_point(|&x| x < t);
        Ok(all.sub(0, hi))
    }

    /// Entries of `u` with `t' ∈ [t - window, t)`.
    pub fn neighbors_in_window(&self, u: NodeId, t: f64, window: f64) -> Result<NeighborSlice<'_>, IndexError> {
        // Rejects NaN as well.
        if !(window > 0.0) {
            return Err(IndexError::InvalidWindow(window));
        }
        let before = self.neighbors_before(u, t)?;
        let lower = t - window;
        let lo = before.times.partition_point(|&x| x < lower);
        Ok(before.sub(lo, before.len()))
    }

    pub fn degree_before(&self, u: NodeId, t: f64) -> Result<usize, IndexError> {
        Ok(self.neighbors_before(u, t)?.len())
    }

    /// Largest interaction time strictly before `t`.
    pub fn last_event_time(&self, u: NodeId, t: f64) -> Result<Option<f64>, IndexError> {
        Ok(self.neighbors_before(u, t)?.last().map(|n| n.t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{d0, random_graph};

    fn pairs(s: NeighborSlice<'_>) -> Vec<(NodeId, f64)> {
        s.iter().map(|n| (n.node, n.t)).collect()
    }

    /// Linear scan over the raw stream.
    fn scan(g: &TemporalGraph, dir: Directionality, u: NodeId, lo: f64, hi: f64) -> Vec<(NodeId, f64, EventId)> {
        let mut out = Vec::new();
        for e in g.events() {
            if e.kind != EventKind::EdgeAdd || !(e.time() >= lo && e.time() < hi) {
                continue;
            }
            let (a, b) = e.pair().unwrap();
            if a == u {
                out.push((b, e.time(), e.id));
            } else if b == u && dir == Directionality::Symmetrized {
                out.push((a, e.time(), e.id));
            }
        }
        out
    }

    #[test]
    fn d0_lists() {
        let g = d0();
        let sym = TemporalAdjacency::build(&g, Directionality::Symmetrized);
        let node0: Vec<_> = sym.neighbors(0).unwrap().iter().map(|n| (n.node, n.t, n.event_id)).collect();
        assert_eq!(node0, vec![(1, 1.0, 0), (2, 2.0, 1), (1, 4.0, 3)]);
        assert_eq!(sym.num_entries(), 10);

        let dir = TemporalAdjacency::build(&g, Directionality::Directed);
        let node1: Vec<_> = dir.neighbors(1).unwrap().iter().map(|n| (n.node, n.t, n.event_id)).collect();
        assert_eq!(node1, vec![(2, 3.0, 2)]);
        assert_eq!(dir.num_entries(), 5);
    }

    #[test]
    fn empty_graph_offsets() {
        let g = TemporalGraph::from_edges(3, &[]).unwrap();
        let idx = TemporalAdjacency::build(&g, Directionality::Symmetrized);
        assert_eq!(idx.offsets(), &[0, 0, 0, 0]);
    }

    #[test]
    fn self_loop_stored_once() {
        let g = TemporalGraph::from_edges(2, &[(1, 1, 1.0), (0, 1, 2.0)]).unwrap();
        let idx = TemporalAdjacency::build(&g, Directionality::Symmetrized);
        assert_eq!(idx.num_entries(), 3);
        assert_eq!(pairs(idx.neighbors(1).unwrap()), vec![(1, 1.0), (0, 2.0)]);
    }

    #[test]
    fn before_queries() {
        let idx = TemporalAdjacency::build(&d0(), Directionality::Symmetrized);
        assert_eq!(pairs(idx.neighbors_before(0, 4.0).unwrap()), vec![(1, 1.0), (2, 2.0)]);
        assert!(idx.neighbors_before(0, 1.0).unwrap().is_empty());
        assert_eq!(pairs(idx.neighbors_before(3, 10.0).unwrap()), vec![(2, 5.0)]);
        assert_eq!(
            idx.neighbors_before(4, 1.0).unwrap_err(),
            IndexError::NodeOutOfRange { node: 4, num_nodes: 4 }
        );
    }

    #[test]
    fn window_queries() {
        let idx = TemporalAdjacency::build(&d0(), Directionality::Symmetrized);
        assert_eq!(pairs(idx.neighbors_in_window(0, 4.5, 2.0).unwrap()), vec![(1, 4.0)]);
        assert_eq!(idx.neighbors_in_window(0, 4.5, 10.0).unwrap().len(), 3);
        assert!(idx.neighbors_in_window(0, 1.0, 5.0).unwrap().is_empty());
        assert_eq!(idx.neighbors_in_window(0, 4.5, 0.0).unwrap_err(), IndexError::InvalidWindow(0.0));
        assert!(idx.neighbors_in_window(0, 4.5, -1.0).is_err());
        assert!(idx.neighbors_in_window(0, 4.5, f64::NAN).is_err());
        assert_eq!(idx.neighbors_in_window(0, 4.5, f64::INFINITY).unwrap().len(), 3);
    }

    #[test]
    fn degree_and_last_time() {
        let idx = TemporalAdjacency::build(&d0(), Directionality::Symmetrized);
        assert_eq!(idx.degree_before(0, 4.5).unwrap(), 3);
        assert_eq!(idx.last_event_time(0, 4.5).unwrap(), Some(4.0));
        assert_eq!(idx.degree_before(0, 0.5).unwrap(), 0);
        assert_eq!(idx.last_event_time(0, 0.5).unwrap(), None);
        assert_eq!(idx.degree_before(2, 5.0).unwrap(), 2);
        assert_eq!(idx.last_event_time(2, 5.0).unwrap(), Some(3.0));
    }

    #[test]
    fn matches_linear_scan_on_random_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for gi in 0..20 {
            let g = random_graph(gi, 30, 400, 50);
            for dir in [Directionality::Directed, Directionality::Symmetrized] {
                let idx = TemporalAdjacency::build(&g, dir);
                for _ in 0..50 {
                    let u = rng.random_range(0..30);
                    let t = rng.random_range(-2.0..55.0);
                    let w = rng.random_range(0.1..20.0);
                    let got: Vec<_> = idx.neighbors_in_window(u, t, w).unwrap().iter().map(|n| (n.node, n.t, n.event_id)).collect();
                    assert_eq!(got, scan(&g, dir, u, t - w, t));
                    let got: Vec<_> = idx.neighbors_before(u, t).unwrap().iter().map(|n| (n.node, n.t, n.event_id)).collect();
                    assert_eq!(got, scan(&g, dir, u, f64::NEG_INFINITY, t));
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn degree_monotone_and_no_future(seed in 0u64..1000, u in 0u32..10, t1 in -1.0f64..25.0, dt in 0.0f64..10.0) {
                let g = random_graph(seed, 10, 80, 20);
                let idx = TemporalAdjacency::build(&g, Directionality::Symmetrized);
                prop_assert!(idx.degree_before(u, t1).unwrap() <= idx.degree_before(u, t1 + dt).unwrap());
                prop_assert!(idx.neighbors_before(u, t1).unwrap().iter().all(|n| n.t < t1));
            }
        }
    }
}
