//! Seeded, leakage-free temporal neighborhood sampling.
//!
//! A query `(u, t)` only ever sees interactions strictly before `t`. Random
//! draws come from counter-based streams keyed by `(seed index, hop)`, so a
//! batch is a pure function of its inputs regardless of evaluation order.

use std::collections::{HashMap, HashSet};

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use crate::graph::{Event, EventId, NodeId, TemporalGraph};
use crate::index::{IndexError, Neighbor, TemporalAdjacency};
use crate::rng::{stream_id, RngState};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SamplingStrategy {
    /// Uniform without replacement over `[t - window, t)`.
    Uniform { window: f64 },
    /// The `k` latest interactions before `t`.
    MostRecent,
}

/// Which time bounds the expansion of a node reached at hop `h > 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TimeAnchor {
    /// Every hop reuses the seed's query time.
    #[default]
    SeedTime,
    /// A node is expanded strictly before the timestamp of the edge that
    /// reached it.
    EdgeTime,
}

#[derive(Debug, Error, PartialEq)]
pub enum SamplingError {
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("fanout must be at least 1")]
    ZeroFanout,
    #[error("at least one hop fanout is required")]
    NoFanouts,
    #[error("batch size must be at least 1")]
    ZeroBatchSize,
    #[error("seed {0} has a NaN query time")]
    NanQueryTime(usize),
}

/// Samples up to `k` past neighbors of `u` at query time `t`. Never pads:
/// fewer candidates than `k` yields all of them.
///
/// `MostRecent` returns entries newest first (ties by larger event id first);
/// `Uniform` returns the drawn entries in time order.
pub fn sample_neighbors<R: Rng + ?Sized>(
    idx: &TemporalAdjacency,
    u: NodeId,
    t: f64,
    k: usize,
    strategy: SamplingStrategy,
    rng: &mut R,
) -> Result<Vec<Neighbor>, SamplingError> {
    if k == 0 {
        return Err(SamplingError::ZeroFanout);
    }
    match strategy {
        SamplingStrategy::MostRecent => {
            let past = idx.neighbors_before(u, t)?;
            Ok(past.iter().rev().take(k).collect())
        }
        SamplingStrategy::Uniform { window } => {
            let cands = idx.neighbors_in_window(u, t, window)?;
            if cands.len() <= k {
                return Ok(cands.to_vec());
            }
            let mut picked = index::sample(rng, cands.len(), k).into_vec();
            picked.sort_unstable();
            Ok(picked.into_iter().map(|i| cands.get(i)).collect())
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KhopConfig {
    pub fanouts: Vec<usize>,
    pub strategy: SamplingStrategy,
    pub anchor: TimeAnchor,
}

impl KhopConfig {
    pub fn new(fanouts: Vec<usize>, strategy: SamplingStrategy) -> Self {
        KhopConfig {
            fanouts,
            strategy,
            anchor: TimeAnchor::SeedTime,
        }
    }

    pub fn with_anchor(mut self, anchor: TimeAnchor) -> Self {
        self.anchor = anchor;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeedQuery {
    pub node: NodeId,
    pub t: f64,
}

/// A sampled interaction in local ids. `local_src` is the expanded node,
/// `local_dst` the sampled neighbor; `query_t` is the time that governed the
/// expansion (always `> t`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchEdge {
    pub local_src: u32,
    pub local_dst: u32,
    pub t: f64,
    pub event_id: EventId,
    pub query_t: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TemporalBatch {
    pub seeds: Vec<SeedQuery>,
    /// Local id of each seed.
    pub seed_locals: Vec<u32>,
    /// `hops[h]` holds the edges sampled at hop `h`.
    pub hops: Vec<Vec<BatchEdge>>,
    /// Local id -> global node id.
    pub node_map: Vec<NodeId>,
    pub fanouts: Vec<usize>,
}

impl TemporalBatch {
    pub fn num_edges(&self) -> usize {
        self.hops.iter().map(Vec::len).sum()
    }

    pub fn global(&self, local: u32) -> NodeId {
        self.node_map[local as usize]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, &BatchEdge)> {
        self.hops.iter().enumerate().flat_map(|(h, es)| es.iter().map(move |e| (h, e)))
    }
}

struct GlobalEdge {
    src: NodeId,
    dst: NodeId,
    t: f64,
    event_id: EventId,
    query_t: f64,
}

/// Expands one seed through all hops. Depends only on the seed, its index
/// and the RNG key.
fn expand_seed(
    idx: &TemporalAdjacency,
    seed_index: usize,
    seed: SeedQuery,
    cfg: &KhopConfig,
    rng: RngState,
) -> Result<Vec<Vec<GlobalEdge>>, SamplingError> {
    let mut hops = Vec::with_capacity(cfg.fanouts.len());
    let mut visited: HashSet<(NodeId, u64)> = HashSet::new();
    visited.insert((seed.node, seed.t.to_bits()));
    let mut frontier = vec![(seed.node, seed.t)];

    for (h, &k) in cfg.fanouts.iter().enumerate() {
        let mut gen = rng.with_stream(stream_id(seed_index as u64, h as u64)).generator();
        let mut edges = Vec::new();
        let mut next = Vec::new();
        for &(v, qt) in &frontier {
            for nb in sample_neighbors(idx, v, qt, k, cfg.strategy, &mut gen)? {
                edges.push(GlobalEdge {
                    src: v,
                    dst: nb.node,
                    t: nb.t,
                    event_id: nb.event_id,
                    query_t: qt,
                });
                let child_t = match cfg.anchor {
                    TimeAnchor::SeedTime => seed.t,
                    TimeAnchor::EdgeTime => nb.t,
                };
                if visited.insert((nb.node, child_t.to_bits())) {
                    next.push((nb.node, child_t));
                }
            }
        }
        hops.push(edges);
        frontier = next;
    }
    Ok(hops)
}

/// Samples a k-hop temporal neighborhood around each `(node, t)` seed.
///
/// Each seed is expanded independently; the local node map is shared and
/// deduplicated, assigned in seed order then hop order.
pub fn sample_khop(
    idx: &TemporalAdjacency,
    seeds: &[(NodeId, f64)],
    cfg: &KhopConfig,
    rng: RngState,
) -> Result<TemporalBatch, SamplingError> {
    if cfg.fanouts.is_empty() {
        return Err(SamplingError::NoFanouts);
    }
    if cfg.fanouts.contains(&0) {
        return Err(SamplingError::ZeroFanout);
    }
    if let SamplingStrategy::Uniform { window } = cfg.strategy {
        if !(window > 0.0) {
            return Err(IndexError::InvalidWindow(window).into());
        }
    }

    let mut batch = TemporalBatch {
        fanouts: cfg.fanouts.clone(),
        hops: vec![Vec::new(); cfg.fanouts.len()],
        ..Default::default()
    };
    let mut local: HashMap<NodeId, u32> = HashMap::new();
    let mut intern = |batch: &mut TemporalBatch, g: NodeId| -> u32 {
        *local.entry(g).or_insert_with(|| {
            batch.node_map.push(g);
            (batch.node_map.len() - 1) as u32
        })
    };

    let mut per_seed = Vec::with_capacity(seeds.len());
    for (i, &(node, t)) in seeds.iter().enumerate() {
        if t.is_nan() {
            return Err(SamplingError::NanQueryTime(i));
        }
        idx.neighbors(node)?;
        let seed = SeedQuery { node, t };
        batch.seeds.push(seed);
        let l = intern(&mut batch, node);
        batch.seed_locals.push(l);
        per_seed.push(expand_seed(idx, i, seed, cfg, rng)?);
    }

    for h in 0..cfg.fanouts.len() {
        for hops in &per_seed {
            for e in &hops[h] {
                let local_src = intern(&mut batch, e.src);
                let local_dst = intern(&mut batch, e.dst);
                batch.hops[h].push(BatchEdge {
                    local_src,
                    local_dst,
                    t: e.t,
                    event_id: e.event_id,
                    query_t: e.query_t,
                });
            }
        }
    }
    Ok(batch)
}

/// A chronological slice of positive (`EdgeAdd`) events.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkWindow<'g> {
    pub positives: Vec<&'g Event>,
    /// Time of the first positive.
    pub t_start: f64,
    /// One ulp past the last positive, so the window is `[t_start, t_end)`.
    pub t_end: f64,
}

/// Slices `edges` (already in stream order) into consecutive windows of at
/// most `batch_size` events.
pub fn link_windows<'g>(edges: &[&'g Event], batch_size: usize) -> Result<Vec<LinkWindow<'g>>, SamplingError> {
    if batch_size == 0 {
        return Err(SamplingError::ZeroBatchSize);
    }
    Ok(edges
        .chunks(batch_size)
        .map(|chunk| LinkWindow {
            positives: chunk.to_vec(),
            t_start: chunk[0].time(),
            t_end: chunk[chunk.len() - 1].time().next_up(),
        })
        .collect())
}

/// Windows over every `EdgeAdd` of `g`.
pub fn iterate_link_batches(g: &TemporalGraph, batch_size: usize) -> Result<Vec<LinkWindow<'_>>, SamplingError> {
    let edges: Vec<&Event> = g.edge_adds().collect();
    link_windows(&edges, batch_size)
}
