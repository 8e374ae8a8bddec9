//! Temporal negative edge sampling.
//!
//! Both strategies are defined relative to an evaluation window
//! `[t_start, t_end)`:
//!
//! * **random**: pairs with no interaction at any time before `t_end`;
//! * **historical**: pairs that interacted before `t_start` but not inside
//!   the window.
//!
//! Pair identity follows the index [`Directionality`]: with the symmetrized
//! default, `(u, v)` and `(v, u)` are the same pair. Self pairs are never
//! emitted.

use std::collections::HashSet;

use indexmap::IndexSet;
use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use crate::graph::{EventKind, NodeId, TemporalGraph};
use crate::index::Directionality;

/// Rejections allowed per requested negative before giving up.
pub const REJECTION_FACTOR: usize = 1000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NegativeStrategy {
    #[default]
    Random,
    Historical,
}

/// What historical sampling does when the pool is smaller than requested.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fallback {
    /// Fill the remainder with random negatives.
    #[default]
    ToRandom,
    /// Return the whole pool and report the shortfall.
    Strict,
}

/// Which endpoints a random negative replaces.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Corruption {
    /// Keep the positive's source, draw a new destination.
    #[default]
    Destination,
    /// Draw both endpoints uniformly.
    BothEndpoints,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NegativeSpec {
    pub strategy: NegativeStrategy,
    /// Negatives per positive (`Q`).
    pub per_positive: usize,
    pub seed: u64,
    pub fallback: Fallback,
    pub corruption: Corruption,
}

impl Default for NegativeSpec {
    fn default() -> Self {
        NegativeSpec {
            strategy: NegativeStrategy::Random,
            per_positive: 1,
            seed: 0,
            fallback: Fallback::ToRandom,
            corruption: Corruption::Destination,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum NegativeError {
    #[error("negative sampling needs at least 2 nodes, graph has {0}")]
    TooFewNodes(usize),
    #[error("negatives per positive must be at least 1")]
    ZeroPerPositive,
    #[error("invalid window [{0}, {1})")]
    InvalidWindow(f64, f64),
}

/// Node pairs with at least one `EdgeAdd` in a time range, in order of first
/// occurrence.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SeenSet {
    directionality: Directionality,
    pairs: IndexSet<(NodeId, NodeId)>,
}

impl SeenSet {
    pub fn new(directionality: Directionality) -> Self {
        SeenSet {
            directionality,
            pairs: IndexSet::new(),
        }
    }

    pub fn insert(&mut self, u: NodeId, v: NodeId) -> bool {
        self.pairs.insert(self.directionality.key(u, v))
    }

    pub fn contains(&self, u: NodeId, v: NodeId) -> bool {
        self.pairs.contains(&self.directionality.key(u, v))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Canonical pairs in first-occurrence order.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.pairs.iter().copied()
    }
}

/// Pairs with an `EdgeAdd` in `[start, end)`.
pub fn build_seen_set(g: &TemporalGraph, directionality: Directionality, start: f64, end: f64) -> SeenSet {
    let mut set = SeenSet::new(directionality);
    for e in g.events_in(start, end) {
        if e.kind == EventKind::EdgeAdd {
            let (u, v) = e.pair().unwrap();
            set.insert(u, v);
        }
    }
    set
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NegativeBatch {
    pub pairs: Vec<(NodeId, NodeId)>,
    /// Random draws that hit the rejection cap.
    pub saturated: usize,
    /// Requested negatives that could not be supplied.
    pub shortfall: usize,
    /// Random pairs added to fill a short historical pool.
    pub topped_up: usize,
    /// Random strategy only: how many of `pairs` belong to each positive,
    /// in positive order.
    pub per_positive: Vec<usize>,
}

/// Streaming negative sampler over one graph.
///
/// Keeps the set of pairs seen before the most recent window start, advancing
/// incrementally when windows move forward. Results are identical to the
/// standalone [`random_negatives`] / [`historical_negatives`] functions.
pub struct NegativeSampler<'g> {
    g: &'g TemporalGraph,
    directionality: Directionality,
    /// Number of events folded into `history`.
    cursor: usize,
    history: SeenSet,
}

impl<'g> NegativeSampler<'g> {
    pub fn new(g: &'g TemporalGraph, directionality: Directionality) -> Result<Self, NegativeError> {
        if g.num_nodes() < 2 {
            return Err(NegativeError::TooFewNodes(g.num_nodes()));
        }
        Ok(NegativeSampler {
            g,
            directionality,
            cursor: 0,
            history: SeenSet::new(directionality),
        })
    }

    fn advance_to(&mut self, t: f64) {
        let target = self.g.partition_before(t);
        if target < self.cursor {
            self.cursor = 0;
            self.history = SeenSet::new(self.directionality);
        }
        for e in &self.g.events()[self.cursor..target] {
            if e.kind == EventKind::EdgeAdd {
                let (u, v) = e.pair().unwrap();
                self.history.insert(u, v);
            }
        }
        self.cursor = target;
    }

    fn check_window(t_start: f64, t_end: f64) -> Result<(), NegativeError> {
        if t_start.is_nan() || t_end.is_nan() || t_start > t_end {
            return Err(NegativeError::InvalidWindow(t_start, t_end));
        }
        Ok(())
    }

    /// `Q` random negatives per positive, never seen before `t_end`.
    pub fn random<R: Rng + ?Sized>(
        &mut self,
        window: (f64, f64),
        positives: &[(NodeId, NodeId)],
        per_positive: usize,
        corruption: Corruption,
        rng: &mut R,
    ) -> Result<NegativeBatch, NegativeError> {
        if per_positive == 0 {
            return Err(NegativeError::ZeroPerPositive);
        }
        let (t_start, t_end) = window;
        Self::check_window(t_start, t_end)?;
        self.advance_to(t_start);
        let in_window = build_seen_set(self.g, self.directionality, t_start, t_end);
        let blocked = self.blocked_set(positives);
        let mut out = NegativeBatch::default();

        for &(u, _) in positives {
            let anchor = match corruption {
                Corruption::Destination => Some(u),
                Corruption::BothEndpoints => None,
            };
            let mut chosen = HashSet::new();
            let found = self.draw(rng, anchor, per_positive, &in_window, &blocked, &mut chosen);
            if found.len() < per_positive {
                out.saturated += 1;
                out.shortfall += per_positive - found.len();
            }
            out.per_positive.push(found.len());
            out.pairs.extend(found);
        }
        Ok(out)
    }

    /// Up to `total` historical negatives, drawn without replacement from
    /// pairs seen before `t_start` and absent from the window.
    pub fn historical<R: Rng + ?Sized>(
        &mut self,
        window: (f64, f64),
        total: usize,
        fallback: Fallback,
        positives: &[(NodeId, NodeId)],
        corruption: Corruption,
        rng: &mut R,
    ) -> Result<NegativeBatch, NegativeError> {
        let (t_start, t_end) = window;
        Self::check_window(t_start, t_end)?;
        self.advance_to(t_start);
        let in_window = build_seen_set(self.g, self.directionality, t_start, t_end);
        let pool: Vec<(NodeId, NodeId)> = self
            .history
            .iter()
            .filter(|&(u, v)| !in_window.contains(u, v))
            .collect();

        let mut out = NegativeBatch::default();
        if pool.len() <= total {
            out.pairs = pool;
        } else {
            out.pairs = index::sample(rng, pool.len(), total).into_iter().map(|i| pool[i]).collect();
        }
        let missing = total - out.pairs.len();
        if missing == 0 {
            return Ok(out);
        }
        match fallback {
            Fallback::Strict => out.shortfall = missing,
            Fallback::ToRandom => {
                let blocked = self.blocked_set(positives);
                let mut chosen: HashSet<(NodeId, NodeId)> =
                    out.pairs.iter().map(|&(u, v)| self.directionality.key(u, v)).collect();
                for i in 0..missing {
                    let anchor = match (corruption, positives.is_empty()) {
                        (Corruption::Destination, false) => Some(positives[i % positives.len()].0),
                        _ => None,
                    };
                    let found = self.draw(rng, anchor, 1, &in_window, &blocked, &mut chosen);
                    if found.is_empty() {
                        out.saturated += 1;
                        out.shortfall += 1;
                    } else {
                        out.topped_up += 1;
                        out.pairs.extend(found);
                    }
                }
            }
        }
        Ok(out)
    }

    fn blocked_set(&self, positives: &[(NodeId, NodeId)]) -> HashSet<(NodeId, NodeId)> {
        positives.iter().map(|&(u, v)| self.directionality.key(u, v)).collect()
    }

    /// Rejection sampling of up to `need` pairs unseen before the window end.
    fn draw<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        anchor: Option<NodeId>,
        need: usize,
        in_window: &SeenSet,
        blocked: &HashSet<(NodeId, NodeId)>,
        chosen: &mut HashSet<(NodeId, NodeId)>,
    ) -> Vec<(NodeId, NodeId)> {
        let n = self.g.num_nodes() as NodeId;
        let cap = REJECTION_FACTOR * need;
        let mut rejections = 0;
        let mut found = Vec::with_capacity(need);
        while found.len() < need && rejections < cap {
            let u = anchor.unwrap_or_else(|| rng.random_range(0..n));
            let v = rng.random_range(0..n);
            let key = self.directionality.key(u, v);
            let admissible = u != v
                && !self.history.contains(u, v)
                && !in_window.contains(u, v)
                && !blocked.contains(&key)
                && !chosen.contains(&key);
            if admissible {
                chosen.insert(key);
                found.push((u, v));
            } else {
                rejections += 1;
            }
        }
        found
    }
}

/// `Q` random negatives for each positive of `[t_start, t_end)`.
pub fn random_negatives<R: Rng + ?Sized>(
    g: &TemporalGraph,
    directionality: Directionality,
    window: (f64, f64),
    positives: &[(NodeId, NodeId)],
    per_positive: usize,
    corruption: Corruption,
    rng: &mut R,
) -> Result<NegativeBatch, NegativeError> {
    NegativeSampler::new(g, directionality)?.random(window, positives, per_positive, corruption, rng)
}

/// Up to `total` historical negatives for `[t_start, t_end)`.
#[allow(clippy::too_many_arguments)]
pub fn historical_negatives<R: Rng + ?Sized>(
    g: &TemporalGraph,
    directionality: Directionality,
    window: (f64, f64),
    total: usize,
    fallback: Fallback,
    positives: &[(NodeId, NodeId)],
    corruption: Corruption,
    rng: &mut R,
) -> Result<NegativeBatch, NegativeError> {
    NegativeSampler::new(g, directionality)?.historical(window, total, fallback, positives, corruption, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngState;
    use crate::testutil::{d0, random_graph};

    const SYM: Directionality = Directionality::Symmetrized;

    fn sorted(mut v: Vec<(NodeId, NodeId)>) -> Vec<(NodeId, NodeId)> {
        v.sort_unstable();
        v
    }

    #[test]
    fn seen_sets_d0() {
        let g = d0();
        assert_eq!(sorted(build_seen_set(&g, SYM, 1.0, 4.0).iter().collect()), vec![(0, 1), (0, 2), (1, 2)]);
        assert!(build_seen_set(&g, SYM, 6.0, 9.0).is_empty());
        assert_eq!(build_seen_set(&g, SYM, 1.0, 6.0).len(), 4);
    }

    #[test]
    fn random_d0_only_admissible_corruption() {
        let g = d0();
        let mut rng = RngState::new(5).generator();
        let out = random_negatives(&g, SYM, (4.0, 6.0), &[(0, 1)], 1, Corruption::Destination, &mut rng).unwrap();
        assert_eq!(out.pairs, vec![(0, 3)]);
        assert_eq!(out.saturated, 0);
    }

    #[test]
    fn random_saturates_on_fully_seen_graph() {
        let g = TemporalGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let mut rng = RngState::new(5).generator();
        let out = random_negatives(&g, SYM, (1.0, 2.0), &[(0, 1)], 1, Corruption::Destination, &mut rng).unwrap();
        assert!(out.pairs.is_empty());
        assert_eq!(out.saturated, 1);
        assert_eq!(out.shortfall, 1);
    }

    #[test]
    fn random_on_star_gives_distinct_unseen_leaves() {
        // Center 0 has seen leaves 1..=10 and unseen leaves 11..=60.
        let mut edges: Vec<_> = (1..=10).map(|l| (0, l, l as f64)).collect();
        edges.push((0, 1, 20.0));
        let g = TemporalGraph::from_edges(61, &edges).unwrap();
        let admissible: HashSet<NodeId> = (11..=60).collect();
        for seed in 0..20 {
            let mut rng = RngState::new(seed).generator();
            let out = random_negatives(&g, SYM, (20.0, 21.0), &[(0, 1)], 3, Corruption::Destination, &mut rng).unwrap();
            assert_eq!(out.pairs.len(), 3);
            let leaves: HashSet<NodeId> = out.pairs.iter().map(|&(u, v)| { assert_eq!(u, 0); v }).collect();
            assert_eq!(leaves.len(), 3);
            assert!(leaves.is_subset(&admissible));
        }
    }

    #[test]
    fn historical_d0() {
        let g = d0();
        let mut rng = RngState::new(1).generator();
        let out = historical_negatives(&g, SYM, (4.0, 6.0), 2, Fallback::Strict, &[], Corruption::Destination, &mut rng).unwrap();
        assert_eq!(sorted(out.pairs), vec![(0, 2), (1, 2)]);
        assert_eq!(out.shortfall, 0);

        let out = historical_negatives(&g, SYM, (1.0, 2.0), 2, Fallback::Strict, &[], Corruption::Destination, &mut rng).unwrap();
        assert!(out.pairs.is_empty());
        assert_eq!(out.shortfall, 2);

        let out = historical_negatives(&g, SYM, (1.0, 6.0), 1, Fallback::Strict, &[], Corruption::Destination, &mut rng).unwrap();
        assert!(out.pairs.is_empty());
    }

    #[test]
    fn historical_tops_up_with_random() {
        let g = d0();
        let mut rng = RngState::new(1).generator();
        // Pool is {(0,2),(1,2)}; the only never-seen pairs are (0,3) and (1,3).
        let out = historical_negatives(&g, SYM, (4.0, 6.0), 4, Fallback::ToRandom, &[(0, 1), (2, 3)], Corruption::Destination, &mut rng).unwrap();
        let random_part: Vec<_> = out.pairs[2..].to_vec();
        assert_eq!(out.topped_up + out.shortfall, 2);
        for &(u, v) in &random_part {
            assert!(!build_seen_set(&g, SYM, f64::NEG_INFINITY, 6.0).contains(u, v));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = TemporalGraph::from_edges(1, &[(0, 0, 1.0)]).unwrap();
        assert_eq!(NegativeSampler::new(&g, SYM).err(), Some(NegativeError::TooFewNodes(1)));
        let g = d0();
        let mut rng = RngState::new(0).generator();
        assert_eq!(
            random_negatives(&g, SYM, (1.0, 2.0), &[(0, 1)], 0, Corruption::Destination, &mut rng),
            Err(NegativeError::ZeroPerPositive)
        );
        assert!(random_negatives(&g, SYM, (3.0, 2.0), &[(0, 1)], 1, Corruption::Destination, &mut rng).is_err());
    }

    /// Brute-force reconstruction of the admissibility predicates.
    fn occurrences(g: &TemporalGraph, dir: Directionality, u: NodeId, v: NodeId, lo: f64, hi: f64) -> usize {
        g.edge_adds()
            .filter(|e| e.time() >= lo && e.time() < hi)
            .filter(|e| {
                let (a, b) = e.pair().unwrap();
                dir.key(a, b) == dir.key(u, v)
            })
            .count()
    }

    #[test]
    fn invariants_on_random_graphs() {
        for seed in 0..15u64 {
            let g = random_graph(seed, 25, 300, 40);
            for dir in [Directionality::Directed, SYM] {
                let mut sampler = NegativeSampler::new(&g, dir).unwrap();
                let mut rng = RngState::new(seed).generator();
                for t_start in [5.0, 10.0, 20.0, 30.0] {
                    let t_end = t_start + 5.0;
                    let positives: Vec<_> = g.events_in(t_start, t_end).iter().filter_map(|e| e.pair()).collect();
                    let pos_keys: HashSet<_> = positives.iter().map(|&(u, v)| dir.key(u, v)).collect();

                    let r = sampler.random((t_start, t_end), &positives, 2, Corruption::Destination, &mut rng).unwrap();
                    for &(u, v) in &r.pairs {
                        assert_eq!(occurrences(&g, dir, u, v, f64::NEG_INFINITY, t_end), 0);
                        assert!(!pos_keys.contains(&dir.key(u, v)));
                        assert_ne!(u, v);
                    }

                    let h = sampler.historical((t_start, t_end), 30, Fallback::Strict, &positives, Corruption::Destination, &mut rng).unwrap();
                    let uniq: HashSet<_> = h.pairs.iter().map(|&(u, v)| dir.key(u, v)).collect();
                    assert_eq!(uniq.len(), h.pairs.len());
                    for &(u, v) in &h.pairs {
                        assert!(occurrences(&g, dir, u, v, f64::NEG_INFINITY, t_start) > 0);
                        assert_eq!(occurrences(&g, dir, u, v, t_start, t_end), 0);
                        assert!(!pos_keys.contains(&dir.key(u, v)));
                    }
                }
            }
        }
    }

    #[test]
    fn streaming_matches_standalone_and_is_deterministic() {
        let g = random_graph(3, 30, 500, 50);
        let mut sampler = NegativeSampler::new(&g, SYM).unwrap();
        for (i, t0) in [10.0, 25.0, 12.0, 40.0].into_iter().enumerate() {
            let w = (t0, t0 + 3.0);
            let positives: Vec<_> = g.events_in(w.0, w.1).iter().filter_map(|e| e.pair()).collect();
            let s = RngState::new(9).with_stream(i as u64);
            let a = sampler.historical(w, 10, Fallback::ToRandom, &positives, Corruption::Destination, &mut s.generator()).unwrap();
            let b = historical_negatives(&g, SYM, w, 10, Fallback::ToRandom, &positives, Corruption::Destination, &mut s.generator()).unwrap();
            assert_eq!(a, b);
            let a = sampler.random(w, &positives, 3, Corruption::BothEndpoints, &mut s.generator()).unwrap();
            let b = random_negatives(&g, SYM, w, &positives, 3, Corruption::BothEndpoints, &mut s.generator()).unwrap();
            assert_eq!(a, b);
        }
    }
}
