//! Conversions between the continuous event stream, discrete snapshot
//! sequences and a single static graph.
//!
//! Every snapshot of one conversion shares the full vertex set of the source
//! graph. Multi-edges between the same ordered pair are resolved by an
//! explicit [`Coalesce`] policy, and an `EdgeDelete` drops everything
//! accumulated for its pair up to that point.

use indexmap::IndexMap;
use thiserror::Error;

use crate::graph::{Event, EventId, EventKind, IngestError, NodeId, TemporalGraph};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PartitionMode {
    /// Half-open windows of `width` anchored at `t_min`.
    FixedWidth { width: f64 },
    /// `count` equal-width windows spanning `[t_min, t_max]`.
    FixedCount { count: usize },
    /// Consecutive slices of `events` events.
    FixedEvents { events: usize },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Coalesce {
    /// One edge entry per `EdgeAdd`.
    KeepAll,
    /// One entry per pair, stamped with the latest add.
    Last,
    /// One entry per pair weighted by its number of surviving adds.
    #[default]
    CountWeight,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Accumulation {
    /// Only events inside the window.
    #[default]
    Interval,
    /// Every event before the window end.
    Cumulative,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnapshotSpec {
    pub mode: PartitionMode,
    pub coalesce: Coalesce,
    pub accumulation: Accumulation,
}

impl SnapshotSpec {
    pub fn new(mode: PartitionMode) -> Self {
        SnapshotSpec {
            mode,
            coalesce: Coalesce::default(),
            accumulation: Accumulation::default(),
        }
    }

    pub fn coalesce(mut self, coalesce: Coalesce) -> Self {
        self.coalesce = coalesce;
        self
    }

    pub fn accumulation(mut self, accumulation: Accumulation) -> Self {
        self.accumulation = accumulation;
        self
    }

    fn validate(&self) -> Result<(), SnapshotError> {
        let ok = match self.mode {
            PartitionMode::FixedWidth { width } => width > 0.0 && width.is_finite(),
            PartitionMode::FixedCount { count } => count >= 1,
            PartitionMode::FixedEvents { events } => events >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(SnapshotError::InvalidSpec(self.mode))
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SnapshotError {
    #[error("invalid partition {0:?}")]
    InvalidSpec(PartitionMode),
    #[error("snapshot {index} has {found} nodes, expected {expected}")]
    NodeCountMismatch { index: usize, expected: usize, found: usize },
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnapshotEdge {
    pub src: NodeId,
    pub dst: NodeId,
    /// Multiplicity: 1 for `KeepAll` and `Last`, surviving add count for
    /// `CountWeight`.
    pub weight: u64,
    /// Representative time (the add itself for `KeepAll`, else the latest).
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub index: usize,
    pub start: f64,
    pub end: f64,
    /// The final window of a time partition (and every event slice) includes
    /// its end point.
    pub end_inclusive: bool,
    pub node_count: usize,
    /// Sorted by `(src, dst, t)`.
    pub edges: Vec<SnapshotEdge>,
    /// Per-node activity, present only when the stream has node events.
    pub active: Option<Vec<bool>>,
}

impl Snapshot {
    pub fn total_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && (t < self.end || (self.end_inclusive && t == self.end))
    }
}

/// Windows expressed as event index ranges into the sorted stream.
struct Window {
    start: f64,
    end: f64,
    end_inclusive: bool,
    lo: usize,
    hi: usize,
}

fn time_windows(g: &TemporalGraph, bounds: &[f64], last_end: f64, last_inclusive: bool) -> Vec<Window> {
    let n = bounds.len();
    (0..n)
        .map(|i| {
            let lo = if i == 0 { 0 } else { g.partition_before(bounds[i]) };
            let last = i + 1 == n;
            let hi = if last { g.num_events() } else { g.partition_before(bounds[i + 1]) };
            Window {
                start: bounds[i],
                end: if last { last_end } else { bounds[i + 1] },
                end_inclusive: last && last_inclusive,
                lo,
                hi: hi.max(lo),
            }
        })
        .collect()
}

fn windows(g: &TemporalGraph, mode: PartitionMode) -> Vec<Window> {
    let (t_min, t_max) = match (g.t_min(), g.t_max()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Vec::new(),
    };
    match mode {
        PartitionMode::FixedWidth { width } => {
            let mut n = ((t_max - t_min) / width).floor() as usize + 1;
            while t_min + n as f64 * width <= t_max {
                n += 1;
            }
            while n > 1 && t_min + (n - 1) as f64 * width > t_max {
                n -= 1;
            }
            let bounds: Vec<f64> = (0..n).map(|i| t_min + i as f64 * width).collect();
            time_windows(g, &bounds, t_min + n as f64 * width, false)
        }
        PartitionMode::FixedCount { count } => {
            let width = (t_max - t_min) / count as f64;
            let bounds: Vec<f64> = (0..count).map(|i| t_min + i as f64 * width).collect();
            time_windows(g, &bounds, t_max, true)
        }
        PartitionMode::FixedEvents { events } => {
            let evs = g.events();
            (0..evs.len())
                .step_by(events)
                .map(|lo| {
                    let hi = (lo + events).min(evs.len());
                    Window {
                        start: evs[lo].time(),
                        end: evs[hi - 1].time(),
                        end_inclusive: true,
                        lo,
                        hi,
                    }
                })
                .collect()
        }
    }
}

/// Accumulated edge state for replaying events.
#[derive(Default)]
struct Replay {
    adds: IndexMap<(NodeId, NodeId), Vec<(f64, EventId)>>,
    active: Option<Vec<bool>>,
}

impl Replay {
    fn new(g: &TemporalGraph) -> Self {
        let has_node_events = g.events().iter().any(|e| !e.kind.is_edge());
        Replay {
            adds: IndexMap::new(),
            active: has_node_events.then(|| vec![true; g.num_nodes()]),
        }
    }

    fn apply(&mut self, e: &Event) {
        match e.kind {
            EventKind::EdgeAdd => self.adds.entry(e.pair().unwrap()).or_default().push((e.time(), e.id)),
            EventKind::EdgeDelete => {
                self.adds.shift_remove(&e.pair().unwrap());
            }
            EventKind::NodeAdd => self.set_active(e.src, true),
            EventKind::NodeDelete => self.set_active(e.src, false),
            EventKind::NodeUpdate => {}
        }
    }

    fn set_active(&mut self, node: NodeId, on: bool) {
        if let Some(mask) = self.active.as_mut() {
            mask[node as usize] = on;
        }
    }

    fn edges(&self, coalesce: Coalesce) -> Vec<SnapshotEdge> {
        let mut out = Vec::new();
        for (&(src, dst), adds) in &self.adds {
            let Some(&(last_t, _)) = adds.last() else { continue };
            match coalesce {
                Coalesce::KeepAll => out.extend(adds.iter().map(|&(t, _)| SnapshotEdge { src, dst, weight: 1, t })),
                Coalesce::Last => out.push(SnapshotEdge { src, dst, weight: 1, t: last_t }),
                Coalesce::CountWeight => out.push(SnapshotEdge {
                    src,
                    dst,
                    weight: adds.len() as u64,
                    t: last_t,
                }),
            }
        }
        out.sort_by(|a, b| (a.src, a.dst).cmp(&(b.src, b.dst)).then(a.t.total_cmp(&b.t)));
        out
    }
}

/// Discretizes `g` into a snapshot sequence.
pub fn make_snapshots(g: &TemporalGraph, spec: &SnapshotSpec) -> Result<Vec<Snapshot>, SnapshotError> {
    spec.validate()?;
    let events = g.events();
    let mut cumulative = Replay::new(g);
    let mut node_state = Replay::new(g);
    let mut consumed = 0;
    let mut out = Vec::new();

    for (index, w) in windows(g, spec.mode).into_iter().enumerate() {
        // Node activity always accumulates from the start of the stream.
        for e in &events[consumed..w.hi] {
            if !e.kind.is_edge() {
                node_state.apply(e);
            }
        }
        let edges = match spec.accumulation {
            Accumulation::Cumulative => {
                for e in &events[consumed..w.hi] {
                    cumulative.apply(e);
                }
                cumulative.edges(spec.coalesce)
            }
            Accumulation::Interval => {
                let mut local = Replay::default();
                for e in &events[w.lo..w.hi] {
                    local.apply(e);
                }
                local.edges(spec.coalesce)
            }
        };
        consumed = w.hi;
        out.push(Snapshot {
            index,
            start: w.start,
            end: w.end,
            end_inclusive: w.end_inclusive,
            node_count: g.num_nodes(),
            edges,
            active: node_state.active.clone(),
        });
    }
    Ok(out)
}

/// Collapses the whole stream into one static graph, applying deletions.
pub fn to_static(g: &TemporalGraph, coalesce: Coalesce) -> Snapshot {
    let mut replay = Replay::new(g);
    for e in g.events() {
        replay.apply(e);
    }
    Snapshot {
        index: 0,
        start: g.t_min().unwrap_or(0.0),
        end: g.t_max().unwrap_or(0.0),
        end_inclusive: true,
        node_count: g.num_nodes(),
        edges: replay.edges(coalesce),
        active: replay.active,
    }
}

/// Re-expresses a snapshot sequence as a stream: every edge of snapshot `i`
/// becomes `weight` adds at `t = i`.
pub fn snapshots_to_events(snaps: &[Snapshot]) -> Result<TemporalGraph, SnapshotError> {
    let n = snaps.first().map_or(0, |s| s.node_count);
    for (index, s) in snaps.iter().enumerate() {
        if s.node_count != n {
            return Err(SnapshotError::NodeCountMismatch {
                index,
                expected: n,
                found: s.node_count,
            });
        }
    }
    let events = snaps.iter().enumerate().flat_map(|(i, s)| {
        s.edges.iter().flat_map(move |e| {
            std::iter::repeat_n((EventKind::EdgeAdd, e.src, Some(e.dst), i as f64), e.weight as usize)
        })
    });
    Ok(TemporalGraph::from_dense(n, events)?)
}
