//! Canonical in-memory temporal graph: a validated, chronologically sorted
//! stream of node and edge events over a dense node-id space.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

/// Dense node identifier in `0..num_nodes`.
pub type NodeId = u32;

/// Ingestion ordinal of an event, dense in `0..num_events`.
pub type EventId = u32;

/// A finite point in time. Units are whatever the dataset uses.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct Timestamp(f64);

impl Timestamp {
    /// Returns `None` for NaN or infinite values.
    pub fn new(t: f64) -> Option<Self> {
        t.is_finite().then_some(Timestamp(t))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

// Total order is sound because construction rejects NaN.
impl Eq for Timestamp {}

impl Ord for Timestamp {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<Timestamp> for f64 {
    fn from(t: Timestamp) -> f64 {
        t.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    EdgeAdd,
    EdgeDelete,
    NodeAdd,
    NodeDelete,
    NodeUpdate,
}

impl EventKind {
    pub fn is_edge(self) -> bool {
        matches!(self, EventKind::EdgeAdd | EventKind::EdgeDelete)
    }

    /// Stable one-byte code used by the binary cache.
    pub fn code(self) -> u8 {
        match self {
            EventKind::EdgeAdd => 0,
            EventKind::EdgeDelete => 1,
            EventKind::NodeAdd => 2,
            EventKind::NodeDelete => 3,
            EventKind::NodeUpdate => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => EventKind::EdgeAdd,
            1 => EventKind::EdgeDelete,
            2 => EventKind::NodeAdd,
            3 => EventKind::NodeDelete,
            4 => EventKind::NodeUpdate,
            _ => return None,
        })
    }

    /// Name used in CSV `kind` columns.
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::EdgeAdd => "add",
            EventKind::EdgeDelete => "delete",
            EventKind::NodeAdd => "node_add",
            EventKind::NodeDelete => "node_delete",
            EventKind::NodeUpdate => "node_update",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "add" | "edge_add" => EventKind::EdgeAdd,
            "delete" | "edge_delete" => EventKind::EdgeDelete,
            "node_add" => EventKind::NodeAdd,
            "node_delete" => EventKind::NodeDelete,
            "node_update" => EventKind::NodeUpdate,
            _ => return None,
        })
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    pub id: EventId,
    pub kind: EventKind,
    pub src: NodeId,
    /// Present iff `kind` is an edge event.
    pub dst: Option<NodeId>,
    pub t: Timestamp,
    pub feature_ref: Option<u32>,
    pub label: Option<i32>,
}

impl Event {
    #[inline]
    pub fn time(&self) -> f64 {
        self.t.get()
    }

    /// `(src, dst)` for edge events.
    #[inline]
    pub fn pair(&self) -> Option<(NodeId, NodeId)> {
        self.dst.map(|d| (self.src, d))
    }
}

/// One unvalidated input record, keyed by raw (string) node ids.
#[derive(Clone, Debug, PartialEq)]
pub struct RawEvent {
    pub kind: EventKind,
    pub src: String,
    pub dst: Option<String>,
    pub t: f64,
    pub label: Option<i32>,
    pub has_features: bool,
}

impl RawEvent {
    pub fn edge(src: impl Into<String>, dst: impl Into<String>, t: f64) -> Self {
        RawEvent {
            kind: EventKind::EdgeAdd,
            src: src.into(),
            dst: Some(dst.into()),
            t,
            label: None,
            has_features: false,
        }
    }

    pub fn with_kind(mut self, kind: EventKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn node(kind: EventKind, node: impl Into<String>, t: f64) -> Self {
        RawEvent {
            kind,
            src: node.into(),
            dst: None,
            t,
            label: None,
            has_features: false,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    #[error("record {index}: timestamp {t} is not finite")]
    NonFiniteTimestamp { index: usize, t: f64 },
    #[error("record {index}: {kind} event requires a destination node")]
    MissingDestination { index: usize, kind: EventKind },
    #[error("record {index}: {kind} event must not carry a destination node")]
    UnexpectedDestination { index: usize, kind: EventKind },
    #[error("record {index}: node id {node} out of range for {num_nodes} nodes")]
    NodeOutOfRange { index: usize, node: NodeId, num_nodes: usize },
    #[error("{0} events exceed the 32-bit event id space")]
    TooManyEvents(usize),
    #[error("vocabulary has {found} ids but the graph has {expected} nodes")]
    VocabularySize { expected: usize, found: usize },
    #[error("raw id `{0}` appears twice in the vocabulary")]
    DuplicateRawId(String),
}

/// Bidirectional raw-id <-> dense-id mapping.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IdVocabulary {
    raw: Vec<String>,
    dense: HashMap<String, NodeId>,
}

impl IdVocabulary {
    /// Vocabulary whose raw ids are the decimal strings `"0".."n-1"`.
    pub fn identity(n: usize) -> Self {
        let mut vocab = IdVocabulary::default();
        for i in 0..n {
            vocab.intern(&i.to_string());
        }
        vocab
    }

    /// Vocabulary mapping dense id `i` to `raw[i]`.
    pub fn from_raw(raw: Vec<String>) -> Result<Self, IngestError> {
        let mut vocab = IdVocabulary::default();
        for r in raw {
            if vocab.dense.contains_key(&r) {
                return Err(IngestError::DuplicateRawId(r));
            }
            vocab.intern(&r);
        }
        Ok(vocab)
    }

    /// Raw ids in dense-id order.
    pub fn raw_ids(&self) -> &[String] {
        &self.raw
    }

    fn intern(&mut self, raw: &str) -> NodeId {
        if let Some(&id) = self.dense.get(raw) {
            return id;
        }
        let id = self.raw.len() as NodeId;
        self.raw.push(raw.to_owned());
        self.dense.insert(raw.to_owned(), id);
        id
    }

    pub fn to_dense(&self, raw: &str) -> Option<NodeId> {
        self.dense.get(raw).copied()
    }

    pub fn to_raw(&self, id: NodeId) -> Option<&str> {
        self.raw.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }
}

/// Immutable, chronologically ordered event store.
///
/// Events are sorted by `(t, id)`; `id` is the ingestion ordinal. Node ids are
/// dense and every id below `num_nodes` has a raw name in the vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct TemporalGraph {
    num_nodes: usize,
    events: Vec<Event>,
    vocab: IdVocabulary,
}

impl TemporalGraph {
    /// Builds a graph from raw records, remapping raw ids to dense ids in
    /// first-appearance order and stably sorting by timestamp.
    pub fn ingest<I>(records: I) -> Result<Self, IngestError>
    where
        I: IntoIterator<Item = RawEvent>,
    {
        let mut vocab = IdVocabulary::default();
        let mut events = Vec::new();
        for (index, rec) in records.into_iter().enumerate() {
            let t = Timestamp::new(rec.t).ok_or(IngestError::NonFiniteTimestamp { index, t: rec.t })?;
            match (rec.kind.is_edge(), rec.dst.is_some()) {
                (true, false) => return Err(IngestError::MissingDestination { index, kind: rec.kind }),
                (false, true) => return Err(IngestError::UnexpectedDestination { index, kind: rec.kind }),
                _ => {}
            }
            let src = vocab.intern(&rec.src);
            let dst = rec.dst.as_deref().map(|d| vocab.intern(d));
            if index > EventId::MAX as usize {
                return Err(IngestError::TooManyEvents(index + 1));
            }
            events.push(Event {
                id: index as EventId,
                kind: rec.kind,
                src,
                dst,
                t,
                feature_ref: rec.has_features.then_some(index as u32),
                label: rec.label,
            });
        }
        Ok(Self::from_parts(vocab.len(), events, vocab))
    }

    /// Builds a graph over dense ids `0..num_nodes` with an identity
    /// vocabulary. Events are assigned ids in the given order, then sorted.
    pub fn from_dense<I>(num_nodes: usize, events: I) -> Result<Self, IngestError>
    where
        I: IntoIterator<Item = (EventKind, NodeId, Option<NodeId>, f64)>,
    {
        let mut out = Vec::new();
        for (index, (kind, src, dst, t)) in events.into_iter().enumerate() {
            let t = Timestamp::new(t).ok_or(IngestError::NonFiniteTimestamp { index, t })?;
            match (kind.is_edge(), dst.is_some()) {
                (true, false) => return Err(IngestError::MissingDestination { index, kind }),
                (false, true) => return Err(IngestError::UnexpectedDestination { index, kind }),
                _ => {}
            }
            for node in std::iter::once(src).chain(dst) {
                if node as usize >= num_nodes {
                    return Err(IngestError::NodeOutOfRange { index, node, num_nodes });
                }
            }
            if index > EventId::MAX as usize {
                return Err(IngestError::TooManyEvents(index + 1));
            }
            out.push(Event {
                id: index as EventId,
                kind,
                src,
                dst,
                t,
                feature_ref: None,
                label: None,
            });
        }
        Ok(Self::from_parts(num_nodes, out, IdVocabulary::identity(num_nodes)))
    }

    /// Convenience for edge-add-only streams over dense ids.
    pub fn from_edges(num_nodes: usize, edges: &[(NodeId, NodeId, f64)]) -> Result<Self, IngestError> {
        Self::from_dense(
            num_nodes,
            edges.iter().map(|&(u, v, t)| (EventKind::EdgeAdd, u, Some(v), t)),
        )
    }

    /// Assembles a graph from already-validated parts. Events are re-sorted
    /// by `(t, id)`.
    pub(crate) fn from_parts(num_nodes: usize, mut events: Vec<Event>, vocab: IdVocabulary) -> Self {
        events.sort_by(|a, b| a.t.cmp(&b.t).then(a.id.cmp(&b.id)));
        debug_assert!(vocab.len() >= num_nodes);
        TemporalGraph { num_nodes, events, vocab }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Replaces the raw-id vocabulary; it must name exactly `num_nodes` ids.
    pub fn with_vocabulary(mut self, vocab: IdVocabulary) -> Result<Self, IngestError> {
        if vocab.len() != self.num_nodes {
            return Err(IngestError::VocabularySize {
                expected: self.num_nodes,
                found: vocab.len(),
            });
        }
        self.vocab = vocab;
        Ok(self)
    }

    pub fn num_events(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Events in `(t, id)` order.
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn vocabulary(&self) -> &IdVocabulary {
        &self.vocab
    }

    pub fn t_min(&self) -> Option<f64> {
        self.events.first().map(Event::time)
    }

    pub fn t_max(&self) -> Option<f64> {
        self.events.last().map(Event::time)
    }

    /// Index of the first event with `t >= time` (equivalently, the number
    /// of events strictly before `time`).
    pub fn partition_before(&self, time: f64) -> usize {
        self.events.partition_point(|e| e.time() < time)
    }

    /// Events with `t` in `[start, end)`.
    pub fn events_in(&self, start: f64, end: f64) -> &[Event] {
        let lo = self.partition_before(start);
        let hi = self.partition_before(end).max(lo);
        &self.events[lo..hi]
    }

    pub fn edge_adds(&self) -> impl Iterator<Item = &Event> + '_ {
        self.events.iter().filter(|e| e.kind == EventKind::EdgeAdd)
    }

    pub fn num_edge_adds(&self) -> usize {
        self.edge_adds().count()
    }

    /// Re-expresses the sorted stream as raw records (raw ids restored).
    pub fn to_raw_events(&self) -> Vec<RawEvent> {
        self.events
            .iter()
            .map(|e| RawEvent {
                kind: e.kind,
                src: self.raw_id(e.src).to_owned(),
                dst: e.dst.map(|d| self.raw_id(d).to_owned()),
                t: e.time(),
                label: e.label,
                has_features: e.feature_ref.is_some(),
            })
            .collect()
    }

    fn raw_id(&self, id: NodeId) -> &str {
        self.vocab.to_raw(id).expect("vocabulary covers every dense id")
    }

    /// Advisory consistency checks; never mutates the graph.
    pub fn validate(&self) -> ValidationReport {
        let mut findings = Vec::new();
        let mut live: HashMap<(NodeId, NodeId), usize> = HashMap::new();
        let mut deleted: HashSet<NodeId> = HashSet::new();
        let mut seen: HashMap<(EventKind, NodeId, Option<NodeId>, u64), EventId> = HashMap::new();

        for e in &self.events {
            let key = (e.kind, e.src, e.dst, e.time().to_bits());
            if let Some(&first) = seen.get(&key) {
                findings.push(Finding::Duplicate { event: e.id, first });
            } else {
                seen.insert(key, e.id);
            }

            for node in std::iter::once(e.src).chain(e.dst) {
                if deleted.contains(&node) && e.kind != EventKind::NodeAdd {
                    findings.push(Finding::DeletedNodeReference { event: e.id, node });
                }
            }

            match e.kind {
                EventKind::EdgeAdd => *live.entry((e.src, e.dst.unwrap())).or_default() += 1,
                EventKind::EdgeDelete => {
                    let pair = (e.src, e.dst.unwrap());
                    match live.get_mut(&pair) {
                        Some(n) if *n > 0 => *n -= 1,
                        _ => findings.push(Finding::DeleteWithoutAdd { event: e.id, src: pair.0, dst: pair.1 }),
                    }
                }
                EventKind::NodeDelete => {
                    deleted.insert(e.src);
                }
                EventKind::NodeAdd => {
                    deleted.remove(&e.src);
                }
                EventKind::NodeUpdate => {}
            }
        }
        ValidationReport { findings }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Finding {
    /// An `EdgeDelete` with no live matching `EdgeAdd` before it.
    DeleteWithoutAdd { event: EventId, src: NodeId, dst: NodeId },
    /// An event touching a node after that node's `NodeDelete`.
    DeletedNodeReference { event: EventId, node: NodeId },
    /// Same `(kind, src, dst, t)` as an earlier event.
    Duplicate { event: EventId, first: EventId },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::DeleteWithoutAdd { event, src, dst } => {
                write!(f, "event {event}: delete of ({src},{dst}) without prior add")
            }
            Finding::DeletedNodeReference { event, node } => {
                write!(f, "event {event}: references deleted node {node}")
            }
            Finding::Duplicate { event, first } => write!(f, "event {event}: duplicate of event {first}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }
}
