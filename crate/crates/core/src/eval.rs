//! Chronological splitting, ranking metrics, scorer contracts and the link
//! prediction / node classification evaluation pipelines.
//!
//! Tie conventions differ per metric and are deliberate:
//! * AUC and MRR use average ranks: a tie counts half.
//! * AP ranks tied negatives above tied positives (pessimistic), so a 0/1
//!   scorer gets no free precision from ties.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{Event, EventKind, NodeId, TemporalGraph};
use crate::index::Directionality;
use crate::negatives::{NegativeBatch, NegativeError, NegativeSampler, NegativeSpec, NegativeStrategy};
use crate::rng::RngState;
use crate::sampling::{link_windows, LinkWindow, SamplingError};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("split ratios must be positive and sum to 1, got {0:?}")]
    InvalidRatios((f64, f64, f64)),
    #[error("need at least 3 edge additions to split, got {0}")]
    TooFewEdges(usize),
    #[error("degenerate split: the {0} split is empty")]
    EmptySplit(&'static str),
    #[error("{0}")]
    Metric(&'static str),
    #[error("no labelled nodes to evaluate")]
    EmptyEvaluation,
    #[error("dynamic node classification needs a timestamp on every label (node {0})")]
    UntimedLabel(NodeId),
    #[error(transparent)]
    Negatives(#[from] NegativeError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

/// The event stream as visible at `cutoff`: only events strictly before it.
#[derive(Clone, Copy, Debug)]
pub struct HistoryView<'g> {
    graph: &'g TemporalGraph,
    cutoff: f64,
    visible: &'g [Event],
}

impl<'g> HistoryView<'g> {
    pub fn new(graph: &'g TemporalGraph, cutoff: f64) -> Self {
        let visible = &graph.events()[..graph.partition_before(cutoff)];
        HistoryView { graph, cutoff, visible }
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    /// Visible events, in stream order.
    pub fn events(&self) -> &'g [Event] {
        self.visible
    }
}

/// A link scorer sees the graph only through [`HistoryView`]s and is
/// advanced chronologically, once per evaluation batch.
pub trait LinkScorer {
    fn name(&self) -> &str;

    /// Called with the history before each batch start, in time order.
    fn advance(&mut self, history: &HistoryView<'_>);

    /// Score for a future link `(u, v)` at time `t >= history.cutoff()`.
    fn score(&self, history: &HistoryView<'_>, u: NodeId, v: NodeId, t: f64) -> f64;
}

/// Encodes a node's temporal context (e.g. elapsed time since its last
/// interaction).
pub trait TimeEncoder {
    fn encode(&self, history: &HistoryView<'_>, node: NodeId, t: f64) -> Vec<f64>;
}

/// Encodes a node's structural context.
pub trait GraphEncoder {
    fn encode(&self, history: &HistoryView<'_>, node: NodeId, t: f64) -> Vec<f64>;
}

/// Turns the encodings of both endpoints into a link score.
pub trait LinkDecoder {
    fn decode(&self, time: (&[f64], &[f64]), graph: (&[f64], &[f64])) -> f64;
}

/// A scorer assembled from time-encoding, structure-encoding and decoding
/// stages. Stateless between batches.
pub struct StagedScorer<T, G, D> {
    pub name: String,
    pub time: T,
    pub graph: G,
    pub decoder: D,
}

impl<T: TimeEncoder, G: GraphEncoder, D: LinkDecoder> LinkScorer for StagedScorer<T, G, D> {
    fn name(&self) -> &str {
        &self.name
    }

    fn advance(&mut self, _history: &HistoryView<'_>) {}

    fn score(&self, history: &HistoryView<'_>, u: NodeId, v: NodeId, t: f64) -> f64 {
        let (tu, tv) = (self.time.encode(history, u, t), self.time.encode(history, v, t));
        let (gu, gv) = (self.graph.encode(history, u, t), self.graph.encode(history, v, t));
        self.decoder.decode((&tu, &tv), (&gu, &gv))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitSpec {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train: 0.70,
            val: 0.15,
            test: 0.15,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitTag {
    Train,
    Val,
    Test,
}

impl SplitTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Val => "val",
            SplitTag::Test => "test",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChronoSplit {
    /// Train is `t < t_train_end`.
    pub t_train_end: f64,
    /// Validation is `t_train_end <= t < t_val_end`; test is the rest.
    pub t_val_end: f64,
    /// One tag per event, aligned with `g.events()`.
    pub tags: Vec<SplitTag>,
    /// True for test edge adds with an endpoint that has no add before
    /// `t_val_end`; aligned with `g.events()`.
    pub unseen_node: Vec<bool>,
}

impl ChronoSplit {
    pub fn tag_at(&self, t: f64) -> SplitTag {
        if t < self.t_train_end {
            SplitTag::Train
        } else if t < self.t_val_end {
            SplitTag::Val
        } else {
            SplitTag::Test
        }
    }
}

/// Splits at empirical time quantiles of the edge-add timestamps. The
/// boundary for a cumulative fraction `r` is the timestamp of the add at
/// sorted position `ceil(r * E)`, so ties never straddle a boundary.
pub fn chronological_split(g: &TemporalGraph, spec: &SplitSpec) -> Result<ChronoSplit, EvalError> {
    let ratios = (spec.train, spec.val, spec.test);
    let all_positive = [spec.train, spec.val, spec.test].iter().all(|&r| r > 0.0);
    if !all_positive || (spec.train + spec.val + spec.test - 1.0).abs() > 1e-9 {
        return Err(EvalError::InvalidRatios(ratios));
    }
    let times: Vec<f64> = g.edge_adds().map(Event::time).collect();
    let e = times.len();
    if e < 3 {
        return Err(EvalError::TooFewEdges(e));
    }
    let boundary = |r: f64| -> f64 {
        let pos = (r * e as f64 - 1e-9).ceil().max(0.0) as usize;
        times.get(pos).copied().unwrap_or(f64::INFINITY)
    };
    let t_train_end = boundary(spec.train);
    let t_val_end = boundary(spec.train + spec.val);

    let split = ChronoSplit {
        t_train_end,
        t_val_end,
        tags: Vec::new(),
        unseen_node: Vec::new(),
    };
    let counts = times.iter().fold([0usize; 3], |mut c, &t| {
        c[split.tag_at(t) as usize] += 1;
        c
    });
    for (i, name) in ["train", "validation", "test"].into_iter().enumerate() {
        if counts[i] == 0 {
            return Err(EvalError::EmptySplit(name));
        }
    }

    let mut seen = vec![false; g.num_nodes()];
    for ev in g.events_in(f64::NEG_INFINITY, t_val_end) {
        if ev.kind == EventKind::EdgeAdd {
            seen[ev.src as usize] = true;
            seen[ev.dst.unwrap() as usize] = true;
        }
    }
    let tags: Vec<SplitTag> = g.events().iter().map(|ev| split.tag_at(ev.time())).collect();
    let unseen_node = g
        .events()
        .iter()
        .zip(&tags)
        .map(|(ev, &tag)| {
            tag == SplitTag::Test
                && ev.kind == EventKind::EdgeAdd
                && (!seen[ev.src as usize] || !seen[ev.dst.unwrap() as usize])
        })
        .collect();
    Ok(ChronoSplit { tags, unseen_node, ..split })
}

fn check_scores(xs: &[f64], what: &'static str) -> Result<(), EvalError> {
    if xs.is_empty() {
        return Err(EvalError::Metric(what));
    }
    if xs.iter().any(|x| x.is_nan()) {
        return Err(EvalError::Metric("scores must not be NaN"));
    }
    Ok(())
}

/// Area under the ROC curve with half credit for ties (Mann-Whitney U over
/// average ranks).
pub fn auc(pos: &[f64], neg: &[f64]) -> Result<f64, EvalError> {
    check_scores(pos, "AUC needs at least one positive score")?;
    check_scores(neg, "AUC needs at least one negative score")?;
    let mut all: Vec<(f64, bool)> = pos.iter().map(|&s| (s, true)).chain(neg.iter().map(|&s| (s, false))).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        // Ranks i+1..=j share their mean.
        let avg = (i + 1 + j) as f64 / 2.0;
        let npos = all[i..j].iter().filter(|x| x.1).count();
        rank_sum_pos += avg * npos as f64;
        i = j;
    }
    let (p, n) = (pos.len() as f64, neg.len() as f64);
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

/// Average precision with pessimistic ties: within a group of equal scores,
/// all negatives are ranked ahead of all positives.
pub fn average_precision(pos: &[f64], neg: &[f64]) -> Result<f64, EvalError> {
    check_scores(pos, "AP needs at least one positive score")?;
    check_scores(neg, "AP needs at least one negative score")?;
    let mut all: Vec<(f64, bool)> = pos.iter().map(|&s| (s, true)).chain(neg.iter().map(|&s| (s, false))).collect();
    // Descending score; negatives (false) before positives on ties.
    all.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, &(_, is_pos)) in all.iter().enumerate() {
        if is_pos {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(sum / pos.len() as f64)
}

/// Mean reciprocal rank of each positive among its own negatives, with
/// rank `1 + #greater + #equal / 2`.
pub fn mrr(groups: &[(f64, Vec<f64>)]) -> Result<f64, EvalError> {
    if groups.is_empty() {
        return Err(EvalError::Metric("MRR needs at least one positive"));
    }
    let mut sum = 0.0;
    for (p, negs) in groups {
        if p.is_nan() || negs.iter().any(|x| x.is_nan()) {
            return Err(EvalError::Metric("scores must not be NaN"));
        }
        let greater = negs.iter().filter(|&&n| n > *p).count();
        let equal = negs.iter().filter(|&&n| n == *p).count();
        sum += 1.0 / (1.0 + greater as f64 + equal as f64 / 2.0);
    }
    Ok(sum / groups.len() as f64)
}

/// Metrics for one slice of positives.
#[derive(Clone, Debug, PartialEq)]
pub struct RankingMetrics {
    pub positives: usize,
    pub auc: f64,
    pub ap: f64,
    pub mrr: f64,
}

impl RankingMetrics {
    fn compute(groups: &[(f64, Vec<f64>)], all_neg: &[f64]) -> Result<Self, EvalError> {
        let pos: Vec<f64> = groups.iter().map(|g| g.0).collect();
        let ranked: Vec<(f64, Vec<f64>)> = groups.iter().filter(|g| !g.1.is_empty()).cloned().collect();
        Ok(RankingMetrics {
            positives: pos.len(),
            auc: auc(&pos, all_neg)?,
            ap: average_precision(&pos, all_neg)?,
            mrr: mrr(&ranked)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinkMetrics {
    pub scorer: String,
    pub strategy: NegativeStrategy,
    pub overall: RankingMetrics,
    /// Test positives touching a node unseen before the test period.
    pub unseen: Option<RankingMetrics>,
    pub negatives: usize,
    pub batches: usize,
    pub saturated: usize,
    pub shortfall: usize,
    pub topped_up: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeMetrics {
    pub scorer: String,
    pub dynamic: bool,
    pub evaluated: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
}

/// Flat, ordered key/value view of a metrics report.
pub trait Report {
    fn entries(&self) -> Vec<(String, String)>;

    /// `key=value` lines.
    fn to_kv_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    /// Header line plus one data row.
    fn to_csv(&self) -> String {
        let entries = self.entries();
        let header: Vec<&str> = entries.iter().map(|(k, _)| k.as_str()).collect();
        let row: Vec<&str> = entries.iter().map(|(_, v)| v.as_str()).collect();
        format!("{}\n{}\n", header.join(","), row.join(","))
    }
}

fn strategy_name(s: NegativeStrategy) -> &'static str {
    match s {
        NegativeStrategy::Random => "random",
        NegativeStrategy::Historical => "historical",
    }
}

impl Report for LinkMetrics {
    fn entries(&self) -> Vec<(String, String)> {
        let mut e = vec![
            ("task".to_owned(), "link".to_owned()),
            ("scorer".to_owned(), self.scorer.clone()),
            ("negatives".to_owned(), strategy_name(self.strategy).to_owned()),
            ("batches".to_owned(), self.batches.to_string()),
            ("positives".to_owned(), self.overall.positives.to_string()),
            (format!("negatives_{}", strategy_name(self.strategy)), self.negatives.to_string()),
            ("auc".to_owned(), self.overall.auc.to_string()),
            ("ap".to_owned(), self.overall.ap.to_string()),
            ("mrr".to_owned(), self.overall.mrr.to_string()),
        ];
        let (n, a, p, m) = match &self.unseen {
            Some(u) => (u.positives.to_string(), u.auc.to_string(), u.ap.to_string(), u.mrr.to_string()),
            None => ("0".into(), "na".into(), "na".into(), "na".into()),
        };
        e.extend([
            ("unseen_positives".to_owned(), n),
            ("unseen_auc".to_owned(), a),
            ("unseen_ap".to_owned(), p),
            ("unseen_mrr".to_owned(), m),
            ("saturated".to_owned(), self.saturated.to_string()),
            ("shortfall".to_owned(), self.shortfall.to_string()),
            ("topped_up".to_owned(), self.topped_up.to_string()),
        ]);
        e
    }
}

impl Report for NodeMetrics {
    fn entries(&self) -> Vec<(String, String)> {
        vec![
            ("task".to_owned(), "node".to_owned()),
            ("scorer".to_owned(), self.scorer.clone()),
            ("mode".to_owned(), if self.dynamic { "dynamic" } else { "static" }.to_owned()),
            ("evaluated".to_owned(), self.evaluated.to_string()),
            ("accuracy".to_owned(), self.accuracy.to_string()),
            ("macro_f1".to_owned(), self.macro_f1.to_string()),
        ]
    }
}

/// Chronological windows over the test-period edge additions.
pub fn test_windows<'g>(g: &'g TemporalGraph, split: &ChronoSplit, batch_size: usize) -> Result<Vec<LinkWindow<'g>>, EvalError> {
    let edges: Vec<&Event> = g
        .edge_adds()
        .filter(|e| e.time() >= split.t_val_end)
        .collect();
    Ok(link_windows(&edges, batch_size)?)
}

/// Draws the negatives for window number `batch`. Each window has its own
/// random stream, so any window can be regenerated in isolation.
pub fn window_negatives(
    sampler: &mut NegativeSampler<'_>,
    spec: &NegativeSpec,
    batch: usize,
    window: &LinkWindow<'_>,
) -> Result<NegativeBatch, EvalError> {
    let positives: Vec<(NodeId, NodeId)> = window.positives.iter().map(|e| e.pair().unwrap()).collect();
    let mut rng = RngState::new(spec.seed).with_stream(batch as u64).generator();
    let bounds = (window.t_start, window.t_end);
    let q = spec.per_positive;
    Ok(match spec.strategy {
        NegativeStrategy::Random => sampler.random(bounds, &positives, q, spec.corruption, &mut rng)?,
        NegativeStrategy::Historical => {
            sampler.historical(bounds, q * positives.len(), spec.fallback, &positives, spec.corruption, &mut rng)?
        }
    })
}

/// Streams the test period in chronological batches. For each batch the
/// scorer is advanced to the batch start, negatives are drawn, and every
/// positive and negative is scored against the history before the batch.
pub fn evaluate_link_prediction(
    g: &TemporalGraph,
    split: &ChronoSplit,
    scorer: &mut dyn LinkScorer,
    negatives: &NegativeSpec,
    batch_size: usize,
    directionality: Directionality,
) -> Result<LinkMetrics, EvalError> {
    let windows = test_windows(g, split, batch_size)?;
    let mut sampler = NegativeSampler::new(g, directionality)?;
    let q = negatives.per_positive;
    let unseen: HashSet<u32> = g
        .events()
        .iter()
        .zip(&split.unseen_node)
        .filter(|(_, &u)| u)
        .map(|(e, _)| e.id)
        .collect();

    let mut groups: Vec<(f64, Vec<f64>, bool)> = Vec::new();
    let mut all_neg = Vec::new();
    let (mut saturated, mut shortfall, mut topped_up) = (0, 0, 0);

    for (b, w) in windows.iter().enumerate() {
        let history = HistoryView::new(g, w.t_start);
        scorer.advance(&history);
        let batch = window_negatives(&mut sampler, negatives, b, w)?;
        saturated += batch.saturated;
        shortfall += batch.shortfall;
        topped_up += batch.topped_up;

        // Random negatives belong to the positive they corrupt; historical
        // ones are dealt out to positives in chunks of `q`.
        let counts: Vec<usize> = if batch.per_positive.len() == w.positives.len() {
            batch.per_positive.clone()
        } else {
            let mut left = batch.pairs.len();
            (0..w.positives.len())
                .map(|_| {
                    let c = left.min(q);
                    left -= c;
                    c
                })
                .collect()
        };
        let mut offset = 0;
        for (e, &c) in w.positives.iter().zip(&counts) {
            let (u, v) = e.pair().unwrap();
            let t = e.time();
            let p = scorer.score(&history, u, v, t);
            let negs: Vec<f64> = batch.pairs[offset..offset + c]
                .iter()
                .map(|&(a, b)| scorer.score(&history, a, b, t))
                .collect();
            offset += c;
            all_neg.extend_from_slice(&negs);
            groups.push((p, negs, unseen.contains(&e.id)));
        }
    }

    let overall: Vec<(f64, Vec<f64>)> = groups.iter().map(|(p, n, _)| (*p, n.clone())).collect();
    let unseen_groups: Vec<(f64, Vec<f64>)> = groups.iter().filter(|g| g.2).map(|(p, n, _)| (*p, n.clone())).collect();
    let unseen_metrics = if unseen_groups.iter().any(|g| !g.1.is_empty()) {
        Some(RankingMetrics::compute(&unseen_groups, &all_neg)?)
    } else {
        None
    };
    Ok(LinkMetrics {
        scorer: scorer.name().to_owned(),
        strategy: negatives.strategy,
        overall: RankingMetrics::compute(&overall, &all_neg)?,
        unseen: unseen_metrics,
        negatives: all_neg.len(),
        batches: windows.len(),
        saturated,
        shortfall,
        topped_up,
    })
}

/// A class label for a node, optionally time-stamped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeLabel {
    pub node: NodeId,
    pub t: Option<f64>,
    pub class: i64,
}

/// A label as it becomes observable on the timeline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabelObservation {
    pub node: NodeId,
    pub t: f64,
    pub class: i64,
}

/// Every labelled event as a time-stamped label of its source node.
pub fn labels_from_events(g: &TemporalGraph) -> Vec<NodeLabel> {
    g.events()
        .iter()
        .filter_map(|e| {
            e.label.map(|class| NodeLabel {
                node: e.src,
                t: Some(e.time()),
                class: class as i64,
            })
        })
        .collect()
}

pub trait NodeScorer {
    fn name(&self) -> &str;

    /// Observations strictly before the end of the training period.
    fn fit(&mut self, train: &[LabelObservation]);

    /// Called with every observation strictly before the next query time,
    /// in time order.
    fn advance(&mut self, history: &[LabelObservation]);

    fn predict(&self, node: NodeId, t: f64) -> i64;
}

/// Predicts a node's most recent past label, falling back to the training
/// majority class (smallest class on count ties).
#[derive(Clone, Debug, Default)]
pub struct PersistenceBaseline {
    majority: i64,
    latest: HashMap<NodeId, i64>,
    cursor: usize,
}

impl NodeScorer for PersistenceBaseline {
    fn name(&self) -> &str {
        "persistence"
    }

    fn fit(&mut self, train: &[LabelObservation]) {
        let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
        for o in train {
            *counts.entry(o.class).or_default() += 1;
        }
        self.majority = counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map_or(0, |(&c, _)| c);
    }

    fn advance(&mut self, history: &[LabelObservation]) {
        if history.len() < self.cursor {
            self.latest.clear();
            self.cursor = 0;
        }
        for o in &history[self.cursor..] {
            self.latest.insert(o.node, o.class);
        }
        self.cursor = history.len();
    }

    fn predict(&self, node: NodeId, _t: f64) -> i64 {
        self.latest.get(&node).copied().unwrap_or(self.majority)
    }
}

/// Evaluates node classification over the test period.
///
/// Static mode keeps one label per node, observable from the node's first
/// appearance; test nodes are queried once at the start of the test period.
/// Dynamic mode evaluates every test-period label at its own timestamp.
pub fn evaluate_node_classification(
    g: &TemporalGraph,
    labels: &[NodeLabel],
    split: &ChronoSplit,
    scorer: &mut dyn NodeScorer,
    dynamic: bool,
) -> Result<NodeMetrics, EvalError> {
    let mut obs: Vec<LabelObservation> = Vec::with_capacity(labels.len());
    if dynamic {
        for l in labels {
            let t = l.t.ok_or(EvalError::UntimedLabel(l.node))?;
            obs.push(LabelObservation { node: l.node, t, class: l.class });
        }
    } else {
        let mut first_seen = vec![f64::INFINITY; g.num_nodes()];
        for e in g.events().iter().rev() {
            for n in std::iter::once(e.src).chain(e.dst) {
                first_seen[n as usize] = e.time();
            }
        }
        let mut taken = vec![false; g.num_nodes()];
        for l in labels {
            let i = l.node as usize;
            if i < taken.len() && !taken[i] && first_seen[i].is_finite() {
                taken[i] = true;
                obs.push(LabelObservation { node: l.node, t: first_seen[i], class: l.class });
            }
        }
    }
    obs.sort_by(|a, b| a.t.total_cmp(&b.t));

    let train_end = obs.partition_point(|o| o.t < split.t_train_end);
    scorer.fit(&obs[..train_end]);
    let test_start = obs.partition_point(|o| o.t < split.t_val_end);
    if test_start == obs.len() {
        return Err(EvalError::EmptyEvaluation);
    }

    let mut truth = Vec::new();
    let mut pred = Vec::new();
    for o in &obs[test_start..] {
        let query_t = if dynamic { o.t } else { split.t_val_end };
        let visible = obs.partition_point(|x| x.t < query_t);
        scorer.advance(&obs[..visible]);
        truth.push(o.class);
        pred.push(scorer.predict(o.node, query_t));
    }

    Ok(NodeMetrics {
        scorer: scorer.name().to_owned(),
        dynamic,
        evaluated: truth.len(),
        accuracy: accuracy(&truth, &pred),
        macro_f1: macro_f1(&truth, &pred),
    })
}

pub fn accuracy(truth: &[i64], pred: &[i64]) -> f64 {
    let hits = truth.iter().zip(pred).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}

/// Unweighted mean of per-class F1 over every class in `truth ∪ pred`.
pub fn macro_f1(truth: &[i64], pred: &[i64]) -> f64 {
    let mut stats: BTreeMap<i64, (usize, usize, usize)> = BTreeMap::new();
    for (&t, &p) in truth.iter().zip(pred) {
        if t == p {
            stats.entry(t).or_default().0 += 1;
        } else {
            stats.entry(p).or_default().1 += 1;
            stats.entry(t).or_default().2 += 1;
        }
    }
    let f1s: Vec<f64> = stats
        .values()
        .map(|&(tp, fp, fn_)| 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64)
        .collect();
    f1s.iter().sum::<f64>() / f1s.len() as f64
}
