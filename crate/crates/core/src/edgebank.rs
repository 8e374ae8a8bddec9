//! Memorization reference predictor for future link prediction.
//!
//! Scores 1 for a pair it remembers and 0 otherwise. The unlimited variant
//! remembers every pair seen before its clock; the windowed variant only
//! pairs seen within `[clock - w, clock)`. Memory is updated as evaluation
//! batches stream past.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::eval::{HistoryView, LinkScorer};
use crate::graph::{Event, EventKind, NodeId, TemporalGraph};
use crate::index::Directionality;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EdgeBankVariant {
    Infinite,
    TimeWindow { window: f64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum EdgeBankError {
    #[error("clock cannot move backwards from {from} to {to}")]
    ClockRegression { from: f64, to: f64 },
    #[error("time window must be positive, got {0}")]
    InvalidWindow(f64),
}

#[derive(Clone, Debug)]
pub struct EdgeBank {
    variant: EdgeBankVariant,
    directionality: Directionality,
    /// Pair -> time of its latest absorbed add.
    memory: HashMap<(NodeId, NodeId), f64>,
    /// Absorbed adds in time order; only kept for the windowed variant.
    buffer: VecDeque<((NodeId, NodeId), f64)>,
    clock: f64,
    /// Number of leading stream events already absorbed.
    cursor: usize,
}

impl EdgeBank {
    pub fn new(variant: EdgeBankVariant, directionality: Directionality) -> Result<Self, EdgeBankError> {
        if let EdgeBankVariant::TimeWindow { window } = variant {
            if !(window > 0.0) {
                return Err(EdgeBankError::InvalidWindow(window));
            }
        }
        Ok(EdgeBank {
            variant,
            directionality,
            memory: HashMap::new(),
            buffer: VecDeque::new(),
            clock: f64::NEG_INFINITY,
            cursor: 0,
        })
    }

    pub fn variant(&self) -> EdgeBankVariant {
        self.variant
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    /// Number of pairs currently scored 1.
    pub fn len(&self) -> usize {
        match self.variant {
            EdgeBankVariant::Infinite => self.memory.len(),
            EdgeBankVariant::TimeWindow { window } => {
                let lo = self.clock - window;
                self.memory.values().filter(|&&t| t >= lo).count()
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Absorbs every add of `g` with `t` in `[clock, new_clock)` and moves the
    /// clock. Must be called with the same graph every time.
    pub fn advance(&mut self, g: &TemporalGraph, new_clock: f64) -> Result<(), EdgeBankError> {
        let end = g.partition_before(new_clock);
        self.advance_over(&g.events()[..end], new_clock)
    }

    /// `prefix` is the stream prefix strictly before `new_clock`.
    fn advance_over(&mut self, prefix: &[Event], new_clock: f64) -> Result<(), EdgeBankError> {
        if new_clock < self.clock || new_clock.is_nan() {
            return Err(EdgeBankError::ClockRegression {
                from: self.clock,
                to: new_clock,
            });
        }
        let start = self.cursor.min(prefix.len());
        for e in &prefix[start..] {
            if e.kind != EventKind::EdgeAdd {
                continue;
            }
            let (u, v) = e.pair().unwrap();
            let key = self.directionality.key(u, v);
            self.memory.insert(key, e.time());
            if matches!(self.variant, EdgeBankVariant::TimeWindow { .. }) {
                self.buffer.push_back((key, e.time()));
            }
        }
        self.cursor = self.cursor.max(prefix.len());
        self.clock = new_clock;

        if let EdgeBankVariant::TimeWindow { window } = self.variant {
            let lo = new_clock - window;
            while let Some(&(key, t)) = self.buffer.front() {
                if t >= lo {
                    break;
                }
                self.buffer.pop_front();
                // Only forget the pair if it has not been refreshed since.
                if self.memory.get(&key) == Some(&t) {
                    self.memory.remove(&key);
                }
            }
        }
        Ok(())
    }

    /// 1.0 if `(u, v)` is live in memory, else 0.0.
    pub fn score(&self, u: NodeId, v: NodeId) -> f64 {
        let Some(&t) = self.memory.get(&self.directionality.key(u, v)) else {
            return 0.0;
        };
        match self.variant {
            EdgeBankVariant::Infinite => 1.0,
            EdgeBankVariant::TimeWindow { window } if t >= self.clock - window => 1.0,
            EdgeBankVariant::TimeWindow { .. } => 0.0,
        }
    }
}

impl LinkScorer for EdgeBank {
    fn name(&self) -> &str {
        match self.variant {
            EdgeBankVariant::Infinite => "edgebank-inf",
            EdgeBankVariant::TimeWindow { .. } => "edgebank-tw",
        }
    }

    fn advance(&mut self, history: &HistoryView<'_>) {
        self.advance_over(history.events(), history.cutoff())
            .expect("evaluation batches advance chronologically");
    }

    fn score(&self, _history: &HistoryView<'_>, u: NodeId, v: NodeId, _t: f64) -> f64 {
        EdgeBank::score(self, u, v)
    }
}
