//! Numerical and categorical feature preprocessing aligned with the stream.
//!
//! Every row of a [`FeatureFrame`] carries a time: the event time for edge
//! rows, the first appearance for static node rows. Transform parameters are
//! fitted only on rows strictly before a cutoff `t_fit` and then applied,
//! frozen, to every row.
//!
//! Conventions: z-scores use the population standard deviation (divide by
//! `n`); missing numeric values (NaN) are imputed with the fit-range mean and
//! flagged in an appended `<column>_missing` indicator; categorical code 0 is
//! reserved for unseen or missing values.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::graph::{NodeId, TemporalGraph, Timestamp};

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("no rows of column `{column}` before t_fit = {t_fit}")]
    EmptyFitRange { column: String, t_fit: f64 },
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("column `{column}` has {found} rows, frame has {expected}")]
    RowCount { column: String, expected: usize, found: usize },
    #[error("column `{column}`: {reason}")]
    SchemaMismatch { column: String, reason: String },
    #[error("column `{0}`: textual attributes are not supported; declare it numeric or categorical, or drop it")]
    TextualColumn(String),
    #[error("unknown column kind `{kind}` for `{column}`")]
    UnknownKind { column: String, kind: String },
}

/// Declared kind of a feature column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

impl ColumnKind {
    /// Parses a schema kind; textual columns are rejected outright.
    pub fn parse(column: &str, kind: &str) -> Result<Self, FeatureError> {
        match kind.trim().to_ascii_lowercase().as_str() {
            "numeric" | "numerical" => Ok(ColumnKind::Numeric),
            "categorical" => Ok(ColumnKind::Categorical),
            "text" | "textual" => Err(FeatureError::TextualColumn(column.to_owned())),
            other => Err(FeatureError::UnknownKind {
                column: column.to_owned(),
                kind: other.to_owned(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ColumnValues {
    /// NaN marks a missing value.
    Numeric(Vec<f64>),
    Categorical(Vec<Option<String>>),
    /// Encoded categorical codes; 0 is out-of-vocabulary.
    Codes(Vec<u32>),
}

impl ColumnValues {
    pub fn len(&self) -> usize {
        match self {
            ColumnValues::Numeric(v) => v.len(),
            ColumnValues::Categorical(v) => v.len(),
            ColumnValues::Codes(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureColumn {
    pub name: String,
    pub values: ColumnValues,
}

/// Columnar feature rows, each stamped with a time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureFrame {
    row_times: Vec<f64>,
    columns: Vec<FeatureColumn>,
}

impl FeatureFrame {
    pub fn new(row_times: Vec<f64>) -> Self {
        FeatureFrame {
            row_times,
            columns: Vec::new(),
        }
    }

    /// Rows indexed by event id, timed by their event.
    pub fn for_events(g: &TemporalGraph) -> Self {
        let mut times = vec![0.0; g.num_events()];
        for e in g.events() {
            times[e.id as usize] = e.time();
        }
        Self::new(times)
    }

    /// Rows indexed by node id, timed by the node's first event (infinite
    /// for nodes that never appear, so they never enter a fit).
    pub fn for_nodes(g: &TemporalGraph) -> Self {
        let mut times = vec![f64::INFINITY; g.num_nodes()];
        for e in g.events().iter().rev() {
            for n in std::iter::once(e.src).chain(e.dst) {
                times[n as usize] = e.time();
            }
        }
        Self::new(times)
    }

    pub fn num_rows(&self) -> usize {
        self.row_times.len()
    }

    pub fn row_times(&self) -> &[f64] {
        &self.row_times
    }

    pub fn columns(&self) -> &[FeatureColumn] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&FeatureColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn add_column(&mut self, name: impl Into<String>, values: ColumnValues) -> Result<(), FeatureError> {
        let name = name.into();
        if self.column(&name).is_some() {
            return Err(FeatureError::DuplicateColumn(name));
        }
        if values.len() != self.num_rows() {
            return Err(FeatureError::RowCount {
                column: name,
                expected: self.num_rows(),
                found: values.len(),
            });
        }
        self.columns.push(FeatureColumn { name, values });
        Ok(())
    }

    /// Rows with time `< t_fit`, in chronological order (ties by row).
    fn fit_rows(&self, t_fit: f64) -> Vec<usize> {
        let mut rows: Vec<usize> = (0..self.num_rows()).filter(|&r| self.row_times[r] < t_fit).collect();
        rows.sort_by(|&a, &b| self.row_times[a].total_cmp(&self.row_times[b]).then(a.cmp(&b)));
        rows
    }

    /// Numeric columns as a row-major matrix, if every column is numeric.
    pub fn numeric_matrix(&self) -> Option<Vec<f64>> {
        let cols: Vec<&Vec<f64>> = self
            .columns
            .iter()
            .map(|c| match &c.values {
                ColumnValues::Numeric(v) => Some(v),
                _ => None,
            })
            .collect::<Option<_>>()?;
        let mut out = Vec::with_capacity(self.num_rows() * cols.len());
        for r in 0..self.num_rows() {
            out.extend(cols.iter().map(|c| c[r]));
        }
        Some(out)
    }
}

/// Node- and edge-level features for one graph.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureTable {
    /// Static node features, one row per node.
    pub node: FeatureFrame,
    /// Edge features, one row per event id.
    pub edge: FeatureFrame,
    /// Time-stamped node feature vectors.
    pub dynamic: BTreeMap<(NodeId, Timestamp), Vec<f64>>,
}

impl FeatureTable {
    pub fn empty_for(g: &TemporalGraph) -> Self {
        FeatureTable {
            node: FeatureFrame::for_nodes(g),
            edge: FeatureFrame::for_events(g),
            dynamic: BTreeMap::new(),
        }
    }

    /// Latest dynamic feature vector of `node` strictly before `t`.
    pub fn dynamic_before(&self, node: NodeId, t: f64) -> Option<&[f64]> {
        let lo = (node, Timestamp::new(f64::MIN).unwrap());
        self.dynamic
            .range(lo..)
            .take_while(|((n, ts), _)| *n == node && ts.get() < t)
            .last()
            .map(|(_, v)| v.as_slice())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformKind {
    ZScore,
    MinMax,
    CategoricalVocab,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Transform {
    ZScore { mean: f64, std: f64, constant: bool },
    MinMax { lo: f64, hi: f64 },
    /// Code `i + 1` for `vocab[i]`; 0 for anything else.
    CategoricalVocab { vocab: Vec<String> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransformParams {
    pub column: String,
    pub t_fit: f64,
    pub transform: Transform,
    /// Fit-range mean used for imputing missing numeric values.
    pub fill: f64,
}

impl TransformParams {
    fn map(&self, x: f64) -> f64 {
        let x = if x.is_nan() { self.fill } else { x };
        match self.transform {
            Transform::ZScore { constant: true, .. } => 0.0,
            Transform::ZScore { mean, std, .. } => (x - mean) / std,
            Transform::MinMax { lo, hi } if hi > lo => (x - lo) / (hi - lo),
            Transform::MinMax { .. } => 0.0,
            Transform::CategoricalVocab { .. } => unreachable!("numeric mapping of a categorical transform"),
        }
    }
}

fn mismatch(column: &str, reason: &str) -> FeatureError {
    FeatureError::SchemaMismatch {
        column: column.to_owned(),
        reason: reason.to_owned(),
    }
}

/// Fits a transform for `column` on rows with time `< t_fit`.
pub fn fit_transform_params(
    frame: &FeatureFrame,
    column: &str,
    kind: TransformKind,
    t_fit: f64,
) -> Result<TransformParams, FeatureError> {
    let col = frame
        .column(column)
        .ok_or_else(|| FeatureError::UnknownColumn(column.to_owned()))?;
    let rows = frame.fit_rows(t_fit);
    let empty = || FeatureError::EmptyFitRange {
        column: column.to_owned(),
        t_fit,
    };
    if rows.is_empty() {
        return Err(empty());
    }

    match (kind, &col.values) {
        (TransformKind::ZScore | TransformKind::MinMax, ColumnValues::Numeric(values)) => {
            let xs: Vec<f64> = rows.iter().map(|&r| values[r]).filter(|x| !x.is_nan()).collect();
            if xs.is_empty() {
                return Err(empty());
            }
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let transform = if kind == TransformKind::ZScore {
                let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
                let std = var.sqrt();
                Transform::ZScore {
                    mean,
                    std,
                    constant: std <= 1e-12 * mean.abs().max(1.0),
                }
            } else {
                let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Transform::MinMax { lo, hi }
            };
            Ok(TransformParams {
                column: column.to_owned(),
                t_fit,
                transform,
                fill: mean,
            })
        }
        (TransformKind::CategoricalVocab, ColumnValues::Categorical(values)) => {
            let mut vocab: Vec<String> = Vec::new();
            let mut seen: HashMap<&str, ()> = HashMap::new();
            for &r in &rows {
                if let Some(v) = values[r].as_deref() {
                    if seen.insert(v, ()).is_none() {
                        vocab.push(v.to_owned());
                    }
                }
            }
            Ok(TransformParams {
                column: column.to_owned(),
                t_fit,
                transform: Transform::CategoricalVocab { vocab },
                fill: 0.0,
            })
        }
        (TransformKind::CategoricalVocab, _) => Err(mismatch(column, "categorical vocabulary needs a categorical column")),
        (_, _) => Err(mismatch(column, "numeric transform needs a numeric column")),
    }
}

/// Applies frozen params to every row, returning a new frame.
pub fn apply_transform(frame: &FeatureFrame, params: &TransformParams) -> Result<FeatureFrame, FeatureError> {
    let column = params.column.as_str();
    let pos = frame
        .columns
        .iter()
        .position(|c| c.name == column)
        .ok_or_else(|| FeatureError::UnknownColumn(column.to_owned()))?;
    let mut out = frame.clone();
    let mut indicator = None;

    let new_values = match (&params.transform, &frame.columns[pos].values) {
        (Transform::CategoricalVocab { vocab }, ColumnValues::Categorical(values)) => {
            let codes: HashMap<&str, u32> = vocab.iter().enumerate().map(|(i, v)| (v.as_str(), i as u32 + 1)).collect();
            ColumnValues::Codes(
                values
                    .iter()
                    .map(|v| v.as_deref().and_then(|s| codes.get(s).copied()).unwrap_or(0))
                    .collect(),
            )
        }
        (Transform::CategoricalVocab { vocab }, ColumnValues::Codes(codes)) => {
            if let Some(&bad) = codes.iter().find(|&&c| c as usize > vocab.len()) {
                return Err(mismatch(column, &format!("code {bad} exceeds vocabulary of {}", vocab.len())));
            }
            ColumnValues::Codes(codes.clone())
        }
        (Transform::CategoricalVocab { .. }, ColumnValues::Numeric(_)) => {
            return Err(mismatch(column, "categorical vocabulary applied to a numeric column"))
        }
        (_, ColumnValues::Numeric(values)) => {
            if values.iter().any(|x| x.is_nan()) {
                let flags = values.iter().map(|x| if x.is_nan() { 1.0 } else { 0.0 }).collect();
                indicator = Some(ColumnValues::Numeric(flags));
            }
            ColumnValues::Numeric(values.iter().map(|&x| params.map(x)).collect())
        }
        (_, _) => return Err(mismatch(column, "numeric transform applied to a categorical column")),
    };
    out.columns[pos].values = new_values;
    if let Some(flags) = indicator {
        let name = format!("{column}_missing");
        if out.column(&name).is_none() {
            out.add_column(name, flags)?;
        }
    }
    Ok(out)
}
