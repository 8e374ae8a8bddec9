//! Dataset file formats: event CSV, binary event cache, node feature CSVs
//! with a schema sidecar, label files, and statistics export.
//!
//! Event CSV columns, in this order: `src,dst,t`, then optionally `kind`,
//! `label`, and edge features `f0..f{k-1}`. Anything else is rejected.
//!
//! Binary cache layout (little-endian, no padding):
//!
//! ```text
//! "TGEV" | version u16 | nodes u64 | events u64
//! kinds [u8; E] | src [u64; E] | dst [u64; E] (u64::MAX = none) | t [f64; E]
//! label bitmap [u8; ceil(E/8)] (LSB first) | labels [i32; E]
//! features [f32; E * d] row-major
//! ```
//!
//! Events are stored in ingestion-ordinal order so ids are implicit, and `d`
//! follows from the bytes left after the labels. Raw node names are not part
//! of the cache; they travel in a separate vocabulary file.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::eval::NodeLabel;
use crate::features::{ColumnKind, ColumnValues, FeatureError, FeatureFrame, FeatureTable};
use crate::graph::{Event, EventId, EventKind, IdVocabulary, IngestError, NodeId, RawEvent, TemporalGraph, Timestamp};
use crate::snapshot::{make_snapshots, SnapshotError, SnapshotSpec};

pub const CACHE_MAGIC: &[u8; 4] = b"TGEV";
pub const CACHE_VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("not an event cache: magic bytes {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported cache version {found} (expected {expected})")]
    UnsupportedVersion { found: u16, expected: u16 },
    #[error("cache truncated in the {0} section")]
    Truncated(&'static str),
    #[error("corrupt cache: {0}")]
    Corrupt(String),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("bad header: {0}")]
    Header(String),
    #[error("unknown column `{name}` at position {position}")]
    UnknownColumn { name: String, position: usize },
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
}

impl From<csv::Error> for IoError {
    fn from(err: csv::Error) -> Self {
        let line = err.position().map(|p| p.line());
        match err.into_kind() {
            csv::ErrorKind::Io(e) => IoError::Io(e),
            kind => IoError::Malformed {
                line: line.unwrap_or(0),
                message: csv_kind_message(kind),
            },
        }
    }
}

fn csv_kind_message(kind: csv::ErrorKind) -> String {
    match kind {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("expected {expected_len} fields, found {len}")
        }
        csv::ErrorKind::Utf8 { .. } => "invalid UTF-8".to_owned(),
        other => format!("{other:?}"),
    }
}

fn malformed(line: u64, message: impl Into<String>) -> IoError {
    IoError::Malformed {
        line,
        message: message.into(),
    }
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r)
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

/// Column layout of an event CSV.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EventCsvSchema {
    pub has_kind: bool,
    pub has_label: bool,
    pub num_features: usize,
}

impl EventCsvSchema {
    pub fn parse(header: &csv::StringRecord) -> Result<Self, IoError> {
        let cols: Vec<&str> = header.iter().collect();
        for (i, want) in ["src", "dst", "t"].into_iter().enumerate() {
            match cols.get(i) {
                Some(&c) if c == want => {}
                Some(&c) => return Err(IoError::Header(format!("column {} must be `{want}`, found `{c}`", i + 1))),
                None => return Err(IoError::Header(format!("missing required column `{want}`"))),
            }
        }
        let mut schema = EventCsvSchema {
            has_kind: false,
            has_label: false,
            num_features: 0,
        };
        let mut rest = cols[3..].iter().enumerate().peekable();
        if rest.next_if(|(_, &c)| c == "kind").is_some() {
            schema.has_kind = true;
        }
        if rest.next_if(|(_, &c)| c == "label").is_some() {
            schema.has_label = true;
        }
        for (i, &c) in rest {
            if c != format!("f{}", schema.num_features) {
                return Err(IoError::UnknownColumn {
                    name: c.to_owned(),
                    position: i + 4,
                });
            }
            schema.num_features += 1;
        }
        Ok(schema)
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["src", "dst", "t"].map(String::from).to_vec();
        if self.has_kind {
            h.push("kind".into());
        }
        if self.has_label {
            h.push("label".into());
        }
        h.extend((0..self.num_features).map(|i| format!("f{i}")));
        h
    }
}

/// Reads an event CSV from a file.
pub fn read_events_csv(path: impl AsRef<Path>) -> Result<(TemporalGraph, FeatureTable), IoError> {
    read_events_csv_from(BufReader::new(File::open(path)?))
}

/// Reads an event CSV. Edge features become numeric columns `f0..` of the
/// edge frame, one row per event id; empty feature cells are missing values
/// and a row with no feature cells at all carries no features.
pub fn read_events_csv_from<R: Read>(r: R) -> Result<(TemporalGraph, FeatureTable), IoError> {
    let mut rdr = csv_reader(r);
    let schema = EventCsvSchema::parse(rdr.headers()?)?;
    let mut records = Vec::new();
    let mut lines = Vec::new();
    let mut features: Vec<Vec<f64>> = vec![Vec::new(); schema.num_features];

    for row in rdr.records() {
        let row = row?;
        let line = line_of(&row);
        let field = |i: usize| row.get(i).unwrap_or("");
        let t: f64 = field(2)
            .parse()
            .map_err(|_| malformed(line, format!("timestamp `{}` is not a number", field(2))))?;
        let mut col = 3;
        let kind = if schema.has_kind {
            col += 1;
            match field(col - 1) {
                "" => EventKind::EdgeAdd,
                k => EventKind::parse(k).ok_or_else(|| malformed(line, format!("unknown event kind `{k}`")))?,
            }
        } else {
            EventKind::EdgeAdd
        };
        let label = if schema.has_label {
            col += 1;
            match field(col - 1) {
                "" => None,
                l => Some(l.parse::<i32>().map_err(|_| malformed(line, format!("label `{l}` is not an integer")))?),
            }
        } else {
            None
        };
        let mut any_feature = false;
        for (j, column) in features.iter_mut().enumerate() {
            let cell = field(col + j);
            any_feature |= !cell.is_empty();
            let v = if cell.is_empty() {
                f64::NAN
            } else {
                cell.parse::<f32>()
                    .map_err(|_| malformed(line, format!("feature f{j} value `{cell}` is not a number")))? as f64
            };
            column.push(v);
        }
        let src = field(0);
        if src.is_empty() {
            return Err(malformed(line, "empty src"));
        }
        let dst = Some(field(1)).filter(|d| !d.is_empty()).map(str::to_owned);
        records.push(RawEvent {
            kind,
            src: src.to_owned(),
            dst,
            t,
            label,
            has_features: any_feature,
        });
        lines.push(line);
    }

    let g = TemporalGraph::ingest(records).map_err(|e| match record_index(&e) {
        Some(i) => malformed(lines[i], e.to_string()),
        None => IoError::Ingest(e),
    })?;
    let mut table = FeatureTable::empty_for(&g);
    for (j, values) in features.into_iter().enumerate() {
        table.edge.add_column(format!("f{j}"), ColumnValues::Numeric(values))?;
    }
    Ok((g, table))
}

fn record_index(e: &IngestError) -> Option<usize> {
    match *e {
        IngestError::NonFiniteTimestamp { index, .. }
        | IngestError::MissingDestination { index, .. }
        | IngestError::UnexpectedDestination { index, .. }
        | IngestError::NodeOutOfRange { index, .. } => Some(index),
        _ => None,
    }
}

/// Numeric edge feature columns as `(d, row-major values by event id)`.
fn edge_feature_matrix(g: &TemporalGraph, features: &FeatureTable) -> Result<(usize, Vec<f64>), IoError> {
    let frame = &features.edge;
    if frame.columns().is_empty() {
        return Ok((0, Vec::new()));
    }
    if frame.num_rows() != g.num_events() {
        return Err(FeatureError::RowCount {
            column: frame.columns()[0].name.clone(),
            expected: g.num_events(),
            found: frame.num_rows(),
        }
        .into());
    }
    let matrix = frame.numeric_matrix().ok_or_else(|| FeatureError::SchemaMismatch {
        column: "edge features".into(),
        reason: "every edge feature column must be numeric".into(),
    })?;
    Ok((frame.columns().len(), matrix))
}

fn fmt_cell(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

/// Writes the graph as an event CSV in stream order, with raw node ids and
/// every optional column. Features are written for events that carry them.
pub fn write_events_csv<W: Write>(w: W, g: &TemporalGraph, features: &FeatureTable) -> Result<(), IoError> {
    let (d, matrix) = edge_feature_matrix(g, features)?;
    let schema = EventCsvSchema {
        has_kind: true,
        has_label: true,
        num_features: d,
    };
    let mut out = csv::Writer::from_writer(w);
    out.write_record(schema.header())?;
    let vocab = g.vocabulary();
    for e in g.events() {
        let raw = |n: NodeId| vocab.to_raw(n).unwrap_or_default().to_owned();
        let mut row = vec![
            raw(e.src),
            e.dst.map(raw).unwrap_or_default(),
            e.time().to_string(),
            e.kind.as_str().to_owned(),
            e.label.map(|l| l.to_string()).unwrap_or_default(),
        ];
        let base = e.id as usize * d;
        row.extend((0..d).map(|j| match e.feature_ref {
            Some(_) => fmt_cell(matrix[base + j]),
            None => String::new(),
        }));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Serializes graph and edge features into the binary cache layout.
pub fn write_cache<W: Write>(mut w: W, g: &TemporalGraph, features: &FeatureTable) -> Result<(), IoError> {
    let (d, matrix) = edge_feature_matrix(g, features)?;
    let n = g.num_events();
    let mut by_id: Vec<Option<&Event>> = vec![None; n];
    for e in g.events() {
        let slot = by_id
            .get_mut(e.id as usize)
            .ok_or_else(|| CacheError::Corrupt(format!("event id {} outside 0..{n}", e.id)))?;
        *slot = Some(e);
    }
    let events: Vec<&Event> = by_id.into_iter().collect::<Option<_>>().ok_or_else(|| CacheError::Corrupt("event ids are not contiguous".into()))?;

    let mut buf = Vec::with_capacity(22 + n * (1 + 8 + 8 + 8 + 4 + 4 * d) + n.div_ceil(8));
    buf.extend_from_slice(CACHE_MAGIC);
    buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    buf.extend_from_slice(&(g.num_nodes() as u64).to_le_bytes());
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    buf.extend(events.iter().map(|e| e.kind.code()));
    for e in &events {
        buf.extend_from_slice(&(e.src as u64).to_le_bytes());
    }
    for e in &events {
        buf.extend_from_slice(&e.dst.map_or(u64::MAX, u64::from).to_le_bytes());
    }
    for e in &events {
        buf.extend_from_slice(&e.time().to_le_bytes());
    }
    let mut bitmap = vec![0u8; n.div_ceil(8)];
    for (i, e) in events.iter().enumerate() {
        if e.label.is_some() {
            bitmap[i / 8] |= 1 << (i % 8);
        }
    }
    buf.extend_from_slice(&bitmap);
    for e in &events {
        buf.extend_from_slice(&e.label.unwrap_or(0).to_le_bytes());
    }
    for (i, e) in events.iter().enumerate() {
        for j in 0..d {
            let v = if e.feature_ref.is_some() { matrix[i * d + j] as f32 } else { f32::NAN };
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize, section: &'static str) -> Result<&'a [u8], CacheError> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len()).ok_or(CacheError::Truncated(section))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self, section: &'static str) -> Result<[u8; N], CacheError> {
        Ok(self.take(N, section)?.try_into().unwrap())
    }

    fn u64s(&mut self, n: usize, section: &'static str) -> Result<Vec<u64>, CacheError> {
        let bytes = self.take(n.checked_mul(8).ok_or(CacheError::Truncated(section))?, section)?;
        Ok(bytes.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

/// Reads a binary cache. The vocabulary is the identity over dense ids;
/// attach the real one with [`TemporalGraph::with_vocabulary`]. Feature
/// rows that are entirely NaN mark events without features.
pub fn read_cache<R: Read>(mut r: R) -> Result<(TemporalGraph, FeatureTable), IoError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut c = Cursor { bytes: &bytes, pos: 0 };
    let magic = c.array::<4>("header")?;
    if &magic != CACHE_MAGIC {
        return Err(CacheError::BadMagic(magic).into());
    }
    let version = u16::from_le_bytes(c.array::<2>("header")?);
    if version != CACHE_VERSION {
        return Err(CacheError::UnsupportedVersion {
            found: version,
            expected: CACHE_VERSION,
        }
        .into());
    }
    let num_nodes = u64::from_le_bytes(c.array::<8>("header")?);
    let n = u64::from_le_bytes(c.array::<8>("header")?);
    if num_nodes > u64::from(NodeId::MAX) || n > u64::from(EventId::MAX) + 1 {
        return Err(CacheError::Corrupt(format!("{num_nodes} nodes / {n} events exceed 32-bit ids")).into());
    }
    let (num_nodes, n) = (num_nodes as usize, n as usize);
    let kinds = c.take(n, "kinds")?;
    let src = c.u64s(n, "src")?;
    let dst = c.u64s(n, "dst")?;
    let times = c.u64s(n, "t")?;
    let bitmap = c.take(n.div_ceil(8), "label bitmap")?;
    let labels = c.take(n * 4, "labels")?;
    let rest = &bytes[c.pos..];
    let d = if n == 0 {
        0
    } else if rest.len() % (4 * n) == 0 {
        rest.len() / (4 * n)
    } else {
        return Err(CacheError::Corrupt(format!("{} feature bytes do not divide into {n} rows of f32", rest.len())).into());
    };
    if n == 0 && !rest.is_empty() {
        return Err(CacheError::Corrupt("trailing bytes after an empty event list".into()).into());
    }

    let node = |v: u64, i: usize| -> Result<NodeId, CacheError> {
        if v < num_nodes as u64 {
            Ok(v as NodeId)
        } else {
            Err(CacheError::Corrupt(format!("event {i}: node {v} out of range for {num_nodes} nodes")))
        }
    };
    let mut feature_cols = vec![Vec::with_capacity(n); d];
    let mut events = Vec::with_capacity(n);
    for i in 0..n {
        let kind = EventKind::from_code(kinds[i]).ok_or_else(|| CacheError::Corrupt(format!("event {i}: unknown kind code {}", kinds[i])))?;
        let dst = match (kind.is_edge(), dst[i]) {
            (false, u64::MAX) => None,
            (true, v) if v != u64::MAX => Some(node(v, i)?),
            _ => return Err(CacheError::Corrupt(format!("event {i}: destination does not match kind {kind}")).into()),
        };
        let t = f64::from_bits(times[i]);
        let t = Timestamp::new(t).ok_or_else(|| CacheError::Corrupt(format!("event {i}: non-finite timestamp")))?;
        let label = (bitmap[i / 8] >> (i % 8) & 1 == 1).then(|| i32::from_le_bytes(labels[i * 4..i * 4 + 4].try_into().unwrap()));
        let row = &rest[i * 4 * d..(i + 1) * 4 * d];
        let mut all_nan = true;
        for (j, col) in feature_cols.iter_mut().enumerate() {
            let v = f32::from_le_bytes(row[j * 4..j * 4 + 4].try_into().unwrap());
            all_nan &= v.is_nan();
            col.push(f64::from(v));
        }
        events.push(Event {
            id: i as EventId,
            kind,
            src: node(src[i], i)?,
            dst,
            t,
            feature_ref: (d > 0 && !all_nan).then_some(i as u32),
            label,
        });
    }
    let g = TemporalGraph::from_parts(num_nodes, events, IdVocabulary::identity(num_nodes));
    let mut table = FeatureTable::empty_for(&g);
    for (j, values) in feature_cols.into_iter().enumerate() {
        table.edge.add_column(format!("f{j}"), ColumnValues::Numeric(values))?;
    }
    Ok((g, table))
}

/// Writes `dense,raw` rows for every node.
pub fn write_vocabulary<W: Write>(w: W, vocab: &IdVocabulary) -> Result<(), IoError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["dense", "raw"])?;
    for (i, raw) in vocab.raw_ids().iter().enumerate() {
        out.write_record([i.to_string().as_str(), raw])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_vocabulary<R: Read>(r: R) -> Result<IdVocabulary, IoError> {
    let mut rdr = csv_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != ["dense", "raw"] {
        return Err(IoError::Header(format!("vocabulary header must be `dense,raw`, found `{}`", header.join(","))));
    }
    let mut raw = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = line_of(&row);
        let dense: usize = row[0].parse().map_err(|_| malformed(line, format!("dense id `{}` is not an integer", &row[0])))?;
        if dense != raw.len() {
            return Err(malformed(line, format!("expected dense id {}, found {dense}", raw.len())));
        }
        raw.push(row[1].to_owned());
    }
    IdVocabulary::from_raw(raw).map_err(IoError::from)
}

/// Reads a node feature CSV (first column `node`, raw ids) against a schema
/// sidecar with header `column,kind`. Every data column must be declared
/// and every declared column present. Nodes without a row get missing
/// values.
pub fn read_node_features<R: Read, S: Read>(csv_in: R, schema_in: S, g: &TemporalGraph) -> Result<FeatureFrame, IoError> {
    let mut schema_rdr = csv_reader(schema_in);
    let sh: Vec<String> = schema_rdr.headers()?.iter().map(str::to_owned).collect();
    if sh != ["column", "kind"] {
        return Err(IoError::Header(format!("schema header must be `column,kind`, found `{}`", sh.join(","))));
    }
    let mut kinds: Vec<(String, ColumnKind)> = Vec::new();
    for row in schema_rdr.records() {
        let row = row?;
        if kinds.iter().any(|(c, _)| c == &row[0]) {
            return Err(FeatureError::DuplicateColumn(row[0].to_owned()).into());
        }
        kinds.push((row[0].to_owned(), ColumnKind::parse(&row[0], &row[1])?));
    }

    let mut rdr = csv_reader(csv_in);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header.first().map(String::as_str) != Some("node") {
        return Err(IoError::Header("first node feature column must be `node`".into()));
    }
    let mut layout = Vec::new();
    for (position, name) in header.iter().enumerate().skip(1) {
        let kind = kinds
            .iter()
            .find(|(c, _)| c == name)
            .map(|&(_, k)| k)
            .ok_or_else(|| IoError::UnknownColumn { name: name.clone(), position: position + 1 })?;
        if layout.iter().any(|(c, _)| c == name) {
            return Err(FeatureError::DuplicateColumn(name.clone()).into());
        }
        layout.push((name.clone(), kind));
    }
    if let Some((missing, _)) = kinds.iter().find(|(c, _)| !layout.iter().any(|(l, _)| l == c)) {
        return Err(IoError::Header(format!("declared column `{missing}` is absent")));
    }

    let nn = g.num_nodes();
    let mut numeric: Vec<Vec<f64>> = vec![vec![f64::NAN; nn]; layout.len()];
    let mut categorical: Vec<Vec<Option<String>>> = vec![vec![None; nn]; layout.len()];
    let mut seen = HashSet::new();
    for row in rdr.records() {
        let row = row?;
        let line = line_of(&row);
        let node = g
            .vocabulary()
            .to_dense(&row[0])
            .ok_or_else(|| malformed(line, format!("unknown node `{}`", &row[0])))? as usize;
        if !seen.insert(node) {
            return Err(malformed(line, format!("duplicate row for node `{}`", &row[0])));
        }
        for (j, (name, kind)) in layout.iter().enumerate() {
            let cell = &row[j + 1];
            if cell.is_empty() {
                continue;
            }
            match kind {
                ColumnKind::Numeric => {
                    numeric[j][node] = cell.parse().map_err(|_| malformed(line, format!("column `{name}`: `{cell}` is not a number")))?;
                }
                ColumnKind::Categorical => categorical[j][node] = Some(cell.to_owned()),
            }
        }
    }

    let mut frame = FeatureFrame::for_nodes(g);
    for (j, (name, kind)) in layout.into_iter().enumerate() {
        let values = match kind {
            ColumnKind::Numeric => ColumnValues::Numeric(std::mem::take(&mut numeric[j])),
            ColumnKind::Categorical => ColumnValues::Categorical(std::mem::take(&mut categorical[j])),
        };
        frame.add_column(name, values)?;
    }
    Ok(frame)
}

/// Reads node labels with header `node,label` (static) or `node,t,label`
/// (time-stamped).
pub fn read_node_labels<R: Read>(r: R, g: &TemporalGraph) -> Result<Vec<NodeLabel>, IoError> {
    let mut rdr = csv_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let timed = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["node", "label"] => false,
        ["node", "t", "label"] => true,
        _ => return Err(IoError::Header(format!("label header must be `node,label` or `node,t,label`, found `{}`", header.join(",")))),
    };
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = line_of(&row);
        let node = g
            .vocabulary()
            .to_dense(&row[0])
            .ok_or_else(|| malformed(line, format!("unknown node `{}`", &row[0])))?;
        let t = if timed {
            let t: f64 = row[1].parse().map_err(|_| malformed(line, format!("timestamp `{}` is not a number", &row[1])))?;
            if !t.is_finite() {
                return Err(malformed(line, "timestamp must be finite"));
            }
            Some(t)
        } else {
            None
        };
        let cell = &row[header.len() - 1];
        let class = cell.parse().map_err(|_| malformed(line, format!("label `{cell}` is not an integer")))?;
        out.push(NodeLabel { node, t, class });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotStats {
    pub index: usize,
    pub start: f64,
    pub end: f64,
    /// Nodes incident to at least one edge of the snapshot.
    pub nodes: usize,
    /// Distinct coalesced edges.
    pub edges: usize,
    /// Edge events represented, counting multiplicity.
    pub events: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StatsBundle {
    pub snapshots: Vec<SnapshotStats>,
    /// `(degree, node count)` ascending by degree; degree is the number of
    /// edge additions a node takes part in.
    pub degree_histogram: Vec<(usize, usize)>,
    /// Fraction of edge additions whose directed pair was added earlier.
    pub recurrence_ratio: f64,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
}

impl StatsBundle {
    pub fn span(&self) -> f64 {
        match (self.t_min, self.t_max) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

/// Computes dataset statistics, with per-snapshot counts under `spec`.
pub fn export_stats(g: &TemporalGraph, spec: &SnapshotSpec) -> Result<StatsBundle, IoError> {
    let snapshots = if g.num_edge_adds() == 0 {
        Vec::new()
    } else {
        make_snapshots(g, spec)?
            .iter()
            .map(|s| {
                let mut touched = HashSet::new();
                for e in &s.edges {
                    touched.insert(e.src);
                    touched.insert(e.dst);
                }
                SnapshotStats {
                    index: s.index,
                    start: s.start,
                    end: s.end,
                    nodes: touched.len(),
                    edges: s.edges.len(),
                    events: s.total_weight(),
                }
            })
            .collect()
    };

    let mut degree = vec![0usize; g.num_nodes()];
    let mut seen_pairs = HashSet::new();
    let mut repeats = 0usize;
    let mut adds = 0usize;
    for e in g.edge_adds() {
        let (u, v) = e.pair().unwrap();
        degree[u as usize] += 1;
        if v != u {
            degree[v as usize] += 1;
        }
        adds += 1;
        if !seen_pairs.insert((u, v)) {
            repeats += 1;
        }
    }
    let mut hist: HashMap<usize, usize> = HashMap::new();
    for d in degree {
        *hist.entry(d).or_default() += 1;
    }
    let mut degree_histogram: Vec<(usize, usize)> = hist.into_iter().collect();
    degree_histogram.sort_unstable();

    Ok(StatsBundle {
        snapshots,
        degree_histogram,
        recurrence_ratio: if adds == 0 { 0.0 } else { repeats as f64 / adds as f64 },
        t_min: g.t_min(),
        t_max: g.t_max(),
    })
}

/// Writes `<dataset>.snapshots.csv`, `<dataset>.degrees.csv` and
/// `<dataset>.summary.csv` into `dir`; returns the paths written.
pub fn write_stats(dir: &Path, dataset: &str, stats: &StatsBundle) -> Result<Vec<PathBuf>, IoError> {
    let paths: Vec<PathBuf> = ["snapshots", "degrees", "summary"]
        .iter()
        .map(|kind| dir.join(format!("{dataset}.{kind}.csv")))
        .collect();

    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&paths[0])?));
    w.write_record(["index", "start", "end", "nodes", "edges", "events"])?;
    for s in &stats.snapshots {
        w.write_record([
            s.index.to_string(),
            s.start.to_string(),
            s.end.to_string(),
            s.nodes.to_string(),
            s.edges.to_string(),
            s.events.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&paths[1])?));
    w.write_record(["degree", "nodes"])?;
    for (d, c) in &stats.degree_histogram {
        w.write_record([d.to_string(), c.to_string()])?;
    }
    w.flush()?;

    let opt = |x: Option<f64>| x.map_or_else(|| "na".to_owned(), |v| v.to_string());
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&paths[2])?));
    w.write_record(["key", "value"])?;
    for (k, v) in [
        ("snapshots", stats.snapshots.len().to_string()),
        ("recurrence_ratio", stats.recurrence_ratio.to_string()),
        ("t_min", opt(stats.t_min)),
        ("t_max", opt(stats.t_max)),
        ("span", stats.span().to_string()),
    ] {
        w.write_record([k, v.as_str()])?;
    }
    w.flush()?;
    Ok(paths)
}
