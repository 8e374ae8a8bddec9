//! Command implementations. Every command writes its outputs, then
//! `config.yaml` (the effective config) and `manifest.json` (SHA-256 of
//! inputs and outputs).

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use tgl::edgebank::{EdgeBank, EdgeBankVariant};
use tgl::eval::{
    chronological_split, evaluate_link_prediction, evaluate_node_classification, labels_from_events, test_windows,
    window_negatives, ChronoSplit, LinkScorer, PersistenceBaseline, Report, SplitSpec,
};
use tgl::features::FeatureTable;
use tgl::io;
use tgl::negatives::{Corruption, Fallback, NegativeSampler, NegativeSpec, NegativeStrategy};
use tgl::rng::{derive_key, stream_id};
use tgl::sampling::{iterate_link_batches, sample_khop, KhopConfig, SamplingStrategy, TimeAnchor};
use tgl::snapshot::{make_snapshots, Accumulation, Coalesce, PartitionMode, SnapshotSpec};
use tgl::{Directionality, NodeId, RngState, TemporalAdjacency, TemporalGraph};

use crate::config::*;
use crate::{CliError, Command};

pub struct Dataset {
    pub graph: TemporalGraph,
    pub features: FeatureTable,
    pub name: String,
    pub inputs: Vec<PathBuf>,
}

/// Loads the configured dataset: an event CSV, or a binary cache plus an
/// optional vocabulary sidecar.
pub fn load_dataset(cfg: &RunConfig) -> Result<Dataset, CliError> {
    let path = PathBuf::from(&cfg.dataset);
    let name = cfg.name.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    });
    let open = |p: &Path| File::open(p).map(BufReader::new).map_err(|e| CliError::Io(format!("{}: {e}", p.display())));
    let mut inputs = vec![path.clone()];
    let (graph, features) = if path.extension().is_some_and(|e| e == "tgev") {
        let (g, f) = io::read_cache(open(&path)?)?;
        match &cfg.vocabulary {
            Some(v) => {
                let vp = PathBuf::from(v);
                let vocab = io::read_vocabulary(open(&vp)?)?;
                inputs.push(vp);
                (g.with_vocabulary(vocab)?, f)
            }
            None => (g, f),
        }
    } else {
        io::read_events_csv_from(open(&path)?)?
    };
    Ok(Dataset {
        graph,
        features,
        name,
        inputs,
    })
}

#[derive(Serialize)]
struct FileDigest {
    path: String,
    bytes: u64,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'static str,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

fn digest(path: &Path, shown: String) -> Result<FileDigest, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(FileDigest {
        path: shown,
        bytes: bytes.len() as u64,
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

/// Files written under the output directory, in write order.
struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn new(dir: &str) -> Result<Self, CliError> {
        let dir = PathBuf::from(dir);
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Outputs { dir, files: Vec::new() })
    }

    fn write(&mut self, rel: &str, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.files.push(rel.to_owned());
        Ok(())
    }

    fn adopt(&mut self, path: &Path) {
        let rel = path.strip_prefix(&self.dir).unwrap_or(path);
        self.files.push(rel.to_string_lossy().into_owned());
    }

    fn finish(mut self, command: Command, cfg: &RunConfig, inputs: &[PathBuf]) -> Result<(), CliError> {
        self.write("config.yaml", cfg.to_yaml())?;
        let inputs = inputs
            .iter()
            .map(|p| digest(p, p.to_string_lossy().into_owned()))
            .collect::<Result<Vec<_>, _>>()?;
        let outputs = self
            .files
            .iter()
            .map(|rel| digest(&self.dir.join(rel), rel.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let manifest = Manifest {
            tool: "tgl",
            version: env!("CARGO_PKG_VERSION"),
            command: command.name(),
            config: "config.yaml",
            inputs,
            outputs,
        };
        let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        json.push('\n');
        let path = self.dir.join("manifest.json");
        fs::write(&path, json).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(())
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn raw(g: &TemporalGraph, n: NodeId) -> String {
    let r = g.vocabulary().to_raw(n).unwrap_or_default();
    if r.contains([',', '"', '\n']) {
        format!("\"{}\"", r.replace('"', "\"\""))
    } else {
        r.to_owned()
    }
}

fn directionality(cfg: &RunConfig) -> Directionality {
    if cfg.directed {
        Directionality::Directed
    } else {
        Directionality::Symmetrized
    }
}

pub fn snapshot_spec(cfg: &SnapshotConfig) -> Result<SnapshotSpec, CliError> {
    let mode = match cfg.mode {
        ModeKind::FixedCount => PartitionMode::FixedCount { count: cfg.k },
        ModeKind::FixedWidth => PartitionMode::FixedWidth {
            width: cfg.w.ok_or_else(|| CliError::Validation("snapshot mode fixed-width needs snapshot.w".into()))?,
        },
        ModeKind::FixedEvents => PartitionMode::FixedEvents {
            events: cfg.m.ok_or_else(|| CliError::Validation("snapshot mode fixed-events needs snapshot.m".into()))?,
        },
    };
    Ok(SnapshotSpec::new(mode)
        .coalesce(match cfg.coalesce {
            CoalesceKind::CountWeight => Coalesce::CountWeight,
            CoalesceKind::KeepAll => Coalesce::KeepAll,
            CoalesceKind::Last => Coalesce::Last,
        })
        .accumulation(match cfg.accumulation {
            AccumulationKind::Interval => Accumulation::Interval,
            AccumulationKind::Cumulative => Accumulation::Cumulative,
        }))
}

fn split_of(cfg: &RunConfig, g: &TemporalGraph) -> Result<ChronoSplit, CliError> {
    let spec = SplitSpec {
        train: cfg.split.train,
        val: cfg.split.val,
        test: cfg.split.test,
    };
    Ok(chronological_split(g, &spec)?)
}

/// Negative spec for the run; its seed is the `negatives` sub-stream.
pub fn negative_spec(cfg: &RunConfig) -> NegativeSpec {
    let n = &cfg.negatives;
    NegativeSpec {
        strategy: match n.strategy {
            NegStrategyKind::Random => NegativeStrategy::Random,
            NegStrategyKind::Historical => NegativeStrategy::Historical,
        },
        per_positive: n.per_positive,
        seed: derive_key(cfg.seed, "negatives"),
        fallback: match n.fallback {
            FallbackKind::ToRandom => Fallback::ToRandom,
            FallbackKind::Strict => Fallback::Strict,
        },
        corruption: match n.corruption {
            CorruptionKind::Destination => Corruption::Destination,
            CorruptionKind::Both => Corruption::BothEndpoints,
        },
    }
}

pub fn khop_config(cfg: &SamplerConfig) -> KhopConfig {
    let strategy = match cfg.strategy {
        StrategyKind::MostRecent => SamplingStrategy::MostRecent,
        StrategyKind::Uniform => SamplingStrategy::Uniform {
            window: cfg.window.unwrap_or(f64::INFINITY),
        },
    };
    let anchor = match cfg.anchor {
        AnchorKind::SeedTime => TimeAnchor::SeedTime,
        AnchorKind::EdgeTime => TimeAnchor::EdgeTime,
    };
    KhopConfig::new(cfg.fanouts.clone(), strategy).with_anchor(anchor)
}

/// RNG for sample batch `b`: the `sampler` sub-stream keyed per batch.
pub fn sample_rng(seed: u64, b: usize) -> RngState {
    RngState::new(stream_id(derive_key(seed, "sampler"), b as u64))
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<(), CliError> {
    let data = load_dataset(cfg)?;
    let mut out = Outputs::new(&cfg.out)?;
    let mut inputs = data.inputs.clone();
    match command {
        Command::Ingest => ingest(&data, &mut out)?,
        Command::Stats => stats(cfg, &data, &mut out)?,
        Command::Snapshot => snapshot(cfg, &data, &mut out)?,
        Command::Split => split(cfg, &data, &mut out)?,
        Command::Sample => sample(cfg, &data, &mut out)?,
        Command::Negatives => negatives(cfg, &data, &mut out)?,
        Command::EvalLink => eval_link(cfg, &data, &mut out)?,
        Command::EvalNode => {
            if let Some(l) = &cfg.eval.labels {
                inputs.push(PathBuf::from(l));
            }
            eval_node(cfg, &data, &mut out)?
        }
    }
    out.finish(command, cfg, &inputs)
}

fn ingest(data: &Dataset, out: &mut Outputs) -> Result<(), CliError> {
    let g = &data.graph;
    let mut cache = Vec::new();
    io::write_cache(&mut cache, g, &data.features)?;
    out.write(&format!("{}.tgev", data.name), cache)?;
    let mut vocab = Vec::new();
    io::write_vocabulary(&mut vocab, g.vocabulary())?;
    out.write(&format!("{}.vocab.csv", data.name), vocab)?;

    let report = g.validate();
    let opt = |x: Option<f64>| x.map_or_else(|| "na".to_owned(), |v| v.to_string());
    let mut s = String::new();
    let _ = writeln!(s, "nodes={}", g.num_nodes());
    let _ = writeln!(s, "events={}", g.num_events());
    let _ = writeln!(s, "edge_adds={}", g.num_edge_adds());
    let _ = writeln!(s, "t_min={}", opt(g.t_min()));
    let _ = writeln!(s, "t_max={}", opt(g.t_max()));
    let _ = writeln!(s, "edge_feature_dim={}", data.features.edge.columns().len());
    let _ = writeln!(s, "findings={}", report.findings.len());
    for f in &report.findings {
        let _ = writeln!(s, "finding={f}");
    }
    out.write("ingest.txt", s)
}

fn stats(cfg: &RunConfig, data: &Dataset, out: &mut Outputs) -> Result<(), CliError> {
    let bundle = io::export_stats(&data.graph, &snapshot_spec(&cfg.snapshot)?)?;
    for p in io::write_stats(&out.dir.clone(), &data.name, &bundle)? {
        out.adopt(&p);
    }
    Ok(())
}

fn snapshot(cfg: &RunConfig, data: &Dataset, out: &mut Outputs) -> Result<(), CliError> {
    let g = &data.graph;
    let snaps = make_snapshots(g, &snapshot_spec(&cfg.snapshot)?)?;
    let mut index_rows = Vec::new();
    for s in &snaps {
        let rows = s
            .edges
            .iter()
            .map(|e| vec![raw(g, e.src), raw(g, e.dst), e.weight.to_string(), e.t.to_string()]);
        out.write(&format!("snapshots/{:05}.csv", s.index), csv_bytes(&["src", "dst", "weight", "t"], rows))?;
        index_rows.push(vec![
            s.index.to_string(),
            s.start.to_string(),
            s.end.to_string(),
            s.end_inclusive.to_string(),
            s.edges.len().to_string(),
            s.total_weight().to_string(),
        ]);
    }
    out.write(
        "snapshots.csv",
        csv_bytes(&["index", "start", "end", "end_inclusive", "edges", "total_weight"], index_rows),
    )
}

fn split(cfg: &RunConfig, data: &Dataset, out: &mut Outputs) -> Result<(), CliError> {
    let g = &data.graph;
    let s = split_of(cfg, g)?;
    let rows = g.events().iter().zip(&s.tags).map(|(e, tag)| {
        vec![
            e.id.to_string(),
            e.kind.as_str().to_owned(),
            raw(g, e.src),
            e.dst.map(|d| raw(g, d)).unwrap_or_default(),
            e.time().to_string(),
            tag.as_str().to_owned(),
        ]
    });
    out.write("split.csv", csv_bytes(&["event_id", "kind", "src", "dst", "t", "split"], rows))?;

    let mut counts = [0usize; 3];
    for (e, tag) in g.events().iter().zip(&s.tags) {
        if e.kind == tgl::EventKind::EdgeAdd {
            counts[*tag as usize] += 1;
        }
    }
    let unseen = s.unseen_node.iter().filter(|&&u| u).count();
    let text = format!(
        "t_train_end={}\nt_val_end={}\ntrain_edges={}\nval_edges={}\ntest_edges={}\ntest_edges_with_unseen_node={unseen}\n",
        s.t_train_end, s.t_val_end, counts[0], counts[1], counts[2]
    );
    out.write("split.txt", text)
}

fn sample(cfg: &RunConfig, data: &Dataset, out: &mut Outputs) -> Result<(), CliError> {
    let g = &data.graph;
    let idx = TemporalAdjacency::build(g, directionality(cfg));
    let khop = khop_config(&cfg.sampler);
    let windows = iterate_link_batches(g, cfg.sampler.batch_size)?;
    let take = cfg.sampler.max_batches.unwrap_or(windows.len());

    let (mut seeds_rows, mut node_rows, mut edge_rows) = (Vec::new(), Vec::new(), Vec::new());
    for (b, w) in windows.iter().take(take).enumerate() {
        let seeds: Vec<(NodeId, f64)> = w
            .positives
            .iter()
            .flat_map(|e| {
                let (u, v) = e.pair().unwrap();
                [(u, e.time()), (v, e.time())]
            })
            .collect();
        let batch = sample_khop(&idx, &seeds, &khop, sample_rng(cfg.seed, b))?;
        for (i, (s, l)) in batch.seeds.iter().zip(&batch.seed_locals).enumerate() {
            seeds_rows.push(vec![b.to_string(), i.to_string(), s.node.to_string(), l.to_string(), s.t.to_string()]);
        }
        for (l, &n) in batch.node_map.iter().enumerate() {
            node_rows.push(vec![b.to_string(), l.to_string(), n.to_string(), raw(g, n)]);
        }
        for (h, e) in batch.edges() {
            edge_rows.push(vec![
                b.to_string(),
                h.to_string(),
                e.local_src.to_string(),
                e.local_dst.to_string(),
                e.t.to_string(),
                e.event_id.to_string(),
                e.query_t.to_string(),
            ]);
        }
    }
    out.write("sample.seeds.csv", csv_bytes(&["batch", "seed", "node", "local", "t"], seeds_rows))?;
    out.write("sample.nodes.csv", csv_bytes(&["batch", "local", "node", "raw"], node_rows))?;
    out.write(
        "sample.edges.csv",
        csv_bytes(&["batch", "hop", "local_src", "local_dst", "t", "event_id", "query_t"], edge_rows),
    )
}

fn negatives(cfg: &RunConfig, data: &Dataset, out: &mut Outputs) -> Result<(), CliError> {
    let g = &data.graph;
    let s = split_of(cfg, g)?;
    let spec = negative_spec(cfg);
    let strategy = match spec.strategy {
        NegativeStrategy::Random => "random",
        NegativeStrategy::Historical => "historical",
    };
    let mut sampler = NegativeSampler::new(g, directionality(cfg))?;
    let mut rows = Vec::new();
    let (mut saturated, mut shortfall, mut topped_up) = (0, 0, 0);
    let windows = test_windows(g, &s, cfg.eval.batch_size)?;
    for (b, w) in windows.iter().enumerate() {
        let batch = window_negatives(&mut sampler, &spec, b, w)?;
        saturated += batch.saturated;
        shortfall += batch.shortfall;
        topped_up += batch.topped_up;
        for &(u, v) in &batch.pairs {
            rows.push(vec![raw(g, u), raw(g, v), w.t_start.to_string(), w.t_end.to_string(), strategy.to_owned()]);
        }
    }
    let total = rows.len();
    out.write("negatives.csv", csv_bytes(&["src", "dst", "window_start", "window_end", "strategy"], rows))?;
    out.write(
        "negatives.txt",
        format!(
            "windows={}\nnegatives={total}\nsaturated={saturated}\nshortfall={shortfall}\ntopped_up={topped_up}\n",
            windows.len()
        ),
    )
}

fn edgebank_for(cfg: &RunConfig, g: &TemporalGraph, s: &ChronoSplit) -> Result<EdgeBank, CliError> {
    let variant = match cfg.scorer {
        ScorerKind::EdgebankInf => EdgeBankVariant::Infinite,
        ScorerKind::EdgebankTw => {
            let window = match cfg.edgebank.window {
                Some(w) => w,
                None => s.t_train_end - g.t_min().unwrap_or(0.0),
            };
            EdgeBankVariant::TimeWindow { window }
        }
    };
    Ok(EdgeBank::new(variant, directionality(cfg))?)
}

fn eval_link(cfg: &RunConfig, data: &Dataset, out: &mut Outputs) -> Result<(), CliError> {
    let g = &data.graph;
    let s = split_of(cfg, g)?;
    let mut scorer = edgebank_for(cfg, g, &s)?;
    let scorer: &mut dyn LinkScorer = &mut scorer;
    let metrics = evaluate_link_prediction(g, &s, scorer, &negative_spec(cfg), cfg.eval.batch_size, directionality(cfg))?;
    out.write("metrics.txt", metrics.to_kv_text())?;
    out.write("metrics.csv", metrics.to_csv())
}

fn eval_node(cfg: &RunConfig, data: &Dataset, out: &mut Outputs) -> Result<(), CliError> {
    let g = &data.graph;
    let s = split_of(cfg, g)?;
    let labels = match &cfg.eval.labels {
        Some(p) => {
            let f = File::open(p).map_err(|e| CliError::Io(format!("{p}: {e}")))?;
            io::read_node_labels(BufReader::new(f), g)?
        }
        None => labels_from_events(g),
    };
    if labels.is_empty() {
        return Err(CliError::Validation("no node labels: set eval.labels or add a label column".into()));
    }
    let metrics = evaluate_node_classification(g, &labels, &s, &mut PersistenceBaseline::default(), cfg.eval.dynamic)?;
    out.write("node_metrics.txt", metrics.to_kv_text())?;
    out.write("node_metrics.csv", metrics.to_csv())
}
