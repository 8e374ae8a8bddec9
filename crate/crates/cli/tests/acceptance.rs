//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Oracles here are written independently
//! of the library code paths they check.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use tgl::edgebank::{EdgeBank, EdgeBankVariant};
use tgl::eval::{auc, average_precision, chronological_split, evaluate_link_prediction, mrr, SplitSpec};
use tgl::features::{apply_transform, fit_transform_params, ColumnValues, FeatureFrame, Transform, TransformKind};
use tgl::negatives::{Fallback, NegativeSpec, NegativeStrategy};
use tgl::sampling::{sample_khop, sample_neighbors, KhopConfig, SamplingStrategy, TimeAnchor};
use tgl::snapshot::{make_snapshots, snapshots_to_events, Accumulation, Coalesce, PartitionMode, SnapshotSpec};
use tgl::{Directionality, EventKind, NodeId, RngState, TemporalAdjacency, TemporalGraph};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Edge-add stream with timestamps on a 0.25 grid, so ties are common.
fn random_edges(rng: &mut StdRng, nodes: u32, events: usize, horizon: f64) -> Vec<(NodeId, NodeId, f64)> {
    (0..events)
        .map(|_| {
            let u = rng.random_range(0..nodes);
            let v = rng.random_range(0..nodes);
            let t = (rng.random::<f64>() * horizon * 4.0).floor() / 4.0;
            (u, v, t)
        })
        .collect()
}

fn random_graph(rng: &mut StdRng, nodes: u32, events: usize, horizon: f64) -> TemporalGraph {
    TemporalGraph::from_edges(nodes as usize, &random_edges(rng, nodes, events, horizon)).unwrap()
}

fn c1_no_leakage() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(101);
    let mut checked = 0usize;
    for gi in 0..20 {
        let g = random_graph(&mut rng, 100, 5000, 1000.0);
        let idx = TemporalAdjacency::build(&g, Directionality::Symmetrized);
        for si in 0..50 {
            let seeds: Vec<(NodeId, f64)> = (0..rng.random_range(1..16))
                .map(|_| (rng.random_range(0..100), (rng.random::<f64>() * 1100.0 * 4.0).floor() / 4.0))
                .collect();
            let strategy = if rng.random_bool(0.5) {
                SamplingStrategy::MostRecent
            } else {
                SamplingStrategy::Uniform { window: rng.random_range(1.0..300.0) }
            };
            let anchor = if rng.random_bool(0.5) { TimeAnchor::SeedTime } else { TimeAnchor::EdgeTime };
            let fanouts: Vec<usize> = (0..rng.random_range(1..4)).map(|_| rng.random_range(1..8)).collect();
            let cfg = KhopConfig::new(fanouts, strategy).with_anchor(anchor);
            let batch = sample_khop(&idx, &seeds, &cfg, RngState::new(gi * 1000 + si)).map_err(|e| e.to_string())?;
            let max_seed_t = seeds.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
            let seed_times: HashSet<u64> = seeds.iter().map(|s| s.1.to_bits()).collect();
            for (h, e) in batch.edges() {
                let ev = g.events().iter().find(|x| x.id == e.event_id).ok_or("unknown event id")?;
                let ends = (batch.global(e.local_src), batch.global(e.local_dst));
                let (a, b) = ev.pair().unwrap();
                ensure(ends == (a, b) || ends == (b, a), || format!("edge endpoints {ends:?} do not match event {a}-{b}"))?;
                ensure(ev.time() == e.t, || "edge time differs from its event".into())?;
                ensure(e.t < e.query_t, || format!("hop {h}: edge at {} not before query {}", e.t, e.query_t))?;
                ensure(e.query_t <= max_seed_t, || "query time beyond every seed".into())?;
                if anchor == TimeAnchor::SeedTime {
                    ensure(seed_times.contains(&e.query_t.to_bits()), || "query time is not a seed time".into())?;
                }
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("1000 samples, {checked} edges strictly before their query time, {elapsed:.2?}"))
}

/// `(node, t, event_id)` of every past interaction of `u` in `[t - w, t)`,
/// by a full scan of the stream.
fn scan_window(g: &TemporalGraph, dir: Directionality, u: NodeId, t: f64, w: f64) -> Vec<(NodeId, f64, u32)> {
    let mut out = Vec::new();
    for e in g.events() {
        if e.kind != EventKind::EdgeAdd || !(e.time() < t && e.time() >= t - w) {
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

fn c2_index_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(202);
    let mut queries = 0usize;
    for gi in 0..200 {
        let nodes = rng.random_range(2..40);
        let n_events = rng.random_range(0..400);
        let g = random_graph(&mut rng, nodes, n_events, 100.0);
        let dir = if gi % 2 == 0 { Directionality::Symmetrized } else { Directionality::Directed };
        let idx = TemporalAdjacency::build(&g, dir);
        for _ in 0..1000 {
            let u = rng.random_range(0..nodes);
            let t = (rng.random::<f64>() * 110.0 * 4.0).floor() / 4.0 - 2.0;
            let w = match rng.random_range(0..4) {
                0 => f64::INFINITY,
                1 => 0.25,
                _ => rng.random_range(0.1..60.0),
            };
            let got: Vec<(NodeId, f64, u32)> = idx
                .neighbors_in_window(u, t, w)
                .map_err(|e| e.to_string())?
                .iter()
                .map(|n| (n.node, n.t, n.event_id))
                .collect();
            let want = scan_window(&g, dir, u, t, w);
            ensure(got == want, || format!("graph {gi} u={u} t={t} w={w}: {got:?} != {want:?}"))?;
            queries += 1;
        }
    }
    Ok(format!("{queries} window queries identical to a linear scan"))
}

fn c3_uniform_distribution() -> Outcome {
    let edges: Vec<(NodeId, NodeId, f64)> = (1..=10).map(|i| (0, i, i as f64)).collect();
    let g = TemporalGraph::from_edges(11, &edges).unwrap();
    let idx = TemporalAdjacency::build(&g, Directionality::Symmetrized);
    let mut counts = BTreeMap::new();
    let mut gen = RngState::new(303).generator();
    for _ in 0..10_000 {
        let s = sample_neighbors(&idx, 0, 11.0, 1, SamplingStrategy::Uniform { window: 10.0 }, &mut gen).map_err(|e| e.to_string())?;
        ensure(s.len() == 1, || "k=1 must yield one neighbor".into())?;
        *counts.entry(s[0].node).or_insert(0usize) += 1;
    }
    ensure(counts.len() == 10, || format!("only {} candidates drawn", counts.len()))?;
    let (lo, hi) = (counts.values().min().copied().unwrap(), counts.values().max().copied().unwrap());
    ensure(lo >= 850 && hi <= 1150, || format!("counts {counts:?}"))?;
    Ok(format!("10 candidates, counts within [{lo}, {hi}]"))
}

fn snapshot_mode(rng: &mut StdRng, events: usize) -> PartitionMode {
    match rng.random_range(0..3) {
        0 => PartitionMode::FixedWidth { width: rng.random_range(0.5..40.0) },
        1 => PartitionMode::FixedCount { count: rng.random_range(1..30) },
        _ => PartitionMode::FixedEvents { events: rng.random_range(1..events.max(2)) },
    }
}

fn c4_snapshot_partition() -> Outcome {
    let mut rng = StdRng::seed_from_u64(404);
    let mut total = 0usize;
    for gi in 0..50 {
        let n_events = rng.random_range(1..600);
        let nodes = rng.random_range(2..50);
        let g = random_graph(&mut rng, nodes, n_events, 200.0);
        let mode = snapshot_mode(&mut rng, n_events);
        let spec = SnapshotSpec::new(mode).coalesce(Coalesce::KeepAll).accumulation(Accumulation::Interval);
        let snaps = make_snapshots(&g, &spec).map_err(|e| e.to_string())?;
        let mut got: Vec<(NodeId, NodeId, u64)> = Vec::new();
        for s in &snaps {
            for e in &s.edges {
                ensure(s.contains(e.t), || format!("graph {gi}: edge at {} outside snapshot {}", e.t, s.index))?;
                for _ in 0..e.weight {
                    got.push((e.src, e.dst, e.t.to_bits()));
                }
            }
        }
        let mut want: Vec<(NodeId, NodeId, u64)> = g
            .events()
            .iter()
            .filter(|e| e.kind == EventKind::EdgeAdd)
            .map(|e| (e.src, e.dst.unwrap(), e.time().to_bits()))
            .collect();
        got.sort_unstable();
        want.sort_unstable();
        ensure(got == want, || format!("graph {gi} ({mode:?}): {} snapshot edges vs {} adds", got.len(), want.len()))?;
        total += want.len();
    }
    Ok(format!("50 graphs, {total} edge events partitioned exactly"))
}

fn forced_stream() -> TemporalGraph {
    // 400 distinct training pairs, then validation and test positives that
    // all repeat a training pair.
    let mut rng = StdRng::seed_from_u64(505);
    let mut edges = Vec::new();
    let mut pairs = Vec::new();
    while pairs.len() < 400 {
        let (u, v) = (rng.random_range(0..60u32), rng.random_range(0..60u32));
        if u != v && !pairs.contains(&(u.min(v), u.max(v))) {
            pairs.push((u.min(v), u.max(v)));
        }
    }
    for (i, &(u, v)) in pairs.iter().enumerate() {
        edges.push((u, v, i as f64));
    }
    for i in 0..200 {
        let (u, v) = pairs[rng.random_range(0..pairs.len())];
        edges.push((u, v, 400.0 + i as f64));
    }
    TemporalGraph::from_edges(60, &edges).unwrap()
}

fn c5_forced_edgebank() -> Outcome {
    let start = Instant::now();
    let g = forced_stream();
    let split = chronological_split(&g, &SplitSpec::default()).map_err(|e| e.to_string())?;
    ensure(split.t_val_end >= 400.0, || "test period must start after training".into())?;
    let dir = Directionality::Symmetrized;
    let mut results = Vec::new();
    for (strategy, fallback, want) in [
        (NegativeStrategy::Random, Fallback::ToRandom, 1.0),
        (NegativeStrategy::Historical, Fallback::Strict, 0.5),
    ] {
        let spec = NegativeSpec {
            strategy,
            per_positive: 5,
            seed: 55,
            fallback,
            ..Default::default()
        };
        let mut bank = EdgeBank::new(EdgeBankVariant::Infinite, dir).map_err(|e| e.to_string())?;
        let m = evaluate_link_prediction(&g, &split, &mut bank, &spec, 20, dir).map_err(|e| e.to_string())?;
        ensure(m.topped_up == 0, || "historical negatives were topped up with random ones".into())?;
        ensure(m.overall.auc == want, || format!("{strategy:?}: AUC {} != {want}", m.overall.auc))?;
        results.push(format!("{strategy:?} AUC={}", m.overall.auc));
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("{}, {elapsed:.2?}", results.join(", ")))
}

fn c6_round_trip() -> Outcome {
    let mut rng = StdRng::seed_from_u64(606);
    for gi in 0..20 {
        let nodes = rng.random_range(2..30);
        let n_events = rng.random_range(1..500);
        let edges = random_edges(&mut rng, nodes, n_events, 150.0);
        let mut events: Vec<(EventKind, NodeId, Option<NodeId>, f64)> =
            edges.iter().map(|&(u, v, t)| (EventKind::EdgeAdd, u, Some(v), t)).collect();
        for _ in 0..rng.random_range(0..20) {
            let &(u, v, t) = &edges[rng.random_range(0..edges.len())];
            events.push((EventKind::EdgeDelete, u, Some(v), t + 0.5));
        }
        let g = TemporalGraph::from_dense(nodes as usize, events).unwrap();
        let width = rng.random_range(1.0..40.0);
        let first = make_snapshots(&g, &SnapshotSpec::new(PartitionMode::FixedWidth { width })).map_err(|e| e.to_string())?;
        let stream = snapshots_to_events(&first).map_err(|e| e.to_string())?;
        let offset = first.iter().position(|s| !s.edges.is_empty()).unwrap_or(0);
        let second = make_snapshots(&stream, &SnapshotSpec::new(PartitionMode::FixedWidth { width: 1.0 })).map_err(|e| e.to_string())?;
        let key = |s: &tgl::snapshot::Snapshot| s.edges.iter().map(|e| (e.src, e.dst, e.weight)).collect::<Vec<_>>();
        let trimmed: Vec<_> = first.iter().skip(offset).map(key).collect();
        let last = trimmed.iter().rposition(|s| !s.is_empty()).map_or(0, |p| p + 1);
        let back: Vec<_> = second.iter().map(key).collect();
        ensure(trimmed[..last] == back[..], || format!("graph {gi} width {width}: snapshot edge sets differ"))?;
        ensure(
            first[..offset].iter().all(|s| s.edges.is_empty()) && trimmed[last..].iter().all(Vec::is_empty),
            || "non-empty snapshot lost".into(),
        )?;
    }
    Ok("20 graphs: FixedWidth snapshots survive the event round trip".into())
}

fn auc_oracle(pos: &[f64], neg: &[f64]) -> f64 {
    let mut s = 0.0;
    for &p in pos {
        for &n in neg {
            s += if p > n { 1.0 } else if p == n { 0.5 } else { 0.0 };
        }
    }
    s / (pos.len() * neg.len()) as f64
}

/// Pessimistic AP by counting: the positives of a tie group sit after every
/// negative with the same or higher score.
fn ap_oracle(pos: &[f64], neg: &[f64]) -> f64 {
    let mut distinct: Vec<f64> = pos.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut sum = 0.0;
    for s in distinct {
        let above = pos.iter().filter(|&&p| p > s).count() as f64;
        let neg_at_or_above = neg.iter().filter(|&&n| n >= s).count() as f64;
        let m = pos.iter().filter(|&&p| p == s).count();
        for r in 1..=m {
            let r = r as f64;
            sum += (above + r) / (above + neg_at_or_above + r);
        }
    }
    sum / pos.len() as f64
}

fn mrr_oracle(pos: &[f64], neg: &[f64]) -> f64 {
    pos.iter()
        .map(|&p| {
            let better = neg.iter().filter(|&&n| n > p).count() as f64;
            let tied = neg.iter().filter(|&&n| n == p).count() as f64;
            1.0 / (1.0 + better + tied / 2.0)
        })
        .sum::<f64>()
        / pos.len() as f64
}

fn all_vectors(len: usize) -> Vec<Vec<f64>> {
    const LEVELS: [f64; 3] = [0.0, 0.5, 1.0];
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| LEVELS.iter().map(move |&x| [v.clone(), vec![x]].concat()))
            .collect();
    }
    out
}

fn c7_metric_oracle() -> Outcome {
    let vectors: Vec<Vec<f64>> = (1..=5).flat_map(all_vectors).collect();
    let mut configs = 0usize;
    for pos in &vectors {
        for neg in &vectors {
            let groups: Vec<(f64, Vec<f64>)> = pos.iter().map(|&p| (p, neg.clone())).collect();
            let got = [
                auc(pos, neg).map_err(|e| e.to_string())?,
                average_precision(pos, neg).map_err(|e| e.to_string())?,
                mrr(&groups).map_err(|e| e.to_string())?,
            ];
            let want = [auc_oracle(pos, neg), ap_oracle(pos, neg), mrr_oracle(pos, neg)];
            for (name, g, w) in [("AUC", got[0], want[0]), ("AP", got[1], want[1]), ("MRR", got[2], want[2])] {
                ensure((g - w).abs() <= 1e-12, || format!("{name} pos={pos:?} neg={neg:?}: {g} != {w}"))?;
            }
            configs += 1;
        }
    }
    Ok(format!("{configs} score configurations match enumeration within 1e-12"))
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_tgl"))
        .args(args)
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.success(), || format!("tgl {args:?} exited with {status}"))
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_file() {
            out.insert(p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap());
        }
    }
    out
}

fn c8_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = StdRng::seed_from_u64(808);
    let mut csv = String::from("src,dst,t\n");
    for (u, v, t) in random_edges(&mut rng, 80, 4000, 500.0) {
        csv.push_str(&format!("n{u},n{v},{t}\n"));
    }
    let data = tmp.path().join("events.csv");
    std::fs::write(&data, csv).map_err(|e| e.to_string())?;
    let config = tmp.path().join("run.yaml");
    std::fs::write(
        &config,
        format!(
            "dataset: {}\nout: {}\nseed: 17\nnegatives:\n  strategy: historical\n  per_positive: 4\neval:\n  batch_size: 50\n",
            data.display(),
            tmp.path().join("out").display()
        ),
    )
    .map_err(|e| e.to_string())?;
    let cfg = config.to_string_lossy().into_owned();

    let mut runs = Vec::new();
    for _ in 0..2 {
        run_cli(&["eval-link", "--config", &cfg])?;
        runs.push(read_tree(&tmp.path().join("out")));
    }
    ensure(runs[0].len() >= 4, || format!("expected outputs, found {:?}", runs[0].keys()))?;
    ensure(runs[0] == runs[1], || "outputs differ between identical runs".into())?;
    Ok(format!("{} output files byte-identical across two runs", runs[0].len()))
}

fn c9_throughput() -> Outcome {
    let mut rng = StdRng::seed_from_u64(909);
    let build = Instant::now();
    let g = random_graph(&mut rng, 100_000, 1_000_000, 1_000_000.0);
    let idx = TemporalAdjacency::build(&g, Directionality::Symmetrized);
    let build_time = build.elapsed();
    let cfg = KhopConfig::new(vec![10, 10], SamplingStrategy::Uniform { window: f64::INFINITY });
    let start = Instant::now();
    let mut edges = 0usize;
    for b in 0..1000u64 {
        let seeds: Vec<(NodeId, f64)> = (0..200)
            .map(|_| (rng.random_range(0..100_000), rng.random_range(0.0..1_000_000.0)))
            .collect();
        edges += sample_khop(&idx, &seeds, &cfg, RngState::new(b)).map_err(|e| e.to_string())?.num_edges();
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("sampling took {elapsed:?}"))?;
    Ok(format!("1000 batches ({edges} edges) in {elapsed:.2?}; graph + index build {build_time:.2?}"))
}

fn c10_feature_leakage() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1010);
    let rows = 500;
    let times: Vec<f64> = (0..rows).map(|i| i as f64).collect();
    let values: Vec<f64> = (0..rows).map(|_| rng.random_range(-50.0..50.0)).collect();
    let t_fit = 300.0;
    let frame = |times: &[f64], values: &[f64]| {
        let mut f = FeatureFrame::new(times.to_vec());
        f.add_column("x", ColumnValues::Numeric(values.to_vec())).unwrap();
        f
    };
    let clean = frame(&times, &values);
    let params = fit_transform_params(&clean, "x", TransformKind::ZScore, t_fit).map_err(|e| e.to_string())?;

    let (mut pt, mut pv) = (times.clone(), values.clone());
    pt.push(t_fit);
    pv.push(1e12);
    pt.push(t_fit + 1.0);
    pv.push(-1e12);
    let poisoned = fit_transform_params(&frame(&pt, &pv), "x", TransformKind::ZScore, t_fit).map_err(|e| e.to_string())?;
    let bits = |p: &Transform| match *p {
        Transform::ZScore { mean, std, .. } => Ok((mean.to_bits(), std.to_bits())),
        _ => Err("not a z-score".to_string()),
    };
    ensure(bits(&params.transform)? == bits(&poisoned.transform)?, || "poisoned rows changed the fit".into())?;

    let out = apply_transform(&clean, &params).map_err(|e| e.to_string())?;
    let ColumnValues::Numeric(z) = &out.column("x").unwrap().values else {
        return Err("transformed column is not numeric".into());
    };
    let fit: Vec<f64> = z.iter().zip(&times).filter(|(_, &t)| t < t_fit).map(|(&v, _)| v).collect();
    let n = fit.len() as f64;
    let mean = fit.iter().sum::<f64>() / n;
    let std = (fit.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    ensure(mean.abs() < 1e-9 && (std - 1.0).abs() < 1e-9, || format!("fit rows mean {mean:e}, std {std}"))?;
    Ok(format!("params bit-identical under poisoning; fit rows mean {mean:.1e}, std-1 {:.1e}", std - 1.0))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("no-leakage k-hop sampling", c1_no_leakage),
        ("index matches linear-scan oracle", c2_index_oracle),
        ("uniform sampler distribution", c3_uniform_distribution),
        ("snapshot partition", c4_snapshot_partition),
        ("forced EdgeBank AUC", c5_forced_edgebank),
        ("snapshot conversion round trip", c6_round_trip),
        ("metric oracle", c7_metric_oracle),
        ("eval-link determinism", c8_determinism),
        ("throughput smoke", c9_throughput),
        ("feature leakage guard", c10_feature_leakage),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
