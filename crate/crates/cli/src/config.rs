//! Run configuration: defaults, YAML config files and `--key.path=value`
//! overrides. Precedence is command line, then config file, then defaults.

use serde::{Deserialize, Serialize};
use serde_yaml::{Mapping, Value};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Event CSV, or a `.tgev` binary cache written by `ingest`.
    pub dataset: String,
    /// Vocabulary sidecar for a binary cache dataset.
    pub vocabulary: Option<String>,
    /// Dataset name used in output file names; defaults to the file stem.
    pub name: Option<String>,
    pub out: String,
    pub seed: u64,
    pub directed: bool,
    pub split: SplitConfig,
    pub sampler: SamplerConfig,
    pub negatives: NegativesConfig,
    pub snapshot: SnapshotConfig,
    pub scorer: ScorerKind,
    pub edgebank: EdgeBankConfig,
    pub eval: EvalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: "events.csv".into(),
            vocabulary: None,
            name: None,
            out: "out".into(),
            seed: 0,
            directed: false,
            split: SplitConfig::default(),
            sampler: SamplerConfig::default(),
            negatives: NegativesConfig::default(),
            snapshot: SnapshotConfig::default(),
            scorer: ScorerKind::EdgebankInf,
            edgebank: EdgeBankConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train: 0.70,
            val: 0.15,
            test: 0.15,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    MostRecent,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnchorKind {
    SeedTime,
    EdgeTime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub strategy: StrategyKind,
    /// Uniform look-back window; unbounded when absent.
    pub window: Option<f64>,
    pub fanouts: Vec<usize>,
    pub anchor: AnchorKind,
    pub batch_size: usize,
    /// Number of batches `sample` dumps; all of them when absent.
    pub max_batches: Option<usize>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            strategy: StrategyKind::MostRecent,
            window: None,
            fanouts: vec![10, 10],
            anchor: AnchorKind::SeedTime,
            batch_size: 200,
            max_batches: Some(10),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegStrategyKind {
    Random,
    Historical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FallbackKind {
    ToRandom,
    Strict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorruptionKind {
    Destination,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NegativesConfig {
    pub strategy: NegStrategyKind,
    pub per_positive: usize,
    pub fallback: FallbackKind,
    pub corruption: CorruptionKind,
}

impl Default for NegativesConfig {
    fn default() -> Self {
        NegativesConfig {
            strategy: NegStrategyKind::Random,
            per_positive: 1,
            fallback: FallbackKind::ToRandom,
            corruption: CorruptionKind::Destination,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeKind {
    FixedCount,
    FixedWidth,
    FixedEvents,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoalesceKind {
    CountWeight,
    KeepAll,
    Last,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccumulationKind {
    Interval,
    Cumulative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnapshotConfig {
    pub mode: ModeKind,
    /// Window width for `fixed-width`.
    pub w: Option<f64>,
    /// Number of snapshots for `fixed-count`.
    pub k: usize,
    /// Events per snapshot for `fixed-events`.
    pub m: Option<usize>,
    pub coalesce: CoalesceKind,
    pub accumulation: AccumulationKind,
}

impl Default for SnapshotConfig {
    fn default() -> Self {
        SnapshotConfig {
            mode: ModeKind::FixedCount,
            w: None,
            k: 10,
            m: None,
            coalesce: CoalesceKind::CountWeight,
            accumulation: AccumulationKind::Interval,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScorerKind {
    EdgebankInf,
    EdgebankTw,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdgeBankConfig {
    /// Memory window for `edgebank-tw`; the training time span when absent.
    pub window: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub batch_size: usize,
    /// Node label CSV for `eval-node`; event labels are used when absent.
    pub labels: Option<String>,
    pub dynamic: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            batch_size: 200,
            labels: None,
            dynamic: true,
        }
    }
}

fn lookup<'a>(tree: &'a Value, path: &[&str]) -> Option<&'a Value> {
    path.iter().try_fold(tree, |node, key| match node {
        Value::Mapping(m) => m.get(*key),
        _ => None,
    })
}

/// Reports the first key of `user` that the default tree does not have.
fn check_keys(user: &Value, defaults: &Value, prefix: &str) -> Result<(), CliError> {
    let Value::Mapping(m) = user else {
        return Ok(());
    };
    for (k, v) in m {
        let key = match k {
            Value::String(s) => s.clone(),
            other => serde_yaml::to_string(other).unwrap_or_default().trim().to_owned(),
        };
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        match defaults {
            Value::Mapping(d) if d.contains_key(key.as_str()) => {
                let sub = &d[key.as_str()];
                if sub.is_mapping() {
                    check_keys(v, sub, &path)?;
                }
            }
            _ => return Err(CliError::UnknownKey(path)),
        }
    }
    Ok(())
}

fn set_path(tree: &mut Value, path: &[&str], value: Value) {
    if !tree.is_mapping() {
        *tree = Value::Mapping(Mapping::new());
    }
    let Value::Mapping(m) = tree else { unreachable!() };
    if path.len() == 1 {
        m.insert(Value::String(path[0].to_owned()), value);
        return;
    }
    let child = m
        .entry(Value::String(path[0].to_owned()))
        .or_insert_with(|| Value::Mapping(Mapping::new()));
    set_path(child, &path[1..], value);
}

/// A `--key.path=value` argument, split.
#[derive(Clone, Debug, PartialEq)]
pub struct Override {
    pub key: String,
    pub value: String,
}

impl Override {
    pub fn parse(arg: &str) -> Result<Self, CliError> {
        let body = arg
            .strip_prefix("--")
            .ok_or_else(|| CliError::Usage(format!("expected --key=value, got `{arg}`")))?;
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected --key=value, got `{arg}`")))?;
        if key.is_empty() {
            return Err(CliError::Usage(format!("empty key in `{arg}`")));
        }
        Ok(Override {
            key: key.to_owned(),
            value: value.to_owned(),
        })
    }
}

impl RunConfig {
    /// Builds the effective config from an optional YAML document and
    /// overrides. An override key that is not a full path is looked up in
    /// `section` (e.g. `--k=1` under `snapshot` means `snapshot.k`).
    pub fn resolve(yaml: Option<&str>, overrides: &[Override], section: Option<&str>) -> Result<Self, CliError> {
        let defaults = serde_yaml::to_value(RunConfig::default()).expect("defaults serialize");
        let mut user = match yaml {
            Some(text) => serde_yaml::from_str::<Value>(text).map_err(|e| CliError::Config(format!("config file: {e}")))?,
            None => Value::Null,
        };
        if user.is_null() {
            user = Value::Mapping(Mapping::new());
        }
        if !user.is_mapping() {
            return Err(CliError::Config("config file must be a mapping".into()));
        }
        check_keys(&user, &defaults, "")?;

        for o in overrides {
            let direct: Vec<&str> = o.key.split('.').collect();
            let path = if lookup(&defaults, &direct).is_some() {
                direct
            } else {
                let scoped: Option<Vec<&str>> = section.map(|s| std::iter::once(s).chain(direct.iter().copied()).collect());
                match scoped {
                    Some(p) if lookup(&defaults, &p).is_some() => p,
                    _ => return Err(CliError::UnknownKey(o.key.clone())),
                }
            };
            let value: Value = serde_yaml::from_str(&o.value).map_err(|e| CliError::Config(format!("--{}: {e}", o.key)))?;
            set_path(&mut user, &path, value);
        }

        serde_yaml::from_value(user).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_yaml(&self) -> String {
        serde_yaml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(s: &str) -> Override {
        Override::parse(s).unwrap()
    }

    #[test]
    fn defaults_round_trip_through_echo() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::resolve(Some(&cfg.to_yaml()), &[], None).unwrap(), cfg);
        assert_eq!(RunConfig::resolve(None, &[], None).unwrap(), cfg);
    }

    #[test]
    fn precedence() {
        let yaml = "seed: 5\nsnapshot:\n  k: 3\n";
        let cfg = RunConfig::resolve(Some(yaml), &[ov("--seed=9")], None).unwrap();
        assert_eq!((cfg.seed, cfg.snapshot.k), (9, 3));
        assert_eq!(cfg.split, SplitConfig::default());
    }

    #[test]
    fn section_fallback_and_values() {
        let cfg = RunConfig::resolve(
            None,
            &[ov("--mode=fixed-width"), ov("--w=2.5"), ov("--sampler.fanouts=[3,4]"), ov("--scorer=edgebank-tw")],
            Some("snapshot"),
        )
        .unwrap();
        assert_eq!(cfg.snapshot.mode, ModeKind::FixedWidth);
        assert_eq!(cfg.snapshot.w, Some(2.5));
        assert_eq!(cfg.sampler.fanouts, vec![3, 4]);
        assert_eq!(cfg.scorer, ScorerKind::EdgebankTw);
    }

    #[test]
    fn unknown_keys_name_their_path() {
        let err = RunConfig::resolve(Some("sampler:\n  fanout: [1]\n"), &[], None).unwrap_err();
        assert!(matches!(err, CliError::UnknownKey(ref k) if k == "sampler.fanout"), "{err:?}");
        let err = RunConfig::resolve(None, &[ov("--negatives.stratgy=random")], None).unwrap_err();
        assert!(matches!(err, CliError::UnknownKey(ref k) if k == "negatives.stratgy"));
        let err = RunConfig::resolve(None, &[ov("--k=1")], Some("sampler")).unwrap_err();
        assert!(matches!(err, CliError::UnknownKey(ref k) if k == "k"));
        let err = RunConfig::resolve(None, &[ov("--seed.x=1")], None).unwrap_err();
        assert!(matches!(err, CliError::UnknownKey(_)));
    }

    #[test]
    fn bad_values_are_config_errors() {
        assert!(matches!(RunConfig::resolve(None, &[ov("--seed=abc")], None), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::resolve(None, &[ov("--negatives.strategy=sometimes")], None), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::resolve(Some("- 1\n"), &[], None), Err(CliError::Config(_))));
        assert!(Override::parse("seed=1").is_err());
        assert!(Override::parse("--seed").is_err());
    }
}
