//! Data ingestion, configuration, and report serialization.
//!
//! File surfaces: the delay CSV (one numeric value per row, optional
//! header), the experiment config (flat TOML with one level of policy
//! blocks), the versioned threshold-table CSV, and report CSV writers. All
//! writers are deterministic: fixed column orders, no timestamps, and every
//! report header embeds the config hash, the seed, and the artifact
//! version.

use crate::experiment::{BumpAccounting, ExperimentPlan, NamedPolicy, PolicyRequest};
use crate::model::{round_to_epochs, Epoch, Instance, ModelError};
use crate::policy::{default_naw_grid, Aggregator, PolicyError, ThresholdTable};
use crate::prefs::{PreferenceKind, PreferenceSpec, PERTURBED_WINDOW};
use crate::sim::{DelaySource, SyntheticDelays};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("io failure on {path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: not a numeric delay: `{content}`")]
    NonNumericRow {
        path: String,
        line: usize,
        content: String,
    },
    #[error("{0}: no delay samples in file")]
    EmptyFile(String),
    #[error("non-response probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("threshold table file malformed: {0}")]
    BadTable(String),
    #[error("config malformed: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Unit of the raw delay samples on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DelayUnit {
    Seconds,
    Minutes,
}

/// Sorted empirical response-delay sample in epochs, with the probability
/// of never responding at all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDelayDistribution {
    samples: Vec<Epoch>,
    pub non_response_probability: f64,
    pub provenance: String,
}

impl EmpiricalDelayDistribution {
    pub fn new(
        mut samples: Vec<Epoch>,
        non_response_probability: f64,
        provenance: String,
    ) -> Result<Self, IoError> {
        if samples.is_empty() {
            return Err(IoError::EmptyFile(provenance));
        }
        if !(0.0..=1.0).contains(&non_response_probability) {
            return Err(IoError::BadProbability(non_response_probability));
        }
        samples.sort_unstable();
        Ok(EmpiricalDelayDistribution {
            samples,
            non_response_probability,
            provenance,
        })
    }

    pub fn samples(&self) -> &[Epoch] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Inverse-CDF draw: a uniform rank selects the sorted sample.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Epoch {
        self.samples[rng.gen_range(0..self.samples.len())]
    }
}

/// Parses a delay file (one numeric value per row, optional single header
/// row), converts to epochs with the ties-up rounding rule, and attaches
/// the non-response probability.
pub fn ingest_delays(
    path: &Path,
    unit: DelayUnit,
    non_response_probability: f64,
) -> Result<EmpiricalDelayDistribution, IoError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: display.clone(),
        source,
    })?;
    let mut samples = Vec::new();
    let mut first_data_row = true;
    for (idx, raw) in text.lines().enumerate() {
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        match row.parse::<f64>() {
            Ok(value) if value > 0.0 && value.is_finite() => {
                let minutes = match unit {
                    DelayUnit::Seconds => value / 60.0,
                    DelayUnit::Minutes => value,
                };
                samples.push(round_to_epochs(minutes));
                first_data_row = false;
            }
            _ if first_data_row => {
                // a single leading header row is tolerated
                first_data_row = false;
            }
            _ => {
                return Err(IoError::NonNumericRow {
                    path: display,
                    line: idx + 1,
                    content: row.to_string(),
                });
            }
        }
    }
    EmpiricalDelayDistribution::new(samples, non_response_probability, display)
}

// ---------------------------------------------------------------------------
// Threshold-table CSV (versioned, lossless round trip).
// ---------------------------------------------------------------------------

const TABLE_FORMAT: &str = "ntp-threshold-table v1";

pub fn threshold_table_to_csv(table: &ThresholdTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {TABLE_FORMAT}");
    let _ = writeln!(out, "# aggregator: {}", table.aggregator);
    let _ = writeln!(out, "# trained_on: {}", table.trained_on);
    let _ = writeln!(out, "# dropped: {}", table.dropped);
    out.push_str("epoch,target\n");
    for (epoch, target) in table.targets().iter().enumerate() {
        let _ = writeln!(out, "{epoch},{target}");
    }
    out
}

pub fn threshold_table_from_csv(text: &str) -> Result<ThresholdTable, IoError> {
    let mut lines = text.lines();
    let version = lines
        .next()
        .ok_or_else(|| IoError::BadTable("empty file".into()))?;
    if version.trim() != format!("# {TABLE_FORMAT}") {
        return Err(IoError::BadTable(format!(
            "unsupported format line `{version}`"
        )));
    }
    let mut aggregator = String::from("unknown");
    let mut trained_on = 0usize;
    let mut dropped = 0usize;
    let mut targets = Vec::new();
    for line in lines {
        let line = line.trim();
        if line.is_empty() || line == "epoch,target" {
            continue;
        }
        if let Some(meta) = line.strip_prefix("# ") {
            if let Some((key, value)) = meta.split_once(": ") {
                match key {
                    "aggregator" => aggregator = value.to_string(),
                    "trained_on" => {
                        trained_on = value
                            .parse()
                            .map_err(|_| IoError::BadTable(format!("bad trained_on `{value}`")))?
                    }
                    "dropped" => {
                        dropped = value
                            .parse()
                            .map_err(|_| IoError::BadTable(format!("bad dropped `{value}`")))?
                    }
                    _ => {}
                }
            }
            continue;
        }
        let (epoch, target) = line
            .split_once(',')
            .ok_or_else(|| IoError::BadTable(format!("bad row `{line}`")))?;
        let epoch: usize = epoch
            .parse()
            .map_err(|_| IoError::BadTable(format!("bad epoch `{epoch}`")))?;
        if epoch != targets.len() {
            return Err(IoError::BadTable(format!(
                "epochs must be contiguous from 0, found {epoch} at position {}",
                targets.len()
            )));
        }
        let target: f64 = target
            .parse()
            .map_err(|_| IoError::BadTable(format!("bad target `{target}`")))?;
        targets.push(target);
    }
    Ok(ThresholdTable::new(targets, aggregator, trained_on, dropped)?)
}

// ---------------------------------------------------------------------------
// Report plumbing.
// ---------------------------------------------------------------------------

pub fn artifact_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// Hex SHA-256 of a canonical configuration string; reports embed it so any
/// row can be regenerated bit-exact.
pub fn config_hash(canonical: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    let digest = hasher.finalize();
    digest.iter().fold(String::new(), |mut acc, b| {
        let _ = write!(acc, "{b:02x}");
        acc
    })
}

/// Standard comment header carried by every report file.
pub fn report_header(kind: &str, config: &str, seed: u64) -> String {
    format!(
        "# ntp-report {kind} v1\n# version: {}\n# config-hash: {}\n# seed: {seed}\n",
        artifact_version(),
        config_hash(config),
    )
}

/// Plot-data CSV of a threshold table: epoch vs cumulative notification
/// target (one curve per file).
pub fn plot_data_csv(table: &ThresholdTable) -> String {
    let mut out = String::from("epoch,cumulative_notifications\n");
    for (epoch, target) in table.targets().iter().enumerate() {
        let _ = writeln!(out, "{epoch},{target}");
    }
    out
}

// ---------------------------------------------------------------------------
// Experiment configuration (flat TOML, one level of policy blocks).
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: u64,
    employees: usize,
    shifts: usize,
    horizon: Epoch,
    cutoff: Epoch,
    cap: u32,
    penalty: u64,
    #[serde(default = "default_train")]
    train: usize,
    #[serde(default = "default_eval_split")]
    validation: usize,
    #[serde(default = "default_eval_split")]
    test: usize,
    #[serde(default)]
    accounting: Option<String>,
    #[serde(default)]
    solve_time_limit_secs: Option<u64>,
    delays: RawDelays,
    preferences: RawPreferences,
    #[serde(rename = "policy")]
    policies: Vec<RawPolicy>,
}

fn default_train() -> usize {
    1000
}

fn default_eval_split() -> usize {
    500
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDelays {
    kind: String,
    #[serde(default)]
    mean_minutes: Option<f64>,
    #[serde(default)]
    p_nr: Option<f64>,
    #[serde(default)]
    path: Option<String>,
    #[serde(default)]
    unit: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPreferences {
    kind: String,
    #[serde(default)]
    disliked: Option<usize>,
    #[serde(default)]
    window: Option<u32>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    name: String,
    kind: String,
    #[serde(default)]
    batch: Option<u32>,
    #[serde(default)]
    wait: Option<u32>,
    #[serde(default)]
    percentile: Option<u8>,
    #[serde(default)]
    aggregator: Option<String>,
}

/// Default undesirable-shift count when the config does not set one (the
/// source experiments leave the value open).
pub const DEFAULT_DISLIKED: usize = 5;

fn parse_preference_kind(raw: &RawPreferences) -> Result<PreferenceKind, IoError> {
    let disliked = raw.disliked.unwrap_or(DEFAULT_DISLIKED);
    let window = raw.window.unwrap_or(PERTURBED_WINDOW);
    Ok(match raw.kind.as_str() {
        "fixed_ranked" => PreferenceKind::FixedRanked,
        "undesirable" => PreferenceKind::Undesirable { disliked },
        "grouped" => PreferenceKind::Grouped,
        "perturbed" => PreferenceKind::Perturbed { window },
        "perturbed_undesirable" => PreferenceKind::PerturbedUndesirable { disliked, window },
        "uniform" => PreferenceKind::Uniform,
        other => {
            return Err(IoError::BadConfig(format!(
                "unknown preference kind `{other}`"
            )))
        }
    })
}

fn parse_aggregator(raw: &RawPolicy) -> Result<Aggregator, IoError> {
    if let Some(p) = raw.percentile {
        if p == 0 || p > 100 {
            return Err(IoError::BadConfig(format!("percentile {p} outside 1..=100")));
        }
        return Ok(Aggregator::Percentile(p));
    }
    match raw.aggregator.as_deref() {
        Some("mean") | None => Ok(Aggregator::Mean),
        Some(other) => Err(IoError::BadConfig(format!("unknown aggregator `{other}`"))),
    }
}

/// Parses an experiment config. `base` anchors relative delay-file paths.
pub fn parse_experiment_config(text: &str, base: &Path) -> Result<ExperimentPlan, IoError> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| IoError::BadConfig(e.to_string()))?;
    let instance = Instance::new(
        raw.employees,
        raw.shifts,
        raw.horizon,
        raw.cutoff,
        raw.cap,
        raw.penalty,
    )?;

    let delays = match raw.delays.kind.as_str() {
        "synthetic" => DelaySource::Synthetic(SyntheticDelays {
            mean_minutes: raw
                .delays
                .mean_minutes
                .ok_or_else(|| IoError::BadConfig("synthetic delays need mean_minutes".into()))?,
            non_response_probability: raw.delays.p_nr.unwrap_or(0.0),
        }),
        "empirical" => {
            let rel = raw
                .delays
                .path
                .as_ref()
                .ok_or_else(|| IoError::BadConfig("empirical delays need a path".into()))?;
            let unit = match raw.delays.unit.as_deref() {
                Some("seconds") => DelayUnit::Seconds,
                Some("minutes") | None => DelayUnit::Minutes,
                Some(other) => {
                    return Err(IoError::BadConfig(format!("unknown unit `{other}`")))
                }
            };
            let path = base.join(rel);
            DelaySource::Empirical(ingest_delays(&path, unit, raw.delays.p_nr.unwrap_or(0.0))?)
        }
        other => return Err(IoError::BadConfig(format!("unknown delay kind `{other}`"))),
    };

    let preferences = PreferenceSpec::new(
        parse_preference_kind(&raw.preferences)?,
        raw.preferences.seed.unwrap_or(raw.seed),
    );

    let mut policies = Vec::new();
    for p in &raw.policies {
        let request = match p.kind.as_str() {
            "na" => PolicyRequest::NotifyAll,
            "naw" => PolicyRequest::Naw {
                batch: p
                    .batch
                    .ok_or_else(|| IoError::BadConfig("naw needs batch".into()))?,
                wait: p
                    .wait
                    .ok_or_else(|| IoError::BadConfig("naw needs wait".into()))?,
            },
            "naw_tuned" => PolicyRequest::NawTuned,
            "onp" => PolicyRequest::Onp {
                aggregator: parse_aggregator(p)?,
            },
            other => return Err(IoError::BadConfig(format!("unknown policy kind `{other}`"))),
        };
        policies.push(NamedPolicy {
            name: p.name.clone(),
            request,
        });
    }

    let accounting = match raw.accounting.as_deref() {
        Some("potential") => BumpAccounting::Potential,
        Some("realized") | None => BumpAccounting::Realized,
        Some(other) => {
            return Err(IoError::BadConfig(format!(
                "unknown accounting mode `{other}`"
            )))
        }
    };

    Ok(ExperimentPlan {
        instance,
        delays,
        preferences,
        policies,
        train: raw.train,
        validation: raw.validation,
        test: raw.test,
        seed: raw.seed,
        accounting,
        naw_grid: default_naw_grid(),
        solve_time_limit_secs: raw.solve_time_limit_secs.unwrap_or(240),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    #[test]
    fn seconds_are_converted_and_rounded_ties_up() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "delay_seconds\n30\n90").unwrap();
        let dist = ingest_delays(file.path(), DelayUnit::Seconds, 0.5).unwrap();
        assert_eq!(dist.samples(), &[1, 2]);
    }

    #[test]
    fn single_minute_row_survives() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "7").unwrap();
        let dist = ingest_delays(file.path(), DelayUnit::Minutes, 0.0).unwrap();
        assert_eq!(dist.samples(), &[7]);
    }

    #[test]
    fn empty_file_is_rejected() {
        let file = tempfile::NamedTempFile::new().unwrap();
        assert!(matches!(
            ingest_delays(file.path(), DelayUnit::Minutes, 0.0),
            Err(IoError::EmptyFile(_))
        ));
    }

    #[test]
    fn non_numeric_data_row_reports_its_line() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "header\n5\nnonsense\n7").unwrap();
        match ingest_delays(file.path(), DelayUnit::Minutes, 0.0) {
            Err(IoError::NonNumericRow { line, content, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(content, "nonsense");
            }
            other => panic!("expected NonNumericRow, got {other:?}"),
        }
    }

    #[test]
    fn threshold_table_round_trips_losslessly() {
        let table = ThresholdTable::new(
            vec![0.0, 2.5, 7.333333333333333, 12.0],
            "p95".into(),
            100,
            3,
        )
        .unwrap();
        let csv = threshold_table_to_csv(&table);
        let back = threshold_table_from_csv(&csv).unwrap();
        assert_eq!(table, back);
    }

    #[test]
    fn config_parses_with_policy_blocks() {
        let text = r#"
seed = 42
employees = 12
shifts = 6
horizon = 30
cutoff = 10
cap = 12
penalty = 200
train = 100
validation = 50
test = 50

[delays]
kind = "synthetic"
mean_minutes = 6.0
p_nr = 0.5

[preferences]
kind = "fixed_ranked"

[[policy]]
name = "na"
kind = "na"

[[policy]]
name = "naw"
kind = "naw_tuned"

[[policy]]
name = "onp95"
kind = "onp"
percentile = 95
"#;
        let plan = parse_experiment_config(text, Path::new(".")).unwrap();
        assert_eq!(plan.instance.employees, 12);
        assert_eq!(plan.policies.len(), 3);
        assert_eq!(plan.train, 100);
        assert!(matches!(
            plan.policies[2].request,
            PolicyRequest::Onp {
                aggregator: Aggregator::Percentile(95)
            }
        ));
    }

    #[test]
    fn config_hash_is_stable() {
        assert_eq!(config_hash("x"), config_hash("x"));
        assert_ne!(config_hash("x"), config_hash("y"));
    }
}
