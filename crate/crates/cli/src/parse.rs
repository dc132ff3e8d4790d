//! Flag parsing helpers and small text serializers for the CLI.

use crate::SourceArgs;
use anyhow::{bail, Context, Result};
use ntp_core::io::{ingest_delays, threshold_table_from_csv, DelayUnit};
use ntp_core::policy::{Aggregator, PolicySpec};
use ntp_core::prefs::{PreferenceKind, PreferenceSpec, PERTURBED_WINDOW};
use ntp_core::sim::{DelaySource, SyntheticDelays};
use ntp_core::{Delay, DelayScenario, Instance, NotificationSchedule};
use std::collections::BTreeSet;
use std::fmt::Write as _;

pub fn parse_delays(list: &str, employees: usize) -> Result<DelayScenario> {
    let delays: Vec<Delay> = list
        .split(',')
        .map(|tok| {
            let tok = tok.trim();
            if tok.eq_ignore_ascii_case("nr") {
                Ok(Delay::NonResponder)
            } else {
                tok.parse::<u32>()
                    .map(Delay::Finite)
                    .with_context(|| format!("bad delay `{tok}` (a positive integer or `nr`)"))
            }
        })
        .collect::<Result<_>>()?;
    if delays.len() != employees {
        bail!(
            "got {} delays for {} employees",
            delays.len(),
            employees
        );
    }
    Ok(DelayScenario::new(delays)?)
}

pub fn format_delay(delay: Delay) -> String {
    match delay {
        Delay::Finite(r) => r.to_string(),
        Delay::NonResponder => "nr".into(),
    }
}

/// `na` | `naw:3,7` | `onp:thresholds.csv` | `replay:schedule.csv`
pub fn parse_policy(text: &str) -> Result<PolicySpec> {
    if text == "na" {
        return Ok(PolicySpec::NotifyAll);
    }
    if let Some(params) = text.strip_prefix("naw:") {
        let (batch, wait) = params
            .split_once(',')
            .context("naw takes batch,wait (for example naw:3,7)")?;
        return Ok(PolicySpec::naw(batch.trim().parse()?, wait.trim().parse()?)?);
    }
    if let Some(path) = text.strip_prefix("onp:") {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading threshold table {path}"))?;
        // tolerate a report header in front of the table itself
        let body = text
            .find("# ntp-threshold-table")
            .map(|at| &text[at..])
            .unwrap_or(&text);
        let table = threshold_table_from_csv(body)?;
        return Ok(PolicySpec::Onp { table });
    }
    if let Some(path) = text.strip_prefix("replay:") {
        let schedule = read_schedule_csv(path)?;
        return Ok(PolicySpec::Replay { schedule });
    }
    bail!("unknown policy `{text}` (na, naw:B,W, onp:FILE, replay:FILE)")
}

/// `fixed` | `undesirable:5` | `grouped` | `perturbed` |
/// `perturbed-undesirable:5` | `uniform`
pub fn parse_prefs(text: &str, seed: u64) -> Result<PreferenceSpec> {
    let (kind, arg) = match text.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (text, None),
    };
    let disliked = || -> Result<usize> {
        arg.map(|a| a.parse().context("disliked count must be an integer"))
            .unwrap_or(Ok(ntp_core::io::DEFAULT_DISLIKED))
    };
    let kind = match kind {
        "fixed" | "fixed_ranked" => PreferenceKind::FixedRanked,
        "undesirable" => PreferenceKind::Undesirable {
            disliked: disliked()?,
        },
        "grouped" => PreferenceKind::Grouped,
        "perturbed" => PreferenceKind::Perturbed {
            window: PERTURBED_WINDOW,
        },
        "perturbed-undesirable" => PreferenceKind::PerturbedUndesirable {
            disliked: disliked()?,
            window: PERTURBED_WINDOW,
        },
        "uniform" => PreferenceKind::Uniform,
        other => bail!("unknown preference kind `{other}`"),
    };
    Ok(PreferenceSpec::new(kind, seed))
}

/// `mean` or `pNN` (nearest-rank percentile).
pub fn parse_aggregator(text: &str) -> Result<Aggregator> {
    if text == "mean" {
        return Ok(Aggregator::Mean);
    }
    if let Some(level) = text.strip_prefix('p') {
        let level: u8 = level.parse().context("percentile level must be 1..=100")?;
        if level == 0 || level > 100 {
            bail!("percentile level {level} outside 1..=100");
        }
        return Ok(Aggregator::Percentile(level));
    }
    bail!("unknown aggregator `{text}` (mean or pNN)")
}

pub fn parse_blocks(list: &str) -> Result<BTreeSet<usize>> {
    list.split(',')
        .map(|tok| {
            let k: usize = tok.trim().parse().context("block indices are 1-based integers")?;
            if k == 0 {
                bail!("block indices are 1-based");
            }
            Ok(k - 1)
        })
        .collect()
}

pub fn scenario_source(args: &SourceArgs) -> Result<DelaySource> {
    match (&args.delays_file, args.synthetic_mean) {
        (Some(path), None) => {
            let unit = match args.unit.as_str() {
                "seconds" => DelayUnit::Seconds,
                "minutes" => DelayUnit::Minutes,
                other => bail!("unknown unit `{other}`"),
            };
            Ok(DelaySource::Empirical(ingest_delays(
                path, unit, args.p_nr,
            )?))
        }
        (None, Some(mean)) => Ok(DelaySource::Synthetic(SyntheticDelays {
            mean_minutes: mean,
            non_response_probability: args.p_nr,
        })),
        (Some(_), Some(_)) => bail!("pick either --delays-file or --synthetic-mean"),
        (None, None) => bail!("a delay source is required: --delays-file or --synthetic-mean"),
    }
}

pub fn instance_canon(inst: &Instance) -> String {
    format!(
        "M={},L={},H={},D={},W={},G={}",
        inst.employees, inst.shifts, inst.horizon, inst.cutoff, inst.notify_cap, inst.vacancy_penalty
    )
}

/// Schedule CSV body: `employee,notify_time,response_time` with 1-based
/// employees and `inf` for non-responders.
pub fn schedule_csv(schedule: &NotificationSchedule, scenario: &DelayScenario) -> String {
    let mut out = String::from("employee,notify_time,response_time\n");
    for (i, &s) in schedule.notify_times().iter().enumerate() {
        let response = scenario
            .delay(i)
            .response_time(s)
            .map_or("inf".to_string(), |e| e.to_string());
        let _ = writeln!(out, "{},{},{}", i + 1, s, response);
    }
    out
}

pub fn read_schedule_csv(path: &str) -> Result<NotificationSchedule> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading schedule {path}"))?;
    let mut times = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("employee,") {
            continue;
        }
        let mut fields = line.split(',');
        let _employee = fields.next();
        let notify = fields
            .next()
            .with_context(|| format!("bad schedule row `{line}`"))?;
        times.push(notify.trim().parse::<u32>()?);
    }
    if times.is_empty() {
        bail!("{path}: schedule file has no rows");
    }
    Ok(NotificationSchedule::new(times)?)
}
