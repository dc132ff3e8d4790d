//! Notification policies and threshold estimation from offline solutions.
//!
//! Four policy shapes: notify-all, notify-eta-and-wait-w, the offline
//! notification policy (ONP, a time-indexed cumulative-notification
//! threshold), and schedule replay. Thresholds are estimated by solving the
//! vacancy-priced offline model exactly per scenario and aggregating the
//! cumulative-notification curves epoch by epoch.

use crate::milp::{solve_ntp2_exact, SolveLimits, SolveStatus};
use crate::model::{Epoch, Instance, ModelError, NotificationSchedule};
use crate::prefs::PreferenceSpec;
use crate::sim::{simulate, ScenarioSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("threshold table invariant violated: {0}")]
    InvalidTable(String),
    #[error("policy parameter invalid: {0}")]
    InvalidParameter(String),
    #[error("no scenario survived the solve-time budget ({0} dropped)")]
    AllScenariosDropped(usize),
    #[error("empty tuning grid")]
    EmptyGrid,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Statistic that collapses per-scenario offline notification curves into
/// one threshold per epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Aggregator {
    Mean,
    /// Nearest-rank percentile (level in 1..=100).
    Percentile(u8),
}

impl Aggregator {
    pub fn apply(&self, sample: &[f64]) -> f64 {
        debug_assert!(!sample.is_empty());
        match self {
            Aggregator::Mean => sample.iter().sum::<f64>() / sample.len() as f64,
            Aggregator::Percentile(level) => {
                let mut sorted = sample.to_vec();
                sorted.sort_by(|a, b| a.total_cmp(b));
                let rank = ((*level as f64 / 100.0) * sorted.len() as f64).ceil() as usize;
                sorted[rank.clamp(1, sorted.len()) - 1]
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Aggregator::Mean => "mean".into(),
            Aggregator::Percentile(p) => format!("p{p}"),
        }
    }
}

/// Cumulative-notification targets, one per epoch `0..=H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    targets: Vec<f64>,
    pub aggregator: String,
    pub trained_on: usize,
    pub dropped: usize,
}

impl ThresholdTable {
    pub fn new(
        targets: Vec<f64>,
        aggregator: String,
        trained_on: usize,
        dropped: usize,
    ) -> Result<Self, PolicyError> {
        if targets.is_empty() {
            return Err(PolicyError::InvalidTable("no epochs".into()));
        }
        if targets.windows(2).any(|w| w[0] > w[1]) {
            return Err(PolicyError::InvalidTable(
                "targets must be nondecreasing in the epoch".into(),
            ));
        }
        if targets.iter().any(|t| *t < 0.0 || !t.is_finite()) {
            return Err(PolicyError::InvalidTable(
                "targets must be finite and nonnegative".into(),
            ));
        }
        Ok(ThresholdTable {
            targets,
            aggregator,
            trained_on,
            dropped,
        })
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn target_at(&self, epoch: Epoch) -> f64 {
        let k = (epoch as usize).min(self.targets.len() - 1);
        self.targets[k]
    }
}

/// What a policy can see when asked for a decision.
#[derive(Debug, Clone, Copy)]
pub struct StateSummary {
    pub employees: usize,
    pub assigned: usize,
    pub responded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PolicySpec {
    /// Notify every remaining employee at epoch 0.
    NotifyAll,
    /// Notify `batch` employees every `wait` epochs.
    NotifyAndWait { batch: u32, wait: u32 },
    /// Close the gap to the threshold table's cumulative target.
    Onp { table: ThresholdTable },
    /// Reproduce a fixed schedule.
    Replay { schedule: NotificationSchedule },
}

impl PolicySpec {
    pub fn naw(batch: u32, wait: u32) -> Result<Self, PolicyError> {
        if batch == 0 || wait == 0 {
            return Err(PolicyError::InvalidParameter(
                "notify-and-wait needs batch >= 1 and wait >= 1".into(),
            ));
        }
        Ok(PolicySpec::NotifyAndWait { batch, wait })
    }

    pub fn label(&self) -> String {
        match self {
            PolicySpec::NotifyAll => "na".into(),
            PolicySpec::NotifyAndWait { batch, wait } => format!("naw({batch},{wait})"),
            PolicySpec::Onp { table } => format!("onp[{}]", table.aggregator),
            PolicySpec::Replay { .. } => "replay".into(),
        }
    }
}

/// Number of notifications the policy wants to send at epoch `k`, given
/// `notified` already sent. Uncapped: the harness, not the policy, applies
/// the per-epoch cap.
pub fn decide(spec: &PolicySpec, k: Epoch, notified: usize, summary: &StateSummary) -> u32 {
    let remaining = (summary.employees - notified) as u32;
    match spec {
        PolicySpec::NotifyAll => {
            if k == 0 {
                remaining
            } else {
                0
            }
        }
        PolicySpec::NotifyAndWait { batch, wait } => {
            if k.is_multiple_of(*wait) {
                *batch
            } else {
                0
            }
        }
        PolicySpec::Onp { table } => {
            let residual = table.target_at(k) - notified as f64;
            // nearest integer, ties away from zero
            (residual.round().max(0.0) as u32).min(remaining)
        }
        PolicySpec::Replay { schedule } => schedule
            .notify_times()
            .iter()
            .filter(|&&s| s == k)
            .count() as u32,
    }
}

/// Offline notification curves aggregated into a threshold table
/// (Compile-style estimation): each scenario is solved exactly with the
/// vacancy-priced offline model, the cumulative-notification feature is
/// extracted per epoch, and the aggregator collapses the curves. Scenarios
/// exceeding the per-solve time budget (or lacking a cap-feasible offline
/// solution at all) are dropped and counted.
pub fn estimate_thresholds(
    instance: &Instance,
    scenarios: &ScenarioSet,
    aggregator: Aggregator,
    limits: &SolveLimits,
) -> Result<ThresholdTable, PolicyError> {
    let h = instance.horizon as usize;
    let curves: Vec<Option<Vec<f64>>> = scenarios
        .scenarios
        .par_iter()
        .map(|scenario| {
            let result = solve_ntp2_exact(instance, scenario, limits);
            if result.status != SolveStatus::Optimal {
                return None;
            }
            let schedule = result.schedule.expect("optimal solves carry a schedule");
            let curve: Vec<f64> = (0..=h)
                .map(|k| {
                    schedule
                        .notify_times()
                        .iter()
                        .filter(|&&s| s as usize <= k)
                        .count() as f64
                })
                .collect();
            Some(curve)
        })
        .collect();

    let kept: Vec<&Vec<f64>> = curves.iter().flatten().collect();
    let dropped = curves.len() - kept.len();
    if kept.is_empty() {
        return Err(PolicyError::AllScenariosDropped(dropped));
    }
    let targets: Vec<f64> = (0..=h)
        .map(|k| {
            let sample: Vec<f64> = kept.iter().map(|c| c[k]).collect();
            aggregator.apply(&sample)
        })
        .collect();
    ThresholdTable::new(targets, aggregator.label(), kept.len(), dropped)
}

/// Outcome of the notify-and-wait grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NawTuning {
    pub batch: u32,
    pub wait: u32,
    /// Whether the winner meets the mean-vacancy tolerance.
    pub feasible: bool,
    pub mean_bumps: f64,
    pub mean_vacancies: f64,
    pub mean_cost: f64,
}

/// Mean shift-vacancy tolerance as a fraction of L (0.3%).
pub const VACANCY_TOLERANCE: f64 = 0.003;

pub fn default_naw_grid() -> Vec<(u32, u32)> {
    let mut grid = Vec::new();
    for batch in 1..=5 {
        for wait in 1..=10 {
            grid.push((batch, wait));
        }
    }
    grid
}

/// Grid-searches notify-and-wait parameters on a validation set: minimize
/// mean bumps subject to the mean-vacancy tolerance, ties broken by lower
/// mean cost, then lexicographically. When no grid point is feasible the
/// minimum-vacancy point is returned flagged infeasible.
pub fn tune_naw(
    instance: &Instance,
    validation: &ScenarioSet,
    grid: &[(u32, u32)],
    prefs: &PreferenceSpec,
) -> Result<NawTuning, PolicyError> {
    if grid.is_empty() {
        return Err(PolicyError::EmptyGrid);
    }
    let budget = VACANCY_TOLERANCE * instance.shifts as f64;
    let evaluated: Vec<NawTuning> = grid
        .par_iter()
        .map(|&(batch, wait)| {
            let spec = PolicySpec::NotifyAndWait { batch, wait };
            let mut bumps = 0u64;
            let mut vacancies = 0u64;
            let mut cost = 0u64;
            for (draw, scenario) in validation.scenarios.iter().enumerate() {
                let profile = crate::prefs::generate(
                    prefs,
                    instance.employees,
                    instance.shifts,
                    draw as u64,
                )?;
                let report = simulate(instance, scenario, &profile, &spec);
                bumps += report.bumps();
                vacancies += report.vacancies;
                cost += report.cost;
            }
            let n = validation.len() as f64;
            let mean_vacancies = vacancies as f64 / n;
            Ok(NawTuning {
                batch,
                wait,
                feasible: mean_vacancies <= budget,
                mean_bumps: bumps as f64 / n,
                mean_vacancies,
                mean_cost: cost as f64 / n,
            })
        })
        .collect::<Result<_, PolicyError>>()?;

    let lex = |t: &NawTuning| (t.batch, t.wait);
    let best_feasible = evaluated
        .iter()
        .filter(|t| t.feasible)
        .min_by(|a, b| {
            a.mean_bumps
                .total_cmp(&b.mean_bumps)
                .then(a.mean_cost.total_cmp(&b.mean_cost))
                .then(lex(a).cmp(&lex(b)))
        });
    if let Some(winner) = best_feasible {
        return Ok(winner.clone());
    }
    Ok(evaluated
        .iter()
        .min_by(|a, b| {
            a.mean_vacancies
                .total_cmp(&b.mean_vacancies)
                .then(a.mean_cost.total_cmp(&b.mean_cost))
                .then(lex(a).cmp(&lex(b)))
        })
        .expect("grid is nonempty")
        .clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(targets: Vec<f64>) -> ThresholdTable {
        ThresholdTable::new(targets, "mean".into(), 1, 0).unwrap()
    }

    fn summary(m: usize) -> StateSummary {
        StateSummary {
            employees: m,
            assigned: 0,
            responded: 0,
        }
    }

    #[test]
    fn notify_all_fires_once() {
        let s = summary(150);
        assert_eq!(decide(&PolicySpec::NotifyAll, 0, 0, &s), 150);
        assert_eq!(decide(&PolicySpec::NotifyAll, 1, 150, &s), 0);
    }

    #[test]
    fn naw_fires_on_multiples_of_the_wait() {
        // production-style static parameters: 3 every 7 epochs
        let spec = PolicySpec::naw(3, 7).unwrap();
        let s = summary(150);
        for k in 0..=20u32 {
            let expected = if k % 7 == 0 { 3 } else { 0 };
            assert_eq!(decide(&spec, k, 0, &s), expected, "epoch {k}");
        }
        assert!(PolicySpec::naw(0, 7).is_err());
    }

    #[test]
    fn onp_rounds_the_residual() {
        let spec = PolicySpec::Onp {
            table: table(vec![12.4]),
        };
        assert_eq!(decide(&spec, 0, 10, &summary(150)), 2);
        // round half away from zero
        let spec = PolicySpec::Onp {
            table: table(vec![12.5]),
        };
        assert_eq!(decide(&spec, 0, 10, &summary(150)), 3);
    }

    #[test]
    fn onp_is_monotone_in_notified() {
        let spec = PolicySpec::Onp {
            table: table(vec![0.0, 3.7, 9.2]),
        };
        let s = summary(20);
        for k in 0..3u32 {
            let mut last = u32::MAX;
            for notified in 0..=20 {
                let a = decide(&spec, k, notified, &s);
                assert!(a <= last);
                last = a;
            }
        }
    }

    #[test]
    fn onp_clamps_to_remaining_employees() {
        let spec = PolicySpec::Onp {
            table: table(vec![100.0]),
        };
        assert_eq!(decide(&spec, 0, 3, &summary(5)), 2);
    }

    #[test]
    fn replay_counts_matching_epochs() {
        let spec = PolicySpec::Replay {
            schedule: NotificationSchedule::new(vec![0, 2, 2, 5]).unwrap(),
        };
        let s = summary(4);
        assert_eq!(decide(&spec, 0, 0, &s), 1);
        assert_eq!(decide(&spec, 2, 1, &s), 2);
        assert_eq!(decide(&spec, 3, 3, &s), 0);
        assert_eq!(decide(&spec, 5, 3, &s), 1);
    }

    #[test]
    fn mean_aggregation_is_plain_arithmetic() {
        // Features [[5,5,10],[5,10,10]] average to [5, 7.5, 10].
        let curves = [vec![5.0, 5.0, 10.0], vec![5.0, 10.0, 10.0]];
        let out: Vec<f64> = (0..3)
            .map(|k| Aggregator::Mean.apply(&[curves[0][k], curves[1][k]]))
            .collect();
        assert_eq!(out, vec![5.0, 7.5, 10.0]);
    }

    #[test]
    fn percentile_of_constants_is_that_constant() {
        let sample = vec![4.0; 10];
        assert_eq!(Aggregator::Percentile(90).apply(&sample), 4.0);
    }

    #[test]
    fn nearest_rank_percentile() {
        let sample = vec![1.0, 2.0, 3.0, 4.0];
        assert_eq!(Aggregator::Percentile(50).apply(&sample), 2.0);
        assert_eq!(Aggregator::Percentile(75).apply(&sample), 3.0);
        assert_eq!(Aggregator::Percentile(76).apply(&sample), 4.0);
        assert_eq!(Aggregator::Percentile(100).apply(&sample), 4.0);
        assert_eq!(Aggregator::Percentile(1).apply(&sample), 1.0);
    }

    #[test]
    fn threshold_tables_must_be_nondecreasing() {
        assert!(ThresholdTable::new(vec![1.0, 0.5], "mean".into(), 1, 0).is_err());
    }
}
