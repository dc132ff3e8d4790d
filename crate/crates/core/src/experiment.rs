//! Train/validate/test experiment orchestration: estimate ONP thresholds on
//! the training split, tune notify-and-wait on the validation split, and
//! score every policy on one shared test split.

use crate::milp::SolveLimits;
use crate::model::{Instance, ModelError};
use crate::policy::{
    estimate_thresholds, tune_naw, Aggregator, NawTuning, PolicySpec, ThresholdTable,
    VACANCY_TOLERANCE,
};
use crate::prefs::{derive_seed, generate, PreferenceSpec};
use crate::sim::{sample_scenarios, simulate, DelaySource, ScenarioSet};
use crate::RunReport;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BumpAccounting {
    Potential,
    Realized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PolicyRequest {
    NotifyAll,
    Naw { batch: u32, wait: u32 },
    /// Grid-search the notify-and-wait parameters on the validation split.
    NawTuned,
    Onp { aggregator: Aggregator },
    Replay { schedule: crate::NotificationSchedule },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedPolicy {
    pub name: String,
    pub request: PolicyRequest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub instance: Instance,
    pub delays: DelaySource,
    pub preferences: PreferenceSpec,
    pub policies: Vec<NamedPolicy>,
    pub train: usize,
    pub validation: usize,
    pub test: usize,
    pub seed: u64,
    pub accounting: BumpAccounting,
    pub naw_grid: Vec<(u32, u32)>,
    /// Per-solve wall-clock budget for offline training solves, in seconds.
    pub solve_time_limit_secs: u64,
}

impl ExperimentPlan {
    pub fn validated(self) -> Result<Self, ModelError> {
        if self.train == 0 || self.validation == 0 || self.test == 0 {
            return Err(ModelError::InvalidInstance("split sizes >= 1 violated"));
        }
        if self.policies.is_empty() {
            return Err(ModelError::InvalidInstance("no policies under test"));
        }
        Ok(self)
    }

    pub fn solve_limits(&self) -> SolveLimits {
        SolveLimits {
            time_limit: std::time::Duration::from_secs(self.solve_time_limit_secs),
            ..SolveLimits::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRow {
    pub name: String,
    pub label: String,
    pub mean_bumps: f64,
    pub mean_vacancies: f64,
    pub mean_cost: f64,
    pub vacancy_feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub accounting: BumpAccounting,
    pub rows: Vec<PolicyRow>,
    /// Trained threshold tables, one per requested aggregator label.
    pub onp_tables: Vec<(String, ThresholdTable)>,
    pub naw_tuning: Option<NawTuning>,
    /// Per-stage failures, isolated so the surviving policies still report.
    pub stage_errors: Vec<String>,
}

/// Simulates one policy over a whole scenario set, preferences redrawn per
/// scenario index (so every policy sees the same preference sequence).
pub fn evaluate_policy(
    instance: &Instance,
    scenarios: &ScenarioSet,
    preferences: &PreferenceSpec,
    policy: &PolicySpec,
) -> Result<Vec<RunReport>, ModelError> {
    scenarios
        .scenarios
        .par_iter()
        .enumerate()
        .map(|(draw, scenario)| {
            let profile = generate(
                preferences,
                instance.employees,
                instance.shifts,
                draw as u64,
            )?;
            Ok(simulate(instance, scenario, &profile, policy))
        })
        .collect()
}

fn summarize(
    name: &str,
    label: String,
    reports: &[RunReport],
    accounting: BumpAccounting,
    instance: &Instance,
) -> PolicyRow {
    let n = reports.len() as f64;
    let bumps: u64 = reports
        .iter()
        .map(|r| match accounting {
            BumpAccounting::Potential => r.potential_bumps,
            BumpAccounting::Realized => r.bumps(),
        })
        .sum();
    let vacancies: u64 = reports.iter().map(|r| r.vacancies).sum();
    let mean_vacancies = vacancies as f64 / n;
    let cost = instance.vacancy_penalty as f64 * mean_vacancies + bumps as f64 / n;
    PolicyRow {
        name: name.to_string(),
        label,
        mean_bumps: bumps as f64 / n,
        mean_vacancies,
        mean_cost: cost,
        vacancy_feasible: mean_vacancies <= VACANCY_TOLERANCE * instance.shifts as f64,
    }
}

pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentReport, ModelError> {
    let plan = plan.clone().validated()?;
    let inst = &plan.instance;
    let train = sample_scenarios(
        &plan.delays,
        inst.employees,
        plan.train,
        derive_seed(&[plan.seed, 1]),
    );
    let validation = sample_scenarios(
        &plan.delays,
        inst.employees,
        plan.validation,
        derive_seed(&[plan.seed, 2]),
    );
    let test = sample_scenarios(
        &plan.delays,
        inst.employees,
        plan.test,
        derive_seed(&[plan.seed, 3]),
    );
    let limits = plan.solve_limits();

    let mut stage_errors = Vec::new();
    let mut onp_tables: Vec<(String, ThresholdTable)> = Vec::new();
    let mut naw_tuning: Option<NawTuning> = None;

    // Training and tuning stages run once per distinct request.
    for policy in &plan.policies {
        match &policy.request {
            PolicyRequest::Onp { aggregator } => {
                let label = aggregator.label();
                if onp_tables.iter().any(|(l, _)| *l == label) {
                    continue;
                }
                match estimate_thresholds(inst, &train, *aggregator, &limits) {
                    Ok(table) => onp_tables.push((label, table)),
                    Err(e) => stage_errors.push(format!("onp training [{label}]: {e}")),
                }
            }
            PolicyRequest::NawTuned if naw_tuning.is_none() => {
                match tune_naw(inst, &validation, &plan.naw_grid, &plan.preferences) {
                    Ok(t) => naw_tuning = Some(t),
                    Err(e) => stage_errors.push(format!("naw tuning: {e}")),
                }
            }
            _ => {}
        }
    }

    let mut rows = Vec::new();
    for policy in &plan.policies {
        let resolved: Option<PolicySpec> = match &policy.request {
            PolicyRequest::NotifyAll => Some(PolicySpec::NotifyAll),
            PolicyRequest::Naw { batch, wait } => Some(PolicySpec::NotifyAndWait {
                batch: *batch,
                wait: *wait,
            }),
            PolicyRequest::NawTuned => naw_tuning.as_ref().map(|t| PolicySpec::NotifyAndWait {
                batch: t.batch,
                wait: t.wait,
            }),
            PolicyRequest::Onp { aggregator } => {
                let label = aggregator.label();
                onp_tables
                    .iter()
                    .find(|(l, _)| *l == label)
                    .map(|(_, table)| PolicySpec::Onp {
                        table: table.clone(),
                    })
            }
            PolicyRequest::Replay { schedule } => Some(PolicySpec::Replay {
                schedule: schedule.clone(),
            }),
        };
        let Some(spec) = resolved else {
            stage_errors.push(format!("policy {} skipped: training stage failed", policy.name));
            continue;
        };
        match evaluate_policy(inst, &test, &plan.preferences, &spec) {
            Ok(reports) => rows.push(summarize(
                &policy.name,
                spec.label(),
                &reports,
                plan.accounting,
                inst,
            )),
            Err(e) => stage_errors.push(format!("policy {} evaluation: {e}", policy.name)),
        }
    }

    Ok(ExperimentReport {
        seed: plan.seed,
        accounting: plan.accounting,
        rows,
        onp_tables,
        naw_tuning,
        stage_errors,
    })
}
