//! Extensive-form two-stage stochastic model: a single first-stage
//! notification schedule scored against every scenario's recourse
//! (vacancies and cutoff-gated potential bumps), minimized on the scenario
//! average.
//!
//! Second-stage response tracking uses two binaries per employee and
//! scenario: `zr` (responds within the horizon and gets a shift) and `zn`
//! (responds within the horizon without getting a shift). The shift-order
//! row forces shifted responders to form a seniority prefix of the
//! responders.

use crate::milp::model::{Cmp, MilpError, MilpModel, VarType};
use crate::milp::ntp2::surrogate_delays;
use crate::model::{DelayScenario, Instance, NotificationSchedule};
use crate::policy::PolicySpec;
use serde::{Deserialize, Serialize};

/// Variable-count budget for the extensive form; full-scale scenario sets
/// run commercial solvers out of memory, so desk builds stay well below.
pub const DNTPS_SIZE_BUDGET: usize = 200_000;

/// Equiprobable scenario collection for the stochastic model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSet {
    pub scenarios: Vec<DelayScenario>,
    pub seed: u64,
}

impl ScenarioSet {
    pub fn new(scenarios: Vec<DelayScenario>, seed: u64) -> Result<Self, MilpError> {
        if scenarios.is_empty() {
            return Err(MilpError::SizeMismatch("empty scenario set".into()));
        }
        let m = scenarios[0].len();
        if scenarios.iter().any(|s| s.len() != m) {
            return Err(MilpError::SizeMismatch(
                "scenarios of differing employee counts".into(),
            ));
        }
        Ok(ScenarioSet { scenarios, seed })
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }
}

/// Concurrency-cap flavour for the first stage. The two formulations in the
/// paper disagree: the stochastic model pins `s_i + 1 = s_{i+W}` while the
/// offline variant relaxes it to an inequality. The inequality is the
/// default (an equality forces exactly W notifications per epoch until the
/// pool is exhausted); the equality is retained for fidelity experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CapMode {
    Equality,
    #[default]
    Inequality,
}

pub fn build_dntps(
    instance: &Instance,
    scenarios: &ScenarioSet,
    cap_mode: CapMode,
) -> Result<MilpModel, MilpError> {
    let m = instance.employees;
    if scenarios.scenarios[0].len() != m {
        return Err(MilpError::SizeMismatch(format!(
            "scenarios have {} delays, instance has {} employees",
            scenarios.scenarios[0].len(),
            m
        )));
    }
    let n_scen = scenarios.len();
    let estimated = m + n_scen * (m * m / 2 + 2 * m + 1);
    if estimated > DNTPS_SIZE_BUDGET {
        return Err(MilpError::SizeBudget(estimated, DNTPS_SIZE_BUDGET));
    }

    let h = instance.horizon as f64;
    let d = instance.cutoff;
    let w = instance.notify_cap as usize;
    let prob = 1.0 / n_scen as f64;

    let mut model = MilpModel::new("dntps");
    let s: Vec<_> = (1..=m)
        .map(|i| model.add_var(format!("s_{i}"), VarType::Integer, None))
        .collect::<Result<_, _>>()?;

    for i in 0..m {
        if i + 1 < m {
            model.add_row(
                format!("seniority_{}", i + 1),
                vec![(s[i], 1.0), (s[i + 1], -1.0)],
                Cmp::Le,
                0.0,
            )?;
        }
        if i + w < m {
            let (name, cmp) = match cap_mode {
                CapMode::Equality => (format!("cap_{}", i + 1), Cmp::Eq),
                CapMode::Inequality => (format!("cap_{}", i + 1), Cmp::Le),
            };
            // s_i + 1 (= or <=) s_{i+W}
            model.add_row(name, vec![(s[i], 1.0), (s[i + w], -1.0)], cmp, -1.0)?;
        }
    }

    let mut objective = Vec::new();
    for (k, scenario) in scenarios.scenarios.iter().enumerate() {
        let tag = k + 1;
        let r = surrogate_delays(instance, scenario);
        let zr: Vec<_> = (1..=m)
            .map(|i| model.add_var(format!("zr_{i}_s{tag}"), VarType::Binary, None))
            .collect::<Result<_, _>>()?;
        let zn: Vec<_> = (1..=m)
            .map(|i| model.add_var(format!("zn_{i}_s{tag}"), VarType::Binary, None))
            .collect::<Result<_, _>>()?;
        let theta = model.add_var(
            format!("theta_s{tag}"),
            VarType::Integer,
            Some(instance.shifts as f64),
        )?;
        objective.push((theta, prob * instance.vacancy_penalty as f64));

        for i in 0..m {
            // s_i + r_i >= (H + 1)(1 - zr_i - zn_i)
            model.add_row(
                format!("respond_lo_{}_s{tag}", i + 1),
                vec![(s[i], 1.0), (zr[i], h + 1.0), (zn[i], h + 1.0)],
                Cmp::Ge,
                h + 1.0 - r[i] as f64,
            )?;
            // s_i + r_i <= H + r_i (1 - zr_i - zn_i)
            model.add_row(
                format!("respond_hi_{}_s{tag}", i + 1),
                vec![(s[i], 1.0), (zr[i], r[i] as f64), (zn[i], r[i] as f64)],
                Cmp::Le,
                h,
            )?;
            // sum_{j<i} zn_j <= i (1 - zr_i)
            let mut order: Vec<_> = (0..i).map(|j| (zn[j], 1.0)).collect();
            order.push((zr[i], (i + 1) as f64));
            model.add_row(
                format!("shiftorder_{}_s{tag}", i + 1),
                order,
                Cmp::Le,
                (i + 1) as f64,
            )?;
            for j in (i + 1)..m {
                if r[j] <= r[i] && r[i] <= d {
                    let y = model.add_var(
                        format!("y_{}_{}_s{tag}", i + 1, j + 1),
                        VarType::Binary,
                        None,
                    )?;
                    objective.push((y, prob));
                    // s_i - s_j + delta <= delta y + (H + r_i)(1 - zr_i + zn_i)
                    let delta = (r[i] - r[j]) as f64;
                    let big_m = h + r[i] as f64;
                    model.add_row(
                        format!("bump_{}_{}_s{tag}", i + 1, j + 1),
                        vec![
                            (s[i], 1.0),
                            (s[j], -1.0),
                            (y, -delta),
                            (zr[i], big_m),
                            (zn[i], -big_m),
                        ],
                        Cmp::Le,
                        big_m - delta,
                    )?;
                }
            }
        }
        let mut vac: Vec<_> = zr.iter().map(|&v| (v, 1.0)).collect();
        vac.push((theta, 1.0));
        model.add_row(format!("vacancy_s{tag}"), vac, Cmp::Ge, instance.shifts as f64)?;
    }
    model.objective = objective;
    Ok(model)
}

/// Wraps a solved first-stage schedule as a replay policy for simulation.
pub fn extract_first_stage(schedule: &NotificationSchedule) -> PolicySpec {
    PolicySpec::Replay {
        schedule: schedule.clone(),
    }
}
