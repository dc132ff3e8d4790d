//! Discrete-epoch simulator of the notification system, plus scenario
//! sampling.
//!
//! One epoch of the loop: (a) deliver the responses due this epoch in
//! seniority order, resolving each through the bump engine with bump rights
//! iff the responder is within the cutoff; (b) ask the policy how many
//! notifications to send, clamp to the per-epoch cap and to the remaining
//! pool, and notify the next employees in seniority order. Notifications
//! stop for good once every shift is occupied (occupancy never shrinks:
//! bumps swap occupants, they never vacate).

use crate::bump::{potential_bumps_of_responses, AssignmentState};
use crate::io::EmpiricalDelayDistribution;
use crate::model::{
    Delay, DelayScenario, Epoch, Instance, Makespan, PreferenceProfile, RunReport,
};
use crate::policy::{decide, PolicySpec, StateSummary};
use crate::prefs::derive_seed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub use crate::milp::ScenarioSet;
pub use crate::model::round_to_epochs;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDelays {
    /// Mean of the exponential delay shape, in minutes.
    pub mean_minutes: f64,
    pub non_response_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DelaySource {
    Empirical(EmpiricalDelayDistribution),
    Synthetic(SyntheticDelays),
}

impl DelaySource {
    fn non_response_probability(&self) -> f64 {
        match self {
            DelaySource::Empirical(dist) => dist.non_response_probability,
            DelaySource::Synthetic(s) => s.non_response_probability,
        }
    }

    fn draw_delay(&self, rng: &mut ChaCha8Rng) -> Epoch {
        match self {
            DelaySource::Empirical(dist) => dist.sample(rng),
            DelaySource::Synthetic(s) => {
                let u: f64 = rng.gen_range(0.0..1.0);
                round_to_epochs(-s.mean_minutes * (1.0 - u).ln())
            }
        }
    }
}

/// Samples `count` i.i.d. scenarios of `employees` delays each. Each
/// employee independently fails to respond with the source's non-response
/// probability, otherwise draws from the delay distribution. Scenario `c`
/// depends only on `(seed, c)`, so prefixes are stable across counts.
pub fn sample_scenarios(
    source: &DelaySource,
    employees: usize,
    count: usize,
    seed: u64,
) -> ScenarioSet {
    let p_nr = source.non_response_probability();
    let scenarios: Vec<DelayScenario> = (0..count)
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, c as u64]));
            let delays: Vec<Delay> = (0..employees)
                .map(|_| {
                    if rng.gen_range(0.0..1.0) < p_nr {
                        Delay::NonResponder
                    } else {
                        Delay::Finite(source.draw_delay(&mut rng))
                    }
                })
                .collect();
            DelayScenario::new(delays).expect("sampled delays are >= 1")
        })
        .collect();
    ScenarioSet::new(scenarios, seed).expect("count >= 1")
}

/// Full simulation outcome: the run report plus the induced notification
/// times (None when the employee was never notified).
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub report: RunReport,
    pub notify_times: Vec<Option<Epoch>>,
}

pub fn simulate(
    instance: &Instance,
    scenario: &DelayScenario,
    prefs: &PreferenceProfile,
    policy: &PolicySpec,
) -> RunReport {
    simulate_full(instance, scenario, prefs, policy).report
}

pub fn simulate_full(
    instance: &Instance,
    scenario: &DelayScenario,
    prefs: &PreferenceProfile,
    policy: &PolicySpec,
) -> SimOutcome {
    let m = instance.employees;
    assert_eq!(scenario.len(), m, "scenario size mismatch");
    assert_eq!(prefs.employees(), m, "preference profile size mismatch");
    assert_eq!(prefs.shifts(), instance.shifts, "shift count mismatch");
    assert!(
        scenario.iter().all(|d| d != Delay::Finite(0)),
        "the simulator needs strictly positive delays"
    );

    let mut state = AssignmentState::new(prefs);
    let mut due: BTreeMap<Epoch, Vec<usize>> = BTreeMap::new();
    let mut notify_times: Vec<Option<Epoch>> = vec![None; m];
    let mut notified = 0usize;
    let mut responded = 0usize;
    let mut realized = 0u64;
    let mut per_employee = vec![0u64; m];
    let mut makespan = Makespan::Unbounded;

    for epoch in 0..=instance.horizon {
        state.clock = epoch;
        if let Some(mut batch) = due.remove(&epoch) {
            batch.sort_unstable(); // seniority order within the epoch
            for employee in batch {
                let may_bump = scenario
                    .delay(employee)
                    .finite()
                    .is_some_and(|r| r <= instance.cutoff);
                let before = state.assigned_shifts();
                let chain = state
                    .resolve_response(employee, may_bump)
                    .expect("each employee responds at most once");
                // occupancy can only grow (bumps swap occupants, never
                // vacate), which is what makes the notification stop final
                debug_assert!(state.assigned_shifts() >= before);
                realized += chain.len();
                per_employee[employee] += chain.len();
                responded += 1;
                if makespan == Makespan::Unbounded
                    && state.assigned_shifts() == instance.shifts
                {
                    makespan = Makespan::Finite(epoch);
                }
            }
        }

        if state.assigned_shifts() < instance.shifts && notified < m {
            let summary = StateSummary {
                employees: m,
                assigned: state.assigned_shifts(),
                responded,
            };
            let wanted = decide(policy, epoch, notified, &summary);
            let sending = wanted
                .min(instance.notify_cap)
                .min((m - notified) as u32) as usize;
            for _ in 0..sending {
                let employee = notified;
                notify_times[employee] = Some(epoch);
                if let Some(e) = scenario.delay(employee).response_time(epoch) {
                    if e <= instance.horizon {
                        due.entry(e).or_default().push(employee);
                    }
                }
                notified += 1;
            }
        }
    }

    let responses: Vec<Option<Epoch>> = (0..m)
        .map(|i| notify_times[i].and_then(|s| scenario.delay(i).response_time(s)))
        .collect();
    let (potential, _) = potential_bumps_of_responses(&responses, scenario, instance, true);
    let vacancies = (instance.shifts - state.assigned_shifts()) as u64;
    let report = RunReport {
        potential_bumps: potential,
        realized_bumps: Some(realized),
        vacancies,
        cost: instance.vacancy_penalty * vacancies + realized,
        makespan,
        per_employee_bumps: per_employee,
    };
    SimOutcome {
        report,
        notify_times,
    }
}
