//! Deterministic evaluation core: bump-chain execution, potential-bump
//! counting, and schedule scoring.
//!
//! A *potential* bump is an ordered pair `(i, j)` with `i` senior to `j`
//! where `i` responds strictly after `j` (both within the horizon, and `i`
//! within the cutoff when the cutoff is enforced). A *realized* bump is an
//! actual displacement produced by replaying responses against a concrete
//! preference profile; realized bumps never exceed potential bumps, with
//! equality under identical preferences.

use crate::model::{
    DelayScenario, Epoch, Instance, Makespan, NotificationSchedule, PreferenceProfile, RunReport,
};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BumpError {
    #[error("employee {0} already responded")]
    RespondedTwice(usize),
    #[error("employee {0} already holds a shift")]
    AlreadyAssigned(usize),
}

/// How a bump chain ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainTerminal {
    /// The last employee in the chain claimed an unoccupied shift.
    EmptyShift,
    /// No shift was left for the last employee (all remaining choices held
    /// by seniors, or bumping was not allowed).
    NullShift,
}

/// The cascade of displacements triggered by one response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BumpChain {
    pub initiator: usize,
    /// Displaced employees in displacement order; strictly increasing in
    /// seniority index.
    pub chain: Vec<usize>,
    pub terminal: ChainTerminal,
}

impl BumpChain {
    pub fn len(&self) -> u64 {
        self.chain.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }
}

enum Claim {
    Empty(usize),
    Bump { shift: usize, victim: usize },
    Null,
}

/// Live assignment state of one run: shift occupancy, per-employee
/// preference cursors, and the clock.
///
/// An employee holds at most one shift and a shift holds at most one
/// employee at all times. The cursor of an employee never points at a shift
/// held by a strict senior (such shifts can never be reclaimed, because
/// occupants are only ever replaced by even more senior employees).
#[derive(Debug, Clone)]
pub struct AssignmentState<'a> {
    prefs: &'a PreferenceProfile,
    /// shift -> employee currently assigned
    occupancy: Vec<Option<usize>>,
    /// employee -> shift currently held
    holding: Vec<Option<usize>>,
    /// employee -> first preference index not permanently blocked by a senior
    cursor: Vec<usize>,
    responded: Vec<bool>,
    pub clock: Epoch,
}

impl<'a> AssignmentState<'a> {
    pub fn new(prefs: &'a PreferenceProfile) -> Self {
        AssignmentState {
            prefs,
            occupancy: vec![None; prefs.shifts()],
            holding: vec![None; prefs.employees()],
            cursor: vec![0; prefs.employees()],
            responded: vec![false; prefs.employees()],
            clock: 0,
        }
    }

    pub fn occupancy(&self) -> &[Option<usize>] {
        &self.occupancy
    }

    pub fn holding(&self) -> &[Option<usize>] {
        &self.holding
    }

    pub fn assigned_shifts(&self) -> usize {
        self.occupancy.iter().filter(|o| o.is_some()).count()
    }

    fn assign(&mut self, employee: usize, shift: usize) {
        debug_assert!(self.holding[employee].is_none());
        self.occupancy[shift] = Some(employee);
        self.holding[employee] = Some(shift);
    }

    fn displace(&mut self, shift: usize) -> usize {
        let victim = self.occupancy[shift].take().expect("displacing empty shift");
        self.holding[victim] = None;
        victim
    }

    /// Best shift the employee can claim right now, following their
    /// preference order. Junior-held shifts count as claimable only when
    /// `may_bump` is set.
    fn best_claimable(&mut self, employee: usize, may_bump: bool) -> Claim {
        let list = self.prefs.list(employee);
        // Shifts held by strict seniors stay senior-held forever, so the
        // cursor may skip them permanently.
        while self.cursor[employee] < list.len() {
            match self.occupancy[list[self.cursor[employee]]] {
                Some(holder) if holder < employee => self.cursor[employee] += 1,
                _ => break,
            }
        }
        for &shift in &list[self.cursor[employee]..] {
            match self.occupancy[shift] {
                None => return Claim::Empty(shift),
                Some(holder) if holder < employee => continue,
                Some(holder) => {
                    if may_bump {
                        return Claim::Bump {
                            shift,
                            victim: holder,
                        };
                    }
                }
            }
        }
        Claim::Null
    }

    /// Processes a response from `employee`, executing the full bump chain.
    ///
    /// The employee claims their best claimable shift; a displaced junior is
    /// reassigned immediately and may displace further juniors in turn,
    /// regardless of their own cutoff status (only the initiator's
    /// `may_bump` is gated on the cutoff). Each displaced employee appears
    /// once in the returned chain, in strictly increasing seniority index.
    pub fn resolve_response(
        &mut self,
        employee: usize,
        may_bump: bool,
    ) -> Result<BumpChain, BumpError> {
        if self.responded[employee] {
            return Err(BumpError::RespondedTwice(employee));
        }
        if self.holding[employee].is_some() {
            return Err(BumpError::AlreadyAssigned(employee));
        }
        self.responded[employee] = true;

        let mut chain = Vec::new();
        let mut current = employee;
        let mut allow = may_bump;
        let terminal = loop {
            match self.best_claimable(current, allow) {
                Claim::Empty(shift) => {
                    self.assign(current, shift);
                    break ChainTerminal::EmptyShift;
                }
                Claim::Bump { shift, victim } => {
                    debug_assert!(victim > current);
                    self.displace(shift);
                    self.assign(current, shift);
                    chain.push(victim);
                    current = victim;
                    allow = true;
                }
                Claim::Null => break ChainTerminal::NullShift,
            }
        };
        debug_assert!(chain.windows(2).all(|w| w[0] < w[1]));
        Ok(BumpChain {
            initiator: employee,
            chain,
            terminal,
        })
    }
}

/// Counts potential bumps of a bound schedule: pairs `(i, j)` with `i`
/// senior, both responding within the horizon, and `i` responding strictly
/// after `j`. With `enforce_cutoff`, only seniors responding within the
/// cutoff (`r_i <= D`) count as bumpers.
///
/// Returns the total and the per-employee counts `p_i` (bumps caused by
/// employee `i`).
pub fn potential_bumps(
    schedule: &NotificationSchedule,
    scenario: &DelayScenario,
    instance: &Instance,
    enforce_cutoff: bool,
) -> (u64, Vec<u64>) {
    let responses = schedule.response_times(scenario);
    potential_bumps_of_responses(&responses, scenario, instance, enforce_cutoff)
}

/// Same count over raw per-employee response epochs (`None` when the
/// employee never responds, e.g. unnotified or non-responder).
pub fn potential_bumps_of_responses(
    responses: &[Option<Epoch>],
    scenario: &DelayScenario,
    instance: &Instance,
    enforce_cutoff: bool,
) -> (u64, Vec<u64>) {
    let h = instance.horizon;
    let m = responses.len();
    let mut per_employee = vec![0u64; m];
    for i in 0..m {
        let Some(ei) = responses[i].filter(|&e| e <= h) else {
            continue;
        };
        if enforce_cutoff {
            match scenario.delay(i).finite() {
                Some(ri) if ri <= instance.cutoff => {}
                _ => continue,
            }
        }
        per_employee[i] = responses[i + 1..]
            .iter()
            .filter(|ej| matches!(ej, Some(e) if *e <= h && ei > *e))
            .count() as u64;
    }
    (per_employee.iter().sum(), per_employee)
}

/// Scores a schedule under a bound scenario.
///
/// Responses past the horizon are dropped entirely (no assignment, no bump
/// accounting). When a preference profile is supplied the responses are
/// replayed through [`AssignmentState::resolve_response`] in response order
/// (seniority first on ties) and realized bumps are reported alongside the
/// potential count; otherwise only potential bumps are reported and
/// occupancy follows the identical-preference dynamics, where the n-th
/// in-horizon response raises occupancy to `min(n, L)`.
pub fn evaluate_schedule(
    schedule: &NotificationSchedule,
    scenario: &DelayScenario,
    instance: &Instance,
    prefs: Option<&PreferenceProfile>,
) -> RunReport {
    let responses = schedule.response_times(scenario);
    let (potential, potential_per_emp) =
        potential_bumps_of_responses(&responses, scenario, instance, true);

    // In-horizon response events ordered by epoch, seniority first on ties.
    let mut events: Vec<(Epoch, usize)> = responses
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.filter(|&e| e <= instance.horizon).map(|e| (e, i)))
        .collect();
    events.sort_unstable();

    let shifts = instance.shifts;
    let mut makespan = Makespan::Unbounded;

    let report = if let Some(prefs) = prefs {
        assert_eq!(prefs.employees(), schedule.len());
        assert_eq!(prefs.shifts(), shifts);
        let mut state = AssignmentState::new(prefs);
        let mut per_emp = vec![0u64; schedule.len()];
        let mut realized = 0u64;
        for &(epoch, employee) in &events {
            state.clock = epoch;
            let may_bump = scenario
                .delay(employee)
                .finite()
                .is_some_and(|r| r <= instance.cutoff);
            let chain = state
                .resolve_response(employee, may_bump)
                .expect("schedule replay delivers each response once");
            per_emp[employee] += chain.len();
            realized += chain.len();
            if makespan == Makespan::Unbounded && state.assigned_shifts() == shifts {
                makespan = Makespan::Finite(epoch);
            }
        }
        let vacancies = (shifts - state.assigned_shifts()) as u64;
        RunReport {
            potential_bumps: potential,
            realized_bumps: Some(realized),
            vacancies,
            cost: instance.vacancy_penalty * vacancies + realized,
            makespan,
            per_employee_bumps: per_emp,
        }
    } else {
        let assigned = events.len().min(shifts);
        if events.len() >= shifts {
            makespan = Makespan::Finite(events[shifts - 1].0);
        }
        let vacancies = (shifts - assigned) as u64;
        RunReport {
            potential_bumps: potential,
            realized_bumps: None,
            vacancies,
            cost: instance.vacancy_penalty * vacancies + potential,
            makespan,
            per_employee_bumps: potential_per_emp,
        }
    };
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Delay;

    fn fig1_instance() -> Instance {
        // M = L = 6, H = 10, no effective cutoff.
        Instance::new(6, 6, 10, 10, 6, 200).unwrap()
    }

    fn fig1_scenario() -> DelayScenario {
        DelayScenario::from_finite(&[4, 1, 5, 3, 2, 5]).unwrap()
    }

    fn fig1_optimal_schedule() -> NotificationSchedule {
        NotificationSchedule::new(vec![0, 2, 2, 4, 5, 5]).unwrap()
    }

    #[test]
    fn chain_cascades_through_identical_preferences() {
        // Three employees, identical preferences. Employee 2 (0-based 1)
        // responded first and holds shift 0; employee 3 holds shift 1. When
        // employee 1 responds with bump rights, the chain displaces both and
        // everyone ends one shift down the list.
        let prefs = PreferenceProfile::identical(3, 3);
        let mut state = AssignmentState::new(&prefs);
        assert!(state.resolve_response(1, true).unwrap().is_empty());
        assert!(state.resolve_response(2, true).unwrap().is_empty());

        let chain = state.resolve_response(0, true).unwrap();
        assert_eq!(chain.chain, vec![1, 2]);
        assert_eq!(chain.len(), 2);
        assert_eq!(chain.terminal, ChainTerminal::EmptyShift);
        assert_eq!(state.occupancy(), &[Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn unoccupied_top_preference_is_claimed_directly() {
        let prefs = PreferenceProfile::identical(3, 3);
        let mut state = AssignmentState::new(&prefs);
        let chain = state.resolve_response(2, true).unwrap();
        assert!(chain.is_empty());
        assert_eq!(state.occupancy()[0], Some(2));
    }

    #[test]
    fn cutoff_expired_responder_cannot_bump() {
        let prefs = PreferenceProfile::identical(3, 2);
        let mut state = AssignmentState::new(&prefs);
        state.resolve_response(1, true).unwrap();
        state.resolve_response(2, true).unwrap();
        // All shifts taken by juniors; without bump rights the senior walks
        // away unassigned.
        let chain = state.resolve_response(0, false).unwrap();
        assert!(chain.is_empty());
        assert_eq!(chain.terminal, ChainTerminal::NullShift);
        assert_eq!(state.holding()[0], None);
    }

    #[test]
    fn responding_twice_is_rejected() {
        let prefs = PreferenceProfile::identical(2, 2);
        let mut state = AssignmentState::new(&prefs);
        state.resolve_response(0, true).unwrap();
        assert_eq!(
            state.resolve_response(0, true).unwrap_err(),
            BumpError::RespondedTwice(0)
        );
    }

    #[test]
    fn displaced_employee_may_reclaim_an_earlier_skipped_shift() {
        // Employee 1 responds after the cutoff while its favourite shift 0
        // is junior-held, so it settles for shift 1. When a senior later
        // displaces it, the reassignment runs with bump rights and takes
        // shift 0 after all.
        let prefs =
            PreferenceProfile::new(vec![vec![1, 0, 2], vec![0, 1, 2], vec![0, 1, 2]], 3).unwrap();
        let mut state = AssignmentState::new(&prefs);
        state.resolve_response(2, true).unwrap(); // employee 2 -> shift 0
        let skipped = state.resolve_response(1, false).unwrap(); // cutoff expired
        assert!(skipped.is_empty());
        assert_eq!(state.holding()[1], Some(1));

        let chain = state.resolve_response(0, true).unwrap();
        assert_eq!(chain.chain, vec![1, 2]);
        assert_eq!(state.holding(), &[Some(1), Some(0), Some(2)]);
    }

    #[test]
    fn fig1_schedule_has_one_potential_bump() {
        let (total, per_emp) = potential_bumps(
            &fig1_optimal_schedule(),
            &fig1_scenario(),
            &fig1_instance(),
            false,
        );
        assert_eq!(total, 1);
        assert_eq!(per_emp, vec![1, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn nondecreasing_responses_have_zero_potential_bumps() {
        let inst = Instance::new(4, 4, 20, 20, 4, 0).unwrap();
        let scen = DelayScenario::from_finite(&[5, 2, 4, 1]).unwrap();
        // No-bump schedule: response times 5, 5, 7, 7.
        let sched = NotificationSchedule::new(vec![0, 3, 3, 6]).unwrap();
        let (total, _) = potential_bumps(&sched, &scen, &inst, false);
        assert_eq!(total, 0);
    }

    #[test]
    fn cutoff_disqualifies_slow_senior() {
        let inst = Instance::new(2, 2, 10, 1, 2, 0).unwrap();
        let scen = DelayScenario::from_finite(&[2, 1]).unwrap();
        let sched = NotificationSchedule::new(vec![0, 0]).unwrap();
        let (gated, _) = potential_bumps(&sched, &scen, &inst, true);
        assert_eq!(gated, 0);
        let (ungated, _) = potential_bumps(&sched, &scen, &inst, false);
        assert_eq!(ungated, 1);
    }

    #[test]
    fn fig1_evaluation_matches_paper() {
        let report = evaluate_schedule(
            &fig1_optimal_schedule(),
            &fig1_scenario(),
            &fig1_instance(),
            None,
        );
        assert_eq!(report.potential_bumps, 1);
        assert_eq!(report.vacancies, 0);
        assert_eq!(report.makespan, Makespan::Finite(10));
    }

    #[test]
    fn fig1_realized_equals_potential_under_identical_preferences() {
        let prefs = PreferenceProfile::identical(6, 6);
        let report = evaluate_schedule(
            &fig1_optimal_schedule(),
            &fig1_scenario(),
            &fig1_instance(),
            Some(&prefs),
        );
        assert_eq!(report.realized_bumps, Some(1));
        assert_eq!(report.potential_bumps, 1);
        assert_eq!(report.vacancies, 0);
        assert_eq!(report.makespan, Makespan::Finite(10));
    }

    #[test]
    fn all_non_responders_leave_every_shift_vacant() {
        let inst = fig1_instance();
        let scen = DelayScenario::new(vec![Delay::NonResponder; 6]).unwrap();
        let sched = NotificationSchedule::new(vec![0; 6]).unwrap();
        let report = evaluate_schedule(&sched, &scen, &inst, None);
        assert_eq!(report.vacancies, 6);
        assert_eq!(report.potential_bumps, 0);
        assert_eq!(report.cost, 6 * 200);
        assert_eq!(report.makespan, Makespan::Unbounded);
    }
}
