//! Embedded exact solvers for desk-scale instances: depth-first
//! branch-and-bound over integer notification times, standing in for a
//! commercial MILP engine at small sizes.
//!
//! All problem data is integral, so an integral optimum always exists and
//! the search branches on integer notification times, employees in
//! seniority order with values ascending. The offline solver additionally
//! exploits a dominance fact: an optimal schedule exists in which every
//! notification time either equals the predecessor's or makes the response
//! coincide with some senior's response (lowering any other time never adds
//! a bump), so only those candidate values are branched.

use crate::milp::dntps::{CapMode, ScenarioSet};
use crate::milp::model::MilpError;
use crate::milp::ntp2::surrogate_delays;
use crate::model::{DelayScenario, Instance, NotificationSchedule};
use std::collections::HashMap;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    TimeLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    Ntp,
    Ntp2,
}

#[derive(Debug, Clone)]
pub struct SolveLimits {
    /// Wall-clock budget per solve; four minutes, the cap typically given
    /// to commercial solvers on instances of this family.
    pub time_limit: Duration,
    /// Upper bound on memoized search states; the table is cleared when
    /// full, which only costs pruning power.
    pub memo_capacity: usize,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            time_limit: Duration::from_secs(240),
            memo_capacity: 1 << 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective: f64,
    pub schedule: Option<NotificationSchedule>,
    /// Pairs `(i, j)` (0-based, `i` senior) whose bump indicator is 1 in the
    /// reported solution.
    pub bump_pairs: Vec<(usize, usize)>,
    pub bumps: u64,
    pub vacancies: u64,
    pub nodes: u64,
}

impl SolveResult {
    fn infeasible() -> Self {
        SolveResult {
            status: SolveStatus::Infeasible,
            objective: f64::INFINITY,
            schedule: None,
            bump_pairs: Vec::new(),
            bumps: 0,
            vacancies: 0,
            nodes: 0,
        }
    }
}

/// Dispatches on the offline formulation.
pub fn solve_exact(
    instance: &Instance,
    scenario: &DelayScenario,
    formulation: Formulation,
    limits: &SolveLimits,
) -> Result<SolveResult, MilpError> {
    match formulation {
        Formulation::Ntp => solve_ntp_exact(instance, scenario, limits),
        Formulation::Ntp2 => Ok(solve_ntp2_exact(instance, scenario, limits)),
    }
}

struct Deadline {
    start: Instant,
    budget: Duration,
    ticks: u32,
    expired: bool,
}

impl Deadline {
    fn new(budget: Duration) -> Self {
        Deadline {
            start: Instant::now(),
            budget,
            ticks: 0,
            expired: false,
        }
    }

    fn expired(&mut self) -> bool {
        if self.expired {
            return true;
        }
        self.ticks = self.ticks.wrapping_add(1);
        if self.ticks.is_multiple_of(4096) && self.start.elapsed() > self.budget {
            self.expired = true;
        }
        self.expired
    }
}

// ---------------------------------------------------------------------------
// Offline NTP: minimize inversions of e = s + r, everyone within the horizon.
// ---------------------------------------------------------------------------

struct NtpSearch {
    delays: Vec<i64>,
    /// max feasible notify time per employee (suffix-min of H - r).
    ub: Vec<i64>,
    /// max feasible response time per employee.
    emax: Vec<i64>,
    m: usize,
    best: u64,
    best_s: Vec<i64>,
    cur_s: Vec<i64>,
    cur_e: Vec<i64>,
    memo: HashMap<Vec<u32>, u64>,
    memo_capacity: usize,
    nodes: u64,
    deadline: Deadline,
}

impl NtpSearch {
    /// Bumps already forced against employees not yet scheduled: a placed
    /// response later than everything a future employee can reach is an
    /// inversion no completion avoids.
    fn forced_future(&self, depth: usize) -> u64 {
        let mut forced = 0;
        for j in depth..self.m {
            let cap = self.emax[j];
            forced += self.cur_e[..depth].iter().filter(|&&e| e > cap).count() as u64;
        }
        forced
    }

    fn dfs(&mut self, depth: usize, bumps: u64) {
        self.nodes += 1;
        if depth == self.m {
            if bumps < self.best {
                self.best = bumps;
                self.best_s = self.cur_s.clone();
            }
            return;
        }
        if self.deadline.expired() {
            return;
        }

        let s_prev = if depth == 0 { 0 } else { self.cur_s[depth - 1] };
        let r = self.delays[depth];
        let ub = self.ub[depth];

        // Candidate notification times: the predecessor's, or any value that
        // aligns this response with a pending senior response.
        let mut cands: Vec<i64> = Vec::with_capacity(depth + 1);
        cands.push(s_prev);
        for &e in &self.cur_e[..depth] {
            let v = e - r;
            if v > s_prev && v <= ub {
                cands.push(v);
            }
        }
        cands.sort_unstable();
        cands.dedup();

        for &v in cands.iter() {
            let e = v + r;
            let new_bumps = self.cur_e[..depth].iter().filter(|&&ek| ek > e).count() as u64;
            let total = bumps + new_bumps;
            if total >= self.best {
                continue;
            }
            self.cur_s[depth] = v;
            self.cur_e[depth] = e;
            if total + self.forced_future(depth + 1) >= self.best {
                continue;
            }
            if self.memo_hit(depth + 1, v, total) {
                continue;
            }
            self.dfs(depth + 1, total);
        }
    }

    /// Returns true when an equally good or better visit of the same search
    /// state has already been explored.
    fn memo_hit(&mut self, depth: usize, s: i64, bumps: u64) -> bool {
        let mut key: Vec<u32> = Vec::with_capacity(depth + 2);
        key.push(depth as u32);
        key.push(s as u32);
        let mut actives: Vec<u32> = self.cur_e[..depth]
            .iter()
            .filter(|&&e| e > s)
            .map(|&e| e as u32)
            .collect();
        actives.sort_unstable();
        key.extend(actives);
        match self.memo.get_mut(&key) {
            Some(best) if *best <= bumps => true,
            Some(best) => {
                *best = bumps;
                false
            }
            None => {
                if self.memo.len() >= self.memo_capacity {
                    self.memo.clear();
                }
                self.memo.insert(key, bumps);
                false
            }
        }
    }
}

/// Exact minimum of potential bumps for the offline problem. Errors on
/// non-responders; reports `Infeasible` when some employee cannot respond
/// within the horizon from any notification time.
pub fn solve_ntp_exact(
    instance: &Instance,
    scenario: &DelayScenario,
    limits: &SolveLimits,
) -> Result<SolveResult, MilpError> {
    let m = instance.employees;
    if scenario.len() != m {
        return Err(MilpError::SizeMismatch(format!(
            "scenario has {} delays, instance has {} employees",
            scenario.len(),
            m
        )));
    }
    let mut delays = Vec::with_capacity(m);
    for (i, d) in scenario.iter().enumerate() {
        delays.push(d.finite().ok_or(MilpError::NonResponder(i + 1))? as i64);
    }
    let h = instance.horizon as i64;
    if delays.iter().any(|&r| r > h) {
        return Ok(SolveResult::infeasible());
    }

    let mut ub = vec![0i64; m];
    let mut run = i64::MAX;
    for i in (0..m).rev() {
        run = run.min(h - delays[i]);
        ub[i] = run;
    }
    let emax: Vec<i64> = (0..m).map(|i| ub[i] + delays[i]).collect();

    let mut search = NtpSearch {
        delays,
        ub,
        emax,
        m,
        best: u64::MAX,
        best_s: Vec::new(),
        cur_s: vec![0; m],
        cur_e: vec![0; m],
        memo: HashMap::new(),
        memo_capacity: limits.memo_capacity,
        nodes: 0,
        deadline: Deadline::new(limits.time_limit),
    };

    // A feasible warm start: follow the no-bump construction, clamped to
    // each deadline.
    {
        let mut s = vec![0i64; m];
        let mut e_hi = 0i64;
        for i in 0..m {
            let prev = if i == 0 { 0 } else { s[i - 1] };
            s[i] = (e_hi - search.delays[i]).max(prev).min(search.ub[i]);
            e_hi = e_hi.max(s[i] + search.delays[i]);
        }
        let e: Vec<i64> = (0..m).map(|i| s[i] + search.delays[i]).collect();
        let mut inv = 0u64;
        for i in 0..m {
            for j in (i + 1)..m {
                if e[i] > e[j] {
                    inv += 1;
                }
            }
        }
        search.best = inv;
        search.best_s = s;
    }

    search.dfs(0, 0);

    let status = if search.deadline.expired {
        SolveStatus::TimeLimit
    } else {
        SolveStatus::Optimal
    };
    let schedule =
        NotificationSchedule::new(search.best_s.iter().map(|&v| v as u32).collect()).unwrap();
    let bump_pairs = inverted_pairs(&schedule, scenario, instance, false);
    Ok(SolveResult {
        status,
        objective: search.best as f64,
        schedule: Some(schedule),
        bumps: search.best,
        vacancies: 0,
        bump_pairs,
        nodes: search.nodes,
    })
}

/// Bump indicator pairs of a concrete schedule: in-horizon inversions,
/// cutoff-gated when `enforce_cutoff`.
fn inverted_pairs(
    schedule: &NotificationSchedule,
    scenario: &DelayScenario,
    instance: &Instance,
    enforce_cutoff: bool,
) -> Vec<(usize, usize)> {
    let h = instance.horizon;
    let responses = schedule.response_times(scenario);
    let mut pairs = Vec::new();
    for i in 0..responses.len() {
        let Some(ei) = responses[i].filter(|&e| e <= h) else {
            continue;
        };
        if enforce_cutoff {
            match scenario.delay(i).finite() {
                Some(ri) if ri <= instance.cutoff => {}
                _ => continue,
            }
        }
        for (j, ej) in responses.iter().enumerate().skip(i + 1) {
            if matches!(ej, Some(e) if *e <= h && ei > *e) {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

// ---------------------------------------------------------------------------
// Offline NTP2: vacancies are priced rather than forbidden; employees may be
// pushed past the horizon; bumps are cutoff-gated; the concurrency cap
// restricts the schedule and every notification lands inside the horizon.
// ---------------------------------------------------------------------------

struct Ntp2Search {
    delays: Vec<i64>,
    h: i64,
    d: i64,
    w: usize,
    shifts: usize,
    penalty: u64,
    m: usize,
    best_cost: u64,
    best_s: Vec<i64>,
    cur_s: Vec<i64>,
    /// Response epochs of placed in-horizon, in-cutoff responders.
    bumper_e: Vec<i64>,
    memo: HashMap<Vec<u32>, u64>,
    memo_capacity: usize,
    nodes: u64,
    deadline: Deadline,
}

impl Ntp2Search {
    fn in_horizon(&self, i: usize, s: i64) -> bool {
        s + self.delays[i] <= self.h
    }

    /// Optimistic completion bound: bumps incurred so far plus the vacancy
    /// penalty that even the best completion cannot avoid.
    fn lower_bound(&self, depth: usize, bumps: u64, responders: usize, s_floor: i64) -> u64 {
        let reachable = (depth..self.m)
            .filter(|&j| s_floor + self.delays[j] <= self.h)
            .count();
        let vac = self.shifts.saturating_sub(responders + reachable) as u64;
        bumps + self.penalty * vac
    }

    fn dfs(&mut self, depth: usize, bumps: u64, responders: usize) {
        self.nodes += 1;
        if depth == self.m {
            let vac = self.shifts.saturating_sub(responders) as u64;
            let cost = bumps + self.penalty * vac;
            if cost < self.best_cost {
                self.best_cost = cost;
                self.best_s = self.cur_s.clone();
            }
            return;
        }
        if self.deadline.expired() {
            return;
        }

        let s_prev = if depth == 0 { 0 } else { self.cur_s[depth - 1] };
        let mut lb = s_prev;
        if depth >= self.w {
            lb = lb.max(self.cur_s[depth - self.w] + 1);
        }
        // Notifications past the horizon are infeasible outright (the
        // response-tracking rows force s_i <= H whatever z_i is).
        if lb > self.h {
            return;
        }
        let r = self.delays[depth];

        // Candidate times, by the same lowering dominance as the pure
        // offline search: the lower bound itself, any in-horizon value that
        // aligns this response with a pending bumper's, and the cheapest
        // out-of-horizon placement.
        let hi_in = self.h - r;
        let mut values: Vec<i64> = vec![lb];
        for &e in &self.bumper_e {
            let v = e - r;
            if v > lb && v <= hi_in {
                values.push(v);
            }
        }
        let out = lb.max(self.h + 1 - r);
        if out <= self.h {
            values.push(out);
        }
        values.sort_unstable();
        values.dedup();

        for v in values {
            let responding = self.in_horizon(depth, v);
            let e = v + r;
            // Pairs (k, depth): an in-cutoff senior responder placed earlier
            // bumps this employee iff it responds later. Out-of-horizon
            // employees are bumped by nobody.
            let new_bumps = if responding {
                self.bumper_e.iter().filter(|&&ek| ek > e).count() as u64
            } else {
                0
            };
            let total = bumps + new_bumps;
            let responders2 = responders + usize::from(responding);
            self.cur_s[depth] = v;
            if self.lower_bound(depth + 1, total, responders2, v) >= self.best_cost {
                continue;
            }
            let pushed = responding && r <= self.d;
            if pushed {
                self.bumper_e.push(e);
            }
            if !self.memo_hit(depth + 1, v, responders2, total) {
                self.dfs(depth + 1, total, responders2);
            }
            if pushed {
                self.bumper_e.pop();
            }
        }
    }

    fn memo_hit(&mut self, depth: usize, s: i64, responders: usize, bumps: u64) -> bool {
        let mut key: Vec<u32> = Vec::with_capacity(self.bumper_e.len() + 3);
        key.push(depth as u32);
        key.push(s as u32);
        key.push(responders.min(self.shifts) as u32);
        let mut actives: Vec<u32> = self
            .bumper_e
            .iter()
            .filter(|&&e| e > s)
            .map(|&e| e as u32)
            .collect();
        actives.sort_unstable();
        key.extend(actives);
        match self.memo.get_mut(&key) {
            Some(best) if *best <= bumps => true,
            Some(best) => {
                *best = bumps;
                false
            }
            None => {
                if self.memo.len() >= self.memo_capacity {
                    self.memo.clear();
                }
                self.memo.insert(key, bumps);
                false
            }
        }
    }
}

/// Direct objective of a schedule under the vacancy-priced model: the
/// response and bump indicators are all forced once the notification times
/// are fixed.
fn ntp2_cost(instance: &Instance, delays: &[i64], s: &[i64]) -> u64 {
    let h = instance.horizon as i64;
    let d = instance.cutoff as i64;
    let m = s.len();
    let mut bumps = 0u64;
    let mut responders = 0usize;
    for i in 0..m {
        if s[i] + delays[i] > h {
            continue;
        }
        responders += 1;
        if delays[i] > d {
            continue;
        }
        for j in (i + 1)..m {
            if s[j] + delays[j] <= h && s[j] + delays[j] < s[i] + delays[i] {
                bumps += 1;
            }
        }
    }
    bumps + instance.vacancy_penalty * instance.shifts.saturating_sub(responders) as u64
}

/// Rewrites an optimal schedule into its latest equivalent-cost form, most
/// junior employee first. Cost-indifferent notifications (pushed-out
/// employees, non-responders, responders with slack) then cluster near the
/// horizon, which matches how the system behaves and makes the extracted
/// cumulative-notification curves meaningful.
fn canonicalize_latest(instance: &Instance, delays: &[i64], s: &mut [i64]) {
    let m = s.len();
    let h = instance.horizon as i64;
    let w = instance.notify_cap as usize;
    let base_cost = ntp2_cost(instance, delays, s);

    for i in (0..m).rev() {
        // Hard row bounds only; cost changes (responders pushed out of the
        // horizon, bump pattern shifts) are caught by the cost re-check.
        let mut upper = h;
        if i + 1 < m {
            upper = upper.min(s[i + 1]);
        }
        if i + w < m {
            upper = upper.min(s[i + w] - 1);
        }
        let original = s[i];
        for v in (original + 1..=upper).rev() {
            s[i] = v;
            if ntp2_cost(instance, delays, s) == base_cost {
                break;
            }
            s[i] = original;
        }
    }
    debug_assert_eq!(ntp2_cost(instance, delays, s), base_cost);
}

/// Exact optimum of the vacancy-priced offline model, including its
/// strengthening rows. Non-responders are admitted via the `H + 1`
/// surrogate. Always feasible.
pub fn solve_ntp2_exact(
    instance: &Instance,
    scenario: &DelayScenario,
    limits: &SolveLimits,
) -> SolveResult {
    let m = instance.employees;
    let delays: Vec<i64> = surrogate_delays(instance, scenario)
        .into_iter()
        .map(|r| r as i64)
        .collect();

    let mut search = Ntp2Search {
        delays,
        h: instance.horizon as i64,
        d: instance.cutoff as i64,
        w: instance.notify_cap as usize,
        shifts: instance.shifts,
        penalty: instance.vacancy_penalty,
        m,
        best_cost: u64::MAX,
        best_s: Vec::new(),
        cur_s: vec![0; m],
        bumper_e: Vec::new(),
        memo: HashMap::new(),
        memo_capacity: limits.memo_capacity,
        nodes: 0,
        deadline: Deadline::new(limits.time_limit),
    };
    search.dfs(0, 0, 0);

    if search.best_s.is_empty() {
        // The cap chain cannot fit every notification inside the horizon.
        let mut result = SolveResult::infeasible();
        result.nodes = search.nodes;
        return result;
    }
    let status = if search.deadline.expired {
        SolveStatus::TimeLimit
    } else {
        SolveStatus::Optimal
    };
    canonicalize_latest(instance, &search.delays, &mut search.best_s);
    let schedule =
        NotificationSchedule::new(search.best_s.iter().map(|&v| v as u32).collect()).unwrap();
    let bump_pairs = inverted_pairs(&schedule, scenario, instance, true);
    let bumps = bump_pairs.len() as u64;
    let responders = schedule
        .notify_times()
        .iter()
        .zip(&search.delays)
        .filter(|&(&s, &r)| s as i64 + r <= search.h)
        .count();
    let vacancies = instance.shifts.saturating_sub(responders) as u64;
    debug_assert_eq!(
        search.best_cost,
        bumps + instance.vacancy_penalty * vacancies
    );
    SolveResult {
        status,
        objective: search.best_cost as f64,
        schedule: Some(schedule),
        bumps,
        vacancies,
        bump_pairs,
        nodes: search.nodes,
    }
}

// ---------------------------------------------------------------------------
// Two-stage stochastic model at desk scale: enumerate first-stage schedules,
// score each scenario's recourse in closed form.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct DntpsResult {
    pub status: SolveStatus,
    pub objective: f64,
    pub schedule: NotificationSchedule,
    pub scenario_costs: Vec<u64>,
}

/// Optimal second-stage cost of one scenario given a first-stage schedule.
///
/// The recourse assigns shifts to a seniority prefix of the in-horizon
/// responders (the shift-order row makes any other assignment infeasible)
/// and counts cutoff-gated inversions of the shifted responders. The most
/// junior shifted responder may additionally carry both response flags when
/// `s + 2r <= H`, which silences its own bump row; the enumeration below
/// accounts for that.
pub(crate) fn dntps_second_stage(
    instance: &Instance,
    schedule: &[i64],
    delays: &[i64],
) -> u64 {
    let h = instance.horizon as i64;
    debug_assert!(
        schedule.iter().all(|&s| s <= h),
        "notifications past the horizon are infeasible in the stochastic model"
    );
    let d = instance.cutoff as i64;
    let g = instance.vacancy_penalty;
    let shifts = instance.shifts;

    let responders: Vec<usize> = (0..schedule.len())
        .filter(|&i| schedule[i] + delays[i] <= h)
        .collect();
    let e = |i: usize| schedule[i] + delays[i];

    // Bumps caused by each responder over the full responder set.
    let caused: Vec<u64> = responders
        .iter()
        .map(|&i| {
            if delays[i] > d {
                return 0;
            }
            responders
                .iter()
                .filter(|&&j| j > i && e(j) < e(i))
                .count() as u64
        })
        .collect();

    let mut best = u64::MAX;
    let mut prefix = 0u64;
    for p in 0..=responders.len() {
        if p > 0 {
            prefix += caused[p - 1];
        }
        let mut cost = prefix + g * shifts.saturating_sub(p) as u64;
        if p > 0 {
            let last = responders[p - 1];
            if schedule[last] + 2 * delays[last] <= h {
                cost -= caused[p - 1];
            }
        }
        best = best.min(cost);
    }
    best
}

/// Optimal second-stage (recourse) cost of one scenario for a fixed
/// first-stage schedule, as the extensive-form model prices it.
pub fn second_stage_cost(
    instance: &Instance,
    schedule: &NotificationSchedule,
    scenario: &DelayScenario,
) -> u64 {
    let s: Vec<i64> = schedule.notify_times().iter().map(|&v| v as i64).collect();
    let delays: Vec<i64> = surrogate_delays(instance, scenario)
        .into_iter()
        .map(|r| r as i64)
        .collect();
    dntps_second_stage(instance, &s, &delays)
}

/// Exhaustive first-stage search for the extensive-form stochastic model.
/// Intended for desk-scale cross-checks (a handful of employees and
/// scenarios); larger models go through the export path.
pub fn solve_dntps_exact(
    instance: &Instance,
    scenarios: &ScenarioSet,
    cap_mode: CapMode,
    limits: &SolveLimits,
) -> Result<DntpsResult, MilpError> {
    let m = instance.employees;
    if scenarios.scenarios[0].len() != m {
        return Err(MilpError::SizeMismatch(format!(
            "scenarios have {} delays, instance has {} employees",
            scenarios.scenarios[0].len(),
            m
        )));
    }
    let h = instance.horizon as i64;
    let w = instance.notify_cap as usize;
    let delay_vecs: Vec<Vec<i64>> = scenarios
        .scenarios
        .iter()
        .map(|s| {
            surrogate_delays(instance, s)
                .into_iter()
                .map(|r| r as i64)
                .collect()
        })
        .collect();

    struct FirstStageSearch<'a> {
        instance: &'a Instance,
        delay_vecs: &'a [Vec<i64>],
        cap_mode: CapMode,
        h: i64,
        w: usize,
        cur: Vec<i64>,
        best_total: u64,
        best_s: Option<Vec<i64>>,
        deadline: Deadline,
    }

    impl FirstStageSearch<'_> {
        fn dfs(&mut self, depth: usize) {
            if self.deadline.expired() {
                return;
            }
            if depth == self.cur.len() {
                let total: u64 = self
                    .delay_vecs
                    .iter()
                    .map(|r| dntps_second_stage(self.instance, &self.cur, r))
                    .sum();
                if total < self.best_total {
                    self.best_total = total;
                    self.best_s = Some(self.cur.clone());
                }
                return;
            }
            let s_prev = if depth == 0 { 0 } else { self.cur[depth - 1] };
            if self.cap_mode == CapMode::Equality && depth >= self.w {
                let v = self.cur[depth - self.w] + 1;
                if v < s_prev || v > self.h {
                    return;
                }
                self.cur[depth] = v;
                self.dfs(depth + 1);
                return;
            }
            let mut lb = s_prev;
            if self.cap_mode == CapMode::Inequality && depth >= self.w {
                lb = lb.max(self.cur[depth - self.w] + 1);
            }
            // The response-tracking rows force every notification inside
            // the horizon whatever the response flags are.
            if lb > self.h {
                return;
            }
            for v in lb..=self.h {
                self.cur[depth] = v;
                self.dfs(depth + 1);
            }
        }
    }

    let mut search = FirstStageSearch {
        instance,
        delay_vecs: &delay_vecs,
        cap_mode,
        h,
        w,
        cur: vec![0i64; m],
        best_total: u64::MAX,
        best_s: None,
        deadline: Deadline::new(limits.time_limit),
    };
    search.dfs(0);

    let best_s = search
        .best_s
        .ok_or_else(|| MilpError::Backend("no feasible first stage".into()))?;
    let scenario_costs: Vec<u64> = delay_vecs
        .iter()
        .map(|r| dntps_second_stage(instance, &best_s, r))
        .collect();
    let schedule =
        NotificationSchedule::new(best_s.iter().map(|&v| v as u32).collect()).unwrap();
    Ok(DntpsResult {
        status: if search.deadline.expired {
            SolveStatus::TimeLimit
        } else {
            SolveStatus::Optimal
        },
        objective: search.best_total as f64 / delay_vecs.len() as f64,
        schedule,
        scenario_costs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bump::potential_bumps;
    use crate::model::Delay;

    fn fig1() -> (Instance, DelayScenario) {
        (
            Instance::new(6, 6, 10, 10, 6, 200).unwrap(),
            DelayScenario::from_finite(&[4, 1, 5, 3, 2, 5]).unwrap(),
        )
    }

    #[test]
    fn fig1_optimum_is_one_bump() {
        let (inst, scen) = fig1();
        let res = solve_ntp_exact(&inst, &scen, &SolveLimits::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert_eq!(res.objective, 1.0);
        let sched = res.schedule.unwrap();
        let (total, _) = potential_bumps(&sched, &scen, &inst, false);
        assert_eq!(total, 1);
    }

    #[test]
    fn fig1_with_one_more_epoch_fits_the_no_bump_schedule() {
        let inst = Instance::new(6, 6, 11, 11, 6, 200).unwrap();
        let scen = DelayScenario::from_finite(&[4, 1, 5, 3, 2, 5]).unwrap();
        let res = solve_ntp_exact(&inst, &scen, &SolveLimits::default()).unwrap();
        assert_eq!(res.objective, 0.0);
    }

    #[test]
    fn infeasible_when_a_delay_exceeds_the_horizon() {
        let inst = Instance::new(2, 2, 5, 5, 2, 0).unwrap();
        let scen = DelayScenario::from_finite(&[6, 1]).unwrap();
        let res = solve_ntp_exact(&inst, &scen, &SolveLimits::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Infeasible);
    }

    /// Exhaustively enumerates every seniority-feasible integer schedule.
    fn brute_force_ntp(instance: &Instance, scenario: &DelayScenario) -> Option<u64> {
        let m = instance.employees;
        let h = instance.horizon as i64;
        let r: Vec<i64> = scenario.iter().map(|d| d.finite().unwrap() as i64).collect();
        let mut best: Option<u64> = None;
        let mut s = vec![0i64; m];
        fn rec(
            depth: usize,
            m: usize,
            h: i64,
            r: &[i64],
            s: &mut Vec<i64>,
            best: &mut Option<u64>,
        ) {
            if depth == m {
                let mut inv = 0u64;
                for i in 0..m {
                    for j in (i + 1)..m {
                        if s[i] + r[i] > s[j] + r[j] {
                            inv += 1;
                        }
                    }
                }
                if best.is_none_or(|b| inv < b) {
                    *best = Some(inv);
                }
                return;
            }
            let lo = if depth == 0 { 0 } else { s[depth - 1] };
            for v in lo..=(h - r[depth]) {
                s[depth] = v;
                rec(depth + 1, m, h, r, s, best);
            }
        }
        rec(0, m, h, &r, &mut s, &mut best);
        best
    }

    #[test]
    fn solver_matches_exhaustive_enumeration_on_small_instances() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..120 {
            let m = rng.gen_range(1..=5);
            let h = rng.gen_range(3..=8u32);
            let delays: Vec<u32> = (0..m).map(|_| rng.gen_range(1..=h)).collect();
            let inst = Instance::new(m, m, h, h, m as u32, 0).unwrap();
            let scen = DelayScenario::from_finite(&delays).unwrap();
            let brute = brute_force_ntp(&inst, &scen).unwrap();
            let res = solve_ntp_exact(&inst, &scen, &SolveLimits::default()).unwrap();
            assert_eq!(res.objective as u64, brute, "delays {delays:?} H {h}");
        }
    }

    #[test]
    fn ntp2_matches_ntp_when_everyone_fits() {
        // D = H and a huge vacancy penalty make the vacancy-priced model
        // collapse onto the pure bump-minimization problem.
        let (inst, scen) = fig1();
        let res = solve_ntp2_exact(&inst, &scen, &SolveLimits::default());
        assert_eq!(res.status, SolveStatus::Optimal);
        assert_eq!(res.objective, 1.0);
        assert_eq!(res.vacancies, 0);
    }

    #[test]
    fn ntp2_prices_unavoidable_vacancies() {
        // Only 3 of the 6 employees can respond within the horizon; L = 4
        // leaves exactly one vacancy at the optimum.
        let inst = Instance::new(6, 4, 10, 10, 6, 200).unwrap();
        let scen = DelayScenario::new(vec![
            Delay::Finite(2),
            Delay::Finite(3),
            Delay::NonResponder,
            Delay::Finite(1),
            Delay::NonResponder,
            Delay::NonResponder,
        ])
        .unwrap();
        let res = solve_ntp2_exact(&inst, &scen, &SolveLimits::default());
        assert_eq!(res.vacancies, 1);
        assert_eq!(res.objective, 200.0);
    }

    #[test]
    fn ntp2_all_non_responders_costs_every_shift() {
        let inst = Instance::new(3, 3, 5, 5, 3, 200).unwrap();
        let scen = DelayScenario::new(vec![Delay::NonResponder; 3]).unwrap();
        let res = solve_ntp2_exact(&inst, &scen, &SolveLimits::default());
        assert_eq!(res.objective, 600.0);
        assert_eq!(res.vacancies, 3);
        assert_eq!(res.bumps, 0);
    }

    #[test]
    fn dntps_single_scenario_matches_ntp2() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let m = rng.gen_range(2..=5);
            let h = rng.gen_range(4..=8u32);
            let delays: Vec<u32> = (0..m).map(|_| rng.gen_range(1..=h + 2)).collect();
            let inst = Instance::new(m, m, h, h, m as u32, 200).unwrap();
            let scen = DelayScenario::from_finite(&delays).unwrap();
            let set = ScenarioSet::new(vec![scen.clone()], 0).unwrap();
            let st = solve_dntps_exact(&inst, &set, CapMode::Inequality, &SolveLimits::default())
                .unwrap();
            let off = solve_ntp2_exact(&inst, &scen, &SolveLimits::default());
            assert_eq!(
                st.objective, off.objective,
                "delays {delays:?} H {h} stochastic {} offline {}",
                st.objective, off.objective
            );
        }
    }

    /// Enumerates the second-stage binaries of the stochastic model for a
    /// fixed first stage and minimizes cost subject to the model rows.
    fn second_stage_by_enumeration(inst: &Instance, s: &[i64], r: &[i64]) -> u64 {
        let m = s.len();
        let h = inst.horizon as i64;
        let d = inst.cutoff as i64;
        let g = inst.vacancy_penalty;
        let mut best = u64::MAX;
        for zr_mask in 0u32..(1 << m) {
            'combo: for zn_mask in 0u32..(1 << m) {
                let zr = |i: usize| (zr_mask >> i) & 1 == 1;
                let zn = |i: usize| (zn_mask >> i) & 1 == 1;
                for i in 0..m {
                    let both = zr(i) as i64 + zn(i) as i64;
                    if s[i] + r[i] < (h + 1) * (1 - both) {
                        continue 'combo;
                    }
                    if s[i] + r[i] > h + r[i] * (1 - both) {
                        continue 'combo;
                    }
                    let juniors_denied: i64 = (0..i).map(|j| zn(j) as i64).sum();
                    if juniors_denied > (i as i64 + 1) * (1 - zr(i) as i64) {
                        continue 'combo;
                    }
                }
                let mut bumps = 0u64;
                for i in 0..m {
                    for j in (i + 1)..m {
                        if r[j] <= r[i] && r[i] <= d {
                            let slack = (h + r[i]) * (1 - zr(i) as i64 + zn(i) as i64);
                            if s[i] - s[j] + (r[i] - r[j]) > slack {
                                bumps += 1;
                            }
                        }
                    }
                }
                let responders: i64 = (0..m).map(|i| zr(i) as i64).sum();
                let theta = (inst.shifts as i64 - responders).max(0) as u64;
                best = best.min(g * theta + bumps);
            }
        }
        best
    }

    #[test]
    fn second_stage_closed_form_matches_binary_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..300 {
            let m = rng.gen_range(1..=4);
            let h = rng.gen_range(3..=8u32);
            let l = rng.gen_range(1..=m);
            let d = rng.gen_range(1..=h);
            let g: u64 = [0, 1, 2, 200][rng.gen_range(0..4)];
            let inst = Instance::new(m, l, h, d, m as u32, g).unwrap();
            let r: Vec<i64> = (0..m).map(|_| rng.gen_range(1..=h as i64 + 1)).collect();
            let mut s = vec![0i64; m];
            for i in 0..m {
                let lo = if i == 0 { 0 } else { s[i - 1] };
                s[i] = rng.gen_range(lo..=h as i64);
            }
            let closed = dntps_second_stage(&inst, &s, &r);
            let brute = second_stage_by_enumeration(&inst, &s, &r);
            assert_eq!(closed, brute, "s={s:?} r={r:?} L={l} D={d} G={g} H={h}");
        }
    }

    #[test]
    fn dntps_all_non_responder_scenarios_cost_every_shift_regardless_of_schedule() {
        let inst = Instance::new(3, 3, 5, 5, 2, 200).unwrap();
        let scen = DelayScenario::new(vec![Delay::NonResponder; 3]).unwrap();
        let set = ScenarioSet::new(vec![scen.clone(), scen], 0).unwrap();
        let res =
            solve_dntps_exact(&inst, &set, CapMode::Inequality, &SolveLimits::default()).unwrap();
        assert_eq!(res.objective, 600.0);
        assert_eq!(res.scenario_costs, vec![600, 600]);
    }

    #[test]
    fn dntps_toy_two_scenarios_notifies_everyone_at_zero() {
        let inst = Instance::new(3, 3, 3, 3, 3, 200).unwrap();
        let set = ScenarioSet::new(
            vec![
                DelayScenario::from_finite(&[1, 1, 1]).unwrap(),
                DelayScenario::from_finite(&[3, 3, 3]).unwrap(),
            ],
            0,
        )
        .unwrap();
        let res =
            solve_dntps_exact(&inst, &set, CapMode::Inequality, &SolveLimits::default()).unwrap();
        assert_eq!(res.objective, 0.0);
        assert_eq!(res.schedule.notify_times(), &[0, 0, 0]);
    }
}
