//! Shared domain types: problem instances, delay scenarios, notification
//! schedules, preference profiles, and run reports.
//!
//! Conventions used across the whole crate:
//! * Employees are indexed `0..M` in order of seniority (index 0 is the most
//!   senior). Human-facing output converts to 1-based numbering.
//! * Shifts are indexed `0..L`.
//! * Time is measured in integer epochs (one epoch = one minute), so a
//!   six-hour planning window is `H = 360`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Epoch count. All times in the system are integral.
pub type Epoch = u32;

/// Rounds a positive duration in minutes to whole epochs, ties upward, with
/// sub-epoch durations landing in the next epoch (a response can never
/// arrive in its notification epoch).
pub fn round_to_epochs(minutes: f64) -> Epoch {
    (((minutes + 0.5).floor() as u64).max(1)).min(u32::MAX as u64) as Epoch
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("instance invariant violated: {0}")]
    InvalidInstance(&'static str),
    #[error("delay scenario invariant violated: {0}")]
    InvalidScenario(String),
    #[error("schedule invariant violated: {0}")]
    InvalidSchedule(String),
    #[error("preference profile invariant violated: {0}")]
    InvalidPreferences(String),
    #[error("subset-sum instance invariant violated: {0}")]
    InvalidSubsetSum(String),
}

/// Problem parameters for one planning day.
///
/// `M` employees are available for `L` shifts over a horizon of `H` epochs.
/// An employee responding within `D` epochs of notification may bump juniors;
/// at most `W` notifications go out per epoch; each shift left vacant at the
/// horizon costs `G`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub employees: usize,
    pub shifts: usize,
    pub horizon: Epoch,
    pub cutoff: Epoch,
    pub notify_cap: u32,
    pub vacancy_penalty: u64,
}

impl Instance {
    pub fn new(
        employees: usize,
        shifts: usize,
        horizon: Epoch,
        cutoff: Epoch,
        notify_cap: u32,
        vacancy_penalty: u64,
    ) -> Result<Self, ModelError> {
        Instance {
            employees,
            shifts,
            horizon,
            cutoff,
            notify_cap,
            vacancy_penalty,
        }
        .validated()
    }

    /// Checks every instance invariant, reporting the first violation by name.
    pub fn validated(self) -> Result<Self, ModelError> {
        if self.employees == 0 {
            return Err(ModelError::InvalidInstance("M >= 1 violated"));
        }
        if self.shifts == 0 {
            return Err(ModelError::InvalidInstance("L >= 1 violated"));
        }
        if self.shifts > self.employees {
            return Err(ModelError::InvalidInstance("L <= M violated"));
        }
        if self.horizon == 0 {
            return Err(ModelError::InvalidInstance("H >= 1 violated"));
        }
        if self.cutoff == 0 || self.cutoff > self.horizon {
            return Err(ModelError::InvalidInstance("0 < D <= H violated"));
        }
        if self.notify_cap == 0 {
            return Err(ModelError::InvalidInstance("W >= 1 violated"));
        }
        Ok(self)
    }
}

/// One employee's response delay: a positive epoch count, or the distinguished
/// non-responder sentinel (semantically infinite, beyond any horizon).
///
/// The sentinel is deliberately not a large finite number; arithmetic on it is
/// a programming error rather than silent overflow, so all response-time
/// computations go through [`Delay::response_time`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Delay {
    Finite(Epoch),
    NonResponder,
}

impl Delay {
    pub fn is_finite(self) -> bool {
        matches!(self, Delay::Finite(_))
    }

    pub fn finite(self) -> Option<Epoch> {
        match self {
            Delay::Finite(r) => Some(r),
            Delay::NonResponder => None,
        }
    }

    /// Response epoch for a notification sent at `notify`, or `None` for a
    /// non-responder.
    pub fn response_time(self, notify: Epoch) -> Option<Epoch> {
        self.finite().map(|r| notify + r)
    }
}

/// Realized response delays for all `M` employees of one scenario.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelayScenario {
    delays: Vec<Delay>,
}

impl DelayScenario {
    /// Builds a scenario, enforcing that every finite delay is at least one
    /// epoch (a response can never land in the notification epoch itself).
    pub fn new(delays: Vec<Delay>) -> Result<Self, ModelError> {
        if delays.is_empty() {
            return Err(ModelError::InvalidScenario("empty delay vector".into()));
        }
        if let Some(i) = delays.iter().position(|d| *d == Delay::Finite(0)) {
            return Err(ModelError::InvalidScenario(format!(
                "delay of employee {} is 0; finite delays must be >= 1",
                i + 1
            )));
        }
        Ok(DelayScenario { delays })
    }

    /// Builds a scenario that may contain zero delays. The subset-sum
    /// reduction produces instances with a literal zero delay, so the
    /// reduction lab uses this relaxed constructor; the simulator does not
    /// accept such scenarios.
    pub fn with_zero_delays(delays: Vec<Delay>) -> Result<Self, ModelError> {
        if delays.is_empty() {
            return Err(ModelError::InvalidScenario("empty delay vector".into()));
        }
        Ok(DelayScenario { delays })
    }

    pub fn from_finite(delays: &[Epoch]) -> Result<Self, ModelError> {
        Self::new(delays.iter().map(|&r| Delay::Finite(r)).collect())
    }

    pub fn len(&self) -> usize {
        self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }

    pub fn delay(&self, employee: usize) -> Delay {
        self.delays[employee]
    }

    pub fn delays(&self) -> &[Delay] {
        &self.delays
    }

    pub fn iter(&self) -> impl Iterator<Item = Delay> + '_ {
        self.delays.iter().copied()
    }

    pub fn all_finite(&self) -> bool {
        self.delays.iter().all(|d| d.is_finite())
    }
}

/// First-stage decision: the epoch at which each employee is notified.
///
/// Notification times are nondecreasing in the seniority index; the
/// constructor rejects anything else exactly (no tolerance).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NotificationSchedule {
    notify_times: Vec<Epoch>,
}

impl NotificationSchedule {
    pub fn new(notify_times: Vec<Epoch>) -> Result<Self, ModelError> {
        if notify_times.is_empty() {
            return Err(ModelError::InvalidSchedule("empty schedule".into()));
        }
        for w in notify_times.windows(2) {
            if w[0] > w[1] {
                return Err(ModelError::InvalidSchedule(format!(
                    "seniority order violated: s={} precedes s={}",
                    w[1], w[0]
                )));
            }
        }
        Ok(NotificationSchedule { notify_times })
    }

    pub fn len(&self) -> usize {
        self.notify_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.notify_times.is_empty()
    }

    pub fn notify_time(&self, employee: usize) -> Epoch {
        self.notify_times[employee]
    }

    pub fn notify_times(&self) -> &[Epoch] {
        &self.notify_times
    }

    /// Binds a delay scenario to this schedule, yielding per-employee
    /// response epochs (`None` for non-responders). Pure: identical inputs
    /// yield identical vectors.
    pub fn response_times(&self, scenario: &DelayScenario) -> Vec<Option<Epoch>> {
        assert_eq!(
            self.notify_times.len(),
            scenario.len(),
            "schedule and scenario sizes differ"
        );
        self.notify_times
            .iter()
            .zip(scenario.iter())
            .map(|(&s, r)| r.response_time(s))
            .collect()
    }
}

/// Ordered shift preferences, one list per employee, most preferred first.
/// Every list is a permutation of `0..L`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceProfile {
    prefs: Vec<Vec<usize>>,
    shifts: usize,
}

impl PreferenceProfile {
    pub fn new(prefs: Vec<Vec<usize>>, shifts: usize) -> Result<Self, ModelError> {
        if prefs.is_empty() {
            return Err(ModelError::InvalidPreferences("no employees".into()));
        }
        for (i, list) in prefs.iter().enumerate() {
            let mut seen = vec![false; shifts];
            if list.len() != shifts {
                return Err(ModelError::InvalidPreferences(format!(
                    "employee {} has {} entries, expected {}",
                    i + 1,
                    list.len(),
                    shifts
                )));
            }
            for &l in list {
                if l >= shifts || seen[l] {
                    return Err(ModelError::InvalidPreferences(format!(
                        "employee {} list is not a permutation of 0..{}",
                        i + 1,
                        shifts
                    )));
                }
                seen[l] = true;
            }
        }
        Ok(PreferenceProfile { prefs, shifts })
    }

    /// All employees share the natural order `0, 1, .., L-1`.
    pub fn identical(employees: usize, shifts: usize) -> Self {
        let list: Vec<usize> = (0..shifts).collect();
        PreferenceProfile {
            prefs: vec![list; employees],
            shifts,
        }
    }

    pub fn employees(&self) -> usize {
        self.prefs.len()
    }

    pub fn shifts(&self) -> usize {
        self.shifts
    }

    pub fn list(&self, employee: usize) -> &[usize] {
        &self.prefs[employee]
    }

    /// True when every employee ranks shifts identically.
    pub fn is_identical(&self) -> bool {
        self.prefs.windows(2).all(|w| w[0] == w[1])
    }
}

/// A subset-sum decision instance: positive sizes and a positive target.
///
/// The classical statement writes the target as `W`, which collides with
/// the notification cap; it is named `T` here to keep the two apart.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetSumInstance {
    pub sizes: Vec<u64>,
    pub target: u64,
}

impl SubsetSumInstance {
    pub fn new(sizes: Vec<u64>, target: u64) -> Result<Self, ModelError> {
        if sizes.is_empty() {
            return Err(ModelError::InvalidSubsetSum("empty size set".into()));
        }
        if sizes.contains(&0) {
            return Err(ModelError::InvalidSubsetSum("sizes must be positive".into()));
        }
        if target == 0 {
            return Err(ModelError::InvalidSubsetSum("target must be positive".into()));
        }
        Ok(SubsetSumInstance { sizes, target })
    }

    pub fn total(&self) -> u64 {
        self.sizes.iter().sum()
    }
}

/// Makespan of a run: the epoch at which the last shift was filled, or
/// unbounded when some shift never fills.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Makespan {
    Finite(Epoch),
    Unbounded,
}

impl Makespan {
    pub fn finite(self) -> Option<Epoch> {
        match self {
            Makespan::Finite(t) => Some(t),
            Makespan::Unbounded => None,
        }
    }
}

impl std::fmt::Display for Makespan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Makespan::Finite(t) => write!(f, "{t}"),
            Makespan::Unbounded => write!(f, "inf"),
        }
    }
}

/// Outcome of evaluating one schedule under one scenario.
///
/// `realized_bumps` is present only when a preference profile was actually
/// replayed; `potential_bumps` is always available. `cost` is
/// `G * vacancies + bumps`, using realized bumps when they were measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub potential_bumps: u64,
    pub realized_bumps: Option<u64>,
    pub vacancies: u64,
    pub cost: u64,
    pub makespan: Makespan,
    /// Bumps caused by each employee (realized when preferences were
    /// replayed, potential otherwise).
    pub per_employee_bumps: Vec<u64>,
}

impl RunReport {
    /// The bump count the report accounts cost with.
    pub fn bumps(&self) -> u64 {
        self.realized_bumps.unwrap_or(self.potential_bumps)
    }
}
