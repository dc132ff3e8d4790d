//! Notification timing for on-demand personnel scheduling.
//!
//! An on-demand staffing system notifies casual employees about open shifts
//! in seniority order. Employees take time to respond; a senior responding
//! within the cutoff may bump a junior out of an already-claimed shift.
//! Management picks notification times to fill every shift by the horizon
//! while keeping bumps low.
//!
//! This crate provides:
//! * the deterministic bump engine that scores any notification schedule
//!   ([`bump`]),
//! * exact offline solvers and exportable MILP formulations for the offline
//!   and two-stage stochastic problems ([`milp`]),
//! * the subset-sum reduction lab with executable certificates of the
//!   hardness constructions ([`reduce`]),
//! * notification policies and threshold estimation from offline solutions
//!   ([`policy`]),
//! * a discrete-epoch simulator and the train/validate/test experiment
//!   harness ([`sim`], [`experiment`]),
//! * CSV/config ingestion and report plumbing ([`io`]).
//!
//! # Example
//!
//! Solve one realized day exactly and re-score the optimal schedule through
//! the bump engine:
//!
//! ```
//! use ntp_core::bump::evaluate_schedule;
//! use ntp_core::milp::{solve_ntp_exact, SolveLimits};
//! use ntp_core::{DelayScenario, Instance, Makespan};
//!
//! // six employees, six shifts, ten epochs; delays known in advance
//! let instance = Instance::new(6, 6, 10, 10, 6, 200)?;
//! let delays = DelayScenario::from_finite(&[4, 1, 5, 3, 2, 5])?;
//!
//! let solved = solve_ntp_exact(&instance, &delays, &SolveLimits::default())?;
//! assert_eq!(solved.objective, 1.0); // one unavoidable bump
//!
//! let schedule = solved.schedule.unwrap();
//! let report = evaluate_schedule(&schedule, &delays, &instance, None);
//! assert_eq!(report.potential_bumps, 1);
//! assert_eq!(report.vacancies, 0);
//! // every shift fills within the horizon
//! assert!(matches!(report.makespan, Makespan::Finite(t) if t <= 10));
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod bump;
pub mod experiment;
pub mod io;
pub mod milp;
pub mod model;
pub mod policy;
pub mod prefs;
pub mod reduce;
pub mod sim;

pub use model::{
    Delay, DelayScenario, Epoch, Instance, Makespan, ModelError, NotificationSchedule,
    PreferenceProfile, RunReport, SubsetSumInstance,
};
