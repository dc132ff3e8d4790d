//! MILP machinery: a small model carrier, builders for the offline and
//! stochastic formulations, an LP-format exporter, an embedded exact solver
//! for desk-scale instances, and a pluggable external-solver backend.

mod backend;
mod dntps;
mod lp;
mod model;
mod ntp;
mod ntp2;
mod solve;

pub use backend::{BackendSolution, ExternalLpBackend, SolverBackend};
pub use dntps::{build_dntps, extract_first_stage, CapMode, ScenarioSet};
pub use lp::write_lp;
pub use model::{Cmp, MilpError, MilpModel, Row, Var, VarId, VarType};
pub use ntp::build_ntp;
pub use ntp2::build_ntp2;
pub use solve::{
    second_stage_cost, solve_dntps_exact, solve_exact, solve_ntp2_exact, solve_ntp_exact,
    DntpsResult, Formulation, SolveLimits, SolveResult, SolveStatus,
};
