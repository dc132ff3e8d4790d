//! Pluggable solver backend: exported models go out as LP text, an external
//! MILP engine sends variable values back. The bundled backend shells out to
//! a Python script driving scipy's HiGHS solver, so industrial-scale models
//! can be solved outside the embedded branch-and-bound.

use crate::milp::lp::write_lp;
use crate::milp::model::{MilpError, MilpModel};
use serde::Deserialize;
use std::collections::HashMap;
use std::io::Write as _;
use std::process::Command;

#[derive(Debug, Clone, Deserialize)]
pub struct BackendSolution {
    pub status: String,
    pub objective: Option<f64>,
    #[serde(default)]
    pub values: HashMap<String, f64>,
}

impl BackendSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == "optimal"
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }
}

/// Submit models, retrieve solutions. Implementations must return one
/// solution per submitted model, in order.
pub trait SolverBackend {
    fn solve_batch(&self, models: &[&MilpModel]) -> Result<Vec<BackendSolution>, MilpError>;

    fn solve(&self, model: &MilpModel) -> Result<BackendSolution, MilpError> {
        let mut batch = self.solve_batch(&[model])?;
        batch
            .pop()
            .ok_or_else(|| MilpError::Backend("backend returned no solution".into()))
    }
}

const LP_BACKEND_SCRIPT: &str = include_str!("../../../../scripts/lp_backend.py");

/// Runs the bundled scipy/HiGHS script on exported LP files.
#[derive(Debug, Clone)]
pub struct ExternalLpBackend {
    pub python: String,
}

impl Default for ExternalLpBackend {
    fn default() -> Self {
        ExternalLpBackend {
            python: "python3".into(),
        }
    }
}

impl ExternalLpBackend {
    /// Checks that the interpreter and scipy are usable.
    pub fn available(&self) -> bool {
        Command::new(&self.python)
            .args(["-c", "import scipy.optimize"])
            .output()
            .map(|o| o.status.success())
            .unwrap_or(false)
    }
}

impl SolverBackend for ExternalLpBackend {
    fn solve_batch(&self, models: &[&MilpModel]) -> Result<Vec<BackendSolution>, MilpError> {
        let dir = tempfile::tempdir().map_err(|e| MilpError::Backend(e.to_string()))?;
        let script = dir.path().join("lp_backend.py");
        std::fs::write(&script, LP_BACKEND_SCRIPT).map_err(|e| MilpError::Backend(e.to_string()))?;

        let mut paths = Vec::with_capacity(models.len());
        for (k, model) in models.iter().enumerate() {
            let path = dir.path().join(format!("model_{k}.lp"));
            let mut file =
                std::fs::File::create(&path).map_err(|e| MilpError::Backend(e.to_string()))?;
            file.write_all(write_lp(model).as_bytes())
                .map_err(|e| MilpError::Backend(e.to_string()))?;
            paths.push(path);
        }

        let output = Command::new(&self.python)
            .arg(&script)
            .args(&paths)
            .output()
            .map_err(|e| MilpError::Backend(format!("failed to run {}: {e}", self.python)))?;
        if !output.status.success() {
            return Err(MilpError::Backend(format!(
                "backend exited with {}: {}",
                output.status,
                String::from_utf8_lossy(&output.stderr)
            )));
        }
        let solutions: Vec<BackendSolution> = serde_json::from_slice(&output.stdout)
            .map_err(|e| MilpError::Backend(format!("unparseable backend output: {e}")))?;
        if solutions.len() != models.len() {
            return Err(MilpError::Backend(format!(
                "backend returned {} solutions for {} models",
                solutions.len(),
                models.len()
            )));
        }
        Ok(solutions)
    }
}
