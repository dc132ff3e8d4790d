//! A minimal mixed-integer linear model carrier: named typed variables,
//! named linear rows, and a minimization objective.

use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MilpError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("duplicate constraint name `{0}`")]
    DuplicateConstraint(String),
    #[error("constraint `{0}` references undeclared variable id {1}")]
    UnknownVariable(String, usize),
    #[error("offline formulation rejects non-responders (employee {0})")]
    NonResponder(usize),
    #[error("model size budget exceeded: {0} variables (budget {1})")]
    SizeBudget(usize, usize),
    #[error("instance/scenario size mismatch: {0}")]
    SizeMismatch(String),
    #[error("solver backend failure: {0}")]
    Backend(String),
}

pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarType {
    Binary,
    /// Nonnegative integer.
    Integer,
    /// Nonnegative continuous.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Var {
    pub name: String,
    pub ty: VarType,
    pub lb: f64,
    pub ub: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default)]
pub struct MilpModel {
    pub name: String,
    vars: Vec<Var>,
    index: HashMap<String, VarId>,
    rows: Vec<Row>,
    /// Minimized linear objective.
    pub objective: Vec<(VarId, f64)>,
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> Self {
        MilpModel {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        ty: VarType,
        ub: Option<f64>,
    ) -> Result<VarId, MilpError> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(MilpError::DuplicateVariable(name));
        }
        let id = self.vars.len();
        self.index.insert(name.clone(), id);
        self.vars.push(Var {
            name,
            ty,
            lb: 0.0,
            ub,
        });
        Ok(id)
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        cmp: Cmp,
        rhs: f64,
    ) -> Result<(), MilpError> {
        let name = name.into();
        if self.rows.iter().any(|r| r.name == name) {
            return Err(MilpError::DuplicateConstraint(name));
        }
        for &(id, _) in &terms {
            if id >= self.vars.len() {
                return Err(MilpError::UnknownVariable(name, id));
            }
        }
        self.rows.push(Row {
            name,
            terms,
            cmp,
            rhs,
        });
        Ok(())
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn var_name(&self, id: VarId) -> &str {
        &self.vars[id].name
    }

    /// Objective value of a full assignment (by variable id).
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective
            .iter()
            .map(|&(id, c)| c * values[id])
            .sum()
    }
}
