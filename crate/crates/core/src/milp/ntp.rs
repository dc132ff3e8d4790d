//! Offline notification-timing model: minimize potential bumps subject to
//! seniority order and everyone responding within the horizon.
//!
//! Variables: notification time `s_i >= 0` and response time `e_i >= 0`
//! (continuous), plus a binary `y_i_j` for every pair `i < j` with
//! `r_i > r_j` (the only pairs that can invert under seniority order).
//! The bump row uses `(r_i - r_j)` as its big-M, which is tight because
//! `s_i <= s_j` caps `e_i - e_j` at exactly that value.

use crate::milp::model::{Cmp, MilpError, MilpModel, VarType};
use crate::model::{DelayScenario, Instance};

pub fn build_ntp(instance: &Instance, scenario: &DelayScenario) -> Result<MilpModel, MilpError> {
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
        delays.push(d.finite().ok_or(MilpError::NonResponder(i + 1))?);
    }

    let mut model = MilpModel::new("ntp");
    let s: Vec<_> = (1..=m)
        .map(|i| model.add_var(format!("s_{i}"), VarType::Continuous, None))
        .collect::<Result<_, _>>()?;
    let e: Vec<_> = (1..=m)
        .map(|i| model.add_var(format!("e_{i}"), VarType::Continuous, None))
        .collect::<Result<_, _>>()?;

    let mut objective = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            if delays[i] > delays[j] {
                let y = model.add_var(
                    format!("y_{}_{}", i + 1, j + 1),
                    VarType::Binary,
                    None,
                )?;
                objective.push((y, 1.0));
                // e_i - e_j <= (r_i - r_j) y_ij
                let big_m = (delays[i] - delays[j]) as f64;
                model.add_row(
                    format!("bump_{}_{}", i + 1, j + 1),
                    vec![(e[i], 1.0), (e[j], -1.0), (y, -big_m)],
                    Cmp::Le,
                    0.0,
                )?;
            }
        }
    }
    model.objective = objective;

    for i in 0..m {
        if i + 1 < m {
            model.add_row(
                format!("seniority_{}", i + 1),
                vec![(s[i], 1.0), (s[i + 1], -1.0)],
                Cmp::Le,
                0.0,
            )?;
        }
        model.add_row(
            format!("horizon_{}", i + 1),
            vec![(e[i], 1.0)],
            Cmp::Le,
            instance.horizon as f64,
        )?;
        model.add_row(
            format!("response_{}", i + 1),
            vec![(e[i], 1.0), (s[i], -1.0)],
            Cmp::Eq,
            delays[i] as f64,
        )?;
    }
    Ok(model)
}
