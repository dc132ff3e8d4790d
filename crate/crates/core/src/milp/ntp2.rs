//! Full-information offline model with vacancy cost: minimize
//! `G*theta + total bumps` where employees may be pushed past the horizon.
//!
//! A binary `z_i` tracks whether employee `i` responds within the horizon;
//! it is forced to the correct value by a pair of big-M rows. Bump rows are
//! emitted only for pairs with `r_j <= r_i <= D` (a senior can only invert
//! when its delay is larger, and only bumps within the cutoff) and are
//! deactivated for employees out of the horizon. Non-responders enter as a
//! surrogate delay of `H + 1`, which forces `z_i = 0`.
//!
//! Two strengthening rows are included per bump pair: the linking rows
//! `y_ij <= z_i`, `y_ij <= z_j`, so a bump can count only when both parties
//! respond within the horizon. A tempting third strengthening row,
//! `s_{i+1} - s_i <= H (1 - z_i)` for nondecreasing adjacent delays ("no
//! reason to delay an employee who responds slower anyway"), is NOT part of
//! this model because it cuts off true optima: with a binding cap it forces
//! out-of-horizon pushes outright, and even with a slack cap an optimal
//! schedule may need `s_{i+1} > s_i` to lift `e_{i+1}` over a slow senior's
//! response while keeping `e_i` below a fast junior's (for example delays
//! [6,2,4,1,4,2] with H = 6 on the adjacent pair 2,3).

use crate::milp::model::{Cmp, MilpError, MilpModel, VarType};
use crate::model::{DelayScenario, Epoch, Instance};

/// Delay vector with the out-of-horizon surrogate applied.
pub(crate) fn surrogate_delays(instance: &Instance, scenario: &DelayScenario) -> Vec<Epoch> {
    scenario
        .iter()
        .map(|d| d.finite().unwrap_or(instance.horizon + 1))
        .collect()
}

pub fn build_ntp2(instance: &Instance, scenario: &DelayScenario) -> Result<MilpModel, MilpError> {
    let m = instance.employees;
    if scenario.len() != m {
        return Err(MilpError::SizeMismatch(format!(
            "scenario has {} delays, instance has {} employees",
            scenario.len(),
            m
        )));
    }
    let r = surrogate_delays(instance, scenario);
    let h = instance.horizon as f64;
    let d = instance.cutoff;
    let w = instance.notify_cap as usize;

    let mut model = MilpModel::new("ntp2");
    let s: Vec<_> = (1..=m)
        .map(|i| model.add_var(format!("s_{i}"), VarType::Continuous, None))
        .collect::<Result<_, _>>()?;
    let z: Vec<_> = (1..=m)
        .map(|i| model.add_var(format!("z_{i}"), VarType::Binary, None))
        .collect::<Result<_, _>>()?;
    let theta = model.add_var("theta", VarType::Integer, Some(instance.shifts as f64))?;

    let mut objective = vec![(theta, instance.vacancy_penalty as f64)];
    for i in 0..m {
        for j in (i + 1)..m {
            if r[j] <= r[i] && r[i] <= d {
                let y = model.add_var(format!("y_{}_{}", i + 1, j + 1), VarType::Binary, None)?;
                objective.push((y, 1.0));
                // s_i - s_j + delta <= delta y + (H + r_i)(1 - z_i)
                let delta = (r[i] - r[j]) as f64;
                let big_m = h + r[i] as f64;
                model.add_row(
                    format!("bump_{}_{}", i + 1, j + 1),
                    vec![(s[i], 1.0), (s[j], -1.0), (y, -delta), (z[i], big_m)],
                    Cmp::Le,
                    big_m - delta,
                )?;
                model.add_row(
                    format!("ylink_i_{}_{}", i + 1, j + 1),
                    vec![(y, 1.0), (z[i], -1.0)],
                    Cmp::Le,
                    0.0,
                )?;
                model.add_row(
                    format!("ylink_j_{}_{}", i + 1, j + 1),
                    vec![(y, 1.0), (z[j], -1.0)],
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
        // s_i + r_i >= (H + 1)(1 - z_i)
        model.add_row(
            format!("respond_lo_{}", i + 1),
            vec![(s[i], 1.0), (z[i], h + 1.0)],
            Cmp::Ge,
            h + 1.0 - r[i] as f64,
        )?;
        // s_i + r_i <= H + r_i (1 - z_i)
        model.add_row(
            format!("respond_hi_{}", i + 1),
            vec![(s[i], 1.0), (z[i], r[i] as f64)],
            Cmp::Le,
            h,
        )?;
        if i + w < m {
            // at most W concurrent notifications: s_i + 1 <= s_{i+W}
            model.add_row(
                format!("cap_{}", i + 1),
                vec![(s[i], 1.0), (s[i + w], -1.0)],
                Cmp::Le,
                -1.0,
            )?;
        }
    }
    // vacancy count: sum z_i + theta >= L
    let mut vac: Vec<_> = z.iter().map(|&zi| (zi, 1.0)).collect();
    vac.push((theta, 1.0));
    model.add_row("vacancy", vac, Cmp::Ge, instance.shifts as f64)?;
    Ok(model)
}
