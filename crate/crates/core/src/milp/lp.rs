//! CPLEX LP-format writer for [`MilpModel`], the exchange format consumed by
//! external MILP solvers and by the bundled backend script.

use crate::milp::model::{Cmp, MilpModel, VarType};
use std::fmt::Write as _;

fn coeff(c: f64) -> String {
    if c == c.trunc() && c.abs() < 1e15 {
        format!("{}", c as i64)
    } else {
        format!("{c}")
    }
}

fn write_terms(out: &mut String, model: &MilpModel, terms: &[(usize, f64)]) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (pos, &(id, c)) in terms.iter().enumerate() {
        let sign = if c < 0.0 {
            " - "
        } else if pos == 0 {
            " "
        } else {
            " + "
        };
        out.push_str(sign);
        let a = c.abs();
        if a != 1.0 {
            let _ = write!(out, "{} ", coeff(a));
        }
        out.push_str(model.var_name(id));
    }
}

/// Renders the model as LP-format text (minimization, named rows, explicit
/// bounds, `Generals`/`Binaries` integrality sections).
pub fn write_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", model.name);
    out.push_str("Minimize\n obj:");
    write_terms(&mut out, model, &model.objective);
    out.push('\n');

    out.push_str("Subject To\n");
    for row in model.rows() {
        let _ = write!(out, " {}:", row.name);
        write_terms(&mut out, model, &row.terms);
        let op = match row.cmp {
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Eq => "=",
        };
        let _ = writeln!(out, " {} {}", op, coeff(row.rhs));
    }

    // Every variable is nonnegative by LP-format default; only binaries and
    // explicit upper bounds need a Bounds entry.
    let bounded: Vec<_> = model
        .vars()
        .iter()
        .filter(|v| v.ty != VarType::Binary && (v.lb != 0.0 || v.ub.is_some()))
        .collect();
    if !bounded.is_empty() {
        out.push_str("Bounds\n");
        for v in bounded {
            match v.ub {
                Some(ub) => {
                    let _ = writeln!(out, " {} <= {} <= {}", coeff(v.lb), v.name, coeff(ub));
                }
                None => {
                    let _ = writeln!(out, " {} <= {}", coeff(v.lb), v.name);
                }
            }
        }
    }

    let generals: Vec<_> = model
        .vars()
        .iter()
        .filter(|v| v.ty == VarType::Integer)
        .map(|v| v.name.as_str())
        .collect();
    if !generals.is_empty() {
        out.push_str("Generals\n");
        for name in generals {
            let _ = writeln!(out, " {name}");
        }
    }
    let binaries: Vec<_> = model
        .vars()
        .iter()
        .filter(|v| v.ty == VarType::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for name in binaries {
            let _ = writeln!(out, " {name}");
        }
    }
    out.push_str("End\n");
    out
}
