//! CPLEX-LP text export, for inspecting a model in external tools.

use std::fmt::Write;

use super::model::LinearModel;

pub fn to_lp_string(model: &LinearModel, title: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {title}");
    out.push_str("Minimize\n obj:");
    let mut any = false;
    for (j, c) in model.columns.iter().enumerate() {
        if c.cost != 0.0 {
            write_term(&mut out, c.cost, &model.column_name(j));
            any = true;
        }
    }
    if !any {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");
    for (i, row) in model.rows.iter().enumerate() {
        let mut expr = String::new();
        for &(j, a) in &row.coeffs {
            write_term(&mut expr, a, &model.column_name(j));
        }
        if expr.is_empty() {
            continue;
        }
        let name = model.row_name(i);
        let (lo, hi) = (row.lower, row.upper);
        if lo == hi {
            let _ = writeln!(out, " {name}:{expr} = {}", num(lo));
        } else {
            if hi.is_finite() {
                let _ = writeln!(out, " {name}_ub:{expr} <= {}", num(hi));
            }
            if lo.is_finite() {
                let _ = writeln!(out, " {name}_lb:{expr} >= {}", num(lo));
            }
        }
    }
    out.push_str("Bounds\n");
    for (j, c) in model.columns.iter().enumerate() {
        let name = model.column_name(j);
        match (c.lower.is_finite(), c.upper.is_finite()) {
            (true, true) if c.lower == c.upper => {
                let _ = writeln!(out, " {name} = {}", num(c.lower));
            }
            (true, true) => {
                let _ = writeln!(out, " {} <= {name} <= {}", num(c.lower), num(c.upper));
            }
            (true, false) => {
                let _ = writeln!(out, " {name} >= {}", num(c.lower));
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {name} <= {}", num(c.upper));
            }
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
        }
    }
    let binaries: Vec<_> = model.integer_columns().map(|j| model.column_name(j)).collect();
    if !binaries.is_empty() {
        out.push_str("General\n");
        for chunk in binaries.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

fn write_term(out: &mut String, coeff: f64, name: &str) {
    if coeff < 0.0 {
        let _ = write!(out, " - {} {name}", num(-coeff));
    } else {
        let _ = write!(out, " + {} {name}", num(coeff));
    }
}

fn num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}
