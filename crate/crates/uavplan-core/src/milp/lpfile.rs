//! Plain-text dump in an LP-file style; see `docs/lp_format.md`.

use alloc::string::String;
use core::fmt::Write;

use super::model::{IPModel, Sense, VarKind};

fn term(out: &mut String, coef: f64, name: &str) {
    let sign = if coef < 0.0 { '-' } else { '+' };
    let _ = write!(out, " {sign} {} {name}", coef.abs());
}

pub fn to_lp_string(model: &IPModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ model: {}", model.name);
    let _ = writeln!(out, "minimize");
    out.push_str(" obj:");
    for (j, &c) in model.objective.iter().enumerate() {
        if c != 0.0 {
            term(&mut out, c, &model.variables[j].name);
        }
    }
    if model.objective_offset != 0.0 {
        let sign = if model.objective_offset < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {}", model.objective_offset.abs());
    }
    out.push('\n');
    let _ = writeln!(out, "subject to");
    for c in &model.constraints {
        let _ = write!(out, " {}:", c.name);
        for &(j, a) in &c.terms {
            term(&mut out, a, &model.variables[j].name);
        }
        if c.terms.is_empty() {
            out.push_str(" 0");
        }
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", c.rhs);
    }
    let _ = writeln!(out, "bounds");
    for v in &model.variables {
        let lo = if v.lower.is_finite() { alloc::format!("{}", v.lower) } else { "-inf".into() };
        let hi = if v.upper.is_finite() { alloc::format!("{}", v.upper) } else { "+inf".into() };
        let _ = writeln!(out, " {lo} <= {} <= {hi}", v.name);
    }
    for (kind, header) in [(VarKind::Integer, "general"), (VarKind::Binary, "binary")] {
        let names: alloc::vec::Vec<&str> =
            model.variables.iter().filter(|v| v.kind == kind).map(|v| v.name.as_str()).collect();
        if !names.is_empty() {
            let _ = writeln!(out, "{header}");
            for n in names {
                let _ = writeln!(out, " {n}");
            }
        }
    }
    out.push_str("end\n");
    out
}
