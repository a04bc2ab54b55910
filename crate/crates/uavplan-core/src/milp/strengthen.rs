//! Derived covering rows that tighten the LP relaxation without cutting off
//! any integer point.
//!
//! A row `x - c b <= 0` with binary `b` and `a x` appearing in a covering row
//! `sum a_i x_i >= D` (all `a_i >= 0`, all lower bounds `l_i >= 0`) implies
//! `a x <= min(a U, R) b` on every integer point that matters for that row,
//! where `U = min(c, upper(x))` and `R = D - sum a_i l_i` is what the row still
//! asks for above its lower bounds. Substituting `R b` for every such term
//! with `a U > R` (and `l = 0`) gives a valid row the LP cannot satisfy with a
//! small fractional `b`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::model::{IPModel, Sense, VarKind};

/// Tightest `(binary, U)` implied upper bound per variable.
fn variable_upper_bounds(model: &IPModel) -> BTreeMap<usize, (usize, f64)> {
    let mut out: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for c in &model.constraints {
        if c.sense != Sense::Le || c.rhs != 0.0 || c.terms.len() != 2 {
            continue;
        }
        let (p, q) = (c.terms[0], c.terms[1]);
        let ((x, a), (b, nb)) = if p.1 > 0.0 && q.1 < 0.0 { (p, q) } else if q.1 > 0.0 && p.1 < 0.0 { (q, p) } else { continue };
        let vb = &model.variables[b];
        let vx = &model.variables[x];
        if vb.kind != VarKind::Binary || vb.lower != 0.0 || vx.lower < 0.0 {
            continue;
        }
        let u = (-nb / a).min(vx.upper);
        if out.get(&x).map_or(true, |&(_, old)| u < old) {
            out.insert(x, (b, u));
        }
    }
    out
}

/// Copy of `model` with derived covering rows appended.
pub fn strengthened(model: &IPModel) -> IPModel {
    let vub = variable_upper_bounds(model);
    if vub.is_empty() {
        return model.clone();
    }
    let mut out = model.clone();
    let mut added = 0usize;
    for c in &model.constraints {
        if c.sense != Sense::Ge || !(c.rhs > 0.0) {
            continue;
        }
        if c.terms.iter().any(|&(j, a)| a < 0.0 || model.variables[j].lower < 0.0) {
            continue;
        }
        let d = c.rhs;
        let residual = d - c.terms.iter().map(|&(j, a)| a * model.variables[j].lower).sum::<f64>();
        if !(residual > 1e-9) {
            continue;
        }
        let mut terms: Vec<(usize, f64)> = Vec::with_capacity(c.terms.len());
        let mut changed = false;
        for &(j, a) in &c.terms {
            match vub.get(&j) {
                Some(&(b, u)) if a * u > residual + 1e-9 && model.variables[j].lower == 0.0 => {
                    terms.push((b, residual));
                    changed = true;
                }
                _ => terms.push((j, a)),
            }
        }
        if changed {
            out.add_constraint(format!("derived_cover[{added}]"), terms, Sense::Ge, d)
                .expect("terms come from a well-formed row");
            added += 1;
        }
    }
    out
}
