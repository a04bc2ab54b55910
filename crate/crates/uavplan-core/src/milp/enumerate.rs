//! Exhaustive search over all integer assignments; the reference for small models.

use alloc::vec;
use alloc::vec::Vec;

use super::model::{IPModel, Sense, Solution, SolveStatus};
use crate::error::{Error, Result};

const FEAS_TOL: f64 = 1e-6;

pub fn solve_enumerate(model: &IPModel, cap: u128) -> Result<Solution> {
    let n = model.variables.len();
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    let mut needed: u128 = 1;
    for v in &model.variables {
        if !v.kind.is_integral() {
            return Err(Error::InvalidArgument(alloc::format!("variable {} is continuous", v.name)));
        }
        let l = libm::ceil(v.lower - 1e-9);
        let h = libm::floor(v.upper + 1e-9);
        if !(l.is_finite() && h.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!("variable {} unbounded", v.name)));
        }
        let width = if h >= l { (h - l) as u128 + 1 } else { 0 };
        needed = needed.saturating_mul(width);
        lo.push(l as i64);
        hi.push(h as i64);
    }
    if needed > cap {
        return Err(Error::EnumerationCap { needed, cap });
    }
    let infeasible = Solution {
        status: SolveStatus::Infeasible,
        assignment: Vec::new(),
        objective: f64::INFINITY,
        nodes_explored: 0,
    };
    if needed == 0 {
        return Ok(infeasible);
    }
    let m = model.constraints.len();
    let mut col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, c) in model.constraints.iter().enumerate() {
        for &(j, a) in &c.terms {
            col[j].push((i, a));
        }
    }
    let mut x: Vec<i64> = lo.clone();
    let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
    let mut act: Vec<f64> = model.constraints.iter().map(|c| c.activity(&xf)).collect();
    let mut obj: f64 = model.objective_value(&xf);
    let mut best: Option<(f64, Vec<i64>)> = None;
    let mut visited: u64 = 0;
    let feasible = |act: &[f64]| {
        (0..m).all(|i| {
            let c = &model.constraints[i];
            match c.sense {
                Sense::Le => act[i] <= c.rhs + FEAS_TOL,
                Sense::Ge => act[i] >= c.rhs - FEAS_TOL,
                Sense::Eq => (act[i] - c.rhs).abs() <= FEAS_TOL,
            }
        })
    };
    loop {
        visited += 1;
        if feasible(&act) && best.as_ref().map_or(true, |(b, _)| obj < *b - 1e-12 * (1.0 + b.abs())) {
            best = Some((obj, x.clone()));
        }
        // odometer: last variable varies fastest, giving lexicographic order
        let mut j = n;
        loop {
            if j == 0 {
                let sol = match best {
                    None => Solution { nodes_explored: visited, ..infeasible },
                    Some((_, xb)) => {
                        let assignment: Vec<f64> = xb.iter().map(|&v| v as f64).collect();
                        Solution {
                            status: SolveStatus::Optimal,
                            objective: model.objective_value(&assignment),
                            assignment,
                            nodes_explored: visited,
                        }
                    }
                };
                return Ok(sol);
            }
            j -= 1;
            let step: i64 = if x[j] < hi[j] { 1 } else { lo[j] - hi[j] };
            x[j] += step;
            let d = step as f64;
            obj += model.objective[j] * d;
            for &(i, a) in &col[j] {
                act[i] += a * d;
            }
            if step == 1 {
                break;
            }
        }
    }
}
