//! Mixed-integer linear programs: representation, exact solver, enumeration oracle.

mod bnb;
mod enumerate;
mod lpfile;
mod model;
mod simplex;
mod strengthen;

pub use enumerate::solve_enumerate;
pub use lpfile::to_lp_string;
pub use model::{IPModel, LinearConstraint, Sense, Solution, SolveStatus, VarKind, VariableDef};
pub use simplex::LpStatus;
pub use strengthen::strengthened;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub node_limit: u64,
    pub abs_gap: f64,
    pub integrality_tol: f64,
    pub feasibility_tol: f64,
    pub max_pivots_per_lp: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            node_limit: 1_000_000,
            abs_gap: 1e-9,
            integrality_tol: 1e-6,
            feasibility_tol: 1e-6,
            max_pivots_per_lp: 1_000_000,
        }
    }
}

/// Optimal continuous solution with integrality dropped.
pub fn solve_lp_relaxation(model: &IPModel) -> Solution {
    let cols = simplex::columns(model);
    let lower: alloc::vec::Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
    let upper: alloc::vec::Vec<f64> = model.variables.iter().map(|v| v.upper).collect();
    let lp = simplex::solve_lp_with_bounds(model, &cols, &lower, &upper, SolveOptions::default().max_pivots_per_lp);
    let status = match lp.status {
        LpStatus::Optimal => SolveStatus::Optimal,
        LpStatus::Infeasible => SolveStatus::Infeasible,
        LpStatus::Unbounded => SolveStatus::Unbounded,
        LpStatus::PivotLimit => SolveStatus::NodeLimit,
    };
    Solution { status, assignment: lp.x, objective: lp.objective, nodes_explored: 1 }
}

/// Globally optimal integer solution by branch-and-bound.
pub fn solve_exact(model: &IPModel, opts: &SolveOptions) -> Solution {
    let work = strengthened(model);
    let mut sol = bnb::branch_and_bound(&work, opts);
    if sol.has_assignment() {
        sol.objective = model.objective_value(&sol.assignment);
    }
    sol
}
