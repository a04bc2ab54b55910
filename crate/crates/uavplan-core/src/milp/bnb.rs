//! Branch-and-bound over LP relaxations.
//!
//! Node selection is best-bound, except that after branching the search keeps
//! diving into the child on the rounding side until that line is pruned.
//! Every fractional node also tries rounding all integers up as an incumbent.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::model::{IPModel, Solution, SolveStatus};
use super::simplex::{columns, solve_lp_with_bounds, LpStatus};
use super::SolveOptions;

struct Node {
    bound: f64,
    seq: u64,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // max-heap: smallest bound first, then oldest node
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then_with(|| other.seq.cmp(&self.seq))
    }
}

fn most_fractional(model: &IPModel, x: &[f64], tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for v in model.variables.iter().filter(|v| v.kind.is_integral()) {
        let f = x[v.id] - libm::floor(x[v.id]);
        let dist = f.min(1.0 - f);
        if dist > tol && best.map_or(true, |(_, d)| dist > d + 1e-12) {
            best = Some((v.id, dist));
        }
    }
    best.map(|(j, _)| j)
}

/// Rounds every integer variable up within the node bounds; `Some` when that point is feasible.
fn round_up(model: &IPModel, x: &[f64], upper: &[f64], opts: &SolveOptions) -> Option<(f64, Vec<f64>)> {
    let mut y = x.to_vec();
    for v in model.variables.iter().filter(|v| v.kind.is_integral()) {
        y[v.id] = libm::ceil(x[v.id] - opts.integrality_tol).min(upper[v.id]);
    }
    if model.max_violation(&y) > opts.feasibility_tol {
        return None;
    }
    Some((model.objective_value(&y), y))
}

pub fn branch_and_bound(model: &IPModel, opts: &SolveOptions) -> Solution {
    let cols = columns(model);
    let lower: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = model.variables.iter().map(|v| v.upper).collect();
    let max_pivots = opts.max_pivots_per_lp;

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut nodes = 0u64;
    let mut seq = 0u64;
    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut dive: Option<Node> = Some(Node { bound: f64::NEG_INFINITY, seq, lower, upper });
    let mut limited = false;

    loop {
        let node = match dive.take() {
            Some(n) => n,
            None => match heap.pop() {
                Some(n) => n,
                None => break,
            },
        };
        if let Some((best, _)) = &incumbent {
            if node.bound >= best - opts.abs_gap {
                continue;
            }
        }
        if nodes >= opts.node_limit {
            limited = true;
            break;
        }
        nodes += 1;
        let lp = solve_lp_with_bounds(model, &cols, &node.lower, &node.upper, max_pivots);
        match lp.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                if incumbent.is_none() && nodes == 1 {
                    return Solution {
                        status: SolveStatus::Unbounded,
                        assignment: Vec::new(),
                        objective: f64::NEG_INFINITY,
                        nodes_explored: nodes,
                    };
                }
                continue;
            }
            LpStatus::PivotLimit => {
                limited = true;
                continue;
            }
        }
        if let Some((best, _)) = &incumbent {
            if lp.objective >= best - opts.abs_gap {
                continue;
            }
        }
        match most_fractional(model, &lp.x, opts.integrality_tol) {
            None => {
                let mut x = lp.x;
                for v in model.variables.iter().filter(|v| v.kind.is_integral()) {
                    x[v.id] = libm::round(x[v.id]);
                }
                if model.max_violation(&x) > opts.feasibility_tol {
                    continue;
                }
                let obj = model.objective_value(&x);
                if incumbent.as_ref().map_or(true, |(b, _)| obj < *b) {
                    incumbent = Some((obj, x));
                }
            }
            Some(j) => {
                if let Some((obj, y)) = round_up(model, &lp.x, &node.upper, opts) {
                    if incumbent.as_ref().map_or(true, |(b, _)| obj < *b) {
                        incumbent = Some((obj, y));
                    }
                }
                let v = lp.x[j];
                let fl = libm::floor(v);
                let mut down_upper = node.upper.clone();
                down_upper[j] = fl;
                let mut up_lower = node.lower.clone();
                up_lower[j] = fl + 1.0;
                seq += 1;
                let down = Node { bound: lp.objective, seq, lower: node.lower.clone(), upper: down_upper };
                seq += 1;
                let up = Node { bound: lp.objective, seq, lower: up_lower, upper: node.upper };
                let (first, second) = if v - fl >= 0.5 { (up, down) } else { (down, up) };
                heap.push(second);
                dive = Some(first);
            }
        }
    }
    match incumbent {
        Some((objective, assignment)) => Solution {
            status: if limited { SolveStatus::NodeLimit } else { SolveStatus::Optimal },
            assignment,
            objective,
            nodes_explored: nodes,
        },
        None => Solution {
            status: if limited { SolveStatus::NodeLimit } else { SolveStatus::Infeasible },
            assignment: Vec::new(),
            objective: f64::INFINITY,
            nodes_explored: nodes,
        },
    }
}
