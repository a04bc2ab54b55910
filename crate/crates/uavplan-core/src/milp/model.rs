use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableDef {
    pub id: usize,
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Minimization model with linear rows and bounded variables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IPModel {
    pub name: String,
    pub variables: Vec<VariableDef>,
    pub constraints: Vec<LinearConstraint>,
    /// Dense objective coefficients, one per variable.
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    pub index: BTreeMap<String, usize>,
}

impl IPModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), ..Default::default() }
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: f64) -> Result<usize> {
        let name = name.into();
        let (lower, upper) = if kind == VarKind::Binary { (lower.max(0.0), upper.min(1.0)) } else { (lower, upper) };
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(Error::MalformedModel(format!("variable {name}: bounds [{lower}, {upper}]")));
        }
        if kind.is_integral() && !(lower.is_finite() && upper.is_finite()) {
            return Err(Error::MalformedModel(format!("integer variable {name} needs finite bounds")));
        }
        if self.index.contains_key(&name) {
            return Err(Error::MalformedModel(format!("duplicate variable name {name}")));
        }
        let id = self.variables.len();
        self.index.insert(name.clone(), id);
        self.variables.push(VariableDef { id, name, kind, lower, upper });
        self.objective.push(0.0);
        Ok(id)
    }

    pub fn set_bounds(&mut self, id: usize, lower: f64, upper: f64) -> Result<()> {
        let v = self
            .variables
            .get_mut(id)
            .ok_or_else(|| Error::MalformedModel(format!("no variable {id}")))?;
        if lower > upper || lower.is_nan() || upper.is_nan() {
            return Err(Error::MalformedModel(format!("variable {}: bounds [{lower}, {upper}]", v.name)));
        }
        v.lower = lower;
        v.upper = upper;
        Ok(())
    }

    pub fn add_objective(&mut self, id: usize, coef: f64) {
        self.objective[id] += coef;
    }

    /// Adds a row after merging duplicate ids and dropping zero coefficients.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<usize> {
        let name = name.into();
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for (j, a) in terms {
            if j >= self.variables.len() {
                return Err(Error::MalformedModel(format!("constraint {name} references unknown variable {j}")));
            }
            if !a.is_finite() {
                return Err(Error::MalformedModel(format!("constraint {name}: non-finite coefficient")));
            }
            *merged.entry(j).or_insert(0.0) += a;
        }
        if !rhs.is_finite() {
            return Err(Error::MalformedModel(format!("constraint {name}: non-finite rhs")));
        }
        let terms = merged.into_iter().filter(|&(_, a)| a != 0.0).collect();
        self.constraints.push(LinearConstraint { name, terms, sense, rhs });
        Ok(self.constraints.len() - 1)
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_offset + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|c| c.violation(x));
        let bounds = self.variables.iter().map(|v| (v.lower - x[v.id]).max(x[v.id] - v.upper).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    pub fn max_integrality_gap(&self, x: &[f64]) -> f64 {
        self.variables
            .iter()
            .filter(|v| v.kind.is_integral())
            .map(|v| (x[v.id] - libm::round(x[v.id])).abs())
            .fold(0.0, f64::max)
    }

    /// `(variables, linear rows + one domain row per variable)`.
    pub fn size_with_domain_rows(&self) -> (u64, u64) {
        let n = self.variables.len() as u64;
        (n, self.constraints.len() as u64 + n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NodeLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: SolveStatus,
    pub assignment: Vec<f64>,
    pub objective: f64,
    pub nodes_explored: u64,
}

impl Solution {
    pub fn has_assignment(&self) -> bool {
        !self.assignment.is_empty()
    }
}
