use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::cdc::CodeSplit;
use crate::cost::{
    decode_cost, hover_threshold_cost, local_copy_cost, offload_copy_cost, CostCoefficients,
};
use crate::error::{Error, Result};
use crate::physics::{link_rate, Environment, Position3D, UavType};
use crate::scenario::{validate_tree, ScenarioTree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    pub position: Position3D,
    pub servers: u32,
    /// cycles/s per edge server
    pub server_cpu_rate: f64,
}

/// Switches between literal and alternative readings of the task-allocation model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FormulationOptions {
    /// Charge the stage-2 hover threshold cost only for BSs actually used.
    pub gate_stage2_threshold: bool,
    /// Require the recovery threshold separately for every BS instead of pooled.
    pub threshold_per_bs: bool,
    /// Forbid local computation in every stage.
    pub force_no_local: bool,
    /// Hover cost multiplier per stage, starting at stage 2; missing entries are 1.
    pub hover_multipliers: Vec<f64>,
}

impl FormulationOptions {
    pub fn hover_multiplier(&self, stage: usize) -> f64 {
        self.hover_multipliers.get(stage - 2).copied().unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkInstance {
    pub time_slots: usize,
    pub stations: Vec<Station>,
    /// Ascending battery capacity; the last entry is the largest type.
    pub uav_types: Vec<UavType>,
    pub base_stations: Vec<BaseStation>,
    pub environment: Environment,
    pub costs: CostCoefficients,
    pub split: CodeSplit,
    pub tree: ScenarioTree,
    #[serde(default)]
    pub options: FormulationOptions,
}

impl NetworkInstance {
    pub fn largest_type(&self) -> usize {
        self.uav_types.len() - 1
    }

    pub fn stages(&self) -> usize {
        self.tree.stages()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: alloc::string::String| Err(Error::InvalidInstance(m));
        if self.time_slots == 0 {
            return bad("at least one time slot is required".into());
        }
        if self.stations.is_empty() {
            return bad("at least one station is required".into());
        }
        if self.uav_types.is_empty() {
            return bad("at least one UAV type is required".into());
        }
        for (i, u) in self.uav_types.iter().enumerate() {
            u.validate()?;
            if u.id != i {
                return bad(format!("uav type at position {i} has id {}", u.id));
            }
            if i > 0 && !(u.battery_capacity > self.uav_types[i - 1].battery_capacity) {
                return bad(format!("uav type batteries must be strictly ascending (type {i})"));
            }
        }
        self.environment.validate()?;
        self.costs.validate()?;
        self.split.validate()?;
        for (f, bs) in self.base_stations.iter().enumerate() {
            if bs.servers == 0 {
                return bad(format!("base station {f} has no servers"));
            }
            if !(bs.position.h >= 0.0) {
                return bad(format!("base station {f} height must be >= 0"));
            }
            for u in &self.uav_types {
                if !(u.hover_height > bs.position.h) {
                    return bad(format!(
                        "uav type {} hover height {} does not exceed base station {f} height {}",
                        u.id, u.hover_height, bs.position.h
                    ));
                }
            }
        }
        for (i, m) in self.options.hover_multipliers.iter().enumerate() {
            if !(m.is_finite() && *m >= 0.0) {
                return bad(format!("hover multiplier for stage {} must be >= 0", i + 2));
            }
        }
        let v = validate_tree(&self.tree, self.stations.len());
        if let Some(first) = v.first() {
            return Err(Error::InvalidTree(format!(
                "{} violation(s); first at {}: {}",
                v.len(),
                first.path,
                first.message
            )));
        }
        Ok(())
    }

    pub fn uav_position(&self, station: usize, uav: usize) -> Position3D {
        let s = &self.stations[station];
        Position3D { a: s.a, b: s.b, h: self.uav_types[uav].hover_height }
    }

    /// Big-M linking copy counts to indicator variables.
    pub fn big_m(&self) -> f64 {
        let q: u64 = self.base_stations.iter().map(|b| b.servers as u64).sum();
        (q + self.split.k as u64 + self.tree.max_magnitude() as u64) as f64
    }
}

/// Per-copy and per-task costs for one (station, UAV type, demand).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopyCosts {
    pub local: f64,
    /// One entry per base station.
    pub offload: Vec<f64>,
    pub threshold: f64,
    pub decode: f64,
}

pub fn copy_costs(inst: &NetworkInstance, station: usize, uav: usize, n: u32) -> Result<CopyCosts> {
    let u = &inst.uav_types[uav];
    let env = &inst.environment;
    let c = &inst.costs;
    let split = &inst.split;
    let pos = inst.uav_position(station, uav);
    let mut offload = Vec::with_capacity(inst.base_stations.len());
    for bs in &inst.base_stations {
        let rate = link_rate(u, env, &pos, &bs.position)?;
        offload.push(offload_copy_cost(u, env, n, split, rate, c)?);
    }
    Ok(CopyCosts {
        local: local_copy_cost(u, env, n, split, c),
        offload,
        threshold: hover_threshold_cost(u, env, n, split, c),
        decode: decode_cost(u, env, n, split, c),
    })
}
