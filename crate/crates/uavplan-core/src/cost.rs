//! Monetary cost terms for reservations, copies, hovering and decoding.

use serde::{Deserialize, Serialize};

use crate::cdc::CodeSplit;
use crate::error::{Error, Result};
use crate::physics::{compute_timings, hover_power, task_timings, Environment, UavType};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostCoefficients {
    /// $/mAh for advance reservation.
    pub reservation: f64,
    /// $/mAh for on-demand hire of the largest type.
    pub on_demand: f64,
    /// $/s
    pub time: f64,
    /// $/J
    pub energy: f64,
    /// $/(W s) while hovering.
    pub hover: f64,
    /// Per offloaded copy fee.
    pub service_fee: f64,
    /// Per base station subscription.
    pub subscription: f64,
    /// Crash repair penalty.
    pub crash_penalty: f64,
    /// Charged when a shortfall is still open at the last stage.
    pub terminal_penalty: f64,
}

impl CostCoefficients {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("reservation", self.reservation),
            ("on_demand", self.on_demand),
            ("time", self.time),
            ("energy", self.energy),
            ("hover", self.hover),
            ("service_fee", self.service_fee),
            ("subscription", self.subscription),
            ("crash_penalty", self.crash_penalty),
            ("terminal_penalty", self.terminal_penalty),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidInstance(alloc::format!(
                    "cost coefficient {name} must be finite and >= 0 (got {v})"
                )));
            }
        }
        if !(self.on_demand > self.reservation) {
            return Err(Error::InvalidInstance(alloc::format!(
                "on-demand coefficient ({}) must exceed reservation coefficient ({})",
                self.on_demand,
                self.reservation
            )));
        }
        Ok(())
    }
}

pub fn reservation_cost(uav: &UavType, coeff: &CostCoefficients) -> f64 {
    coeff.reservation * uav.battery_capacity
}

/// On-demand cost; `fleet` is used to check that `largest` really has the maximal battery.
pub fn on_demand_cost(largest: &UavType, fleet: &[UavType], coeff: &CostCoefficients) -> Result<f64> {
    if let Some(bigger) = fleet.iter().find(|u| u.battery_capacity > largest.battery_capacity) {
        return Err(Error::InvalidArgument(alloc::format!(
            "type {} ({} mAh) is not the largest; type {} has {} mAh",
            largest.id,
            largest.battery_capacity,
            bigger.id,
            bigger.battery_capacity
        )));
    }
    Ok(coeff.on_demand * largest.battery_capacity)
}

pub fn local_copy_cost(uav: &UavType, env: &Environment, n: u32, split: &CodeSplit, coeff: &CostCoefficients) -> f64 {
    let (t_local, t_enc, _) = compute_timings(uav, env, n, split);
    coeff.time * (t_local + t_enc)
}

/// Cost of one copy sent over a link of `rate` bits/s (both directions).
pub fn offload_copy_cost(
    uav: &UavType,
    env: &Environment,
    n: u32,
    split: &CodeSplit,
    rate: f64,
    coeff: &CostCoefficients,
) -> Result<f64> {
    let t = task_timings(uav, env, n, split, rate, rate)?;
    Ok(coeff.time * (t.t_to + t.t_enc) + coeff.energy * t.e_receive + coeff.service_fee)
}

/// Worst-case wait: all `k` copies computed locally one after another.
pub fn threshold_time(uav: &UavType, env: &Environment, n: u32, split: &CodeSplit) -> f64 {
    let (t_local, t_enc, _) = compute_timings(uav, env, n, split);
    split.k as f64 * (t_local + t_enc)
}

pub fn hover_threshold_cost(
    uav: &UavType,
    env: &Environment,
    n: u32,
    split: &CodeSplit,
    coeff: &CostCoefficients,
) -> f64 {
    threshold_time(uav, env, n, split) * split.k as f64 * coeff.hover * hover_power(uav, env)
}

pub fn decode_cost(uav: &UavType, env: &Environment, n: u32, split: &CodeSplit, coeff: &CostCoefficients) -> f64 {
    let (_, _, t_dec) = compute_timings(uav, env, n, split);
    coeff.time * t_dec
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn table_costs() -> CostCoefficients {
        CostCoefficients {
            reservation: 0.001,
            on_demand: 0.0015,
            time: 0.5,
            energy: 0.5,
            hover: 1e-4,
            service_fee: 0.05,
            subscription: 1.0,
            crash_penalty: 2.0,
            terminal_penalty: 100.0,
        }
    }
}
