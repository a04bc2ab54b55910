//! Rotary-wing power, air-to-ground link rate, and per-copy time/energy.

use serde::{Deserialize, Serialize};

use crate::cdc::{decode_symbols, CodeSplit};
use crate::error::{Error, Result};

pub const GRAVITY: f64 = 9.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavType {
    pub id: usize,
    /// mAh
    pub battery_capacity: f64,
    /// kg
    pub mass: f64,
    /// rad/s
    pub blade_angular_velocity: f64,
    /// cycles/s
    pub cpu_rate: f64,
    pub cycles_per_bit: f64,
    /// Hz
    pub bandwidth: f64,
    /// W
    pub tx_power: f64,
    /// W
    pub rx_power: f64,
    /// m
    pub hover_height: f64,
}

impl UavType {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("battery_capacity", self.battery_capacity),
            ("mass", self.mass),
            ("blade_angular_velocity", self.blade_angular_velocity),
            ("cpu_rate", self.cpu_rate),
            ("cycles_per_bit", self.cycles_per_bit),
            ("bandwidth", self.bandwidth),
            ("tx_power", self.tx_power),
            ("rx_power", self.rx_power),
            ("hover_height", self.hover_height),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInstance(alloc::format!(
                    "uav type {}: {name} must be finite and > 0 (got {v})",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// Physical constants, all in linear SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub air_density: f64,
    pub rotor_radius: f64,
    pub rotor_disc_area: f64,
    pub tip_speed: f64,
    pub induced_velocity: f64,
    pub fuselage_drag_ratio: f64,
    pub rotor_solidity: f64,
    pub profile_drag_coefficient: f64,
    pub induced_power_correction: f64,
    /// Linear power gain at 1 m.
    pub channel_gain_ref: f64,
    /// W
    pub noise_power: f64,
    pub bits_per_symbol: u32,
}

impl Environment {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("air_density", self.air_density),
            ("rotor_radius", self.rotor_radius),
            ("rotor_disc_area", self.rotor_disc_area),
            ("tip_speed", self.tip_speed),
            ("induced_velocity", self.induced_velocity),
            ("fuselage_drag_ratio", self.fuselage_drag_ratio),
            ("rotor_solidity", self.rotor_solidity),
            ("profile_drag_coefficient", self.profile_drag_coefficient),
            ("induced_power_correction", self.induced_power_correction),
            ("channel_gain_ref", self.channel_gain_ref),
            ("noise_power", self.noise_power),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInstance(alloc::format!(
                    "environment: {name} must be finite and > 0 (got {v})"
                )));
            }
        }
        if ![1, 2, 4, 6, 8].contains(&self.bits_per_symbol) {
            return Err(Error::InvalidInstance(alloc::format!(
                "bits_per_symbol must be one of 1,2,4,6,8 (got {})",
                self.bits_per_symbol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position3D {
    pub a: f64,
    pub b: f64,
    pub h: f64,
}

/// Blade profile power term (hover component independent of weight).
pub fn blade_profile_power(uav: &UavType, env: &Environment) -> f64 {
    let om = uav.blade_angular_velocity;
    let r = env.rotor_radius;
    env.profile_drag_coefficient / 8.0
        * env.air_density
        * env.rotor_solidity
        * env.rotor_disc_area
        * om * om * om
        * r * r * r
}

/// Induced power term at hover.
pub fn induced_power(uav: &UavType, env: &Environment) -> f64 {
    let w = uav.mass * GRAVITY;
    (1.0 + env.induced_power_correction) * libm::pow(w, 1.5)
        / libm::sqrt(2.0 * env.rotor_disc_area * env.air_density)
}

pub fn propulsion_power(uav: &UavType, env: &Environment, speed: f64) -> Result<f64> {
    if !(speed >= 0.0) || !speed.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!("speed must be >= 0 (got {speed})")));
    }
    let p0 = blade_profile_power(uav, env);
    let p1 = induced_power(uav, env);
    let v2 = speed * speed;
    let u = env.tip_speed;
    let v0 = env.induced_velocity;
    let v0sq = v0 * v0;
    let blade = p0 * (1.0 + 3.0 * v2 / (u * u));
    let inner = libm::sqrt(1.0 + v2 * v2 / (4.0 * v0sq * v0sq)) - v2 / (2.0 * v0sq);
    let induced = p1 * libm::sqrt(inner);
    let parasite = 0.5 * env.fuselage_drag_ratio * env.air_density * env.rotor_disc_area * v2 * speed;
    Ok(blade + induced + parasite)
}

pub fn hover_power(uav: &UavType, env: &Environment) -> f64 {
    blade_profile_power(uav, env) + induced_power(uav, env)
}

pub fn distance_sq(p: &Position3D, q: &Position3D) -> f64 {
    let (da, db, dh) = (p.a - q.a, p.b - q.b, p.h - q.h);
    da * da + db * db + dh * dh
}

/// Line-of-sight rate in bits/s.
pub fn link_rate(uav: &UavType, env: &Environment, uav_pos: &Position3D, bs_pos: &Position3D) -> Result<f64> {
    let d2 = distance_sq(uav_pos, bs_pos);
    if !(d2 > 0.0) {
        return Err(Error::InvalidArgument("coincident UAV and BS positions".into()));
    }
    if !(uav_pos.h > bs_pos.h) {
        return Err(Error::InvalidArgument(alloc::format!(
            "UAV height {} must exceed BS height {}",
            uav_pos.h,
            bs_pos.h
        )));
    }
    let gain = env.channel_gain_ref / d2;
    Ok(uav.bandwidth * libm::log2(1.0 + uav.tx_power * gain / env.noise_power))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskTimings {
    pub t_local: f64,
    pub t_enc: f64,
    pub t_dec: f64,
    pub t_to: f64,
    pub e_receive: f64,
}

/// Per-copy compute-side times; independent of the link.
pub fn compute_timings(uav: &UavType, env: &Environment, n: u32, split: &CodeSplit) -> (f64, f64, f64) {
    let bits = env.bits_per_symbol as f64;
    let nf = n as f64;
    let n2 = nf * nf;
    let cyc = uav.cycles_per_bit / uav.cpu_rate;
    let t_local = cyc * bits * n2 * nf / (split.m as f64 * split.t as f64);
    let t_enc = cyc * bits * n2;
    let t_dec = cyc * bits * decode_symbols(n, split);
    (t_local, t_enc, t_dec)
}

pub fn task_timings(
    uav: &UavType,
    env: &Environment,
    n: u32,
    split: &CodeSplit,
    rate_to: f64,
    rate_from: f64,
) -> Result<TaskTimings> {
    if n == 0 {
        return Err(Error::InvalidArgument("matrix dimension must be >= 1".into()));
    }
    if !(rate_to > 0.0) || !(rate_from > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "link rates must be > 0 (got {rate_to}, {rate_from})"
        )));
    }
    let (t_local, t_enc, t_dec) = compute_timings(uav, env, n, split);
    let bits = env.bits_per_symbol as f64;
    let n2 = (n as f64) * (n as f64);
    let t = split.t as f64;
    Ok(TaskTimings {
        t_local,
        t_enc,
        t_dec,
        t_to: bits * n2 / split.m as f64 / rate_to,
        e_receive: uav.rx_power * bits * n2 / (t * t) / rate_from,
    })
}
