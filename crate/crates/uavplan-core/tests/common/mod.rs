#![allow(dead_code)]

use uavplan_core::cdc::CodeSplit;
use uavplan_core::cost::CostCoefficients;
use uavplan_core::milp::{IPModel, Sense, VarKind};
use uavplan_core::physics::{Environment, Position3D, UavType};
use uavplan_core::planner::{BaseStation, FormulationOptions, NetworkInstance, Station};
use uavplan_core::scenario::{DemandScenario, ScenarioTree, ShortfallScenario, WeatherScenario};

pub fn env() -> Environment {
    Environment {
        air_density: 1.225,
        rotor_radius: 0.5,
        rotor_disc_area: 0.79,
        tip_speed: 200.0,
        induced_velocity: 7.2,
        fuselage_drag_ratio: 0.3,
        rotor_solidity: 0.05,
        profile_drag_coefficient: 0.012,
        induced_power_correction: 0.1,
        channel_gain_ref: 1e-6,
        noise_power: 1e-13,
        bits_per_symbol: 4,
    }
}

pub fn costs() -> CostCoefficients {
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

pub fn uav_types() -> Vec<UavType> {
    [(2375.0, 8.0, 380.0, 0.6e9), (3500.0, 10.0, 400.0, 0.8e9), (5200.0, 12.0, 420.0, 1.0e9)]
        .iter()
        .enumerate()
        .map(|(id, &(battery, mass, omega, cpu))| UavType {
            id,
            battery_capacity: battery,
            mass,
            blade_angular_velocity: omega,
            cpu_rate: cpu,
            cycles_per_bit: 20.0,
            bandwidth: 2e6,
            tx_power: 0.032,
            rx_power: 0.032,
            hover_height: 100.0,
        })
        .collect()
}

/// Small instance drawn from a seed-like list of small integers.
#[derive(Debug, Clone)]
pub struct Shape {
    pub stations: usize,
    pub base_stations: usize,
    pub demands: Vec<u32>,
    /// Per later stage: (flag per scenario, magnitude)
    pub shortfall: Vec<Vec<(bool, u32)>>,
    pub servers: u32,
    pub gate: bool,
}

pub fn instance(shape: &Shape) -> NetworkInstance {
    let y = shape.stations;
    let stations = (0..y).map(|i| Station { a: 100.0 + 250.0 * i as f64, b: 150.0 + 80.0 * i as f64 }).collect();
    let base_stations = (0..shape.base_stations)
        .map(|f| BaseStation {
            position: Position3D { a: 300.0 + 400.0 * f as f64, b: 500.0, h: 20.0 },
            servers: shape.servers,
            server_cpu_rate: 3e9,
        })
        .collect();
    let pd = 1.0 / shape.demands.len() as f64;
    let demand = shape.demands.iter().map(|&d| DemandScenario { d: vec![d; y], probability: pd }).collect();
    let shortfall = shape
        .shortfall
        .iter()
        .map(|set| {
            let p = 1.0 / set.len() as f64;
            set.iter()
                .map(|&(hit, a)| ShortfallScenario {
                    f: vec![hit as u8; y],
                    magnitude: vec![if hit { a } else { 0 }; y],
                    probability: p,
                })
                .collect()
        })
        .collect();
    NetworkInstance {
        time_slots: 1,
        stations,
        uav_types: uav_types(),
        base_stations,
        environment: env(),
        costs: costs(),
        split: CodeSplit::new(1, 2).unwrap(),
        tree: ScenarioTree {
            weather: vec![WeatherScenario { g: vec![0; y], probability: 1.0 }],
            demand,
            shortfall,
        },
        options: FormulationOptions { gate_stage2_threshold: shape.gate, ..FormulationOptions::default() },
    }
}

/// Random pure-integer model with at most `cap` assignments.
///
/// `raw` supplies the numbers; rows mix covering, packing and indicator links.
pub fn random_model(raw: &[u32], cap: u128) -> IPModel {
    let mut it = raw.iter().copied().cycle();
    let mut next = move |m: u32| it.next().unwrap() % m;
    let n = 5 + next(21) as usize;
    let mut uppers: Vec<u32> = (0..n).map(|_| [0, 1, 1, 1, 2, 3][next(6) as usize]).collect();
    while uppers.iter().map(|&u| u as u128 + 1).product::<u128>() > cap {
        let j = (0..n).max_by_key(|&j| (uppers[j], j)).unwrap();
        uppers[j] -= 1;
    }
    let mut m = IPModel::new("random");
    for (j, &u) in uppers.iter().enumerate() {
        let kind = if u == 1 && next(3) > 0 { VarKind::Binary } else { VarKind::Integer };
        let id = m.add_var(format!("x{j}"), kind, 0.0, u as f64).unwrap();
        m.add_objective(id, next(21) as f64 - 5.0);
    }
    let rows = 1 + next(6) as usize;
    for r in 0..rows {
        let width = 2 + next(5) as usize;
        let terms: Vec<(usize, f64)> =
            (0..width).map(|_| (next(n as u32) as usize, 1.0 + next(5) as f64)).collect();
        let total: f64 = terms.iter().map(|&(j, a)| a * uppers[j] as f64).sum();
        let rhs = (next(1 + total as u32 / 2 + 1)) as f64;
        let sense = if next(2) == 0 { Sense::Ge } else { Sense::Le };
        let rhs = if sense == Sense::Le { rhs + 1.0 } else { rhs };
        m.add_constraint(format!("row{r}"), terms, sense, rhs).unwrap();
    }
    let binaries: Vec<usize> = m.variables.iter().filter(|v| v.kind == VarKind::Binary).map(|v| v.id).collect();
    if !binaries.is_empty() {
        for j in 0..n {
            if m.variables[j].kind == VarKind::Integer && uppers[j] > 0 && next(2) == 0 {
                let b = binaries[next(binaries.len() as u32) as usize];
                if b != j {
                    m.add_constraint(format!("link{j}"), [(j, 1.0), (b, -(uppers[j] as f64))], Sense::Le, 0.0)
                        .unwrap();
                }
            }
        }
    }
    m
}
