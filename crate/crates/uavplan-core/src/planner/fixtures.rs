use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::cdc::CodeSplit;
use crate::cost::fixtures::table_costs;
use crate::physics::fixtures::table_env;
use crate::physics::{Position3D, UavType};
use crate::scenario::{DemandScenario, ScenarioTree, ShortfallScenario, WeatherScenario};

pub fn table_types() -> Vec<UavType> {
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

pub fn six_stations() -> Vec<Station> {
    [(100.0, 100.0), (100.0, 900.0), (450.0, 950.0), (900.0, 900.0), (900.0, 100.0), (550.0, 50.0)]
        .iter()
        .map(|&(a, b)| Station { a, b })
        .collect()
}

pub fn bs(a: f64, b: f64, servers: u32) -> BaseStation {
    BaseStation { position: Position3D { a, b, h: 20.0 }, servers, server_cpu_rate: 3e9 }
}

pub fn guaranteed_shortfall(stations: usize, z: usize, magnitude: u32) -> Vec<Vec<ShortfallScenario>> {
    (3..=z)
        .map(|_| vec![ShortfallScenario { f: vec![1; stations], magnitude: vec![magnitude; stations], probability: 1.0 }])
        .collect()
}

/// Six stations, two BSs with 30 servers, four demand levels, a 4-copy shortfall every stage.
pub fn staged_instance(z: usize) -> NetworkInstance {
    let demand = [480, 240, 1080, 360]
        .iter()
        .map(|&d| DemandScenario { d: vec![d; 6], probability: 0.25 })
        .collect();
    NetworkInstance {
        time_slots: 1,
        stations: six_stations(),
        uav_types: table_types(),
        base_stations: vec![bs(300.0, 500.0, 30), bs(700.0, 500.0, 30)],
        environment: table_env(),
        costs: table_costs(),
        split: CodeSplit::new(1, 2).unwrap(),
        tree: ScenarioTree {
            weather: vec![WeatherScenario { g: vec![0; 6], probability: 1.0 }],
            demand,
            shortfall: guaranteed_shortfall(6, z, 4),
        },
        options: FormulationOptions::default(),
    }
}

pub fn all_type(inst: &NetworkInstance, x: usize) -> TypeAssignment {
    vec![vec![x; inst.stations.len()]; inst.time_slots]
}

/// One BS with 72 servers, demand 1080 everywhere, one guaranteed shortfall, no local computing.
pub fn forced_offload_instance() -> NetworkInstance {
    let mut inst = staged_instance(3);
    inst.base_stations = vec![bs(500.0, 500.0, 72)];
    inst.tree.demand = vec![DemandScenario { d: vec![1080; 6], probability: 1.0 }];
    inst.options.force_no_local = true;
    inst
}

/// Single station, single BS, one demand, no shortfall stages.
pub fn tiny_instance(servers: u32, demand: u32) -> NetworkInstance {
    let mut inst = staged_instance(2);
    inst.stations.truncate(1);
    inst.base_stations = vec![bs(300.0, 300.0, servers)];
    inst.tree.weather = vec![WeatherScenario { g: vec![0], probability: 1.0 }];
    inst.tree.demand = vec![DemandScenario { d: vec![demand], probability: 1.0 }];
    inst
}

/// Reservation-phase instance: `n` stations, all strong wind with probability `p`.
pub fn weather_instance(stations: usize, p: f64, penalty: f64) -> NetworkInstance {
    let mut inst = staged_instance(2);
    inst.stations.truncate(stations);
    let strong = WeatherScenario { g: vec![1; stations], probability: p };
    let calm = WeatherScenario { g: vec![0; stations], probability: 1.0 - p };
    inst.tree.weather = vec![strong, calm].into_iter().filter(|w| w.probability > 0.0).collect();
    inst.tree.demand = vec![DemandScenario { d: vec![240; stations], probability: 1.0 }];
    inst.costs.crash_penalty = penalty;
    inst
}
