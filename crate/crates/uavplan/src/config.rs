//! Run configuration and instance files.
//!
//! Files carry the units people write down (mAh, mW, MHz, dB, dBm); loading
//! converts everything to the linear SI values the core works in.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use uavplan_core::cdc::CodeSplit;
use uavplan_core::cost::CostCoefficients;
use uavplan_core::evaluator::SweepParam;
use uavplan_core::milp::SolveOptions;
use uavplan_core::physics::{Environment, Position3D, UavType};
use uavplan_core::planner::{BaseStation, FormulationOptions, NetworkInstance, Station};
use uavplan_core::scenario::{DemandScenario, ScenarioTree, ShortfallScenario, WeatherScenario};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) / 1000.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UavTypeFile {
    pub battery_mah: f64,
    pub mass_kg: f64,
    /// rad/s
    pub blade_angular_velocity: f64,
    pub cpu_hz: f64,
    pub cycles_per_bit: f64,
    pub bandwidth_mhz: f64,
    pub tx_power_mw: f64,
    pub rx_power_mw: f64,
    pub hover_height_m: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseStationFile {
    pub a: f64,
    pub b: f64,
    pub h: f64,
    pub servers: u32,
    pub server_cpu_hz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentFile {
    pub air_density: f64,
    pub rotor_radius: f64,
    pub rotor_disc_area: f64,
    pub tip_speed: f64,
    pub induced_velocity: f64,
    pub fuselage_drag_ratio: f64,
    pub rotor_solidity: f64,
    pub profile_drag_coefficient: f64,
    pub induced_power_correction: f64,
    pub channel_gain_ref_db: f64,
    pub noise_power_dbm: f64,
    #[serde(default = "default_bits_per_symbol")]
    pub bits_per_symbol: u32,
}

fn default_bits_per_symbol() -> u32 {
    4
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitFile {
    pub m: u32,
    pub s: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub time_slots: usize,
    pub stations: Vec<Station>,
    pub uav_types: Vec<UavTypeFile>,
    pub base_stations: Vec<BaseStationFile>,
    pub environment: EnvironmentFile,
    pub costs: CostCoefficients,
    pub split: SplitFile,
    #[serde(default)]
    pub options: FormulationOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub weather: Vec<WeatherScenario>,
    pub demand: Vec<DemandScenario>,
    #[serde(default)]
    pub shortfall: Vec<Vec<ShortfallScenario>>,
}

impl ScenarioFile {
    pub fn into_tree(self) -> ScenarioTree {
        ScenarioTree { weather: self.weather, demand: self.demand, shortfall: self.shortfall }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParam,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    /// Random-plan seeds are `seed, seed + 1, ...`.
    #[serde(default = "default_seed_count")]
    pub seeds: u32,
    /// Per-copy service fees to compare at; empty means the instance value only.
    #[serde(default)]
    pub service_fee_grid: Vec<f64>,
}

fn default_seed_count() -> u32 {
    30
}

impl Default for CompareSection {
    fn default() -> Self {
        Self { seeds: default_seed_count(), service_fee_grid: Vec::new() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateSection {
    pub samples: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestSection {
    pub csv: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    pub instance: PathBuf,
    pub scenarios: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolveOptions,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub compare: CompareSection,
    #[serde(default)]
    pub evaluate: Option<EvaluateSection>,
    #[serde(default)]
    pub ingest: Option<IngestSection>,
}

/// A loaded configuration with every referenced file read and validated.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub path: PathBuf,
    pub instance: NetworkInstance,
    pub seed: u64,
    pub solver: SolveOptions,
    pub sweep: Option<SweepSection>,
    pub compare: CompareSection,
    pub evaluate: Option<EvaluateSection>,
    /// Resolved against the config directory.
    pub ingest_csv: Option<PathBuf>,
}

fn read(path: &Path, what: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {what} {}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, path: &Path) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn check_version(found: u32, path: &Path) -> Result<(), CliError> {
    if found != SCHEMA_VERSION {
        return Err(CliError::input(format!(
            "{}: schema_version {found} is not supported (expected {SCHEMA_VERSION})",
            path.display()
        )));
    }
    Ok(())
}

impl InstanceFile {
    pub fn into_instance(self, tree: ScenarioTree) -> Result<NetworkInstance, CliError> {
        let uav_types = self
            .uav_types
            .iter()
            .enumerate()
            .map(|(id, u)| UavType {
                id,
                battery_capacity: u.battery_mah,
                mass: u.mass_kg,
                blade_angular_velocity: u.blade_angular_velocity,
                cpu_rate: u.cpu_hz,
                cycles_per_bit: u.cycles_per_bit,
                bandwidth: u.bandwidth_mhz * 1e6,
                tx_power: u.tx_power_mw / 1000.0,
                rx_power: u.rx_power_mw / 1000.0,
                hover_height: u.hover_height_m,
            })
            .collect();
        let base_stations = self
            .base_stations
            .iter()
            .map(|b| BaseStation {
                position: Position3D { a: b.a, b: b.b, h: b.h },
                servers: b.servers,
                server_cpu_rate: b.server_cpu_hz,
            })
            .collect();
        let e = &self.environment;
        let environment = Environment {
            air_density: e.air_density,
            rotor_radius: e.rotor_radius,
            rotor_disc_area: e.rotor_disc_area,
            tip_speed: e.tip_speed,
            induced_velocity: e.induced_velocity,
            fuselage_drag_ratio: e.fuselage_drag_ratio,
            rotor_solidity: e.rotor_solidity,
            profile_drag_coefficient: e.profile_drag_coefficient,
            induced_power_correction: e.induced_power_correction,
            channel_gain_ref: db_to_linear(e.channel_gain_ref_db),
            noise_power: dbm_to_watts(e.noise_power_dbm),
            bits_per_symbol: e.bits_per_symbol,
        };
        let split = CodeSplit::with_storage(self.split.m, self.split.s)?;
        let inst = NetworkInstance {
            time_slots: self.time_slots,
            stations: self.stations,
            uav_types,
            base_stations,
            environment,
            costs: self.costs,
            split,
            tree,
            options: self.options,
        };
        inst.validate()?;
        Ok(inst)
    }
}

/// Reads an instance file and a scenario file and validates the combination.
pub fn load_instance(instance: &Path, scenarios: &Path) -> Result<NetworkInstance, CliError> {
    let file: InstanceFile = parse(&read(instance, "instance file")?, instance)?;
    check_version(file.schema_version, instance)?;
    let tree: ScenarioFile = parse(&read(scenarios, "scenario file")?, scenarios)?;
    check_version(tree.schema_version, scenarios)?;
    file.into_instance(tree.into_tree())
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let file: ConfigFile = parse(&read(path, "config file")?, path)?;
    check_version(file.schema_version, path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let instance = load_instance(&base.join(&file.instance), &base.join(&file.scenarios))?;
    let ingest_csv = file.ingest.map(|i| base.join(i.csv));
    if let Some(csv) = &ingest_csv {
        if !csv.is_file() {
            return Err(CliError::input(format!("demand csv {} does not exist", csv.display())));
        }
    }
    if let Some(ev) = &file.evaluate {
        if ev.samples == 0 {
            return Err(CliError::input("evaluate.samples must be positive"));
        }
    }
    if file.compare.seeds == 0 {
        return Err(CliError::input("compare.seeds must be positive"));
    }
    Ok(RunConfig {
        path: path.to_path_buf(),
        instance,
        seed: file.seed,
        solver: file.solver,
        sweep: file.sweep,
        compare: file.compare,
        evaluate: file.evaluate,
        ingest_csv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_conversions() {
        assert!((db_to_linear(-60.0) - 1e-6).abs() < 1e-18);
        assert!((dbm_to_watts(-100.0) - 1e-13).abs() < 1e-25);
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-15);
    }
}
