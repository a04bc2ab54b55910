//! One function per subcommand. Each returns the process exit status on success.

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use uavplan_core::evaluator::{
    check_grid, compare_with, evaluate_plan, phase1_summary, phase2_summary, random_cost, sweep_point,
    EvaluationReport, SweepParam, SweepPoint,
};
use uavplan_core::milp::SolveOptions;
use uavplan_core::planner::{plan_two_phase, shape_of, NetworkInstance, Phase2Plan, TwoPhasePlan, WeatherOutcome};
use uavplan_core::scenario::{model_size_phase1, model_size_phase2};

use crate::config::{load_config, RunConfig};
use crate::error::CliError;
use crate::ingest::demand_hist_from_csv;
use crate::output::{write_atomic, write_csv, write_json};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_OPTIMAL: i32 = 3;

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub node_limit: Option<u64>,
}

impl Overrides {
    pub fn load(&self) -> Result<RunConfig, CliError> {
        let path = self.config.as_deref().ok_or_else(|| CliError::input("--config is required"))?;
        let mut cfg = load_config(path)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(limit) = self.node_limit {
            cfg.solver.node_limit = limit;
        }
        Ok(cfg)
    }
}

fn status(optimal: bool) -> i32 {
    if optimal {
        EXIT_OK
    } else {
        EXIT_NOT_OPTIMAL
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

#[derive(Serialize)]
struct Phase2File<'a> {
    outcomes: &'a [WeatherOutcome],
    task_plans: &'a [Phase2Plan],
    expected_task_cost: f64,
    expected_cost: f64,
    optimal: bool,
}

#[derive(Serialize)]
struct EvaluationFile {
    /// Report per entry of `task_plans`.
    reports: Vec<EvaluationReport>,
}

fn plan_summary(inst: &NetworkInstance, plan: &TwoPhasePlan, reports: Option<&[EvaluationReport]>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "optimal: {}", plan.optimal);
    let _ = writeln!(s, "expected total cost: {:.6}", plan.expected_cost);
    let _ = writeln!(s, "reservation phase cost: {:.6}", plan.phase1.expected_cost);
    let _ = writeln!(s, "task phase cost (weather averaged): {:.6}", plan.expected_task_cost);
    let _ = writeln!(s, "reservation: {}", phase1_summary(&plan.phase1));
    let _ = writeln!(s, "stages: {}, demand scenarios: {}", inst.stages(), inst.tree.demand.len());
    for o in &plan.outcomes {
        let p = &plan.task_plans[o.plan];
        let types: Vec<String> = o.types.iter().map(|slot| {
            slot.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(",")
        }).collect();
        let _ = writeln!(
            s,
            "weather {} (p={}): flying types {} task plan {} cost {:.6}",
            o.weather + 1,
            o.probability,
            types.join("; "),
            o.plan,
            p.expected_cost
        );
    }
    for (i, p) in plan.task_plans.iter().enumerate() {
        let costs: Vec<String> = p.stage_costs.iter().map(|c| format!("{c:.6}")).collect();
        let _ = writeln!(s, "task plan {i}: stage costs [{}]", costs.join(", "));
        let _ = writeln!(s, "task plan {i}: stage 2 local|offloads {}", phase2_summary(p));
        if let Some(r) = reports.and_then(|r| r.get(i)) {
            let _ = writeln!(
                s,
                "task plan {i}: sampled cost {:.6} +/- {:.6} over {} paths (seed {})",
                r.mean_cost, r.std_error, r.n_samples, r.seed
            );
        }
    }
    s
}

/// Reservation plan, then a task-allocation plan per flying-type outcome.
pub fn cmd_plan(flags: &Overrides) -> Result<i32, CliError> {
    let cfg = flags.load()?;
    let plan = plan_two_phase(&cfg.instance, &cfg.solver)?;
    let reports = match &cfg.evaluate {
        Some(ev) => Some(
            plan.task_plans
                .iter()
                .map(|p| evaluate_plan(p, &cfg.instance, ev.samples, cfg.seed))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    write_json(&flags.out, "phase1_plan.json", &plan.phase1)?;
    let phase2 = Phase2File {
        outcomes: &plan.outcomes,
        task_plans: &plan.task_plans,
        expected_task_cost: plan.expected_task_cost,
        expected_cost: plan.expected_cost,
        optimal: plan.optimal,
    };
    write_json(&flags.out, "phase2_plan.json", &phase2)?;
    if let Some(reports) = &reports {
        write_json(&flags.out, "evaluation.json", &EvaluationFile { reports: reports.clone() })?;
    }
    let summary = plan_summary(&cfg.instance, &plan, reports.as_deref());
    write_atomic(&flags.out, "summary.txt", summary.as_bytes())?;
    print!("{summary}");
    Ok(status(plan.optimal))
}

pub const SWEEP_COLUMNS: [&str; 5] = ["value", "objective", "optimal", "stage_costs", "summary"];

/// Solves every grid point in parallel; rows keep grid order.
pub fn run_sweep(
    inst: &NetworkInstance,
    param: SweepParam,
    grid: &[f64],
    opts: &SolveOptions,
) -> Result<Vec<SweepPoint>, CliError> {
    check_grid(grid)?;
    let points = grid.par_iter().map(|&v| sweep_point(inst, param, v, opts)).collect::<Result<Vec<_>, _>>()?;
    Ok(points)
}

pub fn sweep_rows(points: &[SweepPoint]) -> Vec<Vec<String>> {
    points
        .iter()
        .map(|p| {
            vec![
                fmt_f64(p.value),
                fmt_f64(p.objective),
                p.optimal.to_string(),
                p.stage_costs.iter().map(|&c| fmt_f64(c)).collect::<Vec<_>>().join(";"),
                p.summary.clone(),
            ]
        })
        .collect()
}

/// `param` and `grid` override the config's sweep section.
pub fn cmd_sweep(flags: &Overrides, param: Option<SweepParam>, grid: Option<Vec<f64>>) -> Result<i32, CliError> {
    let cfg = flags.load()?;
    let section = cfg.sweep.as_ref();
    let param = param
        .or(section.map(|s| s.parameter))
        .ok_or_else(|| CliError::input("no sweep parameter: pass --param or add a sweep section"))?;
    let grid = grid
        .or_else(|| section.map(|s| s.grid.clone()))
        .ok_or_else(|| CliError::input("no sweep grid: pass --grid or add a sweep section"))?;
    let points = run_sweep(&cfg.instance, param, &grid, &cfg.solver)?;
    let name = format!("sweep_{}.csv", param.name());
    let path = write_csv(&flags.out, &name, &SWEEP_COLUMNS, &sweep_rows(&points))?;
    println!("{} points written to {}", points.len(), path.display());
    Ok(status(points.iter().all(|p| p.optimal)))
}

/// One row of `compare.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub service_fee: f64,
    pub sip_cost: f64,
    pub evf_cost: f64,
    pub random_cost: f64,
}

/// Seeds `seed, seed + 1, ..., seed + count - 1`.
pub fn seed_list(seed: u64, count: u32) -> Vec<u64> {
    (0..count as u64).map(|i| seed.wrapping_add(i)).collect()
}

/// Exact expected costs of the three plans at each per-copy service fee, in grid order.
pub fn run_compare(
    inst: &NetworkInstance,
    fees: &[f64],
    seeds: &[u64],
    opts: &SolveOptions,
) -> Result<Vec<CompareRow>, CliError> {
    if fees.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
        return Err(CliError::input("service fees must be finite and non-negative"));
    }
    fees.par_iter()
        .map(|&fee| {
            let mut v = inst.clone();
            v.costs.service_fee = fee;
            let c = compare_with(&v, seeds, opts, |inst, types, seeds, opts| {
                seeds.par_iter().map(|&s| random_cost(inst, types, s, opts)).collect()
            })?;
            Ok(CompareRow { service_fee: fee, sip_cost: c.sip_cost, evf_cost: c.evf_cost, random_cost: c.random_cost })
        })
        .collect()
}

pub fn cmd_compare(flags: &Overrides) -> Result<i32, CliError> {
    let cfg = flags.load()?;
    let seeds = seed_list(cfg.seed, cfg.compare.seeds);
    let swept = !cfg.compare.service_fee_grid.is_empty();
    if swept {
        check_grid(&cfg.compare.service_fee_grid)?;
    }
    let fees = if swept { cfg.compare.service_fee_grid.clone() } else { vec![cfg.instance.costs.service_fee] };
    let rows = run_compare(&cfg.instance, &fees, &seeds, &cfg.solver)?;
    let mut header = vec!["sip_cost", "evf_cost", "random_cost"];
    if swept {
        header.insert(0, "service_fee");
    }
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![fmt_f64(r.sip_cost), fmt_f64(r.evf_cost), fmt_f64(r.random_cost)];
            if swept {
                row.insert(0, fmt_f64(r.service_fee));
            }
            row
        })
        .collect();
    let path = write_csv(&flags.out, "compare.csv", &header, &cells)?;
    println!("{} rows written to {}", rows.len(), path.display());
    Ok(EXIT_OK)
}

/// Dimensions for `size` without a config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReservationDims {
    pub slots: u64,
    pub stations: u64,
    pub types: u64,
    pub weather: u64,
}

pub fn cmd_size(flags: &Overrides, dims: Option<ReservationDims>) -> Result<i32, CliError> {
    if let Some(d) = dims {
        let (vars, cons) = model_size_phase1(d.slots, d.stations, d.types, d.weather);
        println!("{vars}/{cons}");
        return Ok(EXIT_OK);
    }
    let cfg = flags.load()?;
    let inst = &cfg.instance;
    let (v1, c1) = model_size_phase1(
        inst.time_slots as u64,
        inst.stations.len() as u64,
        inst.uav_types.len() as u64,
        inst.tree.weather.len() as u64,
    );
    let (v2, c2) = model_size_phase2(&shape_of(inst));
    println!("reservation {v1}/{c1}");
    println!("task allocation {v2}/{c2}");
    Ok(EXIT_OK)
}

/// `csv` overrides the config's ingest section.
pub fn cmd_ingest_demand(flags: &Overrides, csv: Option<PathBuf>) -> Result<i32, CliError> {
    let csv = match csv {
        Some(p) => p,
        None => flags
            .load()?
            .ingest_csv
            .ok_or_else(|| CliError::input("no demand csv: pass --csv or add an ingest section"))?,
    };
    let hist = demand_hist_from_csv(&csv)?;
    let path = write_json(&flags.out, "demand_hist.json", &hist)?;
    println!("{} records, {} distinct dimensions written to {}", hist.total, hist.values.len(), path.display());
    Ok(EXIT_OK)
}
