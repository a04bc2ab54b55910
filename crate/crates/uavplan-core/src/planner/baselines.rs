use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::instance::NetworkInstance;
use super::phase1::{solve_phase1, Phase1Plan};
use super::phase2::{
    build_phase2_dip, solve_built_phase2, solve_phase2, solve_phase2_frozen, Formulation, FrozenDecisions, Phase2Plan,
    TypeAssignment,
};
use crate::error::{Error, Result};
use crate::milp::SolveOptions;

/// Probability-weighted mean demand per station, rounded to nearest with ties up.
pub fn mean_demand(inst: &NetworkInstance) -> Vec<u32> {
    (0..inst.stations.len())
        .map(|y| {
            let m: f64 = inst.tree.demand.iter().map(|d| d.probability * d.d[y] as f64).sum();
            libm::floor(m + 0.5).max(1.0) as u32
        })
        .collect()
}

/// Expected first-stage shortfall magnitude per station.
pub fn mean_shortfall(inst: &NetworkInstance) -> Vec<f64> {
    let tree = &inst.tree;
    let ny = inst.stations.len();
    if tree.stages() < 3 {
        return vec![0.0; ny];
    }
    (0..ny)
        .map(|y| {
            (0..tree.prefix_count(3))
                .map(|p| {
                    tree.prefix_probability(3, p)
                        * tree.effective_flag(3, p, y) as f64
                        * tree.effective_magnitude(3, p, y) as f64
                })
                .sum()
        })
        .collect()
}

/// Expected-value plan: solve the deterministic model on mean data, then hold its
/// subscriptions and stage-2 counts fixed in every scenario and re-optimize later stages.
pub fn evf_plan(inst: &NetworkInstance, types: &TypeAssignment, opts: &SolveOptions) -> Result<Phase2Plan> {
    inst.validate()?;
    let demand = mean_demand(inst);
    let shortfall = mean_shortfall(inst);
    let mut frozen = FrozenDecisions { subscriptions: Vec::new(), stage2: Vec::new() };
    for slot in types {
        let det = solve_built_phase2(&build_phase2_dip(inst, slot, &demand, &shortfall)?, opts)?;
        let row: Vec<(u32, Vec<u32>)> =
            det.decisions[0][0][0].iter().map(|d| (d.local, d.offload.clone())).collect();
        frozen.subscriptions.push(det.subscriptions[0].clone());
        frozen.stage2.push(vec![row; inst.tree.demand.len()]);
    }
    solve_phase2_frozen(inst, types, &frozen, opts).map_err(|e| match e {
        Error::Infeasible(_) => Error::Infeasible("expected-value decisions admit no feasible recourse".into()),
        e => e,
    })
}

pub const RANDOM_REJECTION_CAP: u32 = 10_000;

/// Random feasible plan: a random BS subset, then per demand scenario uniformly drawn
/// stage-2 counts that meet the recovery threshold, first-shortfall cover and capacity.
/// Later stages are re-optimized given those draws.
pub fn random_plan(inst: &NetworkInstance, types: &TypeAssignment, seed: u64, opts: &SolveOptions) -> Result<Phase2Plan> {
    inst.validate()?;
    let frozen = random_stage2(inst, seed)?;
    solve_phase2_frozen(inst, types, &frozen, opts)
}

pub fn random_stage2(inst: &NetworkInstance, seed: u64) -> Result<FrozenDecisions> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tree = &inst.tree;
    let k = inst.split.k;
    let nf = inst.base_stations.len();
    let ny = inst.stations.len();
    let top = k + tree.max_magnitude();
    let local_top = if inst.options.force_no_local { 0 } else { top };
    let mut rejected = 0u32;
    let mut reject = || {
        rejected += 1;
        if rejected >= RANDOM_REJECTION_CAP {
            Err(Error::Infeasible(format!("random plan rejected {RANDOM_REJECTION_CAP} draws")))
        } else {
            Ok(())
        }
    };
    let mut out = FrozenDecisions { subscriptions: Vec::new(), stage2: Vec::new() };
    for _ in 0..inst.time_slots {
        let subs: Vec<u8> = (0..nf).map(|_| rng.random_bool(0.5) as u8).collect();
        let mut per_demand = Vec::with_capacity(tree.demand.len());
        for lam in 0..tree.demand.len() {
            loop {
                let mut row = Vec::with_capacity(ny);
                for y in 0..ny {
                    loop {
                        let local = rng.random_range(0..=local_top);
                        let offload: Vec<u32> = (0..nf)
                            .map(|f| {
                                if subs[f] == 1 {
                                    rng.random_range(0..=inst.base_stations[f].servers.min(top))
                                } else {
                                    0
                                }
                            })
                            .collect();
                        if covers(inst, lam, y, local, &offload) {
                            row.push((local, offload));
                            break;
                        }
                        reject()?;
                    }
                }
                let fits = (0..nf).all(|f| row.iter().map(|r| r.1[f]).sum::<u32>() <= inst.base_stations[f].servers);
                if fits {
                    per_demand.push(row);
                    break;
                }
                reject()?;
            }
        }
        out.subscriptions.push(subs);
        out.stage2.push(per_demand);
    }
    Ok(out)
}

fn covers(inst: &NetworkInstance, lam: usize, y: usize, local: u32, offload: &[u32]) -> bool {
    let k = inst.split.k;
    let sent: u32 = offload.iter().sum();
    let threshold = if inst.options.threshold_per_bs {
        offload.iter().all(|&o| local + o >= k)
    } else {
        local + sent >= k
    };
    if !threshold {
        return false;
    }
    let tree = &inst.tree;
    if tree.stages() < 3 {
        return true;
    }
    (0..tree.prefix_count(3)).filter(|&p| tree.parent(3, p) == lam).all(|p| {
        let chain = tree.effective_flag(3, p, y) as u32;
        sent + chain * local >= chain * tree.effective_magnitude(3, p, y)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherOutcome {
    pub weather: usize,
    pub probability: f64,
    pub types: TypeAssignment,
    /// Index into `TwoPhasePlan::task_plans`.
    pub plan: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPhasePlan {
    pub phase1: Phase1Plan,
    pub outcomes: Vec<WeatherOutcome>,
    pub task_plans: Vec<Phase2Plan>,
    /// Phase-2 cost averaged over weather scenarios.
    pub expected_task_cost: f64,
    pub expected_cost: f64,
    pub optimal: bool,
}

/// Reservation plan, then the task-allocation model for every distinct set of flying types.
pub fn plan_two_phase(inst: &NetworkInstance, opts: &SolveOptions) -> Result<TwoPhasePlan> {
    plan_two_phase_from(inst, solve_phase1(inst, opts)?, opts)
}

/// Weather outcomes of a reservation plan, grouped by distinct flying types.
pub fn weather_outcomes(inst: &NetworkInstance, phase1: &Phase1Plan) -> (Vec<TypeAssignment>, Vec<WeatherOutcome>) {
    let largest = inst.largest_type();
    let mut distinct: Vec<TypeAssignment> = Vec::new();
    let mut outcomes = Vec::new();
    for (mu, w) in inst.tree.weather.iter().enumerate() {
        let types: TypeAssignment = (0..inst.time_slots).map(|t| phase1.flying_types(t, mu, largest)).collect();
        let plan = match distinct.iter().position(|d| *d == types) {
            Some(i) => i,
            None => {
                distinct.push(types.clone());
                distinct.len() - 1
            }
        };
        outcomes.push(WeatherOutcome { weather: mu, probability: w.probability, types, plan });
    }
    (distinct, outcomes)
}

pub fn plan_two_phase_from(inst: &NetworkInstance, phase1: Phase1Plan, opts: &SolveOptions) -> Result<TwoPhasePlan> {
    let (distinct, outcomes) = weather_outcomes(inst, &phase1);
    let task_plans = distinct
        .iter()
        .map(|types| solve_phase2(inst, types, &Formulation::Sip, opts))
        .collect::<Result<Vec<_>>>()?;
    let expected_task_cost = outcomes.iter().map(|o| o.probability * task_plans[o.plan].expected_cost).sum();
    let optimal = phase1.optimal && task_plans.iter().all(|p| p.optimal);
    Ok(TwoPhasePlan {
        expected_cost: phase1.expected_cost + expected_task_cost,
        phase1,
        outcomes,
        task_plans,
        expected_task_cost,
        optimal,
    })
}
