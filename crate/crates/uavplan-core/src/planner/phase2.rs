use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::instance::{copy_costs, CopyCosts, NetworkInstance};
use crate::error::{Error, Result};
use crate::milp::{solve_exact, IPModel, Sense, SolveOptions, SolveStatus, VarKind};
use crate::scenario::{model_size_phase2, Phase2Shape};

/// UAV type flying at each station, per `[slot][station]`.
pub type TypeAssignment = Vec<Vec<usize>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageVars {
    pub local: usize,
    pub offload: Vec<usize>,
    /// Absent for an ungated stage 2.
    pub threshold: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase2Layout {
    pub z: usize,
    /// `[slot][bs]`
    pub subscribe: Vec<Vec<usize>>,
    /// `[slot][stage - 2][prefix][station]`
    pub stages: Vec<Vec<Vec<Vec<StageVars>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuiltPhase2 {
    pub model: IPModel,
    pub layout: Phase2Layout,
    pub instance: NetworkInstance,
    pub types: TypeAssignment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageDecision {
    pub local: u32,
    pub offload: Vec<u32>,
    pub threshold: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase2Plan {
    pub z: usize,
    pub uav_types: TypeAssignment,
    /// `[slot][bs]`
    pub subscriptions: Vec<Vec<u8>>,
    /// `[slot][stage - 2][prefix][station]`
    pub decisions: Vec<Vec<Vec<Vec<StageDecision>>>>,
    pub expected_cost: f64,
    /// Expected cost per stage, index 0 is stage 1 (subscriptions).
    pub stage_costs: Vec<f64>,
    pub optimal: bool,
    pub nodes_explored: u64,
}

fn slot_tag(inst: &NetworkInstance, t: usize) -> String {
    if inst.time_slots > 1 {
        format!("[slot={}]", t + 1)
    } else {
        String::new()
    }
}

fn check_types(inst: &NetworkInstance, types: &TypeAssignment) -> Result<()> {
    if types.len() != inst.time_slots || types.iter().any(|t| t.len() != inst.stations.len()) {
        return Err(Error::InvalidArgument(format!(
            "type assignment must be {} slots x {} stations",
            inst.time_slots,
            inst.stations.len()
        )));
    }
    if types.iter().flatten().any(|&x| x >= inst.uav_types.len()) {
        return Err(Error::InvalidArgument("type assignment references an unknown UAV type".into()));
    }
    Ok(())
}

/// Copy costs indexed `[slot][demand scenario][station]`.
pub fn cost_table(inst: &NetworkInstance, types: &TypeAssignment) -> Result<Vec<Vec<Vec<CopyCosts>>>> {
    let mut out = Vec::with_capacity(inst.time_slots);
    for slot in types {
        let mut per_demand = Vec::with_capacity(inst.tree.demand.len());
        for d in &inst.tree.demand {
            let row = (0..inst.stations.len())
                .map(|y| copy_costs(inst, y, slot[y], d.d[y]))
                .collect::<Result<Vec<_>>>()?;
            per_demand.push(row);
        }
        out.push(per_demand);
    }
    Ok(out)
}

pub fn shape_of(inst: &NetworkInstance) -> Phase2Shape {
    Phase2Shape {
        slots: inst.time_slots as u64,
        base_stations: inst.base_stations.len() as u64,
        stations: inst.stations.len() as u64,
        demand: inst.tree.demand.len() as u64,
        shortfall: inst.tree.shortfall.iter().map(|s| s.len() as u64).collect(),
        gate_stage2_threshold: inst.options.gate_stage2_threshold,
        threshold_per_bs: inst.options.threshold_per_bs,
    }
}

/// Largest number of copies a station can usefully return from each stage-`j` prefix:
/// `k` plus the worst cumulative shortfall on any path below it. No optimal plan
/// needs a single local or offload count above this, so it bounds those counts
/// and serves as the indicator big-M. Indexed `[stage - 2][prefix]`.
pub fn useful_copies(inst: &NetworkInstance, station: usize) -> Vec<Vec<f64>> {
    let tree = &inst.tree;
    let z = tree.stages();
    let k = inst.split.k as f64;
    let mut best: Vec<Vec<f64>> = (2..=z).map(|j| vec![k; tree.prefix_count(j)]).collect();
    for leaf in 0..tree.prefix_count(z) {
        let mut total = k;
        for jj in 3..=z {
            let p = tree.ancestor(z, leaf, jj);
            total += tree.effective_flag(jj, p, station) as f64 * tree.effective_magnitude(jj, p, station) as f64;
        }
        for j in 2..=z {
            let p = tree.ancestor(z, leaf, j);
            let b = &mut best[j - 2][p];
            *b = b.max(total);
        }
    }
    best
}

/// Extensive-form stochastic model over every demand and shortfall path.
pub fn build_phase2_sip(inst: &NetworkInstance, types: &TypeAssignment) -> Result<BuiltPhase2> {
    inst.validate()?;
    check_types(inst, types)?;
    let tree = &inst.tree;
    let z = tree.stages();
    let costs = cost_table(inst, types)?;
    let sigma = inst.big_m();
    let k = inst.split.k as f64;
    let nf = inst.base_stations.len();
    let ny = inst.stations.len();
    let opts = &inst.options;
    let local_cap = if opts.force_no_local { 0.0 } else { sigma };
    let mut model = IPModel::new("task_allocation_sip");
    let mut subscribe = Vec::with_capacity(inst.time_slots);
    let mut stages = Vec::with_capacity(inst.time_slots);
    let mut offset = 0.0;
    let useful: Vec<Vec<Vec<f64>>> = (0..ny).map(|y| useful_copies(inst, y)).collect();

    for t in 0..inst.time_slots {
        let tag = slot_tag(inst, t);
        let ms: Vec<usize> = (0..nf)
            .map(|f| {
                let id = model.add_var(format!("M_s[bs={}]{tag}", f + 1), VarKind::Binary, 0.0, 1.0)?;
                model.add_objective(id, inst.costs.subscription);
                Ok(id)
            })
            .collect::<Result<_>>()?;
        let mut slot_stages: Vec<Vec<Vec<StageVars>>> = Vec::with_capacity(z - 1);
        for stage in 2..=z {
            let gated = stage >= 3 || opts.gate_stage2_threshold;
            let mult = opts.hover_multiplier(stage);
            let mut prefixes = Vec::with_capacity(tree.prefix_count(stage));
            for p in 0..tree.prefix_count(stage) {
                let prob = tree.prefix_probability(stage, p);
                let lam = tree.demand_index(stage, p);
                let mut row = Vec::with_capacity(ny);
                for y in 0..ny {
                    let c = &costs[t][lam][y];
                    let at = format!("[stage={stage}][station={}]", y + 1);
                    let sc = format!("[scenario={}]{tag}", p + 1);
                    let cap = useful[y][stage - 2][p].min(sigma);
                    let local = model.add_var(format!("M_L{at}{sc}"), VarKind::Integer, 0.0, local_cap.min(cap))?;
                    model.add_objective(local, prob * c.local);
                    let mut offload = Vec::with_capacity(nf);
                    for f in 0..nf {
                        let q = inst.base_stations[f].servers as f64;
                        let id = model.add_var(format!("M_O{at}[bs={}]{sc}", f + 1), VarKind::Integer, 0.0, q.min(cap))?;
                        model.add_objective(id, prob * c.offload[f]);
                        offload.push(id);
                    }
                    let threshold = if gated {
                        let mut th = Vec::with_capacity(nf);
                        for f in 0..nf {
                            let id = model.add_var(format!("M_TH{at}[bs={}]{sc}", f + 1), VarKind::Binary, 0.0, 1.0)?;
                            model.add_objective(id, prob * c.threshold * mult);
                            th.push(id);
                        }
                        Some(th)
                    } else {
                        None
                    };
                    if stage == 2 {
                        offset += prob * c.decode;
                        if !gated {
                            offset += prob * c.threshold * mult;
                        }
                    }
                    row.push(StageVars { local, offload, threshold });
                }
                prefixes.push(row);
            }
            slot_stages.push(prefixes);
        }

        // constraints
        for stage in 2..=z {
            for p in 0..tree.prefix_count(stage) {
                let here = &slot_stages[stage - 2][p];
                let tagp = format!("[stage={stage}][scenario={}]{tag}", p + 1);
                for f in 0..nf {
                    let load: Vec<(usize, f64)> = here.iter().map(|v| (v.offload[f], 1.0)).collect();
                    let q = inst.base_stations[f].servers as f64;
                    let most: f64 = here.iter().map(|v| model.variables[v.offload[f]].upper).sum();
                    let mut link = load.clone();
                    link.push((ms[f], -q.min(most).min(sigma)));
                    model.add_constraint(format!("subscribed[bs={}]{tagp}", f + 1), link, Sense::Le, 0.0)?;
                    model.add_constraint(format!("capacity[bs={}]{tagp}", f + 1), load, Sense::Le, q)?;
                }
                for (y, v) in here.iter().enumerate() {
                    if let Some(th) = &v.threshold {
                        for f in 0..nf {
                            model.add_constraint(
                                format!("offload_flag[station={}][bs={}]{tagp}", y + 1, f + 1),
                                [(v.offload[f], 1.0), (th[f], -model.variables[v.offload[f]].upper)],
                                Sense::Le,
                                0.0,
                            )?;
                        }
                    }
                }
                if stage == 2 {
                    for (y, v) in here.iter().enumerate() {
                        if opts.threshold_per_bs {
                            for f in 0..nf {
                                model.add_constraint(
                                    format!("recovery[station={}][bs={}]{tagp}", y + 1, f + 1),
                                    [(v.local, 1.0), (v.offload[f], 1.0)],
                                    Sense::Ge,
                                    k,
                                )?;
                            }
                        } else {
                            let mut terms = vec![(v.local, 1.0)];
                            terms.extend(v.offload.iter().map(|&id| (id, 1.0)));
                            model.add_constraint(format!("recovery[station={}]{tagp}", y + 1), terms, Sense::Ge, k)?;
                        }
                    }
                    continue;
                }
                for y in 0..ny {
                    // shortfall at this stage can only hit copies offloaded one stage earlier
                    let parent = tree.parent(stage, p);
                    let prev = &slot_stages[stage - 3][parent][y];
                    let chain = tree.effective_flag(stage, p, y) as f64;
                    let mag = tree.effective_magnitude(stage, p, y) as f64;
                    let mut terms: Vec<(usize, f64)> = prev.offload.iter().map(|&id| (id, 1.0)).collect();
                    for i in 2..stage {
                        let anc = tree.ancestor(stage, p, i);
                        terms.push((slot_stages[i - 2][anc][y].local, chain));
                    }
                    model.add_constraint(format!("shortfall_cover[station={}]{tagp}", y + 1), terms, Sense::Ge, chain * mag)?;

                    // cumulative recovery after the shortfalls realized up to this stage
                    let mut terms: Vec<(usize, f64)> = Vec::new();
                    let mut rhs = k;
                    for i in 2..=stage {
                        let v = &slot_stages[i - 2][tree.ancestor(stage, p, i)][y];
                        terms.push((v.local, 1.0));
                        terms.extend(v.offload.iter().map(|&id| (id, 1.0)));
                    }
                    for jj in 3..=stage {
                        let pj = tree.ancestor(stage, p, jj);
                        let cj = tree.effective_flag(jj, pj, y) as f64;
                        if cj == 0.0 {
                            continue;
                        }
                        rhs += tree.effective_magnitude(jj, pj, y) as f64;
                        for i in 2..jj {
                            terms.push((slot_stages[i - 2][tree.ancestor(stage, p, i)][y].local, 1.0));
                        }
                    }
                    model.add_constraint(format!("cumulative_recovery[station={}]{tagp}", y + 1), terms, Sense::Ge, rhs)?;
                }
            }
        }
        if z >= 3 {
            for p in 0..tree.prefix_count(z) {
                let prob = tree.prefix_probability(z, p);
                let open: u32 = (0..ny).map(|y| tree.effective_flag(z, p, y) as u32).sum();
                offset += prob * open as f64 * inst.costs.terminal_penalty;
            }
        }
        subscribe.push(ms);
        stages.push(slot_stages);
    }
    model.objective_offset = offset;
    let built = BuiltPhase2 {
        model,
        layout: Phase2Layout { z, subscribe, stages },
        instance: inst.clone(),
        types: types.clone(),
    };
    let reported = built.model.size_with_domain_rows();
    let expected = model_size_phase2(&shape_of(inst));
    if reported != expected {
        return Err(Error::Internal(format!("built model size {reported:?} differs from sizing {expected:?}")));
    }
    Ok(built)
}

/// Single-scenario instance used to express a deterministic problem in plan form.
pub fn deterministic_instance(inst: &NetworkInstance, demand: &[u32]) -> NetworkInstance {
    let mut d = inst.clone();
    d.time_slots = 1;
    d.tree.demand = vec![crate::scenario::DemandScenario { d: demand.to_vec(), probability: 1.0 }];
    d.tree.shortfall = Vec::new();
    d.options.gate_stage2_threshold = true;
    d
}

/// Deterministic model for known demand and shortfall per station.
pub fn build_phase2_dip(
    inst: &NetworkInstance,
    types: &[usize],
    demand: &[u32],
    shortfall: &[f64],
) -> Result<BuiltPhase2> {
    let ny = inst.stations.len();
    if demand.len() != ny || shortfall.len() != ny || types.len() != ny {
        return Err(Error::InvalidArgument(format!("demand, shortfall and types need {ny} entries")));
    }
    if demand.contains(&0) {
        return Err(Error::InvalidArgument("demand must be a positive dimension".into()));
    }
    if shortfall.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::InvalidArgument("shortfall must be finite and >= 0".into()));
    }
    let det = deterministic_instance(inst, demand);
    det.validate()?;
    let types: TypeAssignment = vec![types.to_vec()];
    check_types(&det, &types)?;
    let nf = det.base_stations.len();
    let k = det.split.k as f64;
    let max_s = shortfall.iter().fold(0.0f64, |a, &b| a.max(b));
    let sigma = det.big_m() + libm::ceil(max_s);
    let mult = det.options.hover_multiplier(2);
    let mut model = IPModel::new("task_allocation_dip");
    let mut ms = Vec::with_capacity(nf);
    for f in 0..nf {
        let id = model.add_var(format!("M_s[bs={}]", f + 1), VarKind::Binary, 0.0, 1.0)?;
        model.add_objective(id, det.costs.subscription);
        ms.push(id);
    }
    let mut row = Vec::with_capacity(ny);
    for y in 0..ny {
        let c = copy_costs(&det, y, types[0][y], demand[y])?;
        let cap = (k + libm::ceil(shortfall[y])).min(sigma);
        let local_cap = if det.options.force_no_local { 0.0 } else { cap };
        let at = format!("[stage=2][station={}]", y + 1);
        let local = model.add_var(format!("M_L{at}[scenario=1]"), VarKind::Integer, 0.0, local_cap)?;
        model.add_objective(local, c.local);
        let mut offload = Vec::with_capacity(nf);
        let mut th = Vec::with_capacity(nf);
        for f in 0..nf {
            let q = det.base_stations[f].servers as f64;
            let o = model.add_var(format!("M_O{at}[bs={}][scenario=1]", f + 1), VarKind::Integer, 0.0, q.min(cap))?;
            model.add_objective(o, c.offload[f]);
            offload.push(o);
            let h = model.add_var(format!("M_TH{at}[bs={}][scenario=1]", f + 1), VarKind::Binary, 0.0, 1.0)?;
            model.add_objective(h, c.threshold * mult);
            th.push(h);
        }
        model.objective_offset += c.decode;
        row.push(StageVars { local, offload, threshold: Some(th) });
    }
    for f in 0..nf {
        let load: Vec<(usize, f64)> = row.iter().map(|v| (v.offload[f], 1.0)).collect();
        let q = det.base_stations[f].servers as f64;
        let most: f64 = row.iter().map(|v| model.variables[v.offload[f]].upper).sum();
        let mut link = load.clone();
        link.push((ms[f], -q.min(most).min(sigma)));
        model.add_constraint(format!("subscribed[bs={}]", f + 1), link, Sense::Le, 0.0)?;
        model.add_constraint(format!("capacity[bs={}]", f + 1), load, Sense::Le, q)?;
    }
    for (y, v) in row.iter().enumerate() {
        let th = v.threshold.as_ref().expect("deterministic model gates every BS");
        for f in 0..nf {
            model.add_constraint(
                format!("offload_flag[station={}][bs={}]", y + 1, f + 1),
                [(v.offload[f], 1.0), (th[f], -model.variables[v.offload[f]].upper)],
                Sense::Le,
                0.0,
            )?;
        }
        let all: Vec<(usize, f64)> =
            core::iter::once((v.local, 1.0)).chain(v.offload.iter().map(|&id| (id, 1.0))).collect();
        if det.options.threshold_per_bs {
            for f in 0..nf {
                model.add_constraint(
                    format!("recovery[station={}][bs={}]", y + 1, f + 1),
                    [(v.local, 1.0), (v.offload[f], 1.0)],
                    Sense::Ge,
                    k,
                )?;
            }
        } else {
            model.add_constraint(format!("recovery[station={}]", y + 1), all.clone(), Sense::Ge, k)?;
        }
        let s = shortfall[y];
        if s > 0.0 {
            model.add_constraint(format!("shortfall_cover[station={}]", y + 1), all.clone(), Sense::Ge, s)?;
            let mut twice = all;
            twice[0].1 = 2.0;
            model.add_constraint(format!("recovery_after_shortfall[station={}]", y + 1), twice, Sense::Ge, k + s)?;
        }
    }
    Ok(BuiltPhase2 {
        model,
        layout: Phase2Layout { z: 2, subscribe: vec![ms], stages: vec![vec![vec![row]]] },
        instance: det,
        types,
    })
}

/// Reads a plan out of a model assignment (integer values rounded).
pub fn decode_phase2(built: &BuiltPhase2, x: &[f64]) -> Phase2Plan {
    let r = |id: usize| libm::round(x[id]).max(0.0) as u32;
    let subscriptions = built.layout.subscribe.iter().map(|s| s.iter().map(|&id| r(id) as u8).collect()).collect();
    let decisions = built
        .layout
        .stages
        .iter()
        .map(|slot| {
            slot.iter()
                .map(|stage| {
                    stage
                        .iter()
                        .map(|prefix| {
                            prefix
                                .iter()
                                .map(|v| {
                                    let offload: Vec<u32> = v.offload.iter().map(|&id| r(id)).collect();
                                    let threshold = match &v.threshold {
                                        Some(th) => th.iter().map(|&id| r(id) as u8).collect(),
                                        None => offload.iter().map(|&o| (o > 0) as u8).collect(),
                                    };
                                    StageDecision { local: r(v.local), offload, threshold }
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Phase2Plan {
        z: built.layout.z,
        uav_types: built.types.clone(),
        subscriptions,
        decisions,
        expected_cost: f64::NAN,
        stage_costs: Vec::new(),
        optimal: false,
        nodes_explored: 0,
    }
}

/// Expected cost per stage of `plan`, recomputed from the cost model.
pub fn expected_stage_costs(inst: &NetworkInstance, plan: &Phase2Plan) -> Result<Vec<f64>> {
    let tree = &inst.tree;
    let z = plan.z;
    if z != tree.stages() || plan.decisions.len() != inst.time_slots {
        return Err(Error::InvalidArgument("plan shape does not match the instance".into()));
    }
    let costs = cost_table(inst, &plan.uav_types)?;
    let mut out = vec![0.0; z];
    for t in 0..inst.time_slots {
        out[0] += plan.subscriptions[t].iter().map(|&s| s as f64).sum::<f64>() * inst.costs.subscription;
        for stage in 2..=z {
            let gated = stage >= 3 || inst.options.gate_stage2_threshold;
            let mult = inst.options.hover_multiplier(stage);
            let per = &plan.decisions[t][stage - 2];
            if per.len() != tree.prefix_count(stage) {
                return Err(Error::InvalidArgument(format!("plan has wrong prefix count at stage {stage}")));
            }
            for (p, row) in per.iter().enumerate() {
                let prob = tree.prefix_probability(stage, p);
                let lam = tree.demand_index(stage, p);
                let mut acc = 0.0;
                for (y, d) in row.iter().enumerate() {
                    let c = &costs[t][lam][y];
                    acc += d.local as f64 * c.local;
                    acc += d.offload.iter().zip(&c.offload).map(|(&o, &u)| o as f64 * u).sum::<f64>();
                    if gated {
                        acc += d.threshold.iter().map(|&h| h as f64).sum::<f64>() * c.threshold * mult;
                    }
                    if stage == 2 {
                        acc += c.decode;
                        if !gated {
                            acc += c.threshold * mult;
                        }
                    }
                }
                out[stage - 1] += prob * acc;
            }
        }
        if z >= 3 {
            for p in 0..tree.prefix_count(z) {
                let open: u32 = (0..inst.stations.len()).map(|y| tree.effective_flag(z, p, y) as u32).sum();
                out[z - 1] += tree.prefix_probability(z, p) * open as f64 * inst.costs.terminal_penalty;
            }
        }
    }
    Ok(out)
}

fn finish(built: &BuiltPhase2, sol: &crate::milp::Solution) -> Result<Phase2Plan> {
    let mut plan = decode_phase2(built, &sol.assignment);
    plan.optimal = sol.status == SolveStatus::Optimal;
    plan.nodes_explored = sol.nodes_explored;
    plan.stage_costs = expected_stage_costs(&built.instance, &plan)?;
    plan.expected_cost = plan.stage_costs.iter().sum();
    let gap = (plan.expected_cost - sol.objective).abs();
    if gap > 1e-6 * (1.0 + sol.objective.abs()) {
        return Err(Error::Internal(format!(
            "stage breakdown {} disagrees with objective {}",
            plan.expected_cost, sol.objective
        )));
    }
    plan.expected_cost = sol.objective;
    Ok(plan)
}

/// Solves a built model; a node-limited run with an incumbent returns a non-optimal plan.
pub fn solve_built_phase2(built: &BuiltPhase2, opts: &SolveOptions) -> Result<Phase2Plan> {
    let sol = solve_exact(&built.model, opts);
    match sol.status {
        SolveStatus::Optimal => finish(built, &sol),
        SolveStatus::NodeLimit if sol.has_assignment() => finish(built, &sol),
        SolveStatus::NodeLimit => Err(Error::NodeLimit(format!(
            "no feasible plan after {} nodes",
            sol.nodes_explored
        ))),
        SolveStatus::Infeasible => Err(Error::Infeasible(format!("{} has no feasible plan", built.model.name))),
        SolveStatus::Unbounded => Err(Error::Internal(format!("{} reported unbounded", built.model.name))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Formulation {
    Sip,
    Dip { demand: Vec<u32>, shortfall: Vec<f64> },
}

pub fn solve_phase2(
    inst: &NetworkInstance,
    types: &TypeAssignment,
    formulation: &Formulation,
    opts: &SolveOptions,
) -> Result<Phase2Plan> {
    match formulation {
        Formulation::Sip => solve_built_phase2(&build_phase2_sip(inst, types)?, opts),
        Formulation::Dip { demand, shortfall } => {
            let first = types.first().ok_or_else(|| Error::InvalidArgument("empty type assignment".into()))?;
            solve_built_phase2(&build_phase2_dip(inst, first, demand, shortfall)?, opts)
        }
    }
}

/// Subscriptions and stage-2 counts held fixed when re-optimizing later recourse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrozenDecisions {
    /// `[slot][bs]`
    pub subscriptions: Vec<Vec<u8>>,
    /// `[slot][demand scenario][station]` as `(local, offload per bs)`.
    pub stage2: Vec<Vec<Vec<(u32, Vec<u32>)>>>,
}

/// Fixes a copy count at `value`, widening any indicator link whose big-M was
/// sized from the count's previous upper bound.
pub fn fix_count(model: &mut IPModel, id: usize, value: f64) -> Result<()> {
    model.set_bounds(id, value, value)?;
    for r in 0..model.constraints.len() {
        let c = &model.constraints[r];
        if c.sense != Sense::Le || c.rhs != 0.0 || !c.terms.iter().any(|&(j, a)| j == id && a > 0.0) {
            continue;
        }
        let indicators: Vec<usize> = (0..c.terms.len()).filter(|&t| c.terms[t].1 < 0.0).collect();
        if indicators.len() != 1 {
            continue;
        }
        let reach: f64 =
            c.terms.iter().filter(|t| t.1 > 0.0).map(|&(j, a)| a * model.variables[j].upper).sum();
        let t = indicators[0];
        let coef = &mut model.constraints[r].terms[t].1;
        if -*coef < reach {
            *coef = -reach;
        }
    }
    Ok(())
}

/// Optimizes stages 3..z with subscriptions and stage-2 counts fixed.
pub fn solve_phase2_frozen(
    inst: &NetworkInstance,
    types: &TypeAssignment,
    frozen: &FrozenDecisions,
    opts: &SolveOptions,
) -> Result<Phase2Plan> {
    let mut built = build_phase2_sip(inst, types)?;
    for t in 0..inst.time_slots {
        for (f, &id) in built.layout.subscribe[t].iter().enumerate() {
            let v = frozen.subscriptions[t][f] as f64;
            built.model.set_bounds(id, v, v)?;
        }
        for (lam, row) in built.layout.stages[t][0].clone().iter().enumerate() {
            for (y, vars) in row.iter().enumerate() {
                let (l, o) = &frozen.stage2[t][lam][y];
                fix_count(&mut built.model, vars.local, *l as f64)?;
                for (f, &id) in vars.offload.iter().enumerate() {
                    fix_count(&mut built.model, id, o[f] as f64)?;
                }
            }
        }
    }
    solve_built_phase2(&built, opts)
}

/// Every recovery, capacity or subscription rule the plan breaks.
pub fn plan_violations(inst: &NetworkInstance, plan: &Phase2Plan) -> Vec<String> {
    let tree = &inst.tree;
    let k = inst.split.k;
    let mut out = Vec::new();
    for t in 0..plan.decisions.len() {
        for stage in 2..=plan.z {
            for (p, row) in plan.decisions[t][stage - 2].iter().enumerate() {
                for f in 0..inst.base_stations.len() {
                    let load: u32 = row.iter().map(|d| d.offload[f]).sum();
                    if load > inst.base_stations[f].servers {
                        out.push(format!("slot {t} stage {stage} prefix {p}: bs {f} load {load} over capacity"));
                    }
                    if load > 0 && plan.subscriptions[t][f] == 0 {
                        out.push(format!("slot {t} stage {stage} prefix {p}: offload to unsubscribed bs {f}"));
                    }
                }
                for (y, d) in row.iter().enumerate() {
                    let sent: u32 = d.offload.iter().sum();
                    if stage == 2 && d.local + sent < k {
                        out.push(format!("slot {t} prefix {p} station {y}: {} copies below threshold {k}", d.local + sent));
                    }
                    if stage < 3 {
                        continue;
                    }
                    let chain = tree.effective_flag(stage, p, y) as i64;
                    let mag = tree.effective_magnitude(stage, p, y) as i64;
                    let prev = &plan.decisions[t][stage - 3][tree.parent(stage, p)][y];
                    let mut locals = 0i64;
                    for i in 2..stage {
                        locals += plan.decisions[t][i - 2][tree.ancestor(stage, p, i)][y].local as i64;
                    }
                    let prev_sent: i64 = prev.offload.iter().map(|&o| o as i64).sum();
                    if prev_sent + chain * locals < chain * mag {
                        out.push(format!("slot {t} stage {stage} prefix {p} station {y}: shortfall not covered"));
                    }
                    let mut returned = 0i64;
                    let mut need = k as i64;
                    for i in 2..=stage {
                        let di = &plan.decisions[t][i - 2][tree.ancestor(stage, p, i)][y];
                        returned += di.local as i64 + di.offload.iter().map(|&o| o as i64).sum::<i64>();
                    }
                    for jj in 3..=stage {
                        let pj = tree.ancestor(stage, p, jj);
                        if tree.effective_flag(jj, pj, y) == 1 {
                            need += tree.effective_magnitude(jj, pj, y) as i64;
                            for i in 2..jj {
                                returned += plan.decisions[t][i - 2][tree.ancestor(stage, p, i)][y].local as i64;
                            }
                        }
                    }
                    if returned < need {
                        out.push(format!("slot {t} stage {stage} prefix {p} station {y}: {returned} returned < {need}"));
                    }
                }
            }
        }
    }
    out
}
