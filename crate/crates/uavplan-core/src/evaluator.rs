//! Plan evaluation (exact and sampled), parameter sweeps and baseline comparison.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cdc::CodeSplit;
use crate::error::{Error, Result};
use crate::milp::SolveOptions;
use crate::planner::{
    cost_table, evf_plan, expected_stage_costs, plan_two_phase_from, plan_violations, random_plan, solve_phase1,
    solve_phase1_forced, solve_phase2, weather_outcomes, Formulation, NetworkInstance, Phase1Plan, Phase2Plan,
    TypeAssignment,
};
use crate::scenario::{ShortfallScenario, WeatherScenario};

/// Expected cost of a plan by full enumeration of the scenario tree.
pub fn exact_expected_cost(inst: &NetworkInstance, plan: &Phase2Plan) -> Result<f64> {
    Ok(expected_stage_costs(inst, plan)?.iter().sum())
}

fn check_shape(inst: &NetworkInstance, plan: &Phase2Plan) -> Result<()> {
    let tree = &inst.tree;
    let ok = plan.z == tree.stages()
        && plan.uav_types.len() == inst.time_slots
        && plan.subscriptions.len() == inst.time_slots
        && plan.decisions.len() == inst.time_slots
        && plan.subscriptions.iter().all(|s| s.len() == inst.base_stations.len())
        && plan.decisions.iter().all(|slot| {
            slot.len() == plan.z - 1
                && slot.iter().enumerate().all(|(i, stage)| {
                    stage.len() == tree.prefix_count(i + 2)
                        && stage.iter().all(|row| {
                            row.len() == inst.stations.len()
                                && row.iter().all(|d| {
                                    d.offload.len() == inst.base_stations.len()
                                        && d.threshold.len() == inst.base_stations.len()
                                })
                        })
                })
        });
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument("plan shape does not match the instance".into()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub mean_cost: f64,
    pub std_error: f64,
    pub n_samples: u64,
    /// Mean realized cost per stage, index 0 is stage 1.
    pub stage_breakdown: Vec<f64>,
    pub seed: u64,
}

fn pick(rng: &mut ChaCha8Rng, probs: impl Iterator<Item = f64>) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in probs.enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Monte Carlo estimate of a plan's cost over sampled scenario paths.
pub fn evaluate_plan(plan: &Phase2Plan, inst: &NetworkInstance, n_samples: u64, seed: u64) -> Result<EvaluationReport> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be positive".into()));
    }
    inst.validate()?;
    check_shape(inst, plan)?;
    if let Some(v) = plan_violations(inst, plan).first() {
        return Err(Error::InvalidArgument(format!("plan is infeasible: {v}")));
    }
    let tree = &inst.tree;
    let z = plan.z;
    let costs = cost_table(inst, &plan.uav_types)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sums = vec![0.0; z];
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for i in 0..n_samples {
        let mut stage = vec![0.0; z];
        for t in 0..inst.time_slots {
            stage[0] += plan.subscriptions[t].iter().map(|&s| s as f64).sum::<f64>() * inst.costs.subscription;
            let lam = pick(&mut rng, tree.demand.iter().map(|d| d.probability));
            let mut prefix = lam;
            for j in 2..=z {
                if j >= 3 {
                    let set = &tree.shortfall[j - 3];
                    prefix = prefix * set.len() + pick(&mut rng, set.iter().map(|s| s.probability));
                }
                let gated = j >= 3 || inst.options.gate_stage2_threshold;
                let mult = inst.options.hover_multiplier(j);
                for (y, d) in plan.decisions[t][j - 2][prefix].iter().enumerate() {
                    let c = &costs[t][lam][y];
                    let mut acc = d.local as f64 * c.local;
                    for (f, &o) in d.offload.iter().enumerate() {
                        acc += o as f64 * c.offload[f];
                        if gated {
                            acc += d.threshold[f] as f64 * c.threshold * mult;
                        }
                    }
                    if j == 2 {
                        acc += c.decode + if gated { 0.0 } else { c.threshold * mult };
                    }
                    stage[j - 1] += acc;
                }
            }
            if z >= 3 {
                let open = (0..inst.stations.len()).filter(|&y| tree.effective_flag(z, prefix, y) == 1).count();
                stage[z - 1] += open as f64 * inst.costs.terminal_penalty;
            }
        }
        let c: f64 = stage.iter().sum();
        let delta = c - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (c - mean);
        for (s, v) in sums.iter_mut().zip(&stage) {
            *s += v;
        }
    }
    let n = n_samples as f64;
    let var = if n_samples > 1 { m2.max(0.0) / (n - 1.0) } else { 0.0 };
    Ok(EvaluationReport {
        mean_cost: mean,
        std_error: libm::sqrt(var / n),
        n_samples,
        stage_breakdown: sums.iter().map(|s| s / n).collect(),
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Crash penalty added to on-demand hiring (reservation phase).
    #[serde(rename = "penalty_C_p")]
    PenaltyCp,
    /// Probability that every station sees strong wind (reservation phase).
    WeatherProb,
    /// Number of stages; the last shortfall set is repeated or dropped.
    Z,
    /// Hover cost multiplier for stages 3 and later.
    HoverMultiplier,
    /// Probability of the shortfall branch at every stage from 3.
    ShortfallProb,
    /// Code split `s` at fixed storage `m`.
    SplitS,
    /// UAV type (1-based) reserved at every station.
    UavType,
}

impl SweepParam {
    pub const ALL: [SweepParam; 7] = [
        SweepParam::PenaltyCp,
        SweepParam::WeatherProb,
        SweepParam::Z,
        SweepParam::HoverMultiplier,
        SweepParam::ShortfallProb,
        SweepParam::SplitS,
        SweepParam::UavType,
    ];

    /// Inverse of [`SweepParam::name`].
    pub fn from_name(name: &str) -> Option<SweepParam> {
        Self::ALL.iter().copied().find(|p| p.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::PenaltyCp => "penalty_C_p",
            SweepParam::WeatherProb => "weather_prob",
            SweepParam::Z => "z",
            SweepParam::HoverMultiplier => "hover_multiplier",
            SweepParam::ShortfallProb => "shortfall_prob",
            SweepParam::SplitS => "split_s",
            SweepParam::UavType => "uav_type",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParam,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub objective: f64,
    pub stage_costs: Vec<f64>,
    pub summary: String,
    pub optimal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: SweepParam,
    pub points: Vec<SweepPoint>,
}

pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("sweep grid is empty".into()));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("sweep grid values must be finite".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("sweep grid must be strictly increasing".into()));
    }
    Ok(())
}

fn whole(value: f64, what: &str, min: f64) -> Result<usize> {
    if value < min || value != libm::floor(value) {
        return Err(Error::InvalidArgument(format!("{what} must be an integer >= {min}, got {value}")));
    }
    Ok(value as usize)
}

fn probability(value: f64, what: &str) -> Result<f64> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidArgument(format!("{what} must lie in [0, 1], got {value}")));
    }
    Ok(value)
}

pub fn reserved_types(plan: &Phase1Plan) -> TypeAssignment {
    plan.reservations.clone()
}

/// Compact reservation decisions: 1-based types per station and the number of on-demand hires.
pub fn phase1_summary(plan: &Phase1Plan) -> String {
    let mut out = String::new();
    for (t, slot) in plan.reservations.iter().enumerate() {
        if t > 0 {
            out.push_str("; ");
        }
        let types: Vec<String> = slot.iter().map(|x| format!("{}", x + 1)).collect();
        out.push_str(&format!("types={}", types.join(",")));
        let hires: u32 = plan.recourse[t].iter().flatten().map(|&r| r as u32).sum();
        out.push_str(&format!(" recourse_hires={hires}"));
    }
    out
}

/// Compact stage-2 decisions: `L|O_1,O_2` per station for every demand scenario.
pub fn phase2_summary(plan: &Phase2Plan) -> String {
    let mut out = String::new();
    for (t, slot) in plan.decisions.iter().enumerate() {
        if t > 0 {
            out.push_str("; ");
        }
        let subs: Vec<String> = plan.subscriptions[t].iter().map(|s| format!("{s}")).collect();
        out.push_str(&format!("subs={}", subs.join(",")));
        for (lam, row) in slot[0].iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .map(|d| {
                    let o: Vec<String> = d.offload.iter().map(|o| format!("{o}")).collect();
                    format!("{}|{}", d.local, o.join(","))
                })
                .collect();
            out.push_str(&format!(" d{}=[{}]", lam + 1, cells.join(" ")));
        }
        let later: u64 = slot[1..]
            .iter()
            .flatten()
            .flatten()
            .map(|d| d.local as u64 + d.offload.iter().map(|&o| o as u64).sum::<u64>())
            .sum();
        out.push_str(&format!(" later_copies={later}"));
    }
    out
}

fn phase1_point(value: f64, plan: &Phase1Plan, inst: &NetworkInstance) -> Result<SweepPoint> {
    let reserve: f64 = plan
        .reservations
        .iter()
        .flatten()
        .map(|&x| crate::cost::reservation_cost(&inst.uav_types[x], &inst.costs))
        .sum();
    Ok(SweepPoint {
        value,
        objective: plan.expected_cost,
        stage_costs: vec![reserve, plan.expected_cost - reserve],
        summary: phase1_summary(plan),
        optimal: plan.optimal,
    })
}

fn phase2_point(value: f64, plan: &Phase2Plan) -> SweepPoint {
    SweepPoint {
        value,
        objective: plan.expected_cost,
        stage_costs: plan.stage_costs.clone(),
        summary: phase2_summary(plan),
        optimal: plan.optimal,
    }
}

fn solve_reserved(inst: &NetworkInstance, value: f64, opts: &SolveOptions) -> Result<SweepPoint> {
    let types = reserved_types(&solve_phase1(inst, opts)?);
    Ok(phase2_point(value, &solve_phase2(inst, &types, &Formulation::Sip, opts)?))
}

/// Instance with the swept parameter set to `value`.
pub fn apply_param(inst: &NetworkInstance, param: SweepParam, value: f64) -> Result<NetworkInstance> {
    let mut v = inst.clone();
    let ny = inst.stations.len();
    match param {
        SweepParam::PenaltyCp => {
            if !(value >= 0.0) {
                return Err(Error::InvalidArgument(format!("penalty must be >= 0, got {value}")));
            }
            v.costs.crash_penalty = value;
        }
        SweepParam::WeatherProb => {
            let p = probability(value, "weather probability")?;
            let strong = WeatherScenario { g: vec![1; ny], probability: p };
            let calm = WeatherScenario { g: vec![0; ny], probability: 1.0 - p };
            v.tree.weather = if p == 0.0 {
                vec![calm]
            } else if p == 1.0 {
                vec![strong]
            } else {
                vec![strong, calm]
            };
        }
        SweepParam::Z => {
            let z = whole(value, "z", 2.0)?;
            if z > 2 && v.tree.shortfall.is_empty() {
                return Err(Error::InvalidArgument("z sweep needs at least one shortfall stage to repeat".into()));
            }
            v.tree.shortfall.truncate(z - 2);
            while v.tree.shortfall.len() < z - 2 {
                let last = v.tree.shortfall.last().cloned().expect("non-empty checked above");
                v.tree.shortfall.push(last);
            }
            v.options.hover_multipliers.truncate(z - 1);
        }
        SweepParam::HoverMultiplier => {
            if !(value >= 0.0) {
                return Err(Error::InvalidArgument(format!("hover multiplier must be >= 0, got {value}")));
            }
            if v.tree.stages() < 3 {
                return Err(Error::InvalidArgument("hover multiplier sweep needs z >= 3".into()));
            }
            let first = v.options.hover_multiplier(2);
            v.options.hover_multipliers = core::iter::once(first).chain((3..=v.tree.stages()).map(|_| value)).collect();
        }
        SweepParam::ShortfallProb => {
            let p = probability(value, "shortfall probability")?;
            if v.tree.shortfall.is_empty() {
                return Err(Error::InvalidArgument("shortfall sweep needs z >= 3".into()));
            }
            for set in v.tree.shortfall.iter_mut() {
                let magnitude: Vec<u32> =
                    (0..ny).map(|y| set.iter().map(|s| s.magnitude[y] * s.f[y] as u32).max().unwrap_or(0)).collect();
                if magnitude.iter().all(|&a| a == 0) {
                    return Err(Error::InvalidArgument("shortfall sweep needs a stage with a positive magnitude".into()));
                }
                let hit = ShortfallScenario {
                    f: magnitude.iter().map(|&a| (a > 0) as u8).collect(),
                    magnitude: magnitude.clone(),
                    probability: p,
                };
                let miss = ShortfallScenario { f: vec![0; ny], magnitude: vec![0; ny], probability: 1.0 - p };
                *set = if p == 0.0 {
                    vec![miss]
                } else if p == 1.0 {
                    vec![hit]
                } else {
                    vec![hit, miss]
                };
            }
        }
        SweepParam::SplitS => {
            let s = whole(value, "s", 1.0)?;
            v.split = CodeSplit::with_storage(inst.split.m, s as u32)?;
        }
        SweepParam::UavType => {
            let x = whole(value, "uav type", 1.0)?;
            if x > inst.uav_types.len() {
                return Err(Error::InvalidArgument(format!("no UAV type {x}")));
            }
        }
    }
    v.validate()?;
    Ok(v)
}

/// Solves one grid point of a sweep.
pub fn sweep_point(inst: &NetworkInstance, param: SweepParam, value: f64, opts: &SolveOptions) -> Result<SweepPoint> {
    let v = apply_param(inst, param, value)?;
    match param {
        SweepParam::PenaltyCp | SweepParam::WeatherProb => phase1_point(value, &solve_phase1(&v, opts)?, &v),
        SweepParam::UavType => {
            let phase1 = solve_phase1_forced(&v, value as usize - 1, opts)?;
            let plan = plan_two_phase_from(&v, phase1, opts)?;
            let mut stage_costs = vec![plan.phase1.expected_cost];
            stage_costs.push(plan.expected_task_cost);
            let first = &plan.task_plans[plan.outcomes[0].plan];
            Ok(SweepPoint {
                value,
                objective: plan.expected_cost,
                stage_costs,
                summary: format!("{}; {}", phase1_summary(&plan.phase1), phase2_summary(first)),
                optimal: plan.optimal,
            })
        }
        _ => solve_reserved(&v, value, opts),
    }
}

pub fn sweep(inst: &NetworkInstance, spec: &SweepSpec, opts: &SolveOptions) -> Result<SweepResult> {
    check_grid(&spec.grid)?;
    let points = spec.grid.iter().map(|&v| sweep_point(inst, spec.parameter, v, opts)).collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { parameter: spec.parameter, points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub sip_cost: f64,
    pub evf_cost: f64,
    pub random_cost: f64,
    /// Total per seed, in seed order.
    pub random_costs: Vec<f64>,
    /// Reservation-phase cost included in every total.
    pub reservation_cost: f64,
}

/// Exact expected totals of the stochastic, expected-value and random plans, each
/// added to the reservation-phase cost and averaged over weather outcomes.
pub fn compare(inst: &NetworkInstance, seeds: &[u64], opts: &SolveOptions) -> Result<Comparison> {
    compare_with(inst, seeds, opts, |inst, types, seeds, opts| {
        seeds.iter().map(|&s| random_cost(inst, types, s, opts)).collect()
    })
}

/// Expected cost of the random plan for one seed.
pub fn random_cost(inst: &NetworkInstance, types: &TypeAssignment, seed: u64, opts: &SolveOptions) -> Result<f64> {
    exact_expected_cost(inst, &random_plan(inst, types, seed, opts)?)
}

/// `compare` with a caller-supplied way of costing the random plans over seeds.
pub fn compare_with<F>(inst: &NetworkInstance, seeds: &[u64], opts: &SolveOptions, random_costs: F) -> Result<Comparison>
where
    F: Fn(&NetworkInstance, &TypeAssignment, &[u64], &SolveOptions) -> Result<Vec<f64>>,
{
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("compare needs at least one seed".into()));
    }
    let phase1 = solve_phase1(inst, opts)?;
    let (distinct, outcomes) = weather_outcomes(inst, &phase1);
    let base = phase1.expected_cost;
    let mut out = Comparison {
        sip_cost: base,
        evf_cost: base,
        random_cost: base,
        random_costs: vec![base; seeds.len()],
        reservation_cost: base,
    };
    for (i, types) in distinct.iter().enumerate() {
        let weight: f64 = outcomes.iter().filter(|o| o.plan == i).map(|o| o.probability).sum();
        let sip = solve_phase2(inst, types, &Formulation::Sip, opts)?;
        let evf = evf_plan(inst, types, opts)?;
        out.sip_cost += weight * exact_expected_cost(inst, &sip)?;
        out.evf_cost += weight * exact_expected_cost(inst, &evf)?;
        for (acc, c) in out.random_costs.iter_mut().zip(random_costs(inst, types, seeds, opts)?) {
            *acc += weight * c;
        }
    }
    out.random_cost = out.random_costs.iter().sum::<f64>() / seeds.len() as f64;
    Ok(out)
}
