use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::instance::NetworkInstance;
use crate::cost::{on_demand_cost, reservation_cost};
use crate::error::{Error, Result};
use crate::milp::{solve_exact, IPModel, Sense, SolveOptions, SolveStatus, VarKind};

/// Variable ids of a built reservation model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase1Layout {
    /// `[slot][station][type]`
    pub reserve: Vec<Vec<Vec<usize>>>,
    /// `[slot][weather][station]`
    pub recourse: Vec<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuiltPhase1 {
    pub model: IPModel,
    pub layout: Phase1Layout,
}

pub fn build_phase1(inst: &NetworkInstance) -> Result<BuiltPhase1> {
    inst.validate()?;
    let big = inst.largest_type();
    let c = &inst.costs;
    let on_demand = on_demand_cost(&inst.uav_types[big], &inst.uav_types, c)?;
    let mut model = IPModel::new("uav_type_allocation");
    let (nt, ny, nx) = (inst.time_slots, inst.stations.len(), inst.uav_types.len());
    let nw = inst.tree.weather.len();
    let mut reserve = vec![vec![Vec::with_capacity(nx); ny]; nt];
    let mut recourse = vec![vec![Vec::with_capacity(ny); nw]; nt];
    for t in 0..nt {
        for y in 0..ny {
            for x in 0..nx {
                let id = model.add_var(format!("T[slot={}][station={}][type={}]", t + 1, y + 1, x + 1), VarKind::Binary, 0.0, 1.0)?;
                model.add_objective(id, reservation_cost(&inst.uav_types[x], c));
                reserve[t][y].push(id);
            }
        }
        for (mu, w) in inst.tree.weather.iter().enumerate() {
            for y in 0..ny {
                let id = model.add_var(
                    format!("T_X[slot={}][station={}][weather={}]", t + 1, y + 1, mu + 1),
                    VarKind::Binary,
                    0.0,
                    1.0,
                )?;
                model.add_objective(id, w.probability * (on_demand + c.crash_penalty));
                recourse[t][mu].push(id);
            }
        }
    }
    for t in 0..nt {
        for y in 0..ny {
            let terms = reserve[t][y].iter().map(|&id| (id, 1.0));
            model.add_constraint(format!("reserve_one[slot={}][station={}]", t + 1, y + 1), terms, Sense::Eq, 1.0)?;
        }
        for (mu, w) in inst.tree.weather.iter().enumerate() {
            for y in 0..ny {
                let calm = 1.0 - w.g[y] as f64;
                let mut terms: Vec<(usize, f64)> = (0..big).map(|x| (reserve[t][y][x], calm)).collect();
                terms.push((reserve[t][y][big], 1.0));
                terms.push((recourse[t][mu][y], 1.0));
                model.add_constraint(
                    format!("survive[slot={}][station={}][weather={}]", t + 1, y + 1, mu + 1),
                    terms,
                    Sense::Eq,
                    1.0,
                )?;
            }
        }
    }
    Ok(BuiltPhase1 { model, layout: Phase1Layout { reserve, recourse } })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase1Plan {
    /// Reserved type index per `[slot][station]`.
    pub reservations: Vec<Vec<usize>>,
    /// On-demand largest-type hire per `[slot][weather][station]`.
    pub recourse: Vec<Vec<Vec<u8>>>,
    pub expected_cost: f64,
    pub optimal: bool,
    pub nodes_explored: u64,
}

impl Phase1Plan {
    /// UAV type actually flying at each station of `slot` under weather scenario `mu`.
    pub fn flying_types(&self, slot: usize, mu: usize, largest: usize) -> Vec<usize> {
        self.reservations[slot]
            .iter()
            .zip(&self.recourse[slot][mu])
            .map(|(&x, &r)| if r == 1 { largest } else { x })
            .collect()
    }
}

pub fn decode_phase1(built: &BuiltPhase1, x: &[f64]) -> (Vec<Vec<usize>>, Vec<Vec<Vec<u8>>>) {
    let on = |id: usize| x[id] > 0.5;
    let reservations = built
        .layout
        .reserve
        .iter()
        .map(|slot| slot.iter().map(|types| types.iter().position(|&id| on(id)).unwrap_or(0)).collect())
        .collect();
    let recourse = built
        .layout
        .recourse
        .iter()
        .map(|slot| slot.iter().map(|w| w.iter().map(|&id| on(id) as u8).collect()).collect())
        .collect();
    (reservations, recourse)
}

pub fn solve_built_phase1(built: &BuiltPhase1, opts: &SolveOptions) -> Result<Phase1Plan> {
    let sol = solve_exact(&built.model, opts);
    match sol.status {
        SolveStatus::Optimal | SolveStatus::NodeLimit if sol.has_assignment() => {}
        SolveStatus::NodeLimit => return Err(Error::NodeLimit("no reservation plan found within the node limit".into())),
        s => return Err(Error::Internal(format!("reservation model reported {s:?}"))),
    }
    let (reservations, recourse) = decode_phase1(built, &sol.assignment);
    Ok(Phase1Plan {
        reservations,
        recourse,
        expected_cost: sol.objective,
        optimal: sol.status == SolveStatus::Optimal,
        nodes_explored: sol.nodes_explored,
    })
}

pub fn solve_phase1(inst: &NetworkInstance, opts: &SolveOptions) -> Result<Phase1Plan> {
    solve_built_phase1(&build_phase1(inst)?, opts)
}

/// Reservation plan with every station forced to reserve type `x`.
pub fn solve_phase1_forced(inst: &NetworkInstance, x: usize, opts: &SolveOptions) -> Result<Phase1Plan> {
    if x >= inst.uav_types.len() {
        return Err(Error::InvalidArgument(format!("no UAV type with index {x}")));
    }
    let mut built = build_phase1(inst)?;
    for slot in built.layout.reserve.clone() {
        for types in slot {
            built.model.set_bounds(types[x], 1.0, 1.0)?;
        }
    }
    solve_built_phase1(&built, opts)
}
