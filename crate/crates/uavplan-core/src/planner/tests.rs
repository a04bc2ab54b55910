use alloc::vec;
use alloc::vec::Vec;

use super::fixtures::*;
use super::*;
use crate::milp::{solve_enumerate, SolveOptions};
use crate::scenario::{model_size_phase2, DemandScenario, ShortfallScenario};

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn stage2(plan: &Phase2Plan, lam: usize) -> Vec<(u32, Vec<u32>)> {
    plan.decisions[0][0][lam].iter().map(|d| (d.local, d.offload.clone())).collect()
}

#[test]
fn staged_z3_local_only_for_smallest_demand() {
    let inst = staged_instance(3);
    let plan = solve_phase2(&inst, &all_type(&inst, 2), &Formulation::Sip, &opts()).unwrap();
    assert!(plan.optimal);
    // demand order 480, 240, 1080, 360
    for (l, o) in stage2(&plan, 1) {
        assert_eq!((l, o.iter().sum::<u32>()), (4, 0));
    }
    for lam in [0, 2, 3] {
        for (l, o) in stage2(&plan, lam) {
            assert_eq!(l, 0);
            assert_eq!(o.iter().sum::<u32>(), 8);
        }
        let per_bs: Vec<u32> = (0..2).map(|f| stage2(&plan, lam).iter().map(|r| r.1[f]).sum()).collect();
        assert_eq!(per_bs, vec![24, 24]);
    }
    assert!(plan_violations(&inst, &plan).is_empty());
}

#[test]
fn staged_z5_only_local() {
    let inst = staged_instance(5);
    let plan = solve_phase2(&inst, &all_type(&inst, 2), &Formulation::Sip, &opts()).unwrap();
    assert!(plan.optimal);
    assert_eq!(plan.subscriptions, vec![vec![0, 0]]);
    for stage in &plan.decisions[0] {
        for d in stage.iter().flatten() {
            assert!(d.offload.iter().all(|&o| o == 0));
        }
    }
    for lam in 0..4 {
        assert!(stage2(&plan, lam).iter().all(|r| r.0 == 4));
    }
}

#[test]
fn stage_costs_match_objective() {
    let inst = staged_instance(3);
    let plan = solve_phase2(&inst, &all_type(&inst, 2), &Formulation::Sip, &opts()).unwrap();
    assert_eq!(plan.stage_costs.len(), 3);
    let sum: f64 = plan.stage_costs.iter().sum();
    assert!((sum - plan.expected_cost).abs() < 1e-6);
    assert_eq!(plan.stage_costs[0], 2.0);
}

#[test]
fn builder_matches_sizing() {
    for z in 2..=4 {
        for gate in [false, true] {
            for per_bs in [false, true] {
                let mut inst = staged_instance(z);
                inst.options.gate_stage2_threshold = gate;
                inst.options.threshold_per_bs = per_bs;
                let built = build_phase2_sip(&inst, &all_type(&inst, 1)).unwrap();
                assert_eq!(built.model.size_with_domain_rows(), model_size_phase2(&shape_of(&inst)));
            }
        }
    }
}

#[test]
fn z2_has_no_later_stages() {
    let inst = staged_instance(2);
    let plan = solve_phase2(&inst, &all_type(&inst, 0), &Formulation::Sip, &opts()).unwrap();
    assert_eq!(plan.z, 2);
    assert_eq!(plan.decisions[0].len(), 1);
    assert_eq!(plan.stage_costs.len(), 2);
}

#[test]
fn dip_prefers_local_when_offload_is_dearer() {
    let mut inst = tiny_instance(6, 240);
    inst.costs.service_fee = 10.0;
    let plan = solve_phase2(&inst, &all_type(&inst, 2), &Formulation::Dip { demand: vec![240], shortfall: vec![0.0] }, &opts())
        .unwrap();
    assert_eq!(stage2(&plan, 0), vec![(4, vec![0])]);
    assert_eq!(plan.subscriptions, vec![vec![0]]);
}

#[test]
fn dip_capacity_forces_locals() {
    let mut inst = tiny_instance(2, 1080);
    inst.costs.service_fee = 0.0;
    let plan =
        solve_phase2(&inst, &all_type(&inst, 2), &Formulation::Dip { demand: vec![1080], shortfall: vec![0.0] }, &opts())
            .unwrap();
    let (l, o) = &stage2(&plan, 0)[0];
    assert!(o[0] <= 2);
    assert!(*l >= 2);
    assert!(l + o[0] >= 4);
}

#[test]
fn dip_matches_enumeration() {
    for s in [0.0, 2.0, 3.0] {
        let inst = tiny_instance(6, 480);
        let built = build_phase2_dip(&inst, &[2], &[480], &[s]).unwrap();
        let exact = solve_built_phase2(&built, &opts()).unwrap();
        let brute = solve_enumerate(&built.model, 1 << 20).unwrap();
        assert!((exact.expected_cost - brute.objective).abs() < 1e-9, "S={s}");
    }
}

#[test]
fn sip_matches_enumeration_on_tiny_tree() {
    let mut inst = tiny_instance(3, 480);
    inst.tree.shortfall = vec![vec![
        ShortfallScenario { f: vec![1], magnitude: vec![2], probability: 0.5 },
        ShortfallScenario { f: vec![0], magnitude: vec![0], probability: 0.5 },
    ]];
    let built = build_phase2_sip(&inst, &all_type(&inst, 2)).unwrap();
    let exact = solve_built_phase2(&built, &opts()).unwrap();
    let brute = solve_enumerate(&built.model, 1 << 24).unwrap();
    assert!((exact.expected_cost - brute.objective).abs() < 1e-9);
}

#[test]
fn degenerate_tree_sip_equals_dip() {
    let mut inst = staged_instance(3);
    inst.options.gate_stage2_threshold = true;
    inst.tree.demand = vec![DemandScenario { d: vec![480, 240, 1080, 360, 480, 240], probability: 1.0 }];
    inst.tree.shortfall = vec![vec![ShortfallScenario { f: vec![0; 6], magnitude: vec![0; 6], probability: 1.0 }]];
    let types = all_type(&inst, 1);
    let sip = solve_phase2(&inst, &types, &Formulation::Sip, &opts()).unwrap();
    let dip = solve_phase2(
        &inst,
        &types,
        &Formulation::Dip { demand: inst.tree.demand[0].d.clone(), shortfall: vec![0.0; 6] },
        &opts(),
    )
    .unwrap();
    assert!((sip.expected_cost - dip.expected_cost).abs() < 1e-9);
}

#[test]
fn forced_offload_curve_has_interior_minimum() {
    let inst = forced_offload_instance();
    let types = all_type(&inst, 2);
    let free = solve_phase2(&inst, &types, &Formulation::Sip, &opts()).unwrap();
    let chosen = free.decisions[0][0][0][0].offload[0];
    let mut curve = Vec::new();
    for v in 4..=12u32 {
        let mut built = build_phase2_sip(&inst, &types).unwrap();
        for vars in &built.layout.stages[0][0][0].clone() {
            fix_count(&mut built.model, vars.offload[0], v as f64).unwrap();
        }
        let plan = solve_built_phase2(&built, &opts()).unwrap();
        curve.push((v, plan.stage_costs[1], plan.stage_costs[2], plan.expected_cost));
    }
    for w in curve.windows(2) {
        assert!(w[1].1 > w[0].1);
        assert!(w[1].2 <= w[0].2 + 1e-12);
    }
    let best = curve.iter().min_by(|a, b| a.3.total_cmp(&b.3)).unwrap();
    assert!(best.0 > 4 && best.0 < 12);
    assert_eq!(best.0, chosen);
    assert!(free.decisions[0][0][0].iter().all(|d| d.offload[0] == chosen));
}

#[test]
fn evf_uses_mean_demand() {
    let mut inst = tiny_instance(6, 240);
    inst.tree.demand =
        vec![DemandScenario { d: vec![240], probability: 0.5 }, DemandScenario { d: vec![480], probability: 0.5 }];
    assert_eq!(mean_demand(&inst), vec![360]);
    inst.tree.demand =
        vec![DemandScenario { d: vec![241], probability: 0.5 }, DemandScenario { d: vec![480], probability: 0.5 }];
    // 360.5 rounds up
    assert_eq!(mean_demand(&inst), vec![361]);
}

#[test]
fn evf_equals_sip_without_uncertainty() {
    let mut inst = staged_instance(3);
    inst.options.gate_stage2_threshold = true;
    inst.tree.demand.truncate(1);
    inst.tree.demand[0].probability = 1.0;
    let types = all_type(&inst, 2);
    let sip = solve_phase2(&inst, &types, &Formulation::Sip, &opts()).unwrap();
    let evf = evf_plan(&inst, &types, &opts()).unwrap();
    assert!((sip.expected_cost - evf.expected_cost).abs() < 1e-9);
}

#[test]
fn evf_and_random_never_beat_sip() {
    let inst = staged_instance(3);
    let types = all_type(&inst, 2);
    let sip = solve_phase2(&inst, &types, &Formulation::Sip, &opts()).unwrap();
    let evf = evf_plan(&inst, &types, &opts()).unwrap();
    assert!(sip.expected_cost <= evf.expected_cost + 1e-9);
    for seed in 0..3 {
        let r = random_plan(&inst, &types, seed, &opts()).unwrap();
        assert!(sip.expected_cost <= r.expected_cost + 1e-9);
    }
}

#[test]
fn random_plan_is_deterministic_and_feasible() {
    let inst = staged_instance(3);
    let types = all_type(&inst, 2);
    let a = random_plan(&inst, &types, 7, &opts()).unwrap();
    let b = random_plan(&inst, &types, 7, &opts()).unwrap();
    assert_eq!(a, b);
    assert!(plan_violations(&inst, &a).is_empty());
    let c = random_plan(&inst, &types, 8, &opts()).unwrap();
    assert_ne!(a.decisions, c.decisions);
}

#[test]
fn random_plan_gives_up_on_impossible_instances() {
    let mut inst = tiny_instance(1, 240);
    inst.options.force_no_local = true;
    let err = random_plan(&inst, &all_type(&inst, 0), 1, &opts()).unwrap_err();
    assert!(matches!(err, crate::Error::Infeasible(_)));
}

#[test]
fn phase1_calm_weather_reserves_cheapest() {
    let plan = solve_phase1(&weather_instance(3, 0.0, 2.0), &opts()).unwrap();
    assert_eq!(plan.reservations, vec![vec![0, 0, 0]]);
    assert!(plan.recourse.iter().flatten().flatten().all(|&r| r == 0));
}

#[test]
fn phase1_windy_reserves_largest() {
    let plan = solve_phase1(&weather_instance(2, 0.3, 2.0), &opts()).unwrap();
    assert_eq!(plan.reservations, vec![vec![2, 2]]);
    let plan = solve_phase1(&weather_instance(2, 1.0, 0.0), &opts()).unwrap();
    assert_eq!(plan.reservations, vec![vec![2, 2]]);
}

#[test]
fn phase1_flip_brackets_analytic_point() {
    // (5.2 - 2.375) / 0.3 - 7.8
    let flip = (5.2 - 2.375) / 0.3 - 7.8;
    let below = solve_phase1(&weather_instance(1, 0.3, flip - 0.01), &opts()).unwrap();
    let above = solve_phase1(&weather_instance(1, 0.3, flip + 0.01), &opts()).unwrap();
    assert_eq!(below.reservations, vec![vec![0]]);
    assert_eq!(above.reservations, vec![vec![2]]);
    assert_eq!(below.recourse[0][0], vec![1]);
}

#[test]
fn phase1_decoded_plan_survives_every_weather() {
    let inst = weather_instance(4, 0.4, 1.0);
    let plan = solve_phase1(&inst, &opts()).unwrap();
    for (mu, w) in inst.tree.weather.iter().enumerate() {
        for y in 0..4 {
            let x = plan.reservations[0][y];
            let survives = x == 2 || w.g[y] == 0;
            assert_eq!(survives, plan.recourse[0][mu][y] == 0);
        }
    }
}

#[test]
fn two_phase_composes_costs() {
    let mut inst = staged_instance(3);
    inst.tree.weather = weather_instance(6, 0.3, 2.0).tree.weather;
    let plan = plan_two_phase(&inst, &opts()).unwrap();
    assert_eq!(plan.task_plans.len(), 1);
    let expected = plan.phase1.expected_cost + plan.task_plans[0].expected_cost;
    assert!((plan.expected_cost - expected).abs() < 1e-9);
}

#[test]
fn type_assignment_shape_is_checked() {
    let inst = staged_instance(3);
    assert!(build_phase2_sip(&inst, &vec![vec![0; 5]]).is_err());
    assert!(build_phase2_sip(&inst, &vec![vec![9; 6]]).is_err());
    assert!(build_phase2_dip(&inst, &[0; 6], &[0; 6], &[0.0; 6]).is_err());
}
