mod common;

use proptest::prelude::*;
use uavplan_core::cdc::{optimal_split, recovery_threshold, symbol_counts, CodeSplit, SplitObjective};
use uavplan_core::cost::{
    decode_cost, hover_threshold_cost, local_copy_cost, offload_copy_cost, on_demand_cost, reservation_cost,
};
use uavplan_core::physics::{compute_timings, hover_power, link_rate, propulsion_power, Position3D};

fn brute_split(m: u32, objective: SplitObjective) -> (u32, u32, u32) {
    let mut best: Option<(u32, u32, u32)> = None;
    for t in 1..=m {
        if m % t != 0 {
            continue;
        }
        let s = m / t;
        let k = t * t * (2 * s - 1);
        let take = match (best, objective) {
            (None, _) => true,
            (Some(b), SplitObjective::MaxK) => k > b.2,
            (Some(b), SplitObjective::MinK) => k < b.2,
        };
        if take {
            best = Some((s, t, k));
        }
    }
    best.unwrap()
}

#[test]
fn split_agrees_with_divisor_scan_up_to_10k() {
    for m in 1..=10_000u32 {
        for objective in [SplitObjective::MaxK, SplitObjective::MinK] {
            let got = optimal_split(m, objective).unwrap();
            assert_eq!((got.s, got.t, got.k), brute_split(m, objective), "m={m}");
        }
    }
}

proptest! {
    #[test]
    fn threshold_grows_with_s(s in 1u32..500, t in 1u32..60) {
        prop_assert!(recovery_threshold(s + 1, t).unwrap() > recovery_threshold(s, t).unwrap());
    }

    #[test]
    fn symbol_counts_scale_with_dimension(n in 1u32..400, c in 2u32..6, m_pow in 0u32..3) {
        let split = CodeSplit::with_storage(1 << m_pow, 1).unwrap();
        let a = symbol_counts(n, &split, 1, 1).unwrap();
        let b = symbol_counts(n * c, &split, 1, 1).unwrap();
        let c = c as f64;
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * y.abs().max(1.0);
        prop_assert!(close(b.d_comm_to, a.d_comm_to * c * c));
        prop_assert!(close(b.d_comm_fr, a.d_comm_fr * c * c));
        prop_assert!(close(b.d_cmp, a.d_cmp * c * c * c));
    }

    #[test]
    fn hover_is_zero_speed_propulsion(mass in 1.0f64..40.0, omega in 100.0f64..800.0) {
        let mut u = common::uav_types()[0].clone();
        u.mass = mass;
        u.blade_angular_velocity = omega;
        let env = common::env();
        prop_assert_eq!(propulsion_power(&u, &env, 0.0).unwrap(), hover_power(&u, &env));
    }

    #[test]
    fn rate_falls_with_distance_and_rises_with_power(
        a in -500.0f64..500.0, b in -500.0f64..500.0, extra in 1.0f64..400.0,
        p in 0.001f64..1.0, dp in 0.001f64..1.0,
    ) {
        let env = common::env();
        let mut u = common::uav_types()[1].clone();
        u.tx_power = p;
        let uav = Position3D { a: 0.0, b: 0.0, h: 100.0 };
        let near = Position3D { a, b, h: 20.0 };
        let far = Position3D { a: a + extra.copysign(a), b, h: 20.0 };
        let r_near = link_rate(&u, &env, &uav, &near).unwrap();
        prop_assert!(link_rate(&u, &env, &uav, &far).unwrap() < r_near);
        u.tx_power = p + dp;
        prop_assert!(link_rate(&u, &env, &uav, &near).unwrap() > r_near);
    }

    #[test]
    fn timings_linear_in_cycles_inverse_in_rate(n in 1u32..2000, c in 0.5f64..8.0) {
        let env = common::env();
        let split = CodeSplit::new(1, 2).unwrap();
        let u = common::uav_types()[2].clone();
        let base = compute_timings(&u, &env, n, &split);
        let mut more = u.clone();
        more.cycles_per_bit *= c;
        let scaled = compute_timings(&more, &env, n, &split);
        let mut fast = u.clone();
        fast.cpu_rate *= c;
        let quick = compute_timings(&fast, &env, n, &split);
        for (x, y, z) in [(base.0, scaled.0, quick.0), (base.1, scaled.1, quick.1), (base.2, scaled.2, quick.2)] {
            prop_assert!((y - c * x).abs() <= 1e-9 * y.abs().max(1e-300));
            prop_assert!((z - x / c).abs() <= 1e-9 * x.abs().max(1e-300));
        }
    }

    #[test]
    fn costs_nonnegative_and_homogeneous(n in 1u32..1500, ty in 0usize..3, c in 0.1f64..10.0, rate in 1e5f64..1e8) {
        let env = common::env();
        let split = CodeSplit::new(1, 2).unwrap();
        let fleet = common::uav_types();
        let u = &fleet[ty];
        let k = common::costs();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * y.abs().max(1e-300);

        let values = [
            reservation_cost(u, &k),
            on_demand_cost(&fleet[2], &fleet, &k).unwrap(),
            local_copy_cost(u, &env, n, &split, &k),
            offload_copy_cost(u, &env, n, &split, rate, &k).unwrap(),
            hover_threshold_cost(u, &env, n, &split, &k),
            decode_cost(u, &env, n, &split, &k),
        ];
        for v in values {
            prop_assert!(v.is_finite() && v >= 0.0);
        }

        let mut s = k.clone();
        s.reservation *= c;
        s.on_demand *= c;
        s.time *= c;
        s.hover *= c;
        prop_assert!(close(reservation_cost(u, &s), c * values[0]));
        prop_assert!(close(on_demand_cost(&fleet[2], &fleet, &s).unwrap(), c * values[1]));
        prop_assert!(close(local_copy_cost(u, &env, n, &split, &s), c * values[2]));
        prop_assert!(close(hover_threshold_cost(u, &env, n, &split, &s), c * values[4]));
        prop_assert!(close(decode_cost(u, &env, n, &split, &s), c * values[5]));

        let mut free = k.clone();
        free.service_fee = 0.0;
        let mut dear = free.clone();
        dear.time *= c;
        dear.energy *= c;
        let base = offload_copy_cost(u, &env, n, &split, rate, &free).unwrap();
        prop_assert!(close(offload_copy_cost(u, &env, n, &split, rate, &dear).unwrap(), c * base));
    }
}

#[test]
fn offload_versus_local_changes_sign_with_dimension() {
    let env = common::env();
    let split = CodeSplit::new(1, 2).unwrap();
    let u = &common::uav_types()[2];
    let k = common::costs();
    let uav = Position3D { a: 100.0, b: 100.0, h: 100.0 };
    let bs = Position3D { a: 300.0, b: 500.0, h: 20.0 };
    let rate = link_rate(u, &env, &uav, &bs).unwrap();
    let gap = |n| offload_copy_cost(u, &env, n, &split, rate, &k).unwrap() - local_copy_cost(u, &env, n, &split, &k);
    assert!(gap(60) > 0.0 && gap(120) > 0.0, "small copies are cheaper on board");
    for n in [240, 360, 480, 1080] {
        assert!(gap(n) < 0.0, "copy of a {n} task is cheaper on the link");
    }
    let crossover = (1..=1080).find(|&n| gap(n) < 0.0).unwrap();
    assert!((121..240).contains(&crossover), "{crossover}");
}
