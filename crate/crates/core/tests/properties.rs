//! Invariants over random inputs.

use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scatterchain::control::{required_disk_omega, synth_driver};
use scatterchain::dynamics::{
    apply_disk_collision, apply_wall_collision, disk_tangent, simulate, DiskState, InjectionSchedule, SystemState,
};
use scatterchain::geometry::{fixtures, wrap_angle, wrap_signed, AngularInterval, AngularIntervalSet, Chain, Side, Vec2};
use scatterchain::harness::{random_admissible, verify, Goal, Scenario, StateRanges, Trace, VerifyTolerances};
use scatterchain::Tolerances;

fn incoming(n_angle: f64, vn: f64, vt: f64) -> (Vec2, Vec2) {
    let n = Vec2::from_angle(n_angle);
    (n, n * -vn + disk_tangent(n) * vt)
}

fn random_state(seed: u64, n: usize) -> SystemState {
    let chain = Chain::new(fixtures::star_cell(), n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_admissible(&mut rng, &chain, &StateRanges::default(), &Tolerances::default())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn disk_collision_conserves_energy(a in 0.0..TAU, vn in 0.01..3.0f64, vt in -3.0..3.0f64, w in -3.0..3.0f64) {
        let (n, v) = incoming(a, vn, vt);
        let (out, d) = apply_disk_collision(v, DiskState::new(0.0, w), n, 1e-9).unwrap();
        let before = v.dot(v) + w * w;
        let after = out.dot(out) + d.omega * d.omega;
        prop_assert!((before - after).abs() <= 1e-12 * before.max(1.0));
    }

    #[test]
    fn disk_collision_reverses(a in 0.0..TAU, vn in 0.01..3.0f64, vt in -3.0..3.0f64, w in -3.0..3.0f64) {
        let (n, v) = incoming(a, vn, vt);
        let (out, d) = apply_disk_collision(v, DiskState::new(0.0, w), n, 1e-9).unwrap();
        let (back, e) = apply_disk_collision(-out, DiskState::new(0.0, -d.omega), n, 1e-9).unwrap();
        prop_assert!((-back).dist(v) < 1e-12 * (1.0 + v.norm()));
        prop_assert!((-e.omega - w).abs() < 1e-12 * (1.0 + w.abs()));
    }

    #[test]
    fn wall_reflection_is_an_isometry(a in 0.0..TAU, vn in 0.01..3.0f64, vt in -3.0..3.0f64) {
        let (n, v) = incoming(a, vn, vt);
        let out = apply_wall_collision(v, n).unwrap();
        prop_assert!((out.norm() - v.norm()).abs() < 1e-12 * v.norm());
        let back = apply_wall_collision(-out, n).unwrap();
        prop_assert!((-back).dist(v) < 1e-12 * (1.0 + v.norm()));
    }

    #[test]
    fn departure_angle_matches(vn in 0.1..3.0f64, alpha in -1.4..1.4f64) {
        let w = required_disk_omega(vn, alpha).unwrap();
        let (n, v) = incoming(0.3, vn, 0.7);
        let (out, _) = apply_disk_collision(v, DiskState::new(0.0, w), n, 1e-9).unwrap();
        let got = out.dot(disk_tangent(n)).atan2(out.dot(n));
        prop_assert!((got - alpha).abs() < 1e-12);
    }

    #[test]
    fn wrapping_lands_in_range(x in -1e3..1e3f64) {
        let w = wrap_angle(x);
        prop_assert!((0.0..TAU).contains(&w));
        let s = wrap_signed(x);
        prop_assert!(s > -PI && s <= PI);
        prop_assert!(wrap_signed(w - s).abs() < 1e-9);
    }

    #[test]
    fn interval_set_algebra(ivs in prop::collection::vec((0.0..TAU, 0.0..2.0f64), 0..6), other in prop::collection::vec((0.0..TAU, 0.0..2.0f64), 0..6)) {
        let a = AngularIntervalSet::from_intervals(ivs.iter().map(|&(s, l)| AngularInterval::new(s, l)));
        let b = AngularIntervalSet::from_intervals(other.iter().map(|&(s, l)| AngularInterval::new(s, l)));
        prop_assert!((a.measure() + a.complement().measure() - TAU).abs() < 1e-9);
        prop_assert!(a.union(&b).measure() <= a.measure() + b.measure() + 1e-9);
        prop_assert!(a.union(&b).measure() + a.intersection(&b).measure() - a.measure() - b.measure() < 1e-9);
        prop_assert!(a.symmetric_difference_measure(&a) < 1e-12);
        let sym = a.symmetric_difference_measure(&b);
        prop_assert!((sym - (a.union(&b).measure() - a.intersection(&b).measure())).abs() < 1e-9);
    }

    #[test]
    fn driver_sets_the_disk(current in -2.0..2.0f64, target in -2.0..2.0f64, delta in 0.05..3.0f64, phi in -PI..PI, right in any::<bool>()) {
        let side = if right { Side::Right } else { Side::Left };
        let tol = Tolerances::default();
        let mut s = SystemState::ground(Chain::new(fixtures::star_cell(), 2));
        let disk = s.chain.bath_cell(side);
        s.disks[disk] = DiskState::new(phi, current);
        let plan = synth_driver(&s.chain, side, current, target, delta, None, 0.0, 0).unwrap();
        prop_assert!(plan.delta_hat < delta);
        let sched = InjectionSchedule { injections: vec![plan.injection], ..Default::default() };
        let out = simulate(&s, &sched, delta, &tol).unwrap();
        prop_assert!(out.state.particles.is_empty());
        let got = out.state.disks[disk].omega;
        prop_assert!((got - target).abs() <= 1e-12 * target.abs().max(1e-300));
    }

    #[test]
    fn traces_round_trip_and_verify(seed in any::<u64>(), n in 1usize..4, horizon in 0.5..20.0f64) {
        let tol = Tolerances::default();
        let s = random_state(seed, n);
        let out = simulate(&s, &InjectionSchedule::default(), horizon, &tol).unwrap();
        let trace = Trace::record(&s, &out.trace, &out.state);
        let text = trace.to_text();
        let back = Trace::parse(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
        let check = verify(&back, &VerifyTolerances::default());
        prop_assert!(check.passed(), "{:?}", check.violations);
    }

    #[test]
    fn scenarios_round_trip(seed in any::<u64>(), n in 1usize..4) {
        let s = random_state(seed, n);
        let sc = Scenario::from_state(fixtures::star_spec(), &s, Goal::SynthesizeEmpty);
        let back = Scenario::parse(&sc.to_toml()).unwrap();
        prop_assert_eq!(back.state().unwrap().particles, s.particles);
        prop_assert_eq!(back, sc);
    }
}
