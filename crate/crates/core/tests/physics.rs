mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::physics_checks::*;
use stationsim_core::math::Vec3;
use stationsim_core::sim::{
    Articulation, ArticulationKind, Body, BodyCommand, StationLayout, World, DEFAULT_DT, EARTH_GRAVITY,
};

#[test]
fn momentum_is_conserved_through_seeded_collisions() {
    let (drift, contacts) = momentum_drift(42, 10_000);
    assert!(drift < 1e-9, "relative drift {drift:e}");
    assert!(contacts >= 100, "only {contacts} contacts");
}

#[test]
fn identical_inputs_give_identical_trajectories() {
    let run = || {
        let mut w = colliding_pairs(9);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let i = rng.gen_range(0..100);
            let f = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0);
            w.step(&[BodyCommand::Force { body: format!("a{i}"), force: f }]).unwrap();
        }
        w
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    assert_eq!(a.snapshot_json(), b.snapshot_json());
}

#[test]
fn drag_follows_the_closed_form() {
    for beta in [0.1, 0.5, 1.0, 2.0] {
        let dt = 1e-3;
        let mut w = World::new(Vec3::ZERO, dt, StationLayout::default());
        w.add_body(Body::sphere("a", 0.1, 1.0, Vec3::ZERO).with_velocity(Vec3::new(1.0, -1.0, 0.5)).with_drag(beta))
            .unwrap();
        let v0 = w.body("a").unwrap().twist.linear.norm();
        for n in 1..=2000 {
            w.step(&[]).unwrap();
            let t = n as f64 * dt;
            let exact = v0 * (-beta * t).exp();
            let v = w.body("a").unwrap().twist.linear.norm();
            // First-order integrator error bound.
            assert!((v - exact).abs() <= exact * beta * beta * dt * t + 1e-15, "beta {beta} t {t}: {v} vs {exact}");
        }
    }
}

#[test]
fn grasp_stays_rigid_under_spin_and_translation() {
    assert!(grasp_rigidity(11, 5000) < 1e-9);
}

#[test]
fn release_inherits_rotational_point_velocity() {
    let r = Vec3::new(0.04, 0.0, 0.0);
    let mut w = grasped_pair(r);
    let v = Vec3::new(0.1, 0.0, 0.0);
    let omega = Vec3::new(0.0, 0.0, 3.0);
    let cmds = [
        BodyCommand::Velocity { body: "g".into(), linear: v },
        BodyCommand::Spin { body: "g".into(), angular: omega },
    ];
    w.step(&cmds).unwrap();
    let g = w.body("g").unwrap().clone();
    let lever = w.body("o").unwrap().position() - g.position();
    w.detach_grasp("o").unwrap();
    let got = w.body("o").unwrap().twist.linear;
    let expect = v + omega.cross(lever);
    assert!((got - expect).norm() < 1e-6, "{got} vs {expect}");
    assert!((lever.norm() - r.norm()).abs() < 1e-9);
    assert!(got.y.abs() > 0.1, "tangential component missing");
}

#[test]
fn resting_on_a_table_at_one_g() {
    let mut w = World::new(EARTH_GRAVITY, DEFAULT_DT, StationLayout::default());
    w.add_body(Body::fixture("table", Vec3::new(0.5, 0.5, 0.05), Vec3::ZERO)).unwrap();
    w.add_body(Body::cuboid("cube", Vec3::splat(0.03), 0.2, Vec3::new(0.0, 0.0, 0.2))).unwrap();
    for _ in 0..300 {
        w.step(&[]).unwrap();
    }
    let c = w.body("cube").unwrap();
    assert!(c.position().z > 0.05 && c.position().z < 0.1, "{}", c.position());
    assert!(c.twist.linear.norm() < 1e-6);
}

fn door() -> Articulation {
    Articulation {
        id: "door".into(),
        kind: ArticulationKind::HingeDoor,
        parent_body: "cab".into(),
        axis: Vec3::Z,
        anchor: Vec3::new(0.3, -0.3, 0.0),
        handle_arm: Vec3::new(0.0, 0.5, 0.0),
        value: 0.0,
        limits: [0.0, 1.6],
        current_rate: 0.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn drag_speed_never_increases(beta in 0.01f64..5.0, vx in -2.0f64..2.0, vy in -2.0f64..2.0, vz in -2.0f64..2.0) {
        let mut w = World::zero_g(StationLayout::default());
        w.add_body(Body::sphere("a", 0.1, 1.0, Vec3::ZERO).with_velocity(Vec3::new(vx, vy, vz)).with_drag(beta)).unwrap();
        let mut last = w.body("a").unwrap().twist.linear.norm();
        for _ in 0..500 {
            w.step(&[]).unwrap();
            let s = w.body("a").unwrap().twist.linear.norm();
            prop_assert!(s <= last);
            last = s;
        }
    }

    #[test]
    fn articulation_limits_hold_for_any_rates(rates in prop::collection::vec(-100.0f64..100.0, 1..200)) {
        let mut w = World::zero_g(StationLayout::default());
        w.add_body(Body::fixture("cab", Vec3::splat(0.3), Vec3::ZERO)).unwrap();
        w.add_articulation(door()).unwrap();
        for r in rates {
            w.step(&[BodyCommand::ArticulationRate { articulation: "door".into(), rate: r }]).unwrap();
            let a = w.articulation("door").unwrap();
            prop_assert!(a.value >= 0.0 && a.value <= 1.6);
        }
    }

    #[test]
    fn grasp_rigidity_for_any_motion(
        ox in -0.04f64..0.04, oy in -0.04f64..0.04,
        moves in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -3.0f64..3.0), 1..100),
    ) {
        let mut w = grasped_pair(Vec3::new(ox, oy, 0.0));
        for (vx, vy, wz) in moves {
            w.step(&[
                BodyCommand::Velocity { body: "g".into(), linear: Vec3::new(vx, vy, 0.0) },
                BodyCommand::Spin { body: "g".into(), angular: Vec3::new(0.0, wz, wz) },
            ]).unwrap();
            prop_assert!(rigidity_error(&w) < 1e-9);
        }
    }

    #[test]
    fn pairwise_impacts_conserve_momentum(seed in any::<u64>()) {
        let mut w = colliding_pairs(seed);
        let p0 = w.total_linear_momentum();
        let scale: f64 = w.bodies().iter().map(|b| b.mass * b.twist.linear.norm()).sum();
        for _ in 0..400 {
            w.step(&[]).unwrap();
        }
        prop_assert!((w.total_linear_momentum() - p0).norm() / scale < 1e-9);
    }
}
