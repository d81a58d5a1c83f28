//! Measured physics quantities with their acceptance bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stationsim_core::math::{Pose, Vec3};
use stationsim_core::sim::{Body, BodyCommand, CollisionClass, StationLayout, World};

pub fn gripper(id: &str, p: Vec3) -> Body {
    let mut g = Body::sphere(id, 0.03, 1.0, p);
    g.flags.kinematic = true;
    g.collision = CollisionClass::None;
    g
}

/// 100 head-on pairs, one per lane, so every pair collides exactly once.
pub fn colliding_pairs(seed: u64) -> World {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = World::zero_g(StationLayout::default());
    for i in 0..100 {
        let lane = Vec3::new(0.0, i as f64, 0.0);
        let off = Vec3::new(rng.gen_range(-0.05..0.05), rng.gen_range(-0.03..0.03), rng.gen_range(-0.03..0.03));
        let va = Vec3::new(rng.gen_range(0.1..1.5), 0.0, 0.0);
        let vb = Vec3::new(-rng.gen_range(0.1..1.5), 0.0, 0.0);
        let a = Body::sphere(format!("a{i}"), 0.05, rng.gen_range(0.1..5.0), lane - Vec3::new(0.6, 0.0, 0.0))
            .with_velocity(va)
            .with_restitution(rng.gen_range(0.0..=1.0));
        let b = Body::sphere(format!("b{i}"), 0.05, rng.gen_range(0.1..5.0), lane + Vec3::new(0.6, 0.0, 0.0) + off)
            .with_velocity(vb)
            .with_restitution(rng.gen_range(0.0..=1.0));
        w.add_body(a).unwrap();
        w.add_body(b).unwrap();
    }
    w
}

/// Worst relative momentum drift over `steps` ticks, and the contact count.
pub fn momentum_drift(seed: u64, steps: u64) -> (f64, usize) {
    let mut w = colliding_pairs(seed);
    let p0 = w.total_linear_momentum();
    let scale: f64 = w.bodies().iter().map(|b| b.mass * b.twist.linear.norm()).sum();
    let mut contacts = 0;
    let mut worst = 0.0f64;
    for _ in 0..steps {
        contacts += w.step(&[]).unwrap().body_contacts;
        worst = worst.max((w.total_linear_momentum() - p0).norm() / scale);
    }
    (worst, contacts)
}

/// Worst relative speed error against `v0 exp(-beta t)` for `t <= horizon`.
pub fn drag_relative_error(beta: f64, dt: f64, horizon: f64) -> f64 {
    let mut w = World::new(Vec3::ZERO, dt, StationLayout::default());
    w.add_body(Body::sphere("a", 0.1, 1.0, Vec3::ZERO).with_velocity(Vec3::new(1.0, -1.0, 0.5)).with_drag(beta)).unwrap();
    let v0 = w.body("a").unwrap().twist.linear.norm();
    let mut worst = 0.0f64;
    for n in 1..=(horizon / dt).round() as u64 {
        w.step(&[]).unwrap();
        let exact = v0 * (-beta * n as f64 * dt).exp();
        worst = worst.max((w.body("a").unwrap().twist.linear.norm() - exact).abs() / exact);
    }
    worst
}

pub fn grasped_pair(offset: Vec3) -> World {
    let mut w = World::zero_g(StationLayout::default());
    w.add_body(gripper("g", Vec3::new(1.0, 1.0, 1.0))).unwrap();
    w.add_body(Body::cuboid("o", Vec3::splat(0.02), 0.3, Vec3::new(1.0, 1.0, 1.0) + offset).graspable()).unwrap();
    w.attach_grasp("g", "o").unwrap();
    w
}

pub fn rigidity_error(w: &World) -> f64 {
    let c = &w.grasps()[0];
    let g = w.body("g").unwrap();
    let o = w.body("o").unwrap();
    let expect: Pose = g.pose.compose(&c.relative_pose);
    (o.pose.position - expect.position).norm()
}

/// Worst grasp offset error under random spin and translation.
pub fn grasp_rigidity(seed: u64, steps: u64) -> f64 {
    let mut w = grasped_pair(Vec3::new(0.04, 0.0, 0.01));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..steps {
        let v = Vec3::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let omega = Vec3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        w.step(&[
            BodyCommand::Velocity { body: "g".into(), linear: v },
            BodyCommand::Spin { body: "g".into(), angular: omega },
        ])
        .unwrap();
        worst = worst.max(rigidity_error(&w));
    }
    worst
}

/// Released velocity minus `v + omega x r` for a spinning gripper.
pub fn release_error() -> f64 {
    let mut w = grasped_pair(Vec3::new(0.04, 0.0, 0.0));
    let v = Vec3::new(0.1, 0.0, 0.0);
    let omega = Vec3::new(0.0, 0.0, 3.0);
    w.step(&[
        BodyCommand::Velocity { body: "g".into(), linear: v },
        BodyCommand::Spin { body: "g".into(), angular: omega },
    ])
    .unwrap();
    let lever = w.body("o").unwrap().position() - w.body("g").unwrap().position();
    w.detach_grasp("o").unwrap();
    (w.body("o").unwrap().twist.linear - (v + omega.cross(lever))).norm()
}
