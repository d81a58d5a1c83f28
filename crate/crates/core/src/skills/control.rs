//! Feedback primitives shared by every skill controller.
//!
//! Thrust-driven executors run a PD loop: `v_des = v_ff + clamp(wp * e, vmax)`
//! and `F = m_eff * (kv * (v_des - v) + beta * v - g)`. Kinematic grippers
//! track `v_des` directly under an acceleration limit; rail robots also drive
//! their carriage towards the rail point nearest the target.

use crate::math::Vec3;
use crate::robots::{ActuationCommand, RobotDescriptor};
use crate::sim::World;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Effector {
    pub position: Vec3,
    pub velocity: Vec3,
    /// Body mass plus held payload.
    pub mass: f64,
}

pub fn effector(desc: &RobotDescriptor, world: &World) -> Option<Effector> {
    let b = world.body(&desc.id)?;
    let p = b.grip_point();
    Some(Effector { position: p, velocity: b.point_velocity(p), mass: b.mass + world.payload_mass(&desc.id) })
}

/// Direction opposing gravity, or +z in microgravity.
pub fn up(world: &World) -> Vec3 {
    if world.gravity == Vec3::ZERO {
        Vec3::Z
    } else {
        -world.gravity.normalized_or_zero()
    }
}

/// Commands that move the effector towards `target`, feeding forward `v_ff`.
/// `gain_scale` softens the position loop (payload-aware dragging).
pub fn servo(desc: &RobotDescriptor, world: &World, target: Vec3, v_ff: Vec3, gain_scale: f64) -> Vec<ActuationCommand> {
    let Some(e) = effector(desc, world) else { return Vec::new() };
    let l = &desc.limits;
    let v_des = (v_ff + (target - e.position) * (l.position_gain * gain_scale)).clamp_norm(l.max_speed);
    let mut out = track_velocity(desc, world, v_des);
    if let Some(drive) = rail_drive_towards(desc, world, target) {
        out.push(drive);
    }
    out
}

/// Commands that make the effector velocity follow `v_des`.
pub fn track_velocity(desc: &RobotDescriptor, world: &World, v_des: Vec3) -> Vec<ActuationCommand> {
    let Some(b) = world.body(&desc.id) else { return Vec::new() };
    let Some(e) = effector(desc, world) else { return Vec::new() };
    let l = &desc.limits;
    if desc.is_thrust_driven() {
        let accel = (v_des - e.velocity) * l.velocity_gain + e.velocity * b.drag_coeff - world.gravity;
        vec![ActuationCommand::Thrust((accel * e.mass).clamp_norm(l.max_force))]
    } else {
        let dv = (v_des - e.velocity).clamp_norm(l.max_accel * world.dt);
        vec![ActuationCommand::GripperMove((e.velocity + dv).clamp_norm(l.max_speed.max(l.max_throw_speed)))]
    }
}

/// Keeps an idle executor where it is.
pub fn hold(desc: &RobotDescriptor, world: &World, anchor: Vec3) -> Vec<ActuationCommand> {
    if desc.is_thrust_driven() {
        servo(desc, world, anchor, Vec3::ZERO, 1.0)
    } else {
        track_velocity(desc, world, Vec3::ZERO)
    }
}

fn rail_drive_towards(desc: &RobotDescriptor, world: &World, target: Vec3) -> Option<ActuationCommand> {
    let rail_id = desc.rail_id()?;
    let rail = world.layout.rail(rail_id)?;
    let carriage = world.body(&desc.carriage_body())?;
    let here = rail.closest_point(carriage.position());
    let goal = rail.closest_point(target);
    let delta = rail.arc_delta(here.arc, goal.arc);
    let speed = (2.0 * delta).clamp(-desc.limits.rail_speed, desc.limits.rail_speed);
    Some(ActuationCommand::RailDrive { rail: rail_id.to_string(), speed })
}
