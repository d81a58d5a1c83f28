use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

use crate::math::{Pose, Quat, Vec3};

use super::body::{Body, CollisionClass};
use super::collision::{confine_to_station, resolve_contact};
use super::layout::StationLayout;

pub const DEFAULT_DT: f64 = 0.01;
pub const EARTH_GRAVITY: Vec3 = Vec3::new(0.0, 0.0, -9.81);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArticulationKind {
    HingeDoor,
    BoxLid,
    Drawer,
}

/// A one-degree-of-freedom fixture attached to a parent body.
///
/// Hinges rotate `handle_arm` about `axis` through `anchor`; drawers slide the
/// handle along `axis`. `value` is an angle (rad) or extension (m).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Articulation {
    pub id: String,
    pub kind: ArticulationKind,
    pub parent_body: String,
    pub axis: Vec3,
    pub anchor: Vec3,
    pub handle_arm: Vec3,
    #[serde(default)]
    pub value: f64,
    pub limits: [f64; 2],
    #[serde(default)]
    pub current_rate: f64,
}

impl Articulation {
    pub fn handle_at(&self, value: f64) -> Vec3 {
        match self.kind {
            ArticulationKind::HingeDoor | ArticulationKind::BoxLid => {
                self.anchor + Quat::from_axis_angle(self.axis, value).rotate(self.handle_arm)
            }
            ArticulationKind::Drawer => self.anchor + self.axis.normalized_or_zero() * value + self.handle_arm,
        }
    }

    pub fn handle_position(&self) -> Vec3 {
        self.handle_at(self.value)
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.limits[0], self.limits[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspConstraint {
    pub gripper_body: String,
    pub object_body: String,
    /// Object frame expressed in the gripper body's frame.
    pub relative_pose: Pose,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub grasp_radius: f64,
    pub max_grasp_speed: f64,
    /// Contacts against upward-facing static surfaces slower than this are
    /// treated as resting when gravity is on.
    pub rest_speed: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams { grasp_radius: 0.05, max_grasp_speed: 0.2, rest_speed: 0.15 }
    }
}

/// Per-tick input to the world. Commands do not persist across ticks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
pub enum BodyCommand {
    /// External force on a dynamic body (N).
    Force { body: String, force: Vec3 },
    /// Linear velocity for a kinematic body (m/s).
    Velocity { body: String, linear: Vec3 },
    /// Move a kinematic body to exactly this position this tick.
    Target { body: String, position: Vec3 },
    /// Angular velocity for any non-static body (rad/s).
    Spin { body: String, angular: Vec3 },
    /// Articulation rate for this tick (rad/s or m/s).
    ArticulationRate { articulation: String, rate: f64 },
}

impl BodyCommand {
    fn is_finite(&self) -> bool {
        match self {
            BodyCommand::Force { force: v, .. }
            | BodyCommand::Velocity { linear: v, .. }
            | BodyCommand::Target { position: v, .. }
            | BodyCommand::Spin { angular: v, .. } => v.is_finite(),
            BodyCommand::ArticulationRate { rate, .. } => rate.is_finite(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("unknown body id `{0}`")]
    UnknownBodyId(String),
    #[error("unknown articulation id `{0}`")]
    UnknownArticulation(String),
    #[error("non-finite command for `{0}`")]
    NonFiniteCommand(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum GraspError {
    #[error("object out of grasp range")]
    GraspOutOfRange,
    #[error("object moving too fast relative to the gripper")]
    ObjectMovingTooFast,
    #[error("object already held")]
    AlreadyHeld,
    #[error("object is not graspable")]
    NotGraspable,
    #[error("object is not held")]
    NotHeld,
    #[error("unknown body `{0}`")]
    UnknownBody(String),
}

/// Contact bookkeeping for one step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepReport {
    pub body_contacts: usize,
    pub wall_contacts: usize,
}

/// The whole simulated station. Stepped by a single owner; clone for snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub gravity: Vec3,
    pub dt: f64,
    pub tick: u64,
    pub params: SimParams,
    pub layout: StationLayout,
    bodies: Vec<Body>,
    articulations: Vec<Articulation>,
    grasps: Vec<GraspConstraint>,
    index: HashMap<String, usize>,
}

impl World {
    pub fn new(gravity: Vec3, dt: f64, layout: StationLayout) -> World {
        World {
            gravity,
            dt,
            tick: 0,
            params: SimParams::default(),
            layout,
            bodies: Vec::new(),
            articulations: Vec::new(),
            grasps: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn zero_g(layout: StationLayout) -> World {
        World::new(Vec3::ZERO, DEFAULT_DT, layout)
    }

    pub fn add_body(&mut self, body: Body) -> Result<(), SimError> {
        if self.index.contains_key(&body.id) {
            return Err(SimError::DuplicateId(body.id));
        }
        self.index.insert(body.id.clone(), self.bodies.len());
        self.bodies.push(body);
        Ok(())
    }

    pub fn add_articulation(&mut self, art: Articulation) -> Result<(), SimError> {
        if self.articulations.iter().any(|a| a.id == art.id) {
            return Err(SimError::DuplicateId(art.id));
        }
        if !self.index.contains_key(&art.parent_body) {
            return Err(SimError::UnknownBodyId(art.parent_body));
        }
        self.articulations.push(art);
        Ok(())
    }

    pub fn bodies(&self) -> &[Body] {
        &self.bodies
    }

    pub fn articulations(&self) -> &[Articulation] {
        &self.articulations
    }

    pub fn grasps(&self) -> &[GraspConstraint] {
        &self.grasps
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn body(&self, id: &str) -> Option<&Body> {
        self.index_of(id).map(|i| &self.bodies[i])
    }

    /// Direct mutable access, for scenario setup and tests.
    pub fn body_mut(&mut self, id: &str) -> Option<&mut Body> {
        self.index_of(id).map(move |i| &mut self.bodies[i])
    }

    pub fn articulation(&self, id: &str) -> Option<&Articulation> {
        self.articulations.iter().find(|a| a.id == id)
    }

    pub fn articulation_mut(&mut self, id: &str) -> Option<&mut Articulation> {
        self.articulations.iter_mut().find(|a| a.id == id)
    }

    /// Gripper body currently holding `object`, if any.
    pub fn holder_of(&self, object: &str) -> Option<&str> {
        self.grasps.iter().find(|g| g.object_body == object).map(|g| g.gripper_body.as_str())
    }

    pub fn held_by<'a>(&'a self, gripper: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.grasps.iter().filter(move |g| g.gripper_body == gripper).map(|g| g.object_body.as_str())
    }

    /// Total mass of objects rigidly attached to `gripper`.
    pub fn payload_mass(&self, gripper: &str) -> f64 {
        self.held_by(gripper).filter_map(|o| self.body(o)).map(|b| b.mass).sum()
    }

    pub fn total_linear_momentum(&self) -> Vec3 {
        self.bodies
            .iter()
            .filter(|b| b.is_dynamic() && !b.flags.fixed_to_surface)
            .fold(Vec3::ZERO, |acc, b| acc + b.twist.linear * b.mass)
    }

    fn body_ref(&self, id: &str) -> Result<usize, GraspError> {
        self.index_of(id).ok_or_else(|| GraspError::UnknownBody(id.to_string()))
    }

    /// Checks every grasp precondition without mutating anything.
    pub fn can_attach(&self, gripper: &str, object: &str) -> Result<(), GraspError> {
        let gi = self.body_ref(gripper)?;
        let oi = self.body_ref(object)?;
        let (g, o) = (&self.bodies[gi], &self.bodies[oi]);
        if !o.flags.graspable || o.flags.is_static {
            return Err(GraspError::NotGraspable);
        }
        if self.holder_of(object).is_some() {
            return Err(GraspError::AlreadyHeld);
        }
        self.grasp_geometry_ok(g, o)
    }

    fn grasp_geometry_ok(&self, g: &Body, o: &Body) -> Result<(), GraspError> {
        let grip = g.grip_point();
        if o.surface_distance(grip) > self.params.grasp_radius {
            return Err(GraspError::GraspOutOfRange);
        }
        let rel = o.twist.linear - g.point_velocity(grip);
        if rel.norm() > self.params.max_grasp_speed {
            return Err(GraspError::ObjectMovingTooFast);
        }
        Ok(())
    }

    /// Checks the preconditions of [`World::transfer_grasp`] without mutating.
    pub fn can_transfer(&self, receiver: &str, object: &str) -> Result<(), GraspError> {
        let ri = self.body_ref(receiver)?;
        let oi = self.body_ref(object)?;
        match self.holder_of(object) {
            None => Err(GraspError::NotHeld),
            Some(g) if g == receiver => Err(GraspError::AlreadyHeld),
            Some(_) => self.grasp_geometry_ok(&self.bodies[ri], &self.bodies[oi]),
        }
    }

    pub fn attach_grasp(&mut self, gripper: &str, object: &str) -> Result<(), GraspError> {
        self.can_attach(gripper, object)?;
        self.push_grasp(gripper, object);
        Ok(())
    }

    /// Hands a held object to another gripper in one tick: the receiver's
    /// constraint replaces the giver's, so the object is never free.
    pub fn transfer_grasp(&mut self, receiver: &str, object: &str) -> Result<(), GraspError> {
        self.can_transfer(receiver, object)?;
        let pos = self.grasps.iter().position(|g| g.object_body == object).expect("checked above");
        self.grasps.remove(pos);
        self.push_grasp(receiver, object);
        Ok(())
    }

    fn push_grasp(&mut self, gripper: &str, object: &str) {
        let gi = self.index[gripper];
        let oi = self.index[object];
        let relative_pose = self.bodies[gi].pose.inverse().compose(&self.bodies[oi].pose);
        self.bodies[oi].flags.fixed_to_surface = false;
        self.grasps.push(GraspConstraint {
            gripper_body: gripper.to_string(),
            object_body: object.to_string(),
            relative_pose,
        });
    }

    /// Releases `object`; it keeps the velocity its frame had when let go.
    pub fn detach_grasp(&mut self, object: &str) -> Result<(), GraspError> {
        self.body_ref(object)?;
        let Some(pos) = self.grasps.iter().position(|g| g.object_body == object) else {
            return Err(GraspError::NotHeld);
        };
        let c = self.grasps.remove(pos);
        let gi = self.index[&c.gripper_body];
        let oi = self.index[object];
        let g = self.bodies[gi].clone();
        let o = &mut self.bodies[oi];
        o.twist.linear = g.point_velocity(o.pose.position);
        o.twist.angular = g.twist.angular;
        Ok(())
    }

    /// Advances one fixed step: forces and drag, positions, articulations,
    /// contacts, then grasp re-projection.
    pub fn step(&mut self, commands: &[BodyCommand]) -> Result<StepReport, SimError> {
        let n = self.bodies.len();
        let mut force = vec![Vec3::ZERO; n];
        let mut kin_velocity: Vec<Option<Vec3>> = vec![None; n];
        let mut kin_target: Vec<Option<Vec3>> = vec![None; n];
        let mut spin: Vec<Option<Vec3>> = vec![None; n];
        let mut rates: Vec<Option<f64>> = vec![None; self.articulations.len()];

        for cmd in commands {
            if !cmd.is_finite() {
                let id = match cmd {
                    BodyCommand::Force { body, .. }
                    | BodyCommand::Velocity { body, .. }
                    | BodyCommand::Target { body, .. }
                    | BodyCommand::Spin { body, .. } => body,
                    BodyCommand::ArticulationRate { articulation, .. } => articulation,
                };
                return Err(SimError::NonFiniteCommand(id.clone()));
            }
            match cmd {
                BodyCommand::ArticulationRate { articulation, rate } => {
                    let i = self
                        .articulations
                        .iter()
                        .position(|a| a.id == *articulation)
                        .ok_or_else(|| SimError::UnknownArticulation(articulation.clone()))?;
                    rates[i] = Some(*rate);
                }
                BodyCommand::Force { body, force: f } => {
                    let i = self.index_of(body).ok_or_else(|| SimError::UnknownBodyId(body.clone()))?;
                    force[i] += *f;
                }
                BodyCommand::Velocity { body, linear } => {
                    let i = self.index_of(body).ok_or_else(|| SimError::UnknownBodyId(body.clone()))?;
                    kin_velocity[i] = Some(*linear);
                }
                BodyCommand::Target { body, position } => {
                    let i = self.index_of(body).ok_or_else(|| SimError::UnknownBodyId(body.clone()))?;
                    kin_target[i] = Some(*position);
                }
                BodyCommand::Spin { body, angular } => {
                    let i = self.index_of(body).ok_or_else(|| SimError::UnknownBodyId(body.clone()))?;
                    spin[i] = Some(*angular);
                }
            }
        }

        let held: Vec<bool> = self.bodies.iter().map(|b| self.holder_of(&b.id).is_some()).collect();
        let payload: Vec<f64> = self.bodies.iter().map(|b| self.payload_mass(&b.id)).collect();
        let dt = self.dt;
        let gravity = self.gravity;

        for (i, b) in self.bodies.iter_mut().enumerate() {
            if b.flags.is_static || held[i] {
                continue;
            }
            if let Some(w) = spin[i] {
                b.twist.angular = w;
            }
            if b.flags.kinematic {
                if let Some(t) = kin_target[i] {
                    b.twist.linear = (t - b.pose.position) / dt;
                    b.pose.position = t;
                } else {
                    b.twist.linear = kin_velocity[i].unwrap_or(Vec3::ZERO);
                    b.pose.position += b.twist.linear * dt;
                }
            } else if b.flags.fixed_to_surface {
                b.twist.linear = Vec3::ZERO;
                continue;
            } else {
                let m = b.mass + payload[i];
                let accel = gravity + force[i] / m - b.twist.linear * b.drag_coeff;
                b.twist.linear += accel * dt;
                b.pose.position += b.twist.linear * dt;
            }
            if b.twist.angular != Vec3::ZERO {
                let dq = Quat::from_rotation_vector(b.twist.angular * dt);
                b.pose.orientation = (dq * b.pose.orientation).normalized();
            }
        }

        for (a, rate) in self.articulations.iter_mut().zip(rates) {
            let rate = rate.unwrap_or(0.0);
            let next = a.clamp(a.value + rate * dt);
            a.current_rate = if dt > 0.0 { (next - a.value) / dt } else { 0.0 };
            a.value = next;
        }

        let report = self.resolve_contacts(&held);
        self.reproject_grasps();
        self.tick += 1;
        Ok(report)
    }

    fn collides_with_objects(b: &Body) -> bool {
        matches!(b.collision, CollisionClass::Object | CollisionClass::Solid)
    }

    fn resolve_contacts(&mut self, held: &[bool]) -> StepReport {
        let mut report = StepReport::default();
        let n = self.bodies.len();
        let up = -self.gravity.normalized_or_zero();
        let resting = self.gravity != Vec3::ZERO;
        for i in 0..n {
            for j in (i + 1)..n {
                if held[i] || held[j] {
                    continue;
                }
                let (a, b) = (&self.bodies[i], &self.bodies[j]);
                if !Self::collides_with_objects(a) || !Self::collides_with_objects(b) {
                    continue;
                }
                if a.collision == CollisionClass::Solid && b.collision == CollisionClass::Solid {
                    continue;
                }
                let Some(r) = resolve_contact(a, b) else { continue };
                report.body_contacts += 1;
                let (lo, hi) = self.bodies.split_at_mut(j);
                let (a, b) = (&mut lo[i], &mut hi[0]);
                a.twist = r.twist_a;
                b.twist = r.twist_b;
                a.pose.position += r.shift_a;
                b.pose.position += r.shift_b;
                if resting {
                    // The normal of the contact as seen by each movable body.
                    for (body, n) in [(a, -r.normal), (b, r.normal)] {
                        if body.inverse_mass() > 0.0 && n.dot(up) > 0.7 {
                            let vn = body.twist.linear.dot(n);
                            if vn.abs() < self.params.rest_speed {
                                body.twist.linear -= n * vn;
                            }
                        }
                    }
                }
            }
        }
        if !self.layout.modules.is_empty() {
            for (i, b) in self.bodies.iter_mut().enumerate() {
                if held[i] || !b.is_dynamic() || b.flags.fixed_to_surface {
                    continue;
                }
                if !matches!(b.collision, CollisionClass::Object | CollisionClass::Agent) {
                    continue;
                }
                let r = b.contact_radius();
                if let Some(normal) = confine_to_station(&self.layout, b, r) {
                    report.wall_contacts += 1;
                    if resting && normal.normalized_or_zero().dot(up) > 0.7 {
                        let vn = b.twist.linear.dot(up);
                        if vn.abs() < self.params.rest_speed {
                            b.twist.linear -= up * vn;
                        }
                    }
                }
            }
        }
        report
    }

    fn reproject_grasps(&mut self) {
        for k in 0..self.grasps.len() {
            let gi = self.index[&self.grasps[k].gripper_body];
            let oi = self.index[&self.grasps[k].object_body];
            let g = self.bodies[gi].clone();
            let pose = g.pose.compose(&self.grasps[k].relative_pose);
            let o = &mut self.bodies[oi];
            o.pose = pose;
            o.twist.linear = g.point_velocity(pose.position);
            o.twist.angular = g.twist.angular;
        }
    }
}
