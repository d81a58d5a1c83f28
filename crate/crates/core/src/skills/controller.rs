//! Closed-loop skill controllers.
//!
//! A skill is a small state machine advanced by the pure function
//! [`tick_skill`]: it reads a world snapshot and emits actuation commands,
//! an optional grasp action and either `Running` or a terminal outcome.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::math::{Pose, Vec3};
use crate::robots::{ActuationCommand, RobotDescriptor};
use crate::sim::{ArticulationKind, GraspError, World};

use super::control::{effector, hold, servo, track_velocity, up, Effector};
use super::intercept::{intercept_point, ChaserLimits};
use super::kind::SkillKind;
use super::schema::check_params;
use super::spec::{EndState, ObjectRequirement, SkillInvocation, SkillOutcome, SkillStatus, TerminationSpec};
use super::SkillError;

pub const DEFAULT_LIFT: f64 = 0.1;
pub const BOX_LIFT: f64 = 0.3;
pub const DEFAULT_THROW_TOLERANCE: f64 = 0.15;
pub const DOOR_OPEN_ANGLE: f64 = 1.4;
pub const DOOR_CLOSED_ANGLE: f64 = 0.05;
pub const LID_OPEN_ANGLE: f64 = 1.2;
pub const HATCH_STANDOFF: f64 = 0.6;
const WAYPOINT_TOLERANCE: f64 = 0.05;
const FAR_FIELD: f64 = 0.4;
const HANDLE_CAPTURE: f64 = 0.02;
const DRIVE_RANGE: f64 = 0.08;
const RELEASE_SPEED: f64 = 0.01;
const RELEASE_MATCH: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Waypoint(usize),
    Approach,
    Settle,
    Carry,
    Backoff,
    Windup,
    Flight,
    Drive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GraspAction {
    Attach(String),
    Detach(String),
    /// Take an object held by another gripper in one tick.
    TakeOver(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkillState {
    pub invocation: SkillInvocation,
    pub descriptor: Arc<RobotDescriptor>,
    /// Effective termination spec with skill defaults filled in.
    pub spec: TerminationSpec,
    pub phase: Phase,
    pub ticks: u32,
    pub phase_ticks: u32,
    pub prev_velocity: Option<Vec3>,
    pub waypoints: Vec<Vec3>,
    pub anchor: Option<Vec3>,
    pub release_velocity: Option<Vec3>,
    pub flight_ticks: Option<u32>,
    /// Release velocity fixed when the windup starts.
    pub aim: Option<Vec3>,
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Progress {
    Running,
    Terminal(SkillOutcome),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickOutput {
    pub state: SkillState,
    pub commands: Vec<ActuationCommand>,
    pub grasp: Option<GraspAction>,
    pub progress: Progress,
}

impl TickOutput {
    pub fn outcome(&self) -> Option<&SkillOutcome> {
        match &self.progress {
            Progress::Terminal(o) => Some(o),
            Progress::Running => None,
        }
    }
}

/// Validates an invocation and builds the initial controller state.
pub fn start_skill(
    invocation: &SkillInvocation,
    descriptor: Arc<RobotDescriptor>,
    world: &World,
) -> Result<SkillState, SkillError> {
    let inv = invocation;
    if inv.executor != descriptor.id {
        return Err(SkillError::WrongExecutor { invocation: inv.executor.clone(), descriptor: descriptor.id.clone() });
    }
    if !descriptor.has_skill(inv.skill) {
        return Err(SkillError::NotInRepertoire { executor: descriptor.id.clone(), skill: inv.skill });
    }
    if inv.skill.zero_g_only() && world.gravity != Vec3::ZERO {
        return Err(SkillError::UndefinedUnderGravity(inv.skill));
    }
    check_params(inv, world)?;
    if !inv.termination.is_well_formed() {
        return Err(SkillError::MalformedTermination);
    }
    let eff = effector(&descriptor, world).ok_or_else(|| SkillError::UnknownId(descriptor.id.clone()))?;
    let me = descriptor.id.clone();
    let object = inv.id("object").map(str::to_string);
    let obj_pos = object.as_deref().and_then(|o| world.body(o)).map(|b| b.position());
    let mut spec = inv.termination.clone();
    let mut target = None;
    let requirement;
    let mut waypoints = Vec::new();
    let mut phase = Phase::Approach;
    let held_by_me = |o: &Option<String>| o.clone().map(|object| ObjectRequirement::HeldBy { object, gripper: me.clone() });

    match inv.skill {
        SkillKind::MoveTo | SkillKind::RailMove => {
            target = inv.vector("target");
            requirement = held_by_me(&object);
        }
        SkillKind::CrossHatch => {
            let hatch = world.layout.hatch(inv.id("hatch").unwrap_or_default()).expect("checked by schema");
            let side = world
                .layout
                .module_at(eff.position)
                .or_else(|| world.layout.nearest_module(eff.position))
                .map(|m| m.id.clone())
                .unwrap_or_default();
            let Some(side_module) = world.layout.module(&side).filter(|_| hatch.other_side(&side).is_some()) else {
                return Err(SkillError::Precondition(format!("{me} is not next to hatch {}", hatch.id)));
            };
            let a = hatch.standoff(side_module, HATCH_STANDOFF);
            let b = hatch.standoff(side_module, -HATCH_STANDOFF);
            waypoints = vec![a, b];
            target = Some(b);
            requirement = held_by_me(&object);
            phase = Phase::Waypoint(0);
        }
        SkillKind::Grasp | SkillKind::Handover | SkillKind::CatchFloatingCube => requirement = held_by_me(&object),
        SkillKind::Release => requirement = object.clone().map(|object| ObjectRequirement::Free { object }),
        SkillKind::Drag => {
            let t = inv.vector("target").unwrap_or_default();
            requirement = object.clone().map(|object| ObjectRequirement::At {
                object,
                position: t,
                tolerance: spec.position_tolerance.max(0.05),
            });
        }
        SkillKind::PickCube => {
            let lift = inv.number("lift").unwrap_or(DEFAULT_LIFT);
            target = obj_pos.map(|p| p + up(world) * lift);
            requirement = held_by_me(&object);
        }
        SkillKind::PickFromBox => {
            let lift = inv.number("lift").unwrap_or(BOX_LIFT);
            let p = obj_pos.unwrap_or_default();
            waypoints = vec![p + up(world) * 0.2];
            target = Some(p + up(world) * lift);
            requirement = held_by_me(&object);
            phase = Phase::Waypoint(0);
        }
        SkillKind::ThrowCube => {
            let obj = object.clone().unwrap_or_default();
            requirement = Some(match (inv.vector("target"), inv.vector("velocity")) {
                (Some(q), _) => ObjectRequirement::At {
                    object: obj,
                    position: q,
                    tolerance: inv.number("tolerance").unwrap_or(DEFAULT_THROW_TOLERANCE),
                },
                (None, Some(v)) => ObjectRequirement::Released {
                    object: obj,
                    velocity: v,
                    speed_tolerance: 0.05,
                    angle_tolerance: 5f64.to_radians(),
                },
                (None, None) => unreachable!("schema requires one of target/velocity"),
            });
            spec.max_end_speed = spec.max_end_speed.max(10.0);
            spec.max_end_accel = spec.max_end_accel.max(1e4);
            phase = Phase::Backoff;
        }
        SkillKind::OpenCabinetDoor | SkillKind::OpenBox => {
            let default = if inv.skill == SkillKind::OpenBox { LID_OPEN_ANGLE } else { DOOR_OPEN_ANGLE };
            requirement = inv.id("articulation").map(|a| ObjectRequirement::ArticulationAtLeast {
                articulation: a.to_string(),
                value: inv.number("angle").unwrap_or(default),
            });
        }
        SkillKind::CloseCabinetDoor => {
            requirement = inv.id("articulation").map(|a| ObjectRequirement::ArticulationAtMost {
                articulation: a.to_string(),
                value: inv.number("angle").unwrap_or(DOOR_CLOSED_ANGLE),
            });
        }
    }
    if spec.target.is_none() {
        spec.target = target.map(Pose::from_position);
    }
    if spec.object.is_none() {
        spec.object = requirement;
    }
    Ok(SkillState {
        invocation: inv.clone(),
        descriptor,
        spec,
        phase,
        ticks: 0,
        phase_ticks: 0,
        prev_velocity: None,
        waypoints,
        anchor: None,
        release_velocity: None,
        flight_ticks: None,
        aim: None,
    })
}

impl SkillState {
    pub fn skill(&self) -> SkillKind {
        self.invocation.skill
    }

    pub fn executor(&self) -> &str {
        &self.descriptor.id
    }

    pub fn end_state(&self, world: &World) -> EndState {
        let object = self.invocation.id("object");
        let articulation = self.invocation.id("articulation");
        EndState::capture(world, &self.descriptor.id, object, articulation, self.prev_velocity, self.release_velocity)
    }

    /// Outcome for a skill stopped from outside (e.g. by the safety layer).
    pub fn abort(&self, world: &World, reason: impl Into<String>) -> SkillOutcome {
        self.outcome(SkillStatus::Aborted(reason.into()), self.end_state(world))
    }

    fn outcome(&self, status: SkillStatus, end_state: EndState) -> SkillOutcome {
        SkillOutcome {
            skill: self.skill(),
            executor: self.descriptor.id.clone(),
            status,
            end_state,
            ticks_used: self.ticks,
        }
    }

    fn enter(&mut self, phase: Phase) {
        self.phase = phase;
        self.phase_ticks = 0;
    }
}

struct Step {
    commands: Vec<ActuationCommand>,
    grasp: Option<GraspAction>,
}

impl Step {
    fn go(commands: Vec<ActuationCommand>) -> Result<Step, String> {
        Ok(Step { commands, grasp: None })
    }
}

/// Advances a skill by one tick. Pure: the same state and snapshot always
/// produce the same output.
pub fn tick_skill(state: &SkillState, world: &World) -> TickOutput {
    let mut s = state.clone();
    s.ticks += 1;
    s.phase_ticks += 1;
    let end = s.end_state(world);
    let terminal = |s: SkillState, status: SkillStatus, end: EndState| {
        let o = s.outcome(status, end);
        TickOutput { state: s, commands: Vec::new(), grasp: None, progress: Progress::Terminal(o) }
    };
    if s.spec.check(&end).is_ok() {
        return terminal(s, SkillStatus::Succeeded, end);
    }
    if s.ticks >= s.spec.timeout {
        return terminal(s, SkillStatus::Timeout, end);
    }
    let d = s.descriptor.clone();
    let Some(eff) = effector(&d, world) else {
        return terminal(s, SkillStatus::Failed(format!("{} has no body", d.id)), end);
    };
    let step = match s.skill() {
        SkillKind::MoveTo | SkillKind::RailMove => move_to(&mut s, world, &d, eff),
        SkillKind::CrossHatch => cross_hatch(&mut s, world, &d, eff),
        SkillKind::CatchFloatingCube => grasp(&mut s, world, &d, eff, false),
        SkillKind::Grasp | SkillKind::Handover => grasp(&mut s, world, &d, eff, true),
        SkillKind::Release => release(&mut s, world, &d, eff),
        SkillKind::Drag => drag(&mut s, world, &d, eff),
        SkillKind::PickCube | SkillKind::PickFromBox => pick(&mut s, world, &d, eff),
        SkillKind::ThrowCube => throw(&mut s, world, &d, eff),
        SkillKind::OpenCabinetDoor | SkillKind::CloseCabinetDoor | SkillKind::OpenBox => articulate(&mut s, world, &d, eff),
    };
    match step {
        Err(reason) => terminal(s, SkillStatus::Failed(reason), end),
        Ok(step) => {
            s.prev_velocity = world.body(&d.id).map(|b| b.twist.linear);
            TickOutput { state: s, commands: step.commands, grasp: step.grasp, progress: Progress::Running }
        }
    }
}

fn object_id(s: &SkillState) -> String {
    s.invocation.id("object").unwrap_or_default().to_string()
}

fn spec_target(s: &SkillState) -> Vec3 {
    s.spec.target.map(|p| p.position).unwrap_or_default()
}

fn holds(world: &World, d: &RobotDescriptor, object: &str) -> bool {
    world.holder_of(object) == Some(d.id.as_str())
}

fn move_to(s: &mut SkillState, world: &World, d: &RobotDescriptor, _eff: Effector) -> Result<Step, String> {
    if let Some(o) = s.invocation.id("object") {
        if !holds(world, d, o) {
            return Err(format!("{} is not holding {o}", d.id));
        }
    }
    Step::go(servo(d, world, spec_target(s), Vec3::ZERO, 1.0))
}

fn cross_hatch(s: &mut SkillState, world: &World, d: &RobotDescriptor, eff: Effector) -> Result<Step, String> {
    if let Some(o) = s.invocation.id("object") {
        if !holds(world, d, o) {
            return Err(format!("{} is not holding {o}", d.id));
        }
    }
    let i = match s.phase {
        Phase::Waypoint(i) => i,
        _ => s.waypoints.len() - 1,
    };
    if i + 1 < s.waypoints.len() && eff.position.distance(s.waypoints[i]) <= WAYPOINT_TOLERANCE {
        s.enter(Phase::Waypoint(i + 1));
        return Step::go(servo(d, world, s.waypoints[i + 1], Vec3::ZERO, 1.0));
    }
    Step::go(servo(d, world, s.waypoints[i], Vec3::ZERO, 1.0))
}

/// Approaches `object` and grasps it. `None` once the executor holds it.
fn acquire(
    s: &SkillState,
    world: &World,
    d: &RobotDescriptor,
    eff: Effector,
    object: &str,
    take_over: bool,
) -> Result<Option<Step>, String> {
    let o = world.body(object).ok_or_else(|| format!("{object} no longer exists"))?;
    let holder = world.holder_of(object);
    match holder {
        Some(h) if h == d.id => return Ok(None),
        Some(h) if !take_over => return Err(format!("{object} is held by {h}")),
        _ => {}
    }
    let target = o.position();
    let v_obj = o.twist.linear;
    let ready = if holder.is_some() { world.can_transfer(&d.id, object) } else { world.can_attach(&d.id, object) };
    match ready {
        Err(GraspError::NotGraspable) => return Err(format!("{object} is not graspable")),
        Ok(()) => {
            let action = if holder.is_some() { GraspAction::TakeOver(object.into()) } else { GraspAction::Attach(object.into()) };
            return Ok(Some(Step { commands: track_velocity(d, world, v_obj), grasp: Some(action) }));
        }
        Err(_) => {}
    }
    let dist = eff.position.distance(target);
    if s.skill() == SkillKind::CatchFloatingCube && dist > FAR_FIELD {
        let limits = ChaserLimits {
            max_accel: if d.is_thrust_driven() { d.limits.max_force / eff.mass } else { d.limits.max_accel },
            max_speed: d.limits.max_speed,
        };
        match intercept_point(o, &Pose::from_position(eff.position), limits, Some(&world.layout), world.dt) {
            Ok(i) => return Ok(Some(Step { commands: servo(d, world, i.point, Vec3::ZERO, 1.0), grasp: None })),
            Err(e) if s.ticks <= 1 => return Err(e.to_string()),
            Err(_) => {}
        }
    }
    Ok(Some(Step { commands: servo(d, world, target, v_obj, 1.0), grasp: None }))
}

fn grasp(s: &mut SkillState, world: &World, d: &RobotDescriptor, eff: Effector, take_over: bool) -> Result<Step, String> {
    let object = object_id(s);
    match acquire(s, world, d, eff, &object, take_over)? {
        Some(step) => Ok(step),
        None => {
            if s.phase != Phase::Settle {
                s.enter(Phase::Settle);
            }
            Step::go(track_velocity(d, world, Vec3::ZERO))
        }
    }
}

fn release(s: &mut SkillState, world: &World, d: &RobotDescriptor, eff: Effector) -> Result<Step, String> {
    let object = object_id(s);
    let anchor = *s.anchor.get_or_insert(eff.position);
    match world.holder_of(&object) {
        Some(h) if h != d.id => Err(format!("{object} is held by {h}")),
        Some(_) if eff.velocity.norm() <= RELEASE_SPEED => {
            Ok(Step { commands: hold(d, world, anchor), grasp: Some(GraspAction::Detach(object)) })
        }
        _ => Step::go(hold(d, world, anchor)),
    }
}

fn drag(s: &mut SkillState, world: &World, d: &RobotDescriptor, eff: Effector) -> Result<Step, String> {
    let object = object_id(s);
    if let Some(step) = acquire(s, world, d, eff, &object, false)? {
        return Ok(step);
    }
    s.phase = Phase::Carry;
    let o = world.body(&object).ok_or_else(|| format!("{object} no longer exists"))?;
    let goal = s.invocation.vector("target").unwrap_or_default();
    let aim = goal - (o.position() - eff.position);
    let own = world.body(&d.id).map_or(1.0, |b| b.mass);
    let scale = if d.is_thrust_driven() { own / eff.mass } else { 1.0 };
    Step::go(servo(d, world, aim, Vec3::ZERO, scale))
}

fn pick(s: &mut SkillState, world: &World, d: &RobotDescriptor, eff: Effector) -> Result<Step, String> {
    let object = object_id(s);
    if let Phase::Waypoint(_) = s.phase {
        if let Some(lid) = s.invocation.id("lid") {
            let v = world.articulation(lid).map_or(0.0, |a| a.value);
            if v < LID_OPEN_ANGLE - 1e-9 {
                return Err(format!("{lid} is not open"));
            }
        }
        if holds(world, d, &object) {
            s.enter(Phase::Carry);
        } else if eff.position.distance(s.waypoints[0]) <= WAYPOINT_TOLERANCE {
            s.enter(Phase::Approach);
        } else {
            return Step::go(servo(d, world, s.waypoints[0], Vec3::ZERO, 1.0));
        }
    }
    if let Some(step) = acquire(s, world, d, eff, &object, false)? {
        return Ok(step);
    }
    if s.phase != Phase::Carry {
        s.enter(Phase::Carry);
    }
    Step::go(servo(d, world, spec_target(s), Vec3::ZERO, 1.0))
}

/// Release velocity that carries an object from `p` to `q` in exactly `n`
/// ticks of the world's integrator (semi-implicit Euler, linear drag).
pub fn throw_velocity(p: Vec3, q: Vec3, gravity: Vec3, beta: f64, dt: f64, n: u32) -> Vec3 {
    let r = 1.0 - beta * dt;
    let (mut rk, mut partial, mut a, mut b) = (1.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        partial += rk;
        rk *= r;
        a += dt * rk;
        b += dt * dt * partial;
    }
    (q - p - gravity * b) / a
}

const MIN_FLIGHT_TICKS: u32 = 10;
const MAX_FLIGHT_TICKS: u32 = 600;

/// Shortest flight whose release speed stays under `nominal`; otherwise the
/// slowest feasible throw up to `limit`.
pub fn plan_throw(p: Vec3, q: Vec3, gravity: Vec3, beta: f64, dt: f64, nominal: f64, limit: f64) -> Option<(u32, Vec3)> {
    let mut best: Option<(u32, Vec3)> = None;
    for n in MIN_FLIGHT_TICKS..=MAX_FLIGHT_TICKS {
        let v = throw_velocity(p, q, gravity, beta, dt, n);
        if v.norm() <= nominal {
            return Some((n, v));
        }
        if best.is_none_or(|(_, b)| v.norm() < b.norm()) {
            best = Some((n, v));
        }
    }
    best.filter(|(_, v)| v.norm() <= limit)
}

fn throw(s: &mut SkillState, world: &World, d: &RobotDescriptor, eff: Effector) -> Result<Step, String> {
    let object = object_id(s);
    let o = world.body(&object).ok_or_else(|| format!("{object} no longer exists"))?;
    if s.phase == Phase::Flight {
        let budget = s.flight_ticks.unwrap_or(0) + 300;
        if s.phase_ticks > budget {
            return Err(format!("{object} did not reach the target"));
        }
        return Step::go(track_velocity(d, world, Vec3::ZERO));
    }
    if !holds(world, d, &object) {
        return Err(format!("{} is not holding {object}", d.id));
    }
    let accel = if d.is_thrust_driven() { d.limits.max_force / eff.mass } else { d.limits.max_accel };
    let nominal = d.limits.max_throw_speed.min(1.5);
    let target = s.invocation.vector("target");
    let fixed = s.invocation.vector("velocity");
    // Plans from where the object will be once the ramp to `v` is done.
    let plan_from = |p: Vec3| -> Result<(u32, Vec3), String> {
        let q = target.unwrap_or_default();
        let mut release_at = p;
        let mut best = None;
        for _ in 0..4 {
            let (n, v) = plan_throw(release_at, q, world.gravity, o.drag_coeff, world.dt, nominal, d.limits.max_throw_speed)
                .ok_or_else(|| "target out of throwing range".to_string())?;
            release_at = p + v * (v.norm() / (2.0 * accel) + 0.5 * world.dt);
            best = Some((n, v));
        }
        Ok(best.expect("at least one iteration"))
    };
    match s.phase {
        Phase::Backoff => {
            let desired = match fixed {
                Some(v) => v,
                None => plan_from(o.position())?.1,
            };
            let dir = desired.normalized_or_zero();
            let windup = desired.norm_squared() / (2.0 * accel) + 0.02;
            let start = *s.anchor.get_or_insert_with(|| d.clamp_to_workspace(eff.position - dir * windup));
            let settled = eff.position.distance(start) <= 0.02 && eff.velocity.norm() <= 0.05;
            if settled || s.phase_ticks > 500 {
                let (n, v) = match fixed {
                    Some(v) => (0, v),
                    None => plan_from(o.position())?,
                };
                s.flight_ticks = Some(n);
                s.aim = Some(v);
                s.enter(Phase::Windup);
            }
            Step::go(servo(d, world, start, Vec3::ZERO, 1.0))
        }
        _ => {
            let desired = s.aim.unwrap_or_default();
            let mismatch = (eff.velocity - desired).norm();
            if mismatch <= RELEASE_MATCH * desired.norm().max(1e-3) {
                s.release_velocity = Some(eff.velocity);
                s.enter(Phase::Flight);
                return Ok(Step { commands: track_velocity(d, world, eff.velocity), grasp: Some(GraspAction::Detach(object)) });
            }
            if s.phase_ticks > 1000 {
                return Err("could not reach release velocity".into());
            }
            Step::go(track_velocity(d, world, desired))
        }
    }
}

fn articulate(s: &mut SkillState, world: &World, d: &RobotDescriptor, eff: Effector) -> Result<Step, String> {
    let id = s.invocation.id("articulation").unwrap_or_default().to_string();
    let art = world.articulation(&id).ok_or_else(|| format!("{id} no longer exists"))?;
    let (goal, opening) = match s.spec.object {
        Some(ObjectRequirement::ArticulationAtLeast { value, .. }) => (value, true),
        Some(ObjectRequirement::ArticulationAtMost { value, .. }) => (value, false),
        _ => return Err("articulation skill without an articulation requirement".into()),
    };
    if opening && goal > art.limits[1] || !opening && goal < art.limits[0] {
        return Err(format!("{id} cannot reach {goal}"));
    }
    let handle = art.handle_position();
    match s.phase {
        Phase::Approach => {
            if eff.position.distance(handle) <= HANDLE_CAPTURE {
                s.enter(Phase::Drive);
            }
            Step::go(servo(d, world, handle, Vec3::ZERO, 1.0))
        }
        Phase::Drive => {
            let aim = art.clamp(if opening { goal + 0.03 } else { goal - 0.03 });
            let passed = if opening { art.value >= (goal + 0.02).min(aim) } else { art.value <= (goal - 0.02).max(aim) };
            if passed {
                s.enter(Phase::Settle);
                return Step::go(track_velocity(d, world, Vec3::ZERO));
            }
            let arm = match art.kind {
                ArticulationKind::Drawer => 1.0,
                _ => art.handle_arm.norm().max(1e-3),
            };
            let rate_max = d.limits.max_articulation_rate.min(0.5 * d.limits.max_speed / arm);
            let rate = (2.0 * (aim - art.value)).clamp(-rate_max, rate_max);
            let next = art.handle_at(art.clamp(art.value + rate * world.dt));
            let v_ff = (next - handle) / world.dt;
            let mut commands = servo(d, world, next, v_ff, 1.0);
            if eff.position.distance(handle) <= DRIVE_RANGE {
                commands.push(ActuationCommand::ArticulationDrive { articulation: id, rate });
            }
            Step::go(commands)
        }
        _ => Step::go(track_velocity(d, world, Vec3::ZERO)),
    }
}

/// Applies a controller's grasp request to the world.
pub fn apply_grasp_action(world: &mut World, executor: &str, action: &GraspAction) -> Result<(), GraspError> {
    match action {
        GraspAction::Attach(o) => world.attach_grasp(executor, o),
        GraspAction::Detach(o) => world.detach_grasp(o),
        GraspAction::TakeOver(o) => world.transfer_grasp(executor, o),
    }
}
