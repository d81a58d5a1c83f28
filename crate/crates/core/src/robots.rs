//! Executor archetypes, their capability table and actuation plumbing.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

use crate::math::{Aabb, Pose, Vec3};
use crate::sim::{Body, BodyCommand, CollisionClass, StationLayout, World};
use crate::skills::SkillKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RobotKind {
    FreeFlying,
    RailType,
    Dexterous,
    Human,
}

impl RobotKind {
    pub const ALL: [RobotKind; 4] = [RobotKind::FreeFlying, RobotKind::RailType, RobotKind::Dexterous, RobotKind::Human];

    pub fn letter(self) -> char {
        match self {
            RobotKind::FreeFlying => 'F',
            RobotKind::RailType => 'R',
            RobotKind::Dexterous => 'D',
            RobotKind::Human => 'H',
        }
    }

    pub fn is_human(self) -> bool {
        self == RobotKind::Human
    }

    /// The global kind -> skills table. Descriptor skill sets must be subsets.
    pub fn skill_table(self) -> BTreeSet<SkillKind> {
        use SkillKind::*;
        let list: &[SkillKind] = match self {
            RobotKind::FreeFlying => &[MoveTo, Grasp, Release, Drag, CatchFloatingCube, CrossHatch],
            RobotKind::RailType => {
                &[RailMove, Grasp, Release, PickCube, ThrowCube, OpenCabinetDoor, CloseCabinetDoor, Handover]
            }
            RobotKind::Dexterous => &[
                PickCube,
                ThrowCube,
                CatchFloatingCube,
                OpenCabinetDoor,
                CloseCabinetDoor,
                OpenBox,
                PickFromBox,
                Handover,
            ],
            RobotKind::Human => &[
                MoveTo,
                CrossHatch,
                Grasp,
                Release,
                Drag,
                Handover,
                PickCube,
                ThrowCube,
                CatchFloatingCube,
                OpenCabinetDoor,
                CloseCabinetDoor,
                OpenBox,
                PickFromBox,
            ],
        };
        list.iter().copied().collect()
    }

    pub fn default_limits(self) -> ControlLimits {
        match self {
            RobotKind::FreeFlying => ControlLimits {
                mass: 10.0,
                radius: 0.15,
                max_force: 10.0,
                max_speed: 0.5,
                max_accel: 1.0,
                position_gain: 1.0,
                velocity_gain: 4.0,
                reach: 0.0,
                rail_speed: 0.0,
                max_articulation_rate: 0.0,
                max_throw_speed: 1.0,
            },
            RobotKind::Human => ControlLimits {
                mass: 70.0,
                radius: 0.25,
                max_force: 70.0,
                max_speed: 1.0,
                max_accel: 1.0,
                position_gain: 1.0,
                velocity_gain: 4.0,
                reach: 0.0,
                rail_speed: 0.0,
                max_articulation_rate: 1.0,
                max_throw_speed: 2.0,
            },
            RobotKind::RailType => ControlLimits {
                mass: 5.0,
                radius: 0.03,
                max_force: 0.0,
                max_speed: 0.6,
                max_accel: 20.0,
                position_gain: 2.0,
                velocity_gain: 0.0,
                reach: 2.5,
                rail_speed: 0.5,
                max_articulation_rate: 1.0,
                max_throw_speed: 4.0,
            },
            RobotKind::Dexterous => ControlLimits {
                mass: 5.0,
                radius: 0.03,
                max_force: 0.0,
                max_speed: 1.0,
                max_accel: 20.0,
                position_gain: 2.0,
                velocity_gain: 0.0,
                reach: 0.0,
                rail_speed: 0.0,
                max_articulation_rate: 1.0,
                max_throw_speed: 4.0,
            },
        }
    }
}

impl fmt::Display for RobotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RobotKind::FreeFlying => "FreeFlying",
            RobotKind::RailType => "RailType",
            RobotKind::Dexterous => "Dexterous",
            RobotKind::Human => "Human",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Locomotion {
    WholeStation,
    RailBound(Vec<String>),
    FixedBase(Pose),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DragCapability {
    None,
    ShortRange(f64),
    Stable,
}

impl DragCapability {
    pub fn allows(self, distance: f64) -> bool {
        match self {
            DragCapability::None => distance <= 0.0,
            DragCapability::ShortRange(max) => distance <= max,
            DragCapability::Stable => true,
        }
    }
}

/// Per-executor control and body parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlLimits {
    /// Body mass of a thrust-driven executor (kg).
    pub mass: f64,
    pub radius: f64,
    /// Thrust limit (N).
    pub max_force: f64,
    /// Cruise speed of the effector (m/s).
    pub max_speed: f64,
    /// Acceleration limit used when shaping kinematic motion (m/s^2).
    pub max_accel: f64,
    /// Position loop bandwidth (1/s).
    pub position_gain: f64,
    /// Velocity loop gain of thrust-driven executors (1/s).
    pub velocity_gain: f64,
    /// Gripper reach from the rail carriage (m).
    pub reach: f64,
    pub rail_speed: f64,
    pub max_articulation_rate: f64,
    /// Hard gripper speed limit, reached only while throwing.
    pub max_throw_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotDescriptor {
    pub id: String,
    pub kind: RobotKind,
    pub skills: BTreeSet<SkillKind>,
    pub locomotion: Locomotion,
    pub payload_limit: f64,
    pub drag_capability: DragCapability,
    /// Security boundary: union of boxes the effector must stay in.
    pub workspace: Vec<Aabb>,
    pub gripper_offset: Vec3,
    /// Initial effector position.
    pub home: Vec3,
    pub limits: ControlLimits,
}

/// Scenario-file form of a descriptor; omitted fields take kind defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorSpec {
    pub id: String,
    pub kind: RobotKind,
    #[serde(default)]
    pub skills: Option<BTreeSet<SkillKind>>,
    #[serde(default)]
    pub locomotion: Option<Locomotion>,
    #[serde(default)]
    pub payload_limit: Option<f64>,
    #[serde(default)]
    pub drag_capability: Option<DragCapability>,
    #[serde(default)]
    pub workspace: Option<Vec<Aabb>>,
    #[serde(default)]
    pub gripper_offset: Option<Vec3>,
    pub home: Vec3,
    #[serde(default)]
    pub limits: Option<ControlLimits>,
}

/// `(field, reason)` problems in an executor declaration.
pub type DescriptorIssue = (String, String);

impl DescriptorSpec {
    pub fn resolve(&self, layout: &StationLayout) -> Result<RobotDescriptor, DescriptorIssue> {
        let field = |f: &str| format!("executors.{}.{f}", self.id);
        let kind = self.kind;
        let locomotion = match (&self.locomotion, kind) {
            (Some(l), _) => l.clone(),
            (None, RobotKind::FreeFlying | RobotKind::Human) => Locomotion::WholeStation,
            (None, RobotKind::RailType) => {
                let rail = layout
                    .rails
                    .iter()
                    .min_by(|a, b| a.closest_point(self.home).distance.total_cmp(&b.closest_point(self.home).distance))
                    .ok_or_else(|| (field("locomotion"), "no rail in layout".to_string()))?;
                Locomotion::RailBound(vec![rail.id.clone()])
            }
            (None, RobotKind::Dexterous) => Locomotion::FixedBase(Pose::from_position(self.home)),
        };
        let workspace = match &self.workspace {
            Some(w) => w.clone(),
            None => match &locomotion {
                Locomotion::WholeStation => station_volume(layout),
                Locomotion::RailBound(rails) => {
                    let mut out = Vec::new();
                    for r in rails {
                        let rail = layout.rail(r).ok_or_else(|| (field("locomotion"), format!("unknown rail `{r}`")))?;
                        let m = layout
                            .module(&rail.module)
                            .ok_or_else(|| (field("locomotion"), format!("rail `{r}` has no module")))?;
                        if !out.contains(&m.interior) {
                            out.push(m.interior);
                        }
                    }
                    out
                }
                Locomotion::FixedBase(_) => {
                    return Err((field("workspace"), "a fixed-base executor needs an explicit workspace".into()))
                }
            },
        };
        let d = RobotDescriptor {
            id: self.id.clone(),
            kind,
            skills: self.skills.clone().unwrap_or_else(|| kind.skill_table()),
            locomotion,
            payload_limit: self.payload_limit.unwrap_or(match kind {
                RobotKind::FreeFlying => 5.0,
                RobotKind::Human => 20.0,
                _ => 3.0,
            }),
            drag_capability: self.drag_capability.unwrap_or(match kind {
                RobotKind::FreeFlying => DragCapability::ShortRange(2.0),
                RobotKind::Dexterous => DragCapability::None,
                _ => DragCapability::Stable,
            }),
            workspace,
            gripper_offset: self.gripper_offset.unwrap_or(Vec3::ZERO),
            home: self.home,
            limits: self.limits.unwrap_or_else(|| kind.default_limits()),
        };
        d.validate(layout)?;
        Ok(d)
    }
}

/// Every module interior plus every hatch aperture.
pub fn station_volume(layout: &StationLayout) -> Vec<Aabb> {
    layout.modules.iter().map(|m| m.interior).chain(layout.hatches.iter().map(|h| h.aperture)).collect()
}

impl RobotDescriptor {
    /// Descriptor with kind defaults; rail robots bind to the rail nearest `home`.
    pub fn with_defaults(
        id: impl Into<String>,
        kind: RobotKind,
        home: Vec3,
        layout: &StationLayout,
    ) -> Result<RobotDescriptor, DescriptorIssue> {
        DescriptorSpec {
            id: id.into(),
            kind,
            skills: None,
            locomotion: None,
            payload_limit: None,
            drag_capability: None,
            workspace: None,
            gripper_offset: None,
            home,
            limits: None,
        }
        .resolve(layout)
    }

    pub fn validate(&self, layout: &StationLayout) -> Result<(), DescriptorIssue> {
        let field = |f: &str| format!("executors.{}.{f}", self.id);
        let table = self.kind.skill_table();
        if let Some(s) = self.skills.iter().find(|s| !table.contains(s)) {
            return Err((field("skills"), format!("{s} is not a {} skill", self.kind)));
        }
        match (&self.locomotion, self.kind) {
            (Locomotion::RailBound(rails), RobotKind::RailType) => {
                let mut module = None;
                for r in rails {
                    let rail = layout.rail(r).ok_or_else(|| (field("locomotion"), format!("unknown rail `{r}`")))?;
                    match module {
                        None => module = Some(rail.module.clone()),
                        Some(ref m) if *m != rail.module => {
                            return Err((field("locomotion"), "rails span more than one module".into()))
                        }
                        _ => {}
                    }
                }
                if rails.is_empty() {
                    return Err((field("locomotion"), "rail-bound executor without rails".into()));
                }
            }
            (Locomotion::FixedBase(_), RobotKind::Dexterous) => {
                if let Some(s) = self.skills.iter().find(|s| s.is_locomotion()) {
                    return Err((field("skills"), format!("fixed-base executor cannot have {s}")));
                }
            }
            (Locomotion::WholeStation, RobotKind::FreeFlying | RobotKind::Human) => {}
            (l, k) => return Err((field("locomotion"), format!("{l:?} is not valid for {k}"))),
        }
        if self.workspace.is_empty() {
            return Err((field("workspace"), "empty workspace".into()));
        }
        if !self.in_workspace(self.home) {
            return Err((field("home"), "home position outside workspace".into()));
        }
        if self.payload_limit.is_nan() || self.payload_limit <= 0.0 {
            return Err((field("payload_limit"), "must be positive".into()));
        }
        Ok(())
    }

    pub fn has_skill(&self, s: SkillKind) -> bool {
        self.skills.contains(&s)
    }

    pub fn in_workspace(&self, p: Vec3) -> bool {
        self.workspace.iter().any(|w| w.contains(p))
    }

    /// Nearest point of the workspace union.
    pub fn clamp_to_workspace(&self, p: Vec3) -> Vec3 {
        if self.in_workspace(p) {
            return p;
        }
        self.workspace
            .iter()
            .map(|w| w.clamp_point(p))
            .min_by(|a, b| a.distance(p).total_cmp(&b.distance(p)))
            .unwrap_or(p)
    }

    /// Module a rail-bound executor is confined to.
    pub fn rail_module<'a>(&self, layout: &'a StationLayout) -> Option<&'a str> {
        match &self.locomotion {
            Locomotion::RailBound(rails) => {
                rails.first().and_then(|r| layout.rail(r)).map(|r| r.module.as_str())
            }
            _ => None,
        }
    }

    pub fn rail_id(&self) -> Option<&str> {
        match &self.locomotion {
            Locomotion::RailBound(rails) => rails.first().map(String::as_str),
            _ => None,
        }
    }

    /// Body whose grip point does the grasping. Always the executor id.
    pub fn effector_body(&self) -> &str {
        &self.id
    }

    pub fn carriage_body(&self) -> String {
        format!("{}/carriage", self.id)
    }

    pub fn base_body(&self) -> String {
        format!("{}/base", self.id)
    }

    /// Thrust-driven executors integrate as dynamic bodies; the others move
    /// kinematic grippers.
    pub fn is_thrust_driven(&self) -> bool {
        matches!(self.kind, RobotKind::FreeFlying | RobotKind::Human)
    }

    /// Bodies representing this executor in the world.
    pub fn spawn_bodies(&self, layout: &StationLayout) -> Vec<Body> {
        let l = &self.limits;
        match self.kind {
            RobotKind::FreeFlying | RobotKind::Human => {
                let mut b = Body::sphere(&self.id, l.radius, l.mass, self.home);
                b.collision = CollisionClass::Agent;
                b.restitution = 0.2;
                b.grip_offset = self.gripper_offset;
                vec![b]
            }
            RobotKind::RailType => {
                let rail_point = self
                    .rail_id()
                    .and_then(|r| layout.rail(r))
                    .map(|r| r.closest_point(self.home).point)
                    .unwrap_or(self.home);
                let mut carriage = Body::cuboid(self.carriage_body(), Vec3::new(0.15, 0.15, 0.08), l.mass, rail_point);
                carriage.flags.kinematic = true;
                carriage.collision = CollisionClass::None;
                vec![carriage, self.gripper()]
            }
            RobotKind::Dexterous => {
                let base_pos = match &self.locomotion {
                    Locomotion::FixedBase(p) => p.position,
                    _ => self.home,
                };
                let mut base = Body::sphere(self.base_body(), 0.1, l.mass, base_pos);
                base.flags.is_static = true;
                base.collision = CollisionClass::None;
                vec![base, self.gripper()]
            }
        }
    }

    fn gripper(&self) -> Body {
        let mut g = Body::sphere(&self.id, self.limits.radius, 1.0, self.home);
        g.flags.kinematic = true;
        g.collision = CollisionClass::None;
        g.grip_offset = self.gripper_offset;
        g
    }

    /// One-line affordance summary used in prompts and state descriptions.
    pub fn summary(&self) -> String {
        let loco = match &self.locomotion {
            Locomotion::WholeStation => "moves through the whole station".to_string(),
            Locomotion::RailBound(r) => format!("moves only along {} within a single module", r.join(", ")),
            Locomotion::FixedBase(p) => format!(
                "fixed base at ({:.2}, {:.2}, {:.2}); reaches only its tabletop workspace",
                p.position.x, p.position.y, p.position.z
            ),
        };
        let drag = match self.drag_capability {
            DragCapability::None => "cannot drag objects".to_string(),
            DragCapability::ShortRange(d) => format!("drags objects at most {d} m"),
            DragCapability::Stable => "carries objects stably".to_string(),
        };
        let skills: Vec<&str> = self.skills.iter().map(|s| s.name()).collect();
        format!(
            "{} ({}): {loco}; {drag}; payload {} kg; skills: {}",
            self.id,
            self.kind,
            self.payload_limit,
            skills.join(", ")
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Ok,
    Reject(String),
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Ok)
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Verdict::Ok => None,
            Verdict::Reject(r) => Some(r),
        }
    }
}

/// What a skill would touch: the object it manipulates, any target points,
/// and how far the executor would carry the object.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SkillContext {
    pub object: Option<String>,
    pub points: Vec<Vec3>,
    pub carry_distance: Option<f64>,
}

impl SkillContext {
    pub fn object(id: impl Into<String>) -> SkillContext {
        SkillContext { object: Some(id.into()), ..SkillContext::default() }
    }

    pub fn with_point(mut self, p: Vec3) -> SkillContext {
        self.points.push(p);
        self
    }

    pub fn with_carry(mut self, d: f64) -> SkillContext {
        self.carry_distance = Some(d);
        self
    }
}

pub const OUTSIDE_DOMAIN: &str = "outside locomotion domain";

/// Pure evaluation of the affordance table.
pub fn capability_check(desc: &RobotDescriptor, skill: SkillKind, world: &World, ctx: &SkillContext) -> Verdict {
    if !desc.has_skill(skill) {
        return Verdict::Reject(format!("{} lacks skill {skill}", desc.id));
    }
    if skill.zero_g_only() && world.gravity != Vec3::ZERO {
        return Verdict::Reject(format!("{skill} is undefined under gravity"));
    }
    let object = match ctx.object.as_deref() {
        Some(id) => match world.body(id) {
            Some(b) => Some(b),
            None => return Verdict::Reject(format!("unknown object `{id}`")),
        },
        None => None,
    };
    if let Some(o) = object {
        if o.mass > desc.payload_limit && !matches!(skill, SkillKind::OpenBox) {
            return Verdict::Reject(format!("{} exceeds payload limit of {} kg", o.id, desc.payload_limit));
        }
    }
    let mut points: Vec<Vec3> = ctx.points.clone();
    if let Some(o) = object {
        points.push(o.position());
    }
    match desc.kind {
        RobotKind::RailType => {
            let Some(module) = desc.rail_module(&world.layout).and_then(|m| world.layout.module(m)) else {
                return Verdict::Reject("rail executor without a module".into());
            };
            if points.iter().any(|p| !module.interior.contains(*p)) {
                return Verdict::Reject(OUTSIDE_DOMAIN.into());
            }
        }
        RobotKind::Dexterous => {
            if let Some(o) = object {
                if !desc.in_workspace(o.position()) {
                    let what = if o.flags.fixed_to_surface { "fixed object" } else { "free-floating object" };
                    return Verdict::Reject(format!("{what} {} outside workspace", o.id));
                }
            }
            if ctx.points.iter().any(|p| !desc.in_workspace(*p)) {
                return Verdict::Reject("target outside workspace".into());
            }
        }
        RobotKind::FreeFlying | RobotKind::Human => {
            if points.iter().any(|p| !desc.in_workspace(*p)) {
                return Verdict::Reject(OUTSIDE_DOMAIN.into());
            }
        }
    }
    if let Some(d) = ctx.carry_distance {
        if desc.kind == RobotKind::FreeFlying && !desc.drag_capability.allows(d) {
            return Verdict::Reject(format!("drag distance {d:.2} m exceeds short-range limit"));
        }
        if desc.drag_capability == DragCapability::None && d > 0.0 && desc.kind != RobotKind::Dexterous {
            return Verdict::Reject("cannot drag objects".into());
        }
    }
    Verdict::Ok
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ActuationCommand {
    /// Thrust in newtons (free-flyers, human avatar).
    Thrust(Vec3),
    /// Signed carriage speed along a rail (m/s).
    RailDrive { rail: String, speed: f64 },
    /// Gripper velocity in the world frame (m/s).
    GripperMove(Vec3),
    /// Articulation rate (rad/s or m/s); the effector must be at the handle.
    ArticulationDrive { articulation: String, rate: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ActuationEvent {
    Clamped { quantity: String, requested: f64, limit: f64 },
    OffWorkspace { executor: String, requested: Vec3, reached: Vec3 },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Actuation {
    pub commands: Vec<BodyCommand>,
    pub events: Vec<ActuationEvent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActuationError {
    #[error("{command} is not available to a {kind} executor")]
    IncompatibleCommand { command: &'static str, kind: RobotKind },
    #[error("executor `{executor}` is not on rail `{rail}`")]
    OffRail { executor: String, rail: String },
    #[error("executor `{0}` has no body in the world")]
    MissingBody(String),
    #[error("unknown articulation `{0}`")]
    UnknownArticulation(String),
    #[error("effector of `{executor}` is not at the handle of `{articulation}`")]
    HandleOutOfReach { executor: String, articulation: String },
}

/// How close the effector must be to a handle to drive it.
pub const HANDLE_REACH: f64 = 0.1;

pub fn apply_actuation(
    desc: &RobotDescriptor,
    command: &ActuationCommand,
    world: &World,
) -> Result<Actuation, ActuationError> {
    apply_actuations(desc, std::slice::from_ref(command), world)
}

fn command_name(c: &ActuationCommand) -> &'static str {
    match c {
        ActuationCommand::Thrust(_) => "Thrust",
        ActuationCommand::RailDrive { .. } => "RailDrive",
        ActuationCommand::GripperMove(_) => "GripperMove",
        ActuationCommand::ArticulationDrive { .. } => "ArticulationDrive",
    }
}

fn clamp_event(out: &mut Vec<ActuationEvent>, quantity: &str, requested: f64, limit: f64) {
    if requested > limit {
        out.push(ActuationEvent::Clamped { quantity: quantity.into(), requested, limit });
    }
}

/// Translates one tick of executor commands into body commands, clamping
/// every magnitude to the descriptor's limits.
pub fn apply_actuations(
    desc: &RobotDescriptor,
    commands: &[ActuationCommand],
    world: &World,
) -> Result<Actuation, ActuationError> {
    let mut out = Actuation::default();
    let l = &desc.limits;
    let mut thrust = None;
    let mut rail_drive = None;
    let mut gripper_v = None;
    for c in commands {
        let compatible = match c {
            ActuationCommand::Thrust(_) => desc.is_thrust_driven(),
            ActuationCommand::RailDrive { .. } => desc.kind == RobotKind::RailType,
            ActuationCommand::GripperMove(_) => matches!(desc.kind, RobotKind::RailType | RobotKind::Dexterous),
            ActuationCommand::ArticulationDrive { .. } => desc.kind != RobotKind::FreeFlying,
        };
        if !compatible {
            return Err(ActuationError::IncompatibleCommand { command: command_name(c), kind: desc.kind });
        }
        match c {
            ActuationCommand::Thrust(f) => thrust = Some(*f),
            ActuationCommand::RailDrive { rail, speed } => rail_drive = Some((rail.clone(), *speed)),
            ActuationCommand::GripperMove(v) => gripper_v = Some(*v),
            ActuationCommand::ArticulationDrive { articulation, rate } => {
                let art = world
                    .articulation(articulation)
                    .ok_or_else(|| ActuationError::UnknownArticulation(articulation.clone()))?;
                let eff = world
                    .body(desc.effector_body())
                    .ok_or_else(|| ActuationError::MissingBody(desc.id.clone()))?;
                if eff.grip_point().distance(art.handle_position()) > HANDLE_REACH {
                    return Err(ActuationError::HandleOutOfReach {
                        executor: desc.id.clone(),
                        articulation: articulation.clone(),
                    });
                }
                clamp_event(&mut out.events, "articulation_rate", rate.abs(), l.max_articulation_rate);
                out.commands.push(BodyCommand::ArticulationRate {
                    articulation: articulation.clone(),
                    rate: rate.clamp(-l.max_articulation_rate, l.max_articulation_rate),
                });
            }
        }
    }

    if let Some(f) = thrust {
        clamp_event(&mut out.events, "thrust", f.norm(), l.max_force);
        out.commands.push(BodyCommand::Force { body: desc.id.clone(), force: f.clamp_norm(l.max_force) });
    }

    let kinematic = matches!(desc.kind, RobotKind::RailType | RobotKind::Dexterous);
    if !kinematic {
        return Ok(out);
    }
    let gripper = world.body(&desc.id).ok_or_else(|| ActuationError::MissingBody(desc.id.clone()))?;
    let g = gripper.position();
    let dt = world.dt;

    let mut anchor = None;
    if desc.kind == RobotKind::RailType {
        let carriage_id = desc.carriage_body();
        let carriage = world.body(&carriage_id).ok_or_else(|| ActuationError::MissingBody(carriage_id.clone()))?;
        let c = carriage.position();
        let next = match rail_drive {
            Some((rail_id, speed)) => {
                let bound = matches!(&desc.locomotion, Locomotion::RailBound(r) if r.contains(&rail_id));
                let rail = world.layout.rail(&rail_id).filter(|_| bound).ok_or_else(|| ActuationError::OffRail {
                    executor: desc.id.clone(),
                    rail: rail_id.clone(),
                })?;
                let here = rail.closest_point(c);
                if here.distance > 1e-6 {
                    return Err(ActuationError::OffRail { executor: desc.id.clone(), rail: rail_id });
                }
                clamp_event(&mut out.events, "rail_speed", speed.abs(), l.rail_speed);
                let v = speed.clamp(-l.rail_speed, l.rail_speed);
                rail.point_at(here.arc + v * dt)
            }
            None => c,
        };
        out.commands.push(BodyCommand::Target { body: carriage_id, position: next });
        anchor = Some(next);
    }

    let v = gripper_v.unwrap_or(Vec3::ZERO);
    let v_limit = l.max_speed.max(l.max_throw_speed);
    clamp_event(&mut out.events, "gripper_speed", v.norm(), v_limit);
    let requested = g + v.clamp_norm(v_limit) * dt;
    let mut reached = requested;
    if let Some(a) = anchor {
        let d = reached - a;
        if d.norm() > l.reach {
            reached = a + d.clamp_norm(l.reach);
        }
    }
    reached = desc.clamp_to_workspace(reached);
    if reached.distance(requested) > 1e-12 {
        out.events.push(ActuationEvent::OffWorkspace { executor: desc.id.clone(), requested, reached });
    }
    out.commands.push(BodyCommand::Target { body: desc.id.clone(), position: reached });
    Ok(out)
}
