use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::math::{Pose, Twist, Vec3};
use crate::sim::World;

use super::kind::SkillKind;

/// Terminal window shared by all skills unless an invocation overrides it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerminalWindow {
    pub position_tolerance: f64,
    pub orientation_tolerance: f64,
    pub max_end_speed: f64,
    pub max_end_accel: f64,
    pub timeout: u32,
}

impl Default for TerminalWindow {
    fn default() -> Self {
        TerminalWindow {
            position_tolerance: 0.01,
            orientation_tolerance: 0.1,
            max_end_speed: 0.05,
            max_end_accel: 0.5,
            timeout: 3000,
        }
    }
}

/// Requirement on the manipulated object (or articulation) at the final tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "require", rename_all = "snake_case")]
pub enum ObjectRequirement {
    HeldBy { object: String, gripper: String },
    Free { object: String },
    At { object: String, position: Vec3, tolerance: f64 },
    ArticulationAtLeast { articulation: String, value: f64 },
    ArticulationAtMost { articulation: String, value: f64 },
    /// Released with this velocity; relative speed and angular tolerance.
    Released { object: String, velocity: Vec3, speed_tolerance: f64, angle_tolerance: f64 },
}

impl ObjectRequirement {
    pub fn object(&self) -> Option<&str> {
        match self {
            ObjectRequirement::HeldBy { object, .. }
            | ObjectRequirement::Free { object }
            | ObjectRequirement::At { object, .. }
            | ObjectRequirement::Released { object, .. } => Some(object),
            _ => None,
        }
    }

    pub fn articulation(&self) -> Option<&str> {
        match self {
            ObjectRequirement::ArticulationAtLeast { articulation, .. }
            | ObjectRequirement::ArticulationAtMost { articulation, .. } => Some(articulation),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminationSpec {
    /// Executor effector pose to end at, if the skill ends at a place.
    pub target: Option<Pose>,
    pub position_tolerance: f64,
    pub orientation_tolerance: f64,
    pub max_end_speed: f64,
    pub max_end_accel: f64,
    pub object: Option<ObjectRequirement>,
    pub timeout: u32,
}

impl TerminationSpec {
    pub fn new(window: &TerminalWindow) -> TerminationSpec {
        TerminationSpec {
            target: None,
            position_tolerance: window.position_tolerance,
            orientation_tolerance: window.orientation_tolerance,
            max_end_speed: window.max_end_speed,
            max_end_accel: window.max_end_accel,
            object: None,
            timeout: window.timeout,
        }
    }

    pub fn at(mut self, p: Vec3) -> TerminationSpec {
        self.target = Some(Pose::from_position(p));
        self
    }

    pub fn requiring(mut self, r: ObjectRequirement) -> TerminationSpec {
        self.object = Some(r);
        self
    }

    pub fn end_speed(mut self, s: f64) -> TerminationSpec {
        self.max_end_speed = s;
        self
    }

    pub fn end_accel(mut self, a: f64) -> TerminationSpec {
        self.max_end_accel = a;
        self
    }

    pub fn is_well_formed(&self) -> bool {
        self.position_tolerance > 0.0
            && self.orientation_tolerance > 0.0
            && self.max_end_speed > 0.0
            && self.max_end_accel > 0.0
            && self.timeout > 0
    }

    /// First violated predicate, or `Ok` when every predicate holds.
    pub fn check(&self, end: &EndState) -> Result<(), String> {
        if let Some(t) = &self.target {
            let d = end.executor_pose.position.distance(t.position);
            if d > self.position_tolerance {
                return Err(format!("position error {d:.4} m"));
            }
            let q = (t.orientation.conjugate() * end.executor_pose.orientation).normalized();
            let angle = 2.0 * q.w.abs().min(1.0).acos();
            if angle > self.orientation_tolerance {
                return Err(format!("orientation error {angle:.3} rad"));
            }
        }
        let speed = end.executor_twist.linear.norm();
        if speed > self.max_end_speed {
            return Err(format!("end speed {speed:.4} m/s"));
        }
        let accel = end.executor_accel.norm();
        if accel > self.max_end_accel {
            return Err(format!("end acceleration {accel:.4} m/s^2"));
        }
        match &self.object {
            None => Ok(()),
            Some(req) => check_requirement(req, end),
        }
    }
}

fn check_requirement(req: &ObjectRequirement, end: &EndState) -> Result<(), String> {
    if let Some(id) = req.object() {
        if end.object.as_ref().map(|o| o.id.as_str()) != Some(id) {
            return Err(format!("no end state recorded for `{id}`"));
        }
    }
    let obj = end.object.as_ref();
    match req {
        ObjectRequirement::HeldBy { object, gripper } => match obj.and_then(|o| o.held_by.as_deref()) {
            Some(g) if g == gripper => Ok(()),
            _ => Err(format!("{object} not held by {gripper}")),
        },
        ObjectRequirement::Free { object } => match obj.and_then(|o| o.held_by.as_deref()) {
            None => Ok(()),
            Some(g) => Err(format!("{object} still held by {g}")),
        },
        ObjectRequirement::At { object, position, tolerance } => {
            let d = obj.map_or(f64::INFINITY, |o| o.pose.position.distance(*position));
            if d <= *tolerance {
                Ok(())
            } else {
                Err(format!("{object} is {d:.3} m from its target"))
            }
        }
        ObjectRequirement::ArticulationAtLeast { articulation, value } => match &end.articulation {
            Some((id, v)) if id == articulation && *v >= *value => Ok(()),
            _ => Err(format!("{articulation} below {value}")),
        },
        ObjectRequirement::ArticulationAtMost { articulation, value } => match &end.articulation {
            Some((id, v)) if id == articulation && *v <= *value => Ok(()),
            _ => Err(format!("{articulation} above {value}")),
        },
        ObjectRequirement::Released { object, velocity, speed_tolerance, angle_tolerance } => {
            if obj.and_then(|o| o.held_by.as_ref()).is_some() {
                return Err(format!("{object} not released"));
            }
            let Some(v) = end.release_velocity else {
                return Err(format!("{object} release velocity not recorded"));
            };
            let want = velocity.norm();
            if (v.norm() - want).abs() > speed_tolerance * want {
                return Err(format!("release speed {:.3} vs {want:.3}", v.norm()));
            }
            if want > 0.0 && v.angle_to(*velocity) > *angle_tolerance {
                return Err(format!("release direction off by {:.3} rad", v.angle_to(*velocity)));
            }
            Ok(())
        }
    }
}

/// Named invocation parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Vector(Vec3),
    Id(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillInvocation {
    pub skill: SkillKind,
    pub executor: String,
    pub params: BTreeMap<String, ParamValue>,
    pub termination: TerminationSpec,
}

impl SkillInvocation {
    pub fn id(&self, key: &str) -> Option<&str> {
        match self.params.get(key) {
            Some(ParamValue::Id(s)) => Some(s),
            _ => None,
        }
    }

    pub fn vector(&self, key: &str) -> Option<Vec3> {
        match self.params.get(key) {
            Some(ParamValue::Vector(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        match self.params.get(key) {
            Some(ParamValue::Number(v)) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectState {
    pub id: String,
    pub pose: Pose,
    pub twist: Twist,
    pub held_by: Option<String>,
}

/// Executor and manipulated-object state at a skill's final tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndState {
    pub executor_pose: Pose,
    pub executor_twist: Twist,
    pub executor_accel: Vec3,
    pub object: Option<ObjectState>,
    pub articulation: Option<(String, f64)>,
    pub release_velocity: Option<Vec3>,
}

impl EndState {
    /// Reads the state a termination spec refers to from the world.
    pub fn capture(
        world: &World,
        executor: &str,
        object: Option<&str>,
        articulation: Option<&str>,
        prev_velocity: Option<Vec3>,
        release_velocity: Option<Vec3>,
    ) -> EndState {
        let (pose, twist) = world
            .body(executor)
            .map(|b| (Pose { position: b.grip_point(), orientation: b.pose.orientation }, b.twist))
            .unwrap_or((Pose::IDENTITY, Twist::ZERO));
        let accel = match prev_velocity {
            Some(v) if world.dt > 0.0 => (twist.linear - v) / world.dt,
            _ => Vec3::ZERO,
        };
        let object = object.and_then(|id| world.body(id)).map(|b| ObjectState {
            id: b.id.clone(),
            pose: b.pose,
            twist: b.twist,
            held_by: world.holder_of(&b.id).map(str::to_string),
        });
        let articulation = articulation.and_then(|id| world.articulation(id)).map(|a| (a.id.clone(), a.value));
        EndState {
            executor_pose: pose,
            executor_twist: twist,
            executor_accel: accel,
            object,
            articulation,
            release_velocity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason")]
pub enum SkillStatus {
    Succeeded,
    Failed(String),
    Timeout,
    Aborted(String),
}

impl SkillStatus {
    pub fn is_success(&self) -> bool {
        matches!(self, SkillStatus::Succeeded)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillOutcome {
    pub skill: SkillKind,
    pub executor: String,
    pub status: SkillStatus,
    pub end_state: EndState,
    pub ticks_used: u32,
}
