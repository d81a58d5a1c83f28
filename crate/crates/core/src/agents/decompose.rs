//! Template expansion of a subtask goal into a skill chain.

use std::collections::BTreeMap;
use thiserror::Error;

use crate::math::Vec3;
use crate::robots::{capability_check, RobotDescriptor, RobotKind, SkillContext, Verdict, OUTSIDE_DOMAIN};
use crate::sim::{ArticulationKind, Predicate, QueryError, RegionRef, World};
use crate::skills::{ParamValue, SkillInvocation, SkillKind, TerminalWindow, TerminationSpec, LID_OPEN_ANGLE};

/// Drift speed above which a free object is caught rather than grasped.
pub const DRIFT_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("no skill template for {goal} on `{executor}`: {reason}")]
    NoTemplate { goal: String, executor: String, reason: String },
    #[error("goal refers to unknown id `{0}`")]
    UngroundedGoal(String),
    #[error("no capable executor for `{0}`")]
    UnassignableObject(String),
    #[error("no feasible relay: {0}")]
    NoFeasibleRelay(String),
}

impl From<QueryError> for PlanError {
    fn from(e: QueryError) -> Self {
        match e {
            QueryError::UnknownId(id) => PlanError::UngroundedGoal(id),
        }
    }
}

fn invocation(skill: SkillKind, executor: &str, params: Vec<(&str, ParamValue)>) -> SkillInvocation {
    SkillInvocation {
        skill,
        executor: executor.to_string(),
        params: params.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<BTreeMap<_, _>>(),
        termination: TerminationSpec::new(&TerminalWindow::default()),
    }
}

fn id(s: &str) -> ParamValue {
    ParamValue::Id(s.to_string())
}

/// Point a goal asks something to be brought to, if it names a place.
pub fn goal_location(goal: &Predicate, world: &World) -> Result<Option<Vec3>, PlanError> {
    Ok(match goal {
        Predicate::InContainer { container, .. } => {
            Some(world.resolve_region(&RegionRef::Named(container.clone()))?.center())
        }
        Predicate::Within { region, .. } => Some(world.resolve_region(region)?.center()),
        Predicate::DoorOpen { articulation, .. } | Predicate::DoorClosed { articulation, .. } => Some(
            world
                .articulation(articulation)
                .ok_or_else(|| PlanError::UngroundedGoal(articulation.clone()))?
                .handle_position(),
        ),
        Predicate::Held { body, .. } => Some(world.body(body).ok_or_else(|| PlanError::UngroundedGoal(body.clone()))?.position()),
        Predicate::Separation { .. } => None,
    })
}

/// Lid articulation of the container currently holding `object`, if any.
pub fn enclosing_lid<'a>(world: &'a World, object: &str) -> Option<&'a str> {
    let o = world.body(object)?.world_aabb();
    world
        .articulations()
        .iter()
        .filter(|a| a.kind == ArticulationKind::BoxLid)
        .find(|a| world.body(&a.parent_body).is_some_and(|c| c.world_aabb().contains_aabb(&o)))
        .map(|a| a.id.as_str())
}

struct Planner<'a> {
    goal: &'a Predicate,
    desc: &'a RobotDescriptor,
    world: &'a World,
}

impl Planner<'_> {
    fn none(&self, reason: impl Into<String>) -> PlanError {
        PlanError::NoTemplate { goal: self.goal.to_string(), executor: self.desc.id.clone(), reason: reason.into() }
    }

    fn call(&self, skill: SkillKind, params: Vec<(&str, ParamValue)>) -> Result<SkillInvocation, PlanError> {
        if !self.desc.has_skill(skill) {
            return Err(self.none(format!("lacks {skill}")));
        }
        Ok(invocation(skill, &self.desc.id, params))
    }

    fn acquire(&self, object: &str) -> Result<Vec<SkillInvocation>, PlanError> {
        let me = self.desc.id.as_str();
        let w = self.world;
        let body = w.body(object).ok_or_else(|| PlanError::UngroundedGoal(object.into()))?;
        match w.holder_of(object) {
            Some(h) if h == me => return Ok(Vec::new()),
            Some(_) => {
                // Grasping a held object takes it over atomically.
                let skill = [SkillKind::Handover, SkillKind::Grasp]
                    .into_iter()
                    .find(|s| self.desc.has_skill(*s))
                    .ok_or_else(|| self.none("cannot take objects from another gripper"))?;
                return Ok(vec![self.call(skill, vec![("object", id(object))])?]);
            }
            None => {}
        }
        if let Some(lid) = enclosing_lid(w, object) {
            let mut chain = Vec::new();
            if w.articulation(lid).is_some_and(|a| a.value < LID_OPEN_ANGLE) {
                chain.push(self.call(SkillKind::OpenBox, vec![("articulation", id(lid))])?);
            }
            chain.push(self.call(SkillKind::PickFromBox, vec![("object", id(object)), ("lid", id(lid))])?);
            return Ok(chain);
        }
        let drifting = w.gravity == Vec3::ZERO && body.twist.linear.norm() > DRIFT_THRESHOLD;
        let order: &[SkillKind] = if body.flags.fixed_to_surface {
            &[SkillKind::PickCube, SkillKind::Grasp]
        } else if drifting {
            &[SkillKind::CatchFloatingCube, SkillKind::Grasp, SkillKind::PickCube]
        } else {
            &[SkillKind::Grasp, SkillKind::PickCube]
        };
        let skill = order.iter().copied().find(|s| self.desc.has_skill(*s)).ok_or_else(|| self.none("cannot pick up objects"))?;
        Ok(vec![self.call(skill, vec![("object", id(object))])?])
    }

    fn deliver(&self, object: &str, to: Vec3, place: bool) -> Result<Vec<SkillInvocation>, PlanError> {
        let w = self.world;
        let mut chain = Vec::new();
        match self.desc.kind {
            RobotKind::FreeFlying | RobotKind::Human => {
                let from = w.body(object).map(|b| b.position()).unwrap_or(to);
                let (a, b) = (w.layout.nearest_module(from), w.layout.nearest_module(to));
                if let (Some(a), Some(b)) = (a, b) {
                    let path = w.layout.hatch_path(&a.id, &b.id).ok_or_else(|| self.none("no hatch path"))?;
                    for h in path {
                        chain.push(self.call(SkillKind::CrossHatch, vec![("hatch", id(&h.id)), ("object", id(object))])?);
                    }
                }
                chain.push(self.call(SkillKind::MoveTo, vec![("target", ParamValue::Vector(to)), ("object", id(object))])?);
            }
            RobotKind::RailType => {
                if !self.desc.in_workspace(to) {
                    return Err(self.none(OUTSIDE_DOMAIN));
                }
                chain.push(self.call(SkillKind::RailMove, vec![("target", ParamValue::Vector(to)), ("object", id(object))])?);
            }
            RobotKind::Dexterous => {
                chain.push(self.call(SkillKind::ThrowCube, vec![("object", id(object)), ("target", ParamValue::Vector(to))])?);
                return Ok(chain);
            }
        }
        if place {
            chain.push(self.call(SkillKind::Release, vec![("object", id(object))])?);
        }
        Ok(chain)
    }

    fn expand(&self) -> Result<Vec<SkillInvocation>, PlanError> {
        match self.goal {
            Predicate::Held { body, gripper } => {
                if *gripper != self.desc.id {
                    return Err(self.none(format!("goal names gripper `{gripper}`")));
                }
                self.acquire(body)
            }
            Predicate::InContainer { body, container } => {
                let to = self.world.resolve_region(&RegionRef::Named(container.clone()))?.center();
                let mut chain = self.acquire(body)?;
                chain.extend(self.deliver(body, to, true)?);
                Ok(chain)
            }
            Predicate::Within { body, region } => {
                let to = self.world.resolve_region(region)?.center();
                let mut chain = self.acquire(body)?;
                chain.extend(self.deliver(body, to, false)?);
                Ok(chain)
            }
            Predicate::DoorOpen { articulation, min_angle } => {
                let a = self.world.articulation(articulation).ok_or_else(|| PlanError::UngroundedGoal(articulation.clone()))?;
                let skill = if a.kind == ArticulationKind::BoxLid { SkillKind::OpenBox } else { SkillKind::OpenCabinetDoor };
                Ok(vec![self.call(skill, vec![("articulation", id(articulation)), ("angle", ParamValue::Number(*min_angle))])?])
            }
            Predicate::DoorClosed { articulation, max_angle } => Ok(vec![self.call(
                SkillKind::CloseCabinetDoor,
                vec![("articulation", id(articulation)), ("angle", ParamValue::Number(*max_angle))],
            )?]),
            Predicate::Separation { .. } => Err(self.none("separation goals have no template")),
        }
    }
}

/// Expands a subtask into the executor's skill chain. A goal that already
/// holds expands to the empty chain.
pub fn decompose_subtask(
    _instruction: &str,
    goal: &Predicate,
    desc: &RobotDescriptor,
    world: &World,
) -> Result<Vec<SkillInvocation>, PlanError> {
    if world.query(goal)? {
        return Ok(Vec::new());
    }
    Planner { goal, desc, world }.expand()
}

/// Whether `desc` could achieve `goal`, judged on the goal's location rather
/// than the current world state. `start` is where the subject object is
/// expected to be when the subtask begins.
pub fn goal_capability(goal: &Predicate, desc: &RobotDescriptor, world: &World, start: Option<Vec3>) -> Verdict {
    let location = match goal_location(goal, world) {
        Ok(l) => l,
        Err(e) => return Verdict::Reject(e.to_string()),
    };
    let subject = goal.subject().and_then(|s| world.body(s));
    if let Some(o) = subject {
        if o.mass > desc.payload_limit {
            return Verdict::Reject(format!("{} exceeds payload limit of {} kg", o.id, desc.payload_limit));
        }
    }
    let expected = start.is_some();
    let start = start.or_else(|| subject.map(|b| b.position()));
    // With an expected start the object is judged where it will be, not
    // where it is now.
    let mut ctx = match subject {
        Some(o) if !expected => SkillContext::object(o.id.clone()),
        _ => SkillContext::default(),
    };
    let moves = matches!(goal, Predicate::InContainer { .. } | Predicate::Within { .. });
    let (skill, carry) = match (goal, desc.kind) {
        (Predicate::Held { gripper, .. }, _) if *gripper != desc.id => {
            return Verdict::Reject(format!("goal names gripper `{gripper}`"));
        }
        (Predicate::Held { .. }, RobotKind::Dexterous) => (SkillKind::PickCube, None),
        (Predicate::Held { .. }, _) => {
            (if desc.has_skill(SkillKind::Grasp) { SkillKind::Grasp } else { SkillKind::PickCube }, None)
        }
        (_, RobotKind::RailType) if moves => (SkillKind::RailMove, None),
        (_, RobotKind::Dexterous) if moves => (SkillKind::ThrowCube, None),
        (_, _) if moves => (SkillKind::MoveTo, start.zip(location).map(|(a, b)| a.distance(b))),
        (Predicate::DoorOpen { articulation, .. }, _) => {
            let lid = world.articulation(articulation).is_some_and(|a| a.kind == ArticulationKind::BoxLid);
            (if lid { SkillKind::OpenBox } else { SkillKind::OpenCabinetDoor }, None)
        }
        (Predicate::DoorClosed { .. }, _) => (SkillKind::CloseCabinetDoor, None),
        _ => return Verdict::Reject("no template for this goal".into()),
    };
    if let Some(p) = location.filter(|_| !(moves && desc.kind == RobotKind::Dexterous)) {
        ctx = ctx.with_point(p);
    }
    if let Some(s) = start.filter(|_| expected || subject.is_none()) {
        ctx = ctx.with_point(s);
    }
    if let Some(d) = carry {
        ctx = ctx.with_carry(d);
    }
    capability_check(desc, skill, world, &ctx)
}
