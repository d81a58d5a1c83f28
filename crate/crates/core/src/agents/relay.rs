//! Serial cross-module relay of one cargo item through a chain of carriers.

use crate::cog::{CoGNode, CollaborationGraph, Roster};
use crate::math::{Aabb, Vec3};
use crate::robots::{RobotDescriptor, RobotKind, Verdict};
use crate::sim::{Predicate, RegionRef, World};
use crate::skills::{up, BOX_LIFT, HATCH_STANDOFF, LID_OPEN_ANGLE};

use super::decompose::{enclosing_lid, goal_capability, goal_location, PlanError};
use super::rearrange::nearest_executor;

/// Half-extent of the hand-over boxes placed at hatch standoff points.
pub const STAGING_HALF_EXTENT: f64 = 0.25;

/// Carrier preference for a leg after the current holder.
const CARRIER_ORDER: [RobotKind; 4] = [RobotKind::RailType, RobotKind::FreeFlying, RobotKind::Dexterous, RobotKind::Human];

struct Relay<'a> {
    task: &'a str,
    cargo: &'a str,
    roster: &'a Roster,
    world: &'a World,
    nodes: Vec<CoGNode>,
    holder: Option<String>,
    pos: Vec3,
    /// Index of the last carry node and where its carrier picked the cargo up.
    last_carry: Option<(usize, Vec3)>,
}

impl Relay<'_> {
    fn push(&mut self, label: &str, instruction: String, goal: Predicate, executor: &str) -> usize {
        let id = format!("{:02}_{label}", self.nodes.len() + 1);
        let mut n = CoGNode::new(id, instruction, goal, executor);
        if let Some(prev) = self.nodes.last() {
            n.deps.push(prev.id.clone());
        }
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    fn capable(&self, d: &RobotDescriptor, goal: &Predicate, start: Vec3) -> Verdict {
        goal_capability(goal, d, self.world, Some(start))
    }

    fn choose_carrier(&self, goal: &Predicate) -> Result<String, PlanError> {
        // A dexterous holder would throw; prefer handing over to a carrier.
        if let Some(h) = &self.holder {
            let d = &self.roster[h];
            if d.kind != RobotKind::Dexterous && self.capable(d, goal, self.pos).is_ok() {
                return Ok(h.clone());
            }
        }
        let mut reasons = Vec::new();
        for kind in CARRIER_ORDER {
            let mut ok = Vec::new();
            for d in self.roster.values().filter(|d| d.kind == kind) {
                let take = Predicate::Held { body: self.cargo.to_string(), gripper: d.id.clone() };
                let verdict = match self.capable(d, goal, self.pos) {
                    Verdict::Ok if self.holder.is_some() => self.capable(d, &take, self.pos),
                    v => v,
                };
                match verdict {
                    Verdict::Ok => ok.push(d.as_ref()),
                    Verdict::Reject(r) => reasons.push(format!("{}: {r}", d.id)),
                }
            }
            if let Some(d) = nearest_executor(ok, self.pos, self.world) {
                return Ok(d.id.clone());
            }
        }
        if reasons.is_empty() {
            reasons.push("no executors".into());
        }
        Err(PlanError::NoFeasibleRelay(format!("nobody can achieve {goal} ({})", reasons.join("; "))))
    }

    fn leg(&mut self, goal: Predicate, label: &str) -> Result<(), PlanError> {
        let location = goal_location(&goal, self.world)?.unwrap_or(self.pos);
        let carrier = self.choose_carrier(&goal)?;
        if let Some(h) = self.holder.clone().filter(|h| *h != carrier) {
            let take = Predicate::Held { body: self.cargo.to_string(), gripper: carrier.clone() };
            self.push(&format!("handover_{carrier}"), format!("{carrier}: take {} from {h}", self.cargo), take, &carrier);
            self.last_carry = None;
        }
        // Extend the previous carry of the same carrier when it can do both.
        if let Some((i, start)) = self.last_carry {
            if self.nodes[i].executor == carrier
                && i + 1 == self.nodes.len()
                && self.capable(&self.roster[&carrier], &goal, start).is_ok()
            {
                self.nodes[i].goal = Some(goal.clone());
                self.nodes[i].instruction = format!("{carrier}: bring {} to {label}", self.cargo);
                self.holder = Some(carrier);
                self.pos = location;
                return Ok(());
            }
        }
        let start = self.pos;
        let i = self.push(&format!("carry_{carrier}"), format!("{carrier}: bring {} to {label}", self.cargo), goal, &carrier);
        self.last_carry = Some((i, start));
        self.holder = Some(carrier);
        self.pos = location;
        Ok(())
    }
}

fn staging(cargo: &str, p: Vec3) -> Predicate {
    Predicate::Within {
        body: cargo.to_string(),
        region: RegionRef::Box(Aabb::from_center(p, Vec3::splat(STAGING_HALF_EXTENT))),
    }
}

/// Serial relay bringing `cargo` to satisfy `goal` (an `InContainer` or
/// `Within` goal on the cargo). A boxed cargo is first extracted by a
/// dexterous robot; each module is then traversed to the next hatch and each
/// hatch crossed by the most preferred capable carrier, with a hand-over
/// node whenever the carrier changes.
pub fn plan_relay(task: &str, cargo: &str, goal: &Predicate, roster: &Roster, world: &World) -> Result<CollaborationGraph, PlanError> {
    let body = world.body(cargo).ok_or_else(|| PlanError::UngroundedGoal(cargo.to_string()))?;
    if goal.subject() != Some(cargo) {
        return Err(PlanError::NoFeasibleRelay(format!("goal {goal} is not about {cargo}")));
    }
    let dest = goal_location(goal, world)?.ok_or_else(|| PlanError::NoFeasibleRelay(format!("goal {goal} names no place")))?;
    let layout = &world.layout;
    let no_module = |p: Vec3| PlanError::NoFeasibleRelay(format!("point {p} is outside every module"));
    let src = layout.nearest_module(body.position()).ok_or_else(|| no_module(body.position()))?;
    let dst = layout.nearest_module(dest).ok_or_else(|| no_module(dest))?;
    let hatches = layout
        .hatch_path(&src.id, &dst.id)
        .ok_or_else(|| PlanError::NoFeasibleRelay(format!("no hatch path from {} to {}", src.id, dst.id)))?;

    let mut r = Relay {
        task,
        cargo,
        roster,
        world,
        nodes: Vec::new(),
        holder: world.holder_of(cargo).map(str::to_string),
        pos: body.position(),
        last_carry: None,
    };

    let lid = enclosing_lid(world, cargo);
    if let Some(lid) = lid {
        let d = roster
            .values()
            .find(|d| d.kind == RobotKind::Dexterous && d.in_workspace(body.position()))
            .ok_or_else(|| PlanError::NoFeasibleRelay(format!("{cargo} is boxed and no dexterous robot reaches it")))?;
        if world.articulation(lid).is_some_and(|a| a.value < LID_OPEN_ANGLE) {
            let open = Predicate::DoorOpen { articulation: lid.to_string(), min_angle: LID_OPEN_ANGLE };
            if let Verdict::Reject(why) = goal_capability(&open, d, world, None) {
                return Err(PlanError::NoFeasibleRelay(format!("{} cannot open {lid}: {why}", d.id)));
            }
            r.push("open_box", format!("{}: open {lid}", d.id), open, &d.id);
        }
        let take = Predicate::Held { body: cargo.to_string(), gripper: d.id.clone() };
        r.push("extract", format!("{}: take {cargo} out of its box", d.id), take, &d.id);
        r.holder = Some(d.id.clone());
        r.pos = body.position() + up(world) * BOX_LIFT;
    } else if hatches.is_empty() {
        let capable = roster.values().filter(|d| goal_capability(goal, d, world, None).is_ok()).map(|d| d.as_ref());
        let exec = nearest_executor(capable, body.position(), world)
            .ok_or_else(|| PlanError::NoFeasibleRelay(format!("no executor can achieve {goal}")))?;
        r.push("deliver", format!("{}: deliver {cargo}", exec.id), goal.clone(), &exec.id);
        return Ok(CollaborationGraph { task: task.to_string(), nodes: r.nodes });
    }

    let mut module = src;
    for h in hatches {
        r.leg(staging(cargo, h.standoff(module, HATCH_STANDOFF)), &format!("{} staging", h.id))?;
        r.leg(staging(cargo, h.standoff(module, -HATCH_STANDOFF)), &format!("the far side of {}", h.id))?;
        let next = h.other_side(&module.id).expect("hatch on path");
        module = layout.module(next).ok_or_else(|| no_module(h.center()))?;
    }
    r.leg(goal.clone(), "its destination")?;
    Ok(CollaborationGraph { task: r.task.to_string(), nodes: r.nodes })
}
