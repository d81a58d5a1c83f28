//! Distance-based assignment of floating objects to executors.

use std::collections::BTreeMap;

use crate::cog::{CoGNode, CollaborationGraph, Roster};
use crate::math::Vec3;
use crate::robots::RobotDescriptor;
use crate::sim::{Predicate, RegionRef, World};
use crate::skills::effector;

use super::decompose::{goal_capability, PlanError};

/// Distances closer than this count as ties, which robots win.
pub const TIE_EPSILON: f64 = 1e-9;

/// Where an executor starts: its effector, or its home if it has no body.
pub fn executor_position(desc: &RobotDescriptor, world: &World) -> Vec3 {
    effector(desc, world).map_or(desc.home, |e| e.position)
}

/// Nearest of `candidates` to `p`; robots beat humans on ties, then roster order.
pub fn nearest_executor<'a>(
    candidates: impl IntoIterator<Item = &'a RobotDescriptor>,
    p: Vec3,
    world: &World,
) -> Option<&'a RobotDescriptor> {
    let mut best: Option<(&RobotDescriptor, f64)> = None;
    for d in candidates {
        let dist = executor_position(d, world).distance(p);
        let better = match best {
            None => true,
            Some((b, bd)) => dist < bd - TIE_EPSILON || (dist <= bd + TIE_EPSILON && b.kind.is_human() && !d.kind.is_human()),
        };
        if better {
            best = Some((d, dist));
        }
    }
    best.map(|(d, _)| d)
}

fn nearest_container<'a>(containers: &'a [String], p: Vec3, world: &World) -> Result<&'a str, PlanError> {
    let mut best: Option<(&str, f64)> = None;
    for c in containers {
        let centre = world.resolve_region(&RegionRef::Named(c.clone()))?.center();
        let d = centre.distance(p);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((c, d));
        }
    }
    best.map(|(c, _)| c).ok_or_else(|| PlanError::NoTemplate {
        goal: "InContainer".into(),
        executor: String::new(),
        reason: "no containers".into(),
    })
}

/// One node per object, delivering it to its nearest container, assigned to
/// the nearest capable executor. Nodes of one executor run in order of
/// distance from its start; different executors run in parallel.
pub fn plan_rearrangement(
    task: &str,
    objects: &[String],
    containers: &[String],
    roster: &Roster,
    world: &World,
) -> Result<CollaborationGraph, PlanError> {
    let mut per_exec: BTreeMap<&str, Vec<(f64, CoGNode)>> = BTreeMap::new();
    for o in objects {
        let body = world.body(o).ok_or_else(|| PlanError::UngroundedGoal(o.clone()))?;
        let p = body.position();
        let container = nearest_container(containers, p, world)?;
        let goal = Predicate::InContainer { body: o.clone(), container: container.to_string() };
        let capable = roster.values().filter(|d| goal_capability(&goal, d, world, None).is_ok()).map(|d| d.as_ref());
        let exec = nearest_executor(capable, p, world).ok_or_else(|| PlanError::UnassignableObject(o.clone()))?;
        let dist = executor_position(exec, world).distance(p);
        let node = CoGNode::new(format!("place_{o}"), format!("put {o} into {container}"), goal, exec.id.clone());
        per_exec.entry(roster.get_key_value(&exec.id).expect("from roster").0).or_default().push((dist, node));
    }
    let mut nodes = Vec::new();
    for (_, mut list) in per_exec {
        list.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut prev: Option<String> = None;
        for (_, mut n) in list {
            if let Some(p) = prev.take() {
                n.deps.push(p);
            }
            prev = Some(n.id.clone());
            nodes.push(n);
        }
    }
    Ok(CollaborationGraph { task: task.to_string(), nodes })
}
