//! Discriminator: structured state description and goal evaluation.

use serde::{Deserialize, Serialize};
use std::fmt::Write;

use crate::sim::{ArticulationKind, Body, CollisionClass, Predicate, QueryError, RegionRef, Shape, World};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDescription {
    pub text: String,
    /// Predicates that hold in the described snapshot.
    pub facts: Vec<Predicate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminatorReport {
    pub node: String,
    pub success: bool,
    pub description: String,
}

/// Static open-topped boxes that other bodies can be put into.
pub fn is_container(b: &Body) -> bool {
    b.flags.is_static && b.collision == CollisionClass::None && matches!(b.shape, Shape::Box { .. })
}

fn is_object(b: &Body) -> bool {
    !b.flags.is_static && !b.flags.kinematic && b.collision != CollisionClass::Agent
}

/// Grounded facts about every loose object and articulation, in world order.
pub fn state_facts(world: &World) -> Vec<Predicate> {
    let mut facts = Vec::new();
    for b in world.bodies().iter().filter(|b| is_object(b)) {
        if let Some(g) = world.holder_of(&b.id) {
            facts.push(Predicate::Held { body: b.id.clone(), gripper: g.to_string() });
        }
        for c in world.bodies().iter().filter(|c| is_container(c) && c.id != b.id) {
            if c.world_aabb().contains_aabb(&b.world_aabb()) {
                facts.push(Predicate::InContainer { body: b.id.clone(), container: c.id.clone() });
            }
        }
        if let Some(m) = world.module_of_point(b.position()) {
            facts.push(Predicate::Within { body: b.id.clone(), region: RegionRef::Named(m.to_string()) });
        }
    }
    for a in world.articulations() {
        facts.push(Predicate::DoorOpen { articulation: a.id.clone(), min_angle: a.value });
    }
    facts
}

fn line(world: &World, fact: &Predicate) -> String {
    match fact {
        Predicate::Held { body, gripper } => format!("{body}: held by {gripper}"),
        Predicate::InContainer { body, container } => format!("{body}: inside {container}"),
        Predicate::Within { body, region } => format!("{body}: in {region}"),
        Predicate::DoorOpen { articulation, min_angle } => {
            let what = match world.articulation(articulation).map(|a| a.kind) {
                Some(ArticulationKind::Drawer) => "extended",
                _ => "open",
            };
            format!("{articulation}: {what} {min_angle:.2}")
        }
        other => format!("{other}"),
    }
}

pub fn describe(world: &World) -> StateDescription {
    let facts = state_facts(world);
    let mut text = String::new();
    for f in &facts {
        let _ = writeln!(text, "{}", line(world, f));
    }
    StateDescription { text, facts }
}

/// Describes the snapshot and judges the node goal against it.
pub fn describe_and_evaluate(node: &str, goal: &Predicate, world: &World) -> Result<DiscriminatorReport, QueryError> {
    let success = world.query(goal)?;
    let mut d = describe(world).text;
    let _ = write!(d, "goal {goal}: {}", if success { "satisfied" } else { "not satisfied" });
    Ok(DiscriminatorReport { node: node.to_string(), success, description: d })
}
