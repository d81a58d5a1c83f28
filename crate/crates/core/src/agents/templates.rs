//! Instruction template table: derives a goal predicate from a node's
//! natural-language instruction when a planner leaves the goal out.

use regex::Regex;
use serde::Deserialize;
use std::sync::OnceLock;

use crate::cog::CollaborationGraph;
use crate::sim::{Predicate, PredicateArg, RawPredicate, World};
use crate::skills::{DOOR_OPEN_ANGLE, LID_OPEN_ANGLE};
use crate::sim::ArticulationKind;

#[derive(Deserialize)]
struct RawTemplate {
    pattern: String,
    goal: RawPredicate,
}

struct Template {
    pattern: Regex,
    goal: RawPredicate,
}

fn templates() -> &'static [Template] {
    static T: OnceLock<Vec<Template>> = OnceLock::new();
    T.get_or_init(|| {
        let raw: Vec<RawTemplate> =
            serde_json::from_str(include_str!("../../assets/instruction_templates.json")).expect("embedded templates parse");
        raw.into_iter()
            .map(|t| Template { pattern: Regex::new(&t.pattern).expect("embedded template regex"), goal: t.goal })
            .collect()
    })
}

/// Goal for `instruction` performed by `executor`, from the first matching
/// template. `$n` stands for capture group n, `$executor` for the executor
/// and `$open_angle` for the open angle of the named articulation.
pub fn goal_from_instruction(instruction: &str, executor: &str, world: &World) -> Option<Predicate> {
    for t in templates() {
        let Some(caps) = t.pattern.captures(instruction) else { continue };
        let first = caps.get(1).map_or("", |m| m.as_str());
        let args = t
            .goal
            .args
            .iter()
            .map(|a| match a {
                PredicateArg::Id(s) if s == "$executor" => PredicateArg::Id(executor.to_string()),
                PredicateArg::Id(s) if s == "$open_angle" => PredicateArg::Number(
                    match world.articulation(first).map(|a| a.kind) {
                        Some(ArticulationKind::BoxLid) => LID_OPEN_ANGLE,
                        _ => DOOR_OPEN_ANGLE,
                    },
                ),
                PredicateArg::Id(s) if s.starts_with('$') => {
                    let group = s[1..].parse::<usize>().ok().and_then(|i| caps.get(i));
                    PredicateArg::Id(group.map_or_else(String::new, |m| m.as_str().to_string()))
                }
                other => other.clone(),
            })
            .collect();
        if let Ok(p) = Predicate::try_from(RawPredicate { pred: t.goal.pred.clone(), args }) {
            return Some(p);
        }
    }
    None
}

/// Fills every missing goal from the template table. Returns the ids of
/// nodes whose instruction matched no template.
pub fn fill_missing_goals(g: &mut CollaborationGraph, world: &World) -> Vec<String> {
    let mut unmatched = Vec::new();
    for n in g.nodes.iter_mut().filter(|n| n.goal.is_none()) {
        n.goal = goal_from_instruction(&n.instruction, &n.executor, world);
        if n.goal.is_none() {
            unmatched.push(n.id.clone());
        }
    }
    unmatched
}
