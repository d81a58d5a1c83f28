use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

use crate::agents::goal_capability;
use crate::math::Vec3;
use crate::robots::{RobotDescriptor, RobotKind, Verdict};
use crate::sim::{Predicate, World};

/// Executors of an episode keyed by id. Iteration order is the canonical
/// executor order.
pub type Roster = BTreeMap<String, Arc<RobotDescriptor>>;

/// Resolves a node's executor name; `"human"` aliases the first human.
pub fn resolve_executor<'a>(roster: &'a Roster, name: &str) -> Option<&'a Arc<RobotDescriptor>> {
    roster
        .get(name)
        .or_else(|| (name == "human").then(|| roster.values().find(|d| d.kind == RobotKind::Human)).flatten())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeState {
    #[default]
    Pending,
    Ready,
    Running,
    Done,
    Failed,
}

impl NodeState {
    pub fn can_become(self, next: NodeState) -> bool {
        use NodeState::*;
        matches!((self, next), (Pending, Ready) | (Ready, Running) | (Running, Done) | (Running, Failed))
    }
}

impl fmt::Display for NodeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoGNode {
    pub id: String,
    pub instruction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<Predicate>,
    pub executor: String,
    #[serde(default)]
    pub deps: Vec<String>,
    /// Lifecycle state; runtime-only, never part of the wire format.
    #[serde(skip)]
    pub state: NodeState,
}

impl CoGNode {
    pub fn new(id: impl Into<String>, instruction: impl Into<String>, goal: Predicate, executor: impl Into<String>) -> CoGNode {
        CoGNode {
            id: id.into(),
            instruction: instruction.into(),
            goal: Some(goal),
            executor: executor.into(),
            deps: Vec::new(),
            state: NodeState::Pending,
        }
    }

    pub fn after(mut self, dep: impl Into<String>) -> CoGNode {
        self.deps.push(dep.into());
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollaborationGraph {
    pub task: String,
    pub nodes: Vec<CoGNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum GraphError {
    #[error("cycle: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("node `{node}` names unknown executor `{executor}`")]
    UnknownExecutor { node: String, executor: String },
    #[error("node `{node}`: {reason}")]
    CapabilityMismatch { node: String, reason: String },
    #[error("node `{node}` depends on missing node `{dep}`")]
    DanglingDep { node: String, dep: String },
    #[error("duplicate node id `{0}`")]
    DuplicateId(String),
    #[error("node `{node}` goal refers to unknown id `{id}`")]
    UngroundedGoal { node: String, id: String },
    #[error("node `{0}` has no goal")]
    MissingGoal(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ValidationOptions {
    /// Goals may be omitted (they are derived from instructions later).
    pub allow_missing_goals: bool,
}

impl CollaborationGraph {
    pub fn node(&self, id: &str) -> Option<&CoGNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    pub fn from_json(s: &str) -> Result<CollaborationGraph, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Direct successors of every node, by index.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        let index: HashMap<&str, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            for d in &n.deps {
                if let Some(&j) = index.get(d.as_str()) {
                    out[j].push(i);
                }
            }
        }
        out
    }

    /// First cycle found by depth-first search, closed (`[a, b, a]`).
    pub fn find_cycle(&self) -> Option<Vec<String>> {
        let index: HashMap<&str, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
        let n = self.nodes.len();
        let mut color = vec![0u8; n];
        let mut stack: Vec<usize> = Vec::new();
        fn visit(
            g: &CollaborationGraph,
            index: &HashMap<&str, usize>,
            u: usize,
            color: &mut [u8],
            stack: &mut Vec<usize>,
        ) -> Option<Vec<String>> {
            color[u] = 1;
            stack.push(u);
            for d in &g.nodes[u].deps {
                let Some(&v) = index.get(d.as_str()) else { continue };
                if color[v] == 1 {
                    let from = stack.iter().position(|&x| x == v).expect("on stack");
                    // Reversed DFS stack: each node is a prerequisite of the next.
                    let mut cycle: Vec<String> = stack[from..].iter().rev().map(|&i| g.nodes[i].id.clone()).collect();
                    cycle.push(cycle[0].clone());
                    return Some(cycle);
                }
                if color[v] == 0 {
                    if let Some(c) = visit(g, index, v, color, stack) {
                        return Some(c);
                    }
                }
            }
            stack.pop();
            color[u] = 2;
            None
        }
        for u in 0..n {
            if color[u] == 0 {
                if let Some(c) = visit(self, &index, u, &mut color, &mut stack) {
                    return Some(c);
                }
            }
        }
        None
    }
}

/// Where each node's subject object is expected to be when the node starts:
/// the location of the closest upstream goal placing the same object.
/// Hand-overs leave the object where it was, so they are looked through.
fn expected_starts(g: &CollaborationGraph, world: &World) -> Vec<Option<Vec3>> {
    let index: HashMap<&str, usize> = g.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
    g.nodes
        .iter()
        .map(|n| {
            let subject = n.goal.as_ref().and_then(|p| p.subject())?;
            let mut frontier: Vec<&str> = n.deps.iter().map(String::as_str).collect();
            let mut seen = HashSet::new();
            while let Some(d) = frontier.pop() {
                if !seen.insert(d) {
                    continue;
                }
                let Some(&j) = index.get(d) else { continue };
                let dep = &g.nodes[j];
                if let Some(goal) = &dep.goal {
                    if goal.subject() == Some(subject) && !matches!(goal, Predicate::Held { .. }) {
                        if let Ok(Some(p)) = crate::agents::goal_location(goal, world) {
                            return Some(p);
                        }
                    }
                }
                frontier.extend(dep.deps.iter().map(String::as_str));
            }
            None
        })
        .collect()
}

/// Structural and capability checks. Returns every problem found.
pub fn validate_graph(
    g: &CollaborationGraph,
    world: &World,
    roster: &Roster,
    opts: ValidationOptions,
) -> Result<(), Vec<GraphError>> {
    let mut errors = Vec::new();
    let mut seen = HashSet::new();
    for n in &g.nodes {
        if !seen.insert(n.id.as_str()) {
            errors.push(GraphError::DuplicateId(n.id.clone()));
        }
    }
    for n in &g.nodes {
        for d in &n.deps {
            if !seen.contains(d.as_str()) {
                errors.push(GraphError::DanglingDep { node: n.id.clone(), dep: d.clone() });
            }
        }
    }
    if let Some(c) = g.find_cycle() {
        errors.push(GraphError::CycleDetected(c));
    }
    let starts = expected_starts(g, world);
    for (n, start) in g.nodes.iter().zip(starts) {
        let Some(desc) = resolve_executor(roster, &n.executor) else {
            errors.push(GraphError::UnknownExecutor { node: n.id.clone(), executor: n.executor.clone() });
            continue;
        };
        let Some(goal) = &n.goal else {
            if !opts.allow_missing_goals {
                errors.push(GraphError::MissingGoal(n.id.clone()));
            }
            continue;
        };
        if let Some(id) = goal.referenced_ids().into_iter().find(|id| !grounded(world, id)) {
            errors.push(GraphError::UngroundedGoal { node: n.id.clone(), id: id.to_string() });
            continue;
        }
        if let Verdict::Reject(reason) = goal_capability(goal, desc, world, start) {
            errors.push(GraphError::CapabilityMismatch { node: n.id.clone(), reason });
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn grounded(world: &World, id: &str) -> bool {
    world.body(id).is_some() || world.articulation(id).is_some() || world.layout.region(id).is_some()
}

/// Pending nodes whose dependencies are all Done, in node order. Pure.
pub fn ready_set(g: &CollaborationGraph) -> Vec<String> {
    let state: HashMap<&str, NodeState> = g.nodes.iter().map(|n| (n.id.as_str(), n.state)).collect();
    g.nodes
        .iter()
        .filter(|n| n.state == NodeState::Pending)
        .filter(|n| n.deps.iter().all(|d| state.get(d.as_str()) == Some(&NodeState::Done)))
        .map(|n| n.id.clone())
        .collect()
}
