//! Random collaboration graphs and the scheduler oracle.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{add, station};
use stationsim_core::cog::*;
use stationsim_core::math::{Aabb, Vec3};
use stationsim_core::robots::RobotKind;
use stationsim_core::sim::{Body, Predicate, RegionRef, World};

pub fn within(body: &str, centre: Vec3) -> Predicate {
    Predicate::Within { body: body.into(), region: RegionRef::Box(Aabb::from_center(centre, Vec3::splat(0.1))) }
}

pub fn marker(i: usize) -> Vec3 {
    Vec3::new(0.5 + 0.25 * i as f64, 1.0, 1.0)
}

/// Three idle flyers and one floating marker per node.
pub fn cheap_world(n: usize) -> (World, Roster) {
    let mut w = station();
    let mut roster = Roster::new();
    for k in 0..3 {
        add(&mut w, &mut roster, &format!("f{k}"), RobotKind::FreeFlying, Vec3::new(1.0 + k as f64, 2.2, 2.0));
    }
    for i in 0..n {
        w.add_body(Body::cuboid(format!("m{i}"), Vec3::splat(0.02), 0.1, marker(i))).unwrap();
    }
    (w, roster)
}

pub struct Dag {
    pub graph: CollaborationGraph,
    pub failing: HashSet<String>,
    pub config: EpisodeConfig,
}

/// Up to 12 nodes with random edges, 15% of nodes doomed to fail.
pub fn random_dag(seed: u64) -> Dag {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=12);
    let density = rng.gen_range(0.0..0.6);
    let mut nodes = Vec::new();
    let mut failing = HashSet::new();
    let mut chains = BTreeMap::new();
    for i in 0..n {
        let id = format!("n{i}");
        let fail = rng.gen_bool(0.15);
        // Failing nodes ask for a place 0.5 m away and get no skills to get there.
        let target = if fail { marker(i) + Vec3::new(0.0, 0.5, 0.0) } else { marker(i) };
        let mut node = CoGNode::new(&id, format!("node {i}"), within(&format!("m{i}"), target), format!("f{}", rng.gen_range(0..3)));
        for j in 0..i {
            if rng.gen_bool(density) {
                node.deps.push(format!("n{j}"));
            }
        }
        if fail {
            failing.insert(id.clone());
            chains.insert(id, Vec::new());
        }
        nodes.push(node);
    }
    nodes.shuffle(&mut rng);
    let config = EpisodeConfig {
        timeout: 5_000,
        retry_budget: rng.gen_range(0..3),
        mode: if rng.gen_bool(0.5) { ExecutionMode::Inline } else { ExecutionMode::Threaded },
        chains,
        ..EpisodeConfig::default()
    };
    Dag { graph: CollaborationGraph { task: "random".into(), nodes }, failing, config }
}

/// Expected terminal state: a node finishes iff all its deps are Done.
pub fn expected_states(dag: &Dag) -> BTreeMap<String, NodeState> {
    let mut out: BTreeMap<String, NodeState> = BTreeMap::new();
    let mut order: Vec<&CoGNode> = dag.graph.nodes.iter().collect();
    order.sort_by_key(|n| n.id[1..].parse::<usize>().unwrap());
    for n in order {
        let s = if n.deps.iter().all(|d| out[d] == NodeState::Done) {
            if dag.failing.contains(&n.id) {
                NodeState::Failed
            } else {
                NodeState::Done
            }
        } else {
            NodeState::Pending
        };
        out.insert(n.id.clone(), s);
    }
    out
}

/// Topological soundness, the barrier and no lost messages.
pub fn check_log(graph: &CollaborationGraph, res: &EpisodeResult) -> Result<(), String> {
    let msgs = res.log.messages();
    let mut ok_reports: HashSet<&str> = HashSet::new();
    let mut assigned = 0usize;
    let mut reports = 0usize;
    for m in msgs {
        match &m.kind {
            MessageKind::SubtaskAssigned { node, .. } => {
                assigned += 1;
                let n = graph.node(node).ok_or_else(|| format!("assignment for unknown node {node}"))?;
                // All k deps reported success first.
                let done = n.deps.iter().filter(|d| ok_reports.contains(d.as_str())).count();
                ensure!(done == n.deps.len(), "{node} assigned before its deps");
            }
            MessageKind::DiscriminatorReport { node, success, .. } => {
                reports += 1;
                if *success {
                    ensure!(ok_reports.insert(node.as_str()), "{node} reported success twice");
                }
            }
            _ => {}
        }
    }
    let running = res.node_states.iter().filter(|(_, s)| *s == NodeState::Running).count();
    ensure!(assigned == reports + running, "{assigned} assignments vs {reports} reports + {running} running");
    let ends = msgs.iter().filter(|m| matches!(m.kind, MessageKind::EpisodeEnd { .. })).count();
    ensure!(ends == 1, "{ends} episode ends");
    ensure!(matches!(msgs.last().map(|m| &m.kind), Some(MessageKind::EpisodeEnd { .. })), "episode end is not last");
    for (i, m) in msgs.iter().enumerate() {
        ensure!(m.seq == i as u64, "seq gap at {i}");
    }
    Ok(())
}

pub fn failed_never_has_done_successors(graph: &CollaborationGraph, states: &BTreeMap<String, NodeState>) -> bool {
    let succ = graph.successors();
    let mut stack: Vec<usize> = (0..graph.nodes.len()).filter(|&i| states[&graph.nodes[i].id] == NodeState::Failed).collect();
    let mut seen = HashSet::new();
    while let Some(i) = stack.pop() {
        for &j in &succ[i] {
            if states[&graph.nodes[j].id] != NodeState::Pending {
                return false;
            }
            if seen.insert(j) {
                stack.push(j);
            }
        }
    }
    true
}

/// Runs the DAG for `seed` and checks every scheduler property.
pub fn check_random_dag(seed: u64) -> Result<(), String> {
    let dag = random_dag(seed);
    let (w, roster) = cheap_world(dag.graph.nodes.len());
    let res = run_episode(w, dag.graph.clone(), &roster, dag.config.clone()).map_err(|e| e.to_string())?;
    check_log(&dag.graph, &res)?;
    let states: BTreeMap<String, NodeState> = res.node_states.iter().cloned().collect();
    let want = expected_states(&dag);
    ensure!(states == want, "final states {states:?}, expected {want:?}");
    ensure!(failed_never_has_done_successors(&dag.graph, &states), "a failed node has a started descendant");
    ensure!(res.success == dag.failing.is_empty(), "success {} with {} failing nodes", res.success, dag.failing.len());
    if !res.success {
        let reason = res.reason.clone().unwrap_or_default();
        ensure!(reason.contains("failed"), "reason: {reason}");
    }
    for f in &dag.failing {
        if states[f] == NodeState::Failed {
            let tries = res
                .log
                .messages()
                .iter()
                .filter(|m| matches!(&m.kind, MessageKind::SubtaskAssigned { node, .. } if node == f))
                .count();
            ensure!(tries as u32 == dag.config.retry_budget + 1, "{f} tried {tries} times");
        }
    }
    Ok(())
}
