//! Brute-force and structural oracles for the rule planners.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{add, bin, cube, station};
use stationsim_core::agents::*;
use stationsim_core::cog::{validate_graph, CoGNode, CollaborationGraph, Roster, ValidationOptions};
use stationsim_core::math::Vec3;
use stationsim_core::robots::{DragCapability, RobotKind};
use stationsim_core::scenario::{builtin_scenario, ScenarioConfig, ScenarioInstance};
use stationsim_core::sim::{Predicate, World};

const KINDS: [RobotKind; 3] = [RobotKind::FreeFlying, RobotKind::Human, RobotKind::RailType];

fn random_point(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(rng.gen_range(0.4..11.6), rng.gen_range(0.4..2.6), rng.gen_range(0.4..2.2))
}

pub struct Instance {
    pub world: World,
    pub roster: Roster,
    pub objects: Vec<String>,
    pub containers: Vec<String>,
}

/// One bin per module, up to 4 executors and 5 loose cubes.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = station();
    let mut roster = Roster::new();
    let containers: Vec<String> = (1..=3).map(|m| format!("bin_{m}")).collect();
    for (m, c) in containers.iter().enumerate() {
        w.add_body(bin(c, Vec3::new(2.0 + 4.0 * m as f64, 1.5, 0.6))).unwrap();
    }
    for k in 0..rng.gen_range(1..=4) {
        let kind = KINDS[rng.gen_range(0..KINDS.len())];
        let home = match kind {
            RobotKind::RailType => Vec3::new(4.0 * rng.gen_range(0..3) as f64 + 2.0, 0.4, 2.4),
            _ => random_point(&mut rng),
        };
        add(&mut w, &mut roster, &format!("x{k}"), kind, home);
    }
    let objects: Vec<String> = (0..rng.gen_range(1..=5)).map(|i| format!("cube_{i}")).collect();
    for o in &objects {
        w.add_body(cube(o, random_point(&mut rng))).unwrap();
    }
    Instance { world: w, roster, objects, containers }
}

fn assigned_distance(d: &str, inst: &Instance, p: Vec3) -> f64 {
    executor_position(&inst.roster[d], &inst.world).distance(p)
}

/// Checks `plan_rearrangement` on instance `seed` against a brute-force
/// argmin. `Ok(false)` means both agree the instance is unassignable.
pub fn check_rearrangement(seed: u64) -> Result<bool, String> {
    let inst = random_instance(seed);
    let w = &inst.world;
    let result = plan_rearrangement("tidy", &inst.objects, &inst.containers, &inst.roster, w);
    let mut expected = BTreeMap::new();
    let mut unassignable = None;
    for o in &inst.objects {
        let p = w.body(o).unwrap().position();
        let container = inst
            .containers
            .iter()
            .min_by(|a, b| w.body(a).unwrap().position().distance(p).total_cmp(&w.body(b).unwrap().position().distance(p)))
            .unwrap();
        let goal = Predicate::InContainer { body: o.clone(), container: container.clone() };
        let capable: Vec<(String, f64)> = inst
            .roster
            .values()
            .filter(|d| goal_capability(&goal, d, w, None).is_ok())
            .map(|d| (d.id.clone(), assigned_distance(&d.id, &inst, p)))
            .collect();
        if capable.is_empty() && unassignable.is_none() {
            unassignable = Some(o.clone());
        }
        expected.insert(o.clone(), (goal, capable));
    }
    let g = match (result, unassignable) {
        (Err(PlanError::UnassignableObject(o)), Some(first)) => {
            ensure!(o == first, "seed {seed}: planner gave up on {o}, brute force on {first}");
            return Ok(false);
        }
        (Ok(g), None) => g,
        (r, u) => return Err(format!("seed {seed}: planner {r:?}, brute force unassignable {u:?}")),
    };
    let valid = validate_graph(&g, w, &inst.roster, ValidationOptions::default());
    ensure!(valid.is_ok(), "seed {seed}: {valid:?}");
    ensure!(g.nodes.len() == inst.objects.len(), "seed {seed}: {} nodes", g.nodes.len());
    for n in &g.nodes {
        let goal = n.goal.as_ref().ok_or("node without goal")?;
        let o = goal.subject().ok_or("goal without subject")?;
        let (want_goal, capable) = &expected[o];
        ensure!(goal == want_goal, "seed {seed}: {o} not sent to the nearest container");
        let p = w.body(o).unwrap().position();
        let mine = assigned_distance(&n.executor, &inst, p);
        let best = capable.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        ensure!(capable.iter().any(|c| c.0 == n.executor), "seed {seed}: {} not capable", n.executor);
        ensure!(mine <= best + TIE_EPSILON, "seed {seed}: {o} went to {} at {mine}, best {best}", n.executor);
        let robot_tied = capable.iter().any(|(id, d)| !inst.roster[id].kind.is_human() && *d <= best + TIE_EPSILON);
        ensure!(
            !robot_tied || !inst.roster[&n.executor].kind.is_human(),
            "seed {seed}: human chosen over a tied robot"
        );
    }
    check_serialization(&g, &inst)?;
    Ok(true)
}

/// Different executors never depend on each other; each executor's nodes
/// form one chain in distance order.
pub fn check_serialization(g: &CollaborationGraph, inst: &Instance) -> Result<(), String> {
    let mut per_exec: BTreeMap<&str, Vec<&CoGNode>> = BTreeMap::new();
    for n in &g.nodes {
        for d in &n.deps {
            ensure!(g.node(d).unwrap().executor == n.executor, "cross-executor dep {d} -> {}", n.id);
        }
        per_exec.entry(&n.executor).or_default().push(n);
    }
    for (exec, nodes) in per_exec {
        let dist = |n: &CoGNode| {
            assigned_distance(exec, inst, inst.world.body(n.goal.as_ref().unwrap().subject().unwrap()).unwrap().position())
        };
        ensure!(nodes[0].deps.is_empty(), "{}'s first node waits on {:?}", exec, nodes[0].deps);
        for pair in nodes.windows(2) {
            ensure!(pair[1].deps == [pair[0].id.clone()], "{} does not follow {}", pair[1].id, pair[0].id);
            ensure!(dist(pair[0]) <= dist(pair[1]), "{exec}'s chain is not in distance order");
        }
    }
    Ok(())
}

pub fn relay_config(edit: impl FnOnce(&mut ScenarioConfig)) -> ScenarioConfig {
    let mut cfg: ScenarioConfig = serde_json::from_str(builtin_scenario("relay").unwrap()).unwrap();
    edit(&mut cfg);
    cfg
}

pub fn plan_relay_for(cfg: &ScenarioConfig, seed: u64) -> (ScenarioInstance, Result<CollaborationGraph, PlanError>) {
    let inst = cfg.instantiate(seed).unwrap();
    let Some(RuleStrategy::Relay { cargo, goal }) = cfg.plan.clone() else { panic!("relay strategy") };
    let g = plan_relay(&cfg.task, &cargo, &goal, &inst.roster, &inst.world);
    (inst, g)
}

/// Goals that move the cargo somewhere.
pub fn moves(goal: &Predicate) -> bool {
    matches!(goal, Predicate::Within { .. } | Predicate::InContainer { .. })
}

/// Where the cargo is expected to start each node.
pub fn starts(g: &CollaborationGraph, world: &World, cargo: &str) -> Vec<Vec3> {
    let mut pos = world.body(cargo).unwrap().position();
    g.nodes
        .iter()
        .map(|n| {
            let here = pos;
            let goal = n.goal.as_ref().unwrap();
            if moves(goal) {
                pos = goal_location(goal, world).unwrap().unwrap();
            }
            here
        })
        .collect()
}

/// Serial chain, rail robot confined to its module, drag legs within range.
pub fn check_relay(g: &CollaborationGraph, inst: &ScenarioInstance) -> Result<(), String> {
    let valid = validate_graph(g, &inst.world, &inst.roster, ValidationOptions::default());
    ensure!(valid.is_ok(), "{valid:?}");
    for (i, n) in g.nodes.iter().enumerate() {
        let want: Vec<String> = if i == 0 { vec![] } else { vec![g.nodes[i - 1].id.clone()] };
        ensure!(n.deps == want, "relay is not serial at {}", n.id);
    }
    let layout = &inst.world.layout;
    for (n, start) in g.nodes.iter().zip(starts(g, &inst.world, "cargo")) {
        let d = &inst.roster[&n.executor];
        let goal = n.goal.as_ref().unwrap();
        if !moves(goal) {
            continue;
        }
        let loc = goal_location(goal, &inst.world).unwrap().unwrap();
        match d.kind {
            RobotKind::RailType => {
                let module = layout.module(d.rail_module(layout).unwrap()).unwrap();
                ensure!(module.interior.contains(loc), "{} sent to {loc} outside {}", n.id, module.id);
            }
            RobotKind::FreeFlying => {
                if let DragCapability::ShortRange(limit) = d.drag_capability {
                    ensure!(start.distance(loc) <= limit + 1e-9, "{}: drag leg {} m", n.id, start.distance(loc));
                }
            }
            _ => {}
        }
    }
    Ok(())
}

/// No robot could have taken any leg the human was given.
pub fn check_human_only_if_needed(g: &CollaborationGraph, inst: &ScenarioInstance) -> Result<(), String> {
    for (n, start) in g.nodes.iter().zip(starts(g, &inst.world, "cargo")) {
        let goal = n.goal.as_ref().unwrap();
        if inst.roster[&n.executor].kind != RobotKind::Human || !moves(goal) {
            continue;
        }
        for d in inst.roster.values().filter(|d| !d.kind.is_human()) {
            let take = Predicate::Held { body: "cargo".into(), gripper: d.id.clone() };
            let covers = goal_capability(goal, d, &inst.world, Some(start)).is_ok()
                && goal_capability(&take, d, &inst.world, Some(start)).is_ok();
            ensure!(!covers, "{} could do {}", d.id, n.id);
        }
    }
    Ok(())
}

/// Every rule-planner graph of both built-ins over `seeds` validates.
pub fn check_builtin_plans_validate(seeds: std::ops::Range<u64>) -> Result<(), String> {
    for name in ["rearrangement", "relay"] {
        let cfg = ScenarioConfig::from_json(builtin_scenario(name).unwrap()).unwrap();
        let rule = cfg.rule_planner().unwrap();
        for seed in seeds.clone() {
            let inst = cfg.instantiate(seed).unwrap();
            let g = rule.plan(&cfg.task, &inst.world, &inst.roster, &inst.catalog()).map_err(|e| format!("{name} {seed}: {e}"))?;
            let valid = validate_graph(&g, &inst.world, &inst.roster, ValidationOptions::default());
            ensure!(valid.is_ok(), "{name} seed {seed}: {valid:?}");
        }
    }
    Ok(())
}
