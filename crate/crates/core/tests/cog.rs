mod common;

use std::collections::HashSet;

use proptest::prelude::*;

use common::dag::*;
use common::*;
use stationsim_core::cog::*;
use stationsim_core::math::{Aabb, Vec3};
use stationsim_core::robots::{RobotKind, OUTSIDE_DOMAIN};
use stationsim_core::scenario::{builtin_scenario, ScenarioConfig};
use stationsim_core::sim::{Body, Predicate, World};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn scheduler_properties_over_random_dags(seed in any::<u64>()) {
        check_random_dag(seed).map_err(TestCaseError::fail)?;
    }
}

#[test]
fn empty_graph_is_valid_and_trivially_succeeds() {
    let (w, roster) = cheap_world(0);
    let g = CollaborationGraph::default();
    assert_eq!(validate_graph(&g, &w, &roster, ValidationOptions::default()), Ok(()));
    assert!(ready_set(&g).is_empty());
    let res = run_episode(w, g, &roster, EpisodeConfig::default()).unwrap();
    assert!(res.success);
}

#[test]
fn three_cycle_is_reported_with_its_path() {
    let (w, roster) = cheap_world(3);
    let g = CollaborationGraph {
        task: "loop".into(),
        nodes: vec![
            CoGNode::new("a", "a", within("m0", marker(0)), "f0").after("c"),
            CoGNode::new("b", "b", within("m1", marker(1)), "f0").after("a"),
            CoGNode::new("c", "c", within("m2", marker(2)), "f0").after("b"),
        ],
    };
    let errs = validate_graph(&g, &w, &roster, ValidationOptions::default()).unwrap_err();
    let cycle = errs
        .iter()
        .find_map(|e| match e {
            GraphError::CycleDetected(p) => Some(p.clone()),
            _ => None,
        })
        .expect("cycle found");
    assert_eq!(cycle.len(), 4);
    assert_eq!(cycle.first(), cycle.last());
    let members: HashSet<&str> = cycle.iter().map(String::as_str).collect();
    assert_eq!(members, HashSet::from(["a", "b", "c"]));
    // Each listed node is a prerequisite of the next.
    for pair in cycle.windows(2) {
        assert!(g.node(&pair[1]).unwrap().deps.contains(&pair[0]), "{cycle:?}");
    }
}

#[test]
fn structural_errors_are_all_listed() {
    let (w, roster) = cheap_world(2);
    let g = CollaborationGraph {
        task: "broken".into(),
        nodes: vec![
            CoGNode::new("a", "a", within("m0", marker(0)), "f0").after("ghost"),
            CoGNode::new("a", "a again", within("m1", marker(1)), "f9"),
            CoGNode::new("b", "b", within("nothing", marker(1)), "f1"),
        ],
    };
    let errs = validate_graph(&g, &w, &roster, ValidationOptions::default()).unwrap_err();
    assert!(errs.contains(&GraphError::DuplicateId("a".into())));
    assert!(errs.contains(&GraphError::DanglingDep { node: "a".into(), dep: "ghost".into() }));
    assert!(errs.contains(&GraphError::UnknownExecutor { node: "a".into(), executor: "f9".into() }));
    assert!(errs.contains(&GraphError::UngroundedGoal { node: "b".into(), id: "nothing".into() }));
}

#[test]
fn rail_robot_cannot_fetch_across_modules() {
    let mut w = station();
    let mut roster = Roster::new();
    add(&mut w, &mut roster, "rail_bot", RobotKind::RailType, Vec3::new(2.0, 1.5, 2.4));
    w.add_body(cube("cube", Vec3::new(2.0, 1.5, 1.5))).unwrap();
    let g = CollaborationGraph {
        task: "fetch".into(),
        nodes: vec![CoGNode::new("fetch", "bring the cube to module 2", within("cube", Vec3::new(6.0, 1.5, 1.5)), "rail_bot")],
    };
    let errs = validate_graph(&g, &w, &roster, ValidationOptions::default()).unwrap_err();
    match &errs[..] {
        [GraphError::CapabilityMismatch { node, reason }] => {
            assert_eq!(node, "fetch");
            assert!(reason.contains(OUTSIDE_DOMAIN), "{reason}");
        }
        other => panic!("{other:?}"),
    }
}

fn chain(ids: &[&str]) -> CollaborationGraph {
    let nodes = ids
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let n = CoGNode::new(*id, *id, within("m0", marker(0)), "f0");
            if i == 0 { n } else { n.after(ids[i - 1]) }
        })
        .collect();
    CollaborationGraph { task: "t".into(), nodes }
}

fn diamond_graph(goal: impl Fn(&str) -> Predicate, exec: impl Fn(&str) -> String) -> CollaborationGraph {
    let node = |id: &str| CoGNode::new(id, id, goal(id), exec(id));
    CollaborationGraph { task: "diamond".into(), nodes: vec![node("a"), node("b").after("a"), node("c").after("a"), node("d").after("b").after("c")] }
}

#[test]
fn ready_set_examples() {
    let mut g = chain(&["a", "b", "c"]);
    assert_eq!(ready_set(&g), ["a"]);
    g.nodes[0].state = NodeState::Done;
    assert_eq!(ready_set(&g), ["b"]);

    let mut d = diamond_graph(|_| within("m0", marker(0)), |_| "f0".into());
    d.nodes[0].state = NodeState::Done;
    assert_eq!(ready_set(&d), ["b", "c"]);
    d.nodes[1].state = NodeState::Done;
    assert_eq!(ready_set(&d), ["c"], "d waits for both");
    for n in &mut d.nodes {
        n.state = NodeState::Done;
    }
    assert!(ready_set(&d).is_empty());
}

#[test]
fn state_transitions_follow_the_lifecycle() {
    use NodeState::*;
    let all = [Pending, Ready, Running, Done, Failed];
    let allowed: HashSet<(NodeState, NodeState)> =
        [(Pending, Ready), (Ready, Running), (Running, Done), (Running, Failed)].into_iter().collect();
    for a in all {
        for b in all {
            assert_eq!(a.can_become(b), allowed.contains(&(a, b)), "{a} -> {b}");
        }
    }
}

/// Two flyers each grabbing a cube after a shared trivial start node.
fn parallel_grabs() -> (World, CollaborationGraph, Roster) {
    let mut w = station();
    let mut roster = Roster::new();
    add(&mut w, &mut roster, "f0", RobotKind::FreeFlying, Vec3::new(1.0, 1.0, 1.5));
    add(&mut w, &mut roster, "f1", RobotKind::FreeFlying, Vec3::new(3.0, 2.0, 1.5));
    w.add_body(cube("cube_b", Vec3::new(1.6, 1.0, 1.5))).unwrap();
    w.add_body(cube("cube_c", Vec3::new(2.4, 2.0, 1.5))).unwrap();
    w.add_body(Body::cuboid("m0", Vec3::splat(0.02), 0.1, marker(0))).unwrap();
    let g = diamond_graph(
        |id| match id {
            "b" => Predicate::Held { body: "cube_b".into(), gripper: "f0".into() },
            "c" => Predicate::Held { body: "cube_c".into(), gripper: "f1".into() },
            _ => within("m0", marker(0)),
        },
        |id| if id == "c" { "f1".into() } else { "f0".into() },
    );
    (w, g, roster)
}

#[test]
fn diamond_runs_its_middle_in_parallel() {
    let (w, g, roster) = parallel_grabs();
    let res = run_episode(w, g, &roster, EpisodeConfig::default()).unwrap();
    assert!(res.success, "{:?}", res.reason);
    let msgs = res.log.messages();
    let first = |pred: &dyn Fn(&MessageKind) -> bool| msgs.iter().position(|m| pred(&m.kind)).unwrap();
    let started = |n: &'static str| first(&move |k| matches!(k, MessageKind::SkillStarted { node, .. } if node == n));
    let ended = |n: &'static str| first(&move |k| matches!(k, MessageKind::SkillEnded { node, .. } if node == n));
    let (sb, sc) = (started("b"), started("c"));
    assert!(sb < ended("b") && sb < ended("c"));
    assert!(sc < ended("b") && sc < ended("c"));
    assert_eq!(msgs[sb].tick, msgs[sc].tick, "b and c dispatched on the same tick");
}

#[test]
fn single_node_episode_has_one_quadruple() {
    let mut w = station();
    let mut roster = Roster::new();
    add(&mut w, &mut roster, "flyer", RobotKind::FreeFlying, Vec3::new(1.0, 1.5, 1.5));
    w.add_body(cube("cube", Vec3::new(1.8, 1.5, 1.5))).unwrap();
    let g = CollaborationGraph {
        task: "pick".into(),
        nodes: vec![CoGNode::new("pick", "pick up the cube", Predicate::Held { body: "cube".into(), gripper: "flyer".into() }, "flyer")],
    };
    let res = run_episode(w, g, &roster, EpisodeConfig::default()).unwrap();
    assert!(res.success, "{:?}", res.reason);
    let count = |f: fn(&MessageKind) -> bool| res.log.messages().iter().filter(|m| f(&m.kind)).count();
    assert_eq!(count(|k| matches!(k, MessageKind::SubtaskAssigned { .. })), 1);
    assert_eq!(count(|k| matches!(k, MessageKind::DiscriminatorReport { success: true, .. })), 1);
    let started = count(|k| matches!(k, MessageKind::SkillStarted { .. }));
    assert!(started >= 1);
    assert_eq!(started, count(|k| matches!(k, MessageKind::SkillEnded { .. })));
}

#[test]
fn welded_object_exhausts_the_retry_budget() {
    let mut w = station();
    let mut roster = Roster::new();
    add(&mut w, &mut roster, "flyer", RobotKind::FreeFlying, Vec3::new(1.0, 1.5, 1.5));
    let mut welded = cube("bolted", Vec3::new(1.6, 1.5, 1.5));
    welded.flags.graspable = false;
    w.add_body(welded).unwrap();
    let g = CollaborationGraph {
        task: "free it".into(),
        nodes: vec![CoGNode::new("take", "take the bolted cube", Predicate::Held { body: "bolted".into(), gripper: "flyer".into() }, "flyer")],
    };
    let config = EpisodeConfig { retry_budget: 2, ..EpisodeConfig::default() };
    let res = run_episode(w, g, &roster, config).unwrap();
    assert!(!res.success);
    assert_eq!(res.node_states, [("take".to_string(), NodeState::Failed)]);
    let assigned: Vec<u32> = res
        .log
        .messages()
        .iter()
        .filter_map(|m| match m.kind {
            MessageKind::SubtaskAssigned { attempt, .. } => Some(attempt),
            _ => None,
        })
        .collect();
    assert_eq!(assigned, [1, 2, 3]);
    assert!(res.ticks < EpisodeConfig::default().timeout);
}

#[test]
fn inline_and_threaded_logs_are_identical() {
    let cfg = ScenarioConfig::from_json(builtin_scenario("rearrangement").unwrap()).unwrap();
    for seed in [1, 2] {
        let run = |mode| {
            let inst = cfg.instantiate(seed).unwrap();
            let g = cfg.plan_graph(&inst, None).unwrap();
            let config = EpisodeConfig { timeout: cfg.episode_timeout, mode, ..EpisodeConfig::default() };
            run_episode(inst.world, g, &inst.roster, config).unwrap()
        };
        let inline = run(ExecutionMode::Inline);
        let threaded = run(ExecutionMode::Threaded);
        assert_eq!(inline.log.to_jsonl(), threaded.log.to_jsonl());
        assert_eq!(inline.world, threaded.world);
    }
}

#[test]
fn diamond_inline_and_threaded_agree() {
    let run = |mode| {
        let (w, g, roster) = parallel_grabs();
        run_episode(w, g, &roster, EpisodeConfig { mode, ..EpisodeConfig::default() }).unwrap().log.to_jsonl()
    };
    assert_eq!(run(ExecutionMode::Inline), run(ExecutionMode::Threaded));
}

#[test]
fn log_round_trips_through_jsonl() {
    let (w, g, roster) = parallel_grabs();
    let res = run_episode(w, g, &roster, EpisodeConfig::default()).unwrap();
    let text = res.log.to_jsonl();
    let back = MessageLog::read_jsonl(text.as_bytes()).unwrap();
    assert_eq!(back, res.log);
    assert_eq!(text.lines().count(), res.log.len());
}

#[test]
fn safety_examples() {
    let station = Aabb::new(Vec3::ZERO, Vec3::new(12.0, 3.0, 3.0));
    assert_eq!(enforce_safety("flyer", Vec3::new(2.0, 1.5, 1.5), &[station]), SafetyVerdict::Allowed);
    let module = Aabb::new(Vec3::ZERO, Vec3::new(4.0, 3.0, 3.0));
    match enforce_safety("rail_bot", Vec3::new(4.2, 1.5, 2.4), &[module]) {
        SafetyVerdict::Violation { executor, boundary } => {
            assert_eq!(executor, "rail_bot");
            assert!(boundary.contains("4.00"), "{boundary}");
        }
        v => panic!("{v:?}"),
    }
}

#[test]
fn human_out_of_bounds_is_logged_not_aborted() {
    let mut w = station();
    let mut roster = Roster::new();
    let ws = Aabb::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(2.0, 3.0, 3.0));
    add_with_workspace(&mut w, &mut roster, "human", RobotKind::Human, Vec3::new(1.8, 1.5, 1.5), ws);
    w.add_body(cube("cube", Vec3::new(1.0, 1.5, 1.5))).unwrap();
    let g = CollaborationGraph {
        task: "reach".into(),
        nodes: vec![CoGNode::new("reach", "take the cube", Predicate::Held { body: "cube".into(), gripper: "human".into() }, "human")],
    };
    // A remote human nobody drives: push it across its boundary by hand.
    let config = EpisodeConfig { timeout: 200, human: HumanMode::Remote, ..EpisodeConfig::default() };
    let mut ep = Episode::new(w, g, &roster, config).unwrap();
    ep.set_human_input(HumanInput { linear: Vec3::new(1.0, 0.0, 0.0), ..HumanInput::default() });
    while !ep.is_done() {
        ep.step();
    }
    let res = ep.into_result();
    let violations: Vec<_> = res.log.messages().iter().filter(|m| matches!(m.kind, MessageKind::SafetyViolation { .. })).collect();
    assert_eq!(violations.len(), 1, "logged once per excursion");
    assert!(res.world.body("human").unwrap().position().x > 2.0, "human kept moving");
}
