mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use stationsim_core::agents::{describe, describe_and_evaluate, state_facts, RuleStrategy};
use stationsim_core::math::Vec3;
use stationsim_core::robots::RobotKind;
use stationsim_core::scenario::*;
use stationsim_core::sim::{Articulation, ArticulationKind, Body, Predicate, RegionRef, StationLayout};

fn builtin_value(name: &str) -> Value {
    serde_json::from_str(builtin_scenario(name).unwrap()).unwrap()
}

fn parse(v: &Value) -> Result<ScenarioConfig, ScenarioError> {
    ScenarioConfig::from_json(&serde_json::to_string_pretty(v).unwrap())
}

fn field_of(e: ScenarioError) -> (String, String) {
    match e {
        ScenarioError::Validation { field, reason } => (field, reason),
        other => panic!("expected a validation error, got {other}"),
    }
}

#[test]
fn rearrangement_builtin_contents() {
    let cfg = ScenarioConfig::from_json(builtin_scenario("rearrangement").unwrap()).unwrap();
    let inst = cfg.instantiate(cfg.seed).unwrap();
    let Some(RuleStrategy::Rearrangement { objects, .. }) = &cfg.plan else { panic!() };
    assert_eq!(objects.len(), 6);
    for o in objects {
        assert!(inst.world.body(o).unwrap().flags.graspable);
    }
    let humans = inst.roster.values().filter(|d| d.kind.is_human()).count();
    assert_eq!(humans, 1);
    assert_eq!(inst.roster.len() - humans, 2);
    assert_eq!(cfg.display_name(), "Floating Objects Rearrangement");
}

#[test]
fn relay_builtin_has_every_kind() {
    let cfg = ScenarioConfig::from_json(builtin_scenario("relay").unwrap()).unwrap();
    let inst = cfg.instantiate(1).unwrap();
    for kind in [RobotKind::Dexterous, RobotKind::RailType, RobotKind::FreeFlying, RobotKind::Human] {
        assert!(inst.roster.values().any(|d| d.kind == kind), "{kind:?}");
    }
}

#[test]
fn instantiation_is_seeded() {
    let cfg = ScenarioConfig::from_json(builtin_scenario("rearrangement").unwrap()).unwrap();
    assert_eq!(cfg.instantiate(4).unwrap().world, cfg.instantiate(4).unwrap().world);
    assert_ne!(cfg.instantiate(4).unwrap().world, cfg.instantiate(5).unwrap().world);
}

#[test]
fn rail_crossing_a_module_wall_is_rejected() {
    let mut layout = StationLayout::default_three_module();
    layout.rails[0].points[1] = Vec3::new(5.0, 0.4, 2.4);
    let mut v = builtin_value("rearrangement");
    v["layout"] = serde_json::to_value(&layout).unwrap();
    let (field, reason) = field_of(parse(&v).unwrap_err());
    assert_eq!(field, "layout.rails[0]");
    assert!(reason.contains("rail_1"), "{reason}");
}

#[test]
fn duplicate_body_id_is_rejected() {
    let mut v = builtin_value("rearrangement");
    let dup = v["bodies"][3].clone();
    v["bodies"].as_array_mut().unwrap().push(dup);
    let (field, reason) = field_of(parse(&v).unwrap_err());
    assert!(field.starts_with("bodies["), "{field}");
    assert!(reason.contains("cube_1"), "{reason}");
}

#[test]
fn executor_colliding_with_body_id_is_rejected() {
    let mut v = builtin_value("rearrangement");
    v["executors"][0]["id"] = json!("cube_1");
    let (field, _) = field_of(parse(&v).unwrap_err());
    assert!(field.starts_with("executors"), "{field}");
}

#[test]
fn skills_outside_the_kind_table_are_rejected() {
    let mut v = builtin_value("rearrangement");
    v["executors"][1]["skills"] = json!(["RailMove", "CrossHatch"]);
    let (field, reason) = field_of(parse(&v).unwrap_err());
    assert!(field.contains("skills"), "{field}: {reason}");
}

#[test]
fn parse_errors_carry_the_line() {
    let text = builtin_scenario("relay").unwrap().replacen("\"gravity\": \"zero_g\",", "\"gravity\": \"zero_g\"", 1);
    let want = text.lines().position(|l| l.contains("episode_timeout")).unwrap() + 1;
    match ScenarioConfig::from_json(&text) {
        Err(ScenarioError::Parse { line, .. }) => assert_eq!(line, want),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_fields_are_rejected() {
    let mut v = builtin_value("relay");
    v["gravty"] = json!("zero_g");
    assert!(matches!(parse(&v), Err(ScenarioError::Parse { .. })));
    let mut v = builtin_value("relay");
    v["bodies"][0]["colour"] = json!("red");
    assert!(matches!(parse(&v), Err(ScenarioError::Parse { .. })));
}

#[test]
fn bodies_outside_the_station_are_rejected() {
    let mut v = builtin_value("rearrangement");
    v["bodies"][3]["position"] = json!([20.0, 1.0, 1.0]);
    let (field, _) = field_of(parse(&v).unwrap_err());
    assert_eq!(field, "bodies[3].position");
}

#[test]
fn zero_timeout_is_rejected() {
    let mut v = builtin_value("rearrangement");
    v["episode_timeout"] = json!(0);
    assert_eq!(field_of(parse(&v).unwrap_err()).0, "episode_timeout");
}

#[test]
fn scenario_files_load_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(&path, builtin_scenario("relay").unwrap()).unwrap();
    assert_eq!(load_scenario(&path).unwrap().name, "relay");
    assert!(matches!(load_scenario(dir.path().join("missing.json")), Err(ScenarioError::Io(_))));
}

#[test]
fn description_examples() {
    let mut w = common::station();
    w.add_body(common::bin("bin_1", Vec3::new(2.0, 1.5, 1.0))).unwrap();
    w.add_body(common::cube("cube_3", Vec3::new(2.0, 1.5, 1.0))).unwrap();
    w.add_body(Body::fixture("cabinet", Vec3::new(0.3, 0.05, 0.3), Vec3::new(2.0, 0.3, 1.5))).unwrap();
    w.add_articulation(Articulation {
        id: "door_2".into(),
        kind: ArticulationKind::HingeDoor,
        parent_body: "cabinet".into(),
        axis: Vec3::Z,
        anchor: Vec3::new(1.7, 0.4, 1.5),
        handle_arm: Vec3::new(0.5, 0.0, 0.0),
        value: 0.3,
        limits: [0.0, 1.6],
        current_rate: 0.0,
    })
    .unwrap();
    let goal = Predicate::InContainer { body: "cube_3".into(), container: "bin_1".into() };
    let r = describe_and_evaluate("n", &goal, &w).unwrap();
    assert!(r.success);
    assert!(r.description.lines().any(|l| l == "cube_3: inside bin_1"), "{}", r.description);
    let door = Predicate::DoorOpen { articulation: "door_2".into(), min_angle: 1.4 };
    assert!(!describe_and_evaluate("n", &door, &w).unwrap().success);
    assert!(describe_and_evaluate("n", &Predicate::DoorOpen { articulation: "nope".into(), min_angle: 1.0 }, &w).is_err());
}

/// Random snapshots of the rearrangement scene with some cubes dropped in
/// bins, one held and the rest drifting for a while.
#[test]
fn discriminator_agrees_with_spatial_query() {
    let cfg = ScenarioConfig::from_json(builtin_scenario("rearrangement").unwrap()).unwrap();
    let Some(RuleStrategy::Rearrangement { objects, containers }) = cfg.plan.clone() else { panic!() };
    for seed in 0..100u64 {
        let mut inst = cfg.instantiate(seed).unwrap();
        let w = &mut inst.world;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for o in &objects {
            if rng.gen_bool(0.3) {
                let c = &containers[rng.gen_range(0..containers.len())];
                let p = w.body(c).unwrap().position();
                let b = w.body_mut(o).unwrap();
                b.pose.position = p;
                b.twist.linear = Vec3::ZERO;
            }
        }
        if rng.gen_bool(0.5) {
            let flyer = w.body("flyer").unwrap().position();
            w.body_mut(&objects[0]).unwrap().pose.position = flyer;
            w.body_mut(&objects[0]).unwrap().twist.linear = Vec3::ZERO;
            let _ = w.attach_grasp("flyer", &objects[0]);
        }
        for _ in 0..rng.gen_range(0..300) {
            w.step(&[]).unwrap();
        }
        let mut goals = Vec::new();
        for o in &objects {
            for c in &containers {
                goals.push(Predicate::InContainer { body: o.clone(), container: c.clone() });
            }
            for m in ["module_1", "module_2", "module_3"] {
                goals.push(Predicate::Within { body: o.clone(), region: RegionRef::Named(m.into()) });
            }
            goals.push(Predicate::Held { body: o.clone(), gripper: "flyer".into() });
        }
        let mut held = 0;
        for g in &goals {
            let report = describe_and_evaluate("n", g, w).unwrap();
            assert_eq!(report.success, w.query(g).unwrap(), "seed {seed}: {g}");
            held += usize::from(report.success);
        }
        assert!(held > 0);
        // Every listed fact is true, and the text is one line per fact.
        let d = describe(w);
        assert_eq!(d.facts, state_facts(w));
        assert_eq!(d.text.lines().count(), d.facts.len());
        for f in &d.facts {
            if !matches!(f, Predicate::DoorOpen { .. }) {
                assert!(w.query(f).unwrap(), "seed {seed}: {f}");
            }
        }
    }
}

#[test]
fn shipped_schema_lists_every_field() {
    let schema: Value = serde_json::from_str(include_str!("../assets/scenario_schema.json")).unwrap();
    let cfg = ScenarioConfig::from_json(builtin_scenario("relay").unwrap()).unwrap();
    let serialized = serde_json::to_value(&cfg).unwrap();
    let mut want: Vec<&String> = serialized.as_object().unwrap().keys().collect();
    let mut have: Vec<&String> = schema["properties"].as_object().unwrap().keys().collect();
    want.sort();
    have.sort();
    assert_eq!(have, want);
    let body = serde_json::to_value(&cfg.bodies[0]).unwrap();
    for f in body.as_object().unwrap().keys() {
        assert!(schema["$defs"]["body"]["properties"].get(f).is_some(), "body.{f} missing from the schema");
    }
    for name in ["rearrangement", "relay"] {
        let v: Value = serde_json::from_str(builtin_scenario(name).unwrap()).unwrap();
        for key in schema["required"].as_array().unwrap() {
            assert!(v.get(key.as_str().unwrap()).is_some(), "{name} lacks {key}");
        }
    }
}
