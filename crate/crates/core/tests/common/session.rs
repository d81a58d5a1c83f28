//! A one-node human episode and a scripted gateway client session.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use stationsim_core::cog::{CoGNode, CollaborationGraph, Episode, EpisodeConfig, EpisodeResult, HumanMode, Roster};
use stationsim_core::gateway::*;
use stationsim_core::math::Vec3;
use stationsim_core::robots::RobotKind;
use stationsim_core::sim::{Body, Predicate, StationLayout, World};

pub const HUMAN_AT: Vec3 = Vec3::new(2.0, 1.5, 1.5);

/// The human next to a cube, asked to hold it.
pub fn setup() -> (World, CollaborationGraph, Roster) {
    let layout = StationLayout::default_three_module();
    let mut w = World::zero_g(layout.clone());
    w.add_body(Body::cuboid("cube", Vec3::splat(0.03), 0.2, HUMAN_AT + Vec3::new(0.05, 0.0, 0.0)).graspable()).unwrap();
    let mut roster: Roster = BTreeMap::new();
    let d = super::spec("human", RobotKind::Human, HUMAN_AT).resolve(&layout).unwrap();
    for b in d.spawn_bodies(&layout) {
        w.add_body(b).unwrap();
    }
    roster.insert("human".into(), Arc::new(d));
    let goal = Predicate::Held { body: "cube".into(), gripper: "human".into() };
    let graph = CollaborationGraph { task: "hold the cube".into(), nodes: vec![CoGNode::new("hold", "pick up the cube", goal, "human")] };
    (w, graph, roster)
}

pub fn episode(human: HumanMode, timeout: u64) -> Episode {
    let (w, g, r) = setup();
    Episode::new(w, g, &r, EpisodeConfig { timeout, human, ..EpisodeConfig::default() }).unwrap()
}

pub fn start(ep: Episode, opts: GatewayOptions) -> (u16, thread::JoinHandle<EpisodeResult>) {
    let gw = Gateway::bind(0).unwrap();
    let port = gw.port();
    (port, thread::spawn(move || gw.serve(ep, &opts).unwrap()))
}

pub fn realtime() -> GatewayOptions {
    GatewayOptions { realtime: true, ..GatewayOptions::default() }
}

pub fn check_gap_free(msgs: &[Envelope]) -> Result<(), String> {
    for (i, m) in msgs.iter().enumerate() {
        ensure!(m.seq == i as u64, "seq gap at {i}: {m:?}");
    }
    Ok(())
}

pub fn human_command(snapshot: &Envelope) -> Vec3 {
    let c = &snapshot.payload["human"]["command"];
    Vec3::new(c[0].as_f64().unwrap(), c[1].as_f64().unwrap(), c[2].as_f64().unwrap())
}

/// Observer join sync, role exclusivity, clamping readback, gap-free seqs
/// and a completed episode, all over real sockets.
pub fn scripted_session() -> Result<(), String> {
    let (port, server) = start(episode(HumanMode::Remote, 6000), realtime());

    let mut observer = GatewayClient::connect_retry(port, Duration::from_secs(5)).map_err(|e| e.to_string())?;
    let first = observer.recv().unwrap().unwrap();
    let second = observer.recv().unwrap().unwrap();
    ensure!(
        (first.kind.as_str(), second.kind.as_str()) == (kinds::SNAPSHOT, kinds::COG_STATE),
        "join sync started with {} then {}",
        first.kind,
        second.kind
    );
    ensure!(first.payload["world"]["bodies"].as_array().unwrap().iter().any(|b| b["id"] == "cube"), "snapshot lacks bodies");
    ensure!(second.payload["nodes"][0]["id"] == "hold", "cog_state lacks the node");
    let mut observed = vec![first, second];

    let mut human = GatewayClient::connect(port).unwrap();
    human.send(&ClientMessage::ReadyAck { role: Role::Human }).unwrap();
    let got = human.recv_until(kinds::ROLE).unwrap();
    ensure!(got.last().unwrap().payload["role"] == "human", "human role not granted");

    let mut intruder = GatewayClient::connect(port).unwrap();
    intruder.send(&ClientMessage::ReadyAck { role: Role::Human }).unwrap();
    let got = intruder.recv_until(kinds::ERROR).unwrap();
    ensure!(got.last().unwrap().payload["code"] == codes::ROLE_TAKEN, "second human got {:?}", got.last());
    intruder.send(&ClientMessage::HumanCmd { linear: Vec3::X }).unwrap();
    let got = intruder.recv_until(kinds::ERROR).unwrap();
    ensure!(got.last().unwrap().payload["code"] == codes::NOT_HUMAN, "observer command got {:?}", got.last());
    drop(intruder);

    human.send(&ClientMessage::HumanCmd { linear: Vec3::new(50.0, 0.0, 0.0) }).unwrap();
    let clamped = loop {
        let env = human.recv().unwrap().ok_or("server closed before the readback")?;
        if env.kind == kinds::SNAPSHOT && human_command(&env).norm() > 0.0 {
            break human_command(&env);
        }
    };
    ensure!((clamped.norm() - 1.0).abs() < 1e-12 && clamped.y == 0.0 && clamped.z == 0.0, "50 m/s read back as {clamped:?}");

    human.send(&ClientMessage::HumanCmd { linear: Vec3::ZERO }).unwrap();
    let end = loop {
        let env = human.recv().unwrap().ok_or("server closed before the episode ended")?;
        match env.kind.as_str() {
            kinds::SNAPSHOT => human.send(&ClientMessage::GraspRequest { object: "cube".into() }).unwrap(),
            kinds::EPISODE_END => break env,
            _ => {}
        }
    };
    ensure!(end.payload["success"] == true, "episode end {:?}", end.payload);

    observed.extend(observer.drain().unwrap());
    check_gap_free(&observed)?;
    let kinds_seen: Vec<&str> = observed.iter().map(|m| m.kind.as_str()).collect();
    for k in [kinds::ASSIGNMENT, kinds::REPORT, kinds::EPISODE_END] {
        ensure!(kinds_seen.contains(&k), "observer missed {k}");
    }
    let states: Vec<String> = observed
        .iter()
        .filter(|m| m.kind == kinds::COG_STATE)
        .map(|m| m.payload["nodes"][0]["state"].as_str().unwrap_or_default().to_string())
        .collect();
    ensure!(states.last().map(String::as_str) == Some("Done"), "last cog_state {:?}", states.last());
    ensure!(states.iter().any(|s| s == "Running"), "never saw Running");
    let res = server.join().map_err(|_| "server thread panicked")?;
    ensure!(res.success, "server result {:?}", res.reason);
    Ok(())
}
