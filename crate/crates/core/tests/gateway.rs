mod common;

use std::thread;
use std::time::Duration;

use stationsim_core::cog::{run_episode, EpisodeConfig, HumanMode};
use common::session::*;
use stationsim_core::gateway::*;
use stationsim_core::math::Vec3;

#[test]
fn scripted_session_join_roles_clamping_and_completion() {
    scripted_session().unwrap();
}

#[test]
fn snapshots_are_decimated_to_every_tenth_tick() {
    let opts = GatewayOptions { realtime: true, ..GatewayOptions::default() };
    // Nobody takes the human role, so the sim runs robots-only to the timeout.
    let (port, server) = start(episode(HumanMode::Remote, 300), opts);
    let mut c = GatewayClient::connect_retry(port, Duration::from_secs(5)).unwrap();
    let msgs = c.drain().unwrap();
    check_gap_free(&msgs).unwrap();
    let ticks: Vec<u64> = msgs.iter().skip(2).filter(|m| m.kind == kinds::SNAPSHOT).map(|m| m.tick).collect();
    assert!(ticks.len() >= 2);
    let last = *ticks.last().unwrap();
    for t in &ticks[..ticks.len() - 1] {
        assert_eq!(t % 10, 0, "{ticks:?}");
    }
    assert!(ticks.windows(2).all(|w| w[0] < w[1] || w[1] == last));
    server.join().unwrap();
}

#[test]
fn human_disconnect_pauses_and_reconnect_resumes() {
    let (port, server) = start(episode(HumanMode::Remote, 100_000), realtime());
    let mut human = GatewayClient::connect_retry(port, Duration::from_secs(5)).unwrap();
    human.send(&ClientMessage::ReadyAck { role: Role::Human }).unwrap();
    human.recv_until(kinds::ASSIGNMENT).unwrap();
    drop(human);

    let mut observer = GatewayClient::connect(port).unwrap();
    let mut paused_tick = None;
    while paused_tick.is_none() {
        let env = observer.recv().unwrap().unwrap();
        if env.kind == kinds::SNAPSHOT && env.payload["paused"] == true {
            paused_tick = Some(env.payload["world"]["tick"].as_u64().unwrap());
        }
    }
    thread::sleep(Duration::from_millis(300));

    let mut human = GatewayClient::connect(port).unwrap();
    let sync = human.recv_until(kinds::COG_STATE).unwrap();
    let tick_now = sync[0].payload["world"]["tick"].as_u64().unwrap();
    assert_eq!(tick_now, paused_tick.unwrap(), "sim advanced while the human was away");
    assert_eq!(sync[0].payload["paused"], true);
    human.send(&ClientMessage::ReadyAck { role: Role::Human }).unwrap();
    let got = human.recv_until(kinds::ASSIGNMENT).unwrap();
    assert!(got.iter().any(|m| m.kind == kinds::ROLE));
    let mut end = false;
    while !end {
        let env = human.recv().unwrap().unwrap();
        match env.kind.as_str() {
            kinds::SNAPSHOT => {
                if env.payload["paused"] == false {
                    human.send(&ClientMessage::GraspRequest { object: "cube".into() }).unwrap();
                }
            }
            kinds::EPISODE_END => end = true,
            _ => {}
        }
    }
    assert!(server.join().unwrap().success);
}

#[test]
fn malformed_client_is_dropped_and_episode_continues() {
    let (port, server) = start(episode(HumanMode::Scripted, 400), realtime());
    let mut bad = GatewayClient::connect_retry(port, Duration::from_secs(5)).unwrap();
    let mut good = GatewayClient::connect(port).unwrap();
    bad.send_raw("{this is not json").unwrap();
    let rest = bad.drain().unwrap();
    let err = rest.iter().find(|m| m.kind == kinds::ERROR).expect("violation reported");
    assert_eq!(err.payload["code"], codes::PROTOCOL_VIOLATION);
    let msgs = good.drain().unwrap();
    check_gap_free(&msgs).unwrap();
    assert_eq!(msgs.last().unwrap().kind, kinds::EPISODE_END);
    server.join().unwrap();
}

#[test]
fn latest_command_wins() {
    let (port, server) = start(episode(HumanMode::Remote, 100_000), realtime());
    let mut human = GatewayClient::connect_retry(port, Duration::from_secs(5)).unwrap();
    human.send(&ClientMessage::ReadyAck { role: Role::Human }).unwrap();
    human.recv_until(kinds::ROLE).unwrap();
    for i in 0..200 {
        let v = if i == 199 { Vec3::new(0.0, 0.0, 0.25) } else { Vec3::new(0.5, 0.0, 0.0) };
        human.send(&ClientMessage::HumanCmd { linear: v }).unwrap();
    }
    let mut settled = None;
    for _ in 0..50 {
        let env = human.recv_until(kinds::SNAPSHOT).unwrap().pop().unwrap();
        if human_command(&env) == Vec3::new(0.0, 0.0, 0.25) {
            settled = Some(env.tick);
            break;
        }
    }
    assert!(settled.is_some(), "last command never applied");
    human.send(&ClientMessage::HumanCmd { linear: Vec3::ZERO }).unwrap();
    loop {
        let env = human.recv().unwrap().unwrap();
        match env.kind.as_str() {
            kinds::SNAPSHOT => human.send(&ClientMessage::GraspRequest { object: "cube".into() }).unwrap(),
            kinds::EPISODE_END => break,
            _ => {}
        }
    }
    server.join().unwrap();
}

#[test]
fn port_in_use_is_reported() {
    let a = Gateway::bind(0).unwrap();
    match Gateway::bind(a.port()) {
        Err(GatewayError::PortInUse(p)) => assert_eq!(p, a.port()),
        Err(e) => panic!("unexpected error {e}"),
        Ok(_) => panic!("second bind succeeded"),
    }
}

#[test]
fn scripted_human_serve_matches_headless() {
    let (w, g, r) = setup();
    let config = EpisodeConfig { timeout: 2000, human: HumanMode::Scripted, ..EpisodeConfig::default() };
    let headless = run_episode(w, g, &r, config).unwrap();
    let opts = GatewayOptions { realtime: false, ..GatewayOptions::default() };
    let (_, server) = start(episode(HumanMode::Scripted, 2000), opts);
    let served = server.join().unwrap();
    assert_eq!(headless.log.to_jsonl(), served.log.to_jsonl());
    assert!(headless.success);
}
