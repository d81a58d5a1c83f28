use std::collections::BTreeMap;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{Ipv4Addr, SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, Sender, SyncSender, TrySendError};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use thiserror::Error;

use super::protocol::{codes, kinds, ClientMessage, Envelope, Role};
use crate::cog::{Episode, EpisodeResult, HumanInput, MessageKind, NodeState};
use crate::math::Vec3;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("port {0} is already in use")]
    PortInUse(u16),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone)]
pub struct GatewayOptions {
    /// Sim ticks between snapshots (10 Hz at dt = 0.01).
    pub snapshot_every: u64,
    /// Pace the sim at wall-clock speed.
    pub realtime: bool,
    /// Outbound lines buffered per client before it is dropped.
    pub queue_capacity: usize,
}

impl Default for GatewayOptions {
    fn default() -> Self {
        GatewayOptions { snapshot_every: 10, realtime: true, queue_capacity: 1024 }
    }
}

enum Inbound {
    Joined { id: u64, tx: SyncSender<String>, stream: TcpStream, writer: JoinHandle<()> },
    Message { id: u64, msg: ClientMessage },
    Violation { id: u64, reason: String },
    Left { id: u64 },
}

struct Client {
    tx: SyncSender<String>,
    stream: TcpStream,
    writer: Option<JoinHandle<()>>,
    seq: u64,
    role: Role,
}

impl Client {
    /// Queues a message; false when the client is gone or too slow.
    fn send(&mut self, kind: &str, tick: u64, payload: Value) -> bool {
        let line = Envelope::new(kind, self.seq, tick, payload).to_line();
        match self.tx.try_send(line) {
            Ok(()) => {
                self.seq += 1;
                true
            }
            Err(TrySendError::Full(_) | TrySendError::Disconnected(_)) => false,
        }
    }

    fn close(mut self) {
        drop(self.tx);
        if let Some(w) = self.writer.take() {
            let _ = w.join();
        }
        let _ = self.stream.shutdown(std::net::Shutdown::Both);
    }
}

/// A bound gateway socket, ready to serve one episode.
pub struct Gateway {
    listener: TcpListener,
    port: u16,
}

impl Gateway {
    /// Binds 127.0.0.1:`port`; port 0 picks a free one.
    pub fn bind(port: u16) -> Result<Gateway, GatewayError> {
        let listener = TcpListener::bind(SocketAddr::from((Ipv4Addr::LOCALHOST, port))).map_err(|e| match e.kind() {
            io::ErrorKind::AddrInUse => GatewayError::PortInUse(port),
            _ => GatewayError::Io(e),
        })?;
        let port = listener.local_addr()?.port();
        Ok(Gateway { listener, port })
    }

    pub fn port(&self) -> u16 {
        self.port
    }

    /// Runs `episode` to completion while streaming it to clients.
    pub fn serve(self, episode: Episode, opts: &GatewayOptions) -> Result<EpisodeResult, GatewayError> {
        let (tx, rx) = mpsc::channel();
        let stop = Arc::new(AtomicBool::new(false));
        self.listener.set_nonblocking(true)?;
        let acceptor = {
            let stop = stop.clone();
            let cap = opts.queue_capacity;
            let listener = self.listener;
            thread::spawn(move || accept_loop(listener, tx, stop, cap))
        };
        let result = Runner::new(episode, opts.clone()).run(&rx);
        stop.store(true, Ordering::SeqCst);
        let _ = acceptor.join();
        Ok(result)
    }
}

/// Binds `port` and serves the episode on it.
pub fn serve_episode(episode: Episode, port: u16, opts: &GatewayOptions) -> Result<EpisodeResult, GatewayError> {
    Gateway::bind(port)?.serve(episode, opts)
}

fn accept_loop(listener: TcpListener, tx: Sender<Inbound>, stop: Arc<AtomicBool>, cap: usize) {
    let mut next_id = 0u64;
    while !stop.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, _)) => {
                let id = next_id;
                next_id += 1;
                if let Err(e) = start_session(id, stream, &tx, cap) {
                    log::debug!("client {id} failed to start: {e}");
                }
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(Duration::from_millis(5)),
            Err(e) => {
                log::warn!("accept failed: {e}");
                thread::sleep(Duration::from_millis(5));
            }
        }
    }
}

fn start_session(id: u64, stream: TcpStream, tx: &Sender<Inbound>, cap: usize) -> io::Result<()> {
    stream.set_nonblocking(false)?;
    stream.set_nodelay(true)?;
    stream.set_write_timeout(Some(Duration::from_secs(2)))?;
    let (out_tx, out_rx) = mpsc::sync_channel::<String>(cap);
    let mut write_half = stream.try_clone()?;
    let writer = thread::spawn(move || {
        for line in out_rx {
            if write_half.write_all(line.as_bytes()).is_err() {
                break;
            }
        }
        let _ = write_half.flush();
    });
    let read_half = stream.try_clone()?;
    // Joined goes out before the reader exists, so it precedes every message.
    if tx.send(Inbound::Joined { id, tx: out_tx, stream, writer }).is_err() {
        return Ok(());
    }
    let tx = tx.clone();
    thread::spawn(move || {
        for line in BufReader::new(read_half).lines() {
            let Ok(line) = line else { break };
            if line.trim().is_empty() {
                continue;
            }
            let ev = match ClientMessage::parse(&line) {
                Ok(msg) => Inbound::Message { id, msg },
                Err(e) => {
                    let _ = tx.send(Inbound::Violation { id, reason: e.0 });
                    return;
                }
            };
            if tx.send(ev).is_err() {
                return;
            }
        }
        let _ = tx.send(Inbound::Left { id });
    });
    Ok(())
}

struct Runner {
    episode: Episode,
    opts: GatewayOptions,
    clients: BTreeMap<u64, Client>,
    human: Option<u64>,
    remote: bool,
    command: Vec3,
    pending_command: Option<Vec3>,
    grasp: Option<String>,
    release: bool,
    states: Vec<(String, NodeState)>,
    log_cursor: usize,
    paused: bool,
}

impl Runner {
    fn new(mut episode: Episode, opts: GatewayOptions) -> Runner {
        let remote = episode.remote_human().is_some();
        episode.set_human_present(!remote);
        let states = episode.node_states();
        Runner {
            episode,
            opts,
            clients: BTreeMap::new(),
            human: None,
            remote,
            command: Vec3::ZERO,
            pending_command: None,
            grasp: None,
            release: false,
            states,
            log_cursor: 0,
            paused: false,
        }
    }

    fn tick(&self) -> u64 {
        self.episode.world().tick
    }

    fn snapshot_payload(&self) -> Value {
        let world: Value = serde_json::from_str(&self.episode.world().snapshot_json()).expect("snapshot is JSON");
        let human = self.episode.remote_human().map(|d| {
            json!({
                "id": d.id,
                "connected": self.human.is_some(),
                "command": [self.command.x, self.command.y, self.command.z],
                "max_speed": d.limits.max_speed,
                "assignment": self.episode.human_assignment(),
            })
        });
        json!({ "world": world, "human": human, "paused": self.paused })
    }

    fn cog_payload(&self) -> Value {
        let g = self.episode.graph();
        let nodes: Vec<Value> = g
            .nodes
            .iter()
            .map(|n| {
                json!({
                    "id": n.id,
                    "executor": n.executor,
                    "instruction": n.instruction,
                    "deps": n.deps,
                    "state": n.state.to_string(),
                })
            })
            .collect();
        json!({ "task": g.task, "nodes": nodes })
    }

    fn broadcast(&mut self, kind: &str, payload: Value) {
        let tick = self.tick();
        let dropped: Vec<u64> =
            self.clients.iter_mut().filter_map(|(id, c)| (!c.send(kind, tick, payload.clone())).then_some(*id)).collect();
        for id in dropped {
            log::info!("dropping slow client {id}");
            self.disconnect(id);
        }
    }

    fn send_to(&mut self, id: u64, kind: &str, payload: Value) {
        let tick = self.tick();
        let ok = self.clients.get_mut(&id).is_some_and(|c| c.send(kind, tick, payload));
        if !ok {
            self.disconnect(id);
        }
    }

    fn disconnect(&mut self, id: u64) {
        if let Some(c) = self.clients.remove(&id) {
            c.close();
        }
        if self.human == Some(id) {
            self.human = None;
            self.episode.set_human_present(!self.remote);
            self.command = Vec3::ZERO;
            self.pending_command = Some(Vec3::ZERO);
            self.grasp = None;
            self.release = false;
        }
    }

    fn handle(&mut self, ev: Inbound) {
        match ev {
            Inbound::Joined { id, tx, stream, writer } => {
                self.clients.insert(id, Client { tx, stream, writer: Some(writer), seq: 0, role: Role::Observer });
                let snap = self.snapshot_payload();
                let cog = self.cog_payload();
                self.send_to(id, kinds::SNAPSHOT, snap);
                self.send_to(id, kinds::COG_STATE, cog);
            }
            Inbound::Message { id, msg } => self.on_message(id, msg),
            Inbound::Violation { id, reason } => {
                log::info!("client {id} violated the protocol: {reason}");
                self.send_to(id, kinds::ERROR, json!({ "code": codes::PROTOCOL_VIOLATION, "message": reason }));
                self.disconnect(id);
            }
            Inbound::Left { id } => self.disconnect(id),
        }
    }

    fn on_message(&mut self, id: u64, msg: ClientMessage) {
        let Some(role) = self.clients.get(&id).map(|c| c.role) else { return };
        match msg {
            ClientMessage::ReadyAck { role: Role::Human } => {
                if self.human.is_some_and(|h| h != id) {
                    self.send_to(id, kinds::ERROR, json!({ "code": codes::ROLE_TAKEN, "message": "the human role is taken" }));
                    return;
                }
                self.human = Some(id);
                if let Some(c) = self.clients.get_mut(&id) {
                    c.role = Role::Human;
                }
                self.episode.set_human_present(true);
                self.send_to(id, kinds::ROLE, json!({ "role": Role::Human }));
                if let Some(node) = self.episode.human_assignment().map(str::to_string) {
                    let payload = self.assignment_payload(&node, None);
                    self.send_to(id, kinds::ASSIGNMENT, payload);
                }
            }
            ClientMessage::ReadyAck { role: Role::Observer } => {
                if role == Role::Observer {
                    self.send_to(id, kinds::ROLE, json!({ "role": Role::Observer }));
                }
            }
            _ if role != Role::Human => {
                self.send_to(id, kinds::ERROR, json!({ "code": codes::NOT_HUMAN, "message": "only the human client may command" }));
            }
            // Latest wins: only the last command before a tick is applied.
            ClientMessage::HumanCmd { linear } => self.pending_command = Some(linear),
            ClientMessage::GraspRequest { object } => self.grasp = Some(object),
            ClientMessage::ReleaseRequest => self.release = true,
        }
    }

    fn assignment_payload(&self, node: &str, attempt: Option<u32>) -> Value {
        let n = self.episode.graph().node(node);
        json!({
            "node": node,
            "executor": n.map(|n| n.executor.clone()),
            "instruction": n.map(|n| n.instruction.clone()),
            "goal": n.and_then(|n| n.goal.as_ref()).map(|g| g.to_string()),
            "attempt": attempt,
        })
    }

    fn apply_input(&mut self) {
        let one_shot = self.grasp.is_some() || self.release;
        if self.pending_command.is_none() && !one_shot {
            return;
        }
        let linear = self.pending_command.take().unwrap_or(self.command);
        let input = HumanInput { linear, grasp: self.grasp.take(), release: std::mem::take(&mut self.release) };
        self.command = self.episode.set_human_input(input);
    }

    /// Clears one-shot grasp/release flags after the tick that consumed them.
    fn clear_one_shots(&mut self) {
        let input = self.episode.human_input();
        if input.grasp.is_some() || input.release {
            self.episode.set_human_input(HumanInput { linear: self.command, grasp: None, release: false });
        }
    }

    fn publish_progress(&mut self) {
        let new: Vec<MessageKind> = self.episode.log().messages()[self.log_cursor..].iter().map(|m| m.kind.clone()).collect();
        self.log_cursor = self.episode.log().len();
        let states = self.episode.node_states();
        if states != self.states {
            self.states = states;
            let cog = self.cog_payload();
            self.broadcast(kinds::COG_STATE, cog);
        }
        for kind in new {
            match kind {
                MessageKind::SubtaskAssigned { node, attempt, .. } => {
                    let payload = self.assignment_payload(&node, Some(attempt));
                    self.broadcast(kinds::ASSIGNMENT, payload);
                }
                MessageKind::DiscriminatorReport { node, success, description } => {
                    self.broadcast(kinds::REPORT, json!({ "node": node, "success": success, "description": description }));
                }
                MessageKind::EpisodeEnd { result } => {
                    let snap = self.snapshot_payload();
                    self.broadcast(kinds::SNAPSHOT, snap);
                    self.broadcast(kinds::EPISODE_END, json!({ "success": result.success, "reason": result.reason, "ticks": result.ticks }));
                }
                _ => {}
            }
        }
    }

    fn run(mut self, rx: &Receiver<Inbound>) -> EpisodeResult {
        let dt = Duration::from_secs_f64(self.episode.world().dt);
        let mut next = Instant::now();
        while !self.episode.is_done() {
            while let Ok(ev) = rx.try_recv() {
                self.handle(ev);
            }
            let paused = self.remote && self.human.is_none() && self.episode.human_assignment().is_some();
            if paused != self.paused {
                self.paused = paused;
                let snap = self.snapshot_payload();
                self.broadcast(kinds::SNAPSHOT, snap);
            }
            if paused {
                if let Ok(ev) = rx.recv_timeout(Duration::from_millis(20)) {
                    self.handle(ev);
                }
                next = Instant::now();
                continue;
            }
            self.apply_input();
            self.episode.step();
            self.clear_one_shots();
            self.publish_progress();
            if self.tick().is_multiple_of(self.opts.snapshot_every.max(1)) && !self.episode.is_done() {
                let snap = self.snapshot_payload();
                self.broadcast(kinds::SNAPSHOT, snap);
            }
            if self.opts.realtime {
                next += dt;
                if let Some(wait) = next.checked_duration_since(Instant::now()) {
                    thread::sleep(wait);
                }
            }
        }
        let ids: Vec<u64> = self.clients.keys().copied().collect();
        for id in ids {
            if let Some(c) = self.clients.remove(&id) {
                c.close();
            }
        }
        self.episode.into_result()
    }
}
