//! Lockstep episode execution: the DMA schedules graph nodes, every SEA ticks
//! against the same snapshot, and the world advances once per tick.

use std::collections::{BTreeMap, HashSet};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::Arc;
use std::thread::JoinHandle;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::decompose_subtask;
use crate::math::Vec3;
use crate::robots::{apply_actuations, ActuationEvent, RobotDescriptor, RobotKind};
use crate::sim::{BodyCommand, World};
use crate::skills::{apply_grasp_action, SkillInvocation};

use super::graph::{resolve_executor, validate_graph, CollaborationGraph, GraphError, NodeState, Roster, ValidationOptions};
use super::message::{EpisodeOutcome, MessageKind, MessageLog, DMA};
use super::safety::{enforce_safety, SafetyVerdict};
use super::sea::{HumanInput, Sea, SeaEvent, SeaOutput};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutionMode {
    #[default]
    Inline,
    /// One worker thread per executor; results merged in roster order.
    Threaded,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HumanMode {
    /// The human avatar runs the same skill controllers as robots.
    #[default]
    Scripted,
    /// Driven by a teleoperation client.
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub timeout: u64,
    pub retry_budget: u32,
    pub mode: ExecutionMode,
    pub human: HumanMode,
    /// Fixed skill chains by node id, bypassing decomposition.
    #[serde(default)]
    pub chains: BTreeMap<String, Vec<SkillInvocation>>,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            timeout: 20_000,
            retry_budget: 2,
            mode: ExecutionMode::Inline,
            human: HumanMode::Scripted,
            chains: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EpisodeError {
    #[error("invalid collaboration graph: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidGraph(Vec<GraphError>),
}

#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub success: bool,
    pub reason: Option<String>,
    pub ticks: u64,
    pub log: MessageLog,
    pub world: World,
    pub node_states: Vec<(String, NodeState)>,
}

struct Job {
    sea: Sea,
    world: Arc<World>,
    input: Option<HumanInput>,
}

struct Worker {
    tx: Option<Sender<Job>>,
    rx: Receiver<(Sea, SeaOutput)>,
    handle: Option<JoinHandle<()>>,
}

impl Worker {
    fn spawn() -> Worker {
        let (tx, job_rx) = channel::<Job>();
        let (out_tx, rx) = channel();
        let handle = std::thread::spawn(move || {
            for job in job_rx {
                if out_tx.send(job.sea.tick(&job.world, job.input.as_ref())).is_err() {
                    break;
                }
            }
        });
        Worker { tx: Some(tx), rx, handle: Some(handle) }
    }
}

impl Drop for Worker {
    fn drop(&mut self) {
        self.tx.take();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

pub struct Episode {
    world: World,
    graph: CollaborationGraph,
    config: EpisodeConfig,
    log: MessageLog,
    seas: Vec<Sea>,
    /// SEA index per node.
    node_exec: Vec<usize>,
    attempts: Vec<u32>,
    replan: Vec<bool>,
    violating: HashSet<String>,
    human_input: HumanInput,
    human_present: bool,
    workers: Vec<Worker>,
    outcome: Option<EpisodeOutcome>,
}

impl Episode {
    pub fn new(world: World, mut graph: CollaborationGraph, roster: &Roster, config: EpisodeConfig) -> Result<Episode, EpisodeError> {
        validate_graph(&graph, &world, roster, ValidationOptions::default()).map_err(EpisodeError::InvalidGraph)?;
        let seas: Vec<Sea> = roster
            .values()
            .map(|d| Sea::new(d.clone(), &world, d.kind == RobotKind::Human && config.human == HumanMode::Remote))
            .collect();
        let node_exec = graph
            .nodes
            .iter()
            .map(|n| {
                let id = &resolve_executor(roster, &n.executor).expect("validated").id;
                seas.iter().position(|s| s.id() == id).expect("roster member")
            })
            .collect();
        for n in &mut graph.nodes {
            n.state = NodeState::Pending;
        }
        let workers = match config.mode {
            ExecutionMode::Inline => Vec::new(),
            ExecutionMode::Threaded => seas.iter().map(|_| Worker::spawn()).collect(),
        };
        let n = graph.nodes.len();
        Ok(Episode {
            world,
            graph,
            config,
            log: MessageLog::default(),
            seas,
            node_exec,
            attempts: vec![0; n],
            replan: vec![false; n],
            violating: HashSet::new(),
            human_input: HumanInput::default(),
            human_present: true,
            workers,
            outcome: None,
        })
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn graph(&self) -> &CollaborationGraph {
        &self.graph
    }

    pub fn log(&self) -> &MessageLog {
        &self.log
    }

    pub fn config(&self) -> &EpisodeConfig {
        &self.config
    }

    pub fn outcome(&self) -> Option<&EpisodeOutcome> {
        self.outcome.as_ref()
    }

    pub fn is_done(&self) -> bool {
        self.outcome.is_some()
    }

    pub fn node_states(&self) -> Vec<(String, NodeState)> {
        self.graph.nodes.iter().map(|n| (n.id.clone(), n.state)).collect()
    }

    /// Descriptor of the remotely driven human, if any.
    pub fn remote_human(&self) -> Option<&Arc<RobotDescriptor>> {
        self.seas.iter().find(|s| s.remote).map(|s| &s.descriptor)
    }

    /// Node currently assigned to the remote human.
    pub fn human_assignment(&self) -> Option<&str> {
        self.seas.iter().find(|s| s.remote).and_then(|s| s.node())
    }

    /// Sets the remote human's input for the following ticks. The linear
    /// velocity is clamped to the avatar's speed limit; returns the clamped value.
    pub fn set_human_input(&mut self, mut input: HumanInput) -> Vec3 {
        if let Some(d) = self.remote_human() {
            input.linear = input.linear.clamp_norm(d.limits.max_speed);
        }
        self.human_input = input;
        self.human_input.linear
    }

    pub fn human_input(&self) -> &HumanInput {
        &self.human_input
    }

    /// Human nodes are only dispatched while a client is connected.
    pub fn set_human_present(&mut self, present: bool) {
        self.human_present = present;
    }

    fn finish(&mut self, success: bool, reason: Option<String>) {
        let result = EpisodeOutcome { success, reason, ticks: self.world.tick };
        self.log.push(self.world.tick, DMA, MessageKind::EpisodeEnd { result: result.clone() });
        self.outcome = Some(result);
    }

    fn set_state(&mut self, i: usize, s: NodeState) {
        let node = &mut self.graph.nodes[i];
        debug_assert!(node.state == s || node.state.can_become(s), "{} -> {s}", node.state);
        node.state = s;
    }

    fn dispatch(&mut self, i: usize) {
        let tick = self.world.tick;
        let k = self.node_exec[i];
        self.attempts[i] += 1;
        self.replan[i] = false;
        let node = self.graph.nodes[i].clone();
        let executor = self.seas[k].id().to_string();
        self.log.push(
            tick,
            DMA,
            MessageKind::SubtaskAssigned { node: node.id.clone(), executor: executor.clone(), attempt: self.attempts[i] },
        );
        let goal = node.goal.clone().expect("validated graphs carry goals");
        if self.seas[k].remote {
            self.seas[k].assign(&node.id, goal, Vec::new());
            return;
        }
        let chain = match self.config.chains.get(&node.id) {
            Some(c) => Ok(c.clone()),
            None => decompose_subtask(&node.instruction, &goal, &self.seas[k].descriptor, &self.world),
        };
        match chain {
            Ok(chain) => self.seas[k].assign(&node.id, goal, chain),
            Err(e) => {
                let description = format!("planning failed: {e}");
                self.log.push(tick, &executor, MessageKind::DiscriminatorReport { node: node.id.clone(), success: false, description });
                self.on_report(i, false);
            }
        }
    }

    fn on_report(&mut self, i: usize, success: bool) {
        if success {
            self.set_state(i, NodeState::Done);
        } else if self.attempts[i] <= self.config.retry_budget {
            self.replan[i] = true;
        } else {
            self.set_state(i, NodeState::Failed);
        }
    }

    fn record(&mut self, sender: &str, events: Vec<SeaEvent>) {
        let tick = self.world.tick;
        for ev in events {
            match ev {
                SeaEvent::SkillStarted { node, skill } => {
                    self.log.push(tick, sender, MessageKind::SkillStarted { node, skill });
                }
                SeaEvent::SkillEnded { node, outcome } => {
                    self.log.push(tick, sender, MessageKind::SkillEnded { node, outcome });
                }
                SeaEvent::Report(r) => {
                    let i = self.graph.index_of(&r.node).expect("reports name graph nodes");
                    self.log.push(
                        tick,
                        sender,
                        MessageKind::DiscriminatorReport { node: r.node, success: r.success, description: r.description },
                    );
                    self.on_report(i, r.success);
                }
            }
        }
    }

    fn schedule(&mut self) {
        for i in 0..self.graph.nodes.len() {
            let n = &self.graph.nodes[i];
            if n.state == NodeState::Pending
                && n.deps.iter().all(|d| self.graph.node(d).is_some_and(|x| x.state == NodeState::Done))
            {
                self.set_state(i, NodeState::Ready);
            }
        }
        for i in 0..self.graph.nodes.len() {
            let k = self.node_exec[i];
            let sea = &self.seas[k];
            let available = !sea.remote || self.human_present;
            match self.graph.nodes[i].state {
                NodeState::Ready if sea.is_idle() && available => {
                    self.set_state(i, NodeState::Running);
                    self.dispatch(i);
                }
                NodeState::Running if self.replan[i] && sea.is_idle() && available => self.dispatch(i),
                _ => {}
            }
        }
    }

    fn tick_seas(&mut self) -> Vec<SeaOutput> {
        let input = self.human_input.clone();
        let input_for = |s: &Sea| s.remote.then(|| input.clone());
        let results: Vec<(Sea, SeaOutput)> = if self.workers.is_empty() {
            self.seas.iter().map(|s| s.tick(&self.world, input_for(s).as_ref())).collect()
        } else {
            let snapshot = Arc::new(self.world.clone());
            for (s, w) in self.seas.iter().zip(&self.workers) {
                let job = Job { sea: s.clone(), world: snapshot.clone(), input: input_for(s) };
                w.tx.as_ref().expect("worker alive").send(job).expect("worker alive");
            }
            self.workers.iter().map(|w| w.rx.recv().expect("worker alive")).collect()
        };
        let (seas, outputs) = results.into_iter().unzip();
        self.seas = seas;
        outputs
    }

    fn proposed_position(&self, desc: &RobotDescriptor, commands: &[BodyCommand]) -> Option<Vec3> {
        let b = self.world.body(&desc.id)?;
        let dt = self.world.dt;
        let force = commands
            .iter()
            .find_map(|c| match c {
                BodyCommand::Force { body, force } if *body == desc.id => Some(*force),
                _ => None,
            })
            .unwrap_or(Vec3::ZERO);
        let m = b.mass + self.world.payload_mass(&desc.id);
        let v = b.twist.linear + (force / m + self.world.gravity - b.twist.linear * b.drag_coeff) * dt;
        Some(b.grip_point() + v * dt)
    }

    /// Advances the episode by one tick. No-op once finished.
    pub fn step(&mut self) {
        if self.outcome.is_some() {
            return;
        }
        self.schedule();
        let outputs = self.tick_seas();

        let mut commands = Vec::new();
        let mut grasps = Vec::new();
        for (k, out) in outputs.into_iter().enumerate() {
            let id = self.seas[k].id().to_string();
            self.record(&id, out.events);
            let desc = self.seas[k].descriptor.clone();
            let actuation = match apply_actuations(&desc, &out.commands, &self.world) {
                Ok(a) => a,
                Err(e) => {
                    let events = self.seas[k].abort(&self.world, &format!("actuation: {e}"));
                    self.record(&id, events);
                    match apply_actuations(&desc, &[], &self.world) {
                        Ok(a) => a,
                        Err(_) => continue,
                    }
                }
            };
            let proposed = actuation
                .events
                .iter()
                .find_map(|e| match e {
                    ActuationEvent::OffWorkspace { requested, .. } => Some(*requested),
                    _ => None,
                })
                .or_else(|| desc.is_thrust_driven().then(|| self.proposed_position(&desc, &actuation.commands)).flatten());
            let verdict = proposed.map_or(SafetyVerdict::Allowed, |p| enforce_safety(&id, p, &desc.workspace));
            match verdict {
                SafetyVerdict::Allowed => {
                    self.violating.remove(&id);
                    commands.extend(actuation.commands);
                    if let Some(g) = out.grasp {
                        grasps.push((id, g));
                    }
                }
                SafetyVerdict::Violation { boundary, .. } => {
                    let position = proposed.expect("violations have a position");
                    let first = self.violating.insert(id.clone());
                    if desc.kind.is_human() {
                        if first {
                            self.log.push(self.world.tick, DMA, MessageKind::SafetyViolation { executor: id.clone(), boundary, position });
                        }
                        commands.extend(actuation.commands);
                        if let Some(g) = out.grasp {
                            grasps.push((id, g));
                        }
                    } else {
                        self.log.push(self.world.tick, DMA, MessageKind::SafetyViolation { executor: id.clone(), boundary, position });
                        let events = self.seas[k].abort(&self.world, "safety violation");
                        self.record(&id, events);
                        if let Ok(a) = apply_actuations(&desc, &[], &self.world) {
                            commands.extend(a.commands);
                        }
                    }
                }
            }
        }
        for (id, g) in grasps {
            if let Err(e) = apply_grasp_action(&mut self.world, &id, &g) {
                log::debug!("grasp action of {id} rejected: {e}");
            }
        }
        if let Err(e) = self.world.step(&commands) {
            self.finish(false, Some(format!("simulation error: {e}")));
            return;
        }
        self.check_end();
    }

    fn check_end(&mut self) {
        let nodes = &self.graph.nodes;
        if nodes.iter().all(|n| n.state == NodeState::Done) {
            self.finish(true, None);
            return;
        }
        if let Some(f) = nodes.iter().find(|n| n.state == NodeState::Failed) {
            let active = nodes.iter().any(|n| n.state == NodeState::Running);
            let blocked = self.blocked();
            let progress_possible =
                nodes.iter().enumerate().any(|(i, n)| matches!(n.state, NodeState::Pending | NodeState::Ready) && !blocked[i]);
            if !active && !progress_possible {
                let reason = format!("subtask `{}` failed", f.id);
                self.finish(false, Some(reason));
                return;
            }
        }
        if self.world.tick >= self.config.timeout {
            self.finish(false, Some("episode timeout".into()));
        }
    }

    /// Nodes downstream of a failed node.
    fn blocked(&self) -> Vec<bool> {
        let n = self.graph.nodes.len();
        let succ = self.graph.successors();
        let mut blocked = vec![false; n];
        let mut stack: Vec<usize> = (0..n).filter(|&i| self.graph.nodes[i].state == NodeState::Failed).collect();
        while let Some(i) = stack.pop() {
            for &j in &succ[i] {
                if !blocked[j] {
                    blocked[j] = true;
                    stack.push(j);
                }
            }
        }
        blocked
    }

    pub fn run(mut self) -> EpisodeResult {
        while !self.is_done() {
            self.step();
        }
        self.into_result()
    }

    pub fn into_result(mut self) -> EpisodeResult {
        let outcome = self.outcome.take().unwrap_or(EpisodeOutcome { success: false, reason: Some("not finished".into()), ticks: self.world.tick });
        let node_states = self.node_states();
        EpisodeResult {
            success: outcome.success,
            reason: outcome.reason,
            ticks: outcome.ticks,
            log: std::mem::take(&mut self.log),
            world: self.world.clone(),
            node_states,
        }
    }
}

/// Validates the graph and runs the episode to completion.
pub fn run_episode(world: World, graph: CollaborationGraph, roster: &Roster, config: EpisodeConfig) -> Result<EpisodeResult, EpisodeError> {
    Ok(Episode::new(world, graph, roster, config)?.run())
}
