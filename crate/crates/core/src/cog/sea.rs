//! Skill-Expert Agent: executes one subtask at a time and reports on it.

use std::sync::Arc;

use crate::agents::{describe_and_evaluate, DiscriminatorReport};
use crate::math::Vec3;
use crate::robots::{ActuationCommand, RobotDescriptor};
use crate::sim::{Predicate, World};
use crate::skills::{
    effector, hold, rejected, start_skill, tick_skill, track_velocity, GraspAction, Progress, SkillInvocation, SkillKind,
    SkillOutcome, SkillState,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SeaTask {
    pub node: String,
    pub goal: Predicate,
    pub chain: Vec<SkillInvocation>,
    pub next: usize,
    pub current: Option<SkillState>,
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum SeaEvent {
    SkillStarted { node: String, skill: SkillKind },
    SkillEnded { node: String, outcome: SkillOutcome },
    Report(DiscriminatorReport),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeaOutput {
    pub events: Vec<SeaEvent>,
    pub commands: Vec<ActuationCommand>,
    pub grasp: Option<GraspAction>,
}

/// Live input for a remotely driven human avatar, already clamped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HumanInput {
    pub linear: Vec3,
    pub grasp: Option<String>,
    pub release: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sea {
    pub descriptor: Arc<RobotDescriptor>,
    pub task: Option<SeaTask>,
    /// Where an idle free-flying executor holds station.
    pub anchor: Vec3,
    /// Driven by a live client instead of skill controllers.
    pub remote: bool,
}

impl Sea {
    pub fn new(descriptor: Arc<RobotDescriptor>, world: &World, remote: bool) -> Sea {
        let anchor = effector(&descriptor, world).map_or(descriptor.home, |e| e.position);
        Sea { descriptor, task: None, anchor, remote }
    }

    pub fn id(&self) -> &str {
        &self.descriptor.id
    }

    pub fn is_idle(&self) -> bool {
        self.task.is_none()
    }

    pub fn node(&self) -> Option<&str> {
        self.task.as_ref().map(|t| t.node.as_str())
    }

    pub fn assign(&mut self, node: &str, goal: Predicate, chain: Vec<SkillInvocation>) {
        self.task = Some(SeaTask { node: node.to_string(), goal, chain, next: 0, current: None });
    }

    fn finish(&mut self, world: &World, events: &mut Vec<SeaEvent>) {
        let Some(task) = self.task.take() else { return };
        let report = describe_and_evaluate(&task.node, &task.goal, world).unwrap_or_else(|e| DiscriminatorReport {
            node: task.node.clone(),
            success: false,
            description: e.to_string(),
        });
        events.push(SeaEvent::Report(report));
        if let Some(e) = effector(&self.descriptor, world) {
            self.anchor = e.position;
        }
    }

    /// Stops the running skill (safety or actuation fault) and reports.
    pub fn abort(&mut self, world: &World, reason: &str) -> Vec<SeaEvent> {
        let mut events = Vec::new();
        let Some(task) = self.task.as_mut() else { return events };
        if let Some(s) = task.current.take() {
            events.push(SeaEvent::SkillEnded { node: task.node.clone(), outcome: s.abort(world, reason) });
        }
        self.finish(world, &mut events);
        events
    }

    fn idle_commands(&self, world: &World) -> Vec<ActuationCommand> {
        if self.descriptor.is_thrust_driven() {
            hold(&self.descriptor, world, self.anchor)
        } else {
            Vec::new()
        }
    }

    /// One control tick against a snapshot. Pure in `self` and `world`.
    pub fn tick(&self, world: &World, input: Option<&HumanInput>) -> (Sea, SeaOutput) {
        let mut sea = self.clone();
        let mut out = SeaOutput::default();
        if sea.remote {
            sea.remote_tick(world, input.cloned().unwrap_or_default(), &mut out);
            return (sea, out);
        }
        loop {
            let Some(task) = sea.task.as_mut() else {
                out.commands = sea.idle_commands(world);
                break;
            };
            let state = match task.current.take() {
                Some(s) => s,
                None => {
                    let Some(inv) = task.chain.get(task.next).cloned() else {
                        sea.finish(world, &mut out.events);
                        continue;
                    };
                    task.next += 1;
                    match start_skill(&inv, sea.descriptor.clone(), world) {
                        Ok(s) => {
                            out.events.push(SeaEvent::SkillStarted { node: task.node.clone(), skill: inv.skill });
                            s
                        }
                        Err(e) => {
                            out.events.push(SeaEvent::SkillStarted { node: task.node.clone(), skill: inv.skill });
                            let outcome = rejected(&inv, world, e.to_string());
                            out.events.push(SeaEvent::SkillEnded { node: task.node.clone(), outcome });
                            sea.finish(world, &mut out.events);
                            continue;
                        }
                    }
                }
            };
            let t = tick_skill(&state, world);
            match t.progress {
                Progress::Terminal(outcome) => {
                    let ok = outcome.status.is_success();
                    out.events.push(SeaEvent::SkillEnded { node: task.node.clone(), outcome });
                    if !ok {
                        sea.finish(world, &mut out.events);
                    }
                }
                Progress::Running => {
                    task.current = Some(t.state);
                    out.commands = t.commands;
                    out.grasp = t.grasp;
                    break;
                }
            }
        }
        (sea, out)
    }

    fn remote_tick(&mut self, world: &World, input: HumanInput, out: &mut SeaOutput) {
        out.commands = track_velocity(&self.descriptor, world, input.linear);
        let me = self.descriptor.id.as_str();
        if input.release {
            if let Some(o) = world.held_by(me).next() {
                out.grasp = Some(GraspAction::Detach(o.to_string()));
            }
        } else if let Some(o) = input.grasp.filter(|o| world.can_attach(me, o).is_ok()) {
            out.grasp = Some(GraspAction::Attach(o));
        }
        if let Some(task) = &self.task {
            if world.query(&task.goal).unwrap_or(false) {
                self.finish(world, &mut out.events);
            }
        }
    }
}
