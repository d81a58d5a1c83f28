//! Collaboration graph, decision-making and skill-expert agents, and the
//! lockstep episode runtime.

mod graph;
mod message;
mod runtime;
mod safety;
mod sea;

pub use graph::{
    ready_set, resolve_executor, validate_graph, CoGNode, CollaborationGraph, GraphError, NodeState, Roster,
    ValidationOptions,
};
pub use message::{AgentMessage, EpisodeOutcome, MessageKind, MessageLog, DMA};
pub use runtime::{run_episode, Episode, EpisodeConfig, EpisodeError, EpisodeResult, ExecutionMode, HumanMode};
pub use safety::{enforce_safety, SafetyVerdict};
pub use sea::{HumanInput, Sea, SeaEvent, SeaOutput, SeaTask};
