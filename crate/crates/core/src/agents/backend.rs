//! Planner backends: the deterministic rule planner and the interface the
//! LLM client implements.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cog::{validate_graph, CollaborationGraph, GraphError, Roster, ValidationOptions};
use crate::sim::{Predicate, World};

use super::catalog::AffordanceCatalog;
use super::decompose::PlanError;
use super::rearrange::plan_rearrangement;
use super::relay::plan_relay;

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("planned graph is invalid: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    ValidationFailed(Vec<GraphError>),
    #[error("planner endpoint unreachable: {0}")]
    EndpointUnreachable(String),
    #[error("malformed planner response: {0}")]
    MalformedResponse(String),
}

/// Which rule-based strategy a scenario asks for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleStrategy {
    Rearrangement { objects: Vec<String>, containers: Vec<String> },
    Relay { cargo: String, goal: Predicate },
}

pub trait PlannerBackend {
    fn name(&self) -> &str;

    /// Produces a collaboration graph that passes `validate_graph`.
    fn plan(&self, task: &str, world: &World, roster: &Roster, catalog: &AffordanceCatalog)
        -> Result<CollaborationGraph, PlannerError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct RulePlanner {
    pub strategy: RuleStrategy,
}

impl PlannerBackend for RulePlanner {
    fn name(&self) -> &str {
        "rule"
    }

    fn plan(&self, task: &str, world: &World, roster: &Roster, _catalog: &AffordanceCatalog) -> Result<CollaborationGraph, PlannerError> {
        let g = match &self.strategy {
            RuleStrategy::Rearrangement { objects, containers } => plan_rearrangement(task, objects, containers, roster, world)?,
            RuleStrategy::Relay { cargo, goal } => plan_relay(task, cargo, goal, roster, world)?,
        };
        validate_graph(&g, world, roster, ValidationOptions::default()).map_err(PlannerError::ValidationFailed)?;
        Ok(g)
    }
}
