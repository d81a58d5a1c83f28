//! Task planning: subtask decomposition into skill chains, the discriminator,
//! and collaboration-graph planners.

mod backend;
mod catalog;
mod decompose;
mod describe;
mod llm;
mod rearrange;
mod relay;
mod templates;

pub use backend::{PlannerBackend, PlannerError, RuleStrategy, RulePlanner};
pub use catalog::{Affordance, AffordanceCatalog};
pub use decompose::{decompose_subtask, enclosing_lid, goal_capability, goal_location, PlanError, DRIFT_THRESHOLD};
pub use describe::{describe, describe_and_evaluate, is_container, state_facts, DiscriminatorReport, StateDescription};
pub use rearrange::{executor_position, nearest_executor, plan_rearrangement, TIE_EPSILON};
pub use relay::{plan_relay, STAGING_HALF_EXTENT};
pub use llm::{extract_json_object, render_prompt, LlmEndpoint, LlmPlanner, DEFAULT_TOKEN_ENV, MAX_ATTEMPTS};
pub use templates::{fill_missing_goals, goal_from_instruction};
