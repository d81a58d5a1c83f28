//! Basic-skill library: closed-loop controllers with explicit termination.

mod chain;
mod control;
mod controller;
mod intercept;
mod kind;
mod schema;
mod spec;

use thiserror::Error;

pub use chain::{rejected, run_skill_chain};
pub use control::{effector, hold, servo, track_velocity, up, Effector};
pub use controller::{
    apply_grasp_action, plan_throw, start_skill, throw_velocity, tick_skill, GraspAction, Phase, Progress, SkillState,
    TickOutput, BOX_LIFT, DEFAULT_LIFT, DEFAULT_THROW_TOLERANCE, DOOR_CLOSED_ANGLE, DOOR_OPEN_ANGLE, HATCH_STANDOFF, LID_OPEN_ANGLE,
};
pub use intercept::{drift_position, intercept_point, ChaserLimits, InterceptError, Interception};
pub use kind::SkillKind;
pub use schema::{check_params, schema, skill_schemas, ParamType, SkillSchema};
pub use spec::{
    EndState, ObjectRequirement, ObjectState, ParamValue, SkillInvocation, SkillOutcome, SkillStatus, TerminalWindow,
    TerminationSpec,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SkillError {
    #[error("`{executor}` cannot perform {skill}")]
    NotInRepertoire { executor: String, skill: SkillKind },
    #[error("invocation for `{invocation}` given to `{descriptor}`")]
    WrongExecutor { invocation: String, descriptor: String },
    #[error("{0} is undefined under gravity")]
    UndefinedUnderGravity(SkillKind),
    #[error("{skill}: missing parameter `{param}`")]
    MissingParam { skill: SkillKind, param: String },
    #[error("{skill}: parameter `{param}` {reason}")]
    BadParam { skill: SkillKind, param: String, reason: String },
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("termination spec has a non-positive tolerance or timeout")]
    MalformedTermination,
    #[error("{0}")]
    Precondition(String),
}
