use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::math::Vec3;

/// One line on the wire: `{type, seq, tick, payload}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub seq: u64,
    #[serde(default)]
    pub tick: u64,
    #[serde(default)]
    pub payload: Value,
}

impl Envelope {
    pub fn new(kind: &str, seq: u64, tick: u64, payload: Value) -> Envelope {
        Envelope { kind: kind.to_string(), seq, tick, payload }
    }

    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("envelopes serialize");
        s.push('\n');
        s
    }
}

/// Server-to-client message types.
pub mod kinds {
    pub const SNAPSHOT: &str = "snapshot";
    pub const COG_STATE: &str = "cog_state";
    pub const ASSIGNMENT: &str = "assignment";
    pub const REPORT: &str = "report";
    pub const EPISODE_END: &str = "episode_end";
    /// Answer to a granted `ready_ack`.
    pub const ROLE: &str = "role";
    pub const ERROR: &str = "error";

    pub const HUMAN_CMD: &str = "human_cmd";
    pub const GRASP_REQUEST: &str = "grasp_request";
    pub const RELEASE_REQUEST: &str = "release_request";
    pub const READY_ACK: &str = "ready_ack";
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Human,
    #[default]
    Observer,
}

/// Error codes carried in `error` payloads.
pub mod codes {
    pub const ROLE_TAKEN: &str = "role_taken";
    pub const NOT_HUMAN: &str = "not_human";
    pub const PROTOCOL_VIOLATION: &str = "protocol_violation";
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClientMessage {
    /// Desired avatar velocity in m/s.
    HumanCmd { linear: Vec3 },
    GraspRequest { object: String },
    ReleaseRequest,
    ReadyAck { role: Role },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("protocol violation: {0}")]
pub struct ProtocolViolation(pub String);

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HumanCmdPayload {
    linear: Vec3,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraspPayload {
    object: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReadyPayload {
    #[serde(default)]
    role: Role,
}

impl ClientMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            ClientMessage::HumanCmd { .. } => kinds::HUMAN_CMD,
            ClientMessage::GraspRequest { .. } => kinds::GRASP_REQUEST,
            ClientMessage::ReleaseRequest => kinds::RELEASE_REQUEST,
            ClientMessage::ReadyAck { .. } => kinds::READY_ACK,
        }
    }

    pub fn payload(&self) -> Value {
        match self {
            ClientMessage::HumanCmd { linear } => json!({ "linear": [linear.x, linear.y, linear.z] }),
            ClientMessage::GraspRequest { object } => json!({ "object": object }),
            ClientMessage::ReleaseRequest => json!({}),
            ClientMessage::ReadyAck { role } => json!({ "role": role }),
        }
    }

    pub fn to_envelope(&self, seq: u64) -> Envelope {
        Envelope::new(self.kind(), seq, 0, self.payload())
    }

    /// Parses one client line. Anything malformed is a violation.
    pub fn parse(line: &str) -> Result<ClientMessage, ProtocolViolation> {
        let bad = |e: serde_json::Error| ProtocolViolation(e.to_string());
        let env: Envelope = serde_json::from_str(line).map_err(bad)?;
        let payload = if env.payload.is_null() { json!({}) } else { env.payload };
        let msg = match env.kind.as_str() {
            kinds::HUMAN_CMD => {
                let p: HumanCmdPayload = serde_json::from_value(payload).map_err(bad)?;
                if !p.linear.is_finite() {
                    return Err(ProtocolViolation("non-finite velocity".into()));
                }
                ClientMessage::HumanCmd { linear: p.linear }
            }
            kinds::GRASP_REQUEST => {
                let p: GraspPayload = serde_json::from_value(payload).map_err(bad)?;
                ClientMessage::GraspRequest { object: p.object }
            }
            kinds::RELEASE_REQUEST => ClientMessage::ReleaseRequest,
            kinds::READY_ACK => {
                let p: ReadyPayload = serde_json::from_value(payload).map_err(bad)?;
                ClientMessage::ReadyAck { role: p.role }
            }
            other => return Err(ProtocolViolation(format!("unknown message type `{other}`"))),
        };
        Ok(msg)
    }
}
