use serde::{Deserialize, Serialize};
use std::io::{self, BufRead, Write};

use crate::math::Vec3;
use crate::skills::{SkillKind, SkillOutcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub success: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub ticks: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum MessageKind {
    SubtaskAssigned { node: String, executor: String, attempt: u32 },
    SkillStarted { node: String, skill: SkillKind },
    SkillEnded { node: String, outcome: SkillOutcome },
    DiscriminatorReport { node: String, success: bool, description: String },
    SafetyViolation { executor: String, boundary: String, position: Vec3 },
    EpisodeEnd { result: EpisodeOutcome },
}

impl MessageKind {
    pub fn node(&self) -> Option<&str> {
        match self {
            MessageKind::SubtaskAssigned { node, .. }
            | MessageKind::SkillStarted { node, .. }
            | MessageKind::SkillEnded { node, .. }
            | MessageKind::DiscriminatorReport { node, .. } => Some(node),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentMessage {
    pub seq: u64,
    pub tick: u64,
    pub sender: String,
    #[serde(flatten)]
    pub kind: MessageKind,
}

/// Sender id of the decision-making agent.
pub const DMA: &str = "dma";

/// Ordered episode log; `seq` is stamped on append.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MessageLog {
    messages: Vec<AgentMessage>,
}

impl MessageLog {
    pub fn push(&mut self, tick: u64, sender: &str, kind: MessageKind) -> &AgentMessage {
        let seq = self.messages.len() as u64;
        self.messages.push(AgentMessage { seq, tick, sender: sender.to_string(), kind });
        self.messages.last().expect("just pushed")
    }

    pub fn messages(&self) -> &[AgentMessage] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for m in &self.messages {
            s.push_str(&serde_json::to_string(m).expect("message serializes"));
            s.push('\n');
        }
        s
    }

    pub fn write_jsonl(&self, mut w: impl Write) -> io::Result<()> {
        w.write_all(self.to_jsonl().as_bytes())
    }

    pub fn read_jsonl(r: impl BufRead) -> io::Result<MessageLog> {
        let mut messages = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            messages.push(serde_json::from_str(&line).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?);
        }
        Ok(MessageLog { messages })
    }
}

impl From<Vec<AgentMessage>> for MessageLog {
    fn from(messages: Vec<AgentMessage>) -> Self {
        MessageLog { messages }
    }
}
