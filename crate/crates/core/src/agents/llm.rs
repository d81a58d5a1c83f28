//! Chat-completion planner backend.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cog::{validate_graph, CollaborationGraph, Roster, ValidationOptions};
use crate::sim::World;

use super::backend::{PlannerBackend, PlannerError};
use super::catalog::AffordanceCatalog;
use super::describe::describe;
use super::templates::fill_missing_goals;

/// Environment variable holding the bearer token, unless configured otherwise.
pub const DEFAULT_TOKEN_ENV: &str = "STATIONSIM_LLM_TOKEN";
pub const MAX_ATTEMPTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmEndpoint {
    /// Base URL; requests go to `{base_url}/chat/completions`.
    pub base_url: String,
    pub model: String,
    #[serde(default = "default_token_env")]
    pub token_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_token_env() -> String {
    DEFAULT_TOKEN_ENV.into()
}

fn default_timeout() -> u64 {
    60
}

impl LlmEndpoint {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> LlmEndpoint {
        LlmEndpoint { base_url: base_url.into(), model: model.into(), token_env: default_token_env(), timeout_secs: default_timeout() }
    }
}

/// First bracket-balanced `{...}` in `text`, skipping braces inside strings.
pub fn extract_json_object(text: &str) -> Option<&str> {
    let bytes = text.as_bytes();
    let mut search = 0;
    while let Some(off) = text[search..].find('{') {
        let start = search + off;
        let (mut depth, mut in_str, mut escaped) = (0usize, false, false);
        for (i, &c) in bytes.iter().enumerate().skip(start) {
            if in_str {
                match c {
                    _ if escaped => escaped = false,
                    b'\\' => escaped = true,
                    b'"' => in_str = false,
                    _ => {}
                }
                continue;
            }
            match c {
                b'"' => in_str = true,
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        let candidate = &text[start..=i];
                        if serde_json::from_str::<Value>(candidate).is_ok() {
                            return Some(candidate);
                        }
                        break;
                    }
                }
                _ => {}
            }
        }
        search = start + 1;
    }
    None
}

pub fn render_prompt(task: &str, world: &World, catalog: &AffordanceCatalog) -> String {
    include_str!("../../assets/llm_prompt.txt")
        .replace("{task}", task)
        .replace("{catalog}", catalog.text().trim_end())
        .replace("{scene}", describe(world).text.trim_end())
        .replace("{schema}", include_str!("../../assets/cog_schema.json").trim_end())
        .replace("{example_serial}", include_str!("../../assets/example_serial.json").trim_end())
        .replace("{example_parallel}", include_str!("../../assets/example_parallel.json").trim_end())
}

#[derive(Debug, Clone)]
pub struct LlmPlanner {
    pub endpoint: LlmEndpoint,
}

impl LlmPlanner {
    pub fn new(endpoint: LlmEndpoint) -> LlmPlanner {
        LlmPlanner { endpoint }
    }

    fn complete(&self, client: &reqwest::blocking::Client, messages: &[Value]) -> Result<String, PlannerError> {
        let url = format!("{}/chat/completions", self.endpoint.base_url.trim_end_matches('/'));
        let body = json!({ "model": self.endpoint.model, "messages": messages, "temperature": 0 });
        let mut req = client.post(&url).json(&body);
        if let Ok(token) = std::env::var(&self.endpoint.token_env) {
            req = req.bearer_auth(token);
        }
        let resp = req.send().map_err(|e| PlannerError::EndpointUnreachable(format!("{url}: {e}")))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(PlannerError::EndpointUnreachable(format!("{url}: HTTP {status}")));
        }
        let v: Value = resp.json().map_err(|e| PlannerError::MalformedResponse(format!("response is not JSON: {e}")))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| PlannerError::MalformedResponse("no choices[0].message.content".into()))
    }

    fn interpret(reply: &str, world: &World, roster: &Roster) -> Result<CollaborationGraph, PlannerError> {
        let json = extract_json_object(reply).ok_or_else(|| PlannerError::MalformedResponse("no JSON object in reply".into()))?;
        let mut g = CollaborationGraph::from_json(json).map_err(|e| PlannerError::MalformedResponse(e.to_string()))?;
        let unmatched = fill_missing_goals(&mut g, world);
        if !unmatched.is_empty() {
            return Err(PlannerError::MalformedResponse(format!("no goal given or derivable for {}", unmatched.join(", "))));
        }
        validate_graph(&g, world, roster, ValidationOptions::default()).map_err(PlannerError::ValidationFailed)?;
        Ok(g)
    }
}

impl PlannerBackend for LlmPlanner {
    fn name(&self) -> &str {
        "llm"
    }

    fn plan(&self, task: &str, world: &World, roster: &Roster, catalog: &AffordanceCatalog) -> Result<CollaborationGraph, PlannerError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(self.endpoint.timeout_secs))
            .build()
            .map_err(|e| PlannerError::EndpointUnreachable(e.to_string()))?;
        let mut messages = vec![
            json!({"role": "system", "content": "You are the task planner of a human-robot team. Answer with JSON only."}),
            json!({"role": "user", "content": render_prompt(task, world, catalog)}),
        ];
        let mut last = PlannerError::MalformedResponse("no attempts made".into());
        for attempt in 1..=MAX_ATTEMPTS {
            let reply = self.complete(&client, &messages)?;
            match Self::interpret(&reply, world, roster) {
                Ok(g) => return Ok(g),
                Err(e) => {
                    log::warn!("planner attempt {attempt} rejected: {e}");
                    messages.push(json!({"role": "assistant", "content": reply}));
                    messages.push(json!({"role": "user", "content": format!("That graph was rejected: {e}. Reply with a corrected graph as a single JSON object.")}));
                    last = e;
                }
            }
        }
        Err(last)
    }
}
