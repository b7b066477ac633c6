//! Prompting, response parsing and transport for LLM-backed planners.

mod client;
mod oracle;
mod parse;
mod prompt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::planners::{BehaviorLabel, BehaviorOption, Observation, QueryRecord};

pub use client::{llm_call, ClientConfig, CompletionClient, HttpClient, MockClient};
pub use oracle::{scripted_oracle, ScriptedOracle, ORACLE_HEADWAY};
pub use parse::{parse_behavior_response, parse_waypoints_response, ParseError, WAYPOINT_COUNT};
pub use prompt::{
    build_behavior_prompt, build_waypoints_prompt, render_scene_description, PromptBundle, PromptMode, SceneText,
    MAX_LISTED,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorResponse {
    pub chosen_label: BehaviorLabel,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LlmError {
    #[error("request timed out")]
    Timeout,
    #[error("transport error: {0}")]
    Transport(String),
    #[error("endpoint answered with status {status}: {body}")]
    NonSuccessStatus { status: u16, body: String },
    #[error("malformed completion payload: {0}")]
    Payload(String),
    #[error("client configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Chooses one behavior among the offered options.
pub trait BehaviorSelector: Send {
    fn name(&self) -> &str;

    fn select(&mut self, obs: &Observation<'_>, options: &[BehaviorOption]) -> Result<SelectorResponse, LlmError>;

    /// Drains the exchanges recorded since the last call.
    fn take_queries(&mut self) -> Vec<QueryRecord> {
        Vec::new()
    }
}

/// Selector backed by a completion client.
pub struct LlmSelector {
    client: Box<dyn CompletionClient>,
    records: Vec<QueryRecord>,
}

impl LlmSelector {
    pub fn new(client: Box<dyn CompletionClient>) -> Self {
        Self { client, records: Vec::new() }
    }
}

impl BehaviorSelector for LlmSelector {
    fn name(&self) -> &str {
        "llm"
    }

    fn select(&mut self, obs: &Observation<'_>, options: &[BehaviorOption]) -> Result<SelectorResponse, LlmError> {
        let prompt = build_behavior_prompt(obs, options);
        let reply = self.client.complete(&prompt);
        let parsed = reply.clone().and_then(|text| parse_behavior_response(&text, options).map_err(LlmError::from));
        self.records.push(QueryRecord {
            time: obs.time,
            system: prompt.task_instruction.clone(),
            user: prompt.user_message(),
            response: reply.as_ref().ok().cloned(),
            error: parsed.as_ref().err().map(|e| e.to_string()),
            decision: parsed.as_ref().ok().map(|r| r.chosen_label.as_str().to_owned()),
        });
        parsed
    }

    fn take_queries(&mut self) -> Vec<QueryRecord> {
        std::mem::take(&mut self.records)
    }
}
