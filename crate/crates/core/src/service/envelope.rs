//! The newline-delimited JSON envelope exchanged with clients.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::device::{DeviceCommand, DeviceEvent, DeviceFunction, DeviceState, JobId, JobStatus, SettingValue};
use crate::dialog::{ActionKind, Setting};
use crate::nlg::AgentResponse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnvelopeType {
    #[serde(rename = "session.start")]
    SessionStart,
    #[serde(rename = "session.end")]
    SessionEnd,
    #[serde(rename = "user.utterance")]
    UserUtterance,
    #[serde(rename = "agent.response")]
    AgentResponse,
    #[serde(rename = "device.event")]
    DeviceEvent,
    #[serde(rename = "device.state")]
    DeviceState,
    #[serde(rename = "error")]
    Error,
}

impl EnvelopeType {
    pub fn as_str(&self) -> &'static str {
        match self {
            EnvelopeType::SessionStart => "session.start",
            EnvelopeType::SessionEnd => "session.end",
            EnvelopeType::UserUtterance => "user.utterance",
            EnvelopeType::AgentResponse => "agent.response",
            EnvelopeType::DeviceEvent => "device.event",
            EnvelopeType::DeviceState => "device.state",
            EnvelopeType::Error => "error",
        }
    }
}

/// One line on the wire. Client envelopes may omit `session_id` and `seq`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionEnvelope {
    #[serde(rename = "type")]
    pub kind: EnvelopeType,
    #[serde(default)]
    pub session_id: String,
    #[serde(default)]
    pub seq: u64,
    #[serde(default)]
    pub payload: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_hint: Option<f32>,
}

impl SessionEnvelope {
    pub fn client(kind: EnvelopeType, payload: Value) -> Self {
        SessionEnvelope { kind, session_id: String::new(), seq: 0, payload, rate_hint: None }
    }

    pub fn utterance(text: &str) -> Self {
        Self::client(EnvelopeType::UserUtterance, serde_json::json!({ "text": text }))
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("envelopes serialize")
    }

    /// The agent response carried by an `agent.response` envelope.
    pub fn agent(&self) -> Option<AgentPayload> {
        match self.kind {
            EnvelopeType::AgentResponse => serde_json::from_value(self.payload.clone()).ok(),
            _ => None,
        }
    }

    pub fn device_event(&self) -> Option<DeviceEventPayload> {
        match self.kind {
            EnvelopeType::DeviceEvent => serde_json::from_value(self.payload.clone()).ok(),
            _ => None,
        }
    }
}

/// `session.start` payload.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StartPayload {
    /// Profile whose saved defaults apply; sessions without one keep nothing.
    pub profile: Option<String>,
    /// Skips the first-time tour offer. Defaults to whether the profile already exists.
    pub returning: Option<bool>,
}

/// `user.utterance` payload.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtterancePayload {
    pub text: String,
}

/// A client `device.event` envelope carries an operator command instead.
pub type DeviceCommandPayload = DeviceCommand;

/// `agent.response` payload: the rendered response plus the action it realizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentPayload {
    pub turn: u64,
    pub action: ActionKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ack: Vec<Setting>,
    pub text: String,
    pub response: AgentResponse,
}

/// The job an event concerns, with the settings it was submitted with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobSummary {
    pub id: JobId,
    pub function: DeviceFunction,
    pub settings: BTreeMap<String, SettingValue>,
    pub status: JobStatus,
}

/// `device.event` payload.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceEventPayload {
    pub event: DeviceEvent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub job: Option<JobSummary>,
}

/// `device.state` payload.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceStatePayload {
    pub state: DeviceState,
}

/// `error` payload.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorPayload {
    pub code: ErrorCode,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// The line is not JSON or not an envelope.
    Parse,
    /// The envelope is well formed but its payload is not.
    Payload,
    /// A server-only type was sent, or input arrived before `session.start`.
    Unexpected,
    /// Reading or writing the profile failed.
    Profile,
}
