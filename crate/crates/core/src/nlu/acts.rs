use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::normalize::Span;
use crate::device::{DeviceFunction, SettingValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActKind {
    Inform,
    RequestTask,
    Question,
    Confirm,
    Deny,
    Cancel,
    Help,
    HowTo,
    WhereIs,
    Describe,
    SetDefault,
    Tour,
    StatusQuery,
    Stop,
    Greeting,
    Unknown,
}

impl ActKind {
    pub const ALL: [ActKind; 16] = [
        ActKind::Inform,
        ActKind::RequestTask,
        ActKind::Question,
        ActKind::Confirm,
        ActKind::Deny,
        ActKind::Cancel,
        ActKind::Help,
        ActKind::HowTo,
        ActKind::WhereIs,
        ActKind::Describe,
        ActKind::SetDefault,
        ActKind::Tour,
        ActKind::StatusQuery,
        ActKind::Stop,
        ActKind::Greeting,
        ActKind::Unknown,
    ];
}

impl fmt::Display for ActKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    #[default]
    Clear,
    Ambiguous,
}

/// One parsed dialog act. Ambiguous matches carry every competing reading on
/// their first act, the chosen reading first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogAct {
    pub kind: ActKind,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub slots: BTreeMap<String, SettingValue>,
    #[serde(default)]
    pub confidence: Confidence,
    pub span: Span,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternatives: Vec<Vec<DialogAct>>,
}

impl DialogAct {
    pub fn new(kind: ActKind, span: Span) -> Self {
        DialogAct { kind, slots: BTreeMap::new(), confidence: Confidence::Clear, span, alternatives: Vec::new() }
    }

    pub fn with(mut self, slot: &str, value: impl Into<SettingValue>) -> Self {
        self.slots.insert(slot.to_string(), value.into());
        self
    }

    pub fn slot(&self, id: &str) -> Option<&SettingValue> {
        self.slots.get(id)
    }

    pub fn is_ambiguous(&self) -> bool {
        self.confidence == Confidence::Ambiguous
    }

    /// Kind and slots only; spans and confidence stripped.
    pub fn shape(&self) -> (ActKind, BTreeMap<String, SettingValue>) {
        (self.kind, self.slots.clone())
    }
}

impl fmt::Display for DialogAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if !self.slots.is_empty() {
            let inner: Vec<String> = self.slots.iter().map(|(k, v)| format!("{k}:{v}")).collect();
            write!(f, "{{{}}}", inner.join(", "))?;
        }
        Ok(())
    }
}

/// A user utterance stamped with its logical turn index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub text: String,
    pub turn: u64,
}

impl Utterance {
    pub fn new(text: impl Into<String>, turn: u64) -> Self {
        Utterance { text: text.into(), turn }
    }
}

/// What kind of answer the agent is currently waiting for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PendingKind {
    /// Yes/no: confirmations and offers.
    YesNo,
    /// Outcome of a walkthrough, tour or troubleshooting step.
    Outcome,
    /// A value for a specific slot.
    Slot,
    /// An open prompt such as "what would you like to do?".
    Open,
}

/// Read-only view of dialog state handed to the parser.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextSummary {
    pub pending: Option<PendingKind>,
    pub expected_slot: Option<String>,
    pub active_function: Option<DeviceFunction>,
}

impl ContextSummary {
    pub fn idle() -> Self {
        ContextSummary::default()
    }

    pub fn yes_no() -> Self {
        ContextSummary { pending: Some(PendingKind::YesNo), ..Default::default() }
    }

    pub fn expecting(slot: &str, function: Option<DeviceFunction>) -> Self {
        ContextSummary {
            pending: Some(PendingKind::Slot),
            expected_slot: Some(slot.to_string()),
            active_function: function,
        }
    }

    pub fn with_function(mut self, function: DeviceFunction) -> Self {
        self.active_function = Some(function);
        self
    }
}

/// When a grammar rule is allowed to fire.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContextFilter {
    Any,
    PendingYesNo,
    PendingOutcome,
    NoPending,
    ExpectingNumber,
    Expecting(String),
}

impl fmt::Display for ContextFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextFilter::Any => f.write_str("any"),
            ContextFilter::PendingYesNo => f.write_str("pending_yes_no"),
            ContextFilter::PendingOutcome => f.write_str("pending_outcome"),
            ContextFilter::NoPending => f.write_str("no_pending"),
            ContextFilter::ExpectingNumber => f.write_str("expecting_number"),
            ContextFilter::Expecting(slot) => write!(f, "expecting:{slot}"),
        }
    }
}

impl FromStr for ContextFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "any" => ContextFilter::Any,
            "pending_yes_no" => ContextFilter::PendingYesNo,
            "pending_outcome" => ContextFilter::PendingOutcome,
            "no_pending" => ContextFilter::NoPending,
            "expecting_number" => ContextFilter::ExpectingNumber,
            _ => match s.strip_prefix("expecting:") {
                Some(slot) if !slot.is_empty() => ContextFilter::Expecting(slot.to_string()),
                _ => return Err(format!("unknown context filter '{s}'")),
            },
        })
    }
}

impl ContextFilter {
    pub fn admits(&self, ctx: &ContextSummary, numeric_expected: bool) -> bool {
        match self {
            ContextFilter::Any => true,
            ContextFilter::PendingYesNo => ctx.pending == Some(PendingKind::YesNo),
            ContextFilter::PendingOutcome => ctx.pending == Some(PendingKind::Outcome),
            ContextFilter::NoPending => matches!(ctx.pending, None | Some(PendingKind::Open)),
            ContextFilter::ExpectingNumber => numeric_expected,
            ContextFilter::Expecting(slot) => ctx.expected_slot.as_deref() == Some(slot.as_str()),
        }
    }
}
