use std::fmt;

use serde::{Deserialize, Serialize};

use crate::assist::{Recommendation, TourSegment, WalkStep};
use crate::device::{DeviceEvent, DeviceFunction, FaultCode, JobId, SettingValue};

/// One slot assignment, in the order it should be spoken.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Setting {
    pub slot: String,
    pub value: SettingValue,
}

impl Setting {
    pub fn new(slot: impl Into<String>, value: impl Into<SettingValue>) -> Self {
        Setting { slot: slot.into(), value: value.into() }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.slot, self.value)
    }
}

/// What the agent does next. `ack` carries values the user just supplied,
/// confirmed implicitly inside this action's prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentAction {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ack: Vec<Setting>,
    pub action: Action,
}

impl AgentAction {
    pub fn new(action: Action) -> Self {
        AgentAction { ack: Vec::new(), action }
    }

    pub fn kind(&self) -> ActionKind {
        self.action.kind()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActionKind {
    AskSlot,
    OfferOptions,
    ImplicitConfirm,
    ExplicitConfirm,
    FinalConfirm,
    Execute,
    ReportStatus,
    AnswerQuestion,
    GiveHelp,
    WalkthroughStep,
    DiagnoseStep,
    AnnounceEvent,
    Fallback,
    InviteDefaults,
    TourStep,
    PreviewOutput,
    Farewell,
}

impl ActionKind {
    pub const ALL: [ActionKind; 17] = [
        ActionKind::AskSlot,
        ActionKind::OfferOptions,
        ActionKind::ImplicitConfirm,
        ActionKind::ExplicitConfirm,
        ActionKind::FinalConfirm,
        ActionKind::Execute,
        ActionKind::ReportStatus,
        ActionKind::AnswerQuestion,
        ActionKind::GiveHelp,
        ActionKind::WalkthroughStep,
        ActionKind::DiagnoseStep,
        ActionKind::AnnounceEvent,
        ActionKind::Fallback,
        ActionKind::InviteDefaults,
        ActionKind::TourStep,
        ActionKind::PreviewOutput,
        ActionKind::Farewell,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ActionKind::AskSlot => "AskSlot",
            ActionKind::OfferOptions => "OfferOptions",
            ActionKind::ImplicitConfirm => "ImplicitConfirm",
            ActionKind::ExplicitConfirm => "ExplicitConfirm",
            ActionKind::FinalConfirm => "FinalConfirm",
            ActionKind::Execute => "Execute",
            ActionKind::ReportStatus => "ReportStatus",
            ActionKind::AnswerQuestion => "AnswerQuestion",
            ActionKind::GiveHelp => "GiveHelp",
            ActionKind::WalkthroughStep => "WalkthroughStep",
            ActionKind::DiagnoseStep => "DiagnoseStep",
            ActionKind::AnnounceEvent => "AnnounceEvent",
            ActionKind::Fallback => "Fallback",
            ActionKind::InviteDefaults => "InviteDefaults",
            ActionKind::TourStep => "TourStep",
            ActionKind::PreviewOutput => "PreviewOutput",
            ActionKind::Farewell => "Farewell",
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ActionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActionKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown action kind '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Action {
    AskSlot {
        function: DeviceFunction,
        slot: String,
        #[serde(default)]
        reask: bool,
    },
    OfferOptions {
        offer: Offer,
    },
    ImplicitConfirm,
    ExplicitConfirm {
        /// Competing readings; a yes accepts the first.
        candidates: Vec<Vec<Setting>>,
        reason: AmbiguityReason,
    },
    FinalConfirm {
        function: DeviceFunction,
        settings: Vec<Setting>,
        /// Resource-heavy job: explicit warning before the yes/no.
        unusual: bool,
    },
    Execute {
        function: DeviceFunction,
        job: JobId,
    },
    ReportStatus {
        report: Report,
    },
    AnswerQuestion {
        answer: Answer,
    },
    GiveHelp {
        help: Help,
    },
    WalkthroughStep {
        procedure: String,
        step: WalkStep,
    },
    DiagnoseStep {
        fault: FaultCode,
        step: Diagnose,
    },
    AnnounceEvent {
        event: DeviceEvent,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        function: Option<DeviceFunction>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        settings: Vec<Setting>,
    },
    Fallback {
        misses: u32,
        about: FallbackAbout,
    },
    InviteDefaults {
        settings: Vec<Setting>,
    },
    TourStep {
        tour: Tour,
    },
    PreviewOutput {
        function: DeviceFunction,
        settings: Vec<Setting>,
    },
    Farewell {
        running_jobs: usize,
    },
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::AskSlot { .. } => ActionKind::AskSlot,
            Action::OfferOptions { .. } => ActionKind::OfferOptions,
            Action::ImplicitConfirm => ActionKind::ImplicitConfirm,
            Action::ExplicitConfirm { .. } => ActionKind::ExplicitConfirm,
            Action::FinalConfirm { .. } => ActionKind::FinalConfirm,
            Action::Execute { .. } => ActionKind::Execute,
            Action::ReportStatus { .. } => ActionKind::ReportStatus,
            Action::AnswerQuestion { .. } => ActionKind::AnswerQuestion,
            Action::GiveHelp { .. } => ActionKind::GiveHelp,
            Action::WalkthroughStep { .. } => ActionKind::WalkthroughStep,
            Action::DiagnoseStep { .. } => ActionKind::DiagnoseStep,
            Action::AnnounceEvent { .. } => ActionKind::AnnounceEvent,
            Action::Fallback { .. } => ActionKind::Fallback,
            Action::InviteDefaults { .. } => ActionKind::InviteDefaults,
            Action::TourStep { .. } => ActionKind::TourStep,
            Action::PreviewOutput { .. } => ActionKind::PreviewOutput,
            Action::Farewell { .. } => ActionKind::Farewell,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Offer {
    /// Session opening: basic functions, help availability, optional tour offer.
    Greeting {
        tour: bool,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        defaults: Vec<Setting>,
        returning: bool,
    },
    /// Idle prompt with nothing on the stack.
    Functions,
    /// "Anything else?" for optional settings of the active task.
    Optionals { function: DeviceFunction, options: Vec<String> },
    /// Settings arrived before a task; which function are they for?
    WhichFunction { candidates: Vec<DeviceFunction> },
    /// After a no at final confirmation: what should change?
    Change { function: DeviceFunction },
    /// One chunk of a longer option list.
    Chunk {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        function: Option<DeviceFunction>,
        items: Vec<String>,
        index: usize,
        count: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmbiguityReason {
    Overlap,
    OutOfRange,
    Unattributed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum Report {
    Completed { function: DeviceFunction, job: JobId, settings: Vec<Setting> },
    Running { function: DeviceFunction, job: JobId, percent: u32 },
    Queued { function: DeviceFunction, job: JobId },
    Failed { function: DeviceFunction, job: JobId, fault: FaultCode, detail: String },
    Idle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Answer {
    Location { part: String, name: String, location: String },
    UnknownPart { part: String, known: Vec<String> },
    Unsupported { function: DeviceFunction },
    Inapplicable { slot: String, function: DeviceFunction, functions: Vec<DeviceFunction> },
    DefaultsSaved { settings: Vec<Setting> },
    DefaultsCleared,
    /// SetDefault without a setting to save.
    DefaultsNeedSetting,
    Cancelled { function: DeviceFunction },
    NothingToCancel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Help {
    Topic { id: String, title: String, body: String, related: Vec<String> },
    /// Unknown topic; the closest known topics.
    Suggestions { topics: Vec<TopicRef> },
    General,
    /// HowTo without a recognizable procedure.
    Procedures,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicRef {
    pub id: String,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Diagnose {
    /// Yes/no offer to troubleshoot a fault.
    Offer,
    Recommend { recommendation: Recommendation, attempt: usize, still_faulted: bool },
    Fixed,
    Exhausted,
    /// The user stopped troubleshooting.
    Stopped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FallbackAbout {
    Slot { function: DeviceFunction, slot: String },
    YesNo,
    Outcome,
    Open,
    /// Third miss: offer a step-by-step walkthrough.
    OfferWalkthrough { procedure: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Tour {
    Offer,
    Segment { segment: TourSegment },
    Finished,
}
