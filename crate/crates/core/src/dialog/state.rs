//! Dialog state: turn history, task frames, the pending question and the
//! helper-mode cursors.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::assist::WalkthroughCursor;
use crate::device::{DeviceEvent, DeviceFunction, FaultCode, JobId, SettingValue};
use crate::nlg::AgentResponse;
use crate::nlu::{DialogAct, Utterance};

use super::action::{AgentAction, AmbiguityReason, Setting};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    User,
    Agent,
    Device,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TurnContent {
    User { utterance: Utterance, acts: Vec<DialogAct> },
    Agent { action: AgentAction, response: AgentResponse },
    Device { event: DeviceEvent },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub index: u64,
    pub speaker: Speaker,
    pub content: TurnContent,
}

impl Turn {
    pub fn text(&self) -> String {
        match &self.content {
            TurnContent::User { utterance, .. } => utterance.text.clone(),
            TurnContent::Agent { response, .. } => response.text(),
            TurnContent::Device { event } => event.detail.clone(),
        }
    }

    pub fn acts(&self) -> &[DialogAct] {
        match &self.content {
            TurnContent::User { acts, .. } => acts,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotStatus {
    Unset,
    Filled,
    ImplicitlyConfirmed,
    ExplicitlyConfirmed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotEntry {
    pub value: SettingValue,
    pub status: SlotStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Eliciting,
    /// Below the top of the stack, waiting for the task above to finish.
    Suspended,
    Finalizing,
    Executing,
    Reporting,
    Done,
    Abandoned,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskFrame {
    pub id: usize,
    pub function: DeviceFunction,
    pub slots: BTreeMap<String, SlotEntry>,
    pub phase: Phase,
    pub created_at: u64,
    /// The "anything else?" offer for optional settings has been made.
    pub optionals_offered: bool,
    /// A FinalConfirm for the current settings was answered Confirm.
    pub confirmed: bool,
    pub job: Option<JobId>,
}

impl TaskFrame {
    pub fn value(&self, slot: &str) -> Option<&SettingValue> {
        self.slots.get(slot).filter(|e| e.status != SlotStatus::Unset).map(|e| &e.value)
    }

    pub fn is_set(&self, slot: &str) -> bool {
        self.value(slot).is_some()
    }

    pub fn set(&mut self, slot: &str, value: SettingValue, status: SlotStatus) {
        self.slots.insert(slot.to_string(), SlotEntry { value, status });
    }

    pub fn unset(&mut self, slot: &str) {
        self.slots.remove(slot);
    }

    /// Filled settings as a slot -> value map.
    pub fn settings_map(&self) -> BTreeMap<String, SettingValue> {
        self.slots
            .iter()
            .filter(|(_, e)| e.status != SlotStatus::Unset)
            .map(|(k, e)| (k.clone(), e.value.clone()))
            .collect()
    }
}

/// What the agent is waiting to hear, outside the helper modes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Question {
    Slot { frame: usize, slot: String },
    /// "Would you like any other options?"
    Optionals { frame: usize },
    FinalConfirm { frame: usize },
    /// Explicit confirmation of an unclear reading; a yes accepts the first candidate.
    Disambiguate { candidates: Vec<Vec<Setting>>, reason: AmbiguityReason },
    /// A chunked list with more chunks to offer.
    MoreOptions { function: Option<DeviceFunction>, chunks: Vec<Vec<String>>, next: usize },
    /// After a Deny at final confirmation: what should change?
    Change { frame: usize },
    WhichFunction { candidates: Vec<DeviceFunction>, settings: Vec<Setting> },
    InviteDefaults { settings: Vec<Setting> },
    TourOffer,
    DiagnoseOffer { fault: FaultCode },
    WalkthroughOffer { procedure: String },
    /// Open prompt: "what would you like to do?"
    Open,
}

impl Question {
    pub fn is_yes_no(&self) -> bool {
        matches!(
            self,
            Question::Optionals { .. }
                | Question::FinalConfirm { .. }
                | Question::Disambiguate { .. }
                | Question::MoreOptions { .. }
                | Question::InviteDefaults { .. }
                | Question::TourOffer
                | Question::DiagnoseOffer { .. }
                | Question::WalkthroughOffer { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingQuestion {
    pub question: Question,
    /// Consecutive turns that did not answer it.
    pub misses: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogState {
    pub history: Vec<Turn>,
    /// Every frame ever created; `task_stack` and `in_flight` index into it.
    pub frames: Vec<TaskFrame>,
    pub task_stack: Vec<usize>,
    /// Frames whose jobs are on the device.
    pub in_flight: Vec<usize>,
    pub pending_question: Option<PendingQuestion>,
    pub defaults: BTreeMap<String, SettingValue>,
    pub tried_recommendations: BTreeSet<String>,
    pub walkthrough_cursor: Option<WalkthroughCursor>,
    pub tour_cursor: Option<usize>,
    pub diagnosis: Option<FaultCode>,
    pub session_open: bool,
    /// Misses while no question is pending.
    pub open_misses: u32,
    /// Position in the device event log up to which events were handled.
    pub event_cursor: usize,
    /// Most recent frame that reached the device, with its job.
    pub last_job: Option<(usize, JobId)>,
    pub defaults_invited: bool,
    /// Job settings to offer as defaults at the next idle prompt.
    pub invite_pending: Option<Vec<Setting>>,
}

impl DialogState {
    pub fn top(&self) -> Option<&TaskFrame> {
        self.task_stack.last().map(|&i| &self.frames[i])
    }

    pub fn top_mut(&mut self) -> Option<&mut TaskFrame> {
        self.task_stack.last().map(|&i| &mut self.frames[i])
    }

    pub fn active_function(&self) -> Option<DeviceFunction> {
        self.top().map(|f| f.function)
    }

    pub fn mode_active(&self) -> bool {
        self.walkthrough_cursor.is_some() || self.tour_cursor.is_some() || self.diagnosis.is_some()
    }

    /// Structural invariants; empty when the state is consistent.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (pos, &i) in self.task_stack.iter().enumerate() {
            let phase = self.frames[i].phase;
            let top = pos + 1 == self.task_stack.len();
            let ok = if top {
                matches!(phase, Phase::Eliciting | Phase::Finalizing)
            } else {
                phase == Phase::Suspended
            };
            if !ok {
                out.push(format!("frame {i} at stack position {pos} is {phase:?}"));
            }
        }
        for &i in &self.in_flight {
            if self.frames[i].phase != Phase::Executing {
                out.push(format!("in-flight frame {i} is {:?}", self.frames[i].phase));
            }
        }
        for f in &self.frames {
            let listed = self.task_stack.contains(&f.id) || self.in_flight.contains(&f.id);
            let terminal = matches!(f.phase, Phase::Done | Phase::Abandoned);
            if listed == terminal {
                out.push(format!("frame {} is {:?} but listed={listed}", f.id, f.phase));
            }
            if f.phase == Phase::Executing && (!f.confirmed || f.job.is_none()) {
                out.push(format!("frame {} executes without confirmation", f.id));
            }
        }
        let modes = [self.walkthrough_cursor.is_some(), self.tour_cursor.is_some(), self.diagnosis.is_some()];
        if modes.iter().filter(|m| **m).count() > 1 {
            out.push("more than one helper mode is active".to_string());
        }
        if self.mode_active() && self.pending_question.is_some() {
            out.push("a question is pending during a helper mode".to_string());
        }
        let mut indices = self.history.iter().map(|t| t.index);
        if let Some(mut prev) = indices.next() {
            for i in indices {
                if i <= prev {
                    out.push(format!("turn index {i} follows {prev}"));
                }
                prev = i;
            }
        }
        out
    }
}
