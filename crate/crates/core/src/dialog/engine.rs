//! The dialog manager: applies parsed acts and device events to the dialog
//! state and picks the agent's next actions.

mod apply;
mod events;
mod prompt;

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, MutexGuard};

use serde::{Deserialize, Serialize};

use crate::device::{DeviceCommand, DeviceEvent, DeviceFunction, JobId, SettingValue, Simulator};
use crate::nlg::AgentResponse;
use crate::nlu::{parse_utterance, ContextSummary, PendingKind, Utterance};
use crate::resources::Resources;

use super::action::{Action, ActionKind, AgentAction, Setting};
use super::state::{DialogState, Phase, Question, SlotStatus, Speaker, TaskFrame, Turn, TurnContent};

/// A simulator that one or more sessions drive.
pub type SharedDevice = Arc<Mutex<Simulator>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DialogConfig {
    /// Options named per spoken chunk.
    pub chunk_size: usize,
    /// Copies at or above which a job counts as unusual.
    pub quantity_threshold: u32,
    /// Estimated sheets at or above which a job counts as unusual.
    pub sheet_threshold: u32,
    /// Device ticks run right after a job is submitted.
    pub advance_on_execute: u32,
}

impl Default for DialogConfig {
    fn default() -> Self {
        DialogConfig { chunk_size: 3, quantity_threshold: 100, sheet_threshold: 200, advance_on_execute: 30 }
    }
}

/// One agent action with its rendering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentTurn {
    pub index: u64,
    pub action: AgentAction,
    pub response: AgentResponse,
}

/// What the engine hands back, in delivery order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EngineOutput {
    Event { event: DeviceEvent },
    Response { turn: AgentTurn },
}

impl EngineOutput {
    pub fn response(&self) -> Option<&AgentTurn> {
        match self {
            EngineOutput::Response { turn } => Some(turn),
            EngineOutput::Event { .. } => None,
        }
    }
}

/// Responses only, in order.
pub fn responses(outputs: &[EngineOutput]) -> Vec<&AgentTurn> {
    outputs.iter().filter_map(EngineOutput::response).collect()
}

/// One line of the transcript log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub turn: u64,
    pub speaker: Speaker,
    pub text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub acts: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DefaultsError {
    #[error("there is no setting called `{0}`")]
    UnknownSlot(String),
    #[error("`{value}` is not a valid {slot}")]
    InvalidValue { slot: String, value: SettingValue },
}

pub struct DialogEngine {
    resources: Resources,
    config: DialogConfig,
    device: SharedDevice,
    state: DialogState,
    next_index: u64,
    defaults_dirty: bool,
    /// Per-turn scratch: actions waiting to be rendered.
    queued: Vec<AgentAction>,
    /// Per-turn scratch: device events to hand to the caller.
    events_out: Vec<(usize, DeviceEvent)>,
    /// Per-turn scratch: settings the user supplied this turn.
    acks: Vec<Setting>,
    /// Per-turn scratch: a question or mode step has been emitted.
    prompted: bool,
    /// Per-turn scratch: jobs submitted this turn.
    executed_now: Vec<JobId>,
}

impl DialogEngine {
    /// Engine with its own simulator.
    pub fn new(resources: Resources, config: DialogConfig) -> Self {
        let device = Arc::new(Mutex::new(Simulator::new(resources.manifest.clone())));
        Self::with_device(resources, config, device)
    }

    pub fn with_device(resources: Resources, config: DialogConfig, device: SharedDevice) -> Self {
        let cursor = device.lock().unwrap_or_else(|e| e.into_inner()).events().len();
        let state = DialogState { event_cursor: cursor, ..Default::default() };
        DialogEngine {
            resources,
            config: DialogConfig { chunk_size: config.chunk_size.max(1), ..config },
            device,
            state,
            next_index: 0,
            defaults_dirty: false,
            queued: Vec::new(),
            events_out: Vec::new(),
            acks: Vec::new(),
            prompted: false,
            executed_now: Vec::new(),
        }
    }

    pub fn state(&self) -> &DialogState {
        &self.state
    }

    pub fn config(&self) -> &DialogConfig {
        &self.config
    }

    pub fn resources(&self) -> &Resources {
        &self.resources
    }

    pub fn device(&self) -> &SharedDevice {
        &self.device
    }

    pub fn defaults(&self) -> &BTreeMap<String, SettingValue> {
        &self.state.defaults
    }

    /// True once after the defaults changed; the caller persists them.
    pub fn take_defaults_dirty(&mut self) -> bool {
        std::mem::take(&mut self.defaults_dirty)
    }

    pub(crate) fn lock_device(&self) -> MutexGuard<'_, Simulator> {
        self.device.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Opens the session and greets. On an open session, greets again and changes nothing.
    pub fn start_session(&mut self, defaults: BTreeMap<String, SettingValue>, returning: bool) -> Vec<EngineOutput> {
        if self.state.session_open {
            let defaults = self.defaults_list();
            self.queue(Action::OfferOptions {
                offer: super::action::Offer::Greeting { tour: false, defaults, returning: true },
            });
            return self.finish();
        }
        self.state.session_open = true;
        self.state.defaults_invited = false;
        self.state.invite_pending = None;
        self.state.open_misses = 0;
        self.state.defaults = defaults.into_iter().filter(|(k, v)| self.defaultable(k, v)).collect();
        // Whatever happened while nobody was listening stays in the state but is not announced.
        self.absorb_events();
        let tour = !returning;
        let defaults = self.defaults_list();
        self.queue(Action::OfferOptions { offer: super::action::Offer::Greeting { tour, defaults, returning } });
        self.set_pending(if tour { Question::TourOffer } else { Question::Open });
        self.prompted = true;
        self.finish()
    }

    /// Says goodbye and drops every task that has not reached the device.
    pub fn end_session(&mut self) -> Vec<EngineOutput> {
        if !self.state.session_open {
            return Vec::new();
        }
        self.deliver_events();
        self.close_session();
        self.finish()
    }

    pub(crate) fn close_session(&mut self) {
        let running_jobs = self.state.in_flight.len();
        self.queue(Action::Farewell { running_jobs });
        for i in std::mem::take(&mut self.state.task_stack) {
            self.state.frames[i].phase = Phase::Abandoned;
        }
        self.end_modes();
        self.state.pending_question = None;
        self.state.session_open = false;
        self.prompted = true;
    }

    /// Parses and applies one user utterance.
    pub fn user_turn(&mut self, text: &str) -> Vec<EngineOutput> {
        self.state.session_open = true;
        let index = self.bump();
        let ctx = self.context();
        let acts = parse_utterance(&self.resources.grammar, &Utterance::new(text, index), &ctx);
        self.state.history.push(Turn {
            index,
            speaker: Speaker::User,
            content: TurnContent::User { utterance: Utterance::new(text, index), acts: acts.clone() },
        });
        let before = self.state.pending_question.clone();
        self.deliver_events();
        self.apply(&acts, before);
        if self.state.session_open {
            self.prompt();
        }
        self.finish()
    }

    /// Runs an operator command on the device, then speaks about what happened.
    pub fn device_command(&mut self, command: DeviceCommand) -> Vec<EngineOutput> {
        self.lock_device().execute(command);
        self.poll_device()
    }

    /// Delivers device events that arrived since the last turn.
    pub fn poll_device(&mut self) -> Vec<EngineOutput> {
        if !self.state.session_open {
            return Vec::new();
        }
        self.deliver_events();
        if !self.queued.is_empty() && self.needs_reprompt() {
            self.prompt();
        }
        self.finish()
    }

    /// Stores defaults for future frames; the caller persists them.
    pub fn set_defaults(&mut self, settings: &[Setting]) -> Result<(), DefaultsError> {
        for s in settings {
            let Some(spec) = self.resources.manifest.catalog.option(&s.slot) else {
                return Err(DefaultsError::UnknownSlot(s.slot.clone()));
            };
            if !spec.domain.contains(&s.value) {
                return Err(DefaultsError::InvalidValue { slot: s.slot.clone(), value: s.value.clone() });
            }
        }
        for s in settings {
            self.state.defaults.insert(s.slot.clone(), s.value.clone());
        }
        self.defaults_dirty = true;
        Ok(())
    }

    pub fn clear_defaults(&mut self) {
        self.state.defaults.clear();
        self.defaults_dirty = true;
    }

    /// The whole conversation so far as transcript records.
    pub fn transcript(&self) -> Vec<TranscriptRecord> {
        self.state
            .history
            .iter()
            .map(|t| TranscriptRecord {
                turn: t.index,
                speaker: t.speaker,
                text: t.text(),
                acts: t.acts().iter().map(ToString::to_string).collect(),
                action: match &t.content {
                    TurnContent::Agent { action, .. } => Some(action.kind()),
                    _ => None,
                },
            })
            .collect()
    }

    /// Transcript as newline-delimited JSON.
    pub fn transcript_ndjson(&self) -> String {
        self.transcript()
            .iter()
            .map(|r| serde_json::to_string(r).expect("transcript records serialize") + "\n")
            .collect()
    }

    /// What the parser should expect from the next utterance.
    pub fn context(&self) -> ContextSummary {
        let function = self.state.active_function();
        let pending = if self.state.mode_active() {
            Some(PendingKind::Outcome)
        } else {
            match self.state.pending_question.as_ref().map(|p| &p.question) {
                Some(Question::Slot { slot, .. }) => return ContextSummary::expecting(slot, function),
                Some(q) if q.is_yes_no() => Some(PendingKind::YesNo),
                Some(_) => Some(PendingKind::Open),
                None => None,
            }
        };
        ContextSummary { pending, expected_slot: None, active_function: function }
    }

    fn bump(&mut self) -> u64 {
        let i = self.next_index;
        self.next_index += 1;
        i
    }

    pub(crate) fn queue(&mut self, action: Action) {
        self.queued.push(AgentAction::new(action));
    }

    pub(crate) fn set_pending(&mut self, question: Question) {
        self.state.pending_question = Some(super::state::PendingQuestion { question, misses: 0 });
    }

    /// Attaches acknowledgments, renders, records and returns this turn's output.
    fn finish(&mut self) -> Vec<EngineOutput> {
        let mut actions = std::mem::take(&mut self.queued);
        let acks = std::mem::take(&mut self.acks);
        if !acks.is_empty() {
            let carrier = actions.last().map(|a| a.kind()).filter(|k| {
                matches!(
                    k,
                    ActionKind::AskSlot
                        | ActionKind::OfferOptions
                        | ActionKind::ExplicitConfirm
                        | ActionKind::Fallback
                        | ActionKind::InviteDefaults
                        | ActionKind::FinalConfirm
                )
            });
            if carrier.is_some() {
                actions.last_mut().expect("carrier exists").ack = acks;
            } else {
                let at = actions.len().saturating_sub(1);
                let mut implicit = AgentAction::new(Action::ImplicitConfirm);
                implicit.ack = acks;
                actions.insert(at, implicit);
            }
        }
        let mut events = std::mem::take(&mut self.events_out).into_iter().peekable();
        let mut out = Vec::new();
        for (pos, action) in actions.into_iter().enumerate() {
            while let Some((_, event)) = events.next_if(|(at, _)| *at <= pos) {
                out.push(self.record_event(event));
            }
            let response = self.resources.renderer.render(&action);
            let index = self.bump();
            self.state.history.push(Turn {
                index,
                speaker: Speaker::Agent,
                content: TurnContent::Agent { action: action.clone(), response: response.clone() },
            });
            out.push(EngineOutput::Response { turn: AgentTurn { index, action, response } });
        }
        for (_, event) in events {
            out.push(self.record_event(event));
        }
        self.prompted = false;
        self.executed_now.clear();
        out
    }

    fn record_event(&mut self, event: DeviceEvent) -> EngineOutput {
        let index = self.bump();
        self.state.history.push(Turn {
            index,
            speaker: Speaker::Device,
            content: TurnContent::Device { event: event.clone() },
        });
        EngineOutput::Event { event }
    }

    /// Whether `value` may be stored as a default for `slot`.
    fn defaultable(&self, slot: &str, value: &SettingValue) -> bool {
        self.resources.manifest.catalog.option(slot).is_some_and(|o| o.domain.contains(value))
    }

    /// Defaults in manifest order.
    pub(crate) fn defaults_list(&self) -> Vec<Setting> {
        self.resources
            .manifest
            .catalog
            .options
            .iter()
            .filter_map(|o| self.state.defaults.get(&o.id).map(|v| Setting::new(o.id.clone(), v.clone())))
            .collect()
    }

    /// Creates a frame for `function` with stored defaults filled in and puts it on top.
    pub(crate) fn push_frame(&mut self, function: DeviceFunction, created_at: u64) -> usize {
        let id = self.state.frames.len();
        let mut frame = TaskFrame {
            id,
            function,
            slots: BTreeMap::new(),
            phase: Phase::Eliciting,
            created_at,
            optionals_offered: false,
            confirmed: false,
            job: None,
        };
        for (slot, value) in &self.state.defaults {
            if self.resources.manifest.catalog.option(slot).is_some_and(|o| o.applies_to(function)) {
                frame.set(slot, value.clone(), SlotStatus::Filled);
            }
        }
        if let Some(top) = self.state.top_mut() {
            top.phase = Phase::Suspended;
        }
        self.state.frames.push(frame);
        self.state.task_stack.push(id);
        id
    }

    /// Removes the top frame with `phase` and wakes the frame beneath.
    pub(crate) fn pop_frame(&mut self, phase: Phase) -> Option<usize> {
        let i = self.state.task_stack.pop()?;
        self.state.frames[i].phase = phase;
        if let Some(top) = self.state.top_mut() {
            top.phase = Phase::Eliciting;
        }
        Some(i)
    }

    /// Filled settings of `frame` in manifest order.
    pub(crate) fn frame_settings(&self, frame: usize) -> Vec<Setting> {
        let f = &self.state.frames[frame];
        self.resources
            .manifest
            .catalog
            .options
            .iter()
            .filter_map(|o| f.value(&o.id).map(|v| Setting::new(o.id.clone(), v.clone())))
            .collect()
    }

    pub(crate) fn end_modes(&mut self) {
        self.state.walkthrough_cursor = None;
        self.state.tour_cursor = None;
        self.state.diagnosis = None;
    }
}
