//! One client session: envelopes in, engine calls, envelopes out with gapless seq.

use std::sync::{Arc, Mutex};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::device::{DeviceCommand, Simulator};
use crate::dialog::{DialogEngine, EngineOutput, SharedDevice};
use crate::resources::Resources;

use super::config::Config;
use super::envelope::{
    AgentPayload, DeviceEventPayload, DeviceStatePayload, EnvelopeType, ErrorCode, ErrorPayload, JobSummary,
    SessionEnvelope, StartPayload, UtterancePayload,
};
use super::profile::ProfileStore;

pub struct SessionHost {
    engine: DialogEngine,
    session_id: String,
    seq: u64,
    store: Option<ProfileStore>,
    profile: Option<String>,
    rate_hint: Option<f32>,
    out: Vec<SessionEnvelope>,
}

impl SessionHost {
    /// A session with its own simulated device.
    pub fn new(resources: Resources, config: &Config, session_id: impl Into<String>) -> Self {
        let device = Arc::new(Mutex::new(Simulator::new(resources.manifest.clone())));
        Self::with_device(resources, config, device, session_id)
    }

    pub fn with_device(
        resources: Resources,
        config: &Config,
        device: SharedDevice,
        session_id: impl Into<String>,
    ) -> Self {
        SessionHost {
            engine: DialogEngine::with_device(resources, config.dialog, device),
            session_id: session_id.into(),
            seq: 0,
            store: config.profile_dir.clone().map(ProfileStore::new),
            profile: None,
            rate_hint: None,
            out: Vec::new(),
        }
    }

    pub fn engine(&self) -> &DialogEngine {
        &self.engine
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn is_open(&self) -> bool {
        self.engine.state().session_open
    }

    /// Handles one wire line. Anything unparseable becomes an error envelope.
    pub fn handle_line(&mut self, line: &str) -> Vec<SessionEnvelope> {
        match serde_json::from_str::<SessionEnvelope>(line) {
            Ok(envelope) => self.handle(envelope),
            Err(e) => {
                self.error(ErrorCode::Parse, format!("not an envelope: {e}"));
                self.take()
            }
        }
    }

    pub fn handle(&mut self, envelope: SessionEnvelope) -> Vec<SessionEnvelope> {
        if envelope.rate_hint.is_some() {
            self.rate_hint = envelope.rate_hint;
        }
        match envelope.kind {
            EnvelopeType::SessionStart => self.start(envelope.payload),
            EnvelopeType::SessionEnd => {
                let outputs = self.engine.end_session();
                self.emit_outputs(outputs);
            }
            EnvelopeType::UserUtterance => self.utterance(envelope.payload),
            EnvelopeType::DeviceEvent => self.device(envelope.payload),
            other => {
                self.error(ErrorCode::Unexpected, format!("`{}` is sent by the server only", other.as_str()))
            }
        }
        self.persist();
        self.take()
    }

    /// Runs the device clock and reports anything the session should hear.
    pub fn tick(&mut self, steps: u32) -> Vec<SessionEnvelope> {
        let moved = !self.engine.device().lock().unwrap_or_else(|e| e.into_inner()).advance(steps).is_empty();
        let outputs = self.engine.poll_device();
        let heard = !outputs.is_empty();
        self.emit_outputs(outputs);
        if (moved || heard) && self.is_open() {
            self.device_state();
        }
        self.take()
    }

    fn start(&mut self, payload: Value) {
        let Some(start) = self.payload::<StartPayload>(payload) else { return };
        let mut defaults = Default::default();
        let mut returning = start.returning.unwrap_or(false);
        if let Some(id) = &start.profile {
            if let Some(store) = &self.store {
                match store.path(id) {
                    Ok(_) => {
                        returning = start.returning.unwrap_or(store.exists(id));
                        match store.load(id) {
                            Ok(saved) => defaults = saved,
                            Err(e) => self.error(ErrorCode::Profile, e.to_string()),
                        }
                        self.profile = Some(id.clone());
                    }
                    Err(e) => {
                        self.error(ErrorCode::Payload, e.to_string());
                        return;
                    }
                }
            }
        }
        let outputs = self.engine.start_session(defaults, returning);
        self.emit_outputs(outputs);
        self.device_state();
    }

    fn utterance(&mut self, payload: Value) {
        if !self.is_open() {
            self.error(ErrorCode::Unexpected, "send session.start before speaking".to_string());
            return;
        }
        let Some(u) = self.payload::<UtterancePayload>(payload) else { return };
        let before = self.device_events();
        let outputs = self.engine.user_turn(&u.text);
        self.emit_outputs(outputs);
        if self.device_events() != before {
            self.device_state();
        }
    }

    fn device(&mut self, payload: Value) {
        let Some(command) = self.payload::<DeviceCommand>(payload) else { return };
        let outputs = self.engine.device_command(command);
        self.emit_outputs(outputs);
        self.device_state();
    }

    fn payload<T: DeserializeOwned>(&mut self, payload: Value) -> Option<T> {
        let payload = if payload.is_null() { Value::Object(Default::default()) } else { payload };
        match serde_json::from_value(payload) {
            Ok(v) => Some(v),
            Err(e) => {
                self.error(ErrorCode::Payload, format!("bad payload: {e}"));
                None
            }
        }
    }

    fn persist(&mut self) {
        if !self.engine.take_defaults_dirty() {
            return;
        }
        let (Some(store), Some(id)) = (&self.store, &self.profile) else { return };
        if let Err(e) = store.save(id, self.engine.defaults()) {
            self.error(ErrorCode::Profile, e.to_string());
        }
    }

    fn emit(&mut self, kind: EnvelopeType, payload: impl Serialize) {
        self.seq += 1;
        let rate_hint = if kind == EnvelopeType::AgentResponse { self.rate_hint } else { None };
        self.out.push(SessionEnvelope {
            kind,
            session_id: self.session_id.clone(),
            seq: self.seq,
            payload: serde_json::to_value(payload).expect("payloads serialize"),
            rate_hint,
        });
    }

    fn error(&mut self, code: ErrorCode, message: String) {
        self.emit(EnvelopeType::Error, ErrorPayload { code, message });
    }

    fn device_events(&self) -> usize {
        self.engine.device().lock().unwrap_or_else(|e| e.into_inner()).events().len()
    }

    fn device_state(&mut self) {
        let state = self.engine.device().lock().unwrap_or_else(|e| e.into_inner()).state().clone();
        self.emit(EnvelopeType::DeviceState, DeviceStatePayload { state });
    }

    fn emit_outputs(&mut self, outputs: Vec<EngineOutput>) {
        for output in outputs {
            match output {
                EngineOutput::Event { event } => {
                    let job = event.job_id.and_then(|id| {
                        let device = self.engine.device().lock().unwrap_or_else(|e| e.into_inner());
                        device.job(id).map(|j| JobSummary {
                            id,
                            function: j.request.function,
                            settings: j.request.settings.clone(),
                            status: j.status,
                        })
                    });
                    self.emit(EnvelopeType::DeviceEvent, DeviceEventPayload { event, job });
                }
                EngineOutput::Response { turn } => {
                    let payload = AgentPayload {
                        turn: turn.index,
                        action: turn.action.kind(),
                        ack: turn.action.ack.clone(),
                        text: turn.response.text(),
                        response: turn.response,
                    };
                    self.emit(EnvelopeType::AgentResponse, payload);
                }
            }
        }
    }

    fn take(&mut self) -> Vec<SessionEnvelope> {
        std::mem::take(&mut self.out)
    }
}
