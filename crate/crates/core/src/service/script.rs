//! Scripted conversations replayed against a fresh engine and simulator.
//!
//! One directive per line, `#` starts a comment:
//!
//! ```text
//! profile: pat
//! start: returning
//! say: I need three copies of the agenda
//! expect_action: AskSlot
//! expect_contains: double-sided
//! device: fault out_of_paper
//! expect_job: {"function": "copy", "quantity": 3}
//! end
//! ```
//!
//! Expectations look at the envelopes produced by the latest `say`, `device`,
//! `start` or `end`, in order: each one binds to the first matching envelope
//! after the previous match. `expect_contains` may also match the envelope the
//! previous expectation matched. `profile` names the profile later starts use; each
//! run gets an empty profile directory of its own.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde_json::{json, Value};

use crate::device::{DeviceCommand, EventKind};
use crate::dialog::ActionKind;
use crate::error::{Error, Result};
use crate::resources::Resources;

use super::config::Config;
use super::envelope::{EnvelopeType, SessionEnvelope};
use super::session::SessionHost;

#[derive(Debug, Clone, PartialEq)]
pub enum Directive {
    Profile(String),
    Start { returning: bool },
    Say(String),
    ExpectAction(ActionKind),
    ExpectContains(String),
    Device(DeviceCommand),
    /// `function` plus any settings the completed job must have.
    ExpectJob(BTreeMap<String, Value>),
    End,
}

impl Directive {
    fn is_expectation(&self) -> bool {
        matches!(self, Directive::ExpectAction(_) | Directive::ExpectContains(_) | Directive::ExpectJob(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptLine {
    pub line: usize,
    pub source: String,
    pub directive: Directive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranscriptScript {
    pub name: String,
    pub lines: Vec<ScriptLine>,
}

impl TranscriptScript {
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let source = raw.trim();
            if source.is_empty() || source.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Script(format!("{name}:{}: {msg}", i + 1));
            let (key, value) = match source.split_once(':') {
                Some((k, v)) => (k.trim(), v.trim()),
                None => (source, ""),
            };
            let directive = match key {
                "start" => match value {
                    "" | "new" => Directive::Start { returning: false },
                    "returning" => Directive::Start { returning: true },
                    other => return Err(err(format!("start takes `new` or `returning`, not `{other}`"))),
                },
                "profile" if !value.is_empty() => Directive::Profile(value.to_string()),
                "say" => Directive::Say(value.to_string()),
                "expect_action" => Directive::ExpectAction(value.parse().map_err(err)?),
                "expect_contains" if !value.is_empty() => Directive::ExpectContains(value.to_string()),
                "device" => Directive::Device(value.parse().map_err(err)?),
                "expect_job" => {
                    let map: BTreeMap<String, Value> =
                        serde_json::from_str(value).map_err(|e| err(format!("expect_job needs a JSON object: {e}")))?;
                    Directive::ExpectJob(map)
                }
                "end" => Directive::End,
                other => return Err(err(format!("unknown directive `{other}`"))),
            };
            lines.push(ScriptLine { line: i + 1, source: source.to_string(), directive });
        }
        if !lines.iter().any(|l| l.directive.is_expectation()) {
            return Err(Error::Script(format!("{name}: no expectations")));
        }
        Ok(TranscriptScript { name: name.to_string(), lines })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&path.display().to_string(), &text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineResult {
    pub line: usize,
    pub source: String,
    pub ok: bool,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptReport {
    pub name: String,
    pub seed: u64,
    pub results: Vec<LineResult>,
    /// Every envelope the session produced, one JSON line each.
    pub envelopes: String,
    /// The engine transcript log.
    pub transcript: String,
}

impl ScriptReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.ok)
    }

    pub fn first_failure(&self) -> Option<&LineResult> {
        self.results.iter().find(|r| !r.ok)
    }
}

impl fmt::Display for ScriptReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ok = self.results.iter().filter(|r| r.ok).count();
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        writeln!(f, "{}: {verdict} ({ok}/{} directives, seed {})", self.name, self.results.len(), self.seed)?;
        for r in &self.results {
            let mark = if r.ok { "ok  " } else { "FAIL" };
            write!(f, "  {mark} {:>3} {}", r.line, r.source)?;
            if let Some(d) = &r.detail {
                write!(f, "\n           {d}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn describe(envelope: &SessionEnvelope) -> String {
    if let Some(agent) = envelope.agent() {
        return format!("agent.response {} \"{}\"", agent.action, agent.response);
    }
    if let Some(event) = envelope.device_event() {
        return format!("device.event {:?} \"{}\"", event.event.kind, event.event.detail);
    }
    format!("{} {}", envelope.kind.as_str(), envelope.payload)
}

fn job_matches(envelope: &SessionEnvelope, want: &BTreeMap<String, Value>) -> bool {
    let Some(event) = envelope.device_event() else { return false };
    let Some(job) = event.job.filter(|_| event.event.kind == EventKind::JobCompleted) else { return false };
    want.iter().all(|(k, v)| match k.as_str() {
        "function" => json!(job.function) == *v,
        slot => job.settings.get(slot).map(|s| json!(s)) == Some(v.clone()),
    })
}

struct Runner {
    host: SessionHost,
    profile: Option<String>,
    log: Vec<SessionEnvelope>,
    window: std::ops::Range<usize>,
    cursor: usize,
    /// The envelope the previous expectation matched, if it is in the window.
    last: Option<usize>,
}

impl Runner {
    fn start(&mut self, returning: bool) {
        let payload = json!({ "returning": returning, "profile": self.profile });
        self.send(SessionEnvelope::client(EnvelopeType::SessionStart, payload));
    }

    fn send(&mut self, envelope: SessionEnvelope) {
        let out = self.host.handle(envelope);
        let start = self.log.len();
        self.log.extend(out);
        self.window = start..self.log.len();
        self.cursor = start;
        self.last = None;
    }

    /// `inclusive` lets the envelope matched by the previous expectation match again.
    fn expect(&mut self, what: &str, inclusive: bool, matches: impl Fn(&SessionEnvelope) -> bool) -> Option<String> {
        let from = match self.last {
            Some(i) if inclusive => i,
            _ => self.cursor,
        };
        let found = (from..self.window.end).find(|&i| matches(&self.log[i]));
        match found {
            Some(i) => {
                self.cursor = i + 1;
                self.last = Some(i);
                None
            }
            None => {
                let actual = self.log[self.cursor..self.window.end]
                    .iter()
                    .find(|e| e.kind != EnvelopeType::DeviceState)
                    .map(describe)
                    .unwrap_or_else(|| "nothing further".to_string());
                Some(format!("expected {what}, received {actual}"))
            }
        }
    }
}

/// Replays `script` against a fresh engine and simulator.
pub fn run_script(script: &TranscriptScript, resources: &Resources, config: &Config) -> ScriptReport {
    let profiles = scratch_dir();
    let config = Config { profile_dir: Some(profiles.clone()), ..config.clone() };
    let mut runner = Runner {
        host: SessionHost::new(resources.clone(), &config, script.name.clone()),
        profile: None,
        log: Vec::new(),
        window: 0..0,
        cursor: 0,
        last: None,
    };
    let mut results = Vec::new();
    for line in &script.lines {
        let needs_start = !runner.host.is_open()
            && matches!(line.directive, Directive::Say(_))
            && !runner.log.iter().any(|e| e.kind == EnvelopeType::AgentResponse);
        if needs_start {
            runner.start(false);
        }
        let detail = match &line.directive {
            Directive::Profile(id) => {
                runner.profile = Some(id.clone());
                None
            }
            Directive::Start { returning } => {
                runner.start(*returning);
                None
            }
            Directive::Say(text) => {
                runner.send(SessionEnvelope::utterance(text));
                None
            }
            Directive::Device(command) => {
                runner.send(SessionEnvelope::client(EnvelopeType::DeviceEvent, json!(command)));
                None
            }
            Directive::End => {
                runner.send(SessionEnvelope::client(EnvelopeType::SessionEnd, Value::Null));
                None
            }
            Directive::ExpectAction(kind) => runner.expect(&format!("agent.response {kind}"), false, |e| {
                e.agent().is_some_and(|a| a.action == *kind)
            }),
            Directive::ExpectContains(needle) => {
                let needle = needle.to_lowercase();
                runner.expect(&format!("a response containing \"{needle}\""), true, |e| {
                    e.agent().is_some_and(|a| a.response.to_string().to_lowercase().contains(&needle))
                })
            }
            Directive::ExpectJob(want) => {
                runner.expect(&format!("a completed job matching {}", json!(want)), false, |e| job_matches(e, want))
            }
        };
        let sent = !line.directive.is_expectation() && !matches!(line.directive, Directive::Profile(_));
        let error = runner.log[runner.window.clone()].iter().find(|e| sent && e.kind == EnvelopeType::Error);
        let detail = detail.or_else(|| error.map(|e| format!("server error: {}", e.payload)));
        results.push(LineResult { line: line.line, source: line.source.clone(), ok: detail.is_none(), detail });
    }
    let _ = std::fs::remove_dir_all(&profiles);
    ScriptReport {
        name: script.name.clone(),
        seed: config.seed,
        results,
        envelopes: runner.log.iter().map(|e| e.to_line() + "\n").collect(),
        transcript: runner.host.engine().transcript_ndjson(),
    }
}

fn scratch_dir() -> std::path::PathBuf {
    static RUNS: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);
    let run = RUNS.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
    std::env::temp_dir().join(format!("mfp-agent-script-{}-{run}", std::process::id()))
}
