//! Turns an `AgentAction` into spoken segments with sound cues.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assist::WalkStep;
use crate::device::{DeviceFunction, DeviceManifest, EventKind, SettingValue, TextFormat, ValueDomain};
use crate::dialog::{
    Action, ActionKind, AgentAction, AmbiguityReason, Answer, Diagnose, FallbackAbout, Help, Offer, Report,
    Setting, Tour,
};
use crate::nlu::{ActKind, ContextSummary, DialogAct, PendingKind};

use super::templates::{placeholders, CuePlacement, ExpectSpec, Template, TemplateSet};

/// What the agent listens for after speaking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    YesNo,
    Slot(String),
    Outcome,
    Free,
}

impl Expect {
    /// Parser context for the user's reply.
    pub fn context(&self, function: Option<DeviceFunction>) -> ContextSummary {
        let ctx = match self {
            Expect::YesNo => ContextSummary::yes_no(),
            Expect::Slot(slot) => ContextSummary::expecting(slot, function),
            Expect::Outcome => ContextSummary { pending: Some(PendingKind::Outcome), ..Default::default() },
            Expect::Free => ContextSummary { pending: Some(PendingKind::Open), ..Default::default() },
        };
        match function {
            Some(f) => ctx.with_function(f),
            None => ctx,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseSegment {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cue: Option<String>,
    /// The cue plays after the text rather than before it.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub cue_after: bool,
}

/// Rendered output for one action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentResponse {
    pub kind: ActionKind,
    pub template: String,
    pub segments: Vec<ResponseSegment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expects: Option<Expect>,
    /// More of a chunked list follows if the user asks.
    #[serde(default)]
    pub continuation: bool,
}

impl AgentResponse {
    pub fn text(&self) -> String {
        self.segments.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" ")
    }

    pub fn cues(&self) -> Vec<&str> {
        self.segments.iter().filter_map(|s| s.cue.as_deref()).collect()
    }
}

impl fmt::Display for AgentResponse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match &s.cue {
                Some(c) if s.cue_after => write!(f, "{} [cue:{c}]", s.text)?,
                Some(c) => write!(f, "[cue:{c}] {}", s.text)?,
                None => f.write_str(&s.text)?,
            }
        }
        Ok(())
    }
}

/// An act the rendered prompt must parse back into. `None` values match anything.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MirrorAct {
    pub kind: ActKind,
    pub slots: BTreeMap<String, Option<String>>,
}

impl MirrorAct {
    pub fn matched_by(&self, act: &DialogAct) -> bool {
        act.kind == self.kind
            && self.slots.iter().all(|(k, v)| match (act.slot(k), v) {
                (Some(_), None) => true,
                (Some(got), Some(want)) => got.to_string() == *want,
                (None, _) => false,
            })
    }
}

impl fmt::Display for MirrorAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{{", self.kind)?;
        for (i, (k, v)) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}:{}", v.as_deref().unwrap_or("*"))?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Default)]
struct Vars {
    text: BTreeMap<&'static str, String>,
    flags: BTreeSet<&'static str>,
    lists: BTreeMap<&'static str, Vec<Setting>>,
    slot: Option<String>,
    function: Option<DeviceFunction>,
}

impl Vars {
    fn set(&mut self, key: &'static str, value: impl Into<String>) {
        self.text.insert(key, value.into());
    }

    fn flag(&mut self, key: &'static str, on: bool) {
        if on {
            self.flags.insert(key);
        }
    }

    fn holds(&self, cond: &str) -> bool {
        self.flags.contains(cond) || self.text.get(cond).is_some_and(|v| !v.is_empty())
    }

    fn fill(&self, text: &str) -> String {
        let mut out = text.to_string();
        for p in placeholders(text) {
            let value = self.text.get(p).map(String::as_str).unwrap_or("");
            out = out.replace(&format!("{{{p}}}"), value);
        }
        out
    }
}

/// Template-based realizer bound to one device manifest.
#[derive(Debug, Clone)]
pub struct Renderer {
    templates: TemplateSet,
    manifest: Arc<DeviceManifest>,
}

impl Renderer {
    pub fn new(templates: TemplateSet, manifest: Arc<DeviceManifest>) -> Self {
        Renderer { templates, manifest }
    }

    pub fn builtin(manifest: Arc<DeviceManifest>) -> Self {
        Self::new(TemplateSet::builtin(), manifest)
    }

    pub fn templates(&self) -> &TemplateSet {
        &self.templates
    }

    pub fn render(&self, action: &AgentAction) -> AgentResponse {
        let (template, vars) = self.plan(action);
        let mut segments = Vec::new();
        if !action.ack.is_empty() && action.kind() != ActionKind::ImplicitConfirm {
            // The summary already names every value, so a bare acknowledgment keeps each mention unique.
            let text = if action.kind() == ActionKind::FinalConfirm {
                "Got it.".to_string()
            } else {
                format!("OK, {}.", self.labels(&action.ack).join(", "))
            };
            segments.push(ResponseSegment { text, cue: Some("ack".to_string()), cue_after: false });
        }
        for s in &template.segments {
            if s.when.as_deref().is_some_and(|w| !vars.holds(w)) {
                continue;
            }
            let text = vars.fill(&s.text);
            let text = text.split_whitespace().collect::<Vec<_>>().join(" ");
            if text.is_empty() {
                continue;
            }
            let pieces = split_sentences(&text, self.templates.max_segment_chars);
            let last = pieces.len() - 1;
            let placement = s.cue.as_ref().and_then(|c| self.templates.cues.get(c)).map(|c| c.placement);
            for (i, piece) in pieces.into_iter().enumerate() {
                let cue_here = match placement {
                    Some(CuePlacement::Pre) => i == 0,
                    Some(CuePlacement::Post) => i == last,
                    None => false,
                };
                segments.push(ResponseSegment {
                    text: piece,
                    cue: s.cue.clone().filter(|_| cue_here),
                    cue_after: cue_here && placement == Some(CuePlacement::Post),
                });
            }
        }
        let expects = template.expects.map(|e| match e {
            ExpectSpec::YesNo => Expect::YesNo,
            ExpectSpec::Slot => Expect::Slot(vars.slot.clone().unwrap_or_default()),
            ExpectSpec::Outcome => Expect::Outcome,
            ExpectSpec::Free => Expect::Free,
        });
        AgentResponse {
            kind: action.kind(),
            template: template.id.clone(),
            segments,
            expects,
            continuation: template.continuation,
        }
    }

    /// Acts the rendered text for `action` must parse back into, acknowledgments included.
    pub fn mirror(&self, action: &AgentAction) -> Vec<MirrorAct> {
        let (template, vars) = self.plan(action);
        let mut out: Vec<MirrorAct> = if action.kind() == ActionKind::FinalConfirm {
            Vec::new()
        } else {
            action.ack.iter().map(inform).collect()
        };
        for m in &template.mirror {
            if m.when.as_deref().is_some_and(|w| !vars.holds(w)) {
                continue;
            }
            if let Some(each) = &m.each {
                out.extend(vars.lists.get(each.as_str()).into_iter().flatten().map(inform));
                continue;
            }
            let slots = m
                .slots
                .iter()
                .map(|(k, v)| (vars.fill(k), (v != "*").then(|| vars.fill(v))))
                .collect();
            out.push(MirrorAct { kind: m.kind, slots });
        }
        out
    }

    /// Function the rendered prompt is about, if any.
    pub fn function_of(&self, action: &AgentAction) -> Option<DeviceFunction> {
        self.plan(action).1.function
    }

    fn template(&self, kind: ActionKind, variant: &str) -> &Template {
        self.templates
            .find(kind, variant)
            .or_else(|| self.templates.find(kind, "default"))
            .unwrap_or_else(|| panic!("no template for {kind}/{variant}"))
    }

    fn label(&self, slot: &str, value: &SettingValue) -> String {
        match self.manifest.catalog.option(slot) {
            Some(o) => o.value_label(value),
            None => format!("{} {value}", slot.replace('_', " ")),
        }
    }

    fn labels(&self, settings: &[Setting]) -> Vec<String> {
        settings.iter().map(|s| self.label(&s.slot, &s.value)).collect()
    }

    fn slot_label(&self, slot: &str) -> String {
        self.manifest.catalog.option(slot).map(|o| o.label.clone()).unwrap_or_else(|| slot.replace('_', " "))
    }

    /// Ways to answer a question about `slot`.
    fn choices(&self, slot: &str) -> String {
        let Some(o) = self.manifest.catalog.option(slot) else { return String::new() };
        match &o.domain {
            ValueDomain::Enum { values } => {
                join_or(&values.iter().map(|v| o.value_label(&SettingValue::text(v.as_str()))).collect::<Vec<_>>())
            }
            ValueDomain::Bool => join_or(&[o.value_label(&true.into()), o.value_label(&false.into())]),
            ValueDomain::Range { min, max, .. } if *min < 0 => join_or(&[
                o.value_label(&SettingValue::Int(-1)),
                o.value_label(&SettingValue::Int(0)),
                o.value_label(&SettingValue::Int(2.min(*max))),
            ]),
            ValueDomain::Range { min, max, .. } => format!("a number from {min} to {max}"),
            ValueDomain::Text { format: TextFormat::Phone } => "the digits, like 5 5 5 0 1 0 0".to_string(),
            ValueDomain::Text { format: TextFormat::Email } => "an address like pat at example dot com".to_string(),
            ValueDomain::Text { format: TextFormat::Free } => "any text".to_string(),
        }
    }

    fn range(&self, slot: &str) -> String {
        match self.manifest.catalog.option(slot).map(|o| &o.domain) {
            Some(ValueDomain::Range { min, max, .. }) if *min < 0 => format!("minus {} to plus {max}", -min),
            Some(ValueDomain::Range { min, max, .. }) => format!("{min} to {max}"),
            _ => String::new(),
        }
    }

    /// Non-default value to suggest for an optional setting.
    fn suggestion(&self, slot: &str) -> Option<Setting> {
        let o = self.manifest.catalog.option(slot)?;
        let value = match &o.domain {
            ValueDomain::Enum { values } => {
                values.iter().map(|v| SettingValue::text(v.as_str())).find(|v| *v != o.default)?
            }
            ValueDomain::Bool => SettingValue::Bool(!o.default.as_bool()?),
            ValueDomain::Range { min, max, .. } => {
                let d = o.default.as_int()?;
                SettingValue::Int(if d < *max { d + 1 } else { *min })
            }
            ValueDomain::Text { .. } => return None,
        };
        Some(Setting::new(slot, value))
    }

    fn set_function(&self, vars: &mut Vars, f: DeviceFunction) {
        vars.function = Some(f);
        vars.set("function", f.as_str());
        vars.set("function_article", article(f));
        vars.set("function_title", capitalize(f.as_str()));
    }

    fn set_outputs(&self, vars: &mut Vars, settings: &[Setting]) {
        let get = |slot: &str| settings.iter().find(|s| s.slot == slot).map(|s| &s.value);
        let n = get("quantity").and_then(SettingValue::as_int).unwrap_or(1);
        let double = get("sides").and_then(SettingValue::as_text) == Some("double");
        let noun = if n == 1 { "copy" } else { "copies" };
        vars.set("copies", format!("{n} {}{noun}", if double { "double-sided " } else { "" }));
        if let Some(v) = get("destination") {
            vars.set("destination", v.to_string());
            vars.set("destination_label", self.label("destination", v));
        }
        if let Some(v) = get("destination_number") {
            let digits: String = v.to_string().chars().filter(char::is_ascii_digit).collect();
            let spoken: Vec<String> = digits.chars().map(String::from).collect();
            vars.set("number_spoken", spoken.join(" "));
            vars.set("number", digits);
        }
        if let Some(v) = get("destination_address") {
            vars.set("address", v.to_string());
        }
    }

    fn fault_name(&self, fault: crate::device::FaultCode) -> (String, String) {
        match self.manifest.fault(fault) {
            Some(f) => (f.name.clone(), f.detail.clone()),
            None => (fault.as_str().replace('_', " "), String::new()),
        }
    }

    fn plan(&self, action: &AgentAction) -> (&Template, Vars) {
        let mut vars = Vars::default();
        vars.set("ack", join_list(&self.labels(&action.ack)));
        vars.lists.insert("ack", action.ack.clone());
        let variant: String = match &action.action {
            Action::AskSlot { function, slot, reask } => {
                self.set_function(&mut vars, *function);
                self.set_slot(&mut vars, slot);
                vars.flag("reask", *reask);
                slot.clone()
            }
            Action::OfferOptions { offer } => match offer {
                Offer::Greeting { tour, defaults, returning } => {
                    vars.set("defaults", join_list(&self.labels(defaults)));
                    vars.flag("returning", *returning);
                    if *tour { "greeting_tour" } else { "greeting" }.into()
                }
                Offer::Functions => "functions".into(),
                Offer::Optionals { function, options } => {
                    self.set_function(&mut vars, *function);
                    let items: Vec<Setting> = options.iter().filter_map(|o| self.suggestion(o)).collect();
                    vars.set("items", join_or(&self.labels(&items)));
                    vars.lists.insert("items", items);
                    "optionals".into()
                }
                Offer::WhichFunction { candidates } => {
                    vars.set("function_choices", join_or(&candidates.iter().map(|f| article(*f)).collect::<Vec<_>>()));
                    if let Some(f) = candidates.first() {
                        vars.set("first_function", f.as_str());
                    }
                    "which_function".into()
                }
                Offer::Change { function } => {
                    self.set_function(&mut vars, *function);
                    "change".into()
                }
                Offer::Chunk { function, items, index, count } => {
                    match function {
                        Some(f) => self.set_function(&mut vars, *f),
                        None => vars.flag("no_function", true),
                    }
                    vars.set("items", join_list(items));
                    vars.flag("single", *count == 1 && items.len() == 1);
                    vars.flag("several", !(*count == 1 && items.len() == 1));
                    if *count == 0 || items.is_empty() {
                        "chunk_empty".into()
                    } else if index + 1 < *count {
                        "chunk_more".into()
                    } else {
                        "chunk_last".into()
                    }
                }
            },
            Action::ImplicitConfirm => "default".into(),
            Action::ExplicitConfirm { candidates, reason } => {
                let first = candidates.first().cloned().unwrap_or_default();
                vars.set("candidate", self.labels(&first).join(" and "));
                if let Some(alt) = candidates.get(1) {
                    vars.set("alternative", self.labels(alt).join(" and "));
                }
                if let Some(s) = first.first() {
                    self.set_slot(&mut vars, &s.slot);
                    vars.set("range", self.range(&s.slot));
                }
                vars.lists.insert("candidate", first);
                vars.flag("single", candidates.len() == 1);
                match reason {
                    AmbiguityReason::Overlap if candidates.len() > 1 => "overlap",
                    AmbiguityReason::OutOfRange => "out_of_range",
                    _ => "unattributed",
                }
                .into()
            }
            Action::FinalConfirm { function, settings, unusual } => {
                self.set_function(&mut vars, *function);
                vars.set("summary", self.labels(settings).join(", "));
                vars.lists.insert("settings", settings.clone());
                if *unusual { "unusual" } else { "normal" }.into()
            }
            Action::Execute { function, job } => {
                self.set_function(&mut vars, *function);
                vars.set("job", job.to_string());
                "default".into()
            }
            Action::PreviewOutput { function, settings } => {
                self.set_function(&mut vars, *function);
                self.set_outputs(&mut vars, settings);
                function.as_str().into()
            }
            Action::ReportStatus { report } => match report {
                Report::Completed { function, job, settings } => {
                    self.set_function(&mut vars, *function);
                    vars.set("job", job.to_string());
                    self.set_outputs(&mut vars, settings);
                    format!("completed_{function}")
                }
                Report::Running { function, job, percent } => {
                    self.set_function(&mut vars, *function);
                    vars.set("job", job.to_string());
                    vars.set("percent", percent.to_string());
                    "running".into()
                }
                Report::Queued { function, job } => {
                    self.set_function(&mut vars, *function);
                    vars.set("job", job.to_string());
                    "queued".into()
                }
                Report::Failed { function, job, fault, detail } => {
                    self.set_function(&mut vars, *function);
                    vars.set("job", job.to_string());
                    let (name, _) = self.fault_name(*fault);
                    vars.set("fault_name", name);
                    vars.set("detail", detail.clone());
                    "failed".into()
                }
                Report::Idle => "idle".into(),
            },
            Action::AnswerQuestion { answer } => match answer {
                Answer::Location { part, name, location } => {
                    vars.set("part", part.clone());
                    vars.set("part_name", name.clone());
                    vars.set("location", location.clone());
                    "location".into()
                }
                Answer::UnknownPart { part, known } => {
                    vars.set("part", part.clone());
                    if let Some(name) = known.first() {
                        vars.set("first_known_name", name.clone());
                        if let Ok((id, _)) = self.manifest.layout.locate(name) {
                            vars.set("first_known", id);
                        }
                    }
                    "unknown_part".into()
                }
                Answer::Unsupported { function } => {
                    vars.set("function", function.as_str());
                    "unsupported".into()
                }
                Answer::Inapplicable { slot, function, functions } => {
                    self.set_function(&mut vars, *function);
                    self.set_slot(&mut vars, slot);
                    vars.set("functions", join_or(&functions.iter().map(|f| f.as_str().to_string()).collect::<Vec<_>>()));
                    "inapplicable".into()
                }
                Answer::DefaultsSaved { settings } => {
                    vars.set("settings_text", join_list(&self.labels(settings)));
                    vars.lists.insert("settings", settings.clone());
                    "defaults_saved".into()
                }
                Answer::DefaultsCleared => "defaults_cleared".into(),
                Answer::DefaultsNeedSetting => "defaults_need_setting".into(),
                Answer::Cancelled { function } => {
                    self.set_function(&mut vars, *function);
                    "cancelled".into()
                }
                Answer::NothingToCancel => "nothing_to_cancel".into(),
            },
            Action::GiveHelp { help } => match help {
                Help::Topic { id, title, body, related } => {
                    vars.set("topic", id.clone());
                    vars.set("topic_title", title.clone());
                    vars.set("body", body.clone());
                    vars.set("related", join_or(related));
                    "topic".into()
                }
                Help::Suggestions { topics } => {
                    if let Some(t) = topics.first() {
                        vars.set("suggestion", t.title.clone());
                        vars.set("suggestion_id", t.id.clone());
                    }
                    if topics.is_empty() { "general" } else { "suggestions" }.into()
                }
                Help::General => "general".into(),
                Help::Procedures => "procedures".into(),
            },
            Action::WalkthroughStep { step, .. } => match step {
                WalkStep::Step { index, total, instruction, verify, location, reexplain } => {
                    vars.set("stage", stage(*index, *total));
                    vars.set("instruction", instruction.clone());
                    vars.set("instruction_lc", lower_first(instruction));
                    vars.set("verify", verify.clone());
                    vars.set("location", location.clone().unwrap_or_default());
                    if *reexplain { "reexplain" } else { "step" }.into()
                }
                WalkStep::Escalate { instruction, location, .. } => {
                    vars.set("instruction", instruction.clone());
                    vars.set("location", location.clone().unwrap_or_default());
                    "escalate".into()
                }
                WalkStep::Finished { goal } => {
                    vars.set("goal", goal.clone());
                    "finished".into()
                }
                WalkStep::Stopped => "stopped".into(),
                WalkStep::Inactive => "inactive".into(),
            },
            Action::DiagnoseStep { fault, step } => {
                let (name, detail) = self.fault_name(*fault);
                vars.set("fault_name", name);
                vars.set("fault_detail", detail);
                match step {
                    Diagnose::Offer => "offer".into(),
                    Diagnose::Recommend { recommendation, attempt, still_faulted } => {
                        vars.set("stage", if *attempt <= 1 { "First" } else { "Next" });
                        vars.set("action_lc", lower_first(&recommendation.action));
                        vars.set("check", recommendation.check.clone());
                        vars.flag("still", *still_faulted);
                        "recommend".into()
                    }
                    Diagnose::Fixed => "fixed".into(),
                    Diagnose::Exhausted => "exhausted".into(),
                    Diagnose::Stopped => "stopped".into(),
                }
            }
            Action::AnnounceEvent { event, function, settings } => {
                match function {
                    Some(f) => self.set_function(&mut vars, *f),
                    None => vars.set("function", "current"),
                }
                self.set_outputs(&mut vars, settings);
                vars.set("detail", event.detail.clone());
                if let Some(fault) = event.fault {
                    let (name, detail) = self.fault_name(fault);
                    vars.set("fault_name", name);
                    vars.set("fault_detail", detail);
                } else {
                    vars.set("fault_detail", event.detail.clone());
                }
                match event.kind {
                    EventKind::JobStarted | EventKind::JobProgress => "progress",
                    EventKind::JobCompleted if function.is_none_or(|f| f.uses_paper()) => "completed_paper",
                    EventKind::JobCompleted => "completed_digital",
                    EventKind::JobFailed => "failed",
                    EventKind::FaultRaised => "fault_raised",
                    EventKind::FaultCleared => "fault_cleared",
                }
                .into()
            }
            Action::Fallback { about, .. } => match about {
                FallbackAbout::Slot { function, slot } => {
                    self.set_function(&mut vars, *function);
                    self.set_slot(&mut vars, slot);
                    "slot".into()
                }
                FallbackAbout::YesNo => "yes_no".into(),
                FallbackAbout::Outcome => "outcome".into(),
                FallbackAbout::Open => "open".into(),
                FallbackAbout::OfferWalkthrough { .. } => "offer_walkthrough".into(),
            },
            Action::InviteDefaults { settings } => {
                let owner = settings.first().and_then(|s| self.manifest.catalog.option(&s.slot));
                if let Some(f) = owner.and_then(|o| o.functions.first()) {
                    self.set_function(&mut vars, *f);
                }
                vars.set("settings_text", join_list(&self.labels(settings)));
                vars.lists.insert("settings", settings.clone());
                "default".into()
            }
            Action::TourStep { tour } => match tour {
                Tour::Offer => "offer".into(),
                Tour::Segment { segment } => {
                    vars.set("stage", stage(segment.index, segment.total));
                    vars.set("segment_title", segment.title.clone());
                    vars.set("segment_text", segment.text.clone());
                    "segment".into()
                }
                Tour::Finished => "finished".into(),
            },
            Action::Farewell { running_jobs } => {
                vars.flag("running_jobs", *running_jobs > 0);
                "default".into()
            }
        };
        (self.template(action.kind(), &variant), vars)
    }

    fn set_slot(&self, vars: &mut Vars, slot: &str) {
        vars.slot = Some(slot.to_string());
        vars.set("slot", slot);
        vars.set("slot_label", self.slot_label(slot));
        vars.set("choices", self.choices(slot));
        if let Some(o) = self.manifest.catalog.option(slot) {
            vars.set("slot_description", o.description.clone());
        }
    }
}

fn inform(s: &Setting) -> MirrorAct {
    MirrorAct { kind: ActKind::Inform, slots: BTreeMap::from([(s.slot.clone(), Some(s.value.to_string()))]) }
}

fn article(f: DeviceFunction) -> String {
    match f {
        DeviceFunction::Email => "an email".to_string(),
        other => format!("a {other}"),
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(first) => first.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn lower_first(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(first) => first.to_lowercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Stage cue for step `index` of `total`.
pub fn stage(index: usize, total: usize) -> &'static str {
    if index == 0 {
        "First"
    } else if index + 1 >= total {
        "Finally"
    } else {
        "Then"
    }
}

/// "a, b and c"
pub fn join_list(items: &[String]) -> String {
    join_with(items, "and")
}

/// "a, b or c"
pub fn join_or(items: &[String]) -> String {
    join_with(items, "or")
}

fn join_with(items: &[String], word: &str) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} {word} {last}", init.join(", ")),
    }
}

/// Splits `text` into pieces of at most `max` chars, at sentence ends where possible.
pub fn split_sentences(text: &str, max: usize) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut start = 0;
    let chars: Vec<char> = text.chars().collect();
    for i in 0..chars.len() {
        let end = matches!(chars[i], '.' | '?' | '!') && chars.get(i + 1).is_none_or(|c| c.is_whitespace());
        if end {
            sentences.push(chars[start..=i].iter().collect::<String>().trim().to_string());
            start = i + 1;
        }
    }
    let tail: String = chars[start..].iter().collect::<String>().trim().to_string();
    if !tail.is_empty() {
        sentences.push(tail);
    }
    let mut out: Vec<String> = Vec::new();
    for s in sentences.into_iter().flat_map(|s| split_words(&s, max)) {
        match out.last_mut() {
            Some(last) if last.chars().count() + 1 + s.chars().count() <= max => {
                last.push(' ');
                last.push_str(&s);
            }
            _ => out.push(s),
        }
    }
    if out.is_empty() {
        out.push(String::new());
    }
    out
}

fn split_words(sentence: &str, max: usize) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for word in sentence.split_whitespace() {
        match out.last_mut() {
            Some(last) if last.chars().count() + 1 + word.chars().count() <= max => {
                last.push(' ');
                last.push_str(word);
            }
            _ => out.push(word.to_string()),
        }
    }
    out
}

/// Splits `items` into chunks of `size`; a list of L items yields ceil(L/size) chunks.
pub fn chunk_options<T: Clone>(items: &[T], size: usize) -> Vec<Vec<T>> {
    items.chunks(size.max(1)).map(<[T]>::to_vec).collect()
}
