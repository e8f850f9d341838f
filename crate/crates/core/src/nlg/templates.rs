//! Response template file: cue lexicon plus one template per
//! (action kind, variant).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::dialog::ActionKind;
use crate::error::ManifestError;
use crate::nlu::ActKind;

pub const BUILTIN_TEMPLATES: &str = include_str!("../../data/templates.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CuePlacement {
    /// Played before the segment text.
    Pre,
    /// Played after the segment text.
    Post,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CueSpec {
    pub meaning: String,
    pub placement: CuePlacement,
}

/// What the agent listens for after a template is spoken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectSpec {
    YesNo,
    /// The slot named by the action.
    Slot,
    Outcome,
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentTemplate {
    pub text: String,
    /// Emit only when this flag is set or this variable is non-empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cue: Option<String>,
}

/// An act the rendered text must parse back into.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MirrorSpec {
    pub kind: ActKind,
    /// Slot -> value; both sides may hold `{var}` placeholders, `*` matches any value.
    #[serde(default)]
    pub slots: BTreeMap<String, String>,
    /// Expand to one Inform per setting in this list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub each: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Template {
    pub id: String,
    pub action: ActionKind,
    pub variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expects: Option<ExpectSpec>,
    #[serde(default)]
    pub continuation: bool,
    pub segments: Vec<SegmentTemplate>,
    pub mirror: Vec<MirrorSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateSet {
    pub version: u32,
    pub max_segment_chars: usize,
    pub cues: BTreeMap<String, CueSpec>,
    pub templates: Vec<Template>,
}

/// Variables a template may reference.
pub const KNOWN_VARS: &[&str] = &[
    "ack", "action_lc", "address", "alternative", "body", "candidate", "check", "choices", "copies", "defaults",
    "destination", "destination_label", "detail", "fault_detail", "fault_name", "first_function", "first_known",
    "first_known_name", "function", "function_article", "function_choices", "function_title", "functions", "goal",
    "instruction", "instruction_lc", "items", "job", "location", "number", "number_spoken", "part", "part_name",
    "percent", "range", "related", "segment_text", "segment_title", "settings_text", "slot", "slot_description",
    "slot_label", "stage", "suggestion", "suggestion_id", "summary", "topic", "topic_title", "verify",
];

/// Boolean flags usable in `when`.
pub const KNOWN_FLAGS: &[&str] = &["no_function", "reask", "returning", "running_jobs", "several", "single", "still"];

/// Setting lists usable in a mirror `each`.
pub const KNOWN_LISTS: &[&str] = &["ack", "candidate", "items", "settings"];

/// Variants the renderer can ask for. AskSlot falls back to `default`.
pub const REQUIRED_VARIANTS: &[(ActionKind, &[&str])] = &[
    (ActionKind::AskSlot, &["default"]),
    (
        ActionKind::OfferOptions,
        &[
            "greeting",
            "greeting_tour",
            "functions",
            "optionals",
            "which_function",
            "change",
            "chunk_more",
            "chunk_last",
            "chunk_empty",
        ],
    ),
    (ActionKind::ImplicitConfirm, &["default"]),
    (ActionKind::ExplicitConfirm, &["overlap", "out_of_range", "unattributed"]),
    (ActionKind::FinalConfirm, &["normal", "unusual"]),
    (ActionKind::Execute, &["default"]),
    (
        ActionKind::ReportStatus,
        &["completed_copy", "completed_scan", "completed_fax", "completed_email", "running", "queued", "failed", "idle"],
    ),
    (
        ActionKind::AnswerQuestion,
        &[
            "location",
            "unknown_part",
            "unsupported",
            "inapplicable",
            "defaults_saved",
            "defaults_cleared",
            "defaults_need_setting",
            "cancelled",
            "nothing_to_cancel",
        ],
    ),
    (ActionKind::GiveHelp, &["topic", "suggestions", "general", "procedures"]),
    (ActionKind::WalkthroughStep, &["step", "reexplain", "escalate", "finished", "stopped", "inactive"]),
    (ActionKind::DiagnoseStep, &["offer", "recommend", "fixed", "exhausted", "stopped"]),
    (ActionKind::AnnounceEvent, &["progress", "completed_paper", "completed_digital", "failed", "fault_raised", "fault_cleared"]),
    (ActionKind::Fallback, &["slot", "yes_no", "outcome", "open", "offer_walkthrough"]),
    (ActionKind::InviteDefaults, &["default"]),
    (ActionKind::TourStep, &["offer", "segment", "finished"]),
    (ActionKind::PreviewOutput, &["copy", "scan", "fax", "email"]),
    (ActionKind::Farewell, &["default"]),
];

/// Names inside `{...}` in `text`.
pub(crate) fn placeholders(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        let Some(close) = rest[open..].find('}') else { break };
        out.push(&rest[open + 1..open + close]);
        rest = &rest[open + close + 1..];
    }
    out
}

impl TemplateSet {
    pub fn from_json(text: &str) -> Result<Self, ManifestError> {
        let set: TemplateSet =
            serde_json::from_str(text).map_err(|e| ManifestError::Parse { file: "templates", source: e })?;
        let problems = set.problems();
        if problems.is_empty() {
            Ok(set)
        } else {
            Err(ManifestError::Invalid { file: "templates", problems })
        }
    }

    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_TEMPLATES).expect("built-in templates are valid")
    }

    pub fn find(&self, kind: ActionKind, variant: &str) -> Option<&Template> {
        self.templates.iter().find(|t| t.action == kind && t.variant == variant)
    }

    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.max_segment_chars < 40 {
            out.push("max_segment_chars must be at least 40".to_string());
        }
        let mut ids = BTreeSet::new();
        let mut keys = BTreeSet::new();
        let known = |name: &str| KNOWN_VARS.contains(&name);
        for t in &self.templates {
            if !ids.insert(t.id.as_str()) {
                out.push(format!("duplicate template id `{}`", t.id));
            }
            if !keys.insert((t.action, t.variant.as_str())) {
                out.push(format!("template `{}` repeats {}/{}", t.id, t.action, t.variant));
            }
            if t.segments.is_empty() {
                out.push(format!("template `{}` has no segments", t.id));
            }
            if t.expects == Some(ExpectSpec::Slot) && !matches!(t.action, ActionKind::AskSlot | ActionKind::Fallback) {
                out.push(format!("template `{}` expects a slot but its action names none", t.id));
            }
            if t.mirror.is_empty() {
                out.push(format!("template `{}` has no mirror acts", t.id));
            }
            for s in &t.segments {
                for p in placeholders(&s.text) {
                    if !known(p) {
                        out.push(format!("template `{}` uses unknown variable `{p}`", t.id));
                    }
                }
                if let Some(w) = &s.when {
                    if !known(w) && !KNOWN_FLAGS.contains(&w.as_str()) {
                        out.push(format!("template `{}` has unknown condition `{w}`", t.id));
                    }
                }
                if let Some(c) = &s.cue {
                    if !self.cues.contains_key(c) {
                        out.push(format!("template `{}` uses undeclared cue `{c}`", t.id));
                    }
                }
            }
            for m in &t.mirror {
                if m.kind == ActKind::Unknown {
                    out.push(format!("template `{}` mirrors Unknown", t.id));
                }
                if let Some(each) = &m.each {
                    if !KNOWN_LISTS.contains(&each.as_str()) {
                        out.push(format!("template `{}` mirrors unknown list `{each}`", t.id));
                    }
                }
                for (k, v) in &m.slots {
                    for p in placeholders(k).into_iter().chain(placeholders(v)) {
                        if !known(p) {
                            out.push(format!("template `{}` mirror uses unknown variable `{p}`", t.id));
                        }
                    }
                }
            }
        }
        for (kind, variants) in REQUIRED_VARIANTS {
            for v in *variants {
                if self.find(*kind, v).is_none() {
                    out.push(format!("no template for {kind}/{v}"));
                }
            }
        }
        for cue in ["ack", "error", "job_done", "listening", "warning"] {
            if !self.cues.contains_key(cue) {
                out.push(format!("cue `{cue}` is not declared"));
            }
        }
        out
    }
}
