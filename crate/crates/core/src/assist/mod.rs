//! Knowledge-driven helpers: option descriptions, step-by-step walkthroughs,
//! the device tour and the troubleshooting engine.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::device::{DeviceFunction, DeviceManifest, FaultCode, LayoutMap};
use crate::error::ManifestError;

pub const BUILTIN_KNOWLEDGE: &str = include_str!("../../data/knowledge.json");

/// Describe returns at most this many related topics.
pub const MAX_RELATED: usize = 3;
const MAX_SUGGESTIONS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HelpTopic {
    pub id: String,
    pub title: String,
    pub body: String,
    #[serde(default)]
    pub related: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcedureStep {
    pub instruction: String,
    pub verify: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub part: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Procedure {
    pub id: String,
    pub goal: String,
    pub steps: Vec<ProcedureStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recommendation {
    pub id: String,
    pub action: String,
    pub check: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosticCase {
    pub fault: FaultCode,
    pub recommendations: Vec<Recommendation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TourScript {
    pub intro: String,
    pub closing: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnowledgeBase {
    pub version: u32,
    pub topics: Vec<HelpTopic>,
    pub procedures: Vec<Procedure>,
    pub diagnostics: Vec<DiagnosticCase>,
    pub generic_recommendation: Recommendation,
    pub tour: TourScript,
}

/// Result of [`KnowledgeBase::describe`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Description<'a> {
    Found { topic: &'a HelpTopic, related: Vec<&'a HelpTopic> },
    /// Unknown topic: the closest known topic ids.
    Suggestions(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepOutcome {
    Done,
    Stuck,
    Stop,
}

/// Position inside a procedure. Lives in the dialog state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkthroughCursor {
    pub procedure: String,
    pub step: usize,
    pub stuck: u32,
    pub closed: bool,
}

impl WalkthroughCursor {
    pub fn new(procedure: &str) -> Self {
        WalkthroughCursor { procedure: procedure.to_string(), step: 0, stuck: 0, closed: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WalkStep {
    Step {
        index: usize,
        total: usize,
        instruction: String,
        verify: String,
        /// Where the referenced part is, woven in when re-explaining.
        location: Option<String>,
        reexplain: bool,
    },
    /// The user was stuck on the same step twice.
    Escalate { index: usize, instruction: String, location: Option<String> },
    Finished { goal: String },
    Stopped,
    /// The cursor is already closed or names no procedure.
    Inactive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnosis<'a> {
    Recommend(&'a Recommendation),
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TourSegment {
    pub index: usize,
    pub total: usize,
    pub part: Option<String>,
    pub title: String,
    pub text: String,
}

impl KnowledgeBase {
    pub fn from_json(text: &str, manifest: &DeviceManifest) -> Result<Self, ManifestError> {
        let kb: KnowledgeBase =
            serde_json::from_str(text).map_err(|source| ManifestError::Parse { file: "knowledge", source })?;
        let problems = kb.problems(manifest);
        if problems.is_empty() {
            Ok(kb)
        } else {
            Err(ManifestError::Invalid { file: "knowledge", problems })
        }
    }

    pub fn builtin(manifest: &DeviceManifest) -> Result<Self, ManifestError> {
        Self::from_json(BUILTIN_KNOWLEDGE, manifest)
    }

    pub fn problems(&self, manifest: &DeviceManifest) -> Vec<String> {
        let mut problems = Vec::new();
        let mut ids = BTreeSet::new();
        for t in &self.topics {
            if !ids.insert(t.id.as_str()) {
                problems.push(format!("duplicate topic {}", t.id));
            }
            if t.body.trim().is_empty() {
                problems.push(format!("topic {} has no body", t.id));
            }
        }
        for t in &self.topics {
            for r in &t.related {
                if !ids.contains(r.as_str()) {
                    problems.push(format!("topic {} relates to unknown topic {r}", t.id));
                }
            }
        }
        let required = DeviceFunction::SUPPORTED
            .iter()
            .map(|f| f.as_str().to_string())
            .chain(manifest.catalog.options.iter().filter(|o| o.conversational).map(|o| o.id.clone()));
        for id in required {
            if !ids.contains(id.as_str()) {
                problems.push(format!("no help topic for {id}"));
            }
        }
        let mut procs = BTreeSet::new();
        for p in &self.procedures {
            if !procs.insert(p.id.as_str()) {
                problems.push(format!("duplicate procedure {}", p.id));
            }
            if p.steps.is_empty() {
                problems.push(format!("procedure {} has no steps", p.id));
            }
            for s in &p.steps {
                if let Some(part) = &s.part {
                    if !manifest.layout.contains(part) {
                        problems.push(format!("procedure {} references unknown part {part}", p.id));
                    }
                }
            }
        }
        for code in FaultCode::ALL {
            if !self.diagnostics.iter().any(|d| d.fault == code) {
                problems.push(format!("no diagnostic case for {code}"));
            }
        }
        for d in &self.diagnostics {
            let mut rec_ids = BTreeSet::new();
            for r in &d.recommendations {
                if !rec_ids.insert(r.id.as_str()) {
                    problems.push(format!("diagnostic case {} repeats recommendation {}", d.fault, r.id));
                }
            }
            if d.recommendations.is_empty() {
                problems.push(format!("diagnostic case {} is empty", d.fault));
            }
        }
        problems
    }

    pub fn topic(&self, id: &str) -> Option<&HelpTopic> {
        self.topics.iter().find(|t| t.id == id)
    }

    pub fn procedure(&self, id: &str) -> Option<&Procedure> {
        self.procedures.iter().find(|p| p.id == id)
    }

    pub fn case(&self, fault: FaultCode) -> Option<&DiagnosticCase> {
        self.diagnostics.iter().find(|d| d.fault == fault)
    }

    /// Topic body plus related topics, or nearest-match suggestions on a miss.
    pub fn describe(&self, id: &str) -> Description<'_> {
        let key = id.trim().to_lowercase().replace([' ', '-'], "_");
        if let Some(topic) = self.topic(&key) {
            let related = topic.related.iter().filter_map(|r| self.topic(r)).take(MAX_RELATED).collect();
            return Description::Found { topic, related };
        }
        let mut scored: Vec<(f64, &str)> = self
            .topics
            .iter()
            .map(|t| {
                let by_id = strsim::jaro_winkler(&key, &t.id);
                let by_title = strsim::jaro_winkler(&key.replace('_', " "), &t.title.to_lowercase());
                (by_id.max(by_title), t.id.as_str())
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        Description::Suggestions(scored.into_iter().take(MAX_SUGGESTIONS).map(|(_, id)| id.to_string()).collect())
    }

    fn step_view(&self, proc: &Procedure, index: usize, layout: &LayoutMap, reexplain: bool) -> WalkStep {
        let step = &proc.steps[index];
        WalkStep::Step {
            index,
            total: proc.steps.len(),
            instruction: step.instruction.clone(),
            verify: step.verify.clone(),
            location: if reexplain { self.location(step, layout) } else { None },
            reexplain,
        }
    }

    fn location(&self, step: &ProcedureStep, layout: &LayoutMap) -> Option<String> {
        let part = step.part.as_deref()?;
        layout.locate(part).ok().map(|(_, entry)| entry.location.clone())
    }

    /// Open a walkthrough and return its first step.
    pub fn walkthrough_start(&self, procedure: &str, layout: &LayoutMap) -> Option<(WalkthroughCursor, WalkStep)> {
        let proc = self.procedure(procedure)?;
        Some((WalkthroughCursor::new(&proc.id), self.step_view(proc, 0, layout, false)))
    }

    /// The step the cursor currently points at, without moving it.
    pub fn walkthrough_current(&self, cursor: &WalkthroughCursor, layout: &LayoutMap) -> WalkStep {
        match self.procedure(&cursor.procedure) {
            Some(proc) if !cursor.closed && cursor.step < proc.steps.len() => {
                self.step_view(proc, cursor.step, layout, false)
            }
            _ => WalkStep::Inactive,
        }
    }

    pub fn walkthrough_step(
        &self,
        cursor: &mut WalkthroughCursor,
        outcome: StepOutcome,
        layout: &LayoutMap,
    ) -> WalkStep {
        let Some(proc) = self.procedure(&cursor.procedure) else { return WalkStep::Inactive };
        if cursor.closed {
            return WalkStep::Inactive;
        }
        match outcome {
            StepOutcome::Stop => {
                cursor.closed = true;
                WalkStep::Stopped
            }
            StepOutcome::Done => {
                cursor.step += 1;
                cursor.stuck = 0;
                if cursor.step >= proc.steps.len() {
                    cursor.closed = true;
                    WalkStep::Finished { goal: proc.goal.clone() }
                } else {
                    self.step_view(proc, cursor.step, layout, false)
                }
            }
            StepOutcome::Stuck => {
                cursor.stuck += 1;
                if cursor.stuck >= 2 {
                    let step = &proc.steps[cursor.step];
                    WalkStep::Escalate {
                        index: cursor.step,
                        instruction: step.instruction.clone(),
                        location: self.location(step, layout),
                    }
                } else {
                    self.step_view(proc, cursor.step, layout, true)
                }
            }
        }
    }

    /// First recommendation for `fault` not yet tried.
    pub fn diagnose_next(&self, fault: FaultCode, tried: &BTreeSet<String>) -> Diagnosis<'_> {
        let recs: Vec<&Recommendation> = match self.case(fault) {
            Some(case) => case.recommendations.iter().collect(),
            None => vec![&self.generic_recommendation],
        };
        match recs.into_iter().find(|r| !tried.contains(&r.id)) {
            Some(r) => Diagnosis::Recommend(r),
            None => Diagnosis::Exhausted,
        }
    }

    /// Intro, one segment per layout part in manifest order, closing.
    pub fn tour_segments(&self, layout: &LayoutMap) -> Vec<TourSegment> {
        let total = layout.len() + 2;
        let mut out = vec![TourSegment {
            index: 0,
            total,
            part: None,
            title: "talking to me".to_string(),
            text: self.tour.intro.clone(),
        }];
        for (i, (id, entry)) in layout.iter().enumerate() {
            out.push(TourSegment {
                index: i + 1,
                total,
                part: Some(id.clone()),
                title: entry.name.clone(),
                text: entry.location.clone(),
            });
        }
        out.push(TourSegment {
            index: total - 1,
            total,
            part: None,
            title: "getting help".to_string(),
            text: self.tour.closing.clone(),
        });
        out
    }

    /// Segment at `cursor`, or `None` once the tour is finished.
    pub fn tour_step(&self, cursor: usize, layout: &LayoutMap) -> Option<TourSegment> {
        self.tour_segments(layout).into_iter().nth(cursor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixtures() -> (DeviceManifest, KnowledgeBase) {
        let m = DeviceManifest::builtin();
        let kb = KnowledgeBase::builtin(&m).unwrap();
        (m, kb)
    }

    #[test]
    fn describe_staple_mentions_binding() {
        let (_, kb) = fixtures();
        let Description::Found { topic, related } = kb.describe("staple") else { panic!() };
        assert!(topic.body.contains("stapler"));
        assert!(topic.body.contains("binding"));
        assert!(!related.is_empty() && related.len() <= MAX_RELATED);
    }

    #[test]
    fn describe_sides() {
        let (_, kb) = fixtures();
        let Description::Found { topic, .. } = kb.describe("sides") else { panic!() };
        assert!(topic.body.contains("Single-sided") && topic.body.contains("Double-sided"));
    }

    #[test]
    fn describe_miss_gives_suggestions() {
        let (_, kb) = fixtures();
        let Description::Suggestions(s) = kb.describe("frobnicate") else { panic!() };
        assert_eq!(s.len(), MAX_SUGGESTIONS);
        let Description::Suggestions(s) = kb.describe("stapels") else { panic!() };
        assert_eq!(s[0], "staple");
    }

    #[test]
    fn walkthrough_advances_and_finishes_once() {
        let (m, kb) = fixtures();
        let (mut c, first) = kb.walkthrough_start("load_feeder", &m.layout).unwrap();
        assert!(matches!(first, WalkStep::Step { index: 0, total: 3, .. }));
        assert!(matches!(kb.walkthrough_step(&mut c, StepOutcome::Done, &m.layout), WalkStep::Step { index: 1, .. }));
        assert!(matches!(kb.walkthrough_step(&mut c, StepOutcome::Done, &m.layout), WalkStep::Step { index: 2, .. }));
        assert!(matches!(kb.walkthrough_step(&mut c, StepOutcome::Done, &m.layout), WalkStep::Finished { .. }));
        assert_eq!(kb.walkthrough_step(&mut c, StepOutcome::Done, &m.layout), WalkStep::Inactive);
    }

    #[test]
    fn stuck_reexplains_with_location_without_advancing() {
        let (m, kb) = fixtures();
        let (mut c, _) = kb.walkthrough_start("place_on_glass", &m.layout).unwrap();
        let step = kb.walkthrough_step(&mut c, StepOutcome::Stuck, &m.layout);
        let WalkStep::Step { index, reexplain, location, instruction, .. } = step else { panic!() };
        assert_eq!(index, 0);
        assert!(reexplain);
        assert!(instruction.contains("Lift the lid"));
        assert!(location.unwrap().contains("under the lid"));
        assert_eq!(c.step, 0);
        assert!(matches!(kb.walkthrough_step(&mut c, StepOutcome::Stuck, &m.layout), WalkStep::Escalate { .. }));
    }

    #[test]
    fn stop_closes_cursor() {
        let (m, kb) = fixtures();
        let (mut c, _) = kb.walkthrough_start("load_paper", &m.layout).unwrap();
        assert_eq!(kb.walkthrough_step(&mut c, StepOutcome::Stop, &m.layout), WalkStep::Stopped);
        assert_eq!(kb.walkthrough_current(&c, &m.layout), WalkStep::Inactive);
    }

    #[test]
    fn diagnosis_walks_case_order_then_exhausts() {
        let (_, kb) = fixtures();
        let mut tried = BTreeSet::new();
        let Diagnosis::Recommend(r) = kb.diagnose_next(FaultCode::PaperJam, &tried) else { panic!() };
        assert_eq!(r.id, "open_side_panel");
        assert!(r.action.contains("side panel"));
        tried.insert(r.id.clone());
        let Diagnosis::Recommend(r) = kb.diagnose_next(FaultCode::PaperJam, &tried) else { panic!() };
        assert_eq!(r.id, "check_tray");
        tried.insert(r.id.clone());
        tried.insert("check_output".to_string());
        assert_eq!(kb.diagnose_next(FaultCode::PaperJam, &tried), Diagnosis::Exhausted);
    }

    #[test]
    fn missing_case_falls_back_to_generic() {
        let (_, mut kb) = fixtures();
        kb.diagnostics.retain(|d| d.fault != FaultCode::TonerLow);
        let Diagnosis::Recommend(r) = kb.diagnose_next(FaultCode::TonerLow, &BTreeSet::new()) else { panic!() };
        assert_eq!(r.id, "check_display");
    }

    #[test]
    fn tour_has_parts_plus_two_segments() {
        let (m, kb) = fixtures();
        let segs = kb.tour_segments(&m.layout);
        assert_eq!(segs.len(), m.layout.len() + 2);
        assert!(segs[0].text.contains("agent button"));
        assert_eq!(kb.tour_step(3, &m.layout), kb.tour_step(3, &m.layout));
        assert!(kb.tour_step(segs.len(), &m.layout).is_none());
    }

    #[test]
    fn validation_catches_dangling_references() {
        let (m, mut kb) = fixtures();
        kb.topics[0].related.push("nowhere".into());
        kb.procedures[0].steps[0].part = Some("flux_capacitor".into());
        kb.topics.retain(|t| t.id != "fax");
        let p = kb.problems(&m);
        assert!(p.iter().any(|p| p.contains("unknown topic nowhere")));
        assert!(p.iter().any(|p| p.contains("unknown part flux_capacitor")));
        assert!(p.iter().any(|p| p.contains("no help topic for fax")));
    }
}
