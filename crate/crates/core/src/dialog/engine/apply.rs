//! Applying one parsed user turn to the dialog state.

use crate::assist::{Description, StepOutcome, WalkStep};
use crate::device::{DeviceFunction, SettingValue, ValueDomain};
use crate::nlg::chunk_options;
use crate::nlu::{classify_ambiguity, ActKind, Ambiguity, DialogAct};
use crate::resources::task_procedure;

use super::super::action::{
    Action, AmbiguityReason, Answer, Diagnose, FallbackAbout, Help, Offer, Setting, TopicRef, Tour,
};
use super::super::state::{PendingQuestion, Phase, Question, SlotStatus};
use super::DialogEngine;

fn has(acts: &[DialogAct], kind: ActKind) -> bool {
    acts.iter().any(|a| a.kind == kind)
}

fn text_slot<'a>(act: &'a DialogAct, slot: &str) -> Option<&'a str> {
    act.slot(slot).and_then(SettingValue::as_text)
}

impl DialogEngine {
    /// `before` is the question that was pending when the utterance was parsed.
    pub(super) fn apply(&mut self, acts: &[DialogAct], before: Option<PendingQuestion>) {
        if acts.iter().all(|a| a.kind == ActKind::Unknown) {
            self.miss();
            return;
        }
        self.state.open_misses = 0;
        if self.state.pending_question == before {
            self.state.pending_question = None;
        }
        let question = before.map(|p| p.question);
        let turn = self.state.history.last().map(|t| t.index).unwrap_or(0);

        if has(acts, ActKind::Cancel) || has(acts, ActKind::Stop) {
            self.cancel_or_stop(has(acts, ActKind::Stop) && !has(acts, ActKind::Cancel), question.as_ref());
            return;
        }

        let (informs, ambiguous) = self.split_informs(acts);
        let requests: Vec<DeviceFunction> = acts
            .iter()
            .filter(|a| a.kind == ActKind::RequestTask)
            .filter_map(|a| text_slot(a, "function"))
            .filter_map(|f| f.parse().ok())
            .collect();
        // "print" next to another function or inside a task names the output, not a new job.
        let requests: Vec<DeviceFunction> = if requests.len() > 1 || self.state.top().is_some() {
            requests.into_iter().filter(|f| *f != DeviceFunction::Print).collect()
        } else {
            requests
        };
        // In "what options are there for scanning" the function is the subject, not a request.
        let asking = acts.iter().any(|a| matches!(a.kind, ActKind::Question | ActKind::HowTo | ActKind::Describe));
        let requests = if asking && informs.is_empty() { Vec::new() } else { requests };

        if self.state.mode_active() {
            if informs.is_empty() && requests.is_empty() && ambiguous.is_none() {
                self.mode_turn(acts);
                self.questions(acts);
                return;
            }
            // The user moved on to a task; leave the helper quietly.
            self.end_modes();
        }

        let mut stored: Vec<Setting> = Vec::new();
        for function in requests {
            if let Some(Question::WhichFunction { settings, .. }) = &question {
                stored = settings.clone();
            }
            self.request_task(function, turn);
        }
        if !stored.is_empty() && self.state.top().is_some() {
            self.apply_settings(stored, SlotStatus::Filled, turn);
        }

        let confirm = has(acts, ActKind::Confirm);
        let deny = has(acts, ActKind::Deny);
        if let Some(q) = &question {
            if (confirm || deny) && q.is_yes_no() {
                self.answer_yes_no(q, confirm && !deny, !informs.is_empty() || ambiguous.is_some());
            }
        }

        if has(acts, ActKind::SetDefault) {
            self.set_default_turn(acts, informs);
        } else if !informs.is_empty() {
            self.apply_settings(informs, SlotStatus::Filled, turn);
        }
        if let Some((candidates, reason, slot)) = ambiguous {
            self.disambiguate(candidates, reason, slot);
        }
        self.questions(acts);
    }

    /// Clear Informs, plus the competing readings of an unclear one.
    #[allow(clippy::type_complexity)]
    fn split_informs(
        &self,
        acts: &[DialogAct],
    ) -> (Vec<Setting>, Option<(Vec<Vec<Setting>>, AmbiguityReason, Option<String>)>) {
        let registry = &self.resources.grammar.registry;
        let catalog = &self.resources.manifest.catalog;
        let settings_of = |act: &DialogAct| -> Vec<Setting> {
            act.slots
                .iter()
                .filter(|(k, _)| catalog.option(k).is_some())
                .map(|(k, v)| Setting::new(k.clone(), v.clone()))
                .collect()
        };
        let ambiguity = classify_ambiguity(acts, registry);
        let Ambiguity::Ambiguous(readings) = ambiguity else {
            let informs = acts.iter().filter(|a| a.kind == ActKind::Inform).flat_map(settings_of).collect();
            return (informs, None);
        };
        let unclear = |a: &DialogAct| {
            !a.alternatives.is_empty()
                || (a.kind == ActKind::Inform
                    && a.slots.iter().any(|(k, v)| registry.slot(k).is_some_and(|d| !d.domain.contains(v))))
        };
        let informs =
            acts.iter().filter(|a| a.kind == ActKind::Inform && !unclear(a)).flat_map(settings_of).collect();
        let slot = acts.iter().find(|a| unclear(a)).and_then(|a| a.slots.keys().next().cloned());
        let candidates: Vec<Vec<Setting>> = readings
            .iter()
            .map(|r| r.iter().filter(|a| a.kind == ActKind::Inform).flat_map(settings_of).collect::<Vec<_>>())
            .filter(|s| !s.is_empty())
            .collect();
        let reason = if acts.iter().any(|a| !a.alternatives.is_empty()) {
            let singles: Vec<&str> = readings
                .iter()
                .filter_map(|r| match r.as_slice() {
                    [a] if a.kind == ActKind::Inform && a.slots.len() == 1 => a.slots.keys().next().map(String::as_str),
                    _ => None,
                })
                .collect();
            let distinct = singles.iter().collect::<std::collections::BTreeSet<_>>().len();
            if singles.len() == readings.len() && distinct == singles.len() {
                AmbiguityReason::Unattributed
            } else {
                AmbiguityReason::Overlap
            }
        } else {
            AmbiguityReason::OutOfRange
        };
        (informs, Some((candidates, reason, slot)))
    }

    fn cancel_or_stop(&mut self, stop: bool, question: Option<&Question>) {
        if self.state.mode_active() {
            self.stop_mode();
            return;
        }
        if stop && matches!(question, Some(Question::Change { .. })) {
            return;
        }
        if stop {
            self.close_session();
            return;
        }
        match self.pop_frame(Phase::Abandoned) {
            Some(i) => {
                let function = self.state.frames[i].function;
                self.queue(Action::AnswerQuestion { answer: Answer::Cancelled { function } });
            }
            None => self.queue(Action::AnswerQuestion { answer: Answer::NothingToCancel }),
        }
    }

    fn stop_mode(&mut self) {
        if let Some(mut cursor) = self.state.walkthrough_cursor.take() {
            let layout = &self.resources.manifest.layout;
            let step = self.resources.knowledge.walkthrough_step(&mut cursor, StepOutcome::Stop, layout);
            self.queue(Action::WalkthroughStep { procedure: cursor.procedure, step });
        } else if self.state.tour_cursor.take().is_some() {
            self.queue(Action::TourStep { tour: Tour::Finished });
        } else if let Some(fault) = self.state.diagnosis.take() {
            self.queue(Action::DiagnoseStep { fault, step: Diagnose::Stopped });
        }
    }

    fn mode_turn(&mut self, acts: &[DialogAct]) {
        let outcome = if has(acts, ActKind::Confirm) {
            StepOutcome::Done
        } else if has(acts, ActKind::Deny) {
            StepOutcome::Stuck
        } else {
            return;
        };
        if let Some(mut cursor) = self.state.walkthrough_cursor.take() {
            let layout = &self.resources.manifest.layout;
            let step = self.resources.knowledge.walkthrough_step(&mut cursor, outcome, layout);
            let open = matches!(step, WalkStep::Step { .. } | WalkStep::Escalate { .. });
            let procedure = cursor.procedure.clone();
            if open {
                self.state.walkthrough_cursor = Some(cursor);
                self.prompted = true;
            }
            self.queue(Action::WalkthroughStep { procedure, step });
        } else if let Some(cursor) = self.state.tour_cursor {
            let next = if outcome == StepOutcome::Done { cursor + 1 } else { cursor };
            self.tour_at(next);
        } else if let Some(fault) = self.state.diagnosis {
            if self.lock_device().state().faults.contains(&fault) {
                self.recommend_next(fault, true);
            } else {
                self.state.diagnosis = None;
                self.queue(Action::DiagnoseStep { fault, step: Diagnose::Fixed });
            }
        }
    }

    pub(super) fn tour_at(&mut self, cursor: usize) {
        match self.resources.knowledge.tour_step(cursor, &self.resources.manifest.layout) {
            Some(segment) => {
                self.state.tour_cursor = Some(cursor);
                self.prompted = true;
                self.queue(Action::TourStep { tour: Tour::Segment { segment } });
            }
            None => {
                self.state.tour_cursor = None;
                self.queue(Action::TourStep { tour: Tour::Finished });
            }
        }
    }

    pub(super) fn start_diagnosis(&mut self, fault: crate::device::FaultCode) {
        self.end_modes();
        self.state.tried_recommendations.clear();
        if self.lock_device().state().faults.contains(&fault) {
            self.state.diagnosis = Some(fault);
            self.recommend_next(fault, false);
        } else {
            self.queue(Action::DiagnoseStep { fault, step: Diagnose::Fixed });
        }
    }

    pub(super) fn recommend_next(&mut self, fault: crate::device::FaultCode, still_faulted: bool) {
        match self.resources.knowledge.diagnose_next(fault, &self.state.tried_recommendations) {
            crate::assist::Diagnosis::Recommend(r) => {
                let recommendation = r.clone();
                self.state.tried_recommendations.insert(recommendation.id.clone());
                let attempt = self.state.tried_recommendations.len();
                self.prompted = true;
                self.queue(Action::DiagnoseStep {
                    fault,
                    step: Diagnose::Recommend { recommendation, attempt, still_faulted },
                });
            }
            crate::assist::Diagnosis::Exhausted => {
                self.state.diagnosis = None;
                self.queue(Action::DiagnoseStep { fault, step: Diagnose::Exhausted });
            }
        }
    }

    pub(super) fn start_walkthrough(&mut self, procedure: &str) {
        self.end_modes();
        match self.resources.knowledge.walkthrough_start(procedure, &self.resources.manifest.layout) {
            Some((cursor, step)) => {
                let procedure = cursor.procedure.clone();
                self.state.walkthrough_cursor = Some(cursor);
                self.prompted = true;
                self.queue(Action::WalkthroughStep { procedure, step });
            }
            None => self.queue(Action::GiveHelp { help: Help::Procedures }),
        }
    }

    fn request_task(&mut self, function: DeviceFunction, turn: u64) {
        if !self.resources.manifest.catalog.supports(function) {
            self.queue(Action::AnswerQuestion { answer: Answer::Unsupported { function } });
            return;
        }
        if self.state.active_function() == Some(function) {
            return;
        }
        self.push_frame(function, turn);
    }

    fn answer_yes_no(&mut self, question: &Question, yes: bool, with_values: bool) {
        match question {
            Question::Optionals { frame } => {
                if yes && !with_values {
                    let function = self.state.frames[*frame].function;
                    self.list_options(Some(function), true);
                }
            }
            Question::FinalConfirm { frame } => {
                if with_values {
                    return;
                }
                if yes {
                    self.execute(*frame);
                } else {
                    let f = &mut self.state.frames[*frame];
                    f.phase = Phase::Eliciting;
                    let function = f.function;
                    self.queue(Action::OfferOptions { offer: Offer::Change { function } });
                    self.set_pending(Question::Change { frame: *frame });
                    self.prompted = true;
                }
            }
            Question::Disambiguate { candidates, reason } => {
                if yes {
                    if let Some(first) = candidates.first() {
                        let turn = self.state.history.last().map(|t| t.index).unwrap_or(0);
                        self.apply_settings(first.clone(), SlotStatus::ExplicitlyConfirmed, turn);
                    }
                } else if !with_values {
                    let rest: Vec<Vec<Setting>> = candidates.iter().skip(1).cloned().collect();
                    let slot = candidates.first().and_then(|c| c.first()).map(|s| s.slot.clone());
                    if rest.is_empty() {
                        self.ask_slot_again(slot);
                    } else {
                        self.disambiguate(rest, *reason, slot);
                    }
                }
            }
            Question::MoreOptions { function, chunks, next } => {
                if yes {
                    self.emit_chunk(*function, chunks.clone(), *next);
                }
            }
            Question::InviteDefaults { settings } => {
                if yes {
                    let settings = settings.clone();
                    self.save_defaults(settings);
                }
            }
            Question::TourOffer => {
                if yes {
                    self.end_modes();
                    self.tour_at(0);
                }
            }
            Question::DiagnoseOffer { fault } => {
                if yes {
                    self.start_diagnosis(*fault);
                }
            }
            Question::WalkthroughOffer { procedure } => {
                if yes {
                    let procedure = procedure.clone();
                    self.start_walkthrough(&procedure);
                }
            }
            Question::Slot { .. } | Question::Change { .. } | Question::WhichFunction { .. } | Question::Open => {}
        }
    }

    fn ask_slot_again(&mut self, slot: Option<String>) {
        let Some(slot) = slot else { return };
        let Some((frame, function)) = self.state.top().map(|f| (f.id, f.function)) else { return };
        if !self.resources.manifest.catalog.option(&slot).is_some_and(|o| o.applies_to(function)) {
            return;
        }
        self.state.frames[frame].unset(&slot);
        self.queue(Action::AskSlot { function, slot: slot.clone(), reask: false });
        self.set_pending(Question::Slot { frame, slot });
        self.prompted = true;
    }

    fn disambiguate(&mut self, candidates: Vec<Vec<Setting>>, reason: AmbiguityReason, slot: Option<String>) {
        if candidates.is_empty() {
            let Some(slot) = slot else { return };
            let Some((frame, function)) = self.state.top().map(|f| (f.id, f.function)) else { return };
            self.queue(Action::AskSlot { function, slot: slot.clone(), reask: true });
            self.set_pending(Question::Slot { frame, slot });
            self.prompted = true;
            return;
        }
        self.queue(Action::ExplicitConfirm { candidates: candidates.clone(), reason });
        self.set_pending(Question::Disambiguate { candidates, reason });
        self.prompted = true;
    }

    /// Fills slots on the top frame, starting one when the function is clear.
    pub(super) fn apply_settings(&mut self, settings: Vec<Setting>, status: SlotStatus, turn: u64) {
        let catalog = self.resources.manifest.catalog.clone();
        if self.state.top().is_none() {
            let candidates: Vec<DeviceFunction> = catalog
                .functions
                .iter()
                .copied()
                .filter(|f| settings.iter().all(|s| catalog.option(&s.slot).is_some_and(|o| o.applies_to(*f))))
                .collect();
            match candidates.as_slice() {
                [only] => {
                    self.push_frame(*only, turn);
                }
                _ => {
                    let candidates = if candidates.is_empty() { catalog.functions.clone() } else { candidates };
                    self.queue(Action::OfferOptions { offer: Offer::WhichFunction { candidates: candidates.clone() } });
                    self.set_pending(Question::WhichFunction { candidates, settings });
                    self.prompted = true;
                    return;
                }
            }
        }
        let frame = *self.state.task_stack.last().expect("a frame is on the stack");
        let function = self.state.frames[frame].function;
        for s in settings {
            let Some(spec) = catalog.option(&s.slot) else { continue };
            if !spec.applies_to(function) {
                self.queue(Action::AnswerQuestion {
                    answer: Answer::Inapplicable { slot: s.slot.clone(), function, functions: spec.functions.clone() },
                });
                continue;
            }
            let f = &mut self.state.frames[frame];
            f.set(&s.slot, s.value.clone(), status);
            f.confirmed = false;
            if f.phase == Phase::Finalizing {
                f.phase = Phase::Eliciting;
            }
            self.acks.retain(|a| a.slot != s.slot);
            self.acks.push(s);
        }
    }

    fn set_default_turn(&mut self, acts: &[DialogAct], informs: Vec<Setting>) {
        let reset = acts.iter().any(|a| a.kind == ActKind::SetDefault && a.slot("reset").is_some());
        if reset {
            self.clear_defaults();
            self.queue(Action::AnswerQuestion { answer: Answer::DefaultsCleared });
            return;
        }
        let settings = if informs.is_empty() {
            self.state.invite_pending.clone().unwrap_or_else(|| {
                self.state.last_job.map(|(i, _)| self.defaultable_settings(i)).unwrap_or_default()
            })
        } else {
            if let Some(function) = self.state.active_function() {
                let applicable: Vec<Setting> = informs
                    .iter()
                    .filter(|s| self.resources.manifest.catalog.option(&s.slot).is_some_and(|o| o.applies_to(function)))
                    .cloned()
                    .collect();
                let turn = self.state.history.last().map(|t| t.index).unwrap_or(0);
                self.apply_settings(applicable, SlotStatus::ExplicitlyConfirmed, turn);
                self.acks.clear();
            }
            informs
        };
        if settings.is_empty() {
            self.queue(Action::AnswerQuestion { answer: Answer::DefaultsNeedSetting });
            self.set_pending(Question::Open);
            self.prompted = true;
        } else {
            self.save_defaults(settings);
        }
    }

    fn save_defaults(&mut self, settings: Vec<Setting>) {
        let settings: Vec<Setting> = settings
            .into_iter()
            .filter(|s| self.resources.manifest.catalog.option(&s.slot).is_some_and(|o| o.domain.contains(&s.value)))
            .collect();
        for s in &settings {
            self.state.defaults.insert(s.slot.clone(), s.value.clone());
        }
        self.state.invite_pending = None;
        self.state.defaults_invited = true;
        self.defaults_dirty = true;
        self.queue(Action::AnswerQuestion { answer: Answer::DefaultsSaved { settings } });
    }

    /// Settings of a frame worth offering as defaults: non-default choices, not per-job values.
    pub(super) fn defaultable_settings(&self, frame: usize) -> Vec<Setting> {
        let catalog = &self.resources.manifest.catalog;
        self.frame_settings(frame)
            .into_iter()
            .filter(|s| {
                catalog.option(&s.slot).is_some_and(|o| {
                    o.id != "quantity"
                        && !matches!(o.domain, ValueDomain::Text { .. })
                        && o.default != s.value
                        && self.state.defaults.get(&o.id) != Some(&s.value)
                })
            })
            .collect()
    }

    /// Chunked list of options for `function`, or of every conversational option.
    pub(super) fn list_options(&mut self, function: Option<DeviceFunction>, optional_only: bool) {
        let catalog = &self.resources.manifest.catalog;
        let frame = self.state.top();
        let labels: Vec<String> = catalog
            .options
            .iter()
            .filter(|o| o.conversational)
            .filter(|o| function.is_none_or(|f| o.applies_to(f)))
            .filter(|o| !optional_only || function.is_none_or(|f| !o.required_for(f)))
            .filter(|o| !optional_only || frame.is_none_or(|fr| !fr.is_set(&o.id)))
            .map(|o| o.label.clone())
            .collect();
        let chunks = chunk_options(&labels, self.config.chunk_size);
        self.emit_chunk(function, chunks, 0);
    }

    pub(super) fn emit_chunk(&mut self, function: Option<DeviceFunction>, chunks: Vec<Vec<String>>, index: usize) {
        let count = chunks.len();
        let items = chunks.get(index).cloned().unwrap_or_default();
        self.queue(Action::OfferOptions { offer: Offer::Chunk { function, items, index, count } });
        if index + 1 < count {
            self.set_pending(Question::MoreOptions { function, chunks, next: index + 1 });
            self.prompted = true;
        }
    }

    /// Questions and requests that do not touch the task frames.
    fn questions(&mut self, acts: &[DialogAct]) {
        for act in acts {
            match act.kind {
                ActKind::WhereIs => self.where_is(text_slot(act, "part").unwrap_or_default()),
                ActKind::Describe => self.describe(text_slot(act, "topic").unwrap_or_default()),
                ActKind::Help => match text_slot(act, "topic") {
                    Some("troubleshooting") => self.troubleshoot(),
                    Some(topic) => self.describe(topic),
                    None => self.queue(Action::GiveHelp { help: Help::General }),
                },
                ActKind::HowTo => match text_slot(act, "procedure") {
                    Some(p) => {
                        let p = p.to_string();
                        self.start_walkthrough(&p)
                    }
                    None => self.queue(Action::GiveHelp { help: Help::Procedures }),
                },
                ActKind::StatusQuery => self.status(),
                ActKind::Tour => {
                    self.end_modes();
                    self.tour_at(0);
                }
                ActKind::Question => {
                    let named = acts
                        .iter()
                        .filter(|a| a.kind == ActKind::RequestTask)
                        .filter_map(|a| text_slot(a, "function"))
                        .find_map(|f| f.parse::<DeviceFunction>().ok());
                    let function = named.or(self.state.active_function());
                    // A chunked list needs its own follow-up question, so a helper mode ends here.
                    self.end_modes();
                    self.list_options(function, false);
                }
                _ => {}
            }
        }
    }

    fn where_is(&mut self, part: &str) {
        let answer = match self.resources.manifest.layout.locate(part) {
            Ok((id, entry)) => {
                Answer::Location { part: id.to_string(), name: entry.name.clone(), location: entry.location.clone() }
            }
            Err(_) => Answer::UnknownPart {
                part: part.to_string(),
                known: self.resources.manifest.layout.iter().map(|(_, e)| e.name.clone()).collect(),
            },
        };
        self.queue(Action::AnswerQuestion { answer });
    }

    fn describe(&mut self, topic: &str) {
        let help = match self.resources.knowledge.describe(topic) {
            Description::Found { topic, related } => Help::Topic {
                id: topic.id.clone(),
                title: topic.title.clone(),
                body: topic.body.clone(),
                related: related.iter().map(|t| t.title.clone()).collect(),
            },
            Description::Suggestions(ids) => Help::Suggestions {
                topics: ids
                    .iter()
                    .filter_map(|id| self.resources.knowledge.topic(id))
                    .map(|t| TopicRef { id: t.id.clone(), title: t.title.clone() })
                    .collect(),
            },
        };
        self.queue(Action::GiveHelp { help });
    }

    fn troubleshoot(&mut self) {
        let faults = self.lock_device().state().faults.clone();
        let preferred = self.state.last_job.and_then(|(_, id)| {
            match self.lock_device().job(id).map(|j| j.status) {
                Some(crate::device::JobStatus::Failed(f)) if faults.contains(&f) => Some(f),
                _ => None,
            }
        });
        match preferred.or_else(|| faults.iter().next().copied()) {
            Some(fault) => self.start_diagnosis(fault),
            None => self.describe("troubleshooting"),
        }
    }

    /// Nothing in the utterance was understood.
    fn miss(&mut self) {
        self.prompted = true;
        if self.state.mode_active() {
            self.state.open_misses += 1;
            let misses = self.state.open_misses;
            self.queue(Action::Fallback { misses, about: FallbackAbout::Outcome });
            return;
        }
        let Some(pending) = self.state.pending_question.as_mut() else {
            self.state.open_misses += 1;
            let misses = self.state.open_misses;
            self.open_fallback(misses);
            return;
        };
        pending.misses += 1;
        let misses = pending.misses;
        let question = pending.question.clone();
        match question {
            Question::Slot { frame, slot } => {
                let function = self.state.frames[frame].function;
                match misses {
                    1 => self.queue(Action::AskSlot { function, slot, reask: true }),
                    2 => self.queue(Action::Fallback { misses, about: FallbackAbout::Slot { function, slot } }),
                    _ => {
                        let procedure = task_procedure(function).to_string();
                        self.queue(Action::Fallback {
                            misses,
                            about: FallbackAbout::OfferWalkthrough { procedure: procedure.clone() },
                        });
                        self.set_pending(Question::WalkthroughOffer { procedure });
                    }
                }
            }
            q if q.is_yes_no() => self.queue(Action::Fallback { misses, about: FallbackAbout::YesNo }),
            _ => self.open_fallback(misses),
        }
    }

    fn open_fallback(&mut self, misses: u32) {
        if misses >= 3 {
            self.queue(Action::GiveHelp { help: Help::General });
            self.state.open_misses = 0;
            if let Some(p) = self.state.pending_question.as_mut() {
                p.misses = 0;
            }
        } else {
            self.queue(Action::Fallback { misses, about: FallbackAbout::Open });
        }
    }
}
