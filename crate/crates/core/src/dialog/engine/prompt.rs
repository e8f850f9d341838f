//! Choosing the question that ends an agent turn.

use crate::device::JobRequest;

use super::super::action::{Action, Diagnose, FallbackAbout, Offer, Tour};
use super::super::state::{Phase, Question};
use super::DialogEngine;

impl DialogEngine {
    /// Ends the turn with the current mode step, the pending question or the
    /// next question for the top task, unless a prompt was already emitted.
    pub(super) fn prompt(&mut self) {
        if self.prompted {
            return;
        }
        self.prompted = true;
        if self.state.mode_active() {
            self.repeat_mode_step();
            return;
        }
        if let Some(pending) = self.state.pending_question.clone() {
            let action = self.question_action(&pending.question);
            self.queue(action);
            return;
        }
        if let Some(frame) = self.state.task_stack.last().copied() {
            self.next_frame_question(frame);
            return;
        }
        match self.state.invite_pending.take() {
            Some(settings) if !self.state.defaults_invited => {
                self.state.defaults_invited = true;
                self.queue(Action::InviteDefaults { settings: settings.clone() });
                self.set_pending(Question::InviteDefaults { settings });
            }
            _ => {
                self.queue(Action::OfferOptions { offer: Offer::Functions });
                self.set_pending(Question::Open);
            }
        }
    }

    fn repeat_mode_step(&mut self) {
        let kb = &self.resources.knowledge;
        if let Some(cursor) = &self.state.walkthrough_cursor {
            let step = kb.walkthrough_current(cursor, &self.resources.manifest.layout);
            let procedure = cursor.procedure.clone();
            self.queue(Action::WalkthroughStep { procedure, step });
        } else if let Some(cursor) = self.state.tour_cursor {
            self.tour_at(cursor);
        } else if let Some(fault) = self.state.diagnosis {
            let recs: Vec<_> = match kb.case(fault) {
                Some(case) => case.recommendations.iter().collect(),
                None => vec![&kb.generic_recommendation],
            };
            let last = recs.into_iter().rfind(|r| self.state.tried_recommendations.contains(&r.id)).cloned();
            match last {
                Some(recommendation) => {
                    let attempt = self.state.tried_recommendations.len();
                    self.queue(Action::DiagnoseStep {
                        fault,
                        step: Diagnose::Recommend { recommendation, attempt, still_faulted: false },
                    });
                }
                None => self.recommend_next(fault, false),
            }
        }
    }

    /// Required slots in manifest order, then the optionals offer once, then the final confirmation.
    fn next_frame_question(&mut self, frame: usize) {
        let catalog = &self.resources.manifest.catalog;
        let f = &self.state.frames[frame];
        let function = f.function;
        if let Some(slot) = catalog.required_slots(function).into_iter().find(|o| !f.is_set(&o.id)) {
            let slot = slot.id.clone();
            self.state.frames[frame].phase = Phase::Eliciting;
            self.queue(Action::AskSlot { function, slot: slot.clone(), reask: false });
            self.set_pending(Question::Slot { frame, slot });
            return;
        }
        if !f.optionals_offered {
            self.state.frames[frame].optionals_offered = true;
            let options = self.optional_suggestions(frame);
            if !options.is_empty() {
                self.queue(Action::OfferOptions { offer: Offer::Optionals { function, options } });
                self.set_pending(Question::Optionals { frame });
                return;
            }
        }
        self.state.frames[frame].phase = Phase::Finalizing;
        let action = self.final_confirm(frame);
        self.queue(action);
        self.set_pending(Question::FinalConfirm { frame });
    }

    /// Unset optional conversational settings to name in the "anything else?" offer.
    fn optional_suggestions(&self, frame: usize) -> Vec<String> {
        let f = &self.state.frames[frame];
        self.resources
            .manifest
            .catalog
            .options
            .iter()
            .filter(|o| o.conversational && o.applies_to(f.function) && !o.required_for(f.function))
            .filter(|o| !f.is_set(&o.id))
            .filter(|o| !matches!(o.domain, crate::device::ValueDomain::Text { .. }))
            .take(self.config.chunk_size)
            .map(|o| o.id.clone())
            .collect()
    }

    fn final_confirm(&self, frame: usize) -> Action {
        let f = &self.state.frames[frame];
        let pages = self.lock_device().state().original_pages;
        let request = JobRequest { function: f.function, settings: f.settings_map(), source_pages: pages };
        let unusual = request.quantity() >= self.config.quantity_threshold
            || request.estimated_sheets() >= self.config.sheet_threshold;
        Action::FinalConfirm { function: f.function, settings: self.frame_settings(frame), unusual }
    }

    /// The action that asks `question` again.
    fn question_action(&self, question: &Question) -> Action {
        match question {
            Question::Slot { frame, slot } => {
                Action::AskSlot { function: self.state.frames[*frame].function, slot: slot.clone(), reask: false }
            }
            Question::Optionals { frame } => Action::OfferOptions {
                offer: Offer::Optionals {
                    function: self.state.frames[*frame].function,
                    options: self.optional_suggestions(*frame),
                },
            },
            Question::FinalConfirm { frame } => self.final_confirm(*frame),
            Question::Disambiguate { candidates, reason } => {
                Action::ExplicitConfirm { candidates: candidates.clone(), reason: *reason }
            }
            Question::MoreOptions { function, chunks, next } => {
                let index = next.saturating_sub(1);
                Action::OfferOptions {
                    offer: Offer::Chunk {
                        function: *function,
                        items: chunks.get(index).cloned().unwrap_or_default(),
                        index,
                        count: chunks.len(),
                    },
                }
            }
            Question::Change { frame } => {
                Action::OfferOptions { offer: Offer::Change { function: self.state.frames[*frame].function } }
            }
            Question::WhichFunction { candidates, .. } => {
                Action::OfferOptions { offer: Offer::WhichFunction { candidates: candidates.clone() } }
            }
            Question::InviteDefaults { settings } => Action::InviteDefaults { settings: settings.clone() },
            Question::TourOffer => Action::TourStep { tour: Tour::Offer },
            Question::DiagnoseOffer { fault } => Action::DiagnoseStep { fault: *fault, step: Diagnose::Offer },
            Question::WalkthroughOffer { procedure } => {
                Action::Fallback { misses: 3, about: FallbackAbout::OfferWalkthrough { procedure: procedure.clone() } }
            }
            Question::Open => Action::OfferOptions { offer: Offer::Functions },
        }
    }
}
