//! Device events: frame bookkeeping and announcements.

use std::collections::BTreeSet;

use crate::device::{DeviceEvent, EventKind, FaultCode, JobRequest, SubmitError};

use super::super::action::{Action, Diagnose, Report};
use super::super::state::{Phase, Question};
use super::DialogEngine;

impl DialogEngine {
    fn take_new_events(&mut self) -> Vec<DeviceEvent> {
        let events = self.lock_device().events_since(self.state.event_cursor).to_vec();
        self.state.event_cursor += events.len();
        events
    }

    /// Handles new device events and queues announcements ahead of anything else this turn.
    pub(super) fn deliver_events(&mut self) {
        let events = self.take_new_events();
        let failed: BTreeSet<FaultCode> =
            events.iter().filter(|e| e.kind == EventKind::JobFailed).filter_map(|e| e.fault).collect();
        for event in events {
            self.handle_event(event, &failed, false);
        }
    }

    /// Updates frames for events that happened while the session was closed, without speaking.
    pub(super) fn absorb_events(&mut self) {
        for event in self.take_new_events() {
            self.handle_event(event, &BTreeSet::new(), true);
        }
    }

    fn handle_event(&mut self, event: DeviceEvent, failed: &BTreeSet<FaultCode>, quiet: bool) {
        let frame = event.job_id.and_then(|id| {
            self.state.in_flight.iter().copied().find(|&i| self.state.frames[i].job == Some(id))
        });
        match event.kind {
            EventKind::JobStarted | EventKind::JobProgress => {}
            EventKind::JobCompleted => {
                let Some(i) = frame else { return };
                self.state.in_flight.retain(|&f| f != i);
                self.state.frames[i].phase = Phase::Done;
                let offer = self.defaultable_settings(i);
                if !offer.is_empty() && !self.state.defaults_invited {
                    self.state.invite_pending = Some(offer);
                }
                if quiet {
                    return;
                }
                let function = self.state.frames[i].function;
                let settings = self.frame_settings(i);
                let job = event.job_id.expect("completion names its job");
                self.emit_event(event.clone());
                if self.executed_now.contains(&job) {
                    self.queue(Action::ReportStatus { report: Report::Completed { function, job, settings } });
                } else {
                    self.queue(Action::AnnounceEvent { event, function: Some(function), settings });
                }
            }
            EventKind::JobFailed => {
                let Some(i) = frame else { return };
                self.state.in_flight.retain(|&f| f != i);
                let f = &mut self.state.frames[i];
                f.confirmed = false;
                f.job = None;
                f.optionals_offered = true;
                if quiet {
                    f.phase = Phase::Abandoned;
                    return;
                }
                let function = f.function;
                // The failed task comes back on top so it can be retried once the fault is fixed.
                if let Some(top) = self.state.top_mut() {
                    top.phase = Phase::Suspended;
                }
                self.state.frames[i].phase = Phase::Eliciting;
                self.state.task_stack.push(i);
                let settings = self.frame_settings(i);
                self.emit_event(event.clone());
                if let (Some(fault), false) = (event.fault, self.state.mode_active()) {
                    self.set_pending(Question::DiagnoseOffer { fault });
                }
                self.queue(Action::AnnounceEvent { event, function: Some(function), settings });
            }
            EventKind::FaultRaised => {
                if quiet || event.fault.is_some_and(|f| failed.contains(&f)) {
                    return;
                }
                self.emit_event(event.clone());
                self.queue(Action::AnnounceEvent { event, function: None, settings: Vec::new() });
            }
            EventKind::FaultCleared => {
                let Some(fault) = event.fault else { return };
                if matches!(&self.state.pending_question, Some(p) if p.question == Question::DiagnoseOffer { fault }) {
                    self.state.pending_question = None;
                }
                if quiet {
                    return;
                }
                self.emit_event(event.clone());
                if self.state.diagnosis == Some(fault) {
                    self.state.diagnosis = None;
                    self.queue(Action::DiagnoseStep { fault, step: Diagnose::Fixed });
                } else {
                    self.queue(Action::AnnounceEvent { event, function: None, settings: Vec::new() });
                }
            }
        }
    }

    fn emit_event(&mut self, event: DeviceEvent) {
        self.events_out.push((self.queued.len(), event));
    }

    /// After an announcement, whether the conversation had something open to come back to.
    pub(super) fn needs_reprompt(&self) -> bool {
        self.state.mode_active()
            || !self.state.task_stack.is_empty()
            || self.state.pending_question.as_ref().is_some_and(|p| p.question != Question::Open)
    }

    /// Submits the confirmed job in `frame`.
    pub(super) fn execute(&mut self, frame: usize) {
        let (function, settings) = {
            let f = &self.state.frames[frame];
            (f.function, f.settings_map())
        };
        let pages = self.lock_device().state().original_pages;
        let request = JobRequest { function, settings, source_pages: pages };
        let submitted = self.lock_device().submit(request);
        match submitted {
            Err(SubmitError::Invalid(violations)) => {
                let Some(slot) = violations.iter().find_map(|v| v.option.clone()) else { return };
                self.state.frames[frame].unset(&slot);
                if !self.resources.manifest.catalog.option(&slot).is_some_and(|o| o.applies_to(function)) {
                    return;
                }
                self.queue(Action::AskSlot { function, slot: slot.clone(), reask: false });
                self.set_pending(Question::Slot { frame, slot });
                self.prompted = true;
            }
            Ok(job) => {
                let settings = self.frame_settings(frame);
                let f = &mut self.state.frames[frame];
                f.confirmed = true;
                f.job = Some(job);
                f.phase = Phase::Executing;
                self.state.task_stack.retain(|&i| i != frame);
                if let Some(top) = self.state.top_mut() {
                    top.phase = Phase::Eliciting;
                }
                self.state.in_flight.push(frame);
                self.state.last_job = Some((frame, job));
                self.executed_now.push(job);
                self.queue(Action::PreviewOutput { function, settings });
                self.queue(Action::Execute { function, job });
                let ticks = self.config.advance_on_execute;
                self.lock_device().advance(ticks);
                self.deliver_events();
            }
        }
    }

    /// Reports on jobs in flight, else the most recent job.
    pub(super) fn status(&mut self) {
        let mut reports = Vec::new();
        {
            let device = self.lock_device();
            for &i in &self.state.in_flight {
                let f = &self.state.frames[i];
                let Some(job) = f.job.and_then(|id| device.job(id)) else { continue };
                let total = job.request.total_units().max(1);
                reports.push(match job.status {
                    crate::device::JobStatus::Queued => Report::Queued { function: f.function, job: job.id },
                    _ => Report::Running { function: f.function, job: job.id, percent: job.progress * 100 / total },
                });
            }
            if reports.is_empty() {
                if let Some((i, id)) = self.state.last_job {
                    let f = &self.state.frames[i];
                    if let Some(job) = device.job(id) {
                        match job.status {
                            crate::device::JobStatus::Completed => reports.push(Report::Completed {
                                function: f.function,
                                job: job.id,
                                settings: self.frame_settings(i),
                            }),
                            crate::device::JobStatus::Failed(fault) => reports.push(Report::Failed {
                                function: f.function,
                                job: job.id,
                                fault,
                                detail: self
                                    .resources
                                    .manifest
                                    .fault(fault)
                                    .map(|s| s.detail.clone())
                                    .unwrap_or_default(),
                            }),
                            _ => {}
                        }
                    }
                }
            }
        }
        if reports.is_empty() {
            reports.push(Report::Idle);
        }
        for report in reports {
            self.queue(Action::ReportStatus { report });
        }
    }
}
