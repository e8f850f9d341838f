#![allow(dead_code)]

pub mod fuzz;
pub mod mirror;
pub mod phrasing;

use std::collections::BTreeSet;
use std::sync::Arc;

use mfp_agent::assist::{KnowledgeBase, StepOutcome};
use mfp_agent::device::{DeviceEvent, DeviceFunction, DeviceManifest, EventKind, FaultCode, JobId, ValueDomain};
use mfp_agent::dialog::{
    Action, AgentAction, AmbiguityReason, Answer, Diagnose, FallbackAbout, Help, Offer, Report, Setting, TopicRef,
    Tour,
};

pub fn manifest() -> Arc<DeviceManifest> {
    Arc::new(DeviceManifest::builtin())
}

fn act(action: Action) -> AgentAction {
    AgentAction::new(action)
}

fn event(kind: EventKind, fault: Option<FaultCode>, detail: &str) -> DeviceEvent {
    DeviceEvent { seq: 1, kind, job_id: Some(JobId(1)), fault, detail: detail.to_string() }
}

pub fn copy_settings() -> Vec<Setting> {
    vec![
        Setting::new("quantity", 3),
        Setting::new("sides", "double"),
        Setting::new("staple", true),
        Setting::new("darkness", -1),
        Setting::new("paper_size", "a4"),
    ]
}

pub fn job_settings(f: DeviceFunction) -> Vec<Setting> {
    match f {
        DeviceFunction::Copy => copy_settings(),
        DeviceFunction::Scan => vec![
            Setting::new("destination", "network_folder"),
            Setting::new("color_mode", "black_and_white"),
            Setting::new("file_format", "searchable_pdf"),
        ],
        DeviceFunction::Fax => vec![
            Setting::new("destination_number", "5550100"),
            Setting::new("fax_resolution", "fine"),
            Setting::new("cover_sheet", true),
        ],
        DeviceFunction::Email => vec![
            Setting::new("destination_address", "pat@example.com"),
            Setting::new("cc_self", true),
            Setting::new("resolution", "600_dpi"),
        ],
        DeviceFunction::Print => Vec::new(),
    }
}

/// At least one action for every template, plus every topic, part, procedure step and fault.
pub fn sample_actions(manifest: &DeviceManifest, kb: &KnowledgeBase) -> Vec<AgentAction> {
    let mut out = Vec::new();
    let layout = &manifest.layout;
    for o in manifest.catalog.options.iter().filter(|o| o.conversational) {
        for reask in [false, true] {
            out.push(act(Action::AskSlot { function: o.functions[0], slot: o.id.clone(), reask }));
        }
        out.push(act(Action::Fallback {
            misses: 2,
            about: FallbackAbout::Slot { function: o.functions[0], slot: o.id.clone() },
        }));
        let sample = match &o.domain {
            ValueDomain::Range { max, .. } => mfp_agent::device::SettingValue::Int((*max).min(2)),
            _ => o.default.clone(),
        };
        if !sample.to_string().is_empty() {
            out.push(act(Action::InviteDefaults { settings: vec![Setting { slot: o.id.clone(), value: sample }] }));
        }
    }
    let mut ack = AgentAction::new(Action::AskSlot { function: DeviceFunction::Copy, slot: "sides".into(), reask: false });
    ack.ack = vec![Setting::new("quantity", 3)];
    out.push(ack);

    for tour in [false, true] {
        for returning in [false, true] {
            out.push(act(Action::OfferOptions {
                offer: Offer::Greeting { tour, defaults: vec![Setting::new("sides", "double")], returning },
            }));
        }
    }
    out.push(act(Action::OfferOptions { offer: Offer::Functions }));
    for f in DeviceFunction::SUPPORTED {
        let options: Vec<String> = manifest
            .catalog
            .query(Some(f))
            .into_iter()
            .filter(|o| o.conversational && !o.required_for(f))
            .map(|o| o.id.clone())
            .collect();
        for chunk in options.chunks(3) {
            out.push(act(Action::OfferOptions { offer: Offer::Optionals { function: f, options: chunk.to_vec() } }));
        }
    }
    out.push(act(Action::OfferOptions {
        offer: Offer::WhichFunction { candidates: vec![DeviceFunction::Copy, DeviceFunction::Scan] },
    }));
    for function in [None, Some(DeviceFunction::Copy)] {
        for (index, count) in [(0, 3), (2, 3), (0, 1)] {
            out.push(act(Action::OfferOptions {
                offer: Offer::Chunk {
                    function,
                    items: vec!["sides".into(), "stapling".into(), "darkness".into()],
                    index,
                    count,
                },
            }));
        }
        out.push(act(Action::OfferOptions { offer: Offer::Chunk { function, items: vec![], index: 0, count: 0 } }));
    }

    let mut implicit = act(Action::ImplicitConfirm);
    implicit.ack = vec![Setting::new("quantity", 3), Setting::new("sides", "double")];
    out.push(implicit);
    out.push(act(Action::ExplicitConfirm {
        candidates: vec![
            vec![Setting::new("darkness", 2)],
            vec![Setting::new("darkness", 1), Setting::new("quantity", 2)],
        ],
        reason: AmbiguityReason::Overlap,
    }));
    out.push(act(Action::ExplicitConfirm {
        candidates: vec![vec![Setting::new("quantity", 999)]],
        reason: AmbiguityReason::OutOfRange,
    }));
    out.push(act(Action::ExplicitConfirm {
        candidates: vec![vec![Setting::new("darkness", 3)]],
        reason: AmbiguityReason::OutOfRange,
    }));
    out.push(act(Action::ExplicitConfirm {
        candidates: vec![vec![Setting::new("quantity", 5)], vec![Setting::new("darkness", 3)]],
        reason: AmbiguityReason::Unattributed,
    }));

    for f in DeviceFunction::SUPPORTED {
        let settings = job_settings(f);
        for unusual in [false, true] {
            out.push(act(Action::FinalConfirm { function: f, settings: settings.clone(), unusual }));
        }
        let mut acked = act(Action::FinalConfirm { function: f, settings: settings.clone(), unusual: false });
        acked.ack = vec![settings[0].clone()];
        out.push(acked);
        out.push(act(Action::Execute { function: f, job: JobId(4) }));
        out.push(act(Action::PreviewOutput { function: f, settings: settings.clone() }));
        out.push(act(Action::ReportStatus {
            report: Report::Completed { function: f, job: JobId(4), settings: settings.clone() },
        }));
        out.push(act(Action::ReportStatus { report: Report::Running { function: f, job: JobId(4), percent: 40 } }));
        out.push(act(Action::ReportStatus { report: Report::Queued { function: f, job: JobId(5) } }));
        out.push(act(Action::AnswerQuestion { answer: Answer::Cancelled { function: f } }));
        out.push(act(Action::OfferOptions { offer: Offer::Change { function: f } }));
        for kind in [EventKind::JobStarted, EventKind::JobCompleted] {
            out.push(act(Action::AnnounceEvent {
                event: event(kind, None, "done"),
                function: Some(f),
                settings: settings.clone(),
            }));
        }
    }
    out.push(act(Action::ReportStatus {
        report: Report::Failed {
            function: DeviceFunction::Copy,
            job: JobId(2),
            fault: FaultCode::PaperJam,
            detail: "Paper is jammed inside the machine.".into(),
        },
    }));
    out.push(act(Action::ReportStatus { report: Report::Idle }));

    for (id, entry) in layout.iter() {
        out.push(act(Action::AnswerQuestion {
            answer: Answer::Location { part: id.clone(), name: entry.name.clone(), location: entry.location.clone() },
        }));
    }
    let known = layout.iter().map(|(_, e)| e.name.clone()).collect();
    out.push(act(Action::AnswerQuestion { answer: Answer::UnknownPart { part: "flux capacitor".into(), known } }));
    out.push(act(Action::AnswerQuestion { answer: Answer::Unsupported { function: DeviceFunction::Print } }));
    out.push(act(Action::AnswerQuestion {
        answer: Answer::Inapplicable {
            slot: "staple".into(),
            function: DeviceFunction::Scan,
            functions: vec![DeviceFunction::Copy],
        },
    }));
    out.push(act(Action::AnswerQuestion {
        answer: Answer::DefaultsSaved { settings: vec![Setting::new("sides", "double"), Setting::new("staple", true)] },
    }));
    out.push(act(Action::AnswerQuestion { answer: Answer::DefaultsCleared }));
    out.push(act(Action::AnswerQuestion { answer: Answer::DefaultsNeedSetting }));
    out.push(act(Action::AnswerQuestion { answer: Answer::NothingToCancel }));

    for t in &kb.topics {
        let related = t.related.iter().filter_map(|r| kb.topic(r)).map(|r| r.title.clone()).take(3).collect();
        out.push(act(Action::GiveHelp {
            help: Help::Topic { id: t.id.clone(), title: t.title.clone(), body: t.body.clone(), related },
        }));
        out.push(act(Action::GiveHelp {
            help: Help::Suggestions { topics: vec![TopicRef { id: t.id.clone(), title: t.title.clone() }] },
        }));
    }
    out.push(act(Action::GiveHelp { help: Help::General }));
    out.push(act(Action::GiveHelp { help: Help::Procedures }));

    for p in &kb.procedures {
        let (mut cursor, first) = kb.walkthrough_start(&p.id, layout).unwrap();
        out.push(act(Action::WalkthroughStep { procedure: p.id.clone(), step: first }));
        for _ in 0..2 {
            let step = kb.walkthrough_step(&mut cursor, StepOutcome::Stuck, layout);
            out.push(act(Action::WalkthroughStep { procedure: p.id.clone(), step }));
        }
        loop {
            let step = kb.walkthrough_step(&mut cursor, StepOutcome::Done, layout);
            let done = cursor.closed;
            out.push(act(Action::WalkthroughStep { procedure: p.id.clone(), step }));
            if done {
                break;
            }
        }
        let step = kb.walkthrough_step(&mut cursor, StepOutcome::Done, layout);
        out.push(act(Action::WalkthroughStep { procedure: p.id.clone(), step }));
    }
    let (mut cursor, _) = kb.walkthrough_start("load_feeder", layout).unwrap();
    let step = kb.walkthrough_step(&mut cursor, StepOutcome::Stop, layout);
    out.push(act(Action::WalkthroughStep { procedure: "load_feeder".into(), step }));

    for fault in FaultCode::ALL {
        out.push(act(Action::DiagnoseStep { fault, step: Diagnose::Offer }));
        let mut tried = BTreeSet::new();
        let mut attempt = 0;
        while let mfp_agent::assist::Diagnosis::Recommend(r) = kb.diagnose_next(fault, &tried) {
            attempt += 1;
            out.push(act(Action::DiagnoseStep {
                fault,
                step: Diagnose::Recommend { recommendation: r.clone(), attempt, still_faulted: attempt > 1 },
            }));
            tried.insert(r.id.clone());
        }
        out.push(act(Action::DiagnoseStep { fault, step: Diagnose::Fixed }));
        out.push(act(Action::DiagnoseStep { fault, step: Diagnose::Exhausted }));
        out.push(act(Action::DiagnoseStep { fault, step: Diagnose::Stopped }));
        let detail = manifest.fault(fault).unwrap().detail.clone();
        for kind in [EventKind::FaultRaised, EventKind::FaultCleared] {
            out.push(act(Action::AnnounceEvent { event: event(kind, Some(fault), &detail), function: None, settings: vec![] }));
        }
        out.push(act(Action::AnnounceEvent {
            event: event(EventKind::JobFailed, Some(fault), &detail),
            function: Some(DeviceFunction::Copy),
            settings: vec![],
        }));
    }

    for about in [
        FallbackAbout::YesNo,
        FallbackAbout::Outcome,
        FallbackAbout::Open,
        FallbackAbout::OfferWalkthrough { procedure: "make_copy".into() },
    ] {
        out.push(act(Action::Fallback { misses: 1, about }));
    }
    out.push(act(Action::TourStep { tour: Tour::Offer }));
    for segment in kb.tour_segments(layout) {
        out.push(act(Action::TourStep { tour: Tour::Segment { segment } }));
    }
    out.push(act(Action::TourStep { tour: Tour::Finished }));
    out.push(act(Action::Farewell { running_jobs: 0 }));
    out.push(act(Action::Farewell { running_jobs: 1 }));
    out
}

pub mod session {
    use std::collections::BTreeMap;

    use mfp_agent::dialog::{responses, ActionKind, DialogConfig, DialogEngine, EngineOutput};
    use mfp_agent::Resources;

    /// A returning user's session, already greeted.
    pub fn engine() -> DialogEngine {
        let mut engine = DialogEngine::new(Resources::builtin(), DialogConfig::default());
        engine.start_session(BTreeMap::new(), true);
        engine
    }

    pub fn kinds(outputs: &[EngineOutput]) -> Vec<ActionKind> {
        responses(outputs).iter().map(|t| t.action.kind()).collect()
    }

    /// Says each line in order and returns the outputs of the last one.
    pub fn say_all(engine: &mut DialogEngine, lines: &[&str]) -> Vec<EngineOutput> {
        let mut last = Vec::new();
        for line in lines {
            last = engine.user_turn(line);
            assert!(engine.state().problems().is_empty(), "after {line:?}: {:?}", engine.state().problems());
        }
        last
    }
}
