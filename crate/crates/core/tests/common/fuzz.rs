//! Random sessions checked against the engine's safety gates after every step.

use std::collections::BTreeMap;
use std::ops::Range;

use mfp_agent::device::{DeviceCommand, FaultCode, SettingValue};
use mfp_agent::dialog::{
    responses, Action, ActionKind, DialogConfig, DialogEngine, EngineOutput, Question, Setting,
};
use mfp_agent::nlu::{classify_ambiguity, ActKind, Ambiguity};
use mfp_agent::Resources;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const UTTERANCES: &[&str] = &[
    "make copies",
    "copy this",
    "make 3 copies",
    "make 150 copies",
    "500 copies please",
    "120 copies double sided",
    "make it 200",
    "100",
    "2",
    "double sided",
    "single sided",
    "stapled",
    "no staples",
    "darker",
    "darker two",
    "lighter 9",
    "scan a document",
    "send a fax",
    "email this to me",
    "to 555 123 4567",
    "send it to pat@example.com",
    "color",
    "black and white",
    "usb drive",
    "network folder",
    "pdf",
    "yes",
    "yes",
    "yes go ahead",
    "yes please",
    "sure",
    "no",
    "no thanks",
    "that's all",
    "done",
    "stuck",
    "cancel",
    "stop",
    "help",
    "where is the paper tray",
    "what is collate",
    "how do I send a fax",
    "is it done",
    "troubleshoot",
    "tour",
    "more",
    "make double sided my default",
    "clear my defaults",
    "what options are there for scanning",
    "blah blah",
    "",
    "bye",
];

fn device_command(rng: &mut ChaCha8Rng) -> DeviceCommand {
    let fault = *FaultCode::ALL.choose(rng).unwrap();
    match rng.random_range(0..6) {
        0 => DeviceCommand::Fault { fault },
        1 => DeviceCommand::Clear { fault },
        2 => DeviceCommand::Originals { pages: rng.random_range(1..40), feeder: rng.random_bool(0.7) },
        _ => DeviceCommand::Advance { steps: *[1, 10, 50, 400].choose(rng).unwrap() },
    }
}

fn quantity(settings: &[Setting]) -> i64 {
    settings.iter().find(|s| s.slot == "quantity").and_then(|s| s.value.as_int()).unwrap_or(1)
}

#[derive(Default)]
pub struct Tally {
    pub sessions: u64,
    pub executes: usize,
    pub large_executes: usize,
    pub unusual_confirms: usize,
    pub explicit_confirms: usize,
    pub acked_turns: usize,
}

struct Session {
    engine: DialogEngine,
    /// Settings read back by the most recent final confirmation, until another question replaces it.
    shown_final: Option<(Vec<Setting>, bool)>,
    log: Vec<String>,
}

impl Session {
    fn fail(&self, msg: String) -> ! {
        panic!("{msg}\nsession:\n{}", self.log.join("\n"));
    }

    fn record(&mut self, out: &[EngineOutput]) {
        for turn in responses(out) {
            self.log.push(format!("  agent {:?}: {}", turn.action.kind(), turn.response));
        }
        for turn in responses(out) {
            match &turn.action.action {
                Action::FinalConfirm { settings, unusual, .. } => self.shown_final = Some((settings.clone(), *unusual)),
                Action::AskSlot { .. }
                | Action::OfferOptions { .. }
                | Action::ExplicitConfirm { .. }
                | Action::InviteDefaults { .. }
                | Action::TourStep { .. }
                | Action::WalkthroughStep { .. }
                | Action::DiagnoseStep { .. }
                | Action::Execute { .. }
                | Action::Farewell { .. } => self.shown_final = None,
                _ => {}
            }
        }
        let problems = self.engine.state().problems();
        if !problems.is_empty() {
            self.fail(format!("state problems: {problems:?}"));
        }
    }

    fn check_common(&self, out: &[EngineOutput], tally: &mut Tally) {
        for turn in responses(out) {
            if let Action::FinalConfirm { settings, unusual, .. } = &turn.action.action {
                if quantity(settings) >= 100 && !unusual {
                    self.fail(format!("quantity {} confirmed without the unusual warning", quantity(settings)));
                }
                if *unusual {
                    tally.unusual_confirms += 1;
                }
            }
        }
    }

    fn user(&mut self, text: &str, tally: &mut Tally) {
        let ctx = self.engine.context();
        let acts = self.engine.resources().grammar.parse(text, &ctx);
        let ambiguous = matches!(
            classify_ambiguity(&acts, &self.engine.resources().grammar.registry),
            Ambiguity::Ambiguous(ref readings) if !readings.is_empty()
        );
        let confirmed = acts.iter().any(|a| a.kind == ActKind::Confirm);
        let pending = self.engine.state().pending_question.clone().map(|p| p.question);
        let before: Vec<BTreeMap<String, SettingValue>> =
            self.engine.state().frames.iter().map(|f| f.settings_map()).collect();

        self.log.push(format!("user {text:?} {acts:?}"));
        let out = self.engine.user_turn(text);
        self.check_common(&out, tally);
        let turns = responses(&out);

        for turn in &turns {
            if let Action::Execute { job, .. } = turn.action.action {
                let Some((shown, unusual)) = self.shown_final.clone() else {
                    self.fail("Execute without a final confirmation".into());
                };
                if !matches!(pending, Some(Question::FinalConfirm { .. })) || !confirmed {
                    self.fail(format!("Execute without a yes to the final confirmation (pending {pending:?})"));
                }
                let submitted = self.engine.device().lock().unwrap().job(job).unwrap().request.settings.clone();
                let shown_map: BTreeMap<String, SettingValue> =
                    shown.iter().map(|s| (s.slot.clone(), s.value.clone())).collect();
                if submitted != shown_map {
                    self.fail(format!("submitted {submitted:?} but confirmed {shown_map:?}"));
                }
                tally.executes += 1;
                if quantity(&shown) >= 100 {
                    assert!(unusual);
                    tally.large_executes += 1;
                }
            }
        }

        let explicit = turns.iter().any(|t| t.action.kind() == ActionKind::ExplicitConfirm);
        let repeating = matches!(pending, Some(Question::Disambiguate { .. }));
        if explicit {
            tally.explicit_confirms += 1;
            if !ambiguous && !repeating {
                self.fail("ExplicitConfirm for a clear parse".into());
            }
        }
        let task_open = !self.engine.state().task_stack.is_empty() || self.engine.state().frames.len() > before.len();
        let interrupted = acts.iter().any(|a| matches!(a.kind, ActKind::Cancel | ActKind::Stop | ActKind::Deny));
        if ambiguous && task_open && !interrupted && !explicit && !self.engine.state().mode_active() {
            let recovered = turns.iter().any(|t| matches!(t.action.kind(), ActionKind::AskSlot | ActionKind::AnswerQuestion));
            if !recovered {
                self.fail("ambiguous parse mid-task without an explicit confirmation".into());
            }
        }

        let named: Vec<&String> = acts
            .iter()
            .filter(|a| a.kind == ActKind::Inform)
            .flat_map(|a| a.slots.keys())
            .collect();
        let filled = self.engine.state().frames.iter().enumerate().any(|(i, f)| {
            let old = before.get(i);
            f.settings_map().iter().any(|(k, v)| named.contains(&k) && old.and_then(|o| o.get(k)) != Some(v))
        });
        if filled && self.engine.state().session_open {
            let acked = turns.iter().any(|t| t.response.cues().contains(&"ack"));
            if !acked {
                self.fail("slot-filling turn without an ack".into());
            }
            tally.acked_turns += 1;
        }
        self.record(&out);
    }

    fn device(&mut self, command: DeviceCommand, tally: &mut Tally) {
        self.log.push(format!("device {command:?}"));
        let out = self.engine.device_command(command);
        self.check_common(&out, tally);
        if responses(&out).iter().any(|t| t.action.kind() == ActionKind::Execute) {
            self.fail("device event caused an Execute".into());
        }
        self.record(&out);
    }
}

/// Runs one session per seed; panics with the session log on the first violated gate.
pub fn run(seeds: Range<u64>) -> Tally {
    let resources = Resources::builtin();
    let mut tally = Tally::default();
    for seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut session = Session {
            engine: DialogEngine::new(resources.clone(), DialogConfig::default()),
            shown_final: None,
            log: vec![format!("seed {seed}")],
        };
        let out = session.engine.start_session(BTreeMap::new(), rng.random_bool(0.5));
        session.record(&out);
        for _ in 0..rng.random_range(4..24) {
            if !session.engine.state().session_open {
                let out = session.engine.start_session(BTreeMap::new(), true);
                session.record(&out);
            }
            if rng.random_bool(0.15) {
                let command = device_command(&mut rng);
                session.device(command, &mut tally);
            } else {
                let text = *UTTERANCES.choose(&mut rng).unwrap();
                session.user(text, &mut tally);
            }
        }
        tally.sessions += 1;
    }
    tally
}
