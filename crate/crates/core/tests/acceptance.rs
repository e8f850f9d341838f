//! Prints one PASS/FAIL line per acceptance criterion and exits non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use common::phrasing::{check, fragments, one_shot, turn_by_turn, with_fillers, FILLERS, JOINERS, ORDERS};
use common::session::engine;
use mfp_agent::device::{DeviceCommand, DeviceFunction, FaultCode};
use mfp_agent::dialog::{responses, Action, ActionKind, AgentAction, Diagnose, EngineOutput, Offer, Question};
use mfp_agent::nlg::chunk_options;
use mfp_agent::service::{run_script, Config, Directive, EnvelopeType, SessionEnvelope, SessionHost, TranscriptScript};
use mfp_agent::Resources;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn crate_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mfp-agent"))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn scenario_paths() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(crate_dir().join("scenarios"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "script"))
        .collect();
    paths.sort();
    paths
}

/// Selections counted straight from the manifest JSON: enum values, two per switch,
/// each step of a short range, one entry for long ranges and free text.
fn count_selections(device: &Value) -> (usize, usize) {
    let (mut all, mut conversational) = (0, 0);
    for option in device["options"].as_array().unwrap() {
        let domain = &option["domain"];
        let n = match domain["type"].as_str().unwrap() {
            "enum" => domain["values"].as_array().unwrap().len(),
            "bool" => 2,
            "range" => {
                let span = domain["max"].as_i64().unwrap() - domain["min"].as_i64().unwrap() + 1;
                if span <= 10 { span as usize } else { 1 }
            }
            _ => 1,
        };
        all += n;
        if option["conversational"].as_bool().unwrap() {
            conversational += n;
        }
    }
    (all, conversational)
}

fn reported(stdout: &str, label: &str) -> usize {
    let line = stdout.lines().find(|l| l.starts_with(label)).unwrap_or_else(|| panic!("no `{label}` line"));
    line[label.len()..].trim().parse().unwrap()
}

fn catalog_scale() -> Outcome {
    let started = Instant::now();
    let out = bin().arg("validate-manifests").output().unwrap();
    let elapsed = started.elapsed();
    let stdout = String::from_utf8_lossy(&out.stdout);
    ensure(out.status.success(), || format!("validate-manifests failed:\n{stdout}"))?;
    let device: Value = serde_json::from_str(&std::fs::read_to_string(crate_dir().join("data/device.json")).unwrap()).unwrap();
    let (all, conversational) = count_selections(&device);
    ensure(reported(&stdout, "option values") == all, || format!("reported values differ from the manifest's {all}"))?;
    ensure(reported(&stdout, "conversational values") == conversational, || {
        format!("reported conversational values differ from the manifest's {conversational}")
    })?;
    ensure(all >= 90 && conversational >= 45, || format!("{all} values, {conversational} conversational"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:.2?}"))?;
    Ok(format!("{all} values, {conversational} conversational, validate-manifests in {elapsed:.2?}"))
}

fn scenario_suite() -> Outcome {
    let out_dir = tempfile::tempdir().unwrap();
    let started = Instant::now();
    let out = bin().arg("check").arg(crate_dir().join("scenarios")).arg("--out").arg(out_dir.path()).output().unwrap();
    let elapsed = started.elapsed();
    let stdout = String::from_utf8_lossy(&out.stdout);
    ensure(out.status.success(), || format!("check failed:\n{stdout}"))?;
    let passes = stdout.lines().filter(|l| l.contains(": PASS (")).count();
    ensure(passes == 7 && scenario_paths().len() == 7, || format!("{passes} of {} scripts passed", scenario_paths().len()))?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:.2?}"))?;

    let first = &scenario_paths()[0];
    let script = TranscriptScript::load(first).unwrap();
    let panel = script.lines.iter().any(|l| matches!(l.directive, Directive::Device(_)));
    ensure(!panel, || "scenario 1 touches the device directly".into())?;
    let stem = first.file_stem().unwrap().to_string_lossy();
    let log = std::fs::read_to_string(out_dir.path().join(format!("{stem}.envelopes.ndjson"))).unwrap();
    let envelopes: Vec<SessionEnvelope> = log.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let jobs: Vec<_> = envelopes.iter().filter_map(|e| e.device_event()).filter_map(|d| d.job).collect();
    let done = jobs.iter().find(|j| json!(j.status) == json!({ "state": "completed" }));
    let done = done.ok_or("scenario 1 completed no job")?;
    ensure(json!(done.function) == json!("copy") && json!(done.settings["quantity"]) == json!(3), || {
        format!("scenario 1 job: {done:?}")
    })?;
    let actions: Vec<ActionKind> = envelopes.iter().filter_map(|e| e.agent()).map(|a| a.action).collect();
    let execute = actions.iter().position(|a| *a == ActionKind::Execute).ok_or("no Execute")?;
    ensure(actions[..execute].contains(&ActionKind::FinalConfirm), || "Execute before FinalConfirm".into())?;
    Ok(format!("7/7 scripts in {elapsed:.2?}; scenario 1 ran copy x3 by conversation only"))
}

fn permutation_invariance() -> Outcome {
    let mut runs = Vec::new();
    for order in ORDERS {
        let parts = fragments(order, [0, 0, 0]);
        runs.push(one_shot(&parts.join(" ")));
        runs.push(turn_by_turn(&parts.iter().map(|s| s.to_string()).collect::<Vec<_>>()));
    }
    let baseline = runs[0].clone();
    check(&baseline);
    ensure(runs.iter().all(|r| *r == baseline), || format!("orders disagree: {runs:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..200 {
        let order = ORDERS[rng.random_range(0..ORDERS.len())];
        let variant = [rng.random_range(0..3), rng.random_range(0..3), rng.random_range(0..3)];
        let fillers: Vec<Option<usize>> =
            (0..4).map(|_| rng.random_bool(0.4).then(|| rng.random_range(0..FILLERS.len()))).collect();
        let pieces = with_fillers(&fragments(order, variant), &fillers);
        let settings = if rng.random_bool(0.5) {
            turn_by_turn(&pieces)
        } else {
            one_shot(&pieces.join(JOINERS[rng.random_range(0..JOINERS.len())]))
        };
        ensure(settings == baseline, || format!("variant {i} {pieces:?} gave {settings:?}"))?;
    }
    Ok(format!("6 orders one-shot and turn by turn, 200 filler variants, 0 failures: {baseline:?}"))
}

fn confirmation_gates() -> Outcome {
    let tally = common::fuzz::run(0..1000);
    ensure(tally.executes > 0 && tally.large_executes > 0, || "fuzzing never reached the gates".into())?;
    Ok(format!(
        "{} sessions, {} executions all after a confirmed FinalConfirm, {} of quantity >= 100 all flagged unusual",
        tally.sessions, tally.executes, tally.large_executes
    ))
}

fn interruption() -> Outcome {
    let config = Config { tick_ms: 0, ..Config::default() };
    let mut host = SessionHost::new(Resources::builtin(), &config, "interrupt");
    host.handle(SessionEnvelope::client(EnvelopeType::SessionStart, json!({ "returning": true })));
    for text in ["make 60 copies", "single sided", "no", "yes", "scan a document", "black and white"] {
        host.handle(SessionEnvelope::utterance(text));
    }
    let scan = *host.engine().state().task_stack.last().unwrap();
    let before = host.engine().state().frames[scan].settings_map();
    let out = host.handle(SessionEnvelope::client(EnvelopeType::DeviceEvent, json!({ "command": "advance", "steps": 500 })));

    let kinds: Vec<&str> = out.iter().map(|e| e.kind.as_str()).collect();
    let want = ["device.event", "agent.response", "agent.response", "device.state"];
    ensure(kinds == want, || format!("envelope order {kinds:?}"))?;
    let event = out[0].device_event().unwrap();
    ensure(json!(event.event.kind) == json!("job_completed"), || format!("{event:?}"))?;
    let (announce, question) = (out[1].agent().unwrap(), out[2].agent().unwrap());
    ensure(announce.action == ActionKind::AnnounceEvent && announce.text.contains("copy"), || announce.text.clone())?;
    ensure(question.action == ActionKind::AskSlot, || format!("{:?}", question.action))?;
    let pending = host.engine().state().pending_question.clone().map(|p| p.question);
    let repeated = matches!(&pending, Some(Question::Slot { frame, slot }) if *frame == scan && slot == "destination");
    ensure(repeated, || format!("pending {pending:?}"))?;
    ensure(host.engine().state().frames[scan].settings_map() == before, || "scan slots changed".into())?;
    Ok(format!("{} then the destination question again; color mode kept", want.join(", ")))
}

fn recommendations(out: &[EngineOutput]) -> Vec<String> {
    responses(out)
        .iter()
        .filter_map(|t| match &t.action.action {
            Action::DiagnoseStep { step: Diagnose::Recommend { recommendation, .. }, .. } => Some(recommendation.id.clone()),
            _ => None,
        })
        .collect()
}

fn ends_with(out: &[EngineOutput], want: fn(&Diagnose) -> bool) -> bool {
    responses(out).iter().any(|t| matches!(&t.action.action, Action::DiagnoseStep { step, .. } if want(step)))
}

fn diagnosis_loop() -> Outcome {
    let mut runs = 0;
    for fault in FaultCode::ALL {
        let mut e = engine();
        let n = e.resources().knowledge.case(fault).ok_or(format!("{fault} has no case"))?.recommendations.len();
        e.device_command(DeviceCommand::Fault { fault });
        let mut seen = recommendations(&e.user_turn("troubleshoot"));
        let mut last = Vec::new();
        for _ in 0..n {
            last = e.user_turn("still not fixed");
            seen.extend(recommendations(&last));
        }
        let distinct: BTreeSet<_> = seen.iter().collect();
        ensure(seen.len() == n && distinct.len() == n, || format!("{fault}: {seen:?} of {n}"))?;
        ensure(ends_with(&last, |s| matches!(s, Diagnose::Exhausted)), || format!("{fault}: no Exhausted"))?;
        runs += 1;

        for k in 1..=n {
            let mut e = engine();
            e.device_command(DeviceCommand::Fault { fault });
            let mut seen = recommendations(&e.user_turn("troubleshoot"));
            for _ in 1..k {
                seen.extend(recommendations(&e.user_turn("no")));
            }
            let fixed = e.device_command(DeviceCommand::Clear { fault });
            ensure(seen.len() == k && recommendations(&fixed).is_empty(), || format!("{fault} k={k}: {seen:?}"))?;
            ensure(ends_with(&fixed, |s| matches!(s, Diagnose::Fixed)), || format!("{fault} k={k}: no Fixed"))?;
            runs += 1;
        }
    }
    Ok(format!("{} fault codes, {runs} runs: N then Exhausted, k then Fixed", FaultCode::ALL.len()))
}

const NAMES: [&str; 10] = ["amber", "basil", "cedar", "delta", "ember", "fjord", "gable", "heron", "ivory", "juniper"];

fn chunking() -> Outcome {
    let f = common::mirror::fixture();
    let chunk = |items: Vec<String>, index, count| {
        f.renderer.render(&AgentAction::new(Action::OfferOptions {
            offer: Offer::Chunk { function: None, items, index, count },
        }))
    };
    for len in [0usize, 1, 3, 4, 7, 10] {
        let items: Vec<String> = NAMES[..len].iter().map(|n| n.to_string()).collect();
        let chunks = chunk_options(&items, 3);
        ensure(chunks.len() == len.div_ceil(3), || format!("L={len}: {} chunks", chunks.len()))?;
        if len == 0 {
            ensure(!chunk(vec![], 0, 0).continuation, || "empty list offers more".into())?;
            continue;
        }
        let mut named = 0;
        for (i, c) in chunks.iter().enumerate() {
            let r = chunk(c.clone(), i, chunks.len());
            let here = items.iter().filter(|it| r.text().contains(it.as_str())).count();
            ensure(c.len() <= 3 && here == c.len(), || format!("L={len} chunk {i}: {:?}", r.text()))?;
            ensure(r.continuation == (i + 1 < chunks.len()), || format!("L={len} chunk {i} continuation"))?;
            named += here;
        }
        ensure(named == len, || format!("L={len}: {named} named"))?;
    }

    // The live copy option list: at least five options, the first chunk names three and offers more.
    let mut e = engine();
    let out = e.user_turn("what options are there for copying");
    let turn = responses(&out).into_iter().find(|t| t.action.kind() == ActionKind::OfferOptions).ok_or("no option list")?;
    let Action::OfferOptions { offer: Offer::Chunk { items, count, .. } } = &turn.action.action else {
        return Err(format!("{:?}", turn.action.action));
    };
    let copy_options = e.resources().manifest.catalog.options.iter()
        .filter(|o| o.conversational && o.functions.contains(&DeviceFunction::Copy))
        .count();
    ensure(copy_options >= 5 && items.len() == 3 && turn.response.continuation, || format!("{items:?}"))?;
    ensure(*count == copy_options.div_ceil(3), || format!("{count} chunks for {copy_options} options"))?;
    Ok(format!("L in {{0,1,3,4,7,10}} gives ceil(L/3) chunks; copy options {copy_options} in {count} chunks"))
}

fn mirroring_closure() -> Outcome {
    let f = common::mirror::fixture();
    let failures = common::mirror::mirror_failures(&f);
    ensure(failures.is_empty(), || failures.join("\n"))?;
    let unused = common::mirror::unused_templates(&f);
    ensure(unused.is_empty(), || format!("templates without a sample: {unused:?}"))?;
    Ok(format!(
        "{} samples over all {} templates parse back into their mirror acts",
        f.actions.len(),
        f.renderer.templates().templates.len()
    ))
}

fn replay_determinism() -> Outcome {
    let resources = Resources::builtin();
    let config = Config { tick_ms: 0, ..Config::default() };
    let mut bytes = 0;
    for path in scenario_paths() {
        let script = TranscriptScript::load(&path).unwrap();
        let (a, b) = (run_script(&script, &resources, &config), run_script(&script, &resources, &config));
        ensure(a.passed(), || a.to_string())?;
        ensure(a.transcript == b.transcript && a.envelopes == b.envelopes, || format!("{} differs", path.display()))?;
        bytes += a.transcript.len() + a.envelopes.len();
    }
    Ok(format!("7 scenarios twice, {bytes} bytes of logs identical"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("catalog scale", catalog_scale),
        ("scenario suite", scenario_suite),
        ("permutation invariance", permutation_invariance),
        ("confirmation gates", confirmation_gates),
        ("interruption", interruption),
        ("diagnosis loop", diagnosis_loop),
        ("chunking", chunking),
        ("mirroring closure", mirroring_closure),
        ("replay determinism", replay_determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(*run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = started.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
