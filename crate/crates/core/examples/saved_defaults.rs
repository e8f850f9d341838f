//! A profile keeps the settings a user chose as defaults between sessions.

use serde_json::json;

use mfp_agent::service::{format_envelope, Config, EnvelopeType, SessionEnvelope, SessionHost};
use mfp_agent::Resources;

fn run(host: &mut SessionHost, envelope: SessionEnvelope) {
    if let Some(text) = envelope.payload.get("text").and_then(|t| t.as_str()) {
        println!("user:  {text}");
    }
    for e in host.handle(envelope) {
        if let Some(line) = format_envelope(&e) {
            println!("{line}");
        }
    }
}

fn main() {
    let dir = std::env::temp_dir().join(format!("mfp-agent-example-{}", std::process::id()));
    let config = Config { tick_ms: 0, profile_dir: Some(dir.clone()), ..Config::default() };
    let start = || SessionEnvelope::client(EnvelopeType::SessionStart, json!({ "profile": "sam" }));
    let end = || SessionEnvelope::client(EnvelopeType::SessionEnd, json!(null));

    let mut first = SessionHost::new(Resources::builtin(), &config, "first");
    run(&mut first, start());
    for line in ["no thanks", "photocopy this memo twice", "front and back", "no", "yes", "yes"] {
        run(&mut first, SessionEnvelope::utterance(line));
    }
    run(&mut first, end());
    let saved = std::fs::read_to_string(dir.join("sam.json")).expect("profile written");
    println!("\nsam.json: {saved}\n");

    let mut second = SessionHost::new(Resources::builtin(), &config, "second");
    run(&mut second, start());
    for line in ["could I get one photocopy of the memo", "no"] {
        run(&mut second, SessionEnvelope::utterance(line));
    }
    let _ = std::fs::remove_dir_all(dir);
}
