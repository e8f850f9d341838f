//! A first-time user takes the tour, asks where things are and is walked through a fax.

use std::collections::BTreeMap;

use mfp_agent::dialog::{DialogConfig, DialogEngine, EngineOutput};
use mfp_agent::Resources;

fn show(outputs: &[EngineOutput]) {
    for out in outputs {
        match out {
            EngineOutput::Response { turn } => println!("agent  {}", turn.response),
            EngineOutput::Event { event } => println!("device {}", event.detail),
        }
    }
}

fn main() {
    let mut engine = DialogEngine::new(Resources::builtin(), DialogConfig::default());
    show(&engine.start_session(BTreeMap::new(), false));
    for line in [
        "yes please",
        "next",
        "next",
        "stop",
        "where is the document feeder",
        "what does collate mean",
        "how do I send a fax",
        "next",
        "next",
        "stop",
    ] {
        println!("user   {line}");
        show(&engine.user_turn(line));
    }
}
