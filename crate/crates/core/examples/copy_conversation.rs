//! A short copy job from greeting to completion, printed turn by turn.

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
        "no thanks",
        "I need to hand out the meeting agenda to three coworkers",
        "print on both sides please",
        "no that's it",
        "yes go ahead",
        "thats all",
    ] {
        println!("user   {line}");
        show(&engine.user_turn(line));
    }
}
