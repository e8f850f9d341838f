//! A copy job finishes while the agent is asking about a scan; the news comes first.

use std::collections::BTreeMap;

use mfp_agent::device::DeviceCommand;
use mfp_agent::dialog::{DialogConfig, DialogEngine, EngineOutput};
use mfp_agent::Resources;

fn show(outputs: &[EngineOutput]) {
    for out in outputs {
        match out {
            EngineOutput::Response { turn } => println!("agent  {:<14} {}", turn.action.kind().to_string(), turn.response),
            EngineOutput::Event { event } => println!("device {:<14} {}", format!("{:?}", event.kind), event.detail),
        }
    }
}

fn main() {
    let mut engine = DialogEngine::new(Resources::builtin(), DialogConfig::default());
    show(&engine.start_session(BTreeMap::new(), true));
    for line in ["make 60 copies", "single sided", "no", "yes", "now scan a document", "black and white"] {
        println!("user   {line}");
        show(&engine.user_turn(line));
    }
    println!("--     the copy job runs to completion");
    show(&engine.device_command(DeviceCommand::Advance { steps: 500 }));
    println!("user   a shared folder");
    show(&engine.user_turn("a shared folder"));
}
