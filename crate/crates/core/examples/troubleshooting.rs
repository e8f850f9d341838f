//! A paper jam stops a job; the agent suggests fixes until the operator clears it.

use std::collections::BTreeMap;

use mfp_agent::device::{DeviceCommand, FaultCode};
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

fn say(engine: &mut DialogEngine, line: &str) {
    println!("user   {line}");
    show(&engine.user_turn(line));
}

fn device(engine: &mut DialogEngine, command: DeviceCommand) {
    println!("--     {command:?}");
    show(&engine.device_command(command));
}

fn main() {
    let mut engine = DialogEngine::new(Resources::builtin(), DialogConfig::default());
    show(&engine.start_session(BTreeMap::new(), true));
    for line in ["make 40 copies", "single sided", "no", "yes"] {
        say(&mut engine, line);
    }
    device(&mut engine, DeviceCommand::Fault { fault: FaultCode::PaperJam });
    say(&mut engine, "yes please");
    say(&mut engine, "it's still jammed");
    device(&mut engine, DeviceCommand::Clear { fault: FaultCode::PaperJam });
    say(&mut engine, "yes");
    device(&mut engine, DeviceCommand::Advance { steps: 500 });
}
