//! Long option lists are read out a few at a time; the chunk size is configurable.

use std::collections::BTreeMap;

use mfp_agent::dialog::{DialogConfig, DialogEngine, EngineOutput};
use mfp_agent::nlg::chunk_options;
use mfp_agent::Resources;

/// Prints the responses and tells whether more of a list is on offer.
fn show(outputs: &[EngineOutput]) -> bool {
    let mut more = false;
    for out in outputs {
        if let EngineOutput::Response { turn } = out {
            println!("agent  {}", turn.response);
            more = turn.response.continuation;
        }
    }
    more
}

fn main() {
    let letters: Vec<char> = "abcdefg".chars().collect();
    println!("7 items in chunks of 3: {:?}", chunk_options(&letters, 3));

    for chunk_size in [3, 5] {
        println!("\nchunk size {chunk_size}");
        let config = DialogConfig { chunk_size, ..DialogConfig::default() };
        let mut engine = DialogEngine::new(Resources::builtin(), config);
        engine.start_session(BTreeMap::new(), true);
        let mut line = "what options are there for copying";
        loop {
            println!("user   {line}");
            if !show(&engine.user_turn(line)) {
                break;
            }
            line = "more";
        }
    }
}
