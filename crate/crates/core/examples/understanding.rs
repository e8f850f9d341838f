//! What the parser reads into a few utterances, idle and mid-question.

use mfp_agent::device::DeviceFunction;
use mfp_agent::nlu::ContextSummary;
use mfp_agent::Resources;

fn main() {
    let resources = Resources::builtin();
    let grammar = &resources.grammar;
    let idle = ContextSummary::idle();
    for text in [
        "um I need three copies stapled on both sides please",
        "send this to my inbox in black and white",
        "fax it to 555 010 4477 with a cover",
        "where is the output tray",
        "how do I scan to a thumb drive",
        "make it darker 2",
        "something is wrong with the printer",
    ] {
        println!("{text}");
        for act in grammar.parse(text, &idle) {
            println!("    {act}");
        }
    }
    let copying = idle.with_function(DeviceFunction::Copy);
    println!("while copying: 20");
    for act in grammar.parse("20", &copying) {
        println!("    {act}");
    }
}
