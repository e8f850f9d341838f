//! The option catalog per function, and which options can be set by conversation.

use mfp_agent::device::DeviceFunction;
use mfp_agent::Resources;

fn main() {
    let resources = Resources::builtin();
    println!("{}\n", resources.report());
    let catalog = &resources.manifest.catalog;
    for function in [DeviceFunction::Copy, DeviceFunction::Scan, DeviceFunction::Fax, DeviceFunction::Email] {
        println!("{function}:");
        for option in catalog.options.iter().filter(|o| o.applies_to(function)) {
            let mark = if option.conversational { "talk " } else { "panel" };
            let required = if option.required_for(function) { " (required)" } else { "" };
            println!("  {mark} {:<24} {} values{required}", option.label, option.domain.selection_count());
        }
    }
}
