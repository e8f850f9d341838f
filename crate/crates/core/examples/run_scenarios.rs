//! Replays the bundled transcript scripts and prints each report.

use std::path::Path;

use mfp_agent::service::{run_script, Config, TranscriptScript};
use mfp_agent::Resources;

fn main() -> mfp_agent::Result<()> {
    let resources = Resources::builtin();
    let config = Config::default();
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut paths: Vec<_> = std::fs::read_dir(&dir)?.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.retain(|p| p.extension().is_some_and(|x| x == "script"));
    paths.sort();
    let mut passed = 0;
    for path in &paths {
        let report = run_script(&TranscriptScript::load(path)?, &resources, &config);
        print!("{report}");
        passed += usize::from(report.passed());
    }
    println!("{passed}/{} scripts passed", paths.len());
    Ok(())
}
