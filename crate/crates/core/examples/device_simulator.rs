//! The simulated printer on its own: a job, a jam halfway through, and the retry.

use mfp_agent::device::{DeviceFunction, FaultCode, JobRequest, SettingValue, Simulator};
use mfp_agent::Resources;

fn main() {
    let resources = Resources::builtin();
    let mut device = Simulator::new(resources.manifest.clone());
    device.load_originals(4, true);
    let request = JobRequest::new(DeviceFunction::Copy)
        .with("quantity", SettingValue::Int(10))
        .with("sides", SettingValue::text("double"))
        .pages(4);
    println!("estimated sheets: {}", request.estimated_sheets());
    let job = device.submit(request.clone()).expect("valid job");
    println!("submitted {job:?}");

    let mut log = device.advance(5);
    log.extend(device.inject_fault(FaultCode::PaperJam));
    log.extend(device.clear_fault(FaultCode::PaperJam));
    for event in &log {
        println!("{:?}: {}", event.kind, event.detail);
    }
    println!("status after the jam: {:?}", device.job(job).map(|j| &j.status));

    let retry = device.submit(request).expect("valid job");
    let events = device.advance(500);
    println!("{} progress events, then:", events.len() - 1);
    if let Some(last) = events.last() {
        println!("{:?}: {}", last.kind, last.detail);
    }
    println!("retry status: {:?}", device.job(retry).map(|j| &j.status));
    println!("paper left: {} sheets", device.state().paper_sheets());
}
