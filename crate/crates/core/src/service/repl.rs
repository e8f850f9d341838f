//! Terminal conversation: one line per utterance, `/device` drives the simulator.

use std::io::{self, BufRead, Write};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};
use std::thread;
use std::time::Duration;

use serde_json::json;

use crate::device::DeviceCommand;
use crate::resources::Resources;

use super::config::Config;
use super::envelope::{EnvelopeType, ErrorPayload, SessionEnvelope};
use super::session::SessionHost;

pub const REPL_HELP: &str = "\
Type what you want the printer to do. Commands:
  /device fault <code>      inject a fault (paper_jam, out_of_paper, toner_low, feeder_misfeed, stapler_empty)
  /device clear <code>      fix a fault
  /device advance <n>       run the device for n steps
  /device originals <n> [glass]
  /device paper [tray] <n>
  /device toner <percent>
  /quit                     end the session and exit";

/// One printable line per envelope; device snapshots are not shown.
pub fn format_envelope(envelope: &SessionEnvelope) -> Option<String> {
    if let Some(agent) = envelope.agent() {
        return Some(format!("agent: {}", agent.response));
    }
    if let Some(event) = envelope.device_event() {
        return Some(format!("device: {}", event.event.detail));
    }
    match envelope.kind {
        EnvelopeType::Error => {
            let message = serde_json::from_value::<ErrorPayload>(envelope.payload.clone())
                .map(|p| p.message)
                .unwrap_or_else(|_| envelope.payload.to_string());
            Some(format!("error: {message}"))
        }
        _ => None,
    }
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

fn print<W: Write>(out: &Mutex<W>, envelopes: &[SessionEnvelope]) -> io::Result<()> {
    let mut out = lock(out);
    for line in envelopes.iter().filter_map(format_envelope) {
        writeln!(out, "{line}")?;
    }
    out.flush()
}

/// Runs a session on `input` until `/quit` or end of input. With a running
/// clock, device news is printed between prompts as it happens.
pub fn run_repl<R, W>(resources: Resources, config: &Config, profile: Option<&str>, input: R, output: W) -> io::Result<()>
where
    R: BufRead,
    W: Write + Send + 'static,
{
    let host = Arc::new(Mutex::new(SessionHost::new(resources, config, "repl")));
    let out = Arc::new(Mutex::new(output));
    let done = Arc::new(AtomicBool::new(false));
    let start = SessionEnvelope::client(EnvelopeType::SessionStart, json!({ "profile": profile }));
    let greeting = lock(&host).handle(start);
    print(&out, &greeting)?;

    let clock = (config.tick_ms > 0).then(|| {
        let (host, out, done, tick) = (host.clone(), out.clone(), done.clone(), config.tick_ms);
        thread::spawn(move || {
            while !done.load(Ordering::Relaxed) {
                thread::sleep(Duration::from_millis(tick));
                let news = lock(&host).tick(1);
                if print(&out, &news).is_err() {
                    break;
                }
            }
        })
    });

    let mut result = Ok(());
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let envelopes = if line == "/quit" {
            let bye = lock(&host).handle(SessionEnvelope::client(EnvelopeType::SessionEnd, serde_json::Value::Null));
            print(&out, &bye)?;
            break;
        } else if line == "/help" {
            writeln!(lock(&out), "{REPL_HELP}")?;
            continue;
        } else if let Some(cmd) = line.strip_prefix("/device") {
            match cmd.trim().parse::<DeviceCommand>() {
                Ok(command) => {
                    lock(&host).handle(SessionEnvelope::client(EnvelopeType::DeviceEvent, json!(command)))
                }
                Err(e) => {
                    writeln!(lock(&out), "error: {e}")?;
                    continue;
                }
            }
        } else {
            let mut host = lock(&host);
            if !host.is_open() {
                let start = SessionEnvelope::client(EnvelopeType::SessionStart, json!({ "profile": profile }));
                let greeting = host.handle(start);
                print(&out, &greeting)?;
            }
            host.handle(SessionEnvelope::utterance(line))
        };
        if let Err(e) = print(&out, &envelopes) {
            result = Err(e);
            break;
        }
    }
    done.store(true, Ordering::Relaxed);
    if let Some(clock) = clock {
        let _ = clock.join();
    }
    result
}
