//! Starts the server on a free port and talks to it as a client would.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;

use mfp_agent::service::{format_envelope, Config, EnvelopeType, Server, SessionEnvelope};
use mfp_agent::Resources;

fn main() -> std::io::Result<()> {
    let config = Config { listen: "127.0.0.1:0".into(), tick_ms: 0, ..Config::default() };
    let server = Server::bind(Resources::builtin(), config)?;
    let addr = server.local_addr()?;
    server.spawn();
    println!("server on {addr}");

    let stream = TcpStream::connect(addr)?;
    let mut writer = stream.try_clone()?;
    let mut reader = BufReader::new(stream);
    let lines = [
        r#"{"type":"session.start","payload":{"returning":true}}"#,
        r#"{"type":"user.utterance","payload":{"text":"scan this to my thumb drive in color"}}"#,
        r#"this is not json"#,
        r#"{"type":"device.event","payload":{"command":"fault","fault":"toner_low"}}"#,
        r#"{"type":"session.end"}"#,
    ];
    for line in lines {
        println!("> {line}");
        writeln!(writer, "{line}")?;
        // Every request is answered by at least one envelope; read until the batch ends.
        loop {
            let mut reply = String::new();
            reader.read_line(&mut reply)?;
            let envelope: SessionEnvelope = serde_json::from_str(&reply).expect("server speaks envelopes");
            let shown = format_envelope(&envelope).unwrap_or_else(|| "device.state".to_string());
            println!("< #{} {}", envelope.seq, shown);
            let batch_done = match envelope.kind {
                EnvelopeType::DeviceState | EnvelopeType::Error => true,
                EnvelopeType::AgentResponse => line.contains("utterance") || line.contains("session.end"),
                _ => false,
            };
            if batch_done {
                break;
            }
        }
    }
    Ok(())
}
