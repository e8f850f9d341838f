//! Newline-delimited JSON envelopes over TCP, one session per connection.

use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};
use std::thread;
use std::time::Duration;

use crate::device::Simulator;
use crate::dialog::SharedDevice;
use crate::resources::Resources;

use super::config::Config;
use super::envelope::{EnvelopeType, SessionEnvelope};
use super::session::SessionHost;

pub struct Server {
    listener: TcpListener,
    resources: Resources,
    config: Config,
    shared: Option<SharedDevice>,
    sessions: AtomicU64,
}

struct Connection {
    host: SessionHost,
    writer: TcpStream,
}

impl Connection {
    fn send(&mut self, envelopes: Vec<SessionEnvelope>) -> io::Result<()> {
        for e in envelopes {
            self.writer.write_all((e.to_line() + "\n").as_bytes())?;
        }
        self.writer.flush()
    }
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl Server {
    pub fn bind(resources: Resources, config: Config) -> io::Result<Self> {
        let listener = TcpListener::bind(&config.listen)?;
        let shared = config
            .shared_device
            .then(|| Arc::new(Mutex::new(Simulator::new(resources.manifest.clone()))));
        Ok(Server { listener, resources, config, shared, sessions: AtomicU64::new(0) })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accepts connections until the listener fails.
    pub fn run(self) -> io::Result<()> {
        let server = Arc::new(self);
        if let (Some(device), tick) = (server.shared.clone(), server.config.tick_ms) {
            if tick > 0 {
                thread::spawn(move || loop {
                    thread::sleep(Duration::from_millis(tick));
                    lock(&device).advance(1);
                });
            }
        }
        for stream in server.listener.incoming() {
            let stream = stream?;
            let server = server.clone();
            thread::spawn(move || {
                let _ = server.serve(stream);
            });
        }
        Ok(())
    }

    /// Runs the server on a background thread.
    pub fn spawn(self) -> thread::JoinHandle<io::Result<()>> {
        thread::spawn(move || self.run())
    }

    fn serve(&self, stream: TcpStream) -> io::Result<()> {
        let n = self.sessions.fetch_add(1, Ordering::Relaxed) + 1;
        let id = format!("s{n}");
        let host = match &self.shared {
            Some(device) => SessionHost::with_device(self.resources.clone(), &self.config, device.clone(), id),
            None => SessionHost::new(self.resources.clone(), &self.config, id),
        };
        let reader = BufReader::new(stream.try_clone()?);
        let conn = Arc::new(Mutex::new(Connection { host, writer: stream }));
        let closed = Arc::new(AtomicBool::new(false));

        if self.config.tick_ms > 0 {
            // A shared device is advanced by the server-wide clock; each session only listens.
            let steps = if self.shared.is_some() { 0 } else { 1 };
            let (conn, closed, tick) = (conn.clone(), closed.clone(), self.config.tick_ms);
            thread::spawn(move || {
                while !closed.load(Ordering::Relaxed) {
                    thread::sleep(Duration::from_millis(tick));
                    let mut c = lock(&conn);
                    let out = c.host.tick(steps);
                    if c.send(out).is_err() {
                        break;
                    }
                }
            });
        }

        let mut result = Ok(());
        for line in reader.lines() {
            let line = match line {
                Ok(line) => line,
                Err(e) => {
                    result = Err(e);
                    break;
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            let mut c = lock(&conn);
            let out = c.host.handle_line(&line);
            if let Err(e) = c.send(out) {
                result = Err(e);
                break;
            }
        }
        closed.store(true, Ordering::Relaxed);
        // A dropped connection ends the session the same way session.end does.
        let mut c = lock(&conn);
        if c.host.is_open() {
            c.host.handle(SessionEnvelope::client(EnvelopeType::SessionEnd, serde_json::Value::Null));
        }
        result
    }
}
