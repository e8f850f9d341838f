//! Hosting sessions: the envelope protocol, TCP server, REPL and script runner.

mod config;
mod envelope;
mod profile;
mod repl;
mod script;
mod server;
mod session;

pub use config::*;
pub use envelope::*;
pub use profile::*;
pub use repl::*;
pub use script::*;
pub use server::*;
pub use session::*;
