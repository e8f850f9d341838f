mod action;
mod engine;
mod state;

pub use action::*;
pub use engine::*;
pub use state::*;
