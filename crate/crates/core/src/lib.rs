pub mod assist;
pub mod device;
pub mod dialog;
pub mod error;
pub mod nlg;
pub mod nlu;
pub mod resources;
pub mod service;

pub use resources::{ManifestPaths, Resources};
pub use error::{Error, ManifestError, Result};
