//! Multifunction-printer simulator: the stand-in for the real device API.

mod catalog;
mod sim;

pub use catalog::{
    BlockCondition, DeviceFunction, DeviceManifest, FaultCode, FaultSpec, LayoutEntry, LayoutMap, OptionCatalog,
    OptionSpec, PartNotFound, SettingValue, TextFormat, TraySpec, ValueDomain, BUILTIN_DEVICE_MANIFEST,
};
pub use sim::{
    replay_job_statuses, validate_job, DeviceCommand, DeviceEvent, DeviceState, EventKind, Job, JobId, JobRequest,
    JobStatus, Simulator, SubmitError, Tray, ValidationResult, Violation,
};
