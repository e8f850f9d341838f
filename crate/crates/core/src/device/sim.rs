//! Deterministic multifunction-printer simulator.
//!
//! Time only moves through [`Simulator::advance`]; one tick prints one page
//! of the running job. Every state change is recorded in an append-only
//! event log that observers read with a cursor.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::catalog::{
    DeviceFunction, DeviceManifest, FaultCode, LayoutEntry, OptionCatalog, OptionSpec, PartNotFound,
    SettingValue,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JobId(pub u32);

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "job-{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", content = "fault", rename_all = "snake_case")]
pub enum JobStatus {
    Queued,
    Running,
    Completed,
    Failed(FaultCode),
}

impl JobStatus {
    pub fn is_terminal(&self) -> bool {
        matches!(self, JobStatus::Completed | JobStatus::Failed(_))
    }
}

/// What the caller asks the device to do.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobRequest {
    pub function: DeviceFunction,
    pub settings: BTreeMap<String, SettingValue>,
    pub source_pages: u32,
}

impl JobRequest {
    pub fn new(function: DeviceFunction) -> Self {
        JobRequest { function, settings: BTreeMap::new(), source_pages: 1 }
    }

    pub fn with(mut self, option: &str, value: SettingValue) -> Self {
        self.settings.insert(option.to_string(), value);
        self
    }

    pub fn pages(mut self, pages: u32) -> Self {
        self.source_pages = pages;
        self
    }

    pub fn quantity(&self) -> u32 {
        self.settings
            .get("quantity")
            .and_then(SettingValue::as_int)
            .map(|n| n.max(1) as u32)
            .unwrap_or(1)
    }

    /// Pages the job has to process: copies times originals for copy jobs,
    /// originals for everything else.
    pub fn total_units(&self) -> u32 {
        if self.function == DeviceFunction::Copy {
            self.quantity() * self.source_pages.max(1)
        } else {
            self.source_pages.max(1)
        }
    }

    /// Sheets of paper a copy job will consume.
    pub fn estimated_sheets(&self) -> u32 {
        if self.function.uses_paper() {
            self.total_units()
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    pub request: JobRequest,
    pub status: JobStatus,
    pub progress: u32,
}

impl Job {
    pub fn function(&self) -> DeviceFunction {
        self.request.function
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub option: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationResult {
    pub violations: Vec<Violation>,
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn domain_message(spec: &OptionSpec) -> String {
    use super::catalog::ValueDomain;
    match &spec.domain {
        ValueDomain::Range { min, max, .. } => format!("{} must be {min}..{max}", spec.id),
        other => format!("{} must be {}", spec.id, other.describe()),
    }
}

/// Checks a job against the catalog. Violations are data, not errors.
pub fn validate_job(job: &JobRequest, catalog: &OptionCatalog) -> ValidationResult {
    let mut violations = Vec::new();
    if !catalog.supports(job.function) {
        violations.push(Violation {
            option: None,
            message: format!("function not supported: {}", job.function),
        });
        return ValidationResult { violations };
    }
    if job.source_pages == 0 {
        violations.push(Violation { option: None, message: "source_pages must be positive".into() });
    }
    for (id, value) in &job.settings {
        match catalog.option(id) {
            None => violations.push(Violation { option: Some(id.clone()), message: format!("unknown option {id}") }),
            Some(spec) if !spec.applies_to(job.function) => violations.push(Violation {
                option: Some(id.clone()),
                message: format!("{id} does not apply to {}", job.function),
            }),
            Some(spec) if !spec.domain.contains(value) => {
                violations.push(Violation { option: Some(id.clone()), message: domain_message(spec) })
            }
            Some(_) => {}
        }
    }
    ValidationResult { violations }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    JobStarted,
    JobProgress,
    JobCompleted,
    JobFailed,
    FaultRaised,
    FaultCleared,
}

impl EventKind {
    /// Events the agent speaks about unprompted.
    pub fn is_announceable(&self) -> bool {
        !matches!(self, EventKind::JobStarted | EventKind::JobProgress)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceEvent {
    pub seq: u64,
    pub kind: EventKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub job_id: Option<JobId>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fault: Option<FaultCode>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tray {
    pub name: String,
    pub capacity: u32,
    pub sheets: u32,
}

/// Simulator truth: consumables, faults and jobs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceState {
    pub trays: Vec<Tray>,
    pub toner_level: u8,
    pub faults: BTreeSet<FaultCode>,
    pub output_tray: Vec<JobId>,
    pub feeder_loaded: bool,
    pub original_pages: u32,
    pub jobs: Vec<Job>,
    pub queue: VecDeque<JobId>,
    pub running: Option<JobId>,
    pub sheets_fed: u64,
}

impl DeviceState {
    pub fn paper_sheets(&self) -> u32 {
        self.trays.iter().map(|t| t.sheets).sum()
    }

    pub fn job(&self, id: JobId) -> Option<&Job> {
        self.jobs.iter().find(|j| j.id == id)
    }

    fn job_mut(&mut self, id: JobId) -> &mut Job {
        self.jobs.iter_mut().find(|j| j.id == id).expect("job exists")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubmitError {
    #[error("job is invalid: {}", .0.iter().map(|v| v.message.as_str()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

/// Operator-level commands used by scripts, the REPL and demo clients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum DeviceCommand {
    Fault { fault: FaultCode },
    Clear { fault: FaultCode },
    Advance { steps: u32 },
    Paper { tray: Option<usize>, sheets: u32 },
    Originals { pages: u32, feeder: bool },
    Toner { level: u8 },
}

impl FromStr for DeviceCommand {
    type Err = String;

    /// `fault <code>`, `clear <code>`, `advance <n>`, `paper [tray] <n>`,
    /// `originals <n> [glass]`, `toner <percent>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let words: Vec<&str> = s.split_whitespace().collect();
        let num = |w: Option<&&str>| -> Result<u32, String> {
            w.ok_or_else(|| format!("`{s}` needs a number"))?
                .parse::<u32>()
                .map_err(|e| format!("`{s}`: {e}"))
        };
        match words.first().copied() {
            Some("fault") | Some("inject") => {
                Ok(DeviceCommand::Fault { fault: words.get(1).ok_or("missing fault code")?.parse()? })
            }
            Some("clear") | Some("fix") => {
                Ok(DeviceCommand::Clear { fault: words.get(1).ok_or("missing fault code")?.parse()? })
            }
            Some("advance") | Some("tick") => Ok(DeviceCommand::Advance { steps: num(words.get(1)).unwrap_or(1) }),
            Some("paper") => match words.len() {
                2 => Ok(DeviceCommand::Paper { tray: None, sheets: num(words.get(1))? }),
                3 => Ok(DeviceCommand::Paper { tray: Some(num(words.get(1))? as usize), sheets: num(words.get(2))? }),
                _ => Err("usage: paper [tray] <sheets>".into()),
            },
            Some("originals") => Ok(DeviceCommand::Originals {
                pages: num(words.get(1))?,
                feeder: words.get(2).is_none_or(|w| *w != "glass"),
            }),
            Some("toner") => Ok(DeviceCommand::Toner { level: num(words.get(1))?.min(100) as u8 }),
            _ => Err(format!("unknown device command `{s}`")),
        }
    }
}

const TONER_PAGES_PER_PERCENT: u64 = 50;
const TONER_LOW_THRESHOLD: u8 = 10;

pub struct Simulator {
    manifest: Arc<DeviceManifest>,
    state: DeviceState,
    log: Vec<DeviceEvent>,
    next_job: u32,
}

impl Simulator {
    pub fn new(manifest: Arc<DeviceManifest>) -> Self {
        let trays = manifest
            .trays
            .iter()
            .map(|t| Tray { name: t.name.clone(), capacity: t.capacity, sheets: t.sheets })
            .collect::<Vec<_>>();
        let mut faults = BTreeSet::new();
        if trays.iter().all(|t| t.sheets == 0) {
            faults.insert(FaultCode::OutOfPaper);
        }
        Simulator {
            manifest,
            state: DeviceState {
                trays,
                toner_level: 100,
                faults,
                output_tray: Vec::new(),
                feeder_loaded: false,
                original_pages: 1,
                jobs: Vec::new(),
                queue: VecDeque::new(),
                running: None,
                sheets_fed: 0,
            },
            log: Vec::new(),
            next_job: 1,
        }
    }

    pub fn manifest(&self) -> &Arc<DeviceManifest> {
        &self.manifest
    }

    pub fn catalog(&self) -> &OptionCatalog {
        &self.manifest.catalog
    }

    pub fn state(&self) -> &DeviceState {
        &self.state
    }

    pub fn job(&self, id: JobId) -> Option<&Job> {
        self.state.job(id)
    }

    pub fn events(&self) -> &[DeviceEvent] {
        &self.log
    }

    pub fn events_since(&self, cursor: usize) -> &[DeviceEvent] {
        &self.log[cursor.min(self.log.len())..]
    }

    pub fn validate_job(&self, job: &JobRequest) -> ValidationResult {
        validate_job(job, &self.manifest.catalog)
    }

    pub fn catalog_query(&self, function: Option<DeviceFunction>) -> Vec<&OptionSpec> {
        self.manifest.catalog.query(function)
    }

    pub fn locate(&self, part: &str) -> Result<(&str, &LayoutEntry), PartNotFound> {
        self.manifest.layout.locate(part)
    }

    /// The first active fault that stops `job`, if any.
    pub fn blocking_fault(&self, job: &JobRequest) -> Option<FaultCode> {
        self.state.faults.iter().copied().find(|code| {
            self.manifest
                .fault(*code)
                .is_some_and(|spec| spec.blocks_job(job.function, &job.settings))
        })
    }

    fn emit(&mut self, kind: EventKind, job_id: Option<JobId>, fault: Option<FaultCode>, detail: String) -> DeviceEvent {
        let event = DeviceEvent { seq: self.log.len() as u64 + 1, kind, job_id, fault, detail };
        self.log.push(event.clone());
        event
    }

    fn fault_detail(&self, code: FaultCode) -> String {
        self.manifest
            .fault(code)
            .map(|f| f.detail.clone())
            .unwrap_or_else(|| format!("The machine reports {code}."))
    }

    /// Queues a job. Starts it at once when the device is idle; fails it at
    /// once when a blocking fault is active.
    pub fn submit(&mut self, request: JobRequest) -> Result<JobId, SubmitError> {
        let validation = self.validate_job(&request);
        if !validation.is_ok() {
            return Err(SubmitError::Invalid(validation.violations));
        }
        let id = JobId(self.next_job);
        self.next_job += 1;
        let blocked = self.blocking_fault(&request);
        self.state.jobs.push(Job { id, request, status: JobStatus::Queued, progress: 0 });
        if let Some(fault) = blocked {
            self.fail_job(id, fault);
        } else {
            self.state.queue.push_back(id);
            if self.state.running.is_none() {
                self.start_next();
            }
        }
        Ok(id)
    }

    fn fail_job(&mut self, id: JobId, fault: FaultCode) {
        let job = self.state.job_mut(id);
        job.status = JobStatus::Failed(fault);
        let function = job.function();
        if self.state.running == Some(id) {
            self.state.running = None;
        }
        self.state.queue.retain(|q| *q != id);
        let detail = format!("The {function} job stopped. {}", self.fault_detail(fault));
        self.emit(EventKind::JobFailed, Some(id), Some(fault), detail);
    }

    fn start_next(&mut self) {
        while self.state.running.is_none() {
            let Some(id) = self.state.queue.pop_front() else { return };
            let request = self.state.job(id).expect("queued job exists").request.clone();
            if let Some(fault) = self.blocking_fault(&request) {
                self.fail_job(id, fault);
                continue;
            }
            self.state.job_mut(id).status = JobStatus::Running;
            self.state.running = Some(id);
            let detail = format!(
                "The {} job started: {} page{} to process.",
                request.function,
                request.total_units(),
                if request.total_units() == 1 { "" } else { "s" }
            );
            self.emit(EventKind::JobStarted, Some(id), None, detail);
        }
    }

    fn take_sheet(&mut self) {
        let Some(tray) = self.state.trays.iter_mut().find(|t| t.sheets > 0) else { return };
        tray.sheets -= 1;
        self.state.sheets_fed += 1;
        if self.state.sheets_fed.is_multiple_of(TONER_PAGES_PER_PERCENT) {
            self.state.toner_level = self.state.toner_level.saturating_sub(1);
            if self.state.toner_level <= TONER_LOW_THRESHOLD && !self.state.faults.contains(&FaultCode::TonerLow) {
                self.raise(FaultCode::TonerLow);
            }
        }
        if self.state.paper_sheets() == 0 && !self.state.faults.contains(&FaultCode::OutOfPaper) {
            self.raise(FaultCode::OutOfPaper);
        }
    }

    fn raise(&mut self, code: FaultCode) -> DeviceEvent {
        self.state.faults.insert(code);
        let detail = self.fault_detail(code);
        self.emit(EventKind::FaultRaised, None, Some(code), detail)
    }

    fn step(&mut self) {
        if self.state.running.is_none() {
            self.start_next();
        }
        let Some(id) = self.state.running else { return };
        let request = self.state.job(id).expect("running job exists").request.clone();
        if let Some(fault) = self.blocking_fault(&request) {
            self.fail_job(id, fault);
            self.start_next();
            return;
        }
        if request.function.uses_paper() {
            self.take_sheet();
        }
        let total = request.total_units();
        let job = self.state.job_mut(id);
        job.progress += 1;
        let done = job.progress;
        self.emit(EventKind::JobProgress, Some(id), None, format!("Page {done} of {total} done."));
        if done >= total {
            self.state.job_mut(id).status = JobStatus::Completed;
            self.state.running = None;
            let detail = if request.function.uses_paper() {
                self.state.output_tray.push(id);
                format!("The {} job finished. The pages are in the output tray.", request.function)
            } else {
                format!("The {} job finished.", request.function)
            };
            self.emit(EventKind::JobCompleted, Some(id), None, detail);
            self.start_next();
        }
    }

    /// Moves logical time forward and returns the events it produced.
    pub fn advance(&mut self, steps: u32) -> Vec<DeviceEvent> {
        let start = self.log.len();
        for _ in 0..steps {
            self.step();
        }
        self.log[start..].to_vec()
    }

    /// Adds a fault. A running job that the fault blocks fails right away.
    pub fn inject_fault(&mut self, code: FaultCode) -> Vec<DeviceEvent> {
        if self.state.faults.contains(&code) {
            return Vec::new();
        }
        let start = self.log.len();
        if code == FaultCode::OutOfPaper {
            for tray in &mut self.state.trays {
                tray.sheets = 0;
            }
        }
        self.raise(code);
        if let Some(id) = self.state.running {
            let request = self.state.job(id).expect("running job exists").request.clone();
            if self.manifest.fault(code).is_some_and(|f| f.blocks_job(request.function, &request.settings)) {
                self.fail_job(id, code);
            }
        }
        self.log[start..].to_vec()
    }

    /// Removes a fault; clearing an absent fault produces nothing.
    pub fn clear_fault(&mut self, code: FaultCode) -> Vec<DeviceEvent> {
        if !self.state.faults.remove(&code) {
            return Vec::new();
        }
        match code {
            FaultCode::OutOfPaper => {
                for tray in &mut self.state.trays {
                    tray.sheets = tray.capacity;
                }
            }
            FaultCode::TonerLow => self.state.toner_level = 100,
            _ => {}
        }
        let name = self.manifest.fault(code).map(|f| f.name.clone()).unwrap_or_else(|| code.to_string());
        vec![self.emit(EventKind::FaultCleared, None, Some(code), format!("The {name} problem is cleared."))]
    }

    pub fn load_paper(&mut self, tray: Option<usize>, sheets: u32) -> Vec<DeviceEvent> {
        let index = tray.map(|t| t.saturating_sub(1)).unwrap_or(0).min(self.state.trays.len() - 1);
        let t = &mut self.state.trays[index];
        t.sheets = (t.sheets + sheets).min(t.capacity);
        if self.state.paper_sheets() > 0 && self.state.faults.contains(&FaultCode::OutOfPaper) {
            self.state.faults.remove(&FaultCode::OutOfPaper);
            let name = self.manifest.fault(FaultCode::OutOfPaper).map(|f| f.name.clone()).unwrap_or_default();
            return vec![self.emit(
                EventKind::FaultCleared,
                None,
                Some(FaultCode::OutOfPaper),
                format!("Paper loaded; the {name} problem is cleared."),
            )];
        }
        Vec::new()
    }

    pub fn load_originals(&mut self, pages: u32, feeder: bool) {
        self.state.original_pages = pages.max(1);
        self.state.feeder_loaded = feeder;
    }

    pub fn execute(&mut self, command: DeviceCommand) -> Vec<DeviceEvent> {
        match command {
            DeviceCommand::Fault { fault } => self.inject_fault(fault),
            DeviceCommand::Clear { fault } => self.clear_fault(fault),
            DeviceCommand::Advance { steps } => self.advance(steps),
            DeviceCommand::Paper { tray, sheets } => self.load_paper(tray, sheets),
            DeviceCommand::Originals { pages, feeder } => {
                self.load_originals(pages, feeder);
                Vec::new()
            }
            DeviceCommand::Toner { level } => {
                self.state.toner_level = level.min(100);
                if level > TONER_LOW_THRESHOLD {
                    self.clear_fault(FaultCode::TonerLow)
                } else {
                    self.inject_fault(FaultCode::TonerLow)
                }
            }
        }
    }
}

/// Rebuilds job statuses from an event list alone.
pub fn replay_job_statuses(events: &[DeviceEvent]) -> BTreeMap<JobId, JobStatus> {
    let mut out = BTreeMap::new();
    for e in events {
        let Some(id) = e.job_id else { continue };
        match e.kind {
            EventKind::JobStarted | EventKind::JobProgress => {
                out.insert(id, JobStatus::Running);
            }
            EventKind::JobCompleted => {
                out.insert(id, JobStatus::Completed);
            }
            EventKind::JobFailed => {
                out.insert(id, JobStatus::Failed(e.fault.expect("JobFailed carries a fault")));
            }
            EventKind::FaultRaised | EventKind::FaultCleared => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim() -> Simulator {
        Simulator::new(Arc::new(DeviceManifest::builtin()))
    }

    fn kinds(events: &[DeviceEvent]) -> Vec<EventKind> {
        events.iter().map(|e| e.kind).collect()
    }

    fn copy(quantity: i64) -> JobRequest {
        JobRequest::new(DeviceFunction::Copy).with("quantity", SettingValue::Int(quantity))
    }

    #[test]
    fn validate_examples() {
        let s = sim();
        let ok = copy(3).with("sides", SettingValue::text("double"));
        assert!(s.validate_job(&ok).is_ok());
        let zero = s.validate_job(&copy(0));
        assert_eq!(zero.violations[0].message, "quantity must be 1..999");
        assert_eq!(zero.violations[0].option.as_deref(), Some("quantity"));
        let print = s.validate_job(&JobRequest::new(DeviceFunction::Print));
        assert!(print.violations[0].message.starts_with("function not supported"));
    }

    #[test]
    fn inapplicable_option_is_a_violation() {
        let s = sim();
        let bad = JobRequest::new(DeviceFunction::Scan)
            .with("destination", SettingValue::text("usb"))
            .with("staple", SettingValue::Bool(true));
        let v = s.validate_job(&bad);
        assert_eq!(v.violations.len(), 1);
        assert!(v.violations[0].message.contains("does not apply"));
    }

    #[test]
    fn three_copies_hand_simulated() {
        // Oracle: each tick prints one sheet; 3 copies x 1 page = 3 ticks.
        let mut s = sim();
        for t in &mut s.state.trays {
            t.sheets = 0;
        }
        s.state.trays[0].sheets = 10;
        let start = s.events().len();
        s.submit(copy(3)).unwrap();
        s.advance(3);
        assert_eq!(
            kinds(s.events_since(start)),
            vec![
                EventKind::JobStarted,
                EventKind::JobProgress,
                EventKind::JobProgress,
                EventKind::JobProgress,
                EventKind::JobCompleted
            ]
        );
        assert_eq!(s.state().paper_sheets(), 7);
        assert_eq!(s.state().output_tray, vec![JobId(1)]);
    }

    #[test]
    fn zero_advance_leaves_job_running() {
        let mut s = sim();
        let id = s.submit(copy(2)).unwrap();
        assert_eq!(kinds(s.events()), vec![EventKind::JobStarted]);
        assert_eq!(s.job(id).unwrap().status, JobStatus::Running);
        assert!(s.advance(0).is_empty());
    }

    #[test]
    fn empty_trays_fail_immediately() {
        let mut s = sim();
        s.inject_fault(FaultCode::OutOfPaper);
        let id = s.submit(copy(1)).unwrap();
        let last = s.events().last().unwrap();
        assert_eq!(last.kind, EventKind::JobFailed);
        assert_eq!(last.fault, Some(FaultCode::OutOfPaper));
        assert_eq!(s.job(id).unwrap().status, JobStatus::Failed(FaultCode::OutOfPaper));
    }

    #[test]
    fn jam_mid_run_fails_running_job() {
        let mut s = sim();
        let id = s.submit(copy(5)).unwrap();
        s.advance(2);
        let events = s.inject_fault(FaultCode::PaperJam);
        assert_eq!(kinds(&events), vec![EventKind::FaultRaised, EventKind::JobFailed]);
        assert_eq!(s.job(id).unwrap().status, JobStatus::Failed(FaultCode::PaperJam));
        assert_eq!(s.job(id).unwrap().progress, 2);
        assert!(s.advance(3).is_empty());
    }

    #[test]
    fn clear_fault_present_and_absent() {
        let mut s = sim();
        s.inject_fault(FaultCode::PaperJam);
        let cleared = s.clear_fault(FaultCode::PaperJam);
        assert_eq!(kinds(&cleared), vec![EventKind::FaultCleared]);
        assert!(!cleared[0].detail.is_empty());
        assert!(s.clear_fault(FaultCode::PaperJam).is_empty());
    }

    #[test]
    fn running_out_mid_job() {
        let mut s = sim();
        for t in &mut s.state.trays {
            t.sheets = 0;
        }
        s.state.trays[1].sheets = 2;
        let id = s.submit(copy(4)).unwrap();
        let events = s.advance(4);
        assert!(kinds(&events).contains(&EventKind::FaultRaised));
        assert_eq!(s.job(id).unwrap().status, JobStatus::Failed(FaultCode::OutOfPaper));
        assert_eq!(s.job(id).unwrap().progress, 2);
        assert!(s.state().faults.contains(&FaultCode::OutOfPaper));
        s.load_paper(Some(1), 100);
        assert!(!s.state().faults.contains(&FaultCode::OutOfPaper));
    }

    #[test]
    fn stapler_empty_only_blocks_stapled_jobs() {
        let mut s = sim();
        s.inject_fault(FaultCode::StaplerEmpty);
        let plain = s.submit(copy(1)).unwrap();
        s.advance(1);
        assert_eq!(s.job(plain).unwrap().status, JobStatus::Completed);
        let stapled = s.submit(copy(1).with("staple", SettingValue::Bool(true))).unwrap();
        assert_eq!(s.job(stapled).unwrap().status, JobStatus::Failed(FaultCode::StaplerEmpty));
    }

    #[test]
    fn toner_low_does_not_block() {
        let mut s = sim();
        s.inject_fault(FaultCode::TonerLow);
        let id = s.submit(copy(2)).unwrap();
        s.advance(2);
        assert_eq!(s.job(id).unwrap().status, JobStatus::Completed);
    }

    #[test]
    fn scan_uses_no_paper_and_skips_output_tray() {
        let mut s = sim();
        let before = s.state().paper_sheets();
        let id = s
            .submit(JobRequest::new(DeviceFunction::Scan).with("destination", SettingValue::text("usb")).pages(3))
            .unwrap();
        s.advance(3);
        assert_eq!(s.job(id).unwrap().status, JobStatus::Completed);
        assert_eq!(s.state().paper_sheets(), before);
        assert!(s.state().output_tray.is_empty());
    }

    #[test]
    fn queued_jobs_run_in_order() {
        let mut s = sim();
        let a = s.submit(copy(2)).unwrap();
        let b = s.submit(copy(1)).unwrap();
        assert_eq!(s.job(b).unwrap().status, JobStatus::Queued);
        s.advance(3);
        assert_eq!(s.state().output_tray, vec![a, b]);
    }

    #[test]
    fn commands_parse() {
        assert_eq!("fault out_of_paper".parse(), Ok(DeviceCommand::Fault { fault: FaultCode::OutOfPaper }));
        assert_eq!("advance 4".parse(), Ok(DeviceCommand::Advance { steps: 4 }));
        assert_eq!("paper 2 100".parse(), Ok(DeviceCommand::Paper { tray: Some(2), sheets: 100 }));
        assert_eq!("originals 5".parse(), Ok(DeviceCommand::Originals { pages: 5, feeder: true }));
        assert!("explode".parse::<DeviceCommand>().is_err());
    }
}
