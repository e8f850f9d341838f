//! Capability catalog, physical layout and fault table.
//!
//! All of it is loaded from one JSON manifest so the option set can be
//! swapped without touching code. The built-in manifest lives in
//! `data/device.json`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::ManifestError;

/// High-level device functions. `Print` exists on the hardware but the
/// agent never offers it; the catalog rejects manifests that list it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceFunction {
    Print,
    Copy,
    Scan,
    Fax,
    Email,
}

impl DeviceFunction {
    pub const SUPPORTED: [DeviceFunction; 4] = [
        DeviceFunction::Copy,
        DeviceFunction::Scan,
        DeviceFunction::Fax,
        DeviceFunction::Email,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DeviceFunction::Print => "print",
            DeviceFunction::Copy => "copy",
            DeviceFunction::Scan => "scan",
            DeviceFunction::Fax => "fax",
            DeviceFunction::Email => "email",
        }
    }

    /// Whether jobs of this function put paper in the output tray.
    pub fn uses_paper(&self) -> bool {
        matches!(self, DeviceFunction::Copy | DeviceFunction::Print)
    }
}

impl fmt::Display for DeviceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DeviceFunction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "print" => Ok(DeviceFunction::Print),
            "copy" => Ok(DeviceFunction::Copy),
            "scan" => Ok(DeviceFunction::Scan),
            "fax" => Ok(DeviceFunction::Fax),
            "email" => Ok(DeviceFunction::Email),
            other => Err(format!("unknown function `{other}`")),
        }
    }
}

/// A typed setting value. Enum choices are carried as text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SettingValue {
    Bool(bool),
    Int(i64),
    Text(String),
}

impl SettingValue {
    pub fn text(s: impl Into<String>) -> Self {
        SettingValue::Text(s.into())
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            SettingValue::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            SettingValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            SettingValue::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for SettingValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SettingValue::Bool(b) => write!(f, "{b}"),
            SettingValue::Int(n) => write!(f, "{n}"),
            SettingValue::Text(s) => f.write_str(s),
        }
    }
}

impl From<bool> for SettingValue {
    fn from(b: bool) -> Self {
        SettingValue::Bool(b)
    }
}

impl From<i64> for SettingValue {
    fn from(n: i64) -> Self {
        SettingValue::Int(n)
    }
}

impl From<&str> for SettingValue {
    fn from(s: &str) -> Self {
        SettingValue::text(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextFormat {
    Phone,
    Email,
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ValueDomain {
    Enum { values: Vec<String> },
    Bool,
    Range { min: i64, max: i64, unit: String },
    Text { format: TextFormat },
}

/// Ranges wider than this count as a single free-entry selection.
const DISCRETE_RANGE_LIMIT: i64 = 10;

impl ValueDomain {
    pub fn contains(&self, value: &SettingValue) -> bool {
        match (self, value) {
            (ValueDomain::Enum { values }, SettingValue::Text(v)) => values.iter().any(|x| x == v),
            (ValueDomain::Bool, SettingValue::Bool(_)) => true,
            (ValueDomain::Range { min, max, .. }, SettingValue::Int(n)) => n >= min && n <= max,
            (ValueDomain::Text { format }, SettingValue::Text(s)) => match format {
                TextFormat::Phone => {
                    let digits = s.chars().filter(char::is_ascii_digit).count();
                    (3..=15).contains(&digits) && s.chars().all(|c| c.is_ascii_digit() || c == '-' || c == ' ')
                }
                TextFormat::Email => {
                    let mut parts = s.splitn(2, '@');
                    let local = parts.next().unwrap_or("");
                    let host = parts.next().unwrap_or("");
                    !local.is_empty() && host.contains('.') && !host.starts_with('.') && !host.ends_with('.')
                }
                TextFormat::Free => !s.trim().is_empty(),
            },
            _ => false,
        }
    }

    /// Number of distinct selections this domain offers a user.
    pub fn selection_count(&self) -> usize {
        match self {
            ValueDomain::Enum { values } => values.len(),
            ValueDomain::Bool => 2,
            ValueDomain::Range { min, max, .. } => {
                let span = max - min + 1;
                if span <= DISCRETE_RANGE_LIMIT {
                    span as usize
                } else {
                    1
                }
            }
            ValueDomain::Text { .. } => 1,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ValueDomain::Enum { values } => format!("one of {}", values.join(", ")),
            ValueDomain::Bool => "yes or no".to_string(),
            ValueDomain::Range { min, max, .. } => format!("{min}..{max}"),
            ValueDomain::Text { format } => match format {
                TextFormat::Phone => "a phone number".to_string(),
                TextFormat::Email => "an email address".to_string(),
                TextFormat::Free => "any text".to_string(),
            },
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, ValueDomain::Range { .. })
    }

    /// Nearest in-domain value for an out-of-range number.
    pub fn clamp(&self, value: &SettingValue) -> Option<SettingValue> {
        match (self, value) {
            (ValueDomain::Range { min, max, .. }, SettingValue::Int(n)) => {
                Some(SettingValue::Int((*n).clamp(*min, *max)))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptionSpec {
    pub id: String,
    pub label: String,
    pub functions: Vec<DeviceFunction>,
    #[serde(default)]
    pub required_for: Vec<DeviceFunction>,
    pub domain: ValueDomain,
    pub default: SettingValue,
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
    pub description: String,
    pub conversational: bool,
}

impl OptionSpec {
    pub fn applies_to(&self, function: DeviceFunction) -> bool {
        self.functions.contains(&function)
    }

    pub fn required_for(&self, function: DeviceFunction) -> bool {
        self.required_for.contains(&function)
    }

    /// Spoken form of a value, e.g. `double` -> "double-sided".
    pub fn value_label(&self, value: &SettingValue) -> String {
        if let Some(label) = self.labels.get(&value.to_string()) {
            return label.clone();
        }
        match (&self.domain, value) {
            (ValueDomain::Range { unit, .. }, SettingValue::Int(n)) if self.id == "quantity" => {
                if *n == 1 {
                    "1 copy".to_string()
                } else {
                    format!("{n} {unit}")
                }
            }
            (ValueDomain::Range { .. }, SettingValue::Int(n)) => {
                if *n > 0 {
                    format!("{} plus {n}", self.label)
                } else if *n < 0 {
                    format!("{} minus {}", self.label, -n)
                } else {
                    format!("normal {}", self.label)
                }
            }
            (ValueDomain::Text { format: TextFormat::Phone }, SettingValue::Text(s)) => {
                let digits: Vec<String> = s.chars().filter(char::is_ascii_digit).map(String::from).collect();
                format!("{} {}", self.label, digits.join(" "))
            }
            (ValueDomain::Text { .. }, v) => format!("{} {}", self.label, v),
            (_, v) => format!("{} {}", self.label, v).replace('_', " "),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultCode {
    PaperJam,
    OutOfPaper,
    TonerLow,
    FeederMisfeed,
    StaplerEmpty,
}

impl FaultCode {
    pub const ALL: [FaultCode; 5] = [
        FaultCode::PaperJam,
        FaultCode::OutOfPaper,
        FaultCode::TonerLow,
        FaultCode::FeederMisfeed,
        FaultCode::StaplerEmpty,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FaultCode::PaperJam => "paper_jam",
            FaultCode::OutOfPaper => "out_of_paper",
            FaultCode::TonerLow => "toner_low",
            FaultCode::FeederMisfeed => "feeder_misfeed",
            FaultCode::StaplerEmpty => "stapler_empty",
        }
    }
}

impl fmt::Display for FaultCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FaultCode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        FaultCode::ALL
            .iter()
            .copied()
            .find(|f| f.as_str() == key)
            .ok_or_else(|| format!("unknown fault `{s}`"))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockCondition {
    pub option: String,
    pub value: SettingValue,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FaultSpec {
    pub code: FaultCode,
    pub name: String,
    pub detail: String,
    #[serde(default)]
    pub blocks: Vec<DeviceFunction>,
    #[serde(default)]
    pub blocks_when: Option<BlockCondition>,
}

impl FaultSpec {
    pub fn blocks_job(&self, function: DeviceFunction, settings: &BTreeMap<String, SettingValue>) -> bool {
        if self.blocks.contains(&function) {
            return true;
        }
        match &self.blocks_when {
            Some(cond) => settings.get(&cond.option) == Some(&cond.value),
            None => false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraySpec {
    pub name: String,
    pub capacity: u32,
    pub sheets: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayoutEntry {
    pub name: String,
    pub location: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("I don't know where the {part} is")]
pub struct PartNotFound {
    pub part: String,
    pub known: Vec<String>,
}

/// Part id -> location prose, in manifest order.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LayoutMap(IndexMap<String, LayoutEntry>);

impl LayoutMap {
    pub fn locate(&self, part: &str) -> Result<(&str, &LayoutEntry), PartNotFound> {
        let key = part.trim().to_lowercase().replace([' ', '-'], "_");
        self.0
            .get_key_value(key.as_str())
            .or_else(|| self.0.iter().find(|(_, e)| e.name.eq_ignore_ascii_case(part.trim())))
            .map(|(k, e)| (k.as_str(), e))
            .ok_or_else(|| PartNotFound {
                part: part.to_string(),
                known: self.0.values().map(|e| e.name.clone()).collect(),
            })
    }

    pub fn contains(&self, part: &str) -> bool {
        self.locate(part).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &LayoutEntry)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The capability catalog: supported functions and every option.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptionCatalog {
    pub functions: Vec<DeviceFunction>,
    pub options: Vec<OptionSpec>,
}

impl OptionCatalog {
    pub fn supports(&self, function: DeviceFunction) -> bool {
        self.functions.contains(&function)
    }

    pub fn option(&self, id: &str) -> Option<&OptionSpec> {
        self.options.iter().find(|o| o.id == id)
    }

    /// Options that apply to `function` (or every option for `None`),
    /// in manifest order.
    pub fn query(&self, function: Option<DeviceFunction>) -> Vec<&OptionSpec> {
        self.options
            .iter()
            .filter(|o| function.is_none_or(|f| o.applies_to(f)))
            .collect()
    }

    pub fn required_slots(&self, function: DeviceFunction) -> Vec<&OptionSpec> {
        self.options.iter().filter(|o| o.required_for(function)).collect()
    }

    pub fn selection_count(&self) -> usize {
        self.options.iter().map(|o| o.domain.selection_count()).sum()
    }

    pub fn conversational_selection_count(&self) -> usize {
        self.options
            .iter()
            .filter(|o| o.conversational)
            .map(|o| o.domain.selection_count())
            .sum()
    }
}

/// Everything in the device manifest file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviceManifest {
    pub version: u32,
    #[serde(flatten)]
    pub catalog: OptionCatalog,
    pub trays: Vec<TraySpec>,
    pub layout: LayoutMap,
    pub faults: Vec<FaultSpec>,
}

pub const BUILTIN_DEVICE_MANIFEST: &str = include_str!("../../data/device.json");

impl DeviceManifest {
    pub fn from_json(text: &str) -> Result<Self, ManifestError> {
        let manifest: DeviceManifest =
            serde_json::from_str(text).map_err(|e| ManifestError::Parse { file: "device", source: e })?;
        let problems = manifest.problems();
        if problems.is_empty() {
            Ok(manifest)
        } else {
            Err(ManifestError::Invalid { file: "device", problems })
        }
    }

    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_DEVICE_MANIFEST).expect("built-in device manifest is valid")
    }

    pub fn fault(&self, code: FaultCode) -> Option<&FaultSpec> {
        self.faults.iter().find(|f| f.code == code)
    }

    /// Structural problems; empty when the manifest is usable.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let cat = &self.catalog;
        if cat.supports(DeviceFunction::Print) {
            out.push("`print` must not be listed as a supported function".to_string());
        }
        let mut seen = std::collections::BTreeSet::new();
        for o in &cat.options {
            if !seen.insert(o.id.as_str()) {
                out.push(format!("duplicate option id `{}`", o.id));
            }
            if o.description.trim().is_empty() {
                out.push(format!("option `{}` has no description", o.id));
            }
            if o.functions.is_empty() {
                out.push(format!("option `{}` applies to no function", o.id));
            }
            for f in &o.functions {
                if !cat.supports(*f) {
                    out.push(format!("option `{}` names unsupported function `{f}`", o.id));
                }
            }
            for f in &o.required_for {
                if !o.functions.contains(f) {
                    out.push(format!("option `{}` is required for `{f}` but does not apply to it", o.id));
                }
            }
            let text_default_ok = matches!(o.domain, ValueDomain::Text { .. })
                && o.default == SettingValue::Text(String::new());
            if !text_default_ok && !o.domain.contains(&o.default) {
                out.push(format!("option `{}` default {} is outside {}", o.id, o.default, o.domain.describe()));
            }
        }
        for f in &cat.functions {
            if cat.required_slots(*f).is_empty() {
                out.push(format!("function `{f}` has no required option"));
            }
        }
        for code in FaultCode::ALL {
            match self.fault(code) {
                None => out.push(format!("fault `{code}` has no entry")),
                Some(spec) if spec.detail.trim().is_empty() => {
                    out.push(format!("fault `{code}` has no detail prose"))
                }
                _ => {}
            }
        }
        if self.trays.is_empty() {
            out.push("at least one paper tray is required".to_string());
        }
        for t in &self.trays {
            if t.sheets > t.capacity {
                out.push(format!("{} holds more sheets than its capacity", t.name));
            }
        }
        out
    }
}
