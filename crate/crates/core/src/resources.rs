//! The four manifests loaded together and checked against each other.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assist::KnowledgeBase;
use crate::device::{DeviceFunction, DeviceManifest, BUILTIN_DEVICE_MANIFEST};
use crate::error::ManifestError;
use crate::nlg::{Renderer, TemplateSet, BUILTIN_TEMPLATES};
use crate::nlu::Grammar;

/// Optional overrides for the built-in manifests.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManifestPaths {
    pub device: Option<PathBuf>,
    pub grammar: Option<PathBuf>,
    pub knowledge: Option<PathBuf>,
    pub templates: Option<PathBuf>,
}

/// Walkthrough offered after repeated misses while setting up a task.
pub fn task_procedure(function: DeviceFunction) -> &'static str {
    match function {
        DeviceFunction::Copy | DeviceFunction::Print => "make_copy",
        DeviceFunction::Scan => "scan_document",
        DeviceFunction::Fax => "send_fax",
        DeviceFunction::Email => "send_email",
    }
}

/// Counts reported by `validate-manifests`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogReport {
    pub options: usize,
    pub selections: usize,
    pub conversational_selections: usize,
    pub grammar_rules: usize,
    pub topics: usize,
    pub procedures: usize,
    pub templates: usize,
}

impl CatalogReport {
    /// Selectable option values the catalog must offer.
    pub const MIN_SELECTIONS: usize = 90;
    /// How many of those must be reachable by conversation.
    pub const MIN_CONVERSATIONAL: usize = 45;

    /// Shortfalls against the minimum catalog size.
    pub fn scale_problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.selections < Self::MIN_SELECTIONS {
            out.push(format!("{} option values, need at least {}", self.selections, Self::MIN_SELECTIONS));
        }
        if self.conversational_selections < Self::MIN_CONVERSATIONAL {
            out.push(format!(
                "{} conversational option values, need at least {}",
                self.conversational_selections,
                Self::MIN_CONVERSATIONAL
            ));
        }
        out
    }
}

impl std::fmt::Display for CatalogReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "options                   {}", self.options)?;
        writeln!(f, "option values             {}", self.selections)?;
        writeln!(f, "conversational values     {}", self.conversational_selections)?;
        writeln!(f, "grammar rules             {}", self.grammar_rules)?;
        writeln!(f, "help topics               {}", self.topics)?;
        writeln!(f, "procedures                {}", self.procedures)?;
        write!(f, "response templates        {}", self.templates)
    }
}

/// Shared, read-only resources for every session.
#[derive(Debug, Clone)]
pub struct Resources {
    pub manifest: Arc<DeviceManifest>,
    pub grammar: Arc<Grammar>,
    pub knowledge: Arc<KnowledgeBase>,
    pub renderer: Arc<Renderer>,
}

fn read(path: &Path) -> Result<String, ManifestError> {
    std::fs::read_to_string(path).map_err(|source| ManifestError::Io { path: path.display().to_string(), source })
}

impl Resources {
    pub fn builtin() -> Self {
        Self::load(&ManifestPaths::default()).expect("built-in manifests are consistent")
    }

    pub fn load(paths: &ManifestPaths) -> Result<Self, ManifestError> {
        let text = |p: &Option<PathBuf>, builtin: &'static str| -> Result<String, ManifestError> {
            match p {
                Some(path) => read(path),
                None => Ok(builtin.to_string()),
            }
        };
        let manifest = Arc::new(DeviceManifest::from_json(&text(&paths.device, BUILTIN_DEVICE_MANIFEST)?)?);
        let grammar = Grammar::from_json(&text(&paths.grammar, crate::nlu::BUILTIN_GRAMMAR)?, &manifest.catalog)?;
        let knowledge = KnowledgeBase::from_json(&text(&paths.knowledge, crate::assist::BUILTIN_KNOWLEDGE)?, &manifest)?;
        let templates = TemplateSet::from_json(&text(&paths.templates, BUILTIN_TEMPLATES)?)?;
        let resources = Resources {
            renderer: Arc::new(Renderer::new(templates, manifest.clone())),
            grammar: Arc::new(grammar),
            knowledge: Arc::new(knowledge),
            manifest,
        };
        let problems = resources.problems();
        if problems.is_empty() {
            Ok(resources)
        } else {
            Err(ManifestError::Invalid { file: "combined", problems })
        }
    }

    /// References between manifests that do not resolve.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let registry = &self.grammar.registry;
        let values = |slot: &str| -> Vec<String> {
            registry
                .slot(slot)
                .map(|s| s.synonyms().map(|(_, v)| v.to_string()).collect())
                .unwrap_or_default()
        };
        for part in values("part") {
            if !self.manifest.layout.contains(&part) {
                out.push(format!("grammar part `{part}` is not in the layout"));
            }
        }
        for topic in values("topic") {
            if self.knowledge.topic(&topic).is_none() {
                out.push(format!("grammar topic `{topic}` has no help topic"));
            }
        }
        for procedure in values("procedure") {
            if self.knowledge.procedure(&procedure).is_none() {
                out.push(format!("grammar procedure `{procedure}` has no procedure"));
            }
        }
        for f in &self.manifest.catalog.functions {
            if self.knowledge.procedure(task_procedure(*f)).is_none() {
                out.push(format!("no walkthrough for `{f}`"));
            }
        }
        if self.knowledge.topic("troubleshooting").is_none() {
            out.push("help topic `troubleshooting` is missing".to_string());
        }
        out
    }

    pub fn report(&self) -> CatalogReport {
        let catalog = &self.manifest.catalog;
        CatalogReport {
            options: catalog.options.len(),
            selections: catalog.selection_count(),
            conversational_selections: catalog.conversational_selection_count(),
            grammar_rules: self.grammar.rules.len(),
            topics: self.knowledge.topics.len(),
            procedures: self.knowledge.procedures.len(),
            templates: self.renderer.templates().templates.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_manifests_cross_check() {
        let r = Resources::builtin();
        assert!(r.problems().is_empty(), "{:?}", r.problems());
        let report = r.report();
        assert!(report.scale_problems().is_empty(), "{report:?}");
    }

    #[test]
    fn missing_override_file_is_an_io_error() {
        let paths = ManifestPaths { grammar: Some("/nonexistent/grammar.json".into()), ..Default::default() };
        assert!(matches!(Resources::load(&paths), Err(ManifestError::Io { .. })));
    }
}
