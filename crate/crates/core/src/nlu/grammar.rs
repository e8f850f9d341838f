//! Grammar file loading: slot registry, lexicons and production rules.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;

use super::acts::{ActKind, ContextFilter};
use super::normalize::normalize_words;
use crate::device::{DeviceFunction, OptionCatalog, SettingValue, TextFormat, ValueDomain};
use crate::error::ManifestError;

pub const BUILTIN_GRAMMAR: &str = include_str!("../../data/grammar.json");

/// Maximum number of tokens a `...` gap may skip.
pub const MAX_GAP: usize = 5;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrammar {
    version: u32,
    slots: Vec<RawSlot>,
    rules: Vec<RawRule>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSlot {
    id: String,
    #[serde(rename = "type")]
    kind: Option<String>,
    #[serde(default)]
    internal: bool,
    #[serde(default)]
    lexicon: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    id: String,
    priority: i32,
    #[serde(default)]
    context: Option<String>,
    #[serde(default)]
    overlap_group: Option<String>,
    #[serde(default)]
    unattributed: Vec<String>,
    patterns: Vec<Vec<String>>,
    acts: Vec<RawAct>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAct {
    kind: ActKind,
    #[serde(default)]
    slots: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    span: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub(crate) struct LexEntry {
    pub phrase: String,
    pub tokens: Vec<String>,
    pub value: SettingValue,
}

/// One slot: its value domain, the functions it applies to, and its synonym lexicon.
#[derive(Debug, Clone)]
pub struct SlotDef {
    pub id: String,
    pub domain: ValueDomain,
    pub functions: Vec<DeviceFunction>,
    /// Internal slots (part, topic, ...) carry request arguments, not job settings.
    pub internal: bool,
    pub(crate) lexicon: Vec<LexEntry>,
}

impl SlotDef {
    pub fn applies_to(&self, function: DeviceFunction) -> bool {
        self.functions.contains(&function)
    }

    /// (synonym, canonical value) pairs, longest synonym first.
    pub fn synonyms(&self) -> impl Iterator<Item = (&str, &SettingValue)> {
        self.lexicon.iter().map(|e| (e.phrase.as_str(), &e.value))
    }
}

#[derive(Debug, Clone, Default)]
pub struct SlotRegistry {
    slots: Vec<SlotDef>,
}

impl SlotRegistry {
    pub fn slot(&self, id: &str) -> Option<&SlotDef> {
        self.slots.iter().find(|s| s.id == id)
    }

    pub fn slots(&self) -> impl Iterator<Item = &SlotDef> {
        self.slots.iter()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.slots.iter().position(|s| s.id == id)
    }

    pub(crate) fn by_index(&self, i: usize) -> &SlotDef {
        &self.slots[i]
    }

    pub fn is_numeric(&self, id: &str) -> bool {
        self.slot(id).is_some_and(|s| s.domain.is_numeric())
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Element {
    Words(Vec<String>),
    Optional(Vec<String>),
    Gap,
    Num,
    Digits,
    Email,
    Slot(usize),
    AnySlot,
}

impl Element {
    pub fn captures(&self) -> bool {
        matches!(self, Element::Num | Element::Digits | Element::Email | Element::Slot(_) | Element::AnySlot)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum SlotKey {
    Named(String),
    Expected,
    /// `"*"`: the slot named by an `@*` or `@slot` capture.
    Captured,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum ValueRef {
    Literal(SettingValue),
    Capture(usize),
    Negated(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct ActTemplate {
    pub kind: ActKind,
    pub slots: Vec<(SlotKey, ValueRef)>,
    pub span: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct GrammarRule {
    pub id: String,
    pub priority: i32,
    pub context: ContextFilter,
    pub overlap_group: Option<String>,
    pub(crate) unattributed: Vec<String>,
    pub(crate) patterns: Vec<Vec<Element>>,
    pub(crate) acts: Vec<ActTemplate>,
}

/// Compiled grammar: the slot registry plus ordered rules.
#[derive(Debug, Clone)]
pub struct Grammar {
    pub version: u32,
    pub registry: SlotRegistry,
    pub rules: Vec<GrammarRule>,
}

fn lexicon_value(domain: &ValueDomain, key: &str) -> Option<SettingValue> {
    let value = match domain {
        ValueDomain::Bool => SettingValue::Bool(key.parse().ok()?),
        ValueDomain::Range { .. } => SettingValue::Int(key.parse().ok()?),
        ValueDomain::Enum { .. } | ValueDomain::Text { .. } => SettingValue::text(key),
    };
    domain.contains(&value).then_some(value)
}

fn literal_value(v: &serde_json::Value) -> Option<SettingValue> {
    match v {
        serde_json::Value::Bool(b) => Some(SettingValue::Bool(*b)),
        serde_json::Value::Number(n) => n.as_i64().map(SettingValue::Int),
        serde_json::Value::String(s) => Some(SettingValue::text(s.clone())),
        _ => None,
    }
}

struct Compiler<'a> {
    problems: Vec<String>,
    registry: &'a SlotRegistry,
}

impl Compiler<'_> {
    fn element(&mut self, rule: &str, raw: &str) -> Option<Element> {
        let el = match raw {
            "..." => Element::Gap,
            "<num>" => Element::Num,
            "<digits>" => Element::Digits,
            "<email>" => Element::Email,
            "@*" => Element::AnySlot,
            _ if raw.starts_with('@') => match self.registry.index_of(&raw[1..]) {
                Some(i) => Element::Slot(i),
                None => {
                    self.problems.push(format!("rule {rule}: unknown slot {raw}"));
                    return None;
                }
            },
            _ if raw.starts_with('<') => {
                self.problems.push(format!("rule {rule}: unknown capture {raw}"));
                return None;
            }
            _ => {
                let (optional, body) = match raw.strip_prefix('?') {
                    Some(rest) => (true, rest),
                    None => (false, raw),
                };
                let mut words = Vec::new();
                for alt in body.split('|') {
                    let norm = normalize_words(alt);
                    if norm.len() != 1 {
                        self.problems.push(format!("rule {rule}: element '{raw}' must be single words"));
                        return None;
                    }
                    words.push(norm.into_iter().next().unwrap_or_default());
                }
                if optional {
                    Element::Optional(words)
                } else {
                    Element::Words(words)
                }
            }
        };
        Some(el)
    }

    fn pattern(&mut self, rule: &str, raw: &[String]) -> Option<Vec<Element>> {
        let elements: Vec<Element> = raw.iter().map(|r| self.element(rule, r)).collect::<Option<_>>()?;
        let solid = |e: &Element| !matches!(e, Element::Gap | Element::Optional(_));
        if !elements.iter().any(solid) {
            self.problems.push(format!("rule {rule}: pattern {raw:?} has no required element"));
        }
        if matches!(elements.first(), Some(Element::Gap)) || matches!(elements.last(), Some(Element::Gap)) {
            self.problems.push(format!("rule {rule}: a gap cannot start or end a pattern"));
        }
        Some(elements)
    }

    fn value_ref(&mut self, rule: &str, raw: &serde_json::Value, captures: usize) -> Option<ValueRef> {
        let check = |i: usize, problems: &mut Vec<String>| {
            if i >= captures {
                problems.push(format!("rule {rule}: capture ${i} out of range"));
            }
        };
        if let Some(s) = raw.as_str() {
            if let Some(n) = s.strip_prefix("-$").and_then(|n| n.parse().ok()) {
                check(n, &mut self.problems);
                return Some(ValueRef::Negated(n));
            }
            if let Some(n) = s.strip_prefix('$').and_then(|n| n.parse().ok()) {
                check(n, &mut self.problems);
                return Some(ValueRef::Capture(n));
            }
        }
        match literal_value(raw) {
            Some(v) => Some(ValueRef::Literal(v)),
            None => {
                self.problems.push(format!("rule {rule}: unsupported slot value {raw}"));
                None
            }
        }
    }

    fn rule(&mut self, raw: &RawRule) -> Option<GrammarRule> {
        let id = raw.id.as_str();
        let context = match raw.context.as_deref().map(str::parse::<ContextFilter>).transpose() {
            Ok(c) => c.unwrap_or(ContextFilter::Any),
            Err(e) => {
                self.problems.push(format!("rule {id}: {e}"));
                return None;
            }
        };
        if let ContextFilter::Expecting(slot) = &context {
            if self.registry.slot(slot).is_none() {
                self.problems.push(format!("rule {id}: context names unknown slot {slot}"));
            }
        }
        if raw.patterns.is_empty() {
            self.problems.push(format!("rule {id}: no patterns"));
        }
        let patterns: Vec<Vec<Element>> = raw.patterns.iter().filter_map(|p| self.pattern(id, p)).collect();
        let capture_counts: BTreeSet<usize> =
            patterns.iter().map(|p| p.iter().filter(|e| e.captures()).count()).collect();
        if capture_counts.len() > 1 {
            self.problems.push(format!("rule {id}: patterns disagree on capture count"));
        }
        let captures = capture_counts.into_iter().next().unwrap_or(0);
        let min_len = patterns.iter().map(Vec::len).min().unwrap_or(0);

        if raw.acts.is_empty() {
            self.problems.push(format!("rule {id}: produces no acts"));
        }
        let mut acts = Vec::new();
        let mut claimed = BTreeSet::new();
        for act in &raw.acts {
            let mut slots = Vec::new();
            for (key, value) in &act.slots {
                let slot_key = match key.as_str() {
                    "*" => SlotKey::Captured,
                    "$expected" => SlotKey::Expected,
                    name => {
                        if self.registry.slot(name).is_none() {
                            self.problems.push(format!("rule {id}: unknown slot {name}"));
                        }
                        SlotKey::Named(name.to_string())
                    }
                };
                let Some(value) = self.value_ref(id, value, captures) else { continue };
                if let (SlotKey::Named(name), ValueRef::Literal(v)) = (&slot_key, &value) {
                    if let Some(def) = self.registry.slot(name) {
                        if !def.domain.contains(v) {
                            self.problems.push(format!("rule {id}: literal {v} outside the domain of {name}"));
                        }
                    }
                }
                slots.push((slot_key, value));
            }
            match act.kind {
                ActKind::Inform if slots.is_empty() => {
                    self.problems.push(format!("rule {id}: Inform needs at least one slot"));
                }
                ActKind::Unknown => self.problems.push(format!("rule {id}: rules cannot produce Unknown")),
                _ => {}
            }
            if let Some(span) = &act.span {
                for &i in span {
                    if i >= min_len {
                        self.problems.push(format!("rule {id}: span element {i} out of range"));
                    }
                    if !claimed.insert(i) {
                        self.problems.push(format!("rule {id}: acts share span element {i}"));
                    }
                }
            } else if raw.acts.len() > 1 {
                self.problems.push(format!("rule {id}: multi-act rules need an explicit span per act"));
            }
            acts.push(ActTemplate { kind: act.kind, slots, span: act.span.clone() });
        }
        for slot in &raw.unattributed {
            if !self.registry.is_numeric(slot) {
                self.problems.push(format!("rule {id}: unattributed slot {slot} is not numeric"));
            }
        }
        Some(GrammarRule {
            id: raw.id.clone(),
            priority: raw.priority,
            context,
            overlap_group: raw.overlap_group.clone(),
            unattributed: raw.unattributed.clone(),
            patterns,
            acts,
        })
    }
}

fn build_registry(raw: &[RawSlot], catalog: &OptionCatalog, problems: &mut Vec<String>) -> SlotRegistry {
    let mut slots = Vec::new();
    let mut seen = BTreeSet::new();
    for slot in raw {
        if !seen.insert(slot.id.clone()) {
            problems.push(format!("duplicate slot {}", slot.id));
            continue;
        }
        let (domain, functions) = if slot.internal {
            let domain = match slot.kind.as_deref() {
                Some("enum") => ValueDomain::Enum { values: slot.lexicon.keys().cloned().collect() },
                Some("bool") => ValueDomain::Bool,
                Some("text") => ValueDomain::Text { format: TextFormat::Free },
                other => {
                    problems.push(format!("slot {}: internal slots need a type, got {other:?}", slot.id));
                    continue;
                }
            };
            (domain, Vec::new())
        } else {
            match catalog.option(&slot.id) {
                Some(opt) if opt.conversational => (opt.domain.clone(), opt.functions.clone()),
                Some(_) => {
                    problems.push(format!("slot {} maps to a non-conversational option", slot.id));
                    continue;
                }
                None => {
                    problems.push(format!("slot {} has no catalog option", slot.id));
                    continue;
                }
            }
        };
        let mut lexicon = Vec::new();
        let mut owner: BTreeMap<Vec<String>, SettingValue> = BTreeMap::new();
        for (key, synonyms) in &slot.lexicon {
            let Some(value) = lexicon_value(&domain, key) else {
                problems.push(format!("slot {}: lexicon value {key} is outside its domain", slot.id));
                continue;
            };
            for phrase in synonyms {
                let tokens = normalize_words(phrase);
                if tokens.is_empty() {
                    problems.push(format!("slot {}: empty synonym for {key}", slot.id));
                    continue;
                }
                if let Some(prev) = owner.get(&tokens) {
                    if *prev != value {
                        problems.push(format!(
                            "slot {}: synonym '{phrase}' maps to both {prev} and {value}",
                            slot.id
                        ));
                    }
                    continue;
                }
                owner.insert(tokens.clone(), value.clone());
                lexicon.push(LexEntry { phrase: phrase.clone(), tokens, value: value.clone() });
            }
        }
        lexicon.sort_by_key(|e| std::cmp::Reverse(e.tokens.len()));
        slots.push(SlotDef { id: slot.id.clone(), domain, functions, internal: slot.internal, lexicon });
    }
    for opt in catalog.options.iter().filter(|o| o.conversational) {
        if !slots.iter().any(|s| s.id == opt.id) {
            problems.push(format!("conversational option {} has no slot", opt.id));
        }
    }
    SlotRegistry { slots }
}

fn check_priorities(rules: &[GrammarRule], problems: &mut Vec<String>) {
    let mut classes: BTreeMap<(String, i32), Vec<&GrammarRule>> = BTreeMap::new();
    for rule in rules {
        classes.entry((rule.context.to_string(), rule.priority)).or_default().push(rule);
    }
    for ((context, priority), group) in classes {
        if group.len() < 2 {
            continue;
        }
        let shared = group[0].overlap_group.as_ref();
        let ok = shared.is_some() && group.iter().all(|r| r.overlap_group.as_ref() == shared);
        if !ok {
            let ids: Vec<&str> = group.iter().map(|r| r.id.as_str()).collect();
            problems.push(format!("priority {priority} is not unique in context {context}: {}", ids.join(", ")));
        }
    }
}

impl Grammar {
    /// Parse and compile a grammar file against the device catalog.
    pub fn from_json(text: &str, catalog: &OptionCatalog) -> Result<Self, ManifestError> {
        let raw: RawGrammar =
            serde_json::from_str(text).map_err(|source| ManifestError::Parse { file: "grammar", source })?;
        let mut problems = Vec::new();
        let registry = build_registry(&raw.slots, catalog, &mut problems);
        let mut compiler = Compiler { problems: Vec::new(), registry: &registry };
        let mut ids = BTreeSet::new();
        let mut rules = Vec::new();
        for r in &raw.rules {
            if !ids.insert(r.id.clone()) {
                compiler.problems.push(format!("duplicate rule id {}", r.id));
            }
            if let Some(rule) = compiler.rule(r) {
                rules.push(rule);
            }
        }
        problems.append(&mut compiler.problems);
        check_priorities(&rules, &mut problems);
        if problems.is_empty() {
            Ok(Grammar { version: raw.version, registry, rules })
        } else {
            Err(ManifestError::Invalid { file: "grammar", problems })
        }
    }

    pub fn builtin(catalog: &OptionCatalog) -> Result<Self, ManifestError> {
        Self::from_json(BUILTIN_GRAMMAR, catalog)
    }

    pub fn rule(&self, id: &str) -> Option<&GrammarRule> {
        self.rules.iter().find(|r| r.id == id)
    }
}
