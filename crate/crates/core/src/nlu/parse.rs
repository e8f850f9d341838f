use std::cmp::Reverse;
use std::sync::LazyLock;

use regex::Regex;

use super::acts::{ActKind, Confidence, ContextSummary, DialogAct, Utterance};
use super::grammar::{Element, Grammar, GrammarRule, SlotKey, SlotRegistry, ValueRef, MAX_GAP};
use super::normalize::{normalize, Span, Token};
use crate::device::SettingValue;

static EMAIL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)+").expect("email regex"));

/// Phone numbers need this many digits unless spoken as separate numbers.
const MIN_PHONE_DIGITS: usize = 7;

#[derive(Debug, Clone)]
struct Capture {
    slot: Option<String>,
    value: SettingValue,
}

#[derive(Debug, Clone)]
struct Candidate {
    rule: usize,
    priority: i32,
    start: usize,
    end: usize,
    acts: Vec<DialogAct>,
}

struct Matcher<'a> {
    grammar: &'a Grammar,
    tokens: &'a [Token],
    text: &'a str,
    ctx: &'a ContextSummary,
}

type Options = Vec<(usize, Option<Capture>)>;

impl Matcher<'_> {
    fn options(&self, el: &Element, pos: usize) -> Options {
        let tok = self.tokens.get(pos);
        let word_hit = |ws: &[String]| tok.is_some_and(|t| ws.contains(&t.norm));
        match el {
            Element::Words(ws) => {
                if word_hit(ws) {
                    vec![(pos + 1, None)]
                } else {
                    vec![]
                }
            }
            Element::Optional(ws) => {
                if word_hit(ws) {
                    vec![(pos + 1, None), (pos, None)]
                } else {
                    vec![(pos, None)]
                }
            }
            Element::Gap => (0..=MAX_GAP).map(|k| pos + k).filter(|&e| e <= self.tokens.len()).map(|e| (e, None)).collect(),
            Element::Num => match tok.and_then(|t| t.number) {
                Some(n) => vec![(pos + 1, Some(Capture { slot: None, value: SettingValue::Int(n) }))],
                None => vec![],
            },
            Element::Digits => self.digit_options(pos),
            Element::Email => self
                .email_at(pos)
                .map(|(end, addr)| (end, Some(Capture { slot: None, value: SettingValue::Text(addr) })))
                .into_iter()
                .collect(),
            Element::Slot(i) => self.slot_options(&[*i], pos),
            Element::AnySlot => {
                let reg = &self.grammar.registry;
                let mut ids: Vec<usize> = (0..reg.len()).filter(|&i| !reg.by_index(i).internal).collect();
                if let Some(f) = self.ctx.active_function {
                    ids.sort_by_key(|&i| !reg.by_index(i).applies_to(f));
                }
                self.slot_options(&ids, pos)
            }
        }
    }

    fn slot_options(&self, slots: &[usize], pos: usize) -> Options {
        let mut found: Vec<(usize, usize, Capture)> = Vec::new();
        for (rank, &i) in slots.iter().enumerate() {
            let def = self.grammar.registry.by_index(i);
            for entry in &def.lexicon {
                let end = pos + entry.tokens.len();
                if end > self.tokens.len() {
                    continue;
                }
                if self.tokens[pos..end].iter().zip(&entry.tokens).all(|(t, w)| t.norm == *w) {
                    let cap = Capture { slot: Some(def.id.clone()), value: entry.value.clone() };
                    found.push((end, rank, cap));
                }
            }
        }
        found.sort_by_key(|(end, rank, _)| (Reverse(*end), *rank));
        found.into_iter().map(|(end, _, cap)| (end, Some(cap))).collect()
    }

    fn digit_options(&self, pos: usize) -> Options {
        let run = self.tokens[pos.min(self.tokens.len())..].iter().take_while(|t| t.digits.is_some()).count();
        (1..=run)
            .rev()
            .filter_map(|n| {
                let digits: String = self.tokens[pos..pos + n].iter().filter_map(|t| t.digits.as_deref()).collect();
                (n >= 2 || digits.len() >= MIN_PHONE_DIGITS)
                    .then(|| (pos + n, Some(Capture { slot: None, value: SettingValue::Text(digits) })))
            })
            .collect()
    }

    fn email_at(&self, pos: usize) -> Option<(usize, String)> {
        let tok = self.tokens.get(pos)?;
        if let Some(m) = EMAIL.find(&self.text[tok.bytes.0..]) {
            let end_byte = tok.bytes.0 + m.end();
            let end = pos + self.tokens[pos..].iter().take_while(|t| t.bytes.0 < end_byte).count();
            return Some((end, m.as_str().to_lowercase()));
        }
        self.spoken_email(pos)
    }

    /// "bob dot smith at example dot com"
    fn spoken_email(&self, pos: usize) -> Option<(usize, String)> {
        let toks = self.tokens;
        let dotted = |mut i: usize| -> Option<(usize, Vec<&str>)> {
            let mut parts = vec![toks.get(i)?.norm.as_str()];
            i += 1;
            while i + 1 < toks.len() && toks[i].norm == "dot" {
                parts.push(toks[i + 1].norm.as_str());
                i += 2;
            }
            Some((i, parts))
        };
        let (at, local) = dotted(pos)?;
        if local.contains(&"at") || toks.get(at)?.norm != "at" {
            return None;
        }
        let (end, domain) = dotted(at + 1)?;
        if domain.len() < 2 {
            return None;
        }
        Some((end, format!("{}@{}", local.join("."), domain.join("."))))
    }

    fn walk(
        &self,
        pattern: &[Element],
        ei: usize,
        pos: usize,
        ranges: &mut Vec<(usize, usize)>,
        caps: &mut Vec<Capture>,
    ) -> Option<usize> {
        let Some(el) = pattern.get(ei) else { return Some(pos) };
        for (end, cap) in self.options(el, pos) {
            ranges.push((pos, end));
            let pushed = cap.is_some();
            if let Some(c) = cap {
                caps.push(c);
            }
            if let Some(done) = self.walk(pattern, ei + 1, end, ranges, caps) {
                return Some(done);
            }
            ranges.pop();
            if pushed {
                caps.pop();
            }
        }
        None
    }

    fn token_span(&self, from: usize, to: usize) -> Option<Span> {
        (from < to).then(|| Span::new(self.tokens[from].span.start, self.tokens[to - 1].span.end))
    }

    fn build(&self, rule: &GrammarRule, ranges: &[(usize, usize)], caps: &[Capture]) -> Option<Vec<DialogAct>> {
        let start = ranges.iter().filter(|(a, b)| a < b).map(|(a, _)| *a).min()?;
        let end = ranges.iter().filter(|(a, b)| a < b).map(|(_, b)| *b).max()?;
        let whole = self.token_span(start, end)?;
        let mut acts = Vec::new();
        for tmpl in &rule.acts {
            let span = match &tmpl.span {
                Some(idx) => idx
                    .iter()
                    .filter_map(|&i| ranges.get(i).and_then(|&(a, b)| self.token_span(a, b)))
                    .reduce(|x, y| x.union(&y))
                    .unwrap_or(whole),
                None => whole,
            };
            let mut act = DialogAct::new(tmpl.kind, span);
            for (key, vref) in &tmpl.slots {
                let value = match vref {
                    ValueRef::Literal(v) => v.clone(),
                    ValueRef::Capture(i) => caps.get(*i)?.value.clone(),
                    ValueRef::Negated(i) => SettingValue::Int(-caps.get(*i)?.value.as_int()?),
                };
                let slot = match key {
                    SlotKey::Named(n) => n.clone(),
                    SlotKey::Expected => self.ctx.expected_slot.clone()?,
                    SlotKey::Captured => match vref {
                        ValueRef::Capture(i) | ValueRef::Negated(i) => caps.get(*i)?.slot.clone()?,
                        ValueRef::Literal(_) => return None,
                    },
                };
                act.slots.insert(slot, value);
            }
            acts.push(act);
        }
        Some(acts)
    }

    fn unattributed_readings(&self, rule: &GrammarRule, acts: &[DialogAct]) -> Vec<Vec<DialogAct>> {
        let Some(first) = acts.first() else { return vec![] };
        let Some(value) = first.slots.values().next().cloned() else { return vec![] };
        let reg = &self.grammar.registry;
        let mut readings: Vec<Vec<DialogAct>> = rule
            .unattributed
            .iter()
            .filter_map(|id| reg.slot(id))
            .filter(|def| self.ctx.active_function.is_none_or(|f| def.applies_to(f)))
            .filter(|def| def.domain.contains(&value))
            .map(|def| vec![DialogAct::new(ActKind::Inform, first.span).with(&def.id, value.clone())])
            .collect();
        if readings.is_empty() {
            readings.push(acts.to_vec());
        }
        readings
    }

    fn candidates(&self) -> Vec<Candidate> {
        let numeric_expected = self.ctx.expected_slot.as_deref().is_some_and(|s| self.grammar.registry.is_numeric(s));
        let mut out: Vec<Candidate> = Vec::new();
        for (ri, rule) in self.grammar.rules.iter().enumerate() {
            if !rule.context.admits(self.ctx, numeric_expected) {
                continue;
            }
            for pattern in &rule.patterns {
                for pos in 0..self.tokens.len() {
                    let mut ranges = Vec::new();
                    let mut caps = Vec::new();
                    if self.walk(pattern, 0, pos, &mut ranges, &mut caps).is_none() {
                        continue;
                    }
                    let Some(acts) = self.build(rule, &ranges, &caps) else { continue };
                    let start = ranges.iter().filter(|(a, b)| a < b).map(|(a, _)| *a).min().unwrap_or(pos);
                    let end = ranges.iter().map(|(_, b)| *b).max().unwrap_or(pos);
                    if out.iter().any(|c| c.rule == ri && c.start == start && c.end == end) {
                        continue;
                    }
                    out.push(Candidate { rule: ri, priority: rule.priority, start, end, acts });
                }
            }
        }
        out
    }
}

fn same_shape(a: &[DialogAct], b: &[DialogAct]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.kind == y.kind && x.slots == y.slots)
}

fn mark_ambiguous(acts: &mut [DialogAct], readings: Vec<Vec<DialogAct>>) {
    for act in acts.iter_mut() {
        act.confidence = Confidence::Ambiguous;
    }
    if let Some(first) = acts.first_mut() {
        first.alternatives = readings;
    }
}

/// Parse one utterance into dialog acts, in text order.
pub fn parse_utterance(grammar: &Grammar, utterance: &Utterance, ctx: &ContextSummary) -> Vec<DialogAct> {
    let tokens = normalize(&utterance.text);
    let matcher = Matcher { grammar, tokens: &tokens, text: &utterance.text, ctx };
    let mut cands = matcher.candidates();
    cands.sort_by_key(|c| (Reverse(c.priority), Reverse(c.end - c.start), c.start, c.rule));

    let mut used = vec![false; tokens.len()];
    let mut acts = Vec::new();
    for (ci, c) in cands.iter().enumerate() {
        if used[c.start..c.end].iter().any(|u| *u) {
            continue;
        }
        used[c.start..c.end].iter_mut().for_each(|u| *u = true);
        let mut chosen = c.acts.clone();
        let rule = &grammar.rules[c.rule];
        let mut readings = vec![c.acts.clone()];
        for other in cands.iter().skip(ci + 1) {
            if other.priority == c.priority
                && (other.start, other.end) == (c.start, c.end)
                && other.rule != c.rule
                && !readings.iter().any(|r| same_shape(r, &other.acts))
            {
                readings.push(other.acts.clone());
            }
        }
        if readings.len() > 1 {
            mark_ambiguous(&mut chosen, readings);
        } else if !rule.unattributed.is_empty() {
            let readings = matcher.unattributed_readings(rule, &chosen);
            mark_ambiguous(&mut chosen, readings);
        }
        acts.extend(chosen);
    }
    if acts.is_empty() {
        let len = utterance.text.chars().count();
        return vec![DialogAct::new(ActKind::Unknown, Span::new(0, len))];
    }
    acts.sort_by_key(|a| a.span.start);
    acts
}

/// Outcome of [`classify_ambiguity`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ambiguity {
    Clear,
    /// Competing readings, the parser's preferred one first. Empty when no
    /// in-domain reading exists.
    Ambiguous(Vec<Vec<DialogAct>>),
}

impl Ambiguity {
    pub fn is_ambiguous(&self) -> bool {
        matches!(self, Ambiguity::Ambiguous(_))
    }
}

pub fn classify_ambiguity(acts: &[DialogAct], registry: &SlotRegistry) -> Ambiguity {
    if let Some(act) = acts.iter().find(|a| !a.alternatives.is_empty()) {
        return Ambiguity::Ambiguous(act.alternatives.clone());
    }
    for act in acts.iter().filter(|a| a.kind == ActKind::Inform) {
        for (slot, value) in &act.slots {
            let Some(def) = registry.slot(slot) else { continue };
            if def.domain.contains(value) {
                continue;
            }
            let candidates = match def.domain.clamp(value) {
                Some(v) => {
                    let mut fixed = act.clone();
                    fixed.slots.insert(slot.clone(), v);
                    fixed.confidence = Confidence::Clear;
                    vec![vec![fixed]]
                }
                None => vec![],
            };
            return Ambiguity::Ambiguous(candidates);
        }
    }
    Ambiguity::Clear
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{DeviceFunction, DeviceManifest};
    use crate::nlu::acts::PendingKind;

    fn grammar() -> Grammar {
        Grammar::builtin(&DeviceManifest::builtin().catalog).unwrap()
    }

    fn parse(text: &str, ctx: &ContextSummary) -> Vec<DialogAct> {
        parse_utterance(&grammar(), &Utterance::new(text, 0), ctx)
    }

    fn shapes(text: &str, ctx: &ContextSummary) -> Vec<String> {
        parse(text, ctx).iter().map(ToString::to_string).collect()
    }

    #[test]
    fn resource_heavy_request() {
        assert_eq!(
            shapes("I need 500 copies of this document", &ContextSummary::idle()),
            ["Inform{quantity:500}", "RequestTask{function:copy}"]
        );
    }

    #[test]
    fn where_is_feeder() {
        assert_eq!(shapes("Where do I find the feeder?", &ContextSummary::idle()), ["WhereIs{part:feeder}"]);
    }

    #[test]
    fn fragment_list() {
        assert_eq!(
            shapes("three copies, double-sided, stapled", &ContextSummary::idle()),
            ["Inform{quantity:3}", "RequestTask{function:copy}", "Inform{sides:double}", "Inform{staple:true}"]
        );
    }

    #[test]
    fn gibberish_is_unknown() {
        let acts = parse("blorp", &ContextSummary::idle());
        assert_eq!(acts.len(), 1);
        assert_eq!(acts[0].kind, ActKind::Unknown);
        assert!(acts[0].slots.is_empty());
        assert_eq!(acts[0].span, Span::new(0, 5));
    }

    #[test]
    fn yes_no_need_a_pending_question() {
        assert_eq!(shapes("yes", &ContextSummary::idle()), ["Unknown"]);
        assert_eq!(shapes("no", &ContextSummary::idle()), ["Unknown"]);
        assert_eq!(shapes("yes", &ContextSummary::yes_no()), ["Confirm"]);
        assert_eq!(shapes("nope", &ContextSummary::yes_no()), ["Deny"]);
    }

    #[test]
    fn no_with_a_value_keeps_the_value() {
        assert_eq!(shapes("no staples", &ContextSummary::yes_no()), ["Inform{staple:false}"]);
        assert_eq!(shapes("no, single sided", &ContextSummary::yes_no()), ["Deny", "Inform{sides:single}"]);
    }

    #[test]
    fn darker_two_is_ambiguous() {
        let g = grammar();
        let acts = parse_utterance(&g, &Utterance::new("make it darker two", 0), &ContextSummary::idle());
        match classify_ambiguity(&acts, &g.registry) {
            Ambiguity::Ambiguous(c) => {
                assert_eq!(c.len(), 2);
                let names: Vec<Vec<String>> =
                    c.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect();
                assert_eq!(names[0], ["Inform{darkness:2}"]);
                assert_eq!(names[1], ["Inform{darkness:1}", "Inform{quantity:2}"]);
            }
            other => panic!("expected ambiguous, got {other:?}"),
        }
    }

    #[test]
    fn single_inform_is_clear() {
        let g = grammar();
        let acts = vec![DialogAct::new(ActKind::Inform, Span::new(0, 1)).with("quantity", 3)];
        assert_eq!(classify_ambiguity(&acts, &g.registry), Ambiguity::Clear);
        let unknown = vec![DialogAct::new(ActKind::Unknown, Span::new(0, 5))];
        assert_eq!(classify_ambiguity(&unknown, &g.registry), Ambiguity::Clear);
    }

    #[test]
    fn out_of_domain_value_is_ambiguous_with_clamped_candidate() {
        let g = grammar();
        let acts = parse_utterance(&g, &Utterance::new("darkness 9", 0), &ContextSummary::idle());
        match classify_ambiguity(&acts, &g.registry) {
            Ambiguity::Ambiguous(c) => assert_eq!(c[0][0].slot("darkness"), Some(&SettingValue::Int(3))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bare_number_binds_to_expected_numeric_slot() {
        let g = grammar();
        let ctx = ContextSummary::expecting("quantity", Some(DeviceFunction::Copy));
        let acts = parse_utterance(&g, &Utterance::new("4", 0), &ctx);
        assert_eq!(acts[0].to_string(), "Inform{quantity:4}");
        assert_eq!(classify_ambiguity(&acts, &g.registry), Ambiguity::Clear);
    }

    #[test]
    fn bare_number_without_prompt_is_ambiguous() {
        let g = grammar();
        let ctx = ContextSummary::idle().with_function(DeviceFunction::Copy);
        let acts = parse_utterance(&g, &Utterance::new("2", 0), &ctx);
        let amb = classify_ambiguity(&acts, &g.registry);
        let Ambiguity::Ambiguous(c) = amb else { panic!("{amb:?}") };
        assert_eq!(c.len(), 2);
        let acts = parse_utterance(&g, &Utterance::new("40", 0), &ctx);
        let Ambiguity::Ambiguous(c) = classify_ambiguity(&acts, &g.registry) else { panic!() };
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn fax_numbers_and_emails() {
        let idle = ContextSummary::idle();
        assert_eq!(
            shapes("fax this to 555-0100", &idle),
            ["RequestTask{function:fax}", "Inform{destination_number:5550100}"]
        );
        assert_eq!(
            shapes("send it to five five five zero one zero zero", &idle),
            ["Inform{destination_number:5550100}"]
        );
        assert_eq!(
            shapes("email it to Pat.Lee@example.com please", &idle),
            ["RequestTask{function:email}", "Inform{destination_address:pat.lee@example.com}"]
        );
        assert_eq!(
            shapes("pat at example dot com", &idle),
            ["Inform{destination_address:pat@example.com}"]
        );
        let ctx = ContextSummary::expecting("destination_number", Some(DeviceFunction::Fax));
        assert_eq!(shapes("555 0100", &ctx), ["Inform{destination_number:5550100}"]);
    }

    #[test]
    fn outcome_context_maps_done_and_stuck() {
        let ctx = ContextSummary { pending: Some(PendingKind::Outcome), ..Default::default() };
        assert_eq!(shapes("done", &ctx), ["Confirm"]);
        assert_eq!(shapes("I'm done", &ctx), ["Confirm"]);
        assert_eq!(shapes("I'm stuck", &ctx), ["Deny"]);
        assert_eq!(shapes("stop", &ctx), ["Stop"]);
        assert_eq!(shapes("I'm done", &ContextSummary::idle()), ["Stop"]);
    }

    #[test]
    fn requests_and_questions() {
        let idle = ContextSummary::idle();
        assert_eq!(shapes("how do I clear a paper jam?", &idle), ["HowTo{procedure:clear_jam}"]);
        assert_eq!(shapes("what does collate mean", &idle), ["Describe{topic:collate}"]);
        assert_eq!(shapes("where are my copies?", &idle), ["WhereIs{part:output_tray}"]);
        assert_eq!(shapes("is it done yet", &idle), ["StatusQuery"]);
        assert_eq!(shapes("give me a tour", &idle), ["Tour"]);
        assert_eq!(shapes("what are my options", &idle), ["Question"]);
        assert_eq!(shapes("make double sided my default", &idle), ["Inform{sides:double}", "SetDefault"]);
        assert_eq!(shapes("clear my defaults", &idle), ["SetDefault{reset:true}"]);
        assert_eq!(shapes("actually, scan something first", &idle), ["RequestTask{function:scan}"]);
        assert_eq!(shapes("never mind", &idle), ["Cancel"]);
        assert_eq!(shapes("help", &idle), ["Help"]);
    }

    #[test]
    fn spans_are_disjoint_and_ordered() {
        let acts = parse("um three copies please, double-sided and stapled", &ContextSummary::idle());
        for w in acts.windows(2) {
            assert!(w[0].span.end <= w[1].span.start, "{acts:?}");
        }
    }

    #[test]
    fn active_function_prefers_applicable_slot() {
        let fax = ContextSummary::idle().with_function(DeviceFunction::Fax);
        assert_eq!(shapes("high resolution", &fax), ["Inform{fax_resolution:superfine}"]);
        let scan = ContextSummary::idle().with_function(DeviceFunction::Scan);
        assert_eq!(shapes("high resolution", &scan), ["Inform{resolution:600_dpi}"]);
    }
}
