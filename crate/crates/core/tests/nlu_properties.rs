use mfp_agent::device::DeviceManifest;
use mfp_agent::nlu::{ActKind, ContextSummary, Grammar, PendingKind};
use proptest::prelude::*;

fn grammar() -> Grammar {
    Grammar::builtin(&DeviceManifest::builtin().catalog).unwrap()
}

const PREFIXES: [&str; 4] = ["", "please ", "um ", "um, please, "];
const SUFFIXES: [&str; 3] = ["", " please", ", um"];

#[test]
fn every_synonym_parses_to_its_canonical_value_with_filler() {
    let g = grammar();
    let mut checked = 0;
    for slot in g.registry.slots().filter(|s| !s.internal) {
        let ctx = ContextSummary::idle().with_function(slot.functions[0]);
        for (phrase, value) in slot.synonyms() {
            for pre in PREFIXES {
                for post in SUFFIXES {
                    let text = format!("{pre}{phrase}{post}");
                    let acts = g.parse(&text, &ctx);
                    let hits: Vec<_> =
                        acts.iter().filter(|a| a.kind == ActKind::Inform).filter_map(|a| a.slot(&slot.id)).collect();
                    assert_eq!(hits, vec![value], "'{text}' for slot {} gave {acts:?}", slot.id);
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 500);
}

#[test]
fn internal_slot_synonyms_reach_their_requests() {
    let g = grammar();
    let idle = ContextSummary::idle();
    for (phrase, value) in g.registry.slot("part").unwrap().synonyms() {
        let acts = g.parse(&format!("where is the {phrase}"), &idle);
        assert!(acts.iter().any(|a| a.kind == ActKind::WhereIs && a.slot("part") == Some(value)), "{phrase}: {acts:?}");
    }
    for (phrase, value) in g.registry.slot("procedure").unwrap().synonyms() {
        let acts = g.parse(&format!("how do I {phrase}"), &idle);
        assert!(acts.iter().any(|a| a.kind == ActKind::HowTo && a.slot("procedure") == Some(value)), "{phrase}: {acts:?}");
    }
    for (phrase, value) in g.registry.slot("topic").unwrap().synonyms() {
        let acts = g.parse(&format!("tell me about {phrase}"), &idle);
        assert!(acts.iter().any(|a| a.kind == ActKind::Describe && a.slot("topic") == Some(value)), "{phrase}: {acts:?}");
    }
}

fn vocabulary() -> Vec<String> {
    let g = grammar();
    let mut words: Vec<String> = g
        .registry
        .slots()
        .flat_map(|s| s.synonyms().map(|(p, _)| p.to_string()).collect::<Vec<_>>())
        .collect();
    words.extend(
        [
            "please", "um", "yes", "no", "copies", "where", "is", "the", "how", "do", "i", "three", "500", "darker",
            "two", "fax", "to", "555", "0100", "at", "dot", "com", "cancel", "what", "stop", "done", "!", ",", "blorp",
        ]
        .map(String::from),
    );
    words
}

fn context_strategy() -> impl Strategy<Value = ContextSummary> {
    prop_oneof![
        Just(ContextSummary::idle()),
        Just(ContextSummary::yes_no()),
        Just(ContextSummary { pending: Some(PendingKind::Outcome), ..Default::default() }),
        Just(ContextSummary::expecting("quantity", Some(mfp_agent::device::DeviceFunction::Copy))),
        Just(ContextSummary::expecting("destination_number", Some(mfp_agent::device::DeviceFunction::Fax))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn acts_are_disjoint_ordered_and_well_formed(
        picks in proptest::collection::vec(any::<prop::sample::Index>(), 0..12),
        ctx in context_strategy(),
    ) {
        let g = grammar();
        let vocab = vocabulary();
        let text = picks.iter().map(|i| i.get(&vocab).as_str()).collect::<Vec<_>>().join(" ");
        let acts = g.parse(&text, &ctx);
        prop_assert!(!acts.is_empty());
        for w in acts.windows(2) {
            prop_assert!(w[0].span.end <= w[1].span.start, "overlap in {:?}: {:?}", text, acts);
        }
        for a in &acts {
            match a.kind {
                ActKind::Inform => prop_assert!(!a.slots.is_empty()),
                ActKind::Unknown => {
                    prop_assert!(a.slots.is_empty());
                    prop_assert_eq!(acts.len(), 1);
                }
                _ => {}
            }
            for slot in a.slots.keys() {
                prop_assert!(g.registry.slot(slot).is_some(), "unregistered slot {}", slot);
            }
            prop_assert!(a.span.end <= text.chars().count());
        }
        prop_assert_eq!(&acts, &g.parse(&text, &ctx));
    }

    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,60}", ctx in context_strategy()) {
        let g = grammar();
        let acts = g.parse(&text, &ctx);
        prop_assert!(!acts.is_empty());
    }
}
