//! One copy job phrased many ways: fragment orders, variants, fillers and turn splits.

use std::collections::BTreeMap;

use super::session::{engine, kinds, say_all};
use mfp_agent::device::SettingValue;
use mfp_agent::dialog::{ActionKind, DialogEngine};

pub const QUANTITY: [&str; 3] = ["3 copies", "three copies", "make 3 copies"];
pub const SIDES: [&str; 3] = ["double sided", "on both sides", "two sided"];
pub const STAPLE: [&str; 3] = ["stapled", "staple them", "with staples"];
pub const FILLERS: [&str; 6] = ["um", "uh", "er", "hmm", "please", "basically"];
pub const JOINERS: [&str; 3] = [" ", ", ", " and "];

pub const ORDERS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

pub fn expected() -> BTreeMap<&'static str, SettingValue> {
    BTreeMap::from([
        ("quantity", SettingValue::Int(3)),
        ("sides", SettingValue::text("double")),
        ("staple", SettingValue::Bool(true)),
    ])
}

/// Declines further options if asked, confirms, and returns the settings the device received.
pub fn submit(e: &mut DialogEngine, last: Option<ActionKind>) -> BTreeMap<String, SettingValue> {
    if last == Some(ActionKind::OfferOptions) {
        let out = say_all(e, &["no"]);
        assert_eq!(kinds(&out).last(), Some(&ActionKind::FinalConfirm), "{:?}", kinds(&out));
    } else {
        assert_eq!(last, Some(ActionKind::FinalConfirm));
    }
    let out = say_all(e, &["yes"]);
    assert!(kinds(&out).contains(&ActionKind::Execute), "{:?}", kinds(&out));
    let (_, job) = e.state().last_job.unwrap();
    let device = e.device().lock().unwrap();
    device.job(job).unwrap().request.settings.clone()
}

pub fn check(settings: &BTreeMap<String, SettingValue>) {
    for (slot, value) in expected() {
        assert_eq!(settings.get(slot), Some(&value), "{slot} in {settings:?}");
    }
}

pub fn fragments(order: [usize; 3], variant: [usize; 3]) -> Vec<&'static str> {
    let all = [QUANTITY[variant[0]], SIDES[variant[1]], STAPLE[variant[2]]];
    order.iter().map(|&i| all[i]).collect()
}

pub fn one_shot(words: &str) -> BTreeMap<String, SettingValue> {
    let mut e = engine();
    let out = say_all(&mut e, &["copy", words]);
    assert_eq!(kinds(&out).last(), Some(&ActionKind::OfferOptions), "{words:?}: {:?}", kinds(&out));
    submit(&mut e, Some(ActionKind::OfferOptions))
}

pub fn turn_by_turn(turns: &[String]) -> BTreeMap<String, SettingValue> {
    let mut e = engine();
    let mut last = None;
    say_all(&mut e, &["copy"]);
    for t in turns {
        let out = say_all(&mut e, &[t]);
        last = kinds(&out).last().copied();
        assert_ne!(last, Some(ActionKind::ExplicitConfirm), "{t:?}");
    }
    submit(&mut e, last)
}

/// Builds the utterance pieces: optional filler before each fragment and one after the last.
pub fn with_fillers(parts: &[&str], fillers: &[Option<usize>]) -> Vec<String> {
    let mut pieces: Vec<String> = parts
        .iter()
        .zip(fillers)
        .map(|(part, f)| match f {
            Some(f) => format!("{} {part}", FILLERS[*f]),
            None => part.to_string(),
        })
        .collect();
    if let Some(Some(f)) = fillers.get(parts.len()) {
        let last = pieces.last_mut().unwrap();
        last.push(' ');
        last.push_str(FILLERS[*f]);
    }
    pieces
}
