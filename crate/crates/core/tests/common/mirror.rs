//! Rendered samples of every action and the grammar that should read them back.

use std::collections::BTreeSet;

use mfp_agent::assist::KnowledgeBase;
use mfp_agent::dialog::AgentAction;
use mfp_agent::nlg::Renderer;
use mfp_agent::nlu::{ContextSummary, Grammar};

pub struct Fixture {
    pub renderer: Renderer,
    pub grammar: Grammar,
    pub actions: Vec<AgentAction>,
}

pub fn fixture() -> Fixture {
    let manifest = super::manifest();
    let kb = KnowledgeBase::builtin(&manifest).unwrap();
    let grammar = Grammar::builtin(&manifest.catalog).unwrap();
    let actions = super::sample_actions(&manifest, &kb);
    Fixture { renderer: Renderer::builtin(manifest), grammar, actions }
}

pub fn listening_context(f: &Fixture, action: &AgentAction) -> ContextSummary {
    let r = f.renderer.render(action);
    let function = f.renderer.function_of(action);
    match r.expects {
        Some(e) => e.context(function),
        None => {
            let ctx = ContextSummary::idle();
            match function {
                Some(fun) => ctx.with_function(fun),
                None => ctx,
            }
        }
    }
}

/// Mirror acts each rendered prompt fails to parse back into, one line per miss.
pub fn mirror_failures(f: &Fixture) -> Vec<String> {
    let mut failures = Vec::new();
    for action in &f.actions {
        let response = f.renderer.render(action);
        let acts = f.grammar.parse(&response.text(), &listening_context(f, action));
        for want in f.renderer.mirror(action) {
            if !acts.iter().any(|a| want.matched_by(a)) {
                let got: Vec<String> = acts.iter().map(ToString::to_string).collect();
                failures.push(format!("[{}] {:?}\n  missing {want}\n  got {got:?}", response.template, response.text()));
            }
        }
    }
    failures
}

/// Template ids no sample action renders with.
pub fn unused_templates(f: &Fixture) -> Vec<String> {
    let used: BTreeSet<String> = f.actions.iter().map(|a| f.renderer.render(a).template).collect();
    f.renderer.templates().templates.iter().map(|t| t.id.clone()).filter(|id| !used.contains(id)).collect()
}
