//! Pattern-grammar parser: utterance text plus a context summary in, dialog acts out.

mod acts;
mod grammar;
mod normalize;
mod parse;

pub use acts::{ActKind, Confidence, ContextFilter, ContextSummary, DialogAct, PendingKind, Utterance};
pub use grammar::{Grammar, GrammarRule, SlotDef, SlotRegistry, BUILTIN_GRAMMAR, MAX_GAP};
pub use normalize::{normalize, normalize_words, Span, Token};
pub use parse::{classify_ambiguity, parse_utterance, Ambiguity};

impl Grammar {
    pub fn parse(&self, text: &str, ctx: &ContextSummary) -> Vec<DialogAct> {
        parse_utterance(self, &Utterance::new(text, 0), ctx)
    }
}
