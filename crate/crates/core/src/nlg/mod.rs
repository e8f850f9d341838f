//! Natural-language generation: short, cue-marked spoken responses.

mod render;
mod templates;

pub use render::{
    chunk_options, join_list, join_or, split_sentences, stage, AgentResponse, Expect, MirrorAct, Renderer,
    ResponseSegment,
};
pub use templates::{
    CuePlacement, CueSpec, ExpectSpec, MirrorSpec, SegmentTemplate, Template, TemplateSet, BUILTIN_TEMPLATES,
    KNOWN_FLAGS, KNOWN_LISTS, KNOWN_VARS, REQUIRED_VARIANTS,
};
