//! Per-category descriptor dictionaries: generation, parsing, grounding,
//! storage and editing.
//!
//! A dictionary lists the visual features that identify a category, each as
//! a short phrase ("long tail"). Before embedding, every phrase is grounded
//! into a sentence conditioned on the category's display name
//! ("lemur, which has long tail"); the grounded sentence is what the text
//! embedding store is keyed by.

mod descriptor;
mod file;
pub mod llm;
mod prompt;

pub use descriptor::{ground, Category, CategoryDictionary, Descriptor, DictionarySet, SubgroupDictionarySet};
pub use file::CategoryEntry;
pub use llm::{
    CachedProvider, DescriptorGenerator, HttpProvider, LlmProvider, LlmRequest, LlmResponse, OfflineProvider,
    DEFAULT_MAX_TOKENS, DEFAULT_MODEL, DEFAULT_TEMPERATURE,
};
pub use prompt::{build_prompt, parse_descriptors, render_bullets, FewShotExemplar};
