use std::collections::HashSet;

use crate::error::{Error, Result};

const LEMUR_BLOCK: &str = "\
Q: What are useful visual features for distinguishing a lemur in a photo?
A: There are several useful visual features to tell there is a lemur in a photo:
- four-limbed primate
- black, grey, white, brown, or red-brown
- wet and hairless nose with curved nostrils
- long tail
- large eyes
- furry bodies
- clawed hands and feet";

/// A worked Q/A block prepended to the query to steer list formatting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FewShotExemplar(String);

impl FewShotExemplar {
    pub fn new(block: impl Into<String>) -> Self {
        Self(block.into())
    }

    /// The default exemplar: a bulleted feature list for "lemur".
    pub fn lemur() -> Self {
        Self(LEMUR_BLOCK.to_owned())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Builds the descriptor query for one category.
///
/// Exemplars are emitted verbatim, each followed by a blank line, then the
/// two-line query, which ends in `"\n-"` so the completion continues a
/// bulleted list.
pub fn build_prompt(display_name: &str, few_shot: &[FewShotExemplar]) -> Result<String> {
    if display_name.trim().is_empty() {
        return Err(Error::InvalidArgument("display name is empty".into()));
    }
    let mut prompt = String::new();
    for exemplar in few_shot {
        prompt.push_str(exemplar.as_str());
        prompt.push_str("\n\n");
    }
    prompt.push_str(&format!(
        "Q: What are useful features for distinguishing a {display_name} in a photo?\n\
         A: There are several useful visual features to tell there is a {display_name} in a photo:\n\
         -"
    ));
    Ok(prompt)
}

/// Extracts descriptor phrases from a hyphen-bulleted list.
///
/// Only lines whose first non-blank character is `-` count. Leading hyphens
/// and surrounding whitespace are stripped, empty items dropped, and
/// case-folded repeats dropped keeping the first occurrence.
pub fn parse_descriptors(completion: &str) -> Result<Vec<String>> {
    let mut seen = HashSet::new();
    let phrases: Vec<String> = completion
        .lines()
        .map(str::trim_start)
        .filter(|line| line.starts_with('-'))
        .map(|line| line.trim_start_matches('-').trim())
        .filter(|item| !item.is_empty())
        .filter(|item| seen.insert(item.to_lowercase()))
        .map(str::to_owned)
        .collect();
    if phrases.is_empty() {
        return Err(Error::EmptyParse);
    }
    Ok(phrases)
}

/// Renders phrases as `- phrase` lines; the inverse of [`parse_descriptors`].
pub fn render_bullets<S: AsRef<str>>(phrases: &[S]) -> String {
    phrases.iter().map(|p| format!("- {}\n", p.as_ref())).collect()
}
