use crate::error::{Error, Result};

pub const DEFAULT_TEMPLATE: &str = "a photo of a {}";

/// The 80 hand-written ImageNet prompt templates distributed with CLIP.
pub const ENSEMBLE_TEMPLATES: [&str; 80] = [
    "a bad photo of a {}.",
    "a photo of many {}.",
    "a sculpture of a {}.",
    "a photo of the hard to see {}.",
    "a low resolution photo of the {}.",
    "a rendering of a {}.",
    "graffiti of a {}.",
    "a bad photo of the {}.",
    "a cropped photo of the {}.",
    "a tattoo of a {}.",
    "the embroidered {}.",
    "a photo of a hard to see {}.",
    "a bright photo of a {}.",
    "a photo of a clean {}.",
    "a photo of a dirty {}.",
    "a dark photo of the {}.",
    "a drawing of a {}.",
    "a photo of my {}.",
    "the plastic {}.",
    "a photo of the cool {}.",
    "a close-up photo of a {}.",
    "a black and white photo of the {}.",
    "a painting of the {}.",
    "a painting of a {}.",
    "a pixelated photo of the {}.",
    "a sculpture of the {}.",
    "a bright photo of the {}.",
    "a cropped photo of a {}.",
    "a plastic {}.",
    "a photo of the dirty {}.",
    "a jpeg corrupted photo of a {}.",
    "a blurry photo of the {}.",
    "a photo of the {}.",
    "a good photo of the {}.",
    "a rendering of the {}.",
    "a {} in a video game.",
    "a photo of one {}.",
    "a doodle of a {}.",
    "a close-up photo of the {}.",
    "a photo of a {}.",
    "the origami {}.",
    "the {} in a video game.",
    "a sketch of a {}.",
    "a doodle of the {}.",
    "a origami {}.",
    "a low resolution photo of a {}.",
    "the toy {}.",
    "a rendition of the {}.",
    "a photo of the clean {}.",
    "a photo of a large {}.",
    "a rendition of a {}.",
    "a photo of a nice {}.",
    "a photo of a weird {}.",
    "a blurry photo of a {}.",
    "a cartoon {}.",
    "art of a {}.",
    "a sketch of the {}.",
    "a embroidered {}.",
    "a pixelated photo of a {}.",
    "itap of the {}.",
    "a jpeg corrupted photo of the {}.",
    "a good photo of a {}.",
    "a plushie {}.",
    "a photo of the nice {}.",
    "a photo of the small {}.",
    "a photo of the weird {}.",
    "the cartoon {}.",
    "art of the {}.",
    "a drawing of the {}.",
    "a photo of the large {}.",
    "a black and white photo of a {}.",
    "the plushie {}.",
    "a dark photo of a {}.",
    "itap of a {}.",
    "graffiti of the {}.",
    "a toy {}.",
    "itap of my {}.",
    "a photo of a cool {}.",
    "a photo of a small {}.",
    "a tattoo of the {}.",
];

/// Prompt templates for class-name scoring. Each holds one `{}` slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineSpec {
    templates: Vec<String>,
}

impl Default for BaselineSpec {
    fn default() -> Self {
        Self::single()
    }
}

impl BaselineSpec {
    pub fn new<S: Into<String>>(templates: impl IntoIterator<Item = S>) -> Result<Self> {
        let templates: Vec<String> = templates.into_iter().map(Into::into).collect();
        if templates.is_empty() {
            return Err(Error::InvalidArgument("baseline needs at least one template".into()));
        }
        if let Some(bad) = templates.iter().find(|t| t.matches("{}").count() != 1) {
            return Err(Error::InvalidArgument(format!(
                "template {bad:?} must contain exactly one {{}} slot"
            )));
        }
        Ok(Self { templates })
    }

    /// `"a photo of a {}"`, the standard zero-shot prompt.
    pub fn single() -> Self {
        Self {
            templates: vec![DEFAULT_TEMPLATE.to_owned()],
        }
    }

    pub fn ensemble() -> Self {
        Self {
            templates: ENSEMBLE_TEMPLATES.iter().map(|t| t.to_string()).collect(),
        }
    }

    pub fn templates(&self) -> &[String] {
        &self.templates
    }

    pub fn render(template: &str, display_name: &str) -> String {
        template.replacen("{}", display_name, 1)
    }

    /// Every text the baseline needs embedded for a category.
    pub fn texts_for(&self, display_name: &str) -> Vec<String> {
        self.templates.iter().map(|t| Self::render(t, display_name)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn ensemble_has_eighty_distinct_templates() {
        let unique: HashSet<_> = ENSEMBLE_TEMPLATES.iter().collect();
        assert_eq!(unique.len(), 80);
        assert!(BaselineSpec::new(ENSEMBLE_TEMPLATES).is_ok());
    }

    #[test]
    fn default_is_single_photo_template() {
        let spec = BaselineSpec::default();
        assert_eq!(spec.templates(), ["a photo of a {}"]);
        assert_eq!(spec.texts_for("hen"), ["a photo of a hen"]);
    }

    #[test]
    fn rejects_bad_templates() {
        assert!(BaselineSpec::new(Vec::<String>::new()).is_err());
        assert!(BaselineSpec::new(["no slot"]).is_err());
        assert!(BaselineSpec::new(["{} and {}"]).is_err());
    }
}
