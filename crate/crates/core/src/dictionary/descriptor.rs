use std::collections::{BTreeMap, HashSet};

use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};

/// Renders a descriptor phrase as a sentence about the category.
///
/// Connector rule, matched case-insensitively on the phrase prefix:
///
/// | phrase starts with | grounded text                   |
/// |--------------------|---------------------------------|
/// | `is `, `has `      | `{name}, which {phrase}`        |
/// | `a `, `an `        | `{name}, which is {phrase}`     |
/// | anything else      | `{name}, which has {phrase}`    |
pub fn ground(display_name: &str, phrase: &str) -> String {
    let lower = phrase.to_lowercase();
    let starts = |p: &str| lower.starts_with(p);
    if starts("is ") || starts("has ") {
        format!("{display_name}, which {phrase}")
    } else if starts("a ") || starts("an ") {
        format!("{display_name}, which is {phrase}")
    } else {
        format!("{display_name}, which has {phrase}")
    }
}

fn fold(phrase: &str) -> String {
    phrase.to_lowercase()
}

fn check_phrase(phrase: &str) -> Result<()> {
    let invalid = |reason| {
        Err(Error::InvalidPhrase {
            phrase: phrase.to_owned(),
            reason,
        })
    };
    if phrase.is_empty() {
        return invalid("empty");
    }
    if phrase.trim() != phrase {
        return invalid("leading or trailing whitespace");
    }
    if phrase.contains(['\n', '\r']) {
        return invalid("contains a line break");
    }
    if phrase.starts_with('-') {
        return invalid("starts with a hyphen");
    }
    Ok(())
}

fn check_name(what: &str, value: &str) -> Result<()> {
    if value.trim().is_empty() {
        return Err(Error::Dictionary(format!("{what} is empty")));
    }
    Ok(())
}

/// One descriptor phrase with its grounded sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Descriptor {
    phrase: String,
    grounded_text: String,
}

impl Descriptor {
    /// The phrase is trimmed before validation.
    pub fn new(display_name: &str, phrase: &str) -> Result<Self> {
        let phrase = phrase.trim();
        check_phrase(phrase)?;
        Ok(Self {
            phrase: phrase.to_owned(),
            grounded_text: ground(display_name, phrase),
        })
    }

    pub fn phrase(&self) -> &str {
        &self.phrase
    }

    pub fn grounded_text(&self) -> &str {
        &self.grounded_text
    }
}

/// The descriptor dictionary of one category.
///
/// Invariants: at least one descriptor, and no two phrases equal after case
/// folding. Edits return new values and leave `self` untouched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryDictionary {
    category_id: String,
    display_name: String,
    descriptors: Vec<Descriptor>,
}

impl CategoryDictionary {
    /// Builds a dictionary, dropping case-folded duplicate phrases with a warning.
    pub fn new<I, S>(category_id: &str, display_name: &str, phrases: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        check_name("category id", category_id)?;
        check_name("display name", display_name)?;
        let mut seen = HashSet::new();
        let mut descriptors = Vec::new();
        for phrase in phrases {
            let descriptor = Descriptor::new(display_name, phrase.as_ref())?;
            if seen.insert(fold(descriptor.phrase())) {
                descriptors.push(descriptor);
            } else {
                log::warn!("{category_id}: dropping duplicate descriptor {:?}", descriptor.phrase());
            }
        }
        if descriptors.is_empty() {
            return Err(Error::EmptyDictionary(category_id.to_owned()));
        }
        Ok(Self {
            category_id: category_id.to_owned(),
            display_name: display_name.to_owned(),
            descriptors,
        })
    }

    pub fn category_id(&self) -> &str {
        &self.category_id
    }

    pub fn display_name(&self) -> &str {
        &self.display_name
    }

    pub fn descriptors(&self) -> &[Descriptor] {
        &self.descriptors
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn phrases(&self) -> impl Iterator<Item = &str> {
        self.descriptors.iter().map(Descriptor::phrase)
    }

    pub fn grounded_texts(&self) -> impl Iterator<Item = &str> {
        self.descriptors.iter().map(Descriptor::grounded_text)
    }

    /// Index of a phrase, compared case-insensitively.
    pub fn position(&self, phrase: &str) -> Option<usize> {
        let key = fold(phrase.trim());
        self.descriptors.iter().position(|d| fold(d.phrase()) == key)
    }

    /// Same descriptors under a new display name; every grounded text is re-derived.
    pub fn with_display_name(&self, display_name: &str) -> Result<Self> {
        Self::new(&self.category_id, display_name, self.phrases())
    }

    /// Replaces the phrase at `index`.
    pub fn edit_descriptor(&self, index: usize, new_phrase: &str) -> Result<Self> {
        self.check_index(index)?;
        let descriptor = Descriptor::new(&self.display_name, new_phrase)?;
        if self.position(descriptor.phrase()).is_some() {
            return Err(Error::DuplicatePhrase(descriptor.phrase.clone()));
        }
        let mut next = self.clone();
        next.descriptors[index] = descriptor;
        Ok(next)
    }

    /// Appends a phrase.
    pub fn add_descriptor(&self, phrase: &str) -> Result<Self> {
        let descriptor = Descriptor::new(&self.display_name, phrase)?;
        if self.position(descriptor.phrase()).is_some() {
            return Err(Error::DuplicatePhrase(descriptor.phrase.clone()));
        }
        let mut next = self.clone();
        next.descriptors.push(descriptor);
        Ok(next)
    }

    pub fn remove_descriptor(&self, index: usize) -> Result<Self> {
        self.check_index(index)?;
        if self.descriptors.len() == 1 {
            return Err(Error::LastDescriptor(self.category_id.clone()));
        }
        let mut next = self.clone();
        next.descriptors.remove(index);
        Ok(next)
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.descriptors.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.descriptors.len(),
            });
        }
        Ok(())
    }
}

/// A category realized as several alternative dictionaries.
///
/// The category scores as the best of its subgroups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupDictionarySet {
    category_id: String,
    display_name: String,
    subgroups: BTreeMap<String, CategoryDictionary>,
}

impl SubgroupDictionarySet {
    pub fn new<I, N, P, S>(category_id: &str, display_name: &str, subgroups: I) -> Result<Self>
    where
        I: IntoIterator<Item = (N, P)>,
        N: Into<String>,
        P: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        check_name("category id", category_id)?;
        check_name("display name", display_name)?;
        let mut map = BTreeMap::new();
        for (name, phrases) in subgroups {
            let name = name.into();
            check_name("subgroup name", &name)?;
            let dict = CategoryDictionary::new(category_id, display_name, phrases)?;
            if map.insert(name.clone(), dict).is_some() {
                return Err(Error::Dictionary(format!("{category_id}: duplicate subgroup {name:?}")));
            }
        }
        if map.is_empty() {
            return Err(Error::Dictionary(format!("{category_id}: no subgroups")));
        }
        Ok(Self {
            category_id: category_id.to_owned(),
            display_name: display_name.to_owned(),
            subgroups: map,
        })
    }

    pub fn category_id(&self) -> &str {
        &self.category_id
    }

    pub fn display_name(&self) -> &str {
        &self.display_name
    }

    pub fn subgroups(&self) -> &BTreeMap<String, CategoryDictionary> {
        &self.subgroups
    }

    pub fn subgroup(&self, name: &str) -> Result<&CategoryDictionary> {
        self.subgroups
            .get(name)
            .ok_or_else(|| Error::UnknownSubgroup(name.to_owned()))
    }

    /// Inserts or replaces a subgroup. The dictionary is re-homed under this
    /// category's id and display name.
    pub fn with_subgroup(&self, name: &str, dict: &CategoryDictionary) -> Result<Self> {
        check_name("subgroup name", name)?;
        let dict = CategoryDictionary::new(&self.category_id, &self.display_name, dict.phrases())?;
        let mut next = self.clone();
        next.subgroups.insert(name.to_owned(), dict);
        Ok(next)
    }

    pub fn without_subgroup(&self, name: &str) -> Result<Self> {
        self.subgroup(name)?;
        if self.subgroups.len() == 1 {
            return Err(Error::Dictionary(format!(
                "{}: cannot remove the last subgroup",
                self.category_id
            )));
        }
        let mut next = self.clone();
        next.subgroups.remove(name);
        Ok(next)
    }
}

/// A category as it appears in a dictionary set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Category {
    Simple(CategoryDictionary),
    Subgroups(SubgroupDictionarySet),
}

impl Category {
    pub fn id(&self) -> &str {
        match self {
            Category::Simple(d) => d.category_id(),
            Category::Subgroups(s) => s.category_id(),
        }
    }

    pub fn display_name(&self) -> &str {
        match self {
            Category::Simple(d) => d.display_name(),
            Category::Subgroups(s) => s.display_name(),
        }
    }

    /// Each dictionary with its subgroup name (`None` for a simple category).
    pub fn dictionaries(&self) -> Vec<(Option<&str>, &CategoryDictionary)> {
        match self {
            Category::Simple(d) => vec![(None, d)],
            Category::Subgroups(s) => s.subgroups().iter().map(|(name, d)| (Some(name.as_str()), d)).collect(),
        }
    }

    pub fn descriptor_count(&self) -> usize {
        self.dictionaries().iter().map(|(_, d)| d.len()).sum()
    }

    pub fn grounded_texts(&self) -> Vec<&str> {
        self.dictionaries()
            .into_iter()
            .flat_map(|(_, d)| d.grounded_texts())
            .collect()
    }
}

impl From<CategoryDictionary> for Category {
    fn from(d: CategoryDictionary) -> Self {
        Category::Simple(d)
    }
}

impl From<SubgroupDictionarySet> for Category {
    fn from(s: SubgroupDictionarySet) -> Self {
        Category::Subgroups(s)
    }
}

/// All categories under classification, keyed and ordered by category id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DictionarySet {
    categories: BTreeMap<String, Category>,
}

impl DictionarySet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Category> {
        self.categories.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.categories.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.categories.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Category> {
        self.categories.values()
    }

    /// Inserts or replaces a category, returning the previous one.
    pub fn insert(&mut self, category: impl Into<Category>) -> Option<Category> {
        let category = category.into();
        self.categories.insert(category.id().to_owned(), category)
    }

    pub fn remove(&mut self, id: &str) -> Option<Category> {
        self.categories.remove(id)
    }

    /// A copy restricted to the given ids.
    pub fn subset<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut out = Self::new();
        for id in ids {
            let category = self.get(id).ok_or_else(|| Error::UnknownCategory(id.to_owned()))?;
            out.insert(category.clone());
        }
        Ok(out)
    }

    /// Every grounded text, deduplicated, in category order.
    pub fn grounded_texts(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.iter()
            .flat_map(Category::grounded_texts)
            .filter(|t| seen.insert(*t))
            .collect()
    }

    /// Grounded texts that `store` has no embedding for.
    pub fn missing_texts(&self, store: &EmbeddingStore) -> Vec<String> {
        self.grounded_texts()
            .into_iter()
            .filter(|t| !store.contains(t))
            .map(str::to_owned)
            .collect()
    }
}

impl FromIterator<Category> for DictionarySet {
    fn from_iter<T: IntoIterator<Item = Category>>(iter: T) -> Self {
        let mut set = Self::new();
        for c in iter {
            set.insert(c);
        }
        set
    }
}
