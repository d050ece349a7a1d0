//! Per-language resource bundles.
//!
//! A [`ResourceBundle`] holds every language-dependent fact the pipeline
//! consumes: the abbreviation lexicon, the tag lexicon and context rules of
//! the built-in tagger, the map from the tagger's tagset onto the parser's,
//! the grammar, the semantic lexicon, lemma rules, case frames, the ontology
//! and the noun-phrase structure patterns. Bundles are read from one XML file
//! ([`load_bundle`]), cross-checked by [`validate_bundle`] and written back
//! canonically by [`serialize_bundle`]. A loaded bundle is never mutated by
//! the pipeline and can be shared freely between threads.

mod load;
mod serialize;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use load::{load_bundle, parse_bundle};
pub use serialize::serialize_bundle;
pub use validate::{validate_bundle, Finding, FindingCode, Location, Section, Severity, ValidationReport};

/// Flat feature set carried by a grammar category, e.g. `case=nom`.
pub type Features = BTreeMap<String, String>;

/// Concept identifier inside an [`Ontology`].
pub type ConceptId = String;

#[derive(Debug, thiserror::Error)]
pub enum ResourceError {
    #[error("cannot read resource file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed resource at {location}: {reason}")]
    MalformedResource { location: String, reason: String },
    #[error("ontology has a cycle through concept `{0}`")]
    CyclicOntology(ConceptId),
}

impl ResourceError {
    pub(crate) fn malformed(location: impl Into<String>, reason: impl Into<String>) -> Self {
        ResourceError::MalformedResource {
            location: location.into(),
            reason: reason.into(),
        }
    }
}

/// How subject and object are identified in a parse tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GfMode {
    /// By position relative to the verb phrase.
    #[default]
    Positional,
    /// By the `case` feature on noun phrases.
    CaseMarked,
}

impl GfMode {
    pub fn as_str(self) -> &'static str {
        match self {
            GfMode::Positional => "positional",
            GfMode::CaseMarked => "case-marked",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "positional" => Some(GfMode::Positional),
            "case-marked" => Some(GfMode::CaseMarked),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Category {
    pub name: String,
    pub features: Features,
}

impl Category {
    pub fn new(name: impl Into<String>) -> Self {
        Category {
            name: name.into(),
            features: Features::new(),
        }
    }

    pub fn with_feature(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.features.insert(key.into(), value.into());
        self
    }

    /// Flat feature compatibility: names are equal and every key present on
    /// both sides carries the same value.
    pub fn matches(&self, other: &Category) -> bool {
        self.name == other.name && features_compatible(&self.features, &other.features)
    }
}

pub fn features_compatible(a: &Features, b: &Features) -> bool {
    a.iter()
        .all(|(key, value)| b.get(key).is_none_or(|other| other == value))
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.features.is_empty() {
            f.write_str("[")?;
            for (i, (k, v)) in self.features.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{k}={v}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarRule {
    pub lhs: Category,
    pub rhs: Vec<Category>,
    /// Zero-based index of the head daughter in `rhs`.
    pub head: usize,
}

impl GrammarRule {
    pub fn new(lhs: Category, rhs: Vec<Category>, head: usize) -> Self {
        GrammarRule { lhs, rhs, head }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Grammar {
    pub start_symbol: String,
    pub rules: Vec<GrammarRule>,
}

impl Grammar {
    pub fn is_nonterminal(&self, name: &str) -> bool {
        self.rules.iter().any(|r| r.lhs.name == name)
    }

    /// Right-hand-side category names that no rule expands.
    pub fn terminals(&self) -> BTreeSet<&str> {
        let lhs: BTreeSet<&str> = self.rules.iter().map(|r| r.lhs.name.as_str()).collect();
        self.rules
            .iter()
            .flat_map(|r| r.rhs.iter().map(|c| c.name.as_str()))
            .filter(|name| !lhs.contains(name))
            .collect()
    }

    pub fn has_feature(&self, key: &str) -> bool {
        self.rules.iter().any(|r| {
            r.lhs.features.contains_key(key) || r.rhs.iter().any(|c| c.features.contains_key(key))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TagLexicon {
    /// Word form to source tags; the first tag is the one used for initial tagging.
    pub entries: BTreeMap<String, Vec<String>>,
    pub default_tag: String,
    pub unknown_capitalized_tag: Option<String>,
}

impl TagLexicon {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.default_tag.is_empty() && self.unknown_capitalized_tag.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Trigger {
    PrevTag,
    NextTag,
    Prev2Tag,
    Next2Tag,
    PrevWord,
    NextWord,
}

impl Trigger {
    pub const ALL: [Trigger; 6] = [
        Trigger::PrevTag,
        Trigger::NextTag,
        Trigger::Prev2Tag,
        Trigger::Next2Tag,
        Trigger::PrevWord,
        Trigger::NextWord,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Trigger::PrevTag => "prev_tag",
            Trigger::NextTag => "next_tag",
            Trigger::Prev2Tag => "prev2_tag",
            Trigger::Next2Tag => "next2_tag",
            Trigger::PrevWord => "prev_word",
            Trigger::NextWord => "next_word",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Trigger::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

/// Transformation rule: retag `from_tag` as `to_tag` when the trigger holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextRule {
    pub from_tag: String,
    pub to_tag: String,
    pub trigger: Trigger,
    pub value: String,
}

/// Parser tag (plus optional features) a source tag maps onto.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagTarget {
    pub tag: String,
    pub features: Features,
}

impl TagTarget {
    pub fn new(tag: impl Into<String>) -> Self {
        TagTarget {
            tag: tag.into(),
            features: Features::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TagsetMap {
    pub source_name: String,
    pub entries: BTreeMap<String, TagTarget>,
}

impl TagsetMap {
    pub fn get(&self, source_tag: &str) -> Option<&TagTarget> {
        self.entries.get(source_tag)
    }

    pub fn targets(&self) -> BTreeSet<&str> {
        self.entries.values().map(|t| t.tag.as_str()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.source_name.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaRule {
    pub strip: String,
    /// Minimum stem length in characters after stripping.
    pub min_stem_len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemLexEntry {
    pub lemma: String,
    /// Parser tag the entry applies to.
    pub pos: String,
    pub semclass: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GramFunction {
    Subject,
    Object,
}

impl GramFunction {
    pub fn as_str(self) -> &'static str {
        match self {
            GramFunction::Subject => "subject",
            GramFunction::Object => "object",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "subject" => Some(GramFunction::Subject),
            "object" => Some(GramFunction::Object),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub role: String,
    pub gf: GramFunction,
    pub fill_concept: ConceptId,
    pub required: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseFrame {
    pub id: String,
    pub predicate_lemma: String,
    pub relation: String,
    pub slots: Vec<Slot>,
}

/// Concept hierarchy. Multiple parents are allowed; the `isa` graph is acyclic.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Ontology {
    /// Every concept with its direct parents.
    pub concepts: BTreeMap<ConceptId, BTreeSet<ConceptId>>,
    /// Semantic class to concept.
    pub lexmap: BTreeMap<String, ConceptId>,
}

impl Ontology {
    pub fn contains(&self, concept: &str) -> bool {
        self.concepts.contains_key(concept)
    }

    pub fn parents(&self, concept: &str) -> impl Iterator<Item = &ConceptId> {
        self.concepts.get(concept).into_iter().flatten()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty() && self.lexmap.is_empty()
    }

    /// Returns a concept that lies on an `isa` cycle, if any.
    pub fn find_cycle(&self) -> Option<&ConceptId> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Unseen,
            Active,
            Done,
        }
        let ids: Vec<&ConceptId> = self.concepts.keys().collect();
        let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut marks = vec![Mark::Unseen; ids.len()];

        for root in 0..ids.len() {
            if marks[root] != Mark::Unseen {
                continue;
            }
            // iterative DFS; each frame holds the node and its parent iterator position
            let mut stack: Vec<(usize, Vec<usize>)> = Vec::new();
            let children = |i: usize| -> Vec<usize> {
                self.parents(ids[i])
                    .filter_map(|p| index.get(p.as_str()).copied())
                    .collect()
            };
            marks[root] = Mark::Active;
            stack.push((root, children(root)));
            while let Some((node, pending)) = stack.last_mut() {
                match pending.pop() {
                    Some(next) => match marks[next] {
                        Mark::Active => return Some(ids[next]),
                        Mark::Unseen => {
                            marks[next] = Mark::Active;
                            let c = children(next);
                            stack.push((next, c));
                        }
                        Mark::Done => {}
                    },
                    None => {
                        marks[*node] = Mark::Done;
                        stack.pop();
                    }
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternElement {
    pub name: String,
    /// Surface form the matched child must have, compared case-insensitively.
    pub form: Option<String>,
}

/// Maps a constituent with a given daughter sequence onto a binary relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructPattern {
    pub id: String,
    pub constituent_cat: String,
    pub elements: Vec<PatternElement>,
    pub relation: String,
    /// Zero-based daughter index whose head token becomes the first argument.
    pub arg1: usize,
    pub arg2: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResourceBundle {
    pub lang: String,
    pub abbreviations: BTreeSet<String>,
    pub tag_lexicon: TagLexicon,
    pub context_rules: Vec<ContextRule>,
    pub tagset_map: TagsetMap,
    pub grammar: Grammar,
    pub gf_mode: GfMode,
    pub sem_lexicon: Vec<SemLexEntry>,
    pub lemma_rules: Vec<LemmaRule>,
    pub frames: Vec<CaseFrame>,
    pub ontology: Ontology,
    pub struct_patterns: Vec<StructPattern>,
}

impl ResourceBundle {
    pub fn new(lang: impl Into<String>) -> Self {
        ResourceBundle {
            lang: lang.into(),
            ..Default::default()
        }
    }

    pub fn sem_entry(&self, lemma: &str, pos: &str) -> Option<&SemLexEntry> {
        self.sem_lexicon.iter().find(|e| e.lemma == lemma && e.pos == pos)
    }

    pub fn frame(&self, id: &str) -> Option<&CaseFrame> {
        self.frames.iter().find(|f| f.id == id)
    }
}
