//! Part-of-speech tagging and tagset mapping.
//!
//! The built-in tagger is transformation based: [`initial_tag`] assigns each
//! token its most likely tag from the bundle's tag lexicon, then
//! [`apply_rules`] runs the bundle's context rules over the sequence. Output
//! of an external tagger can be imported instead with
//! [`import_external_tags`]. Either way [`map_tagset`] translates the source
//! tags onto the tags the grammar uses as terminals.

use std::path::Path;

use crate::resource::{ContextRule, ConceptId, Features, ResourceBundle, TagsetMap, Trigger};
use crate::structure::{Sentence, Token};

#[derive(Debug, thiserror::Error)]
pub enum TagError {
    #[error("cannot read tag file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {0}: expected `form<TAB>tag`")]
    MalformedLine(usize),
    #[error("tag `{tag}` at byte offset {offset} has no tagset mapping")]
    UnmappedTag { tag: String, offset: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub token: Token,
    pub source_tag: String,
    pub parser_tag: Option<String>,
    /// Features contributed by the tagset mapping, e.g. `case=nom`.
    pub features: Features,
    pub lemma: Option<String>,
    pub semclass: Option<String>,
    pub concept: Option<ConceptId>,
}

impl TaggedToken {
    pub fn new(token: Token, source_tag: impl Into<String>) -> Self {
        TaggedToken {
            token,
            source_tag: source_tag.into(),
            parser_tag: None,
            features: Features::new(),
            lemma: None,
            semclass: None,
            concept: None,
        }
    }

    pub fn form(&self) -> &str {
        &self.token.form
    }
}

fn is_capitalized(form: &str) -> bool {
    form.chars().next().is_some_and(char::is_uppercase)
}

/// Assigns every token its first lexicon tag (exact form, then lowercased).
/// Unknown capitalized tokens after the first position get the lexicon's
/// capitalized tag when one is configured; everything else gets the default.
pub fn initial_tag(sentence: &Sentence, bundle: &ResourceBundle) -> Vec<TaggedToken> {
    let lex = &bundle.tag_lexicon;
    sentence
        .tokens
        .iter()
        .enumerate()
        .map(|(i, token)| {
            let known = lex
                .entries
                .get(&token.form)
                .or_else(|| lex.entries.get(&token.form.to_lowercase()))
                .and_then(|tags| tags.first());
            let tag = match (known, &lex.unknown_capitalized_tag) {
                (Some(tag), _) => tag,
                (None, Some(cap)) if i > 0 && is_capitalized(&token.form) => cap,
                _ => &lex.default_tag,
            };
            TaggedToken::new(token.clone(), tag.clone())
        })
        .collect()
}

fn rule_fires(tagged: &[TaggedToken], i: usize, rule: &ContextRule) -> bool {
    let at = |delta: isize| -> Option<&TaggedToken> {
        i.checked_add_signed(delta).and_then(|j| tagged.get(j))
    };
    let context = match rule.trigger {
        Trigger::PrevTag => at(-1).map(|t| &t.source_tag),
        Trigger::NextTag => at(1).map(|t| &t.source_tag),
        Trigger::Prev2Tag => at(-2).map(|t| &t.source_tag),
        Trigger::Next2Tag => at(2).map(|t| &t.source_tag),
        Trigger::PrevWord => at(-1).map(|t| &t.token.form),
        Trigger::NextWord => at(1).map(|t| &t.token.form),
    };
    tagged[i].source_tag == rule.from_tag && context.is_some_and(|v| *v == rule.value)
}

/// Applies `rules` in order. Each rule makes one left-to-right sweep and
/// rewrites in place, so a tag changed at position `i` is already visible
/// when position `i + 1` is tested.
pub fn apply_rules(mut tagged: Vec<TaggedToken>, rules: &[ContextRule]) -> Vec<TaggedToken> {
    for rule in rules {
        for i in 0..tagged.len() {
            if rule_fires(&tagged, i, rule) {
                tagged[i].source_tag = rule.to_tag.clone();
            }
        }
    }
    tagged
}

/// Built-in tagging of one sentence: lexicon lookup, then context rules.
pub fn tag_sentence(sentence: &Sentence, bundle: &ResourceBundle) -> Vec<TaggedToken> {
    apply_rules(initial_tag(sentence, bundle), &bundle.context_rules)
}

/// Reads `form<TAB>tag` lines; a blank line ends a sentence. Offsets are
/// those of the text obtained by joining all forms with single spaces
/// (see [`external_text`]).
pub fn import_external_tags(path: impl AsRef<Path>) -> Result<Vec<Vec<TaggedToken>>, TagError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| TagError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_external_tags(&text)
}

pub fn parse_external_tags(input: &str) -> Result<Vec<Vec<TaggedToken>>, TagError> {
    let mut sentences = Vec::new();
    let mut current: Vec<TaggedToken> = Vec::new();
    let mut offset = 0;
    let mut next_id = 0;
    for (n, raw) in input.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(form), Some(tag), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(TagError::MalformedLine(n + 1));
        };
        if form.is_empty() || tag.is_empty() || form.chars().any(char::is_whitespace) {
            return Err(TagError::MalformedLine(n + 1));
        }
        if next_id > 0 {
            offset += 1;
        }
        let token = Token {
            id: next_id,
            form: form.to_string(),
            offset,
            length: form.len(),
        };
        offset += form.len();
        next_id += 1;
        current.push(TaggedToken::new(token, tag));
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    Ok(sentences)
}

/// The text that imported token offsets index into.
pub fn external_text(sentences: &[Vec<TaggedToken>]) -> String {
    let forms: Vec<&str> = sentences.iter().flatten().map(TaggedToken::form).collect();
    forms.join(" ")
}

/// Sets `parser_tag` (and mapped features) from the tagset map.
pub fn map_tagset(mut tagged: Vec<TaggedToken>, map: &TagsetMap) -> Result<Vec<TaggedToken>, TagError> {
    for t in &mut tagged {
        let Some(target) = map.get(&t.source_tag) else {
            return Err(TagError::UnmappedTag {
                tag: t.source_tag.clone(),
                offset: t.token.offset,
            });
        };
        t.parser_tag = Some(target.tag.clone());
        t.features = target.features.clone();
    }
    Ok(tagged)
}
