//! Semantic interpretation of parsed sentences: lexicon-based semantic
//! tagging, ontology subsumption, subject/object assignment, case-frame
//! instantiation and structure-pattern relations.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::parser::ParseTree;
use crate::resource::{CaseFrame, ConceptId, GfMode, GramFunction, Ontology, ResourceBundle, StructPattern};
use crate::tagger::TaggedToken;

/// Category names the grammatical-function rules look for.
pub const NOUN_PHRASE: &str = "NP";
pub const VERB_PHRASE: &str = "VP";
pub const VERB: &str = "V";
/// Feature carrying morphological case in case-marked mode.
pub const CASE_FEATURE: &str = "case";
pub const NOMINATIVE: &str = "nom";
pub const ACCUSATIVE: &str = "acc";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemanticError {
    #[error("unknown concept `{0}`")]
    UnknownConcept(ConceptId),
}

/// Fills `lemma`, `semclass` and `concept` from the semantic lexicon. The
/// lowercased form is tried first, then each lemma rule in order; the first
/// candidate with an entry for the token's parser tag wins.
pub fn semantic_tag(mut tagged: Vec<TaggedToken>, bundle: &ResourceBundle) -> Vec<TaggedToken> {
    let entries: HashMap<(&str, &str), &str> = bundle
        .sem_lexicon
        .iter()
        .map(|e| ((e.lemma.as_str(), e.pos.as_str()), e.semclass.as_str()))
        .collect();
    for t in &mut tagged {
        let Some(pos) = t.parser_tag.as_deref() else {
            continue;
        };
        let lower = t.token.form.to_lowercase();
        let mut candidates = vec![lower.clone()];
        for rule in &bundle.lemma_rules {
            if let Some(stem) = lower.strip_suffix(rule.strip.as_str()) {
                if stem.chars().count() >= rule.min_stem_len {
                    candidates.push(stem.to_string());
                }
            }
        }
        let hit = candidates
            .into_iter()
            .find_map(|lemma| entries.get(&(lemma.as_str(), pos)).map(|sc| (lemma.clone(), sc.to_string())));
        if let Some((lemma, semclass)) = hit {
            t.concept = bundle.ontology.lexmap.get(&semclass).cloned();
            t.lemma = Some(lemma);
            t.semclass = Some(semclass);
        }
    }
    tagged
}

/// True when `ancestor` is `descendant` or reachable from it via `isa` edges.
pub fn subsumes(ontology: &Ontology, ancestor: &str, descendant: &str) -> Result<bool, SemanticError> {
    for id in [ancestor, descendant] {
        if !ontology.contains(id) {
            return Err(SemanticError::UnknownConcept(id.to_string()));
        }
    }
    let mut seen = BTreeSet::new();
    let mut stack = vec![descendant];
    while let Some(c) = stack.pop() {
        if c == ancestor {
            return Ok(true);
        }
        if seen.insert(c) {
            stack.extend(ontology.parents(c).map(String::as_str));
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GrammaticalFunctions<'t> {
    pub subject: Option<&'t ParseTree>,
    pub object: Option<&'t ParseTree>,
}

impl<'t> GrammaticalFunctions<'t> {
    pub fn get(&self, gf: GramFunction) -> Option<&'t ParseTree> {
        match gf {
            GramFunction::Subject => self.subject,
            GramFunction::Object => self.object,
        }
    }
}

/// Finds subject and object constituents.
///
/// Positional: the subject is the first NP daughter of the root before its
/// VP daughter, the object the first NP inside that VP after its V.
/// Case-marked: the first NP in pre-order with `case=nom` (subject) or
/// `case=acc` (object), wherever it sits.
pub fn grammatical_functions(tree: &ParseTree, mode: GfMode) -> GrammaticalFunctions<'_> {
    match mode {
        GfMode::Positional => {
            let mut out = GrammaticalFunctions::default();
            let Some(vp_at) = tree.children.iter().position(|c| c.name() == VERB_PHRASE) else {
                return out;
            };
            out.subject = tree.children[..vp_at].iter().find(|c| c.name() == NOUN_PHRASE);
            let vp = &tree.children[vp_at];
            if let Some(v_at) = vp.children.iter().position(|c| c.name() == VERB) {
                out.object = vp.children[v_at + 1..].iter().find(|c| c.name() == NOUN_PHRASE);
            }
            out
        }
        GfMode::CaseMarked => {
            let nodes = tree.preorder();
            let with_case = |value: &str| {
                nodes.iter().copied().find(|n| {
                    n.name() == NOUN_PHRASE && n.category.features.get(CASE_FEATURE).map(String::as_str) == Some(value)
                })
            };
            GrammaticalFunctions {
                subject: with_case(NOMINATIVE),
                object: with_case(ACCUSATIVE),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotBinding {
    pub role: String,
    pub gf: GramFunction,
    /// Global token id of the filler's head token.
    pub token: usize,
    pub concept: ConceptId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameInstance {
    pub frame_id: String,
    pub relation: String,
    /// Global token id of the predicate.
    pub predicate: usize,
    /// Bindings in the frame's slot order.
    pub bindings: Vec<SlotBinding>,
}

impl FrameInstance {
    pub fn binding(&self, gf: GramFunction) -> Option<&SlotBinding> {
        self.bindings.iter().find(|b| b.gf == gf)
    }

    /// Re-checks the instance against its frame and ontology.
    pub fn is_consistent(&self, frame: &CaseFrame, ontology: &Ontology) -> bool {
        frame.id == self.frame_id
            && self.bindings.iter().all(|b| {
                frame.slots.iter().any(|s| {
                    s.role == b.role && s.gf == b.gf && subsumes(ontology, &s.fill_concept, &b.concept).unwrap_or(false)
                })
            })
            && frame
                .slots
                .iter()
                .filter(|s| s.required)
                .all(|s| self.bindings.iter().any(|b| b.role == s.role))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiagnosticCode {
    MissingSlot,
    ConstraintViolation,
    UnmappedTag,
    /// No complete parse; chunks were used instead.
    NoCompleteParse,
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A recorded, non-fatal analysis problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    /// Global token id the diagnostic is anchored at, if any.
    pub token: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrameOutcome {
    pub instances: Vec<FrameInstance>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Instantiates the bundle's case frames for every predicate token inside
/// `tree`. Fillers are the head tokens of the subject/object constituents;
/// an instance is kept only if all required slots bind and every filler's
/// concept falls under the slot's concept. `tagged` is indexed by tree
/// positions.
pub fn instantiate_frames(tree: &ParseTree, tagged: &[TaggedToken], bundle: &ResourceBundle) -> FrameOutcome {
    let mut outcome = FrameOutcome::default();
    let functions = grammatical_functions(tree, bundle.gf_mode);
    for pos in tree.leaves() {
        let Some(token) = tagged.get(pos) else { continue };
        let Some(lemma) = token.lemma.as_deref() else { continue };
        for frame in bundle.frames.iter().filter(|f| f.predicate_lemma == lemma) {
            match bind_frame(frame, &functions, tagged, &bundle.ontology, token.token.id) {
                Ok(instance) => outcome.instances.push(instance),
                Err(diag) => outcome.diagnostics.push(diag),
            }
        }
    }
    outcome
}

fn bind_frame(
    frame: &CaseFrame,
    functions: &GrammaticalFunctions,
    tagged: &[TaggedToken],
    ontology: &Ontology,
    predicate: usize,
) -> Result<FrameInstance, Diagnostic> {
    let mut bindings = Vec::new();
    for slot in &frame.slots {
        let filler = functions.get(slot.gf).and_then(|c| tagged.get(c.head_token()));
        let Some(filler) = filler else {
            if slot.required {
                return Err(Diagnostic {
                    code: DiagnosticCode::MissingSlot,
                    token: Some(predicate),
                    message: format!("frame {}: no {} for role {}", frame.id, slot.gf.as_str(), slot.role),
                });
            }
            continue;
        };
        let fits = filler
            .concept
            .as_deref()
            .is_some_and(|c| subsumes(ontology, &slot.fill_concept, c).unwrap_or(false));
        if !fits {
            if !slot.required {
                continue;
            }
            return Err(Diagnostic {
                code: DiagnosticCode::ConstraintViolation,
                token: Some(filler.token.id),
                message: format!(
                    "frame {}: `{}` ({}) is not a {} for role {}",
                    frame.id,
                    filler.token.form,
                    filler.concept.as_deref().unwrap_or("no concept"),
                    slot.fill_concept,
                    slot.role
                ),
            });
        }
        bindings.push(SlotBinding {
            role: slot.role.clone(),
            gf: slot.gf,
            token: filler.token.id,
            concept: filler.concept.clone().expect("checked above"),
        });
    }
    Ok(FrameInstance {
        frame_id: frame.id.clone(),
        relation: frame.relation.clone(),
        predicate,
        bindings,
    })
}

/// Where a relation came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationSource {
    Frame(String),
    Pattern(String),
}

impl RelationSource {
    pub fn id(&self) -> &str {
        match self {
            RelationSource::Frame(id) | RelationSource::Pattern(id) => id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationArg {
    pub role: String,
    /// Global token id.
    pub token: usize,
}

/// A binary semantic relation between two tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub arg1: RelationArg,
    pub arg2: RelationArg,
    /// Predicate token for frame-derived relations.
    pub predicate: Option<usize>,
    pub source: RelationSource,
}

impl Relation {
    /// Leftmost token involved, used for document ordering.
    pub fn anchor(&self) -> usize {
        [Some(self.arg1.token), Some(self.arg2.token), self.predicate]
            .into_iter()
            .flatten()
            .min()
            .expect("relation has arguments")
    }

    /// Subject filler as `arg1`, object filler as `arg2`; `None` unless both are bound.
    pub fn from_frame(instance: &FrameInstance) -> Option<Relation> {
        let subject = instance.binding(GramFunction::Subject)?;
        let object = instance.binding(GramFunction::Object)?;
        if subject.token == object.token {
            return None;
        }
        Some(Relation {
            name: instance.relation.clone(),
            arg1: RelationArg {
                role: subject.role.clone(),
                token: subject.token,
            },
            arg2: RelationArg {
                role: object.role.clone(),
                token: object.token,
            },
            predicate: Some(instance.predicate),
            source: RelationSource::Frame(instance.frame_id.clone()),
        })
    }
}

fn child_form_matches(child: &ParseTree, form: &str, tagged: &[TaggedToken]) -> bool {
    let words: Vec<&str> = child
        .leaves()
        .into_iter()
        .filter_map(|p| tagged.get(p).map(TaggedToken::form))
        .collect();
    words.join(" ").to_lowercase() == form.to_lowercase()
}

fn pattern_matches(node: &ParseTree, pattern: &StructPattern, tagged: &[TaggedToken]) -> bool {
    node.name() == pattern.constituent_cat
        && !node.is_leaf()
        && node.children.len() == pattern.elements.len()
        && node.children.iter().zip(&pattern.elements).all(|(child, m)| {
            child.name() == m.name && m.form.as_deref().is_none_or(|f| child_form_matches(child, f, tagged))
        })
}

/// Relations from every node of `tree` whose daughter sequence matches a
/// structure pattern. Arguments are the head tokens of the pattern's
/// argument daughters.
pub fn map_np_structure(tree: &ParseTree, patterns: &[StructPattern], tagged: &[TaggedToken]) -> Vec<Relation> {
    let mut out = Vec::new();
    tree.walk(&mut |node| {
        for pattern in patterns.iter().filter(|p| pattern_matches(node, p, tagged)) {
            let arg = |i: usize| node.children[i].head_token();
            let (Some(a1), Some(a2)) = (tagged.get(arg(pattern.arg1)), tagged.get(arg(pattern.arg2))) else {
                continue;
            };
            out.push(Relation {
                name: pattern.relation.clone(),
                arg1: RelationArg {
                    role: "arg1".into(),
                    token: a1.token.id,
                },
                arg2: RelationArg {
                    role: "arg2".into(),
                    token: a2.token.id,
                },
                predicate: None,
                source: RelationSource::Pattern(pattern.id.clone()),
            });
        }
    });
    out
}
