use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FindingCode {
    /// A grammar terminal that no tagset mapping produces.
    UnreachableTerminal,
    /// A reference to a concept the ontology does not define.
    DanglingConceptRef,
    /// A frame predicate without a semantic lexicon entry.
    MissingPredicateEntry,
    /// A structure pattern category that is neither a grammar category nor a parser tag.
    UnknownPatternCategory,
    /// A semantic lexicon entry whose pos is not a parser tag.
    UnknownSemLexPos,
    /// A tag the tagger can emit that the tagset map does not cover.
    UnmappableSourceTag,
    /// Unary grammar rules that derive each other.
    UnaryCycle,
}

impl FindingCode {
    pub fn severity(self) -> Severity {
        match self {
            FindingCode::UnmappableSourceTag => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

/// Bundle sections in document order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Section {
    TagLexicon,
    Rules,
    Grammar,
    SemLex,
    Frames,
    Ontology,
    Lexmap,
    StructMap,
}

impl Section {
    fn path(self) -> (&'static str, &'static str) {
        match self {
            Section::TagLexicon => ("taglexicon", "w"),
            Section::Rules => ("rules", "rule"),
            Section::Grammar => ("grammar", "rule"),
            Section::SemLex => ("semlex", "entry"),
            Section::Frames => ("frames", "frame"),
            Section::Ontology => ("ontology", "concept"),
            Section::Lexmap => ("ontology", "lexmap"),
            Section::StructMap => ("structmap", "pattern"),
        }
    }
}

/// Position of a finding: section, item within the section and sub-item
/// (rule daughter, frame slot, pattern element). `None` denotes the
/// enclosing element itself and sorts first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location {
    pub section: Section,
    pub item: Option<usize>,
    pub sub: Option<usize>,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (section, item) = self.section.path();
        f.write_str(section)?;
        if let Some(i) = self.item {
            write!(f, "/{item}[{}]", i + 1)?;
        }
        if let Some(s) = self.sub {
            write!(f, "/[{}]", s + 1)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Finding {
    pub location: Location,
    pub code: FindingCode,
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{sev}\t{:?}\t{}\t{}", self.code, self.location, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn count(&self, code: FindingCode) -> usize {
        self.findings.iter().filter(|f| f.code == code).count()
    }
}

struct Collector(Vec<Finding>);

impl Collector {
    fn push(&mut self, code: FindingCode, section: Section, item: Option<usize>, sub: Option<usize>, message: String) {
        self.0.push(Finding {
            location: Location { section, item, sub },
            code,
            severity: code.severity(),
            message,
        });
    }
}

/// Cross-checks references between bundle sections. Problems are reported,
/// never raised; the report is sorted by location.
pub fn validate_bundle(bundle: &ResourceBundle) -> ValidationReport {
    let mut out = Collector(Vec::new());
    let map = &bundle.tagset_map;
    let parser_tags = map.targets();
    let onto = &bundle.ontology;

    // tags the built-in tagger can emit must be mappable
    let lex = &bundle.tag_lexicon;
    if !lex.is_empty() {
        let mut unmappable = |tag: &str, item: Option<usize>, what: &str| {
            if map.get(tag).is_none() {
                out.push(
                    FindingCode::UnmappableSourceTag,
                    Section::TagLexicon,
                    item,
                    None,
                    format!("{what} tag `{tag}` has no tagset mapping"),
                );
            }
        };
        unmappable(&lex.default_tag, None, "default");
        if let Some(cap) = &lex.unknown_capitalized_tag {
            unmappable(cap, None, "capitalized");
        }
        for (i, tags) in lex.entries.values().enumerate() {
            for tag in tags {
                unmappable(tag, Some(i), "lexicon");
            }
        }
    }
    for (i, rule) in bundle.context_rules.iter().enumerate() {
        if map.get(&rule.to_tag).is_none() {
            out.push(
                FindingCode::UnmappableSourceTag,
                Section::Rules,
                Some(i),
                None,
                format!("rule target tag `{}` has no tagset mapping", rule.to_tag),
            );
        }
    }

    let grammar = &bundle.grammar;
    for (i, rule) in grammar.rules.iter().enumerate() {
        for (j, cat) in rule.rhs.iter().enumerate() {
            if !grammar.is_nonterminal(&cat.name) && !parser_tags.contains(cat.name.as_str()) {
                out.push(
                    FindingCode::UnreachableTerminal,
                    Section::Grammar,
                    Some(i),
                    Some(j),
                    format!("terminal `{}` is not produced by any tagset mapping", cat.name),
                );
            }
        }
    }
    for i in unary_cycle_rules(grammar) {
        out.push(
            FindingCode::UnaryCycle,
            Section::Grammar,
            Some(i),
            None,
            format!("unary rule {} -> {} lies on a cycle", grammar.rules[i].lhs.name, grammar.rules[i].rhs[0].name),
        );
    }

    for (i, entry) in bundle.sem_lexicon.iter().enumerate() {
        if !parser_tags.contains(entry.pos.as_str()) {
            out.push(
                FindingCode::UnknownSemLexPos,
                Section::SemLex,
                Some(i),
                None,
                format!("pos `{}` of `{}` is not a parser tag", entry.pos, entry.lemma),
            );
        }
    }

    for (i, frame) in bundle.frames.iter().enumerate() {
        if !bundle.sem_lexicon.iter().any(|e| e.lemma == frame.predicate_lemma) {
            out.push(
                FindingCode::MissingPredicateEntry,
                Section::Frames,
                Some(i),
                None,
                format!("predicate `{}` has no semantic lexicon entry", frame.predicate_lemma),
            );
        }
        for (j, slot) in frame.slots.iter().enumerate() {
            if !onto.contains(&slot.fill_concept) {
                out.push(
                    FindingCode::DanglingConceptRef,
                    Section::Frames,
                    Some(i),
                    Some(j),
                    format!("slot `{}` requires unknown concept `{}`", slot.role, slot.fill_concept),
                );
            }
        }
    }

    for (i, (concept, parents)) in onto.concepts.iter().enumerate() {
        for parent in parents {
            if !onto.contains(parent) {
                out.push(
                    FindingCode::DanglingConceptRef,
                    Section::Ontology,
                    Some(i),
                    None,
                    format!("`{concept}` isa unknown concept `{parent}`"),
                );
            }
        }
    }
    for (i, (semclass, concept)) in onto.lexmap.iter().enumerate() {
        if !onto.contains(concept) {
            out.push(
                FindingCode::DanglingConceptRef,
                Section::Lexmap,
                Some(i),
                None,
                format!("semclass `{semclass}` maps to unknown concept `{concept}`"),
            );
        }
    }

    let known_category = |name: &str| grammar.is_nonterminal(name) || parser_tags.contains(name);
    for (i, pattern) in bundle.struct_patterns.iter().enumerate() {
        if !known_category(&pattern.constituent_cat) {
            out.push(
                FindingCode::UnknownPatternCategory,
                Section::StructMap,
                Some(i),
                None,
                format!("constituent category `{}` is unknown", pattern.constituent_cat),
            );
        }
        for (j, m) in pattern.elements.iter().enumerate() {
            if !known_category(&m.name) {
                out.push(
                    FindingCode::UnknownPatternCategory,
                    Section::StructMap,
                    Some(i),
                    Some(j),
                    format!("category `{}` is unknown", m.name),
                );
            }
        }
    }

    let mut findings = out.0;
    findings.sort();
    ValidationReport { findings }
}

/// Indices of unary rules `A -> B` where `B` derives `A` through unary rules.
fn unary_cycle_rules(grammar: &Grammar) -> Vec<usize> {
    let mut edges: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for rule in grammar.rules.iter().filter(|r| r.rhs.len() == 1) {
        edges.entry(rule.lhs.name.as_str()).or_default().insert(rule.rhs[0].name.as_str());
    }
    let reaches = |from: &str, target: &str| -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(node) = stack.pop() {
            if node == target {
                return true;
            }
            if seen.insert(node) {
                stack.extend(edges.get(node).into_iter().flatten().copied());
            }
        }
        false
    };
    grammar
        .rules
        .iter()
        .enumerate()
        .filter(|(_, r)| r.rhs.len() == 1 && reaches(&r.rhs[0].name, &r.lhs.name))
        .map(|(i, _)| i)
        .collect()
}
