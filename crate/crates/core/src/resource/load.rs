use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use roxmltree::{Document, Node};

use super::*;

type Result<T> = std::result::Result<T, ResourceError>;

/// Reads and parses a bundle file.
pub fn load_bundle(path: impl AsRef<Path>) -> Result<ResourceBundle> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ResourceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_bundle(&text)
}

/// Parses bundle XML. Per-item invariants are enforced here; cross-section
/// references are left to [`validate_bundle`](super::validate_bundle).
pub fn parse_bundle(xml: &str) -> Result<ResourceBundle> {
    let doc = Document::parse(xml).map_err(|e| ResourceError::malformed(e.pos().to_string(), e.to_string()))?;
    Loader { doc: &doc }.bundle()
}

struct Loader<'a, 'input> {
    doc: &'a Document<'input>,
}

impl<'a, 'input> Loader<'a, 'input> {
    fn loc(&self, node: Node) -> String {
        let pos = self.doc.text_pos_at(node.range().start);
        format!("{}:{} <{}>", pos.row, pos.col, node.tag_name().name())
    }

    fn err<T>(&self, node: Node, reason: impl Into<String>) -> Result<T> {
        Err(ResourceError::malformed(self.loc(node), reason))
    }

    fn attr<'n>(&self, node: Node<'n, 'input>, name: &str) -> Result<&'n str> {
        match node.attribute(name) {
            Some(v) => Ok(v),
            None => self.err(node, format!("missing attribute `{name}`")),
        }
    }

    fn nonempty_attr(&self, node: Node<'a, 'input>, name: &str) -> Result<String> {
        let value = self.attr(node, name)?;
        if value.is_empty() {
            return self.err(node, format!("attribute `{name}` must not be empty"));
        }
        Ok(value.to_string())
    }

    fn index_attr(&self, node: Node, name: &str) -> Result<usize> {
        let raw = self.attr(node, name)?;
        match raw.parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v - 1),
            _ => self.err(node, format!("attribute `{name}` must be a 1-based index, got `{raw}`")),
        }
    }

    fn only_attrs(&self, node: Node, allowed: &[&str]) -> Result<()> {
        for a in node.attributes() {
            if !allowed.contains(&a.name()) {
                return self.err(node, format!("unexpected attribute `{}`", a.name()));
            }
        }
        Ok(())
    }

    /// Attributes outside `reserved`, read as features.
    fn features(&self, node: Node, reserved: &[&str]) -> Features {
        node.attributes()
            .filter(|a| !reserved.contains(&a.name()) && a.namespace().is_none())
            .map(|a| (a.name().to_string(), a.value().to_string()))
            .collect()
    }

    /// Child elements, all of which must be named `expected`.
    fn children(&self, node: Node<'a, 'input>, expected: &str) -> Result<Vec<Node<'a, 'input>>> {
        let mut out = Vec::new();
        for child in node.children() {
            if child.is_text() {
                if child.text().is_some_and(|t| !t.trim().is_empty()) {
                    return self.err(node, "unexpected text content");
                }
                continue;
            }
            if !child.is_element() {
                continue;
            }
            if child.tag_name().name() != expected {
                return self.err(child, format!("unexpected element, expected <{expected}>"));
            }
            out.push(child);
        }
        Ok(out)
    }

    fn bundle(&self) -> Result<ResourceBundle> {
        let root = self.doc.root_element();
        if root.tag_name().name() != "resources" {
            return self.err(root, "root element must be <resources>");
        }
        self.only_attrs(root, &["lang"])?;
        let mut bundle = ResourceBundle::new(self.nonempty_attr(root, "lang")?);

        let mut seen = BTreeSet::new();
        for section in root.children().filter(Node::is_element) {
            let name = section.tag_name().name();
            if !seen.insert(name) {
                return self.err(section, "section appears more than once");
            }
            match name {
                "abbreviations" => bundle.abbreviations = self.abbreviations(section)?,
                "taglexicon" => bundle.tag_lexicon = self.tag_lexicon(section)?,
                "rules" => bundle.context_rules = self.context_rules(section)?,
                "tagmap" => bundle.tagset_map = self.tagmap(section)?,
                "grammar" => {
                    let (grammar, mode) = self.grammar(section)?;
                    bundle.grammar = grammar;
                    bundle.gf_mode = mode;
                }
                "lemmarules" => bundle.lemma_rules = self.lemma_rules(section)?,
                "semlex" => bundle.sem_lexicon = self.sem_lexicon(section)?,
                "frames" => bundle.frames = self.frames(section)?,
                "ontology" => bundle.ontology = self.ontology(section)?,
                "structmap" => bundle.struct_patterns = self.struct_patterns(section)?,
                other => return self.err(section, format!("unknown section <{other}>")),
            }
        }
        Ok(bundle)
    }

    fn abbreviations(&self, section: Node<'a, 'input>) -> Result<BTreeSet<String>> {
        self.only_attrs(section, &[])?;
        let mut out = BTreeSet::new();
        for abbr in self.children(section, "abbr")? {
            self.only_attrs(abbr, &["form"])?;
            let form = self.nonempty_attr(abbr, "form")?;
            if form.chars().any(char::is_whitespace) {
                return self.err(abbr, "abbreviation must not contain whitespace");
            }
            out.insert(form);
        }
        Ok(out)
    }

    fn tag_lexicon(&self, section: Node<'a, 'input>) -> Result<TagLexicon> {
        self.only_attrs(section, &["default", "capitalized"])?;
        let mut lex = TagLexicon {
            default_tag: self.attr(section, "default")?.to_string(),
            unknown_capitalized_tag: section.attribute("capitalized").map(str::to_string),
            ..Default::default()
        };
        for w in self.children(section, "w")? {
            self.only_attrs(w, &["form", "tags"])?;
            let form = self.nonempty_attr(w, "form")?;
            let tags: Vec<String> = self.attr(w, "tags")?.split_whitespace().map(str::to_string).collect();
            if tags.is_empty() {
                return self.err(w, "entry lists no tags");
            }
            if lex.entries.insert(form, tags).is_some() {
                return self.err(w, "duplicate word form");
            }
        }
        Ok(lex)
    }

    fn context_rules(&self, section: Node<'a, 'input>) -> Result<Vec<ContextRule>> {
        self.only_attrs(section, &[])?;
        let mut out = Vec::new();
        for r in self.children(section, "rule")? {
            self.only_attrs(r, &["from", "to", "trigger", "value"])?;
            let from_tag = self.nonempty_attr(r, "from")?;
            let to_tag = self.nonempty_attr(r, "to")?;
            if from_tag == to_tag {
                return self.err(r, "rule must change the tag");
            }
            let raw = self.attr(r, "trigger")?;
            let Some(trigger) = Trigger::parse(raw) else {
                return self.err(r, format!("unknown trigger `{raw}`"));
            };
            let value = self.nonempty_attr(r, "value")?;
            out.push(ContextRule {
                from_tag,
                to_tag,
                trigger,
                value,
            });
        }
        Ok(out)
    }

    fn tagmap(&self, section: Node<'a, 'input>) -> Result<TagsetMap> {
        self.only_attrs(section, &["source"])?;
        let mut map = TagsetMap {
            source_name: section.attribute("source").unwrap_or_default().to_string(),
            entries: BTreeMap::new(),
        };
        for m in self.children(section, "map")? {
            let from = self.nonempty_attr(m, "from")?;
            let target = TagTarget {
                tag: self.nonempty_attr(m, "to")?,
                features: self.features(m, &["from", "to"]),
            };
            if map.entries.insert(from, target).is_some() {
                return self.err(m, "duplicate source tag");
            }
        }
        Ok(map)
    }

    fn category(&self, node: Node<'a, 'input>) -> Result<Category> {
        Ok(Category {
            name: self.nonempty_attr(node, "name")?,
            features: self.features(node, &["name"]),
        })
    }

    fn grammar(&self, section: Node<'a, 'input>) -> Result<(Grammar, GfMode)> {
        self.only_attrs(section, &["start", "gf"])?;
        let mode = match section.attribute("gf") {
            None => GfMode::Positional,
            Some(raw) => match GfMode::parse(raw) {
                Some(m) => m,
                None => return self.err(section, format!("unknown gf mode `{raw}`")),
            },
        };
        let mut grammar = Grammar {
            start_symbol: self.attr(section, "start")?.to_string(),
            rules: Vec::new(),
        };
        for r in self.children(section, "rule")? {
            let lhs = Category {
                name: self.nonempty_attr(r, "lhs")?,
                features: self.features(r, &["lhs", "head"]),
            };
            let rhs = self
                .children(r, "cat")?
                .into_iter()
                .map(|c| self.category(c))
                .collect::<Result<Vec<_>>>()?;
            if rhs.is_empty() {
                return self.err(r, "rule has an empty right-hand side");
            }
            let head = self.index_attr(r, "head")?;
            if head >= rhs.len() {
                return self.err(r, format!("head {} out of range 1..={}", head + 1, rhs.len()));
            }
            grammar.rules.push(GrammarRule { lhs, rhs, head });
        }
        if !grammar.rules.is_empty() && !grammar.is_nonterminal(&grammar.start_symbol) {
            return self.err(section, format!("start symbol `{}` has no rule", grammar.start_symbol));
        }
        if mode == GfMode::CaseMarked && !grammar.has_feature(crate::semantics::CASE_FEATURE) {
            return self.err(section, "case-marked mode needs a category with a `case` feature");
        }
        Ok((grammar, mode))
    }

    fn lemma_rules(&self, section: Node<'a, 'input>) -> Result<Vec<LemmaRule>> {
        self.only_attrs(section, &[])?;
        let mut out = Vec::new();
        for r in self.children(section, "lemrule")? {
            self.only_attrs(r, &["strip", "minstem"])?;
            let strip = self.nonempty_attr(r, "strip")?;
            let raw = self.attr(r, "minstem")?;
            let Ok(min_stem_len) = raw.parse::<usize>() else {
                return self.err(r, format!("minstem must be a count, got `{raw}`"));
            };
            out.push(LemmaRule { strip, min_stem_len });
        }
        Ok(out)
    }

    fn sem_lexicon(&self, section: Node<'a, 'input>) -> Result<Vec<SemLexEntry>> {
        self.only_attrs(section, &[])?;
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for e in self.children(section, "entry")? {
            self.only_attrs(e, &["lemma", "pos", "semclass"])?;
            let entry = SemLexEntry {
                lemma: self.nonempty_attr(e, "lemma")?,
                pos: self.nonempty_attr(e, "pos")?,
                semclass: self.nonempty_attr(e, "semclass")?,
            };
            if !seen.insert((entry.lemma.clone(), entry.pos.clone())) {
                return self.err(e, "duplicate (lemma, pos) entry");
            }
            out.push(entry);
        }
        Ok(out)
    }

    fn frames(&self, section: Node<'a, 'input>) -> Result<Vec<CaseFrame>> {
        self.only_attrs(section, &[])?;
        let mut out = Vec::new();
        for f in self.children(section, "frame")? {
            self.only_attrs(f, &["id", "predicate", "relation"])?;
            let mut frame = CaseFrame {
                id: self.nonempty_attr(f, "id")?,
                predicate_lemma: self.nonempty_attr(f, "predicate")?,
                relation: self.nonempty_attr(f, "relation")?,
                slots: Vec::new(),
            };
            for s in self.children(f, "slot")? {
                self.only_attrs(s, &["role", "gf", "fill", "required"])?;
                let raw_gf = self.attr(s, "gf")?;
                let Some(gf) = GramFunction::parse(raw_gf) else {
                    return self.err(s, format!("unknown grammatical function `{raw_gf}`"));
                };
                let required = match s.attribute("required").unwrap_or("true") {
                    "true" => true,
                    "false" => false,
                    other => return self.err(s, format!("required must be true or false, got `{other}`")),
                };
                let slot = Slot {
                    role: self.nonempty_attr(s, "role")?,
                    gf,
                    fill_concept: self.nonempty_attr(s, "fill")?,
                    required,
                };
                if frame.slots.iter().any(|o| o.role == slot.role) {
                    return self.err(s, format!("duplicate role `{}`", slot.role));
                }
                if frame.slots.iter().any(|o| o.gf == slot.gf) {
                    return self.err(s, format!("second slot for {}", gf.as_str()));
                }
                frame.slots.push(slot);
            }
            out.push(frame);
        }
        Ok(out)
    }

    fn ontology(&self, section: Node<'a, 'input>) -> Result<Ontology> {
        self.only_attrs(section, &[])?;
        let mut onto = Ontology::default();
        let mut isa_nodes = Vec::new();
        let mut lexmap_nodes = Vec::new();
        for child in section.children() {
            if child.is_text() && child.text().is_some_and(|t| !t.trim().is_empty()) {
                return self.err(section, "unexpected text content");
            }
            if !child.is_element() {
                continue;
            }
            match child.tag_name().name() {
                "concept" => {
                    self.only_attrs(child, &["id"])?;
                    let id = self.nonempty_attr(child, "id")?;
                    let mut parents = BTreeSet::new();
                    for isa in self.children(child, "isa")? {
                        self.only_attrs(isa, &["ref"])?;
                        let parent = self.nonempty_attr(isa, "ref")?;
                        isa_nodes.push((isa, parent.clone()));
                        parents.insert(parent);
                    }
                    if onto.concepts.insert(id, parents).is_some() {
                        return self.err(child, "duplicate concept");
                    }
                }
                "lexmap" => {
                    self.only_attrs(child, &["semclass", "concept"])?;
                    let semclass = self.nonempty_attr(child, "semclass")?;
                    let concept = self.nonempty_attr(child, "concept")?;
                    lexmap_nodes.push((child, concept.clone()));
                    if onto.lexmap.insert(semclass, concept).is_some() {
                        return self.err(child, "duplicate semclass mapping");
                    }
                }
                other => return self.err(child, format!("unexpected element <{other}>")),
            }
        }
        for (node, parent) in &isa_nodes {
            if !onto.contains(parent) {
                return self.err(*node, format!("isa references unknown concept `{parent}`"));
            }
        }
        for (node, concept) in &lexmap_nodes {
            if !onto.contains(concept) {
                return self.err(*node, format!("lexmap targets unknown concept `{concept}`"));
            }
        }
        if let Some(c) = onto.find_cycle() {
            return Err(ResourceError::CyclicOntology(c.clone()));
        }
        Ok(onto)
    }

    fn struct_patterns(&self, section: Node<'a, 'input>) -> Result<Vec<StructPattern>> {
        self.only_attrs(section, &[])?;
        let mut out = Vec::new();
        for p in self.children(section, "pattern")? {
            self.only_attrs(p, &["id", "cat", "relation", "arg1", "arg2"])?;
            let mut elements = Vec::new();
            for m in self.children(p, "m")? {
                self.only_attrs(m, &["name", "form"])?;
                elements.push(PatternElement {
                    name: self.nonempty_attr(m, "name")?,
                    form: m.attribute("form").map(str::to_string),
                });
            }
            let pattern = StructPattern {
                id: self.nonempty_attr(p, "id")?,
                constituent_cat: self.nonempty_attr(p, "cat")?,
                relation: self.nonempty_attr(p, "relation")?,
                arg1: self.index_attr(p, "arg1")?,
                arg2: self.index_attr(p, "arg2")?,
                elements,
            };
            if pattern.arg1 >= pattern.elements.len() || pattern.arg2 >= pattern.elements.len() {
                return self.err(p, "argument index out of range");
            }
            if pattern.arg1 == pattern.arg2 {
                return self.err(p, "arg1 and arg2 must differ");
            }
            out.push(pattern);
        }
        Ok(out)
    }
}
