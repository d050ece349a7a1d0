use crate::xml::XmlWriter;

use super::*;

/// Writes a bundle as canonical XML: fixed section and attribute order,
/// sorted map keys, two-space indentation, empty sections omitted.
pub fn serialize_bundle(bundle: &ResourceBundle) -> String {
    let mut w = XmlWriter::new();
    w.open("resources", &[("lang", &bundle.lang)]);

    if !bundle.abbreviations.is_empty() {
        w.open("abbreviations", &[]);
        for form in &bundle.abbreviations {
            w.empty("abbr", &[("form", form)]);
        }
        w.close();
    }

    let lex = &bundle.tag_lexicon;
    if !lex.is_empty() {
        let mut attrs = vec![("default", lex.default_tag.as_str())];
        if let Some(cap) = &lex.unknown_capitalized_tag {
            attrs.push(("capitalized", cap));
        }
        w.open("taglexicon", &attrs);
        for (form, tags) in &lex.entries {
            w.empty("w", &[("form", form), ("tags", &tags.join(" "))]);
        }
        w.close();
    }

    if !bundle.context_rules.is_empty() {
        w.open("rules", &[]);
        for r in &bundle.context_rules {
            w.empty(
                "rule",
                &[
                    ("from", &r.from_tag),
                    ("to", &r.to_tag),
                    ("trigger", r.trigger.as_str()),
                    ("value", &r.value),
                ],
            );
        }
        w.close();
    }

    let map = &bundle.tagset_map;
    if !map.is_empty() {
        let attrs: Vec<(&str, &str)> = if map.source_name.is_empty() {
            vec![]
        } else {
            vec![("source", &map.source_name)]
        };
        w.open("tagmap", &attrs);
        for (from, target) in &map.entries {
            let mut attrs = vec![("from", from.as_str()), ("to", target.tag.as_str())];
            attrs.extend(target.features.iter().map(|(k, v)| (k.as_str(), v.as_str())));
            w.empty("map", &attrs);
        }
        w.close();
    }

    let grammar = &bundle.grammar;
    if !grammar.rules.is_empty() || !grammar.start_symbol.is_empty() || bundle.gf_mode != GfMode::Positional {
        w.open(
            "grammar",
            &[("start", &grammar.start_symbol), ("gf", bundle.gf_mode.as_str())],
        );
        for rule in &grammar.rules {
            let head = (rule.head + 1).to_string();
            let mut attrs = vec![("lhs", rule.lhs.name.as_str()), ("head", head.as_str())];
            attrs.extend(rule.lhs.features.iter().map(|(k, v)| (k.as_str(), v.as_str())));
            w.open("rule", &attrs);
            for cat in &rule.rhs {
                let mut attrs = vec![("name", cat.name.as_str())];
                attrs.extend(cat.features.iter().map(|(k, v)| (k.as_str(), v.as_str())));
                w.empty("cat", &attrs);
            }
            w.close();
        }
        w.close();
    }

    if !bundle.lemma_rules.is_empty() {
        w.open("lemmarules", &[]);
        for r in &bundle.lemma_rules {
            w.empty("lemrule", &[("strip", &r.strip), ("minstem", &r.min_stem_len.to_string())]);
        }
        w.close();
    }

    if !bundle.sem_lexicon.is_empty() {
        w.open("semlex", &[]);
        for e in &bundle.sem_lexicon {
            w.empty("entry", &[("lemma", &e.lemma), ("pos", &e.pos), ("semclass", &e.semclass)]);
        }
        w.close();
    }

    if !bundle.frames.is_empty() {
        w.open("frames", &[]);
        for f in &bundle.frames {
            w.open(
                "frame",
                &[("id", &f.id), ("predicate", &f.predicate_lemma), ("relation", &f.relation)],
            );
            for s in &f.slots {
                w.empty(
                    "slot",
                    &[
                        ("role", &s.role),
                        ("gf", s.gf.as_str()),
                        ("fill", &s.fill_concept),
                        ("required", if s.required { "true" } else { "false" }),
                    ],
                );
            }
            w.close();
        }
        w.close();
    }

    let onto = &bundle.ontology;
    if !onto.is_empty() {
        w.open("ontology", &[]);
        for (id, parents) in &onto.concepts {
            w.open("concept", &[("id", id)]);
            for p in parents {
                w.empty("isa", &[("ref", p)]);
            }
            w.close();
        }
        for (semclass, concept) in &onto.lexmap {
            w.empty("lexmap", &[("semclass", semclass), ("concept", concept)]);
        }
        w.close();
    }

    if !bundle.struct_patterns.is_empty() {
        w.open("structmap", &[]);
        for p in &bundle.struct_patterns {
            let arg1 = (p.arg1 + 1).to_string();
            let arg2 = (p.arg2 + 1).to_string();
            w.open(
                "pattern",
                &[
                    ("id", &p.id),
                    ("cat", &p.constituent_cat),
                    ("relation", &p.relation),
                    ("arg1", &arg1),
                    ("arg2", &arg2),
                ],
            );
            for m in &p.elements {
                match &m.form {
                    Some(form) => w.empty("m", &[("name", &m.name), ("form", form)]),
                    None => w.empty("m", &[("name", &m.name)]),
                }
            }
            w.close();
        }
        w.close();
    }

    w.finish()
}
