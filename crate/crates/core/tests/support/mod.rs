//! Shared fixtures, generators and brute-force oracles for the integration
//! tests. Nothing here calls into the parser or the ontology code it checks.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use xdoc::resource::*;

pub fn resource_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("resources").join(name)
}

pub fn en_bio() -> ResourceBundle {
    load_bundle(resource_path("en-bio.xml")).expect("en-bio.xml loads")
}

pub fn de_core() -> ResourceBundle {
    load_bundle(resource_path("de-core.xml")).expect("de-core.xml loads")
}

pub const DE_SENTENCE: &str = "Den Rezeptor hemmt der Wirkstoff.";
pub const EN_SENTENCE: &str = "Aspirin inhibits cyclooxygenase .";

// ---------------------------------------------------------------------------
// random bundles

const CHARS: &[char] = &['a', 'b', 'k', 'Z', 'é', 'ß', '-', '&', '<', '>', '"', '\'', '.', '1'];
const FEATURE_KEYS: &[&str] = &["case", "num", "gen"];
const FEATURE_VALUES: &[&str] = &["nom", "acc", "sg", "pl", "m&f"];

fn word(rng: &mut ChaCha8Rng) -> String {
    let len = rng.gen_range(1..=5);
    (0..len).map(|_| *CHARS.choose(rng).unwrap()).collect()
}

fn text(rng: &mut ChaCha8Rng) -> String {
    let mut s = word(rng);
    if rng.gen_bool(0.3) {
        s.push(' ');
        s.push_str(&word(rng));
    }
    if rng.gen_bool(0.1) {
        s.push('\t');
    }
    s
}

fn features(rng: &mut ChaCha8Rng) -> Features {
    let mut f = Features::new();
    for _ in 0..rng.gen_range(0..=2) {
        f.insert(
            FEATURE_KEYS.choose(rng).unwrap().to_string(),
            FEATURE_VALUES.choose(rng).unwrap().to_string(),
        );
    }
    f
}

fn category(rng: &mut ChaCha8Rng, names: &[&str]) -> Category {
    Category {
        name: names.choose(rng).unwrap().to_string(),
        features: features(rng),
    }
}

/// A small bundle satisfying every per-item load invariant; cross-references
/// are random and need not validate.
pub fn random_bundle(seed: u64) -> ResourceBundle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rng = &mut rng;
    let mut b = ResourceBundle::new(["en", "de", "fr", "x-test"].choose(rng).unwrap().to_string());

    for _ in 0..rng.gen_range(0..=3) {
        b.abbreviations.insert(format!("{}.", word(rng)));
    }

    if rng.gen_bool(0.7) {
        for _ in 0..rng.gen_range(0..=4) {
            let tags = (0..rng.gen_range(1..=3)).map(|_| word(rng)).collect();
            b.tag_lexicon.entries.insert(text(rng), tags);
        }
        b.tag_lexicon.default_tag = if rng.gen_bool(0.8) { word(rng) } else { String::new() };
        b.tag_lexicon.unknown_capitalized_tag = rng.gen_bool(0.5).then(|| word(rng));
    }

    for _ in 0..rng.gen_range(0..=3) {
        let from_tag = word(rng);
        let mut to_tag = word(rng);
        if to_tag == from_tag {
            to_tag.push('x');
        }
        b.context_rules.push(ContextRule {
            from_tag,
            to_tag,
            trigger: *Trigger::ALL.choose(rng).unwrap(),
            value: text(rng),
        });
    }

    if rng.gen_bool(0.7) {
        b.tagset_map.source_name = if rng.gen_bool(0.5) { text(rng) } else { String::new() };
        for _ in 0..rng.gen_range(0..=4) {
            b.tagset_map.entries.insert(
                word(rng),
                TagTarget {
                    tag: word(rng),
                    features: features(rng),
                },
            );
        }
    }

    let nonterminals = ["S", "NP", "VP"];
    let symbols = ["S", "NP", "VP", "N", "V", "DET"];
    for _ in 0..rng.gen_range(0..=4) {
        let rhs: Vec<Category> = (0..rng.gen_range(1..=3)).map(|_| category(rng, &symbols)).collect();
        let head = rng.gen_range(0..rhs.len());
        b.grammar.rules.push(GrammarRule {
            lhs: category(rng, &nonterminals),
            rhs,
            head,
        });
    }
    b.grammar.start_symbol = match b.grammar.rules.first() {
        Some(r) => r.lhs.name.clone(),
        None if rng.gen_bool(0.5) => "S".into(),
        None => String::new(),
    };
    b.gf_mode = if b.grammar.has_feature("case") && rng.gen_bool(0.5) {
        GfMode::CaseMarked
    } else {
        GfMode::Positional
    };

    for _ in 0..rng.gen_range(0..=2) {
        b.lemma_rules.push(LemmaRule {
            strip: word(rng),
            min_stem_len: rng.gen_range(0..5),
        });
    }

    let mut keys = BTreeSet::new();
    for _ in 0..rng.gen_range(0..=4) {
        let entry = SemLexEntry {
            lemma: text(rng),
            pos: word(rng),
            semclass: word(rng),
        };
        if keys.insert((entry.lemma.clone(), entry.pos.clone())) {
            b.sem_lexicon.push(entry);
        }
    }

    let concepts: Vec<String> = (0..rng.gen_range(0..=6)).map(|i| format!("c{i}-{}", word(rng))).collect();
    for (i, c) in concepts.iter().enumerate() {
        let parents: BTreeSet<String> = (0..i).filter(|_| rng.gen_bool(0.3)).map(|j| concepts[j].clone()).collect();
        b.ontology.concepts.insert(c.clone(), parents);
    }
    if !concepts.is_empty() {
        for _ in 0..rng.gen_range(0..=3) {
            b.ontology.lexmap.insert(word(rng), concepts.choose(rng).unwrap().clone());
        }
    }

    for f in 0..rng.gen_range(0..=2) {
        let mut slots = Vec::new();
        for (i, gf) in [GramFunction::Subject, GramFunction::Object].into_iter().enumerate() {
            if rng.gen_bool(0.7) {
                slots.push(Slot {
                    role: format!("r{i}"),
                    gf,
                    fill_concept: word(rng),
                    required: rng.gen_bool(0.5),
                });
            }
        }
        if rng.gen_bool(0.5) {
            slots.reverse();
        }
        b.frames.push(CaseFrame {
            id: format!("f{f}"),
            predicate_lemma: text(rng),
            relation: text(rng),
            slots,
        });
    }

    for p in 0..rng.gen_range(0..=2) {
        let len = rng.gen_range(2..=4);
        let elements = (0..len)
            .map(|_| PatternElement {
                name: symbols.choose(rng).unwrap().to_string(),
                form: rng.gen_bool(0.3).then(|| text(rng)),
            })
            .collect();
        let arg1 = rng.gen_range(0..len);
        let arg2 = (arg1 + rng.gen_range(1..len)) % len;
        b.struct_patterns.push(StructPattern {
            id: format!("p{p}"),
            constituent_cat: "NP".into(),
            elements,
            relation: text(rng),
            arg1,
            arg2,
        });
    }
    b
}

// ---------------------------------------------------------------------------
// grammars and the CYK oracle

pub const TERMINALS: [&str; 3] = ["a", "b", "c"];
pub const NONTERMINALS: [&str; 3] = ["S", "A", "B"];

/// Feature-free grammar with up to 6 rules over at most 3 terminals.
pub fn random_grammar(rng: &mut ChaCha8Rng) -> Grammar {
    let symbols: Vec<&str> = TERMINALS.iter().chain(NONTERMINALS.iter()).copied().collect();
    let n = rng.gen_range(1..=6);
    let rules = (0..n)
        .map(|_| {
            let len = rng.gen_range(1..=3);
            let rhs: Vec<Category> = (0..len).map(|_| Category::new(*symbols.choose(rng).unwrap())).collect();
            GrammarRule::new(Category::new(*NONTERMINALS.choose(rng).unwrap()), rhs, 0)
        })
        .collect();
    Grammar {
        start_symbol: "S".into(),
        rules,
    }
}

/// All strings over `alphabet` with length 1..=max_len.
pub fn all_strings(alphabet: &[&str], max_len: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<String>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|prefix| {
                alphabet.iter().map(move |a| {
                    let mut s = prefix.clone();
                    s.push(a.to_string());
                    s
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Binarized rule set: unary `A -> B` and binary `A -> B C`.
pub struct BinaryGrammar {
    unary: Vec<(String, String)>,
    binary: Vec<(String, String, String)>,
}

pub fn binarize(grammar: &Grammar) -> BinaryGrammar {
    let mut unary = Vec::new();
    let mut binary = Vec::new();
    for (r, rule) in grammar.rules.iter().enumerate() {
        let names: Vec<String> = rule.rhs.iter().map(|c| c.name.clone()).collect();
        match names.len() {
            1 => unary.push((rule.lhs.name.clone(), names[0].clone())),
            2 => binary.push((rule.lhs.name.clone(), names[0].clone(), names[1].clone())),
            k => {
                // A -> X1 @r.1 ; @r.1 -> X2 @r.2 ; ... ; @r.(k-2) -> X(k-1) Xk
                let mut lhs = rule.lhs.name.clone();
                for (i, name) in names[..k - 2].iter().enumerate() {
                    let aux = format!("@{r}.{}", i + 1);
                    binary.push((lhs, name.clone(), aux.clone()));
                    lhs = aux;
                }
                binary.push((lhs, names[k - 2].clone(), names[k - 1].clone()));
            }
        }
    }
    BinaryGrammar { unary, binary }
}

/// `(symbol, start, end)` for every grammar symbol deriving `tags[start..end]`,
/// the tags themselves included.
pub fn cyk_spans(grammar: &Grammar, tags: &[String]) -> BTreeSet<(String, usize, usize)> {
    let bin = binarize(grammar);
    let n = tags.len();
    let mut table: BTreeMap<(usize, usize), BTreeSet<String>> = BTreeMap::new();
    let close = |set: &mut BTreeSet<String>| loop {
        let before = set.len();
        for (a, b) in &bin.unary {
            if set.contains(b) {
                set.insert(a.clone());
            }
        }
        if set.len() == before {
            break;
        }
    };
    for (i, tag) in tags.iter().enumerate() {
        let mut set = BTreeSet::from([tag.clone()]);
        close(&mut set);
        table.insert((i, i + 1), set);
    }
    for len in 2..=n {
        for i in 0..=n - len {
            let j = i + len;
            let mut set = BTreeSet::new();
            for k in i + 1..j {
                let (left, right) = (&table[&(i, k)], &table[&(k, j)]);
                for (a, b, c) in &bin.binary {
                    if left.contains(b) && right.contains(c) {
                        set.insert(a.clone());
                    }
                }
            }
            close(&mut set);
            table.insert((i, j), set);
        }
    }
    table
        .into_iter()
        .flat_map(|((i, j), set)| set.into_iter().filter(|s| !s.starts_with('@')).map(move |s| (s, i, j)))
        .collect()
}

/// Number of distinct trees of `symbol` over `n` copies of `leaf`, counted by
/// enumerating every rule and every split point. Acyclic grammars only.
pub fn count_trees(grammar: &Grammar, symbol: &str, leaf: &str, n: usize) -> u64 {
    fn seq(grammar: &Grammar, rhs: &[Category], leaf: &str, n: usize) -> u64 {
        match rhs {
            [] => u64::from(n == 0),
            [first, rest @ ..] => (1..=n.saturating_sub(rest.len()))
                .map(|k| count(grammar, &first.name, leaf, k) * seq(grammar, rest, leaf, n - k))
                .sum(),
        }
    }
    fn count(grammar: &Grammar, symbol: &str, leaf: &str, n: usize) -> u64 {
        let token = u64::from(symbol == leaf && n == 1);
        token
            + grammar
                .rules
                .iter()
                .filter(|r| r.lhs.name == symbol)
                .map(|r| seq(grammar, &r.rhs, leaf, n))
                .sum::<u64>()
    }
    grammar
        .rules
        .iter()
        .filter(|r| r.lhs.name == symbol)
        .map(|r| seq(grammar, &r.rhs, leaf, n))
        .sum()
}

// ---------------------------------------------------------------------------
// ontology oracle

/// Random acyclic ontology over `n` concepts (edges only point to lower indices).
pub fn random_dag(rng: &mut ChaCha8Rng, n: usize) -> Ontology {
    let mut o = Ontology::default();
    let names: Vec<String> = (0..n).map(|i| format!("k{i}")).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for (rank, &i) in order.iter().enumerate() {
        let parents = order[..rank]
            .iter()
            .filter(|_| rng.gen_bool(0.35))
            .map(|&j| names[j].clone())
            .collect();
        o.concepts.insert(names[i].clone(), parents);
    }
    o
}

/// Reflexive-transitive closure of `isa` by Warshall's algorithm.
pub fn reachability(o: &Ontology) -> BTreeMap<(String, String), bool> {
    let ids: Vec<&String> = o.concepts.keys().collect();
    let n = ids.len();
    let mut m = vec![vec![false; n]; n];
    for (i, id) in ids.iter().enumerate() {
        m[i][i] = true;
        for p in &o.concepts[*id] {
            let j = ids.iter().position(|x| *x == p).unwrap();
            m[i][j] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if m[i][k] && m[k][j] {
                    m[i][j] = true;
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            // key: (descendant, ancestor)
            out.insert((ids[i].clone(), ids[j].clone()), m[i][j]);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// validation mutations

/// One-item deletions of referenced resources from a bundle, each labelled.
pub fn referenced_deletions(b: &ResourceBundle) -> Vec<(String, ResourceBundle)> {
    let mut out = Vec::new();

    let mut referenced_concepts = BTreeSet::new();
    for parents in b.ontology.concepts.values() {
        referenced_concepts.extend(parents.iter().cloned());
    }
    referenced_concepts.extend(b.ontology.lexmap.values().cloned());
    for f in &b.frames {
        referenced_concepts.extend(f.slots.iter().map(|s| s.fill_concept.clone()));
    }
    for c in referenced_concepts {
        let mut m = b.clone();
        m.ontology.concepts.remove(&c);
        out.push((format!("concept {c}"), m));
    }

    let mut emitted: BTreeSet<String> = b.tag_lexicon.entries.values().flatten().cloned().collect();
    emitted.insert(b.tag_lexicon.default_tag.clone());
    emitted.extend(b.tag_lexicon.unknown_capitalized_tag.clone());
    emitted.extend(b.context_rules.iter().map(|r| r.to_tag.clone()));
    let mut consumed: BTreeSet<String> = b.grammar.terminals().into_iter().map(String::from).collect();
    consumed.extend(b.sem_lexicon.iter().map(|e| e.pos.clone()));
    for p in &b.struct_patterns {
        consumed.extend(p.elements.iter().map(|m| m.name.clone()));
    }
    for (from, target) in &b.tagset_map.entries {
        let sole_producer = b.tagset_map.entries.values().filter(|t| t.tag == target.tag).count() == 1;
        if emitted.contains(from) || (sole_producer && consumed.contains(&target.tag)) {
            let mut m = b.clone();
            m.tagset_map.entries.remove(from);
            out.push((format!("mapping {from}->{}", target.tag), m));
        }
    }

    for frame in &b.frames {
        let mut m = b.clone();
        m.sem_lexicon.retain(|e| e.lemma != frame.predicate_lemma);
        out.push((format!("semlex entry {}", frame.predicate_lemma), m));
    }
    out
}
