//! Acceptance checks. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::*;
use xdoc::parser::{complete_parses, parse};
use xdoc::pipeline::{analyze, AnalysisOptions, SentenceParse, Stage};
use xdoc::resource::*;
use xdoc::semantics::{grammatical_functions, map_np_structure, semantic_tag};
use xdoc::structure::{segment, Token};
use xdoc::tagger::{map_tagset, TaggedToken};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn xdoc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_xdoc")).args(args).output().expect("run xdoc")
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

fn round_trip() -> Outcome {
    let started = Instant::now();
    let mut bundles = vec![en_bio(), de_core()];
    bundles.extend((0..100).map(random_bundle));
    for (i, bundle) in bundles.iter().enumerate() {
        let xml = serialize_bundle(bundle);
        let again = parse_bundle(&xml).map_err(|e| format!("bundle {i}: {e}"))?;
        ensure!(&again == bundle, "bundle {i}: reload differs");
        ensure!(serialize_bundle(&again) == xml, "bundle {i}: serialization not byte-stable");
    }
    for name in ["en-bio.xml", "de-core.xml"] {
        let a = serialize_bundle(&load_bundle(resource_path(name)).map_err(|e| e.to_string())?);
        let b = serialize_bundle(&load_bundle(resource_path(name)).map_err(|e| e.to_string())?);
        ensure!(a == b, "{name}: two loads serialize differently");
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!("{} bundles in {elapsed:.2?}", bundles.len()))
}

fn mutation_suite() -> Outcome {
    let pristine = en_bio();
    let clean = validate_bundle(&pristine);
    ensure!(clean.is_empty(), "pristine bundle has findings: {:?}", clean.findings);
    let mutations = referenced_deletions(&pristine);
    ensure!(mutations.len() >= 10, "only {} mutations", mutations.len());
    for (label, mutated) in &mutations {
        ensure!(!validate_bundle(mutated).is_empty(), "deleting {label} gives no finding");
    }
    Ok(format!("{} mutations, each reported; pristine clean", mutations.len()))
}

fn parser_oracle() -> Outcome {
    const GRAMMARS: usize = 30;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let strings = all_strings(&TERMINALS, 7);
    let mut cases = 0usize;
    for g in 0..GRAMMARS {
        let grammar = random_grammar(&mut rng);
        for s in &strings {
            let tags: Vec<Category> = s.iter().map(Category::new).collect();
            let chart = parse(&tags, &grammar).map_err(|e| e.to_string())?;
            ensure!(chart.passive_spans() == cyk_spans(&grammar, s), "grammar {g} on {s:?}: edge sets differ");
            cases += 1;
        }
    }
    let elapsed = started.elapsed();
    ensure!(cases >= 1000, "only {cases} cases");
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("{cases} cases over {GRAMMARS} grammars in {elapsed:.2?}"))
}

fn np_grammar(rhs: &[&str]) -> Grammar {
    Grammar {
        start_symbol: "NP".into(),
        rules: vec![
            GrammarRule::new(Category::new("NP"), rhs.iter().map(|n| Category::new(*n)).collect(), rhs.len() - 1),
            GrammarRule::new(Category::new("NP"), vec![Category::new("N")], 0),
        ],
    }
}

fn ambiguity_count() -> Outcome {
    let tags = vec![Category::new("N"); 4];
    // The flat rule NP -> N N covers at most two nouns, so the brute-force
    // count is 0 and the parser must agree. The recursive rule is the one
    // that yields Catalan ambiguity.
    let flat = np_grammar(&["N", "N"]);
    let flat_trees = complete_parses(&parse(&tags, &flat).map_err(|e| e.to_string())?, "NP").map_err(|e| e.to_string())?;
    ensure!(flat_trees.len() as u64 == count_trees(&flat, "NP", "N", 4), "flat grammar disagrees with oracle");

    let recursive = np_grammar(&["NP", "NP"]);
    let trees = complete_parses(&parse(&tags, &recursive).map_err(|e| e.to_string())?, "NP").map_err(|e| e.to_string())?;
    let oracle = count_trees(&recursive, "NP", "N", 4);
    ensure!(oracle == 5, "oracle gives {oracle}");
    ensure!(trees.len() == 5, "{} parses", trees.len());
    let mut rendered: Vec<String> = trees.iter().map(|t| t.render(None)).collect();
    rendered.dedup();
    ensure!(rendered.len() == 5, "duplicate trees");
    Ok(format!("NP->NP NP|N: 5 parses (oracle 5); NP->N N|N: {} (oracle 0)", flat_trees.len()))
}

fn source_files(dir: &Path, out: &mut Vec<std::path::PathBuf>) {
    for entry in std::fs::read_dir(dir).expect("read src").flatten() {
        let path = entry.path();
        if path.is_dir() {
            source_files(&path, out);
        } else if path.extension().is_some_and(|e| e == "rs") {
            out.push(path);
        }
    }
}

fn multilingual_sharing() -> Outcome {
    let mut summary = Vec::new();
    for (bundle, input) in [("en-bio.xml", "en-sample.txt"), ("de-core.xml", "de-sample.txt")] {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let tsv = dir.path().join("rel.tsv");
        let out = xdoc(&[
            "analyze",
            "--bundle",
            p(&resource_path(bundle)),
            "--input",
            p(&resource_path(input)),
            "--relations-tsv",
            p(&tsv),
        ]);
        ensure!(out.status.success(), "{bundle}: {}", String::from_utf8_lossy(&out.stderr));
        let xml = String::from_utf8_lossy(&out.stdout).into_owned();
        let doc = roxmltree::Document::parse(&xml).map_err(|e| e.to_string())?;
        let frame_rels: Vec<_> = doc
            .descendants()
            .filter(|n| n.has_tag_name("rel") && n.attribute("pred").is_some())
            .collect();
        ensure!(frame_rels.len() == 1, "{bundle}: {} frame relations", frame_rels.len());
        let tsv = std::fs::read_to_string(&tsv).map_err(|e| e.to_string())?;
        summary.push(tsv.lines().nth(1).unwrap_or_default().replace('\t', " "));
    }

    let mut files = Vec::new();
    source_files(&Path::new(env!("CARGO_MANIFEST_DIR")).join("src"), &mut files);
    let forbidden = ["\"en\"", "\"de\"", "\"english\"", "\"german\"", "lang ==", "lang.as_str()", ".lang =="];
    for file in &files {
        let text = std::fs::read_to_string(file).map_err(|e| e.to_string())?;
        // unit-test modules build throwaway bundles with a language tag; only
        // production code is scanned
        let production = text.split("#[cfg(test)]").next().unwrap_or_default();
        for (n, line) in production.lines().enumerate() {
            let code = line.split("//").next().unwrap_or_default().to_lowercase();
            if let Some(f) = forbidden.iter().find(|f| code.contains(**f)) {
                return Err(format!("{}:{}: language conditional `{f}`", file.display(), n + 1));
            }
        }
    }
    Ok(format!("{} | {} ({} source files clean)", summary[0], summary[1], files.len()))
}

fn covered(tree: &xdoc::parser::ParseTree, tagged: &[TaggedToken]) -> String {
    tree.leaves().iter().map(|&i| tagged[i].form()).collect::<Vec<_>>().join(" ")
}

fn subject_by_mode() -> Outcome {
    let bundle = de_core();
    let options = AnalysisOptions {
        last_stage: Stage::Sem,
        lenient: false,
    };
    let doc = analyze(&bundle, &options, DE_SENTENCE).map_err(|e| e.to_string())?;
    let s = &doc.sentences[0];
    let Some(SentenceParse::Complete(tree)) = &s.parse else {
        return Err("German sentence has no complete parse".into());
    };
    let case = grammatical_functions(tree, GfMode::CaseMarked).subject.map(|t| covered(t, &s.tagged));
    let positional = grammatical_functions(tree, GfMode::Positional).subject.map(|t| covered(t, &s.tagged));
    ensure!(case.as_deref() == Some("der Wirkstoff"), "case-marked subject {case:?}");
    ensure!(positional.as_deref() == Some("Den Rezeptor"), "positional subject {positional:?}");
    Ok(format!("case-marked: {}; positional: {}", case.unwrap(), positional.unwrap()))
}

fn structure_mapping() -> Outcome {
    let bundle = en_bio();
    let forms = [("liver", "NN"), ("of", "IN"), ("the", "DT"), ("patient", "NN")];
    let mut offset = 0;
    let tagged: Vec<TaggedToken> = forms
        .iter()
        .enumerate()
        .map(|(id, (form, tag))| {
            let t = TaggedToken::new(Token { id, form: form.to_string(), offset, length: form.len() }, *tag);
            offset += form.len() + 1;
            t
        })
        .collect();
    let tagged = semantic_tag(map_tagset(tagged, &bundle.tagset_map).map_err(|e| e.to_string())?, &bundle);
    let children: Vec<_> = tagged
        .iter()
        .enumerate()
        .map(|(i, t)| xdoc::parser::ParseTree::leaf(Category::new(t.parser_tag.clone().unwrap_or_default()), i))
        .collect();
    let tree = xdoc::parser::ParseTree {
        category: Category::new("NP"),
        start: 0,
        end: 4,
        rule: Some(0),
        head: 0,
        children,
    };
    let rels = map_np_structure(&tree, &bundle.struct_patterns, &tagged);
    ensure!(rels.len() == 1, "{} relations", rels.len());
    let r = &rels[0];
    let got = format!("{}({}, {})", r.name, tagged[r.arg1.token].form(), tagged[r.arg2.token].form());
    ensure!(got == "has(patient, liver)", "got {got}");

    let mut without = bundle.clone();
    without.struct_patterns.retain(|p| p.id != "np-of");
    ensure!(map_np_structure(&tree, &without.struct_patterns, &tagged).is_empty(), "relations without the pattern");

    // the same through the pipeline, with a grammar rule that builds the NP
    let mut extended = bundle.clone();
    extended.grammar.rules.push(GrammarRule::new(
        Category::new("NP"),
        ["N", "PREP", "DET", "N"].map(Category::new).to_vec(),
        0,
    ));
    let doc = analyze(&extended, &AnalysisOptions::default(), "liver of the patient").map_err(|e| e.to_string())?;
    let piped: Vec<String> = doc.sentences[0]
        .relations
        .iter()
        .map(|r| format!("{}({}, {})", r.name, doc.sentences[0].tagged[r.arg1.token].form(), doc.sentences[0].tagged[r.arg2.token].form()))
        .collect();
    ensure!(piped == ["has(patient, liver)"], "pipeline gives {piped:?}");
    extended.struct_patterns.clear();
    let doc = analyze(&extended, &AnalysisOptions::default(), "liver of the patient").map_err(|e| e.to_string())?;
    ensure!(doc.sentences[0].relations.is_empty(), "pipeline relations without the pattern");
    Ok("has(patient, liver); none without np-of".into())
}

fn abbreviation_sensitivity() -> Outcome {
    let text = "Dr. Smith arrived. He left.";
    let with = segment(text, &["Dr.".to_string()].into()).len();
    let without = segment(text, &Default::default()).len();
    ensure!(with == 2 && without == 3, "{with} with, {without} without");
    let shipped = segment(text, &en_bio().abbreviations).len();
    ensure!(shipped == 2, "en-bio abbreviations give {shipped}");
    Ok(format!("{with} sentences with Dr., {without} without"))
}

fn synthetic_document() -> String {
    let subjects = ["Aspirin", "Ibuprofen", "Water", "The thromboxane", "A patient"];
    let verbs = ["inhibits", "blocks"];
    let objects = ["cyclooxygenase", "the liver of the patient", "aspirin", "Dr. Smith", "water"];
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    use rand::seq::SliceRandom;
    (0..50)
        .map(|_| {
            format!(
                "{} {} {}.",
                subjects.choose(&mut rng).unwrap(),
                verbs.choose(&mut rng).unwrap(),
                objects.choose(&mut rng).unwrap()
            )
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn end_to_end_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("doc.txt");
    std::fs::write(&input, synthetic_document()).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in 0..2 {
        let xml = dir.path().join(format!("out{run}.xml"));
        let tsv = dir.path().join(format!("out{run}.tsv"));
        let out = xdoc(&[
            "analyze",
            "--bundle",
            p(&resource_path("en-bio.xml")),
            "--input",
            p(&input),
            "--output",
            p(&xml),
            "--relations-tsv",
            p(&tsv),
            "--lenient",
        ]);
        ensure!(out.status.success(), "run {run}: {}", String::from_utf8_lossy(&out.stderr));
        outputs.push((std::fs::read(&xml).map_err(|e| e.to_string())?, std::fs::read(&tsv).map_err(|e| e.to_string())?));
    }
    ensure!(outputs[0].0 == outputs[1].0, "XML differs");
    ensure!(outputs[0].1 == outputs[1].1, "TSV differs");
    let xml = String::from_utf8_lossy(&outputs[0].0);
    let sentences = xml.matches("<sentence ").count();
    ensure!(sentences == 50, "{sentences} sentences");
    let rows = outputs[0].1.iter().filter(|&&b| b == b'\n').count() - 1;
    Ok(format!("50 sentences, {} XML bytes, {rows} relations, identical", outputs[0].0.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("resource round-trip", round_trip),
        ("validation mutation suite", mutation_suite),
        ("parser vs CYK oracle", parser_oracle),
        ("ambiguity count", ambiguity_count),
        ("multilingual sharing", multilingual_sharing),
        ("positional vs case-marked subject", subject_by_mode),
        ("NP structure mapping", structure_mapping),
        ("abbreviation sensitivity", abbreviation_sensitivity),
        ("end-to-end determinism", end_to_end_determinism),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", n + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
