//! Stage orchestration and document output.

use std::fmt;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::parser::{self, ParseTree};
use crate::resource::{load_bundle, validate_bundle, Category, ResourceBundle, ResourceError};
use crate::semantics::{self, Diagnostic, DiagnosticCode, FrameInstance, Relation};
use crate::structure::{self, Sentence};
use crate::tagger::{self, TagError, TaggedToken};
use crate::xml::XmlWriter;

/// Analysis stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Tok,
    Sent,
    Tag,
    Map,
    Parse,
    Sem,
    Frames,
    Rel,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Tok,
        Stage::Sent,
        Stage::Tag,
        Stage::Map,
        Stage::Parse,
        Stage::Sem,
        Stage::Frames,
        Stage::Rel,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Tok => "tok",
            Stage::Sent => "sent",
            Stage::Tag => "tag",
            Stage::Map => "map",
            Stage::Parse => "parse",
            Stage::Sem => "sem",
            Stage::Frames => "frames",
            Stage::Rel => "rel",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| PipelineError::Config(format!("unknown stage `{s}`")))
    }
}

/// Parses a comma-separated stage list, which must be a gap-free prefix of
/// [`Stage::ALL`]. Returns the last stage.
pub fn parse_stage_list(list: &str) -> Result<Stage, PipelineError> {
    let stages = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(Stage::from_str)
        .collect::<Result<Vec<_>, _>>()?;
    if stages.is_empty() {
        return Err(PipelineError::Config("empty stage list".into()));
    }
    if stages.len() > Stage::ALL.len() || stages.iter().zip(Stage::ALL).any(|(a, b)| *a != b) {
        return Err(PipelineError::Config(format!(
            "stages must be a prefix of {}",
            Stage::ALL.map(Stage::as_str).join(",")
        )));
    }
    Ok(*stages.last().expect("non-empty"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub bundle_path: PathBuf,
    /// Last stage to run; every earlier stage runs too.
    pub last_stage: Stage,
    pub lenient: bool,
    pub external_tags: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn new(bundle_path: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            bundle_path: bundle_path.into(),
            last_stage: Stage::Rel,
            lenient: false,
            external_tags: None,
        }
    }
}

/// Options for [`analyze`] once a bundle is in hand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisOptions {
    pub last_stage: Stage,
    pub lenient: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            last_stage: Stage::Rel,
            lenient: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Resource(#[from] ResourceError),
    #[error("bundle has {0} validation error(s)")]
    InvalidBundle(usize),
    #[error("input error: {0}")]
    Input(String),
    #[error("sentence {sentence}: {source}")]
    UnmappedTag {
        sentence: usize,
        #[source]
        source: TagError,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl PipelineError {
    /// Process exit code: 1 resource, 2 input, 3 analysis error.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Resource(_) | PipelineError::InvalidBundle(_) => 1,
            PipelineError::Input(_) | PipelineError::Config(_) => 2,
            PipelineError::UnmappedTag { .. } => 3,
        }
    }
}

/// Syntactic analysis of one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SentenceParse {
    Complete(ParseTree),
    /// Fallback cover when no complete parse exists.
    Chunks(Vec<ParseTree>),
}

impl SentenceParse {
    pub fn trees(&self) -> &[ParseTree] {
        match self {
            SentenceParse::Complete(t) => std::slice::from_ref(t),
            SentenceParse::Chunks(ts) => ts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceAnalysis {
    pub sentence: Sentence,
    /// Empty until the tag stage runs.
    pub tagged: Vec<TaggedToken>,
    pub parse: Option<SentenceParse>,
    pub frames: Vec<FrameInstance>,
    pub relations: Vec<Relation>,
    pub diagnostics: Vec<Diagnostic>,
    /// Set when a lenient run gave up on this sentence.
    pub failed: bool,
}

impl SentenceAnalysis {
    fn new(sentence: Sentence) -> Self {
        SentenceAnalysis {
            sentence,
            tagged: Vec::new(),
            parse: None,
            frames: Vec::new(),
            relations: Vec::new(),
            diagnostics: Vec::new(),
            failed: false,
        }
    }

    /// Position of a global token id within this sentence.
    pub fn position(&self, token_id: usize) -> Option<usize> {
        let first = self.sentence.tokens.first()?.id;
        token_id
            .checked_sub(first)
            .filter(|&p| p < self.sentence.tokens.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedDocument {
    pub lang: String,
    pub source: Option<PathBuf>,
    /// Text the token offsets index into.
    pub text: String,
    /// Last stage that ran; `None` before tokenization.
    pub completed: Option<Stage>,
    pub sentences: Vec<SentenceAnalysis>,
}

impl AnnotatedDocument {
    pub fn has_run(&self, stage: Stage) -> bool {
        self.completed.is_some_and(|c| c >= stage)
    }
}

/// Loads and validates the configured bundle, then analyzes `text`. With
/// `external_tags` set, the imported tagging replaces tokenization, sentence
/// splitting and tagging, and `text` is not used.
pub fn run_pipeline(config: &PipelineConfig, text: &str) -> Result<AnnotatedDocument, PipelineError> {
    let bundle = load_bundle(&config.bundle_path)?;
    let report = validate_bundle(&bundle);
    if report.has_errors() {
        return Err(PipelineError::InvalidBundle(report.errors().count()));
    }
    let options = AnalysisOptions {
        last_stage: config.last_stage,
        lenient: config.lenient,
    };
    match &config.external_tags {
        Some(path) => {
            let imported = tagger::import_external_tags(path).map_err(|e| PipelineError::Input(e.to_string()))?;
            analyze_pretagged(&bundle, &options, imported)
        }
        None => analyze(&bundle, &options, text),
    }
}

/// Runs the configured stages over `text` with an already loaded bundle.
pub fn analyze(bundle: &ResourceBundle, options: &AnalysisOptions, text: &str) -> Result<AnnotatedDocument, PipelineError> {
    let mut doc = AnnotatedDocument {
        lang: bundle.lang.clone(),
        source: None,
        text: text.to_string(),
        completed: Some(Stage::Tok),
        sentences: Vec::new(),
    };
    if options.last_stage == Stage::Tok {
        let tokens = structure::tokenize(text, &bundle.abbreviations);
        if !tokens.is_empty() {
            doc.sentences.push(SentenceAnalysis::new(Sentence { id: 0, tokens }));
        }
        return Ok(doc);
    }
    doc.sentences = structure::segment(text, &bundle.abbreviations)
        .into_iter()
        .map(SentenceAnalysis::new)
        .collect();
    doc.completed = Some(Stage::Sent);
    if options.last_stage == Stage::Sent {
        return Ok(doc);
    }
    for s in &mut doc.sentences {
        s.tagged = tagger::tag_sentence(&s.sentence, bundle);
    }
    doc.completed = Some(Stage::Tag);
    continue_analysis(bundle, options, doc)
}

/// Runs the stages after tagging over an imported tagging.
pub fn analyze_pretagged(
    bundle: &ResourceBundle,
    options: &AnalysisOptions,
    imported: Vec<Vec<TaggedToken>>,
) -> Result<AnnotatedDocument, PipelineError> {
    let text = tagger::external_text(&imported);
    let sentences = imported
        .into_iter()
        .enumerate()
        .map(|(id, tagged)| {
            let sentence = Sentence {
                id,
                tokens: tagged.iter().map(|t| t.token.clone()).collect(),
            };
            SentenceAnalysis {
                tagged,
                ..SentenceAnalysis::new(sentence)
            }
        })
        .collect();
    let doc = AnnotatedDocument {
        lang: bundle.lang.clone(),
        source: None,
        text,
        completed: Some(options.last_stage.min(Stage::Tag)),
        sentences,
    };
    if options.last_stage <= Stage::Tag {
        return Ok(doc);
    }
    continue_analysis(bundle, options, doc)
}

/// Runs every stage after `doc.completed` up to `options.last_stage`.
pub fn continue_analysis(
    bundle: &ResourceBundle,
    options: &AnalysisOptions,
    mut doc: AnnotatedDocument,
) -> Result<AnnotatedDocument, PipelineError> {
    let done = doc.completed.ok_or_else(|| PipelineError::Config("document was never tokenized".into()))?;
    if done < Stage::Tag {
        return Err(PipelineError::Config("continuing requires a tagged document".into()));
    }
    for stage in Stage::ALL.into_iter().filter(|s| *s > done && *s <= options.last_stage) {
        for s in doc.sentences.iter_mut().filter(|s| !s.failed) {
            run_stage(stage, bundle, options, s)?;
        }
        doc.completed = Some(stage);
    }
    Ok(doc)
}

fn run_stage(stage: Stage, bundle: &ResourceBundle, options: &AnalysisOptions, s: &mut SentenceAnalysis) -> Result<(), PipelineError> {
    match stage {
        Stage::Tok | Stage::Sent | Stage::Tag => {}
        Stage::Map => match tagger::map_tagset(s.tagged.clone(), &bundle.tagset_map) {
            Ok(mapped) => s.tagged = mapped,
            Err(err) => {
                if !options.lenient {
                    return Err(PipelineError::UnmappedTag {
                        sentence: s.sentence.id,
                        source: err,
                    });
                }
                let token = match &err {
                    TagError::UnmappedTag { offset, .. } => {
                        s.sentence.tokens.iter().find(|t| t.offset == *offset).map(|t| t.id)
                    }
                    _ => None,
                };
                s.diagnostics.push(Diagnostic {
                    code: DiagnosticCode::UnmappedTag,
                    token,
                    message: err.to_string(),
                });
                s.failed = true;
            }
        },
        Stage::Parse => {
            let terminals: Vec<Category> = s
                .tagged
                .iter()
                .map(|t| Category {
                    name: t.parser_tag.clone().unwrap_or_default(),
                    features: t.features.clone(),
                })
                .collect();
            let Ok(chart) = parser::parse(&terminals, &bundle.grammar) else {
                return Ok(());
            };
            s.parse = Some(match parser::first_complete_parse(&chart, &bundle.grammar.start_symbol) {
                Some(tree) => SentenceParse::Complete(tree),
                None => {
                    s.diagnostics.push(Diagnostic {
                        code: DiagnosticCode::NoCompleteParse,
                        token: None,
                        message: "no complete parse; using chunks".into(),
                    });
                    SentenceParse::Chunks(parser::chunks(&chart))
                }
            });
        }
        Stage::Sem => s.tagged = semantics::semantic_tag(std::mem::take(&mut s.tagged), bundle),
        Stage::Frames => {
            let Some(parse) = &s.parse else { return Ok(()) };
            for tree in parse.trees() {
                let outcome = semantics::instantiate_frames(tree, &s.tagged, bundle);
                s.frames.extend(outcome.instances);
                s.diagnostics.extend(outcome.diagnostics);
            }
        }
        Stage::Rel => {
            let mut relations: Vec<Relation> = s.frames.iter().filter_map(Relation::from_frame).collect();
            if let Some(parse) = &s.parse {
                for tree in parse.trees() {
                    relations.extend(semantics::map_np_structure(tree, &bundle.struct_patterns, &s.tagged));
                }
            }
            // stable: frame relations precede pattern relations at the same anchor
            relations.sort_by_key(|r| (r.anchor(), matches!(r.source, semantics::RelationSource::Pattern(_))));
            s.relations = relations;
        }
    }
    Ok(())
}

fn sentence_label(id: usize) -> String {
    format!("s{}", id + 1)
}

fn token_label(id: usize) -> String {
    format!("t{}", id + 1)
}

fn write_tree(w: &mut XmlWriter, tree: &ParseTree, s: &SentenceAnalysis) {
    let cat = tree.category.name.as_str();
    let feats: Vec<String> = tree.category.features.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let feats = feats.join(",");
    let mut attrs: Vec<(&str, String)> = vec![("cat", cat.to_string())];
    if !feats.is_empty() {
        attrs.push(("feats", feats));
    }
    if tree.is_leaf() {
        if let Some(tok) = s.sentence.tokens.get(tree.start) {
            attrs.push(("ref", token_label(tok.id)));
        }
        let borrowed: Vec<(&str, &str)> = attrs.iter().map(|(k, v)| (*k, v.as_str())).collect();
        w.empty("node", &borrowed);
        return;
    }
    attrs.push(("head", (tree.head + 1).to_string()));
    let borrowed: Vec<(&str, &str)> = attrs.iter().map(|(k, v)| (*k, v.as_str())).collect();
    w.open("node", &borrowed);
    for c in &tree.children {
        write_tree(w, c, s);
    }
    w.close();
}

/// Serializes the document. Output bytes depend only on the document.
pub fn emit_xml(doc: &AnnotatedDocument) -> String {
    let mut w = XmlWriter::new();
    w.open("document", &[("lang", &doc.lang)]);
    for s in &doc.sentences {
        let id = sentence_label(s.sentence.id);
        if s.failed {
            w.open("sentence", &[("id", &id), ("status", "failed")]);
        } else {
            w.open("sentence", &[("id", &id)]);
        }

        w.open("tokens", &[]);
        for (i, tok) in s.sentence.tokens.iter().enumerate() {
            let tid = token_label(tok.id);
            let off = tok.offset.to_string();
            let len = tok.length.to_string();
            let mut attrs: Vec<(&str, &str)> = vec![("id", &tid), ("off", &off), ("len", &len), ("form", &tok.form)];
            if let Some(t) = s.tagged.get(i) {
                attrs.push(("tag0", &t.source_tag));
                if let Some(tag) = &t.parser_tag {
                    attrs.push(("tag", tag));
                }
                if let Some(lemma) = &t.lemma {
                    attrs.push(("lemma", lemma));
                }
                if let Some(sem) = &t.semclass {
                    attrs.push(("sem", sem));
                }
                if let Some(concept) = &t.concept {
                    attrs.push(("concept", concept));
                }
            }
            w.empty("t", &attrs);
        }
        w.close();

        if let Some(parse) = &s.parse {
            let kind = match parse {
                SentenceParse::Complete(_) => "complete",
                SentenceParse::Chunks(_) => "chunks",
            };
            w.open("parse", &[("kind", kind)]);
            for tree in parse.trees() {
                write_tree(&mut w, tree, s);
            }
            w.close();
        }

        if !s.relations.is_empty() {
            w.open("relations", &[]);
            for r in &s.relations {
                let pred = r.predicate.map(token_label);
                let mut attrs: Vec<(&str, &str)> = vec![("type", &r.name)];
                if let Some(p) = &pred {
                    attrs.push(("pred", p));
                }
                attrs.push(("source", r.source.id()));
                w.open("rel", &attrs);
                for arg in [&r.arg1, &r.arg2] {
                    w.empty("arg", &[("role", &arg.role), ("ref", &token_label(arg.token))]);
                }
                w.close();
            }
            w.close();
        }

        if !s.diagnostics.is_empty() {
            w.open("diagnostics", &[]);
            for d in &s.diagnostics {
                let code = d.code.to_string();
                let token = d.token.map(token_label);
                let mut attrs: Vec<(&str, &str)> = vec![("code", &code)];
                if let Some(t) = &token {
                    attrs.push(("ref", t));
                }
                w.text_element("diag", &attrs, &d.message);
            }
            w.close();
        }
        w.close();
    }
    w.finish()
}

pub const RELATION_TSV_HEADER: &str = "relation\targ1_form\targ1_concept\targ2_form\targ2_concept\tsentence_id";

fn tsv_field(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

/// One row per relation in document order, preceded by a header line.
pub fn export_relations(doc: &AnnotatedDocument) -> String {
    let mut out = String::from(RELATION_TSV_HEADER);
    out.push('\n');
    for s in &doc.sentences {
        let lookup = |id: usize| s.position(id).and_then(|p| s.tagged.get(p));
        for r in &s.relations {
            let (a1, a2) = (lookup(r.arg1.token), lookup(r.arg2.token));
            let form = |t: Option<&TaggedToken>| t.map(|t| tsv_field(t.form())).unwrap_or_default();
            let concept = |t: Option<&TaggedToken>| t.and_then(|t| t.concept.as_deref()).map(tsv_field).unwrap_or_default();
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                tsv_field(&r.name),
                form(a1),
                concept(a1),
                form(a2),
                concept(a2),
                sentence_label(s.sentence.id)
            );
        }
    }
    out
}
