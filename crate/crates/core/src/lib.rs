//! Multilingual document analysis with swappable resource bundles.
//!
//! Every algorithm in this crate is language independent. Whatever differs
//! between languages (abbreviations, tag lexicon, tagset map, grammar,
//! semantic lexicon, case frames, ontology, structure patterns) is read from
//! a [`ResourceBundle`] XML file, so the same code analyzes English and
//! German text given the matching bundle.
//!
//! Stages, in order: [`structure`] (tokens and sentences), [`tagger`] (POS
//! tags and tagset mapping), [`parser`] (chart parsing), [`semantics`]
//! (semantic tags, case frames, relations). [`pipeline`] chains them and
//! writes annotated XML and relation tables.

pub mod parser;
pub mod pipeline;
pub mod resource;
pub mod semantics;
pub mod structure;
pub mod tagger;
mod xml;

pub use parser::{chunks, complete_parses, parse, Chart, ParseError, ParseTree};
pub use pipeline::{
    analyze, emit_xml, export_relations, run_pipeline, AnalysisOptions, AnnotatedDocument, PipelineConfig,
    PipelineError, Stage,
};
pub use resource::{load_bundle, parse_bundle, serialize_bundle, validate_bundle, ResourceBundle, ResourceError};
pub use semantics::{FrameInstance, Relation};
pub use structure::{Sentence, Token};
pub use tagger::TaggedToken;
