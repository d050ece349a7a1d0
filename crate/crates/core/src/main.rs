use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use xdoc::parser::{self, ParseError};
use xdoc::pipeline::{parse_stage_list, PipelineConfig, Stage};
use xdoc::resource::{load_bundle, validate_bundle, Category};
use xdoc::tagger;

#[derive(Parser)]
#[command(name = "xdoc", version, about = "Resource-driven document analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a resource bundle for dangling cross-references.
    Validate { bundle: PathBuf },
    /// Run the analysis pipeline and write annotated XML.
    Analyze {
        #[arg(long)]
        bundle: PathBuf,
        /// Plain UTF-8 text; optional when --external-tags is given.
        #[arg(long, required_unless_present = "external_tags")]
        input: Option<PathBuf>,
        /// XML destination; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Comma-separated stage prefix, e.g. `tok,sent,tag`.
        #[arg(long, default_value = "tok,sent,tag,map,parse,sem,frames,rel")]
        stages: String,
        /// Record per-sentence failures instead of aborting.
        #[arg(long)]
        lenient: bool,
        /// Tab-separated `form<TAB>tag` file replacing tokenization and tagging.
        #[arg(long)]
        external_tags: Option<PathBuf>,
        #[arg(long)]
        relations_tsv: Option<PathBuf>,
    },
    /// Print form, source tag and parser tag per token.
    Tag {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Parse a space-separated parser-tag sequence and print bracketed trees.
    Parse {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        tags: String,
    },
}

const EXIT_RESOURCE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_ANALYSIS: u8 = 3;

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("xdoc: {message}");
    ExitCode::from(code)
}

fn read_input(path: &Path) -> Result<String, ExitCode> {
    let bytes = std::fs::read(path).map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    String::from_utf8(bytes).map_err(|_| fail(EXIT_INPUT, format!("{}: not valid UTF-8", path.display())))
}

fn write_output(path: &Path, contents: &str) -> Result<(), ExitCode> {
    std::fs::write(path, contents).map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}

fn run(command: Command) -> Result<(), ExitCode> {
    match command {
        Command::Validate { bundle } => {
            let loaded = load_bundle(&bundle).map_err(|e| fail(EXIT_RESOURCE, e))?;
            let report = validate_bundle(&loaded);
            for finding in &report.findings {
                println!("{finding}");
            }
            let errors = report.errors().count();
            eprintln!(
                "{}: {} finding(s), {errors} error(s)",
                bundle.display(),
                report.findings.len()
            );
            if errors > 0 {
                return Err(ExitCode::from(EXIT_RESOURCE));
            }
            Ok(())
        }
        Command::Analyze {
            bundle,
            input,
            output,
            stages,
            lenient,
            external_tags,
            relations_tsv,
        } => {
            let last_stage = parse_stage_list(&stages).map_err(|e| fail(EXIT_INPUT, e))?;
            let text = match (&input, &external_tags) {
                (Some(path), None) => read_input(path)?,
                _ => String::new(),
            };
            let config = PipelineConfig {
                bundle_path: bundle,
                last_stage,
                lenient,
                external_tags,
            };
            let mut doc = xdoc::run_pipeline(&config, &text).map_err(|e| {
                let code = u8::try_from(e.exit_code()).unwrap_or(EXIT_ANALYSIS);
                fail(code, e)
            })?;
            doc.source = input;
            let xml = xdoc::emit_xml(&doc);
            match &output {
                Some(path) => write_output(path, &xml)?,
                None => print!("{xml}"),
            }
            if let Some(path) = &relations_tsv {
                if !doc.has_run(Stage::Rel) {
                    return Err(fail(EXIT_INPUT, "--relations-tsv needs the rel stage"));
                }
                write_output(path, &xdoc::export_relations(&doc))?;
            }
            Ok(())
        }
        Command::Tag { bundle, input } => {
            let loaded = load_bundle(&bundle).map_err(|e| fail(EXIT_RESOURCE, e))?;
            let text = read_input(&input)?;
            let sentences = xdoc::structure::segment(&text, &loaded.abbreviations);
            for (i, sentence) in sentences.iter().enumerate() {
                if i > 0 {
                    println!();
                }
                for t in tagger::tag_sentence(sentence, &loaded) {
                    let mapped = loaded.tagset_map.get(&t.source_tag).map_or("-", |m| m.tag.as_str());
                    println!("{}\t{}\t{}", t.form(), t.source_tag, mapped);
                }
            }
            Ok(())
        }
        Command::Parse { bundle, tags } => {
            let loaded = load_bundle(&bundle).map_err(|e| fail(EXIT_RESOURCE, e))?;
            let terminals: Vec<Category> = tags.split_whitespace().map(Category::new).collect();
            let chart = parser::parse(&terminals, &loaded.grammar).map_err(|e| fail(EXIT_INPUT, e))?;
            match parser::complete_parses(&chart, &loaded.grammar.start_symbol) {
                Ok(trees) if trees.is_empty() => {
                    eprintln!("no complete parse; chunks:");
                    let rendered: Vec<String> = parser::chunks(&chart).iter().map(|t| t.render(None)).collect();
                    println!("{}", rendered.join(" "));
                }
                Ok(trees) => {
                    for t in trees {
                        println!("{}", t.render(None));
                    }
                }
                Err(e @ ParseError::TooAmbiguous { .. }) => return Err(fail(EXIT_ANALYSIS, e)),
                Err(e) => return Err(fail(EXIT_INPUT, e)),
            }
            Ok(())
        }
    }
}

