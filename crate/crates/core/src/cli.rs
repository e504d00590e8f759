//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 unknown verb, 3 malformed
//! input, 4 gold/prediction id mismatch, 5 oracle disagreement, 6 input
//! too large for the oracle, 64 bad usage.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use thiserror::Error;

use crate::eval::{self, EvalError};
use crate::fs::Feature;
use crate::lexicon::{load_lexicon, load_models, LexiconError};
use crate::matcher::{rank_patterns, ConfigError, MatcherConfig};
use crate::oracle::{brute_force, OracleError};
use crate::pattern::{build_patterns, decode_patterns, encode_patterns, BuilderConfig, Pattern, PatternError};
use crate::tree::{decode_corpus, ParseTree, Sentence, TreeError};

#[derive(Debug, Parser)]
#[command(name = "diathesis", version, about = "Case-role assignment by approximate tree pattern matching")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Combine a verb's entry with every model of its transitivity.
    BuildPatterns {
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        verb: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank patterns against each tree of a corpus.
    Match(MatchArgs),
    /// Score predictions against gold records.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    #[arg(long, conflicts_with_all = ["lexicon", "models", "verb"])]
    pub patterns: Option<PathBuf>,
    #[arg(long, requires = "models")]
    pub lexicon: Option<PathBuf>,
    #[arg(long, requires = "lexicon")]
    pub models: Option<PathBuf>,
    /// Verb lemma; detected from each tree when omitted.
    #[arg(long, requires = "lexicon")]
    pub verb: Option<String>,
    #[arg(long)]
    pub tree: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Cross-check every match against exhaustive search.
    #[arg(long)]
    pub oracle: bool,
    /// Keep only the best N models per sentence.
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("unknown verb `{0}`")]
    UnknownVerb(String),
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("{0}")]
    IdMismatch(EvalError),
    #[error("oracle disagrees on sentence {sentence}, model {model}: matcher cost {matcher}, oracle cost {oracle}")]
    OracleDisagreement {
        sentence: String,
        model: String,
        matcher: u64,
        oracle: u64,
    },
    #[error("sentence {sentence}: {source}")]
    OracleTooLarge {
        sentence: String,
        source: OracleError,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::UnknownVerb(_) => 2,
            CliError::Input { .. } => 3,
            CliError::IdMismatch(_) => 4,
            CliError::OracleDisagreement { .. } => 5,
            CliError::OracleTooLarge { .. } => 6,
            CliError::Usage(_) => 64,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn input_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn lexicon_err(path: &Path, e: LexiconError) -> CliError {
    match e {
        LexiconError::UnknownVerb { lemma, .. } => CliError::UnknownVerb(lemma),
        e => input_err(path, e),
    }
}

fn write_out(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

const MAIN_VERB_CATEGORIES: [&str; 4] = ["verb", "vpart", "vinf", "vger"];
const AUXILIARY_CATEGORIES: [&str; 2] = ["vser", "vaux"];

/// Lemma of the sentence's verb: the first main-verb node in preorder,
/// else the first auxiliary.
pub fn detect_verb(tree: &ParseTree) -> Option<String> {
    let find = |cats: &[&str]| {
        tree.nodes()
            .iter()
            .find(|n| n.bundle.cat().is_some_and(|c| cats.contains(&c)) && n.bundle.get(Feature::Lemma).is_some())
            .and_then(|n| n.bundle.get(Feature::Lemma))
            .map(String::from)
    };
    find(&MAIN_VERB_CATEGORIES).or_else(|| find(&AUXILIARY_CATEGORIES))
}

fn cmd_build_patterns(
    lexicon: &Path,
    models: &Path,
    verb: &str,
) -> Result<String, CliError> {
    let lex = load_lexicon(&read(lexicon)?).map_err(|e| lexicon_err(lexicon, e))?;
    let set = load_models(&read(models)?).map_err(|e| lexicon_err(models, e))?;
    let entry = lex.lookup_entry(verb).map_err(|e| lexicon_err(lexicon, e))?;
    let patterns = build_patterns(&entry, &set, &BuilderConfig::default());
    log::info!("{} patterns for {verb}", patterns.len());
    Ok(encode_patterns(&patterns))
}

enum PatternSource {
    Fixed(Vec<Pattern>),
    PerVerb {
        lexicon: crate::lexicon::Lexicon,
        lexicon_path: PathBuf,
        models: crate::lexicon::ModelSet,
        verb: Option<String>,
    },
}

impl PatternSource {
    /// `Ok(None)` when no verb can be located in the tree.
    fn patterns_for(&self, tree: &ParseTree) -> Result<Option<Vec<Pattern>>, CliError> {
        match self {
            PatternSource::Fixed(p) => Ok(Some(p.clone())),
            PatternSource::PerVerb {
                lexicon,
                lexicon_path,
                models,
                verb,
            } => {
                let Some(lemma) = verb.clone().or_else(|| detect_verb(tree)) else {
                    return Ok(None);
                };
                let entry = lexicon.lookup_entry(&lemma).map_err(|e| lexicon_err(lexicon_path, e))?;
                let patterns = build_patterns(&entry, models, &BuilderConfig::default());
                Ok((!patterns.is_empty()).then_some(patterns))
            }
        }
    }
}

fn match_sentence(
    s: &Sentence,
    source: &PatternSource,
    config: &MatcherConfig,
    oracle: bool,
    top: Option<usize>,
) -> Result<String, CliError> {
    let Some(patterns) = source.patterns_for(&s.tree)? else {
        log::warn!("sentence {}: no verb or no applicable model", s.id);
        return Ok(format!("sentence {}\n", s.id));
    };
    let ranked = rank_patterns(&patterns, &s.tree, config).map_err(|e| CliError::Usage(e.to_string()))?;
    if oracle {
        for r in &ranked {
            let p = patterns.iter().find(|p| p.model_id == r.model_id).unwrap();
            let o = brute_force(p, &s.tree, config).map_err(|source| CliError::OracleTooLarge {
                sentence: s.id.clone(),
                source,
            })?;
            if o.cost != r.cost {
                return Err(CliError::OracleDisagreement {
                    sentence: s.id.clone(),
                    model: r.model_id.clone(),
                    matcher: r.cost,
                    oracle: o.cost,
                });
            }
            if o.mapping != r.mapping {
                log::info!("sentence {} model {}: equal-cost mappings differ", s.id, r.model_id);
            }
        }
    }
    let keep = top.unwrap_or(ranked.len());
    Ok(ranked
        .iter()
        .take(keep)
        .map(|r| format!("sentence {}\n{}", s.id, r.serialize()))
        .collect::<Vec<_>>()
        .join("\n"))
}

fn cmd_match(a: &MatchArgs) -> Result<String, CliError> {
    let config = match &a.config {
        Some(p) => MatcherConfig::parse(&read(p)?).map_err(|e: ConfigError| input_err(p, e))?,
        None => MatcherConfig::default(),
    };
    let source = match (&a.patterns, &a.lexicon, &a.models) {
        (Some(p), _, _) => {
            let patterns = decode_patterns(&read(p)?).map_err(|e: PatternError| input_err(p, e))?;
            if patterns.is_empty() {
                return Err(input_err(p, "no patterns"));
            }
            PatternSource::Fixed(patterns)
        }
        (None, Some(l), Some(m)) => PatternSource::PerVerb {
            lexicon: load_lexicon(&read(l)?).map_err(|e| lexicon_err(l, e))?,
            lexicon_path: l.clone(),
            models: load_models(&read(m)?).map_err(|e| lexicon_err(m, e))?,
            verb: a.verb.clone(),
        },
        _ => return Err(CliError::Usage("give --patterns or both --lexicon and --models".into())),
    };
    let sentences = decode_corpus(&read(&a.tree)?).map_err(|e: TreeError| input_err(&a.tree, e))?;
    let blocks: Vec<Result<String, CliError>> = sentences
        .par_iter()
        .map(|s| match_sentence(s, &source, &config, a.oracle, a.top))
        .collect();
    let blocks = blocks.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(blocks.join("\n"))
}

fn cmd_evaluate(gold: &Path, pred: &Path) -> Result<String, CliError> {
    let g = eval::parse_records(&read(gold)?).map_err(|e| input_err(gold, e))?;
    let p = eval::parse_records(&read(pred)?).map_err(|e| input_err(pred, e))?;
    match eval::evaluate(&g, &p) {
        Ok(report) => Ok(report.render()),
        Err(e @ (EvalError::UnknownSentence(_) | EvalError::IdMismatch { .. })) => {
            Err(CliError::IdMismatch(e))
        }
        Err(e) => Err(input_err(gold, e)),
    }
}

/// Runs one command, writing to `--out` or `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::BuildPatterns {
            lexicon,
            models,
            verb,
            out,
        } => write_out(out.as_deref(), &cmd_build_patterns(lexicon, models, verb)?, stdout),
        Command::Match(a) => write_out(a.out.as_deref(), &cmd_match(a)?, stdout),
        Command::Evaluate { gold, pred, out } => {
            write_out(out.as_deref(), &cmd_evaluate(gold, pred)?, stdout)
        }
    }
}

/// Parses `args`, runs, reports errors on stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 64 } else { 0 };
        }
    };
    match run(&cli, &mut std::io::stdout().lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
