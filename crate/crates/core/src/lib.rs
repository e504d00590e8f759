//! Verb case-role assignment by approximate tree pattern matching.
//!
//! A verbal lexicon entry is combined with each diathesis model of the same
//! transitivity to give a set of patterns ([`pattern::build_patterns`]).
//! Each pattern is matched against a parse tree by finding the cheapest
//! edit mapping ([`matcher::match_pattern`]), the best-ranked pattern names
//! the diathesis, and its mapped nodes give the role fillers.
//!
//! ```
//! use diathesis::{lexicon, matcher, pattern, tree};
//!
//! let lex = lexicon::load_lexicon(
//!     "verb ver trans\nrole entidad syn=sn\nrole iniciador syn=sn\n",
//! ).unwrap();
//! let models = lexicon::load_models(
//!     "model trans trans.active\nrole iniciador syn=sn\nrole event syn=verb\nrole entidad syn=sn\n",
//! ).unwrap();
//! let entry = lex.lookup_entry("ver").unwrap();
//! let patterns = pattern::build_patterns(&entry, &models, &pattern::BuilderConfig::default());
//! let t = tree::decode_tree(
//!     "(S (sn (NC form=Ana)) (verb lemma=ver form=vio) (sn (NC form=luz)))",
//! ).unwrap();
//! let best = &matcher::rank_patterns(&patterns, &t, &matcher::MatcherConfig::default()).unwrap()[0];
//! assert_eq!(best.filler("iniciador").unwrap().text, "Ana");
//! assert_eq!(best.filler("entidad").unwrap().text, "luz");
//! ```

pub mod cli;
pub mod eval;
pub mod fs;
pub mod lexicon;
pub mod matcher;
pub mod oracle;
pub mod pattern;
pub mod sexpr;
pub mod tree;

pub use fs::{Feature, PatternBundle, TreeBundle, ValueExpr};
pub use lexicon::{load_lexicon, load_models, Lexicon, ModelSet, VerbalEntry};
pub use matcher::{match_pattern, rank_patterns, CostTable, MatchResult, MatcherConfig};
pub use pattern::{build_patterns, Pattern};
pub use tree::{decode_corpus, decode_tree, encode_tree, ParseTree};
