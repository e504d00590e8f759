//! Rank every applicable model for each sentence of a small corpus.

use diathesis::cli::detect_verb;
use diathesis::matcher::{rank_patterns, MatcherConfig};
use diathesis::pattern::{build_patterns, BuilderConfig};
use diathesis::{decode_corpus, load_lexicon, load_models};

fn main() {
    let lexicon = load_lexicon(include_str!("../data/susurrar.lex")).expect("lexicon");
    let models = load_models(include_str!("../data/models.sldm")).expect("models");
    let corpus = decode_corpus(include_str!("../data/corpus.tree")).expect("corpus");
    let config = MatcherConfig::default();

    for s in &corpus {
        println!("{}: {}", s.id, s.tree.tokens().join(" "));
        let Some(verb) = detect_verb(&s.tree) else {
            println!("  no verb found\n");
            continue;
        };
        let entry = lexicon.lookup_entry(&verb).expect("verb in lexicon");
        let patterns = build_patterns(&entry, &models, &BuilderConfig::default());
        for r in rank_patterns(&patterns, &s.tree, &config).expect("patterns") {
            let roles: Vec<String> = r.role_fillers.iter().map(|(k, f)| format!("{k}={}", f.text)).collect();
            println!("  {:<16} cost {:>2}  {}", r.model_id, r.cost, roles.join(", "));
        }
        println!();
    }
}
