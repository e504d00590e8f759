//! "Con sus labios, fue susurrado el secreto": build the patterns for
//! susurrar, rank them against the parse and print the chosen analysis.

use diathesis::matcher::{rank_patterns, MatcherConfig};
use diathesis::pattern::{build_patterns, BuilderConfig};
use diathesis::{decode_tree, load_lexicon, load_models};

fn main() {
    let lexicon = load_lexicon(include_str!("../data/susurrar.lex")).expect("lexicon");
    let models = load_models(include_str!("../data/models.sldm")).expect("models");
    let tree = decode_tree(include_str!("../data/fig1.tree")).expect("tree");

    let entry = lexicon.lookup_entry("susurrar").expect("entry");
    let patterns = build_patterns(&entry, &models, &BuilderConfig::default());
    let ranked = rank_patterns(&patterns, &tree, &MatcherConfig::default()).expect("ranking");

    println!("sentence: {}", tree.tokens().join(" "));
    for r in &ranked {
        println!("  {:<16} cost {}", r.model_id, r.cost);
    }
    let best = &ranked[0];
    println!("\nchosen model: {}", best.model_id);
    for (role, filler) in &best.role_fillers {
        println!("  {role:<10} {}", filler.text);
    }
    println!("\nedit script:");
    for line in &best.script_lines {
        println!("  {line}");
    }
}
