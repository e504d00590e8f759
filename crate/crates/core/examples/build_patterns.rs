//! Combine a verbal entry with every diathesis model of its transitivity.
//!
//! Usage: `cargo run --example build_patterns [verb]` (default susurrar).

use diathesis::pattern::{build_patterns, encode_pattern, BuilderConfig};
use diathesis::{load_lexicon, load_models};

fn main() {
    let verb = std::env::args().nth(1).unwrap_or_else(|| "susurrar".into());
    let lexicon = load_lexicon(include_str!("../data/susurrar.lex")).expect("lexicon");
    let models = load_models(include_str!("../data/models.sldm")).expect("models");

    let entry = match lexicon.lookup_entry(&verb) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    println!("{} ({}), {} roles in the entry", entry.lemma, entry.transitivity, entry.roles.len());
    for p in build_patterns(&entry, &models, &BuilderConfig::default()) {
        let appended: Vec<_> = p
            .roles()
            .filter(|(_, n)| models.get(&p.model_id).is_some_and(|m| m.roles.iter().all(|r| Some(&r.name) != n.role.as_ref())))
            .map(|(_, n)| n.role.clone().unwrap())
            .collect();
        println!("\n# {} roles, appended from the entry: {:?}", p.role_count(), appended);
        print!("{}", encode_pattern(&p));
    }
}
