//! Match a corpus, then score the predictions against gold annotations.

use diathesis::cli::detect_verb;
use diathesis::eval::{evaluate, parse_records};
use diathesis::matcher::{rank_patterns, MatcherConfig};
use diathesis::pattern::{build_patterns, BuilderConfig};
use diathesis::{decode_corpus, load_lexicon, load_models};

const GOLD: &str = "\
sentence fig1
model=trans.passive
role entidad\tEl secreto
role vaux\tFue
role event\tSusurrado
role medio\tCon sus labios

sentence active
model=trans.active
role iniciador\tMaría
role event\tmurmuró
role entidad\tuna canción
role meta\ta Juan

sentence noverb
model=intrans.active
role entidad\tSilencio
";

fn main() {
    let lexicon = load_lexicon(include_str!("../data/susurrar.lex")).expect("lexicon");
    let models = load_models(include_str!("../data/models.sldm")).expect("models");
    let corpus = decode_corpus(include_str!("../data/corpus.tree")).expect("corpus");

    let mut predictions = String::new();
    for s in corpus.iter().filter(|s| s.id != "charla") {
        predictions.push_str(&format!("sentence {}\n", s.id));
        if let Some(verb) = detect_verb(&s.tree) {
            let entry = lexicon.lookup_entry(&verb).expect("verb in lexicon");
            let patterns = build_patterns(&entry, &models, &BuilderConfig::default());
            let best = &rank_patterns(&patterns, &s.tree, &MatcherConfig::default()).expect("patterns")[0];
            predictions.push_str(&best.serialize());
        }
        predictions.push('\n');
    }
    print!("{predictions}");

    let gold = parse_records(GOLD).expect("gold");
    let pred = parse_records(&predictions).expect("predictions");
    print!("{}", evaluate(&gold, &pred).expect("scores").render());
}
