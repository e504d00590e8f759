//! End-to-end acceptance criteria. Runs as a plain binary so every
//! criterion prints one PASS/FAIL line.

mod common;

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use common::{bin, data, planted_pattern, random_config, random_pattern, random_tree, read, verify};
use diathesis::eval::{self, parse_records, ScoreCounts};
use diathesis::fs::{Feature, ValueExpr};
use diathesis::lexicon::{load_lexicon, load_models, DiathesisModel, RoleSpec, Transitivity, VerbalEntry};
use diathesis::matcher::{derive_script, match_pattern, rank_patterns, EditOp, MatcherConfig};
use diathesis::oracle::brute_force;
use diathesis::pattern::{build_patterns, combine, decode_patterns, BuilderConfig, Pattern};
use diathesis::tree::{decode_tree, encode_tree, ParseTree};
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn e(s: &str) -> ValueExpr {
    s.parse().unwrap()
}

fn worked_patterns() -> Vec<Pattern> {
    let lex = load_lexicon(&read("susurrar.lex")).unwrap();
    let models = load_models(&read("models.sldm")).unwrap();
    build_patterns(&lex.lookup_entry("susurrar").unwrap(), &models, &BuilderConfig::default())
}

fn worked_tree() -> ParseTree {
    decode_tree(&read("fig1.tree")).unwrap()
}

fn passive(patterns: &[Pattern]) -> &Pattern {
    patterns.iter().find(|p| p.model_id == "trans.passive").unwrap()
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(bin()).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn path(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}

fn node_with_form(tree: &ParseTree, form: &str) -> usize {
    tree.nodes().iter().find(|n| n.bundle.get(Feature::Form) == Some(form)).unwrap().id
}

/// (role, syn, prep, sem, agr, optional)
type PatternRow = (&'static str, &'static str, &'static str, &'static str, Option<&'static str>, bool);

/// The combined passive pattern for susurrar.
const PASSIVE_PATTERN: [PatternRow; 7] = [
    ("entidad", "sn|spatons|prop", "*", "*", Some("i"), false),
    ("vaux", "vser", "*", "*", Some("i"), false),
    ("event", "vpart", "*", "*", None, false),
    ("iniciador", "sp", "por|de", "Human", None, true),
    ("meta", "sp", "a|al", "Human", None, true),
    ("entidad.2", "sp", "de|sobre", "*", None, true),
    ("medio", "sp", "con|por|a_través_de", "Instrument", None, true),
];

fn worked_example_end_to_end() {
    let (code, out) = run_cli(&[
        "build-patterns",
        "--lexicon",
        &path("susurrar.lex"),
        "--models",
        &path("models.sldm"),
        "--verb",
        "susurrar",
    ]);
    assert_eq!(code, 0);
    let patterns = decode_patterns(std::str::from_utf8(&out).unwrap()).unwrap();
    let p = passive(&patterns);
    let roles: Vec<_> = p.roles().map(|(_, n)| n.role.clone().unwrap()).collect();
    assert_eq!(roles, PASSIVE_PATTERN.map(|r| r.0.to_string()));
    for (role, syn, prep, sem, agr, opt) in PASSIVE_PATTERN {
        let n = p.role(role).unwrap();
        assert_eq!(n.bundle.get(Feature::Cat), &e(syn), "{role} syn");
        assert_eq!(n.bundle.get(Feature::Prep), &e(prep), "{role} prep");
        assert_eq!(n.bundle.get(Feature::Sem), &e(sem), "{role} sem");
        assert_eq!(n.agr(), agr, "{role} agr");
        assert_eq!(n.optional, opt, "{role} opt");
    }

    let start = Instant::now();
    let ranked = rank_patterns(&worked_patterns(), &worked_tree(), &MatcherConfig::default()).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(ranked[0].model_id, "trans.passive");
    let got: Vec<(String, String)> =
        ranked[0].role_fillers.iter().map(|(r, f)| (r.clone(), f.text.to_lowercase())).collect();
    let want = [("entidad", "el secreto"), ("vaux", "fue"), ("event", "susurrado"), ("medio", "con sus labios")]
        .map(|(r, f)| (r.to_string(), f.to_string()));
    assert_eq!(got, want);
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");

    let (code, out) = run_cli(&[
        "match",
        "--lexicon",
        &path("susurrar.lex"),
        "--models",
        &path("models.sldm"),
        "--tree",
        &path("fig1.tree"),
        "--top",
        "1",
    ]);
    assert_eq!(code, 0);
    let recs = parse_records(std::str::from_utf8(&out).unwrap()).unwrap();
    assert_eq!(recs[0].model_id.as_deref(), Some("trans.passive"));
    assert_eq!(recs[0].roles["medio"].to_lowercase(), "con sus labios");
}

fn script_composition() {
    let patterns = worked_patterns();
    let p = passive(&patterns);
    for (file, leaves) in [("fig1.tree", 7), ("fig1_noperiod.tree", 6)] {
        let tree = decode_tree(&read(file)).unwrap();
        let r = match_pattern(p, &tree, &MatcherConfig::default());
        let ops = &r.script.ops;
        let medio = p.roles().find(|(_, n)| n.role.as_deref() == Some("medio")).unwrap().0;
        let moves: Vec<_> = ops.iter().filter(|o| matches!(o, EditOp::Move { .. })).collect();
        assert_eq!(moves.len(), 1);
        assert!(matches!(moves[0], EditOp::Move { node, .. } if *node == medio));
        let relabels: Vec<_> = ops.iter().filter(|o| matches!(o, EditOp::Relabel { .. })).collect();
        assert_eq!(relabels.len(), 1);
        assert!(matches!(relabels[0], EditOp::Relabel { node, feature: Feature::Sem, .. } if *node == medio));

        // the comma and verb-group phrases plus every token leaf except the mapped verbs
        let want: BTreeSet<usize> = tree
            .nodes()
            .iter()
            .filter(|n| {
                matches!(n.bundle.cat(), Some("fc" | "grup-verbal"))
                    || (n.is_leaf() && !matches!(n.bundle.cat(), Some("vser" | "vpart")))
            })
            .map(|n| n.id)
            .collect();
        let inserts: BTreeSet<usize> = ops
            .iter()
            .filter_map(|o| match o {
                EditOp::Insert { tree_node, .. } => Some(*tree_node),
                _ => None,
            })
            .collect();
        assert_eq!(want.len(), 2 + leaves);
        assert_eq!(inserts, want, "{file}");

        let deletes: Vec<_> = ops.iter().filter(|o| matches!(o, EditOp::DeleteCut { .. })).collect();
        assert_eq!(deletes.len(), r.unassigned_roles.len());
        assert_eq!(r.unassigned_roles, ["entidad.2", "iniciador", "meta"].map(String::from).into());
        assert!(!ops.iter().any(|o| matches!(o, EditOp::DeletePrune { .. })));
    }
    println!("  deletes equal the 3 unmapped roles");
}

fn oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut checked, mut same) = (0, 0);
    for i in 0..500 {
        let tree = random_tree(&mut rng, 12);
        let pattern = if i % 2 == 0 { random_pattern(&mut rng, 6) } else { planted_pattern(&mut rng, &tree, 6) };
        let cfg = random_config(&mut rng);
        let fast = match_pattern(&pattern, &tree, &cfg);
        let slow = brute_force(&pattern, &tree, &cfg).unwrap();
        assert_eq!(fast.cost, slow.cost, "instance {i}");
        verify(&pattern, &tree, &fast, &cfg).unwrap_or_else(|m| panic!("instance {i}, matcher: {m}"));
        verify(&pattern, &tree, &slow, &cfg).unwrap_or_else(|m| panic!("instance {i}, oracle: {m}"));
        checked += 1;
        same += usize::from(fast.mapping == slow.mapping);
    }
    println!("  {checked}/500 instances agree on cost, {same} on the exact mapping");
}

fn structural_criterion() {
    let patterns = worked_patterns();
    let p = passive(&patterns);
    let tree = worked_tree();
    let labios = node_with_form(&tree, "labios");
    let entidad = p.roles().find(|(_, n)| n.role.as_deref() == Some("entidad")).unwrap().0;
    let closed = MatcherConfig::default();
    let r = match_pattern(p, &tree, &closed);
    assert_ne!(r.mapping.pairs[entidad], Some(labios));
    for q in &patterns {
        assert_ne!(q.role("entidad").and_then(|_| match_pattern(q, &tree, &closed).filler("entidad").map(|f| f.node)), Some(labios));
    }
    let mut through_sp = vec![None; p.len()];
    through_sp[0] = Some(0);
    through_sp[entidad] = Some(labios);
    assert!(derive_script(p, &tree, &through_sp, &closed).is_err());

    let open = MatcherConfig {
        barrier_categories: BTreeSet::new(),
        ..MatcherConfig::default()
    };
    assert!(derive_script(p, &tree, &through_sp, &open).is_ok());
    let r_open = match_pattern(p, &tree, &open);
    assert!(r_open.cost <= r.cost);
}

fn builder_algebra() {
    #[derive(Clone, Copy, Debug)]
    enum State {
        Model,
        Entry,
        Neither,
        Both,
    }
    let fields = [Feature::Cat, Feature::Prep, Feature::Sem, Feature::Number, Feature::Person];
    let model_val = |f: Feature| match f {
        Feature::Cat => e("sp"),
        Feature::Prep => e("por"),
        Feature::Sem => e("Human"),
        Feature::Number => e("s"),
        _ => e("3"),
    };
    let entry_val = |f: Feature| match f {
        Feature::Cat => e("sn"),
        Feature::Prep => e("de"),
        Feature::Sem => e("Instrument"),
        Feature::Number => e("p"),
        _ => e("1"),
    };
    let set = |spec: &mut RoleSpec, f: Feature, v: ValueExpr| match f {
        Feature::Cat => spec.syn = v,
        Feature::Prep => spec.prep = v,
        Feature::Sem => spec.sem = v,
        f => {
            spec.morph.insert(f, v);
        }
    };
    let check = |states: &[State]| {
        let mut mr = RoleSpec::new("x");
        let mut er = RoleSpec::new("x");
        mr.agr = Some("i".into());
        mr.optional = true;
        er.optional = false;
        for (f, s) in fields.iter().zip(states) {
            if matches!(s, State::Model | State::Both) {
                set(&mut mr, *f, model_val(*f));
            }
            if matches!(s, State::Entry | State::Both) {
                set(&mut er, *f, entry_val(*f));
            }
        }
        let model = DiathesisModel { id: "m".into(), transitivity: Transitivity::Transitive, roles: vec![mr] };
        let entry = VerbalEntry {
            lemma: "v".into(),
            transitivity: Transitivity::Transitive,
            class: None,
            roles: vec![er],
        };
        let p = combine(&entry, &model, &BuilderConfig::default()).unwrap();
        let n = p.role("x").unwrap();
        for (f, s) in fields.iter().zip(states) {
            let want = match s {
                State::Model | State::Both => model_val(*f),
                State::Entry => entry_val(*f),
                State::Neither => ValueExpr::Unspecified,
            };
            assert_eq!(n.bundle.get(*f), &want, "{f} in {states:?}");
        }
        assert_eq!(n.agr(), Some("i"));
        assert!(n.optional);
    };
    let mut count = 0;
    for code in 0..4usize.pow(fields.len() as u32) {
        let states: Vec<State> = (0..fields.len())
            .map(|k| [State::Model, State::Entry, State::Neither, State::Both][(code / 4usize.pow(k as u32)) % 4])
            .collect();
        check(&states);
        count += 1;
    }

    // appended roles: everything the model lacks except entidad, iniciador and meta
    let names = ["entidad", "iniciador", "meta", "medio", "entidad.2", "instrumento"];
    let entry = VerbalEntry {
        lemma: "v".into(),
        transitivity: Transitivity::Transitive,
        class: None,
        roles: names.iter().map(|n| RoleSpec::new(*n)).collect(),
    };
    let model = DiathesisModel {
        id: "m".into(),
        transitivity: Transitivity::Transitive,
        roles: vec![RoleSpec::new("vaux"), RoleSpec::new("event")],
    };
    let p = combine(&entry, &model, &BuilderConfig::default()).unwrap();
    let got: Vec<_> = p.roles().map(|(_, n)| (n.role.clone().unwrap(), n.optional)).collect();
    let want: Vec<_> = [("vaux", false), ("event", false), ("medio", true), ("entidad.2", true), ("instrumento", true)]
        .map(|(r, o)| (r.to_string(), o))
        .into();
    assert_eq!(got, want);
    println!("  {count} field-state combinations");
}

fn corpus_metrics() {
    let gold = parse_records(&read("eval/gold.txt")).unwrap();
    let pred = parse_records(&read("eval/pred.txt")).unwrap();
    let report = eval::evaluate(&gold, &pred).unwrap();
    assert_eq!(report.role_recall.0, Some(Ratio::new_raw(37, 40)));
    assert_eq!(report.role_precision.0, Some(Ratio::new_raw(37, 39)));
    assert_eq!((report.counts.missing_roles, report.counts.spurious_roles), (3, 2));
    assert_eq!(gold.iter().map(|g| g.roles.len()).sum::<usize>(), 40);

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let pairs: Vec<_> = gold
        .iter()
        .map(|g| (g.clone(), pred.iter().find(|p| p.sentence_id == g.sentence_id).cloned()))
        .collect();
    let score = |items: &[(eval::GoldRecord, Option<eval::SentenceRecord>)]| -> ScoreCounts {
        items.iter().map(|(g, p)| eval::score_sentence(p.as_ref(), g).unwrap()).sum()
    };
    let whole = score(&pairs);
    for _ in 0..200 {
        let mut shuffled = pairs.clone();
        shuffled.shuffle(&mut rng);
        let cut = rng.gen_range(0..=shuffled.len());
        let (a, b) = shuffled.split_at(cut);
        assert_eq!(score(a) + score(b), whole);
        let g: Vec<_> = shuffled.iter().map(|x| x.0.clone()).collect();
        let r = eval::evaluate(&g, &pred).unwrap();
        assert_eq!(r.role_recall, report.role_recall);
        assert_eq!(r.role_precision, report.role_precision);
        assert_eq!(r.model_recall, report.model_recall);
    }
    println!("  synthetic fixture scored; the original annotated corpus is not available");
}

fn determinism_and_formats() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let t = random_tree(&mut rng, 30);
        let text = encode_tree(&t);
        let back = decode_tree(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(encode_tree(&back), text);
    }

    let runs: [Vec<String>; 3] = [
        vec![
            "build-patterns".into(),
            "--lexicon".into(),
            path("susurrar.lex"),
            "--models".into(),
            path("models.sldm"),
            "--verb".into(),
            "susurrar".into(),
        ],
        vec![
            "match".into(),
            "--patterns".into(),
            path("golden/susurrar.patterns"),
            "--tree".into(),
            path("fig1.tree"),
        ],
        vec![
            "evaluate".into(),
            "--gold".into(),
            path("eval/gold.txt"),
            "--pred".into(),
            path("eval/pred.txt"),
        ],
    ];
    let goldens = ["golden/susurrar.patterns", "golden/fig1.match", "golden/eval.report"];
    for (args, golden) in runs.iter().zip(goldens) {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, first) = run_cli(&args);
        assert_eq!(code, 0);
        for _ in 0..2 {
            assert_eq!(run_cli(&args).1, first);
        }
        assert_eq!(String::from_utf8(first).unwrap(), read(golden), "{golden}");
    }
    let corpus = ["match", "--lexicon", &path("susurrar.lex"), "--models", &path("models.sldm"), "--tree", &path("corpus.tree")];
    let (code, first) = run_cli(&corpus);
    assert_eq!(code, 0);
    for _ in 0..3 {
        assert_eq!(run_cli(&corpus).1, first);
    }
}

fn main() {
    let criteria: [(&str, fn()); 7] = [
        ("1 worked example end to end", worked_example_end_to_end),
        ("2 edit script composition", script_composition),
        ("3 oracle equivalence", oracle_equivalence),
        ("4 structural criterion", structural_criterion),
        ("5 pattern builder algebra", builder_algebra),
        ("6 corpus metrics", corpus_metrics),
        ("7 determinism and formats", determinism_and_formats),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let ok = panic::catch_unwind(AssertUnwindSafe(f)).is_ok();
        println!("criterion {name}: {} ({:.2?})", if ok { "PASS" } else { "FAIL" }, start.elapsed());
        failed += usize::from(!ok);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
