#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use diathesis::fs::{Feature, PatternBundle, TreeBundle, ValueExpr};
use diathesis::matcher::{CostTable, EditOp, MatchResult, MatcherConfig};
use diathesis::pattern::{Pattern, PatternNodeBuilder};
use diathesis::tree::{NodeBuilder, ParseTree};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(data(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_diathesis")
}

const INTERNAL_CATS: [&str; 5] = ["sn", "sp", "grup", "fc", "S"];
const LEAF_CATS: [&str; 6] = ["NC", "SP", "vser", "vpart", "Fp", "sn"];
const SEM: [&str; 4] = ["Human", "Instrument", "BodyPart", "Meaning"];
const PREPS: [&str; 3] = ["a", "de", "con"];

fn random_tree_bundle(rng: &mut impl Rng, cat: &str, leaf: bool) -> TreeBundle {
    let mut b = TreeBundle::new().with(Feature::Cat, cat);
    if cat == "sp" || rng.gen_bool(0.1) {
        b.set(Feature::Prep, *PREPS.choose(rng).unwrap());
    }
    if rng.gen_bool(0.6) {
        b.set(Feature::Number, if rng.gen_bool(0.5) { "s" } else { "p" });
    }
    if rng.gen_bool(0.5) {
        b.set(Feature::Person, if rng.gen_bool(0.7) { "3" } else { "1" });
    }
    for s in SEM {
        if rng.gen_bool(0.25) {
            b.set(Feature::Sem, s);
        }
    }
    if leaf {
        let w = format!("w{}", rng.gen_range(0..50));
        b.set(Feature::Lemma, &w);
        b.set(Feature::Form, &w);
    }
    b
}

fn grow(rng: &mut impl Rng, cat: &str, budget: &mut usize, depth: usize) -> NodeBuilder {
    *budget -= 1;
    let want_children = depth < 3 && *budget > 0 && (depth == 0 || rng.gen_bool(0.5));
    if !want_children {
        let leaf_cat = LEAF_CATS.choose(rng).unwrap();
        return NodeBuilder::new(random_tree_bundle(rng, if depth == 0 { cat } else { leaf_cat }, true));
    }
    let mut node = NodeBuilder::new(random_tree_bundle(rng, cat, false));
    let n = if depth == 0 { rng.gen_range(2..=5) } else { rng.gen_range(1..=3) };
    for _ in 0..n {
        if *budget == 0 {
            break;
        }
        let c = INTERNAL_CATS[..4].choose(rng).unwrap();
        node.children.push(grow(rng, c, budget, depth + 1));
    }
    node
}

/// A random parse tree with at most `max_nodes` nodes.
pub fn random_tree(rng: &mut impl Rng, max_nodes: usize) -> ParseTree {
    let mut budget = rng.gen_range(max_nodes / 2..=max_nodes);
    ParseTree::from_builder(grow(rng, "S", &mut budget, 0)).unwrap()
}

fn random_expr(rng: &mut impl Rng, pool: &[&str]) -> ValueExpr {
    let a = |rng: &mut _| ValueExpr::atom(*pool.choose(rng).unwrap());
    match rng.gen_range(0..10) {
        0..=5 => a(rng),
        6 => {
            let mut alts: Vec<&str> = pool.choose_multiple(rng, 2).copied().collect();
            alts.sort();
            ValueExpr::one_of(alts).unwrap()
        }
        7 => ValueExpr::Negation(Box::new(a(rng))),
        _ => ValueExpr::Unspecified,
    }
}

fn random_pattern_bundle(rng: &mut impl Rng) -> PatternBundle {
    let mut b = PatternBundle::new();
    if rng.gen_bool(0.85) {
        b.set(Feature::Cat, random_expr(rng, &["sn", "sp", "vser", "vpart", "NC", "grup", "fc"]));
    }
    if rng.gen_bool(0.2) {
        b.set(Feature::Prep, random_expr(rng, &PREPS));
    }
    if rng.gen_bool(0.2) {
        b.set(Feature::Number, if rng.gen_bool(0.5) { ValueExpr::atom("s") } else { ValueExpr::Variable("n".into()) });
    }
    if rng.gen_bool(0.4) {
        let sem = match rng.gen_range(0..4) {
            0 => ValueExpr::Prefix("Hu".into()),
            _ => random_expr(rng, &SEM),
        };
        b.set(Feature::Sem, sem);
    }
    if rng.gen_bool(0.3) {
        b.agr = Some("i".into());
    }
    b
}

/// A random pattern with 1..=`max_roles` role nodes; some roles nest under
/// earlier ones.
pub fn random_pattern(rng: &mut impl Rng, max_roles: usize) -> Pattern {
    let n = rng.gen_range(1..=max_roles);
    // parent[i] is None for children of the root
    let mut parent: Vec<Option<usize>> = Vec::new();
    for i in 0..n {
        let p = if i > 0 && rng.gen_bool(0.3) { Some(rng.gen_range(0..i)) } else { None };
        parent.push(p);
    }
    fn build(i: usize, parent: &[Option<usize>], nodes: &mut Vec<Option<PatternNodeBuilder>>) -> PatternNodeBuilder {
        let mut b = nodes[i].take().unwrap();
        for j in 0..parent.len() {
            if parent[j] == Some(i) {
                b.children.push(build(j, parent, nodes));
            }
        }
        b
    }
    let mut nodes: Vec<Option<PatternNodeBuilder>> = (0..n)
        .map(|i| {
            Some(
                PatternNodeBuilder::new(random_pattern_bundle(rng))
                    .role(format!("r{i}"))
                    .optional(rng.gen_bool(0.5)),
            )
        })
        .collect();
    let mut root = PatternNodeBuilder::default();
    for i in 0..n {
        if parent[i].is_none() {
            root.children.push(build(i, &parent, &mut nodes));
        }
    }
    Pattern::from_builder("random", "v", root).unwrap()
}

pub fn random_costs(rng: &mut impl Rng) -> CostTable {
    let delete_optional = rng.gen_range(0..=4);
    CostTable {
        relabel_per_feature: rng.gen_range(0..=4),
        delete_optional,
        delete_mandatory: delete_optional + rng.gen_range(0..=4),
        insert_leaf: rng.gen_range(0..=3),
        insert_internal: rng.gen_range(0..=4),
        move_per_displacement: rng.gen_range(0..=4),
    }
}

pub fn random_config(rng: &mut impl Rng) -> MatcherConfig {
    let mut cfg = MatcherConfig {
        costs: random_costs(rng),
        ..MatcherConfig::default()
    };
    match rng.gen_range(0..3) {
        0 => cfg.barrier_categories = ["sn"].into_iter().map(String::from).collect(),
        1 => cfg.barrier_categories.clear(),
        _ => {}
    }
    cfg
}

// --- independent re-verification of a returned mapping ---

fn tree_ancestor(tree: &ParseTree, a: usize, d: usize) -> bool {
    let mut cur = tree.node(d).parent;
    while let Some(p) = cur {
        if p == a {
            return true;
        }
        cur = tree.node(p).parent;
    }
    false
}

fn pattern_ancestor(p: &Pattern, a: usize, d: usize) -> bool {
    let mut cur = p.node(d).parent;
    while let Some(x) = cur {
        if x == a {
            return true;
        }
        cur = p.node(x).parent;
    }
    false
}

type Env = BTreeMap<String, Vec<Option<String>>>;

fn bind(env: &mut Env, var: &str, v: Vec<Option<String>>) -> bool {
    match env.get(var) {
        Some(old) => *old == v,
        None => {
            env.insert(var.to_string(), v);
            true
        }
    }
}

fn holds(e: &ValueExpr, value: Option<&str>, env: &mut Env) -> bool {
    match e {
        ValueExpr::Unspecified => true,
        ValueExpr::Atom(a) => value == Some(a.as_str()),
        ValueExpr::Disjunction(alts) => alts.iter().any(|a| value == Some(a.as_str())),
        ValueExpr::Negation(inner) => !holds(inner, value, &mut env.clone()),
        ValueExpr::Prefix(p) => value.is_some_and(|v| v.starts_with(p.as_str())),
        ValueExpr::Variable(x) => bind(env, x, vec![value.map(String::from)]),
    }
}

fn sem_holds(e: &ValueExpr, labels: &BTreeSet<String>) -> bool {
    match e {
        ValueExpr::Unspecified => true,
        ValueExpr::Atom(a) => labels.contains(a),
        ValueExpr::Disjunction(alts) => alts.iter().any(|a| labels.contains(a)),
        ValueExpr::Negation(inner) => !sem_holds(inner, labels),
        ValueExpr::Prefix(p) => labels.iter().any(|l| l.starts_with(p.as_str())),
        ValueExpr::Variable(_) => true,
    }
}

/// Re-checks injectivity, root anchoring, the ancestor and structural
/// criteria, unification, agreement, the failing relabel features and
/// the script's cost and insert set. Test-side code only.
pub fn verify(pattern: &Pattern, tree: &ParseTree, r: &MatchResult, cfg: &MatcherConfig) -> Result<(), String> {
    let pairs = &r.mapping.pairs;
    if pairs.len() != pattern.len() {
        return Err("pair count".into());
    }
    if let Some(t) = pairs[0] {
        if t != 0 {
            return Err("root not anchored".into());
        }
    }
    let mapped: Vec<(usize, usize)> = pairs.iter().enumerate().filter_map(|(p, t)| t.map(|t| (p, t))).collect();
    let images: BTreeSet<usize> = mapped.iter().map(|x| x.1).collect();
    if images.len() != mapped.len() {
        return Err("not injective".into());
    }
    for &(p1, t1) in &mapped {
        for &(p2, t2) in &mapped {
            if p1 != p2 && pattern_ancestor(pattern, p1, p2) != tree_ancestor(tree, t1, t2) {
                return Err(format!("ancestor criterion fails for {p1},{p2}"));
            }
        }
    }
    for &(p, t) in &mapped {
        let mut anc = pattern.node(p).parent;
        while let Some(a) = anc {
            if pairs[a].is_some() {
                break;
            }
            anc = pattern.node(a).parent;
        }
        let upper = anc.and_then(|a| pairs[a]);
        let mut cur = tree.node(t).parent;
        while cur.is_some() && cur != upper {
            let n = cur.unwrap();
            if tree.node(n).bundle.cat().is_some_and(|c| cfg.barrier_categories.contains(c)) {
                return Err(format!("pattern node {p} crosses barrier at tree node {n}"));
            }
            cur = tree.node(n).parent;
        }
    }
    let mut env = Env::new();
    let mut expected_relabels = Vec::new();
    for &(p, t) in &mapped {
        let pb = &pattern.node(p).bundle;
        let tb = &tree.node(t).bundle;
        for f in Feature::ALL {
            let e = pb.get(f);
            let ok = if f == Feature::Sem { sem_holds(e, tb.sem()) } else { holds(e, tb.get(f), &mut env) };
            if !ok {
                if cfg.unify.relabelable.contains(&f) {
                    expected_relabels.push((p, f));
                } else {
                    return Err(format!("pattern node {p} does not unify on {f}"));
                }
            }
        }
        if let Some(var) = &pb.agr {
            let tuple = cfg.unify.agreement_features.iter().map(|f| tb.get(*f).map(String::from)).collect();
            if !bind(&mut env, &format!("agr:{var}"), tuple) {
                return Err(format!("agreement fails at pattern node {p}"));
            }
        }
    }
    let got_relabels: Vec<(usize, Feature)> = r
        .script
        .ops
        .iter()
        .filter_map(|op| match op {
            EditOp::Relabel { node, feature, .. } => Some((*node, *feature)),
            _ => None,
        })
        .collect();
    if got_relabels != expected_relabels {
        return Err(format!("relabels {got_relabels:?}, expected {expected_relabels:?}"));
    }
    let got_inserts: BTreeSet<usize> = r
        .script
        .ops
        .iter()
        .filter_map(|op| match op {
            EditOp::Insert { tree_node, .. } => Some(*tree_node),
            _ => None,
        })
        .collect();
    let want_inserts: BTreeSet<usize> = (0..tree.len()).filter(|t| !images.contains(t)).collect();
    if got_inserts != want_inserts {
        return Err("insert set".into());
    }
    let total = naive_cost(&r.script.ops, pattern, tree, &cfg.costs);
    if total != r.cost || total != r.script.total_cost {
        return Err(format!("cost {} but ops sum to {total}", r.cost));
    }
    Ok(())
}

/// Sums operation costs from the cost table, looking optionality and leaf
/// status up in the pattern and tree.
pub fn naive_cost(ops: &[EditOp], pattern: &Pattern, tree: &ParseTree, c: &CostTable) -> u64 {
    let mut total = 0;
    for op in ops {
        total += match op {
            EditOp::Relabel { .. } => c.relabel_per_feature,
            EditOp::DeleteCut { node, .. } | EditOp::DeletePrune { node, .. } => {
                if pattern.node(*node).optional {
                    c.delete_optional
                } else {
                    c.delete_mandatory
                }
            }
            EditOp::Insert { tree_node, .. } => {
                if tree.node(*tree_node).children.is_empty() {
                    c.insert_leaf
                } else {
                    c.insert_internal
                }
            }
            EditOp::Move { displacement, .. } => c.move_per_displacement * displacement,
        };
    }
    total
}

/// Whether the surface spans of role fillers are pairwise disjoint, for
/// roles neither of which lies under the other in the pattern.
pub fn spans_disjoint(pattern: &Pattern, tree: &ParseTree, r: &MatchResult) -> bool {
    let roles: Vec<(usize, std::ops::Range<usize>)> = r
        .role_fillers
        .iter()
        .map(|(name, f)| {
            let p = pattern.roles().find(|(_, n)| n.role.as_ref() == Some(name)).unwrap().0;
            (p, tree.node(f.node).token_span.clone())
        })
        .collect();
    roles.iter().enumerate().all(|(i, (p, a))| {
        roles[i + 1..].iter().all(|(q, b)| {
            pattern_ancestor(pattern, *p, *q)
                || pattern_ancestor(pattern, *q, *p)
                || a.end <= b.start
                || b.end <= a.start
        })
    })
}

/// A pattern carved out of `tree`: up to `max_roles` non-root nodes keep
/// their category (and sometimes number and a possibly wrong semantic
/// label), hang under their nearest chosen ancestor, and have their
/// sibling order shuffled.
pub fn planted_pattern(rng: &mut impl Rng, tree: &ParseTree, max_roles: usize) -> Pattern {
    let mut chosen: Vec<usize> = (1..tree.len()).filter(|_| rng.gen_bool(0.5)).collect();
    chosen.shuffle(rng);
    chosen.truncate(max_roles);
    chosen.sort();
    let mut builders: BTreeMap<usize, PatternNodeBuilder> = BTreeMap::new();
    for (k, &t) in chosen.iter().enumerate() {
        let tb = &tree.node(t).bundle;
        let mut b = PatternBundle::new().with(Feature::Cat, ValueExpr::atom(tb.cat().unwrap()));
        if let (Some(n), true) = (tb.get(Feature::Number), rng.gen_bool(0.3)) {
            b.set(Feature::Number, ValueExpr::atom(n));
        }
        if rng.gen_bool(0.4) {
            b.set(Feature::Sem, ValueExpr::atom(*SEM.choose(rng).unwrap()));
        }
        if rng.gen_bool(0.2) {
            b.agr = Some("i".into());
        }
        builders.insert(t, PatternNodeBuilder::new(b).role(format!("r{k}")).optional(rng.gen_bool(0.5)));
    }
    let nearest = |t: usize| {
        let mut cur = tree.node(t).parent;
        while let Some(p) = cur {
            if builders.contains_key(&p) {
                return Some(p);
            }
            cur = tree.node(p).parent;
        }
        None
    };
    let parents: Vec<(usize, Option<usize>)> = chosen.iter().map(|&t| (t, nearest(t))).collect();
    let mut root = PatternNodeBuilder::default();
    for &(t, parent) in parents.iter().rev() {
        let mut b = builders.remove(&t).unwrap();
        b.children.shuffle(rng);
        match parent {
            Some(p) => builders.get_mut(&p).unwrap().children.push(b),
            None => root.children.push(b),
        }
    }
    root.children.shuffle(rng);
    Pattern::from_builder("planted", "v", root).unwrap()
}
