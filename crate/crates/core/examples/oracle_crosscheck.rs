//! Compare branch and bound against exhaustive search on random inputs.

use diathesis::fs::{Feature, PatternBundle, TreeBundle, ValueExpr};
use diathesis::matcher::{match_pattern, CostTable, MatcherConfig};
use diathesis::oracle::brute_force;
use diathesis::pattern::{Pattern, PatternNodeBuilder};
use diathesis::tree::{NodeBuilder, ParseTree};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CATS: [&str; 4] = ["sn", "sp", "grup", "vser"];

fn random_tree(rng: &mut ChaCha8Rng) -> ParseTree {
    let mut root = NodeBuilder::new(TreeBundle::new().with(Feature::Cat, "S"));
    for i in 0..rng.gen_range(2..5) {
        let cat = *CATS.choose(rng).unwrap();
        let mut phrase = NodeBuilder::new(TreeBundle::new().with(Feature::Cat, cat).with(Feature::Number, "s"));
        for j in 0..rng.gen_range(1..3) {
            let w = format!("w{i}{j}");
            phrase.children.push(NodeBuilder::word("NC", &w, &w));
        }
        root.children.push(phrase);
    }
    ParseTree::from_builder(root).unwrap()
}

fn random_pattern(rng: &mut ChaCha8Rng) -> Pattern {
    let mut root = PatternNodeBuilder::default();
    for i in 0..rng.gen_range(1..6) {
        let cat = ValueExpr::atom(*CATS.choose(rng).unwrap());
        root.children.push(
            PatternNodeBuilder::new(PatternBundle::new().with(Feature::Cat, cat))
                .role(format!("r{i}"))
                .optional(rng.gen_bool(0.5)),
        );
    }
    Pattern::from_builder("random", "v", root).unwrap()
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut agree, mut same_mapping) = (0, 0);
    let n = 200;
    for _ in 0..n {
        let tree = random_tree(&mut rng);
        let pattern = random_pattern(&mut rng);
        let delete_optional = rng.gen_range(0..4);
        let config = MatcherConfig {
            costs: CostTable {
                relabel_per_feature: rng.gen_range(0..4),
                delete_optional,
                delete_mandatory: delete_optional + rng.gen_range(0..4),
                insert_leaf: rng.gen_range(0..3),
                insert_internal: rng.gen_range(0..4),
                move_per_displacement: rng.gen_range(0..4),
            },
            ..MatcherConfig::default()
        };
        let fast = match_pattern(&pattern, &tree, &config);
        let slow = brute_force(&pattern, &tree, &config).expect("small instance");
        agree += usize::from(fast.cost == slow.cost);
        same_mapping += usize::from(fast.mapping == slow.mapping);
    }
    println!("{agree}/{n} equal costs, {same_mapping}/{n} identical mappings");
}
