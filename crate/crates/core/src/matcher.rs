//! Approximate tree pattern matching.
//!
//! A [`Mapping`] assigns pattern nodes to parse-tree nodes. Every valid
//! mapping induces an [`EditScript`] (relabels, deletions, insertions and
//! sibling moves) and the similarity of a pattern to a tree is the cost of
//! the cheapest such script. [`match_pattern`] finds it by branch and
//! bound; [`crate::oracle::brute_force`] finds it by enumeration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::fs::{self, unify_node, Bindings, Feature, UnifyConfig, UnifyOutcome};
use crate::pattern::{Pattern, PatternNodeId};
use crate::tree::{NodeId, ParseTree};

/// Non-negative integer cost of each edit operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CostTable {
    pub relabel_per_feature: u64,
    pub delete_optional: u64,
    pub delete_mandatory: u64,
    pub insert_leaf: u64,
    pub insert_internal: u64,
    pub move_per_displacement: u64,
}

impl Default for CostTable {
    fn default() -> Self {
        CostTable {
            relabel_per_feature: 1,
            delete_optional: 1,
            delete_mandatory: 5,
            insert_leaf: 0,
            insert_internal: 1,
            move_per_displacement: 1,
        }
    }
}

impl CostTable {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.delete_mandatory < self.delete_optional {
            return Err(ConfigError::Invalid(format!(
                "delete_mandatory ({}) is below delete_optional ({})",
                self.delete_mandatory, self.delete_optional
            )));
        }
        Ok(())
    }

    /// Every entry multiplied by `k`.
    pub fn scaled(&self, k: u64) -> Self {
        CostTable {
            relabel_per_feature: self.relabel_per_feature * k,
            delete_optional: self.delete_optional * k,
            delete_mandatory: self.delete_mandatory * k,
            insert_leaf: self.insert_leaf * k,
            insert_internal: self.insert_internal * k,
            move_per_displacement: self.move_per_displacement * k,
        }
    }

    pub fn delete(&self, optional: bool) -> u64 {
        if optional {
            self.delete_optional
        } else {
            self.delete_mandatory
        }
    }

    pub fn insert(&self, leaf: bool) -> u64 {
        if leaf {
            self.insert_leaf
        } else {
            self.insert_internal
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatcherConfig {
    pub costs: CostTable,
    /// Categories a mapping may not reach inside of.
    pub barrier_categories: BTreeSet<String>,
    pub unify: UnifyConfig,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        MatcherConfig {
            costs: CostTable::default(),
            barrier_categories: ["sn", "sp", "prop"].into_iter().map(String::from).collect(),
            unify: UnifyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl MatcherConfig {
    /// Reads `key=value` lines; keys not given keep their defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = MatcherConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let err = |message: String| ConfigError::Parse { line, message };
            let (key, value) = l
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected key=value, found `{l}`")))?;
            let num = || {
                value
                    .parse::<u64>()
                    .map_err(|_| err(format!("`{key}` needs a non-negative integer, found `{value}`")))
            };
            let c = &mut cfg.costs;
            match key {
                "relabel_per_feature" => c.relabel_per_feature = num()?,
                "delete_optional" => c.delete_optional = num()?,
                "delete_mandatory" => c.delete_mandatory = num()?,
                "insert_leaf" => c.insert_leaf = num()?,
                "insert_internal" => c.insert_internal = num()?,
                "move_per_displacement" => c.move_per_displacement = num()?,
                "barriers" => {
                    cfg.barrier_categories = value
                        .split('|')
                        .filter(|s| !s.is_empty())
                        .map(String::from)
                        .collect()
                }
                "relabelable" => {
                    cfg.unify.relabelable =
                        fs::parse_feature_set(value).map_err(|e| err(e.to_string()))?
                }
                "agreement" => {
                    cfg.unify.agreement_features = fs::parse_feature_set(value)
                        .map_err(|e| err(e.to_string()))?
                        .into_iter()
                        .collect()
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        cfg.costs.validate()?;
        Ok(cfg)
    }

    pub fn encode(&self) -> String {
        let c = &self.costs;
        let agreement: BTreeSet<Feature> = self.unify.agreement_features.iter().copied().collect();
        format!(
            "relabel_per_feature={}\ndelete_optional={}\ndelete_mandatory={}\ninsert_leaf={}\ninsert_internal={}\nmove_per_displacement={}\nbarriers={}\nrelabelable={}\nagreement={}\n",
            c.relabel_per_feature,
            c.delete_optional,
            c.delete_mandatory,
            c.insert_leaf,
            c.insert_internal,
            c.move_per_displacement,
            self.barrier_categories.iter().cloned().collect::<Vec<_>>().join("|"),
            fs::format_feature_set(&self.unify.relabelable),
            fs::format_feature_set(&agreement),
        )
    }
}

/// Partial injective assignment of pattern nodes to tree nodes, indexed by
/// pattern node id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mapping {
    pub pairs: Vec<Option<NodeId>>,
    pub bindings: Bindings,
}

impl Mapping {
    pub fn image(&self, node: PatternNodeId) -> Option<NodeId> {
        self.pairs[node]
    }

    pub fn mapped_count(&self) -> usize {
        self.pairs.iter().flatten().count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EditOp {
    Relabel {
        node: PatternNodeId,
        feature: Feature,
        value: String,
    },
    DeleteCut {
        node: PatternNodeId,
        optional: bool,
    },
    DeletePrune {
        node: PatternNodeId,
        optional: bool,
    },
    Insert {
        tree_node: NodeId,
        leaf: bool,
    },
    /// `from_rank`/`to_rank` are positions among the node's mapped
    /// siblings; `displacement` is the number of sibling inversions the
    /// move repairs.
    Move {
        node: PatternNodeId,
        from_rank: usize,
        to_rank: usize,
        displacement: u64,
    },
}

impl EditOp {
    pub fn cost(&self, costs: &CostTable) -> u64 {
        match self {
            EditOp::Relabel { .. } => costs.relabel_per_feature,
            EditOp::DeleteCut { optional, .. } | EditOp::DeletePrune { optional, .. } => {
                costs.delete(*optional)
            }
            EditOp::Insert { leaf, .. } => costs.insert(*leaf),
            EditOp::Move { displacement, .. } => costs.move_per_displacement * displacement,
        }
    }

    pub fn is_delete(&self) -> bool {
        matches!(self, EditOp::DeleteCut { .. } | EditOp::DeletePrune { .. })
    }

    /// One-line rendering, naming pattern nodes by role.
    pub fn render(&self, pattern: &Pattern) -> String {
        match self {
            EditOp::Relabel { node, feature, value } => {
                format!("relabel {} {} {}", pattern.label(*node), feature, value)
            }
            EditOp::DeleteCut { node, .. } => format!("delete-cut {}", pattern.label(*node)),
            EditOp::DeletePrune { node, .. } => format!("delete-prune {}", pattern.label(*node)),
            EditOp::Insert { tree_node, leaf } => {
                format!("insert {} {}", tree_node, if *leaf { "leaf" } else { "internal" })
            }
            EditOp::Move {
                node,
                from_rank,
                to_rank,
                displacement,
            } => format!(
                "move {} {} {} {}",
                pattern.label(*node),
                from_rank,
                to_rank,
                displacement
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct EditScript {
    pub ops: Vec<EditOp>,
    pub total_cost: u64,
}

impl EditScript {
    fn from_ops(ops: Vec<EditOp>, costs: &CostTable) -> Self {
        let total_cost = ops.iter().map(|op| op.cost(costs)).sum();
        EditScript { ops, total_cost }
    }

    pub fn count(&self, pred: impl Fn(&EditOp) -> bool) -> usize {
        self.ops.iter().filter(|op| pred(op)).count()
    }

    pub fn relabels(&self) -> usize {
        self.count(|op| matches!(op, EditOp::Relabel { .. }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleFiller {
    pub node: NodeId,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    pub model_id: String,
    pub mapping: Mapping,
    pub script: EditScript,
    pub cost: u64,
    /// Role fillers in pattern order.
    pub role_fillers: Vec<(String, RoleFiller)>,
    pub unassigned_roles: BTreeSet<String>,
    /// Rendered edit operations.
    pub script_lines: Vec<String>,
}

impl MatchResult {
    pub fn filler(&self, role: &str) -> Option<&RoleFiller> {
        self.role_fillers.iter().find(|(r, _)| r == role).map(|(_, f)| f)
    }

    pub fn key(&self) -> MatchKey {
        MatchKey::new(&self.mapping.pairs, &self.script)
    }

    /// `model=`, one tab-separated `role` line per filler, `cost=`, then the
    /// edit script one operation per line.
    pub fn serialize(&self) -> String {
        let mut out = format!("model={}\n", self.model_id);
        for (role, f) in &self.role_fillers {
            let _ = writeln!(out, "role {}\t{}", role, f.text);
        }
        let _ = writeln!(out, "cost={}", self.cost);
        for line in &self.script_lines {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for MatchResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

/// Total order used to pick among mappings: cost, then fewer deleted
/// pattern nodes, then fewer relabels, then earliest images in pattern
/// order (unmapped sorts last).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MatchKey {
    pub cost: u64,
    pub deletes: usize,
    pub relabels: usize,
    pub positions: Vec<usize>,
}

impl MatchKey {
    pub fn new(pairs: &[Option<NodeId>], script: &EditScript) -> Self {
        MatchKey {
            cost: script.total_cost,
            deletes: pairs.iter().filter(|p| p.is_none()).count(),
            relabels: script.relabels(),
            positions: pairs.iter().map(|p| p.unwrap_or(usize::MAX)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("invalid mapping: {0}")]
    InvalidMapping(String),
    #[error("no patterns to rank")]
    NoPatterns,
}

fn nearest_mapped_ancestor(
    pattern: &Pattern,
    pairs: &[Option<NodeId>],
    node: PatternNodeId,
) -> Option<PatternNodeId> {
    let mut cur = pattern.node(node).parent;
    while let Some(p) = cur {
        if pairs[p].is_some() {
            return Some(p);
        }
        cur = pattern.node(p).parent;
    }
    None
}

/// The structural criterion for one pair: no barrier category strictly
/// between the image of the nearest mapped pattern ancestor and `image`.
fn structurally_reachable(
    tree: &ParseTree,
    upper: Option<NodeId>,
    image: NodeId,
    barriers: &BTreeSet<String>,
) -> bool {
    barriers.is_empty()
        || tree
            .between(upper, image)
            .into_iter()
            .all(|n| tree.node(n).bundle.cat().is_none_or(|c| !barriers.contains(c)))
}

fn ancestor_consistent(
    pattern: &Pattern,
    tree: &ParseTree,
    (p1, t1): (PatternNodeId, NodeId),
    (p2, t2): (PatternNodeId, NodeId),
) -> bool {
    pattern.is_ancestor(p1, p2) == tree.is_ancestor(t1, t2)
        && pattern.is_ancestor(p2, p1) == tree.is_ancestor(t2, t1)
}

/// Whether mapping `p` to `t` agrees on ancestry with every mapped pattern
/// node before `p`.
pub(crate) fn ancestor_ok(
    pattern: &Pattern,
    tree: &ParseTree,
    pairs: &[Option<NodeId>],
    p: PatternNodeId,
    t: NodeId,
) -> bool {
    (0..p).all(|q| pairs[q].is_none_or(|u| ancestor_consistent(pattern, tree, (q, u), (p, t))))
}

/// Checks every mapping invariant and returns the per-node unification
/// outcomes (threaded in pattern preorder) with the final bindings.
pub fn check_mapping(
    pattern: &Pattern,
    tree: &ParseTree,
    pairs: &[Option<NodeId>],
    config: &MatcherConfig,
) -> Result<(Vec<Option<UnifyOutcome>>, Bindings), MatchError> {
    let bad = |m: String| Err(MatchError::InvalidMapping(m));
    if pairs.len() != pattern.len() {
        return bad(format!("{} pairs for {} pattern nodes", pairs.len(), pattern.len()));
    }
    if pairs[0].is_some_and(|t| t != 0) {
        return bad("the pattern root may only map to the tree root".into());
    }
    let mapped: Vec<(PatternNodeId, NodeId)> =
        pairs.iter().enumerate().filter_map(|(p, t)| t.map(|t| (p, t))).collect();
    for (i, &(p1, t1)) in mapped.iter().enumerate() {
        if t1 >= tree.len() {
            return bad(format!("tree node {t1} does not exist"));
        }
        for &(p2, t2) in &mapped[i + 1..] {
            if t1 == t2 {
                return bad(format!("tree node {t1} is the image of two pattern nodes"));
            }
            if !ancestor_consistent(pattern, tree, (p1, t1), (p2, t2)) {
                return bad(format!(
                    "{} and {} break the ancestor criterion",
                    pattern.label(p1),
                    pattern.label(p2)
                ));
            }
        }
    }
    for &(p, t) in &mapped {
        let upper = nearest_mapped_ancestor(pattern, pairs, p).and_then(|a| pairs[a]);
        if !structurally_reachable(tree, upper, t, &config.barrier_categories) {
            return bad(format!(
                "{} reaches tree node {t} across a barrier",
                pattern.label(p)
            ));
        }
    }
    let mut env = Bindings::new();
    let mut outcomes = vec![None; pattern.len()];
    for &(p, t) in &mapped {
        let out = unify_node(&pattern.node(p).bundle, &tree.node(t).bundle, &env, &config.unify);
        match out.bindings() {
            Some(b) => env = b.clone(),
            None => {
                return bad(format!(
                    "{} does not unify with tree node {t}",
                    pattern.label(p)
                ))
            }
        }
        outcomes[p] = Some(out);
    }
    Ok((outcomes, env))
}

/// Move operations: mapped nodes sharing a nearest mapped pattern ancestor
/// and whose images share a tree parent are compared in pattern order and
/// tree order. The nodes outside the longest order-preserving run (keeping
/// earlier pattern nodes in place) move; together they account for every
/// sibling inversion.
fn move_ops(pattern: &Pattern, tree: &ParseTree, pairs: &[Option<NodeId>]) -> Vec<EditOp> {
    let mut groups: BTreeMap<(Option<PatternNodeId>, Option<NodeId>), Vec<PatternNodeId>> =
        BTreeMap::new();
    for (p, t) in pairs.iter().enumerate() {
        if let Some(t) = t {
            let key = (nearest_mapped_ancestor(pattern, pairs, p), tree.node(*t).parent);
            groups.entry(key).or_default().push(p);
        }
    }
    let mut ops = Vec::new();
    for members in groups.values().filter(|m| m.len() > 1) {
        // members are in pattern order; seq[k] = pattern rank of the k-th image
        let mut by_tree: Vec<usize> = (0..members.len()).collect();
        by_tree.sort_by_key(|&r| pairs[members[r]]);
        let seq = by_tree;
        let keep = smallest_lis(&seq);
        let n = seq.len();
        let mut displacement = vec![0u64; n];
        for i in 0..n {
            for j in i + 1..n {
                if seq[i] > seq[j] {
                    let owner = match (keep[i], keep[j]) {
                        (false, true) => i,
                        (true, false) => j,
                        _ => if seq[i] > seq[j] { i } else { j },
                    };
                    displacement[owner] += 1;
                }
            }
        }
        for (tree_rank, &rank) in seq.iter().enumerate() {
            if !keep[tree_rank] {
                ops.push(EditOp::Move {
                    node: members[rank],
                    from_rank: rank,
                    to_rank: tree_rank,
                    displacement: displacement[tree_rank],
                });
            }
        }
    }
    ops.sort_by_key(|op| match op {
        EditOp::Move { node, .. } => *node,
        _ => unreachable!(),
    });
    ops
}

/// Marks the lexicographically smallest longest increasing subsequence.
fn smallest_lis(seq: &[usize]) -> Vec<bool> {
    let n = seq.len();
    // len_from[i] = length of the longest increasing run starting at i
    let mut len_from = vec![1usize; n];
    for i in (0..n).rev() {
        for j in i + 1..n {
            if seq[j] > seq[i] {
                len_from[i] = len_from[i].max(len_from[j] + 1);
            }
        }
    }
    let mut keep = vec![false; n];
    let mut need = len_from.iter().copied().max().unwrap_or(0);
    let mut last: Option<usize> = None;
    let mut start = 0;
    while need > 0 {
        let pick = (start..n)
            .filter(|&j| len_from[j] == need && last.is_none_or(|l| seq[j] > seq[l]))
            .min_by_key(|&j| seq[j])
            .expect("an increasing run of the required length exists");
        keep[pick] = true;
        last = Some(pick);
        start = pick + 1;
        need -= 1;
    }
    keep
}

fn delete_ops(pattern: &Pattern, pairs: &[Option<NodeId>], costs: &CostTable) -> Vec<EditOp> {
    let n = pattern.len();
    let mut all_unmapped = vec![false; n];
    // cheapest way to delete a fully unmapped subtree, and cutting it node by node
    let mut best = vec![0u64; n];
    let mut cut = vec![0u64; n];
    for p in (0..n).rev() {
        let node = pattern.node(p);
        all_unmapped[p] = pairs[p].is_none() && node.children.iter().all(|&c| all_unmapped[c]);
        if all_unmapped[p] {
            let own = costs.delete(node.optional);
            cut[p] = own + node.children.iter().map(|&c| best[c]).sum::<u64>();
            best[p] = if node.children.is_empty() { own } else { own.min(cut[p]) };
        }
    }
    let mut ops = Vec::new();
    let mut p = 0;
    while p < n {
        let node = pattern.node(p);
        if pairs[p].is_some() {
            p += 1;
            continue;
        }
        if all_unmapped[p] && !node.children.is_empty() && costs.delete(node.optional) < cut[p] {
            ops.push(EditOp::DeletePrune {
                node: p,
                optional: node.optional,
            });
            p = pattern.subtree(p).end;
        } else {
            ops.push(EditOp::DeleteCut {
                node: p,
                optional: node.optional,
            });
            p += 1;
        }
    }
    ops
}

fn build_script(
    pattern: &Pattern,
    tree: &ParseTree,
    pairs: &[Option<NodeId>],
    outcomes: &[Option<UnifyOutcome>],
    costs: &CostTable,
) -> EditScript {
    let mut ops = Vec::new();
    for (p, out) in outcomes.iter().enumerate() {
        if let (Some(UnifyOutcome::NeedsRelabel(features, _)), Some(t)) = (out, pairs[p]) {
            for f in features {
                ops.push(EditOp::Relabel {
                    node: p,
                    feature: *f,
                    value: tree.node(t).bundle.display_value(*f),
                });
            }
        }
    }
    ops.extend(delete_ops(pattern, pairs, costs));
    let mut used = vec![false; tree.len()];
    for t in pairs.iter().flatten() {
        used[*t] = true;
    }
    for node in tree.nodes() {
        if !used[node.id] {
            ops.push(EditOp::Insert {
                tree_node: node.id,
                leaf: node.is_leaf(),
            });
        }
    }
    ops.extend(move_ops(pattern, tree, pairs));
    EditScript::from_ops(ops, costs)
}

/// Derives the edit script induced by a mapping.
pub fn derive_script(
    pattern: &Pattern,
    tree: &ParseTree,
    pairs: &[Option<NodeId>],
    config: &MatcherConfig,
) -> Result<EditScript, MatchError> {
    let (outcomes, _) = check_mapping(pattern, tree, pairs, config)?;
    Ok(build_script(pattern, tree, pairs, &outcomes, &config.costs))
}

/// Assembles a full result for an already validated mapping.
pub fn assemble_result(
    pattern: &Pattern,
    tree: &ParseTree,
    pairs: Vec<Option<NodeId>>,
    config: &MatcherConfig,
) -> Result<MatchResult, MatchError> {
    let (outcomes, bindings) = check_mapping(pattern, tree, &pairs, config)?;
    let script = build_script(pattern, tree, &pairs, &outcomes, &config.costs);
    let mut role_fillers = Vec::new();
    let mut unassigned_roles = BTreeSet::new();
    for (p, node) in pattern.roles() {
        let role = node.role.clone().unwrap();
        match pairs[p] {
            Some(t) => role_fillers.push((
                role,
                RoleFiller {
                    node: t,
                    text: tree.surface_span(t),
                },
            )),
            None => {
                unassigned_roles.insert(role);
            }
        }
    }
    let script_lines = script.ops.iter().map(|op| op.render(pattern)).collect();
    Ok(MatchResult {
        model_id: pattern.model_id.clone(),
        cost: script.total_cost,
        mapping: Mapping { pairs, bindings },
        script,
        role_fillers,
        unassigned_roles,
        script_lines,
    })
}

/// Tree nodes each pattern node could ever map to, ignoring bindings. The
/// pattern root only maps to the tree root.
pub(crate) fn static_candidates(
    pattern: &Pattern,
    tree: &ParseTree,
    config: &MatcherConfig,
) -> Vec<Vec<NodeId>> {
    let empty = Bindings::new();
    pattern
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            tree.nodes()
                .iter()
                .filter(|t| i != 0 || t.id == 0)
                .filter(|t| !unify_node(&p.bundle, &t.bundle, &empty, &config.unify).is_fail())
                .map(|t| t.id)
                .collect()
        })
        .collect()
}

struct Search<'a> {
    pattern: &'a Pattern,
    tree: &'a ParseTree,
    config: &'a MatcherConfig,
    candidates: Vec<Vec<NodeId>>,
    pairs: Vec<Option<NodeId>>,
    outcomes: Vec<Option<UnifyOutcome>>,
    used: Vec<bool>,
    best: Option<(MatchKey, Vec<Option<NodeId>>)>,
}

impl Search<'_> {
    /// Admissible bound on the final cost given nodes `0..next` assigned.
    fn lower_bound(&self, next: usize, relabel_cost: u64, delete_cost: u64) -> u64 {
        let costs = &self.config.costs;
        // nodes from `next` on are unassigned, so these inversions only grow
        let moves: u64 = move_ops(self.pattern, self.tree, &self.pairs)
            .iter()
            .map(|op| op.cost(costs))
            .sum();
        let remaining = self.pattern.len() - next;
        let (mut leaves, mut internals) = (0usize, 0usize);
        for node in self.tree.nodes() {
            if !self.used[node.id] {
                if node.is_leaf() {
                    leaves += 1;
                } else {
                    internals += 1;
                }
            }
        }
        // the remaining pattern nodes can absorb at most `remaining` inserts
        let (hi_cost, hi_n, lo_cost, lo_n) = if costs.insert_internal >= costs.insert_leaf {
            (costs.insert_internal, internals, costs.insert_leaf, leaves)
        } else {
            (costs.insert_leaf, leaves, costs.insert_internal, internals)
        };
        let absorbed_hi = remaining.min(hi_n);
        let absorbed_lo = (remaining - absorbed_hi).min(lo_n);
        let inserts = hi_cost * (hi_n - absorbed_hi) as u64 + lo_cost * (lo_n - absorbed_lo) as u64;
        relabel_cost + delete_cost + moves + inserts
    }

    fn admissible(&self, p: PatternNodeId, t: NodeId) -> bool {
        if self.used[t] || !ancestor_ok(self.pattern, self.tree, &self.pairs, p, t) {
            return false;
        }
        let upper = nearest_mapped_ancestor(self.pattern, &self.pairs, p).and_then(|a| self.pairs[a]);
        structurally_reachable(self.tree, upper, t, &self.config.barrier_categories)
    }

    fn run(&mut self, next: usize, env: &Bindings, relabel_cost: u64, delete_cost: u64) {
        if let Some((best, _)) = &self.best {
            if self.lower_bound(next, relabel_cost, delete_cost) > best.cost {
                return;
            }
        }
        if next == self.pattern.len() {
            let script = build_script(
                self.pattern,
                self.tree,
                &self.pairs,
                &self.outcomes,
                &self.config.costs,
            );
            let key = MatchKey::new(&self.pairs, &script);
            if self.best.as_ref().is_none_or(|(b, _)| key < *b) {
                self.best = Some((key, self.pairs.clone()));
            }
            return;
        }
        let p = next;
        let node = self.pattern.node(p);
        for i in 0..self.candidates[p].len() {
            let t = self.candidates[p][i];
            if !self.admissible(p, t) {
                continue;
            }
            let out = unify_node(&node.bundle, &self.tree.node(t).bundle, env, &self.config.unify);
            let Some(next_env) = out.bindings().cloned() else {
                continue;
            };
            let relabels = out.relabels() as u64 * self.config.costs.relabel_per_feature;
            self.pairs[p] = Some(t);
            self.used[t] = true;
            self.outcomes[p] = Some(out);
            self.run(next + 1, &next_env, relabel_cost + relabels, delete_cost);
            self.pairs[p] = None;
            self.used[t] = false;
            self.outcomes[p] = None;
        }
        // a deleted node whose parent survives costs at least its own delete
        let parent_mapped = node.parent.is_none_or(|q| self.pairs[q].is_some());
        let own = if parent_mapped {
            self.config.costs.delete(node.optional)
        } else {
            0
        };
        self.run(next + 1, env, relabel_cost, delete_cost + own);
    }
}

/// Finds the minimum-cost valid mapping of `pattern` onto `tree`.
pub fn match_pattern(pattern: &Pattern, tree: &ParseTree, config: &MatcherConfig) -> MatchResult {
    let mut search = Search {
        pattern,
        tree,
        config,
        candidates: static_candidates(pattern, tree, config),
        pairs: vec![None; pattern.len()],
        outcomes: vec![None; pattern.len()],
        used: vec![false; tree.len()],
        best: None,
    };
    search.run(0, &Bindings::new(), 0, 0);
    let (_, pairs) = search.best.expect("the all-delete mapping is always valid");
    assemble_result(pattern, tree, pairs, config).expect("search only builds valid mappings")
}

/// Matches every pattern and orders the results best first; the model id
/// breaks remaining ties.
pub fn rank_patterns(
    patterns: &[Pattern],
    tree: &ParseTree,
    config: &MatcherConfig,
) -> Result<Vec<MatchResult>, MatchError> {
    if patterns.is_empty() {
        return Err(MatchError::NoPatterns);
    }
    let mut results: Vec<(MatchKey, MatchResult)> = patterns
        .iter()
        .map(|p| {
            let r = match_pattern(p, tree, config);
            (r.key(), r)
        })
        .collect();
    results.sort_by(|(ka, a), (kb, b)| ka.cmp(kb).then_with(|| a.model_id.cmp(&b.model_id)));
    Ok(results.into_iter().map(|(_, r)| r).collect())
}

/// Role name to surface filler for every mapped role.
pub fn extract_roles(result: &MatchResult) -> BTreeMap<String, String> {
    result
        .role_fillers
        .iter()
        .map(|(r, f)| (r.clone(), f.text.clone()))
        .collect()
}
