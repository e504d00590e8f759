//! Exhaustive reference matcher for small inputs.

use thiserror::Error;

use crate::matcher::{
    ancestor_ok, assemble_result, derive_script, static_candidates, MatchKey, MatchResult,
    MatcherConfig,
};
use crate::pattern::Pattern;
use crate::tree::{NodeId, ParseTree};

pub const MAX_ROLES: usize = 8;
pub const MAX_TREE_NODES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("input too large for exhaustive search: {roles} roles (max {MAX_ROLES}), {tree_nodes} tree nodes (max {MAX_TREE_NODES})")]
    TooLarge { roles: usize, tree_nodes: usize },
}

/// Enumerates every injective partial mapping, keeps the valid ones and
/// returns the minimum under the same total order the matcher uses.
pub fn brute_force(
    pattern: &Pattern,
    tree: &ParseTree,
    config: &MatcherConfig,
) -> Result<MatchResult, OracleError> {
    if pattern.role_count() > MAX_ROLES || tree.len() > MAX_TREE_NODES {
        return Err(OracleError::TooLarge {
            roles: pattern.role_count(),
            tree_nodes: tree.len(),
        });
    }
    let candidates = static_candidates(pattern, tree, config);
    let mut pairs = vec![None; pattern.len()];
    let mut used = vec![false; tree.len()];
    let mut best: Option<(MatchKey, Vec<Option<NodeId>>)> = None;
    enumerate(pattern, tree, config, &candidates, 0, &mut pairs, &mut used, &mut best);
    let (_, pairs) = best.expect("the all-delete mapping is always valid");
    Ok(assemble_result(pattern, tree, pairs, config).expect("the oracle keeps only valid mappings"))
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    pattern: &Pattern,
    tree: &ParseTree,
    config: &MatcherConfig,
    candidates: &[Vec<NodeId>],
    next: usize,
    pairs: &mut Vec<Option<NodeId>>,
    used: &mut Vec<bool>,
    best: &mut Option<(MatchKey, Vec<Option<NodeId>>)>,
) {
    if next == pattern.len() {
        if let Ok(script) = derive_script(pattern, tree, pairs, config) {
            let key = MatchKey::new(pairs, &script);
            if best.as_ref().is_none_or(|(b, _)| key < *b) {
                *best = Some((key, pairs.clone()));
            }
        }
        return;
    }
    for &t in &candidates[next] {
        if used[t] || !ancestor_ok(pattern, tree, pairs, next, t) {
            continue;
        }
        pairs[next] = Some(t);
        used[t] = true;
        enumerate(pattern, tree, config, candidates, next + 1, pairs, used, best);
        pairs[next] = None;
        used[t] = false;
    }
    enumerate(pattern, tree, config, candidates, next + 1, pairs, used, best);
}
