//! Message covers: node sets that intersect every path of a message set.
//!
//! The receiving node is never a cover candidate, since `{destination}` would
//! trivially cover everything. A zero-hop path (a node's own value) can only
//! be covered by its source.

use crate::graph::{NodeId, NodeSet, Path};

/// A minimum message cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverResult {
    pub cover: NodeSet,
    pub cardinality: usize,
}

/// Nodes of `path` that may cover it when received at `dest`.
pub fn cover_candidates(path: &Path, dest: NodeId) -> NodeSet {
    let nodes = path.node_set().without(dest);
    if nodes.is_empty() {
        NodeSet::singleton(path.source())
    } else {
        nodes
    }
}

pub fn is_cover<'a>(
    cover: NodeSet,
    paths: impl IntoIterator<Item = &'a Path>,
    dest: NodeId,
) -> bool {
    paths
        .into_iter()
        .all(|p| !cover_candidates(p, dest).is_disjoint(cover))
}

/// Exact minimum message cover.
pub fn minimum_message_cover<'a>(
    paths: impl IntoIterator<Item = &'a Path>,
    dest: NodeId,
) -> CoverResult {
    bounded_message_cover(paths, dest, usize::MAX)
        .expect("an unbounded search always finds a cover")
}

/// Minimum message cover if its cardinality is at most `limit`, else `None`.
pub fn bounded_message_cover<'a>(
    paths: impl IntoIterator<Item = &'a Path>,
    dest: NodeId,
    limit: usize,
) -> Option<CoverResult> {
    let masks: Vec<u64> = paths
        .into_iter()
        .map(|p| cover_candidates(p, dest).bits())
        .collect();
    min_hitting_set(masks, limit).map(|cover| CoverResult {
        cover,
        cardinality: cover.len(),
    })
}

/// Smallest set hitting every mask, searched by increasing size up to `limit`.
pub(crate) fn min_hitting_set(mut masks: Vec<u64>, limit: usize) -> Option<NodeSet> {
    masks.sort_unstable_by_key(|m| (m.count_ones(), *m));
    masks.dedup();
    // a set hitting every minimal mask hits its supersets too
    let all = masks.clone();
    masks.retain(|&m| !all.iter().any(|&o| o != m && o & m == o));
    if masks.is_empty() {
        return Some(NodeSet::EMPTY);
    }
    // sources alone always cover, and each mask contributes at most one
    let upper = masks.len().min(limit);
    for size in disjoint_lower_bound(&masks, 0)..=upper {
        let mut chosen = 0u64;
        if hit(&masks, size, &mut chosen) {
            return Some(NodeSet::from_bits(chosen));
        }
    }
    None
}

/// Greedy count of pairwise disjoint masks not yet hit; each needs its own node.
fn disjoint_lower_bound(masks: &[u64], chosen: u64) -> usize {
    let mut used = 0u64;
    let mut count = 0;
    for &m in masks {
        if m & chosen == 0 && m & used == 0 {
            used |= m;
            count += 1;
        }
    }
    count
}

fn hit(masks: &[u64], budget: usize, chosen: &mut u64) -> bool {
    // branch on the unhit mask with the fewest candidates
    let Some(&pivot) = masks
        .iter()
        .filter(|&&m| m & *chosen == 0)
        .min_by_key(|m| m.count_ones())
    else {
        return true;
    };
    if budget == 0 || disjoint_lower_bound(masks, *chosen) > budget {
        return false;
    }
    let mut rest = pivot;
    while rest != 0 {
        let bit = rest & rest.wrapping_neg();
        rest &= rest - 1;
        *chosen |= bit;
        if hit(masks, budget - 1, chosen) {
            return true;
        }
        *chosen &= !bit;
    }
    false
}
