//! Exact checkers for (r,s)-robustness and r-strict robustness with l hops.
//!
//! A node `i` of a candidate set `Va` counts toward `X(Va)` when it has at
//! least `r` independent paths of at most `l` hops from sources outside `Va`:
//! the paths share only `i`, start at distinct sources, and never pass through
//! the fault set `F` as an intermediate node (sources in `F` are allowed).
//!
//! Checks enumerate every pair of disjoint nonempty node sets per fault set.
//! For each fault set the membership mask `X(S)` is tabulated once for every
//! subset `S`, after which each pair costs a couple of table lookups.

use std::collections::HashMap;
use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{DirectedGraph, NodeId, NodeSet};

/// Largest graph the exhaustive pair enumeration accepts.
pub const EXHAUSTIVE_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RobustnessError {
    #[error("exhaustive robustness check supports at most {EXHAUSTIVE_LIMIT} nodes (graph has {0}); use sampling")]
    TooLarge(usize),
    #[error("robustness parameters must be positive (r = {r}, s = {s})")]
    BadParameters { r: usize, s: usize },
    #[error("hop count must be at least 1")]
    ZeroHops,
}

/// Admissible adversary placements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultModel {
    /// At most `f` adversaries in total.
    Total { f: usize },
    /// At most `f` adversaries within the `l`-hop in-neighborhood of every
    /// normal node.
    Local { f: usize, l: usize },
}

impl FaultModel {
    pub fn total(f: usize) -> Self {
        FaultModel::Total { f }
    }

    pub fn local(f: usize, l: usize) -> Self {
        FaultModel::Local { f, l }
    }

    pub fn f(&self) -> usize {
        match *self {
            FaultModel::Total { f } | FaultModel::Local { f, .. } => f,
        }
    }

    /// Whether `set` is an admissible adversary set in `g`.
    pub fn admits(&self, g: &DirectedGraph, set: NodeSet) -> bool {
        match *self {
            FaultModel::Total { f } => set.len() <= f,
            FaultModel::Local { f, l } => g
                .nodes()
                .difference(set)
                .iter()
                .all(|i| g.in_neighbors_l(i, l).intersection(set).len() <= f),
        }
    }
}

impl fmt::Display for FaultModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FaultModel::Total { f: k } => write!(f, "{k}-total"),
            FaultModel::Local { f: k, l } => write!(f, "{k}-local(l={l})"),
        }
    }
}

/// A pair of candidate sets and the fault set under which the pair violates
/// the robustness condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Witness {
    pub v1: NodeSet,
    pub v2: NodeSet,
    pub fault: NodeSet,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V1={} V2={} F={}", self.v1, self.v2, self.fault)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobustnessVerdict {
    pub holds: bool,
    pub witness: Option<Witness>,
    /// Candidate pairs examined (including pairs settled in bulk).
    pub pairs_checked: u64,
    pub fault_sets_checked: usize,
    /// False when only a sample of pairs was examined.
    pub exhaustive: bool,
}

/// Pair-enumeration controls.
#[derive(Debug, Clone, Default)]
pub struct CheckOptions {
    /// Check only this many random pairs per fault set (plus `extra_pairs`)
    /// instead of every pair.
    pub sample: Option<usize>,
    pub sample_seed: u64,
    /// Pairs that are always checked in sampled mode.
    pub extra_pairs: Vec<(NodeSet, NodeSet)>,
}

impl CheckOptions {
    pub fn exhaustive() -> Self {
        Self::default()
    }

    pub fn sampled(count: usize, seed: u64) -> Self {
        CheckOptions {
            sample: Some(count),
            sample_seed: seed,
            extra_pairs: Vec::new(),
        }
    }

    pub fn with_pairs(mut self, pairs: impl IntoIterator<Item = (NodeSet, NodeSet)>) -> Self {
        self.extra_pairs.extend(pairs);
        self
    }
}

/// Candidate paths into `i`, as node masks excluding `i`. Paths whose interior
/// leaves `va` are skipped: their suffix from the first outside node is a
/// shorter valid path on a subset of the same nodes.
fn candidate_paths(
    g: &DirectedGraph,
    i: NodeId,
    va: NodeSet,
    blocked: NodeSet,
    removed: NodeSet,
    l: usize,
) -> Vec<(NodeId, u64)> {
    fn walk(
        g: &DirectedGraph,
        at: NodeId,
        last_hop: Option<NodeId>,
        visited: NodeSet,
        budget: usize,
        ctx: (NodeSet, NodeSet, NodeSet),
        out: &mut Vec<(NodeId, u64)>,
    ) {
        let (va, blocked, removed) = ctx;
        for u in g.in_adjacent(at).difference(visited).difference(removed) {
            let hop = last_hop.unwrap_or(u);
            if !va.contains(u) {
                out.push((hop, visited.with(u).bits()));
            } else if budget > 1 && !blocked.contains(u) {
                walk(g, u, Some(hop), visited.with(u), budget - 1, ctx, out);
            }
        }
    }
    let mut out = Vec::new();
    if l == 0 {
        return out;
    }
    walk(
        g,
        i,
        None,
        NodeSet::singleton(i),
        l,
        (va, blocked, removed),
        &mut out,
    );
    let own = NodeSet::singleton(i).bits();
    for p in &mut out {
        p.1 &= !own;
    }
    out
}

/// Maximum number of pairwise node-disjoint masks, grouped by the last hop
/// into `i`; stops early once `target` is reached.
fn max_packing(mut paths: Vec<(NodeId, u64)>, target: usize) -> usize {
    paths.sort_unstable_by_key(|&(hop, mask)| (hop, mask.count_ones(), mask));
    paths.dedup();
    // drop masks that strictly contain another mask
    let masks: Vec<u64> = paths.iter().map(|p| p.1).collect();
    paths.retain(|&(_, m)| !masks.iter().any(|&o| o != m && o & m == o));

    let mut groups: Vec<Vec<u64>> = Vec::new();
    let mut last = None;
    for (hop, m) in paths {
        if last != Some(hop) {
            groups.push(Vec::new());
            last = Some(hop);
        }
        groups.last_mut().unwrap().push(m);
    }
    // most constrained groups first
    groups.sort_by_key(|g| g.len());

    fn search(
        groups: &[Vec<u64>],
        idx: usize,
        used: u64,
        count: usize,
        best: &mut usize,
        target: usize,
    ) {
        if count > *best {
            *best = count;
        }
        if *best >= target || idx == groups.len() || count + (groups.len() - idx) <= *best {
            return;
        }
        for &m in &groups[idx] {
            if m & used == 0 {
                search(groups, idx + 1, used | m, count + 1, best, target);
                if *best >= target {
                    return;
                }
            }
        }
        search(groups, idx + 1, used, count, best, target);
    }
    let mut best = 0;
    search(&groups, 0, 0, 0, &mut best, target);
    best
}

fn path_count(
    g: &DirectedGraph,
    i: NodeId,
    va: NodeSet,
    blocked: NodeSet,
    removed: NodeSet,
    l: usize,
    target: usize,
) -> usize {
    max_packing(candidate_paths(g, i, va, blocked, removed, l), target)
}

/// Size of a largest family of independent paths into `i` from outside `va`
/// (`i ∈ va`) of at most `l` hops avoiding `fault` as intermediate nodes.
pub fn independent_path_count(
    g: &DirectedGraph,
    i: NodeId,
    va: NodeSet,
    fault: NodeSet,
    l: usize,
) -> usize {
    debug_assert!(va.contains(i));
    path_count(g, i, va, fault, NodeSet::EMPTY, l, usize::MAX)
}

/// Members of `va` with at least `r` independent paths.
pub fn x_set(g: &DirectedGraph, va: NodeSet, fault: NodeSet, r: usize, l: usize) -> NodeSet {
    x_set_in(g, va, fault, NodeSet::EMPTY, r, l)
}

fn x_set_in(
    g: &DirectedGraph,
    va: NodeSet,
    blocked: NodeSet,
    removed: NodeSet,
    r: usize,
    l: usize,
) -> NodeSet {
    if r == 0 {
        return va;
    }
    va.iter()
        .filter(|&i| path_count(g, i, va, blocked, removed, l, r) >= r)
        .collect()
}

/// Every fault set admissible under `model`, ordered by size then bits.
pub fn enumerate_fault_sets(g: &DirectedGraph, model: FaultModel) -> Vec<NodeSet> {
    let n = g.node_count();
    let mut out = Vec::new();
    match model {
        FaultModel::Total { f } => {
            fn choose(start: usize, n: usize, left: usize, cur: NodeSet, out: &mut Vec<NodeSet>) {
                if left == 0 {
                    out.push(cur);
                    return;
                }
                for v in start..n {
                    choose(v + 1, n, left - 1, cur.with(v), out);
                }
            }
            for size in 0..=f.min(n) {
                choose(0, n, size, NodeSet::EMPTY, &mut out);
            }
        }
        FaultModel::Local { .. } => {
            assert!(
                n <= EXHAUSTIVE_LIMIT,
                "f-local enumeration is exhaustive over subsets"
            );
            let all = g.nodes().bits();
            let mut sets: Vec<NodeSet> = (0..=all)
                .map(NodeSet::from_bits)
                .filter(|&s| model.admits(g, s))
                .collect();
            sets.sort_by_key(|s| (s.len(), s.iter().collect::<Vec<_>>()));
            out = sets;
        }
    }
    out
}

/// One (universe, blocked, removed) configuration of the pair search.
struct PairProblem<'a> {
    g: &'a DirectedGraph,
    universe: NodeSet,
    blocked: NodeSet,
    removed: NodeSet,
    r: usize,
    s: usize,
    l: usize,
}

impl PairProblem<'_> {
    fn x(&self, va: NodeSet) -> NodeSet {
        x_set_in(self.g, va, self.blocked, self.removed, self.r, self.l)
    }

    fn violates(&self, x1: NodeSet, v1: NodeSet, x2: NodeSet, v2: NodeSet) -> bool {
        x1 != v1 && x2 != v2 && x1.len() + x2.len() < self.s
    }

    /// First violating pair in enumeration order, plus the number of pairs
    /// accounted for.
    fn exhaustive(&self) -> (Option<(NodeSet, NodeSet)>, u64) {
        let u = self.universe.bits();
        let mut table = vec![0u64; (u as usize) + 1];
        let mut sub = u;
        while sub != 0 {
            table[sub as usize] = self.x(NodeSet::from_bits(sub)).bits();
            sub = (sub - 1) & u;
        }
        let mut pairs = 0u64;
        let mut v1 = u;
        while v1 != 0 {
            let rest = u & !v1;
            let x1 = table[v1 as usize];
            let rest_pairs = (1u64 << rest.count_ones()) - 1;
            if x1 == v1 || x1.count_ones() as usize >= self.s {
                pairs += rest_pairs;
            } else {
                let mut v2 = rest;
                while v2 != 0 {
                    pairs += 1;
                    let x2 = table[v2 as usize];
                    if x2 != v2 && (x1.count_ones() + x2.count_ones()) < self.s as u32 {
                        return (
                            Some((NodeSet::from_bits(v1), NodeSet::from_bits(v2))),
                            pairs,
                        );
                    }
                    v2 = (v2 - 1) & rest;
                }
            }
            v1 = (v1 - 1) & u;
        }
        (None, pairs)
    }

    fn sampled(
        &self,
        count: usize,
        seed: u64,
        extra: &[(NodeSet, NodeSet)],
    ) -> (Option<(NodeSet, NodeSet)>, u64) {
        let mut cache: HashMap<NodeSet, NodeSet> = HashMap::new();
        let mut check = |v1: NodeSet, v2: NodeSet| {
            let x1 = *cache.entry(v1).or_insert_with(|| self.x(v1));
            let x2 = *cache.entry(v2).or_insert_with(|| self.x(v2));
            self.violates(x1, v1, x2, v2)
        };
        let mut pairs = 0;
        for &(v1, v2) in extra {
            let (v1, v2) = (
                v1.intersection(self.universe),
                v2.intersection(self.universe),
            );
            if v1.is_empty() || v2.is_empty() || !v1.is_disjoint(v2) {
                continue;
            }
            pairs += 1;
            if check(v1, v2) {
                return (Some((v1, v2)), pairs);
            }
        }
        let members: Vec<NodeId> = self.universe.iter().collect();
        if members.len() < 2 {
            return (None, pairs);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed ^ self.removed.bits() ^ self.blocked.bits().rotate_left(32),
        );
        let mut drawn = 0;
        while drawn < count {
            let (mut v1, mut v2) = (NodeSet::EMPTY, NodeSet::EMPTY);
            for &v in &members {
                match rng.gen_range(0..3) {
                    0 => v1.insert(v),
                    1 => v2.insert(v),
                    _ => {}
                }
            }
            if v1.is_empty() || v2.is_empty() {
                continue;
            }
            drawn += 1;
            pairs += 1;
            if check(v1, v2) {
                return (Some((v1, v2)), pairs);
            }
        }
        (None, pairs)
    }

    fn run(&self, opts: &CheckOptions) -> (Option<(NodeSet, NodeSet)>, u64) {
        match opts.sample {
            Some(count) => self.sampled(count, opts.sample_seed, &opts.extra_pairs),
            None => self.exhaustive(),
        }
    }
}

fn validate(
    g: &DirectedGraph,
    r: usize,
    s: usize,
    l: usize,
    opts: &CheckOptions,
) -> Result<(), RobustnessError> {
    if r == 0 || s == 0 {
        return Err(RobustnessError::BadParameters { r, s });
    }
    if l == 0 {
        return Err(RobustnessError::ZeroHops);
    }
    if opts.sample.is_none() && g.node_count() > EXHAUSTIVE_LIMIT {
        return Err(RobustnessError::TooLarge(g.node_count()));
    }
    Ok(())
}

/// (r,s)-robustness with `l` hops with respect to one fault set.
pub fn is_rs_robust_wrt(
    g: &DirectedGraph,
    r: usize,
    s: usize,
    l: usize,
    fault: NodeSet,
) -> Result<RobustnessVerdict, RobustnessError> {
    is_rs_robust_wrt_with(g, r, s, l, fault, &CheckOptions::exhaustive())
}

pub fn is_rs_robust_wrt_with(
    g: &DirectedGraph,
    r: usize,
    s: usize,
    l: usize,
    fault: NodeSet,
    opts: &CheckOptions,
) -> Result<RobustnessVerdict, RobustnessError> {
    validate(g, r, s, l, opts)?;
    let problem = PairProblem {
        g,
        universe: g.nodes(),
        blocked: fault,
        removed: NodeSet::EMPTY,
        r,
        s,
        l,
    };
    let (hit, pairs) = problem.run(opts);
    Ok(RobustnessVerdict {
        holds: hit.is_none(),
        witness: hit.map(|(v1, v2)| Witness { v1, v2, fault }),
        pairs_checked: pairs,
        fault_sets_checked: 1,
        exhaustive: opts.sample.is_none(),
    })
}

/// Runs `per_fault` over every admissible fault set in parallel; the witness
/// reported is the one for the earliest fault set in enumeration order.
fn over_fault_sets<F>(
    g: &DirectedGraph,
    model: FaultModel,
    opts: &CheckOptions,
    per_fault: F,
) -> RobustnessVerdict
where
    F: Fn(NodeSet) -> (Option<(NodeSet, NodeSet)>, u64) + Sync,
{
    let faults = enumerate_fault_sets(g, model);
    let results: Vec<(Option<(NodeSet, NodeSet)>, u64)> =
        faults.par_iter().map(|&f| per_fault(f)).collect();
    let mut pairs = 0;
    for (idx, (hit, p)) in results.iter().enumerate() {
        pairs += p;
        if let Some((v1, v2)) = *hit {
            return RobustnessVerdict {
                holds: false,
                witness: Some(Witness {
                    v1,
                    v2,
                    fault: faults[idx],
                }),
                pairs_checked: pairs,
                fault_sets_checked: idx + 1,
                exhaustive: opts.sample.is_none(),
            };
        }
    }
    RobustnessVerdict {
        holds: true,
        witness: None,
        pairs_checked: pairs,
        fault_sets_checked: faults.len(),
        exhaustive: opts.sample.is_none(),
    }
}

/// (r,s)-robustness with `l` hops under a fault model.
pub fn is_rs_robust(
    g: &DirectedGraph,
    r: usize,
    s: usize,
    l: usize,
    model: FaultModel,
) -> Result<RobustnessVerdict, RobustnessError> {
    is_rs_robust_with(g, r, s, l, model, &CheckOptions::exhaustive())
}

pub fn is_rs_robust_with(
    g: &DirectedGraph,
    r: usize,
    s: usize,
    l: usize,
    model: FaultModel,
    opts: &CheckOptions,
) -> Result<RobustnessVerdict, RobustnessError> {
    validate(g, r, s, l, opts)?;
    Ok(over_fault_sets(g, model, opts, |fault| {
        PairProblem {
            g,
            universe: g.nodes(),
            blocked: fault,
            removed: NodeSet::EMPTY,
            r,
            s,
            l,
        }
        .run(opts)
    }))
}

/// r-strict robustness with `l` hops: after deleting any admissible fault set
/// the remaining graph is (r,1)-robust with `l` hops.
pub fn is_strictly_robust(
    g: &DirectedGraph,
    r: usize,
    l: usize,
    model: FaultModel,
) -> Result<RobustnessVerdict, RobustnessError> {
    is_strictly_robust_with(g, r, l, model, &CheckOptions::exhaustive())
}

pub fn is_strictly_robust_with(
    g: &DirectedGraph,
    r: usize,
    l: usize,
    model: FaultModel,
    opts: &CheckOptions,
) -> Result<RobustnessVerdict, RobustnessError> {
    validate(g, r, 1, l, opts)?;
    Ok(over_fault_sets(g, model, opts, |fault| {
        PairProblem {
            g,
            universe: g.nodes().difference(fault),
            blocked: fault,
            removed: fault,
            r,
            s: 1,
            l,
        }
        .run(opts)
    }))
}

/// Re-evaluates a witness of a failed (r,s)-robustness check. With
/// `strict`, paths may not touch the fault set at all.
pub fn witness_violates(
    g: &DirectedGraph,
    w: &Witness,
    r: usize,
    s: usize,
    l: usize,
    strict: bool,
) -> bool {
    let removed = if strict { w.fault } else { NodeSet::EMPTY };
    let problem = PairProblem {
        g,
        universe: g.nodes().difference(removed),
        blocked: w.fault,
        removed,
        r,
        s,
        l,
    };
    problem.violates(problem.x(w.v1), w.v1, problem.x(w.v2), w.v2)
}

/// Outcome of evaluating the three graph conditions of the robustness
/// hierarchy for one `(f, l)`.
#[derive(Debug, Clone)]
pub struct Lemma1Report {
    /// (2f+1)-robust with l hops.
    pub a: bool,
    /// (f+1)-strictly robust with l hops.
    pub b: bool,
    /// (f+1, f+1)-robust with l hops.
    pub c: bool,
    pub violations: Vec<String>,
    pub elapsed_ms: u128,
}

impl Lemma1Report {
    pub fn c_without_b(&self) -> bool {
        self.c && !self.b
    }
}

pub fn check_lemma1_implications(
    g: &DirectedGraph,
    f: usize,
    l: usize,
    model: FaultModel,
) -> Result<Lemma1Report, RobustnessError> {
    let start = Instant::now();
    let a = is_rs_robust(g, 2 * f + 1, 1, l, model)?.holds;
    let b = is_strictly_robust(g, f + 1, l, model)?.holds;
    let c = is_rs_robust(g, f + 1, f + 1, l, model)?.holds;
    let mut violations = Vec::new();
    if a && !b {
        violations.push(format!("(A) holds but (B) fails for f={f}, l={l}, {model}"));
    }
    if b && !c {
        violations.push(format!("(B) holds but (C) fails for f={f}, l={l}, {model}"));
    }
    Ok(Lemma1Report {
        a,
        b,
        c,
        violations,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_complete_bipartite, gen_cycle, gen_wheel};

    /// 1-based labels to 0-based node sets.
    fn p(v: &[usize]) -> NodeSet {
        v.iter().map(|&x| x - 1).collect()
    }

    #[test]
    fn cycle_worked_example() {
        let c8 = gen_cycle(8).unwrap();
        let v1 = p(&[1, 2, 3, 4, 5, 6]);
        let f = p(&[8]);
        assert!(independent_path_count(&c8, 2, v1, f, 4) >= 2);
        assert!(independent_path_count(&c8, 0, v1, f, 3) <= 1);
        assert_eq!(x_set(&c8, v1, f, 2, 4), p(&[3, 4]));
        assert_eq!(x_set(&c8, v1, f, 2, 3), NodeSet::EMPTY);
        assert_eq!(x_set(&c8, v1, f, 0, 3), v1);
        assert_eq!(
            x_set(&c8, p(&[7, 8]), f, 2, 3).intersection(p(&[7])),
            NodeSet::EMPTY
        );
        assert_eq!(
            independent_path_count(&c8, 3, c8.nodes(), NodeSet::EMPTY, 4),
            0
        );
    }

    #[test]
    fn cycle_pair_verdicts() {
        let c8 = gen_cycle(8).unwrap();
        let v = is_rs_robust_wrt(&c8, 2, 2, 3, p(&[8])).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        assert!(witness_violates(&c8, &w, 2, 2, 3, false));
        assert!(!witness_violates(
            &c8,
            &Witness {
                v1: p(&[1, 2, 3, 4, 5, 6]),
                v2: p(&[7, 8]),
                fault: p(&[8])
            },
            2,
            2,
            4,
            false
        ));
        assert!(witness_violates(
            &c8,
            &Witness {
                v1: p(&[1, 2, 3, 4, 5, 6]),
                v2: p(&[7, 8]),
                fault: p(&[8])
            },
            2,
            2,
            3,
            false
        ));
        assert!(is_rs_robust_wrt(&c8, 2, 2, 4, p(&[8])).unwrap().holds);
    }

    #[test]
    fn fault_set_counts() {
        let c8 = gen_cycle(8).unwrap();
        assert_eq!(enumerate_fault_sets(&c8, FaultModel::total(1)).len(), 9);
        assert_eq!(
            enumerate_fault_sets(&c8, FaultModel::total(0)),
            vec![NodeSet::EMPTY]
        );
        let k66 = gen_complete_bipartite(6, 6).unwrap();
        assert_eq!(enumerate_fault_sets(&k66, FaultModel::total(3)).len(), 299);
        // on C8 with l = 1 two faults two apart share a neighbor
        let local = enumerate_fault_sets(&c8, FaultModel::local(1, 1));
        assert!(local.contains(&p(&[1, 4])));
        assert!(!local.contains(&p(&[1, 3])));
        assert!(local
            .iter()
            .all(|&s| FaultModel::local(1, 1).admits(&c8, s)));
    }

    #[test]
    fn family_verdicts() {
        let c8 = gen_cycle(8).unwrap();
        assert!(
            is_rs_robust(&c8, 2, 2, 4, FaultModel::total(1))
                .unwrap()
                .holds
        );
        assert!(
            !is_rs_robust(&c8, 2, 2, 3, FaultModel::total(1))
                .unwrap()
                .holds
        );
        let k33 = gen_complete_bipartite(3, 3).unwrap();
        assert!(
            is_rs_robust(&k33, 2, 2, 2, FaultModel::total(1))
                .unwrap()
                .holds
        );
        let w6 = gen_wheel(6).unwrap();
        assert!(
            is_strictly_robust(&w6, 2, 2, FaultModel::total(1))
                .unwrap()
                .holds
        );
        let v = is_strictly_robust(&w6, 2, 1, FaultModel::total(1)).unwrap();
        assert!(!v.holds);
        assert!(witness_violates(&w6, &v.witness.unwrap(), 2, 1, 1, true));
        for n in 4..8 {
            let c = gen_cycle(n).unwrap();
            for l in 1..n {
                assert!(
                    !is_strictly_robust(&c, 2, l, FaultModel::total(1))
                        .unwrap()
                        .holds
                );
            }
        }
    }

    #[test]
    fn lemma1_on_known_graphs() {
        let w6 = gen_wheel(6).unwrap();
        let rep = check_lemma1_implications(&w6, 1, 2, FaultModel::total(1)).unwrap();
        assert!(rep.b && rep.c && rep.violations.is_empty());
        let c8 = gen_cycle(8).unwrap();
        let rep = check_lemma1_implications(&c8, 1, 4, FaultModel::total(1)).unwrap();
        assert!(rep.c_without_b());
        assert!(rep.violations.is_empty());
    }

    #[test]
    fn sampled_mode_finds_cited_pair() {
        let c8 = gen_cycle(8).unwrap();
        let opts = CheckOptions::sampled(10, 1).with_pairs([(p(&[1, 2, 3, 4, 5, 6]), p(&[7, 8]))]);
        let v = is_rs_robust_wrt_with(&c8, 2, 2, 3, p(&[8]), &opts).unwrap();
        assert!(!v.holds && !v.exhaustive);
        assert_eq!(v.witness.unwrap().v1, p(&[1, 2, 3, 4, 5, 6]));
        assert_eq!(v.pairs_checked, 1);
    }

    #[test]
    fn rejects_bad_parameters() {
        let c = gen_cycle(4).unwrap();
        assert!(is_rs_robust(&c, 0, 1, 1, FaultModel::total(1)).is_err());
        assert!(is_rs_robust(&c, 1, 1, 0, FaultModel::total(1)).is_err());
    }
}
