//! Directed graphs, l-hop neighborhoods and bounded-length simple paths.
//!
//! Undirected graphs are stored as symmetric directed edge sets. Node sets are
//! dense bitsets, so graphs are limited to [`MAX_NODES`] nodes; every exact
//! algorithm in this crate is exponential well before that limit anyway.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Node index in `0..n`.
pub type NodeId = usize;

/// Upper bound on the node count of a [`DirectedGraph`].
pub const MAX_NODES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph must have between 1 and {MAX_NODES} nodes, got {0}")]
    NodeCount(usize),
    #[error("edge ({src}, {dst}) has an endpoint outside 0..{n}")]
    OutOfRange { src: usize, dst: usize, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("{family} requires {requirement}")]
    FamilySize {
        family: &'static str,
        requirement: &'static str,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A set of nodes of one graph, stored as a 64-bit mask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSet(u64);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    pub const fn from_bits(bits: u64) -> Self {
        NodeSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// `{0, 1, .., n-1}`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_NODES);
        if n == MAX_NODES {
            NodeSet(u64::MAX)
        } else {
            NodeSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: NodeId) -> Self {
        NodeSet(1u64 << i)
    }

    pub fn contains(self, i: NodeId) -> bool {
        i < MAX_NODES && self.0 & (1u64 << i) != 0
    }

    pub fn insert(&mut self, i: NodeId) {
        self.0 |= 1u64 << i;
    }

    pub fn remove(&mut self, i: NodeId) {
        self.0 &= !(1u64 << i);
    }

    pub fn with(self, i: NodeId) -> Self {
        NodeSet(self.0 | (1u64 << i))
    }

    pub fn without(self, i: NodeId) -> Self {
        NodeSet(self.0 & !(1u64 << i))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        NodeSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        NodeSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        NodeSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    /// Smallest member.
    pub fn first(self) -> Option<NodeId> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> NodeSetIter {
        NodeSetIter(self.0)
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        let mut s = NodeSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl IntoIterator for NodeSet {
    type Item = NodeId;
    type IntoIter = NodeSetIter;

    fn into_iter(self) -> NodeSetIter {
        self.iter()
    }
}

pub struct NodeSetIter(u64);

impl Iterator for NodeSetIter {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for NodeSetIter {}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

/// A simple path `(source, .., destination)`. A single-node path is the
/// zero-hop path a node uses for its own value.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path(Vec<NodeId>);

impl Path {
    /// Wraps a node sequence. Callers that build paths from a graph use
    /// [`DirectedGraph::is_path`] to validate; this only checks distinctness.
    pub fn new(nodes: Vec<NodeId>) -> Self {
        assert!(!nodes.is_empty(), "a path has at least one node");
        debug_assert_eq!(
            nodes.iter().copied().collect::<NodeSet>().len(),
            nodes.len(),
            "path nodes must be distinct: {nodes:?}"
        );
        Path(nodes)
    }

    pub fn trivial(i: NodeId) -> Self {
        Path(vec![i])
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.0
    }

    pub fn source(&self) -> NodeId {
        self.0[0]
    }

    pub fn dest(&self) -> NodeId {
        self.0[self.0.len() - 1]
    }

    pub fn hops(&self) -> usize {
        self.0.len() - 1
    }

    /// Nodes strictly between source and destination.
    pub fn interior(&self) -> &[NodeId] {
        if self.0.len() <= 2 {
            &[]
        } else {
            &self.0[1..self.0.len() - 1]
        }
    }

    pub fn node_set(&self) -> NodeSet {
        self.0.iter().copied().collect()
    }

    /// The node following `node` on this path, if any.
    pub fn successor(&self, node: NodeId) -> Option<NodeId> {
        let pos = self.0.iter().position(|&v| v == node)?;
        self.0.get(pos + 1).copied()
    }
}

impl fmt::Debug for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str(")")
    }
}

/// Immutable directed graph. An edge `(j, i)` means `i` receives from `j`.
#[derive(Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    in_adj: Vec<NodeSet>,
    out_adj: Vec<NodeSet>,
}

impl fmt::Debug for DirectedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DirectedGraph")
            .field("n", &self.n)
            .field("edges", &self.edges())
            .finish()
    }
}

impl DirectedGraph {
    /// Builds a graph from directed edges; duplicates collapse.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self, GraphError> {
        if n == 0 || n > MAX_NODES {
            return Err(GraphError::NodeCount(n));
        }
        let mut in_adj = vec![NodeSet::EMPTY; n];
        let mut out_adj = vec![NodeSet::EMPTY; n];
        for (src, dst) in edges {
            if src >= n || dst >= n {
                return Err(GraphError::OutOfRange { src, dst, n });
            }
            if src == dst {
                return Err(GraphError::SelfLoop(src));
            }
            out_adj[src].insert(dst);
            in_adj[dst].insert(src);
        }
        Ok(DirectedGraph { n, in_adj, out_adj })
    }

    /// Builds a graph from undirected edges, each expanded to both directions.
    pub fn undirected(
        n: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self, GraphError> {
        Self::new(n, edges.into_iter().flat_map(|(a, b)| [(a, b), (b, a)]))
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> NodeSet {
        NodeSet::full(self.n)
    }

    /// All edges `(src, dst)` in lexicographic order.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        (0..self.n)
            .flat_map(|j| self.out_adj[j].iter().map(move |i| (j, i)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.out_adj.iter().map(|s| s.len()).sum()
    }

    pub fn has_edge(&self, src: NodeId, dst: NodeId) -> bool {
        src < self.n && self.out_adj[src].contains(dst)
    }

    /// Direct in-neighbors (one hop, excluding `i`).
    pub fn in_adjacent(&self, i: NodeId) -> NodeSet {
        self.in_adj[i]
    }

    /// Direct out-neighbors (one hop, excluding `i`).
    pub fn out_adjacent(&self, i: NodeId) -> NodeSet {
        self.out_adj[i]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.in_adj[i] == self.out_adj[i])
    }

    /// Nodes that reach `i` within `l` hops, `i` included.
    pub fn in_neighbors_l(&self, i: NodeId, l: usize) -> NodeSet {
        self.ball(i, l, &self.in_adj)
    }

    /// Nodes reachable from `i` within `l` hops, `i` included.
    pub fn out_neighbors_l(&self, i: NodeId, l: usize) -> NodeSet {
        self.ball(i, l, &self.out_adj)
    }

    fn ball(&self, i: NodeId, l: usize, adj: &[NodeSet]) -> NodeSet {
        let mut seen = NodeSet::singleton(i);
        let mut frontier = seen;
        for _ in 0..l {
            let mut next = NodeSet::EMPTY;
            for v in frontier {
                next = next.union(adj[v]);
            }
            frontier = next.difference(seen);
            if frontier.is_empty() {
                break;
            }
            seen = seen.union(frontier);
        }
        seen
    }

    pub fn is_path(&self, path: &Path) -> bool {
        let nodes = path.nodes();
        nodes.iter().all(|&v| v < self.n)
            && path.node_set().len() == nodes.len()
            && nodes.windows(2).all(|w| self.has_edge(w[0], w[1]))
    }

    /// Every simple path from `source` to `dest` with at most `l` hops whose
    /// interior avoids `forbidden`. The endpoints may themselves be forbidden.
    pub fn enumerate_paths(
        &self,
        source: NodeId,
        dest: NodeId,
        l: usize,
        forbidden: NodeSet,
    ) -> Vec<Path> {
        let mut out = Vec::new();
        if source == dest || l == 0 {
            return out;
        }
        let mut stack = vec![source];
        self.paths_dfs(
            dest,
            l,
            forbidden,
            NodeSet::singleton(source),
            &mut stack,
            &mut out,
        );
        out
    }

    fn paths_dfs(
        &self,
        dest: NodeId,
        budget: usize,
        forbidden: NodeSet,
        visited: NodeSet,
        stack: &mut Vec<NodeId>,
        out: &mut Vec<Path>,
    ) {
        let at = *stack.last().unwrap();
        for next in self.out_adj[at].difference(visited) {
            if next == dest {
                let mut nodes = stack.clone();
                nodes.push(dest);
                out.push(Path(nodes));
            } else if budget > 1 && !forbidden.contains(next) {
                stack.push(next);
                self.paths_dfs(dest, budget - 1, forbidden, visited.with(next), stack, out);
                stack.pop();
            }
        }
    }

    /// Every simple path of 1..=`l` hops ending at `dest`, sorted by
    /// (hop count, node sequence).
    pub fn paths_into(&self, dest: NodeId, l: usize) -> Vec<Path> {
        let mut out = Vec::new();
        let mut rev = vec![dest];
        self.backward_dfs(l, NodeSet::singleton(dest), &mut rev, &mut out);
        out.sort_by(|a, b| a.hops().cmp(&b.hops()).then_with(|| a.cmp(b)));
        out
    }

    fn backward_dfs(
        &self,
        budget: usize,
        visited: NodeSet,
        rev: &mut Vec<NodeId>,
        out: &mut Vec<Path>,
    ) {
        if budget == 0 {
            return;
        }
        let at = *rev.last().unwrap();
        for prev in self.in_adj[at].difference(visited) {
            rev.push(prev);
            out.push(Path(rev.iter().rev().copied().collect()));
            self.backward_dfs(budget - 1, visited.with(prev), rev, out);
            rev.pop();
        }
    }

    /// Longest simple path, in hops. Exhaustive; fine for n up to ~14.
    pub fn longest_cycle_free_path_length(&self) -> usize {
        fn dfs(
            g: &DirectedGraph,
            at: NodeId,
            visited: NodeSet,
            depth: usize,
            best: &mut usize,
            cap: usize,
        ) {
            *best = (*best).max(depth);
            if *best == cap {
                return;
            }
            for next in g.out_adj[at].difference(visited) {
                dfs(g, next, visited.with(next), depth + 1, best, cap);
            }
        }
        let mut best = 0;
        for s in 0..self.n {
            dfs(self, s, NodeSet::singleton(s), 0, &mut best, self.n - 1);
        }
        best
    }

    /// Subgraph induced by `keep`, preserving node ids; nodes outside `keep`
    /// become isolated.
    pub fn induced(&self, keep: NodeSet) -> DirectedGraph {
        let in_adj = (0..self.n)
            .map(|i| {
                if keep.contains(i) {
                    self.in_adj[i].intersection(keep)
                } else {
                    NodeSet::EMPTY
                }
            })
            .collect();
        let out_adj = (0..self.n)
            .map(|i| {
                if keep.contains(i) {
                    self.out_adj[i].intersection(keep)
                } else {
                    NodeSet::EMPTY
                }
            })
            .collect();
        DirectedGraph {
            n: self.n,
            in_adj,
            out_adj,
        }
    }

    /// Renames node `v` to `perm[v]`.
    pub fn relabel(&self, perm: &[NodeId]) -> Result<DirectedGraph, GraphError> {
        let image: NodeSet = perm.iter().copied().filter(|&v| v < self.n).collect();
        if perm.len() != self.n || image.len() != self.n {
            return Err(GraphError::FamilySize {
                family: "relabel",
                requirement: "a permutation of 0..n",
            });
        }
        DirectedGraph::new(
            self.n,
            self.edges().into_iter().map(|(a, b)| (perm[a], perm[b])),
        )
    }

    /// Plain-text form accepted by [`FromStr`]: `n <count>` then one directed
    /// edge per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("n {}\n", self.n);
        for (a, b) in self.edges() {
            s.push_str(&format!("{a} {b}\n"));
        }
        s
    }
}

impl FromStr for DirectedGraph {
    type Err = GraphError;

    /// Parses `n <count>`, then lines `<src> <dst>` (directed) or
    /// `u <a> <b>` (both directions). `#` starts a comment line.
    fn from_str(text: &str) -> Result<Self, GraphError> {
        let mut n = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let err = |msg: &str| GraphError::Parse {
                line,
                msg: msg.to_string(),
            };
            let tokens: Vec<&str> = trimmed.split_whitespace().collect();
            let num = |t: &str| {
                t.parse::<usize>()
                    .map_err(|_| err(&format!("expected a node index, found `{t}`")))
            };
            match tokens.as_slice() {
                ["n", count] => {
                    if n.is_some() {
                        return Err(err("duplicate `n` line"));
                    }
                    n = Some(num(count)?);
                }
                _ if n.is_none() => return Err(err("first line must be `n <count>`")),
                ["u", a, b] => {
                    let (a, b) = (num(a)?, num(b)?);
                    edges.push((line, a, b));
                    edges.push((line, b, a));
                }
                [a, b] => edges.push((line, num(a)?, num(b)?)),
                _ => return Err(err("expected `<src> <dst>` or `u <a> <b>`")),
            }
        }
        let n = n.ok_or(GraphError::Parse {
            line: 0,
            msg: "missing `n <count>` line".into(),
        })?;
        if n == 0 || n > MAX_NODES {
            return Err(GraphError::NodeCount(n));
        }
        for &(line, a, b) in &edges {
            if a >= n || b >= n || a == b {
                let inner = if a == b {
                    GraphError::SelfLoop(a)
                } else {
                    GraphError::OutOfRange { src: a, dst: b, n }
                };
                return Err(GraphError::Parse {
                    line,
                    msg: inner.to_string(),
                });
            }
        }
        DirectedGraph::new(n, edges.into_iter().map(|(_, a, b)| (a, b)))
    }
}

/// Undirected cycle `0 - 1 - .. - (n-1) - 0`.
pub fn gen_cycle(n: usize) -> Result<DirectedGraph, GraphError> {
    if n <= 2 {
        return Err(GraphError::FamilySize {
            family: "cycle",
            requirement: "n > 2",
        });
    }
    DirectedGraph::undirected(n, (0..n).map(|i| (i, (i + 1) % n)))
}

/// Wheel: center node 0 joined to every node of the rim cycle `1 - 2 - .. - (n-1) - 1`.
pub fn gen_wheel(n: usize) -> Result<DirectedGraph, GraphError> {
    if n <= 3 {
        return Err(GraphError::FamilySize {
            family: "wheel",
            requirement: "n > 3",
        });
    }
    let rim = n - 1;
    let spokes = (1..n).map(|i| (0, i));
    let ring = (0..rim).map(|k| (1 + k, 1 + (k + 1) % rim));
    DirectedGraph::undirected(n, spokes.chain(ring))
}

/// Complete bipartite graph with parts `0..n1` and `n1..n1+n2`.
pub fn gen_complete_bipartite(n1: usize, n2: usize) -> Result<DirectedGraph, GraphError> {
    if n1 == 0 || n2 == 0 {
        return Err(GraphError::FamilySize {
            family: "complete bipartite",
            requirement: "n1 >= 1 and n2 >= 1",
        });
    }
    DirectedGraph::undirected(
        n1 + n2,
        (0..n1).flat_map(|a| (n1..n1 + n2).map(move |b| (a, b))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> NodeSet {
        v.iter().copied().collect()
    }

    #[test]
    fn build_and_reject() {
        let g = DirectedGraph::new(3, [(0, 1), (1, 2), (2, 0), (0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(
            DirectedGraph::new(2, [(0, 0)]),
            Err(GraphError::SelfLoop(0))
        );
        assert!(matches!(
            DirectedGraph::new(2, [(0, 2)]),
            Err(GraphError::OutOfRange { .. })
        ));
        assert_eq!(gen_cycle(8).unwrap().edge_count(), 16);
    }

    #[test]
    fn neighborhoods_on_cycle_and_wheel() {
        let c8 = gen_cycle(8).unwrap();
        assert_eq!(c8.in_neighbors_l(0, 1), set(&[7, 0, 1]));
        assert_eq!(c8.in_neighbors_l(0, 4), NodeSet::full(8));
        let w6 = gen_wheel(6).unwrap();
        assert_eq!(w6.in_neighbors_l(1, 1), set(&[0, 1, 2, 5]));

        let tri = DirectedGraph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(tri.out_neighbors_l(0, 1), set(&[0, 1]));
        assert_eq!(tri.out_neighbors_l(0, 2), set(&[0, 1, 2]));
        assert_eq!(tri.in_neighbors_l(0, 1), set(&[0, 2]));
    }

    #[test]
    fn path_enumeration_on_cycle() {
        let c8 = gen_cycle(8).unwrap();
        let p = c8.enumerate_paths(2, 0, 2, NodeSet::EMPTY);
        assert_eq!(p, vec![Path::new(vec![2, 1, 0])]);
        let mut p = c8.enumerate_paths(4, 0, 4, NodeSet::EMPTY);
        p.sort();
        assert_eq!(
            p,
            vec![
                Path::new(vec![4, 3, 2, 1, 0]),
                Path::new(vec![4, 5, 6, 7, 0])
            ]
        );
        let p = c8.enumerate_paths(4, 0, 4, set(&[7]));
        assert_eq!(p, vec![Path::new(vec![4, 3, 2, 1, 0])]);
        // forbidden endpoints are fine
        assert_eq!(c8.enumerate_paths(1, 0, 1, set(&[0, 1])).len(), 1);
    }

    #[test]
    fn paths_into_matches_pairwise_enumeration() {
        let w = gen_wheel(6).unwrap();
        for l in 1..=3 {
            let mut all = w.paths_into(0, l);
            let mut pairwise: Vec<Path> = (1..6)
                .flat_map(|s| w.enumerate_paths(s, 0, l, NodeSet::EMPTY))
                .collect();
            all.sort();
            pairwise.sort();
            assert_eq!(all, pairwise);
        }
    }

    #[test]
    fn longest_paths_of_families() {
        for n in 3..10 {
            assert_eq!(
                gen_cycle(n).unwrap().longest_cycle_free_path_length(),
                n - 1
            );
        }
        for n in 4..9 {
            assert_eq!(
                gen_wheel(n).unwrap().longest_cycle_free_path_length(),
                n - 1
            );
        }
        for (a, b) in [(2, 2), (3, 3), (3, 4), (2, 3)] {
            let g = gen_complete_bipartite(a, b).unwrap();
            // a Hamiltonian path exists iff the parts differ by at most one
            assert_eq!(g.longest_cycle_free_path_length(), a + b - 1);
        }
        assert_eq!(
            DirectedGraph::new(3, [])
                .unwrap()
                .longest_cycle_free_path_length(),
            0
        );
    }

    #[test]
    fn generators_shape() {
        let w = gen_wheel(6).unwrap();
        assert_eq!(w.in_adjacent(0), set(&[1, 2, 3, 4, 5]));
        assert_eq!(w.in_adjacent(3), set(&[0, 2, 4]));
        let k = gen_complete_bipartite(3, 3).unwrap();
        assert_eq!(k.in_adjacent(0), set(&[3, 4, 5]));
        assert_eq!(k.in_adjacent(4), set(&[0, 1, 2]));
        assert!(gen_cycle(2).is_err());
        assert!(gen_wheel(3).is_err());
        assert!(gen_complete_bipartite(0, 3).is_err());
    }

    #[test]
    fn text_format() {
        let g: DirectedGraph = "# ring\nn 3\n0 1\nu 1 2\n\n".parse().unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (1, 2), (2, 1)]);
        let back: DirectedGraph = g.to_text().parse().unwrap();
        assert_eq!(back, g);
        match "n 3\n0 1\n1 x\n".parse::<DirectedGraph>() {
            Err(GraphError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match "n 3\n0 1\n2 2\n".parse::<DirectedGraph>() {
            Err(GraphError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!("0 1\n".parse::<DirectedGraph>().is_err());
    }

    #[test]
    fn relabel_and_induced() {
        let c = gen_cycle(4).unwrap();
        let r = c.relabel(&[1, 2, 3, 0]).unwrap();
        assert_eq!(r, c);
        let h = c.induced(set(&[0, 1, 2]));
        assert_eq!(h.edges(), vec![(0, 1), (1, 0), (1, 2), (2, 1)]);
    }
}
