//! Binoculars in multigraphs: detection of minimal binoculars, their shape
//! (two cycles joined by a path, or three paths between two vertices), short
//! binoculars in dense graphs, and an exhaustive improving-binocular search
//! over labeled search graphs.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::conflict::ConflictGraph;
use crate::enumerate::for_each_connected_subset;
use crate::local_search::Packing;
use crate::search_graph::{is_improving_binocular, LabeledBinocular, SearchGraph};

/// Largest binocular the exhaustive improving-binocular search accepts.
pub const DEFAULT_NAIVE_BUDGET: usize = 8;
/// Largest edge count for which minimality is checked over all edge subsets.
pub const MAX_MINIMALITY_EDGES: usize = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BinocularError {
    #[error("not a minimal binocular: {0}")]
    NotMinimal(String),
    #[error("density precondition fails: {s}*{edges} < {}*{vertices}", s + 1)]
    TooSparse { s: usize, edges: usize, vertices: usize },
    #[error("s must be positive")]
    ZeroS,
    #[error("binocular size {requested} exceeds the budget of {budget} edges")]
    Budget { requested: usize, budget: usize },
}

/// An undirected multigraph; loops have equal endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Multigraph {
    vertices: Vec<usize>,
    edges: Vec<[usize; 2]>,
}

impl Multigraph {
    /// Endpoints of the edges must be among `vertices`.
    pub fn new(mut vertices: Vec<usize>, edges: Vec<[usize; 2]>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        for e in &edges {
            assert!(
                e.iter().all(|v| vertices.binary_search(v).is_ok()),
                "edge {e:?} leaves the vertex set"
            );
        }
        Multigraph { vertices, edges }
    }

    /// The multigraph spanned by `edges`: its vertices are their endpoints.
    pub fn from_edges(edges: Vec<[usize; 2]>) -> Self {
        let vertices = edges.iter().flatten().copied().collect::<BTreeSet<_>>();
        Multigraph::new(vertices.into_iter().collect(), edges)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// The sub-multigraph spanned by the given edge ids.
    pub fn edge_subgraph(&self, ids: &[usize]) -> Multigraph {
        Multigraph::from_edges(ids.iter().map(|&i| self.edges[i]).collect())
    }

    /// Degree with loops counted twice.
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|e| (e[0] == v) as usize + (e[1] == v) as usize)
            .sum()
    }

    pub fn is_connected(&self) -> bool {
        let Some(&first) = self.vertices.first() else {
            return true;
        };
        let mut seen = BTreeSet::from([first]);
        let mut stack = vec![first];
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                for (a, b) in [(e[0], e[1]), (e[1], e[0])] {
                    if a == v && seen.insert(b) {
                        stack.push(b);
                    }
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    /// Edges sharing an endpoint are adjacent.
    fn line_graph(&self) -> Vec<Vec<usize>> {
        let m = self.edges.len();
        let mut adj = vec![Vec::new(); m];
        for i in 0..m {
            for j in i + 1..m {
                if self.edges[i].iter().any(|v| self.edges[j].contains(v)) {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        adj
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph multi {\n");
        for v in &self.vertices {
            let _ = writeln!(out, "  {v};");
        }
        for (i, e) in self.edges.iter().enumerate() {
            let _ = writeln!(out, "  {} -- {} [label=\"{i}\"];", e[0], e[1]);
        }
        out.push_str("}\n");
        out
    }
}

pub fn is_binocular(h: &Multigraph) -> bool {
    h.edges.len() > h.vertices.len()
}

/// A binocular none of whose proper sub-multigraphs is a binocular. Checked
/// over every proper edge subset; vertex-only deletions never help.
pub fn is_minimal_binocular(h: &Multigraph) -> bool {
    if !is_binocular(h) {
        return false;
    }
    let m = h.edges.len();
    assert!(m <= MAX_MINIMALITY_EDGES, "minimality check limited to {MAX_MINIMALITY_EDGES} edges");
    let ids: Vec<usize> = (0..m).collect();
    (1u32..(1 << m) - 1).all(|mask| {
        let sub: Vec<usize> = ids.iter().copied().filter(|i| mask >> i & 1 == 1).collect();
        !is_binocular(&h.edge_subgraph(&sub))
    })
}

/// Edge ids of the first minimal binocular with at most `max_size` edges,
/// scanning connected edge sets of `h` with `|E| = |V| + 1`.
pub fn find_minimal_binocular_ids(h: &Multigraph, max_size: usize) -> Option<Vec<usize>> {
    let line = h.line_graph();
    let flow = for_each_connected_subset(&line, max_size, |_, _| true, |ids| {
        let sub = h.edge_subgraph(ids);
        if sub.edges.len() == sub.vertices.len() + 1 && is_minimal_binocular(&sub) {
            let mut ids = ids.to_vec();
            ids.sort_unstable();
            return ControlFlow::Break(ids);
        }
        ControlFlow::Continue(())
    });
    match flow {
        ControlFlow::Break(ids) => Some(ids),
        ControlFlow::Continue(()) => None,
    }
}

pub fn find_minimal_binocular(h: &Multigraph, max_size: usize) -> Option<Multigraph> {
    find_minimal_binocular_ids(h, max_size).map(|ids| h.edge_subgraph(&ids))
}

/// Every edge subset of `h` spanning a minimal binocular. Exponential in
/// the edge count; intended for small graphs.
pub fn all_minimal_binoculars(h: &Multigraph) -> Vec<Vec<usize>> {
    let m = h.edges.len();
    assert!(m <= 20, "exhaustive scan limited to 20 edges");
    (1u32..1 << m)
        .map(|mask| (0..m).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>())
        .filter(|ids| is_minimal_binocular(&h.edge_subgraph(ids)))
        .collect()
}

/// Whether some sub-multigraph of `h` has more edges than vertices.
pub fn has_binocular(h: &Multigraph) -> bool {
    let m = h.edges.len();
    assert!(m <= 20, "exhaustive scan limited to 20 edges");
    (1u32..1 << m).any(|mask| {
        let ids: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        is_binocular(&h.edge_subgraph(&ids))
    })
}

/// Decomposition of a minimal binocular; every part lists edge ids of the
/// classified multigraph in traversal order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BinocularShape {
    /// Cycles through `u` and `v` joined by a `u`-`v` path (empty when
    /// `u == v`).
    TwoCyclesAndPath {
        u: usize,
        v: usize,
        cycle_u: Vec<usize>,
        cycle_v: Vec<usize>,
        path: Vec<usize>,
    },
    /// Three edge-disjoint `u`-`v` paths, `u != v`.
    ThreePaths { u: usize, v: usize, paths: [Vec<usize>; 3] },
}

impl BinocularShape {
    pub fn parts(&self) -> Vec<&[usize]> {
        match self {
            BinocularShape::TwoCyclesAndPath {
                cycle_u,
                cycle_v,
                path,
                ..
            } => vec![cycle_u, cycle_v, path],
            BinocularShape::ThreePaths { paths, .. } => paths.iter().map(Vec::as_slice).collect(),
        }
    }

    /// The parts are pairwise edge-disjoint and together give every edge of
    /// `b` exactly once.
    pub fn reconstructs(&self, b: &Multigraph) -> bool {
        let mut all: Vec<usize> = self.parts().concat();
        all.sort_unstable();
        all == (0..b.edges.len()).collect::<Vec<_>>()
    }
}

/// Follows a chain of degree-2 vertices from `from` along edge `first` until
/// a branch vertex is reached. Returns the edges and the end vertex.
fn trace(b: &Multigraph, branch: &[usize], from: usize, first: usize, used: &mut [bool]) -> (Vec<usize>, usize) {
    let mut edges = vec![first];
    used[first] = true;
    let mut at = opposite(b.edges[first], from);
    while !branch.contains(&at) {
        let next = (0..b.edges.len())
            .find(|&i| !used[i] && b.edges[i].contains(&at))
            .expect("degree-2 vertex has a second edge");
        used[next] = true;
        edges.push(next);
        at = opposite(b.edges[next], at);
    }
    (edges, at)
}

fn opposite(e: [usize; 2], v: usize) -> usize {
    if e[0] == v {
        e[1]
    } else {
        e[0]
    }
}

fn next_unused(b: &Multigraph, v: usize, used: &[bool]) -> Option<usize> {
    (0..b.edges.len()).find(|&i| !used[i] && b.edges[i].contains(&v))
}

pub fn classify_minimal_binocular(b: &Multigraph) -> Result<BinocularShape, BinocularError> {
    let (m, n) = (b.edges.len(), b.vertices.len());
    if m != n + 1 {
        return Err(BinocularError::NotMinimal(format!("{m} edges on {n} vertices")));
    }
    if !b.is_connected() {
        return Err(BinocularError::NotMinimal("disconnected".into()));
    }
    if !is_minimal_binocular(b) {
        return Err(BinocularError::NotMinimal("has a smaller binocular".into()));
    }
    let degrees: Vec<usize> = b.vertices.iter().map(|&v| b.degree(v)).collect();
    if degrees.iter().any(|&d| d < 2) {
        return Err(BinocularError::NotMinimal("vertex of degree below 2".into()));
    }
    let branch: Vec<usize> = b
        .vertices
        .iter()
        .zip(&degrees)
        .filter(|(_, &d)| d > 2)
        .map(|(&v, _)| v)
        .collect();
    let mut used = vec![false; m];
    let shape = match *branch.as_slice() {
        [x] => {
            let e1 = next_unused(b, x, &used).expect("branch vertex has edges");
            let (c1, _) = trace(b, &branch, x, e1, &mut used);
            let e2 = next_unused(b, x, &used).expect("branch vertex has degree 4");
            let (c2, _) = trace(b, &branch, x, e2, &mut used);
            BinocularShape::TwoCyclesAndPath {
                u: x,
                v: x,
                cycle_u: c1,
                cycle_v: c2,
                path: Vec::new(),
            }
        }
        [u, v] => {
            let mut at_u = Vec::new();
            while let Some(e) = next_unused(b, u, &used) {
                at_u.push(trace(b, &branch, u, e, &mut used));
            }
            match at_u.iter().position(|(_, end)| *end == u) {
                Some(i) => {
                    let cycle_u = at_u.remove(i).0;
                    let path = at_u.remove(0).0;
                    let e = next_unused(b, v, &used).expect("cycle at v");
                    let (cycle_v, _) = trace(b, &branch, v, e, &mut used);
                    BinocularShape::TwoCyclesAndPath {
                        u,
                        v,
                        cycle_u,
                        cycle_v,
                        path,
                    }
                }
                None => {
                    let mut it = at_u.into_iter().map(|(p, _)| p);
                    let paths = [it.next(), it.next(), it.next()].map(|p| p.expect("three branches"));
                    BinocularShape::ThreePaths { u, v, paths }
                }
            }
        }
        _ => {
            return Err(BinocularError::NotMinimal(format!(
                "{} vertices of degree above 2",
                branch.len()
            )))
        }
    };
    assert!(shape.reconstructs(b), "decomposition must cover every edge once");
    if let BinocularShape::TwoCyclesAndPath { cycle_u, cycle_v, .. } = &shape {
        assert!(!cycle_u.is_empty() && !cycle_v.is_empty());
    }
    Ok(shape)
}

/// `4 s max(1, log2 |V|)`.
pub fn berman_furer_bound(s: usize, vertices: usize) -> f64 {
    4.0 * s as f64 * (vertices.max(1) as f64).log2().max(1.0)
}

/// A binocular of `h` with at most `4 s log2 |V|` edges, for multigraphs with
/// `s |E| >= (s + 1) |V|`. Candidates are two non-tree edges of a BFS tree
/// plus their tree paths to the root, with leaves pruned; the smallest over
/// all roots is returned. If that exceeds the bound an exhaustive scan up to
/// the bound is tried.
pub fn berman_furer_witness(h: &Multigraph, s: usize) -> Result<Multigraph, BinocularError> {
    if s == 0 {
        return Err(BinocularError::ZeroS);
    }
    let (m, n) = (h.edges.len(), h.vertices.len());
    if s * m < (s + 1) * n {
        return Err(BinocularError::TooSparse {
            s,
            edges: m,
            vertices: n,
        });
    }
    let mut best: Option<Vec<usize>> = None;
    for &root in &h.vertices {
        for ids in bfs_candidates(h, root) {
            if best.as_ref().is_none_or(|b| ids.len() < b.len()) {
                best = Some(ids);
            }
        }
    }
    let bound = berman_furer_bound(s, n);
    let best = best.expect("a graph with more edges than vertices has a binocular");
    if best.len() as f64 <= bound {
        return Ok(h.edge_subgraph(&best));
    }
    let cap = (bound.floor() as usize).min(m);
    Ok(match find_minimal_binocular_ids(h, cap) {
        Some(ids) => h.edge_subgraph(&ids),
        None => h.edge_subgraph(&best),
    })
}

fn bfs_candidates(h: &Multigraph, root: usize) -> Vec<Vec<usize>> {
    let idx = |v: usize| h.vertices.binary_search(&v).unwrap();
    let n = h.vertices.len();
    let mut parent_edge: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[idx(root)] = true;
    let mut queue = VecDeque::from([root]);
    let mut tree = vec![false; h.edges.len()];
    while let Some(v) = queue.pop_front() {
        for (i, e) in h.edges.iter().enumerate() {
            if e[0] != v && e[1] != v {
                continue;
            }
            let u = opposite(*e, v);
            if !seen[idx(u)] {
                seen[idx(u)] = true;
                parent_edge[idx(u)] = Some(i);
                tree[i] = true;
                queue.push_back(u);
            }
        }
    }
    let reached = |e: &[usize; 2]| seen[idx(e[0])];
    let non_tree: Vec<usize> = (0..h.edges.len())
        .filter(|&i| !tree[i] && reached(&h.edges[i]))
        .collect();
    let path_to_root = |mut v: usize, into: &mut BTreeSet<usize>| {
        while let Some(e) = parent_edge[idx(v)] {
            if !into.insert(e) {
                break;
            }
            v = opposite(h.edges[e], v);
        }
    };
    let mut out = Vec::new();
    for (a, &e1) in non_tree.iter().enumerate() {
        for &e2 in &non_tree[a + 1..] {
            let mut set = BTreeSet::from([e1, e2]);
            for e in [e1, e2] {
                for v in h.edges[e] {
                    path_to_root(v, &mut set);
                }
            }
            out.push(prune_leaves(h, set));
        }
    }
    out
}

/// Repeatedly drops edges incident to a degree-1 vertex.
fn prune_leaves(h: &Multigraph, mut set: BTreeSet<usize>) -> Vec<usize> {
    loop {
        let leaf_edge = set.iter().copied().find(|&i| {
            h.edges[i].iter().any(|&v| {
                set.iter()
                    .map(|&j| (h.edges[j][0] == v) as usize + (h.edges[j][1] == v) as usize)
                    .sum::<usize>()
                    == 1
            })
        });
        match leaf_edge {
            Some(i) => {
                set.remove(&i);
            }
            None => return set.into_iter().collect(),
        }
    }
}

/// The search graph as an unlabeled multigraph, edge ids preserved.
pub fn search_multigraph(sg: &SearchGraph) -> Multigraph {
    Multigraph::new(sg.vertices.clone(), sg.edges.iter().map(|e| e.ends).collect())
}

/// Exhaustive search over minimal binoculars of at most `max_size` edges for
/// one that is improving.
pub fn naive_improving_binocular(
    sg: &SearchGraph,
    g: &ConflictGraph,
    a: &Packing,
    max_size: usize,
) -> Result<Option<LabeledBinocular>, BinocularError> {
    if max_size > DEFAULT_NAIVE_BUDGET {
        return Err(BinocularError::Budget {
            requested: max_size,
            budget: DEFAULT_NAIVE_BUDGET,
        });
    }
    debug_assert!(a.is_valid(g));
    let h = search_multigraph(sg);
    let line = h.line_graph();
    let flow = for_each_connected_subset(&line, max_size, |_, _| true, |ids| {
        let sub = h.edge_subgraph(ids);
        if sub.edges.len() != sub.vertices.len() + 1 || !is_minimal_binocular(&sub) {
            return ControlFlow::Continue(());
        }
        match LabeledBinocular::new(sg, ids.to_vec()) {
            Ok(b) if is_improving_binocular(&b, g) => ControlFlow::Break(b),
            _ => ControlFlow::Continue(()),
        }
    });
    Ok(match flow {
        ControlFlow::Break(b) => Some(b),
        ControlFlow::Continue(()) => None,
    })
}
