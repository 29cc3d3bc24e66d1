//! Edge-inducing pairs, the search graph over the weight-2 solution sets, and
//! improving binoculars.
//!
//! A pair `(U, W)` with `U ⊆ A`, `W ⊆ V \ A` independent, both of size at most
//! `tau`, `w(U) + 2 = w(W)` and `N(W, A \ U)` consisting of one or two weight-2
//! solution vertices induces a (loop or ordinary) labeled edge on those
//! vertices. A binocular of such edges whose `W` labels fit together is an
//! improving binocular, and the union of its `W` labels is a local
//! improvement.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::conflict::{ConflictGraph, Vertex};
use crate::enumerate::for_each_subset;
use crate::local_search::{is_local_improvement, Packing, PairMode};

pub const DEFAULT_FULL_PAIR_BUDGET: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchGraphError {
    #[error("full pair enumeration refused: {vertices} vertices exceed the budget of {budget}")]
    FullModeBudget { vertices: usize, budget: usize },
    #[error("edge {0} does not exist in the search graph")]
    UnknownEdge(usize),
    #[error("edge {0} listed twice")]
    RepeatedEdge(usize),
    #[error("{edges} edges on {vertices} vertices do not form a binocular")]
    NotABinocular { edges: usize, vertices: usize },
    #[error("binocular is not improving")]
    NotImproving,
    #[error("W(B) = {0:?} fails the local-improvement check")]
    ExtractionFailed(Vec<Vertex>),
}

/// A labeled search-graph edge. `ends[0] == ends[1]` marks a loop.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SearchEdge {
    pub ends: [Vertex; 2],
    pub u: Vec<Vertex>,
    pub w: Vec<Vertex>,
}

impl SearchEdge {
    pub fn is_loop(&self) -> bool {
        self.ends[0] == self.ends[1]
    }

    /// The other endpoint, seen from `v`.
    pub fn opposite(&self, v: Vertex) -> Vertex {
        if self.ends[0] == v {
            self.ends[1]
        } else {
            self.ends[0]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SearchGraph {
    /// The weight-2 members of the packing.
    pub vertices: Vec<Vertex>,
    pub edges: Vec<SearchEdge>,
}

impl SearchGraph {
    pub fn edge(&self, id: usize) -> &SearchEdge {
        &self.edges[id]
    }

    pub fn loops(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_loop())
            .map(|(i, _)| i)
    }

    /// Graphviz rendering with `U`/`W` labels, truncated to a few entries.
    pub fn to_dot(&self) -> String {
        fn short(vs: &[Vertex]) -> String {
            let shown: Vec<String> = vs.iter().take(4).map(|v| v.to_string()).collect();
            if vs.len() > 4 {
                format!("{},…", shown.join(","))
            } else {
                shown.join(",")
            }
        }
        let mut out = String::from("graph search {\n");
        for v in &self.vertices {
            let _ = writeln!(out, "  {v};");
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  {} -- {} [label=\"U={{{}}} W={{{}}}\"];",
                e.ends[0],
                e.ends[1],
                short(&e.u),
                short(&e.w)
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Builds `S_tau(G, w, A)`.
///
/// Both modes enumerate every independent `W ⊆ V \ A` with `|W| <= tau`.
/// The canonical mode then takes `U = N(W, A) \ e` for each admissible
/// endpoint set `e`; the full mode also lets `U` include solution sets outside
/// `N(W, A)`.
pub fn enumerate_search_edges(
    g: &ConflictGraph,
    a: &Packing,
    tau: usize,
    pair_mode: PairMode,
    full_budget: usize,
) -> Result<SearchGraph, SearchGraphError> {
    if pair_mode == PairMode::Full && g.len() > full_budget {
        return Err(SearchGraphError::FullModeBudget {
            vertices: g.len(),
            budget: full_budget,
        });
    }
    let vertices: Vec<Vertex> = a
        .members()
        .iter()
        .copied()
        .filter(|&v| g.weight(v) == 2)
        .collect();
    let outside: Vec<Vertex> = (0..g.len()).filter(|&v| !a.contains(v)).collect();
    let a_nbrs: Vec<Vec<Vertex>> = (0..g.len())
        .map(|v| {
            if a.contains(v) {
                Vec::new()
            } else {
                g.neighborhood(&[v], a.members())
            }
        })
        .collect();

    let mut edges = BTreeSet::new();
    let mut w_set = Vec::with_capacity(tau);
    independent_subsets(g, &outside, tau, 0, &mut w_set, &mut |w| {
        let mut m: Vec<Vertex> = w.iter().flat_map(|&x| a_nbrs[x].iter().copied()).collect();
        m.sort_unstable();
        m.dedup();
        let w_weight = g.weight_of(w);
        let heavy: Vec<Vertex> = m.iter().copied().filter(|&x| g.weight(x) == 2).collect();
        let mut ends_options: Vec<[Vertex; 2]> = heavy.iter().map(|&x| [x, x]).collect();
        for (i, &x) in heavy.iter().enumerate() {
            for &y in &heavy[i + 1..] {
                ends_options.push([x, y]);
            }
        }
        for ends in ends_options {
            let base: Vec<Vertex> = m
                .iter()
                .copied()
                .filter(|&x| x != ends[0] && x != ends[1])
                .collect();
            match pair_mode {
                PairMode::Canonical => {
                    if base.len() <= tau && g.weight_of(&base) + 2 == w_weight {
                        edges.insert(SearchEdge {
                            ends,
                            u: base,
                            w: w.to_vec(),
                        });
                    }
                }
                PairMode::Full => {
                    let base_weight = g.weight_of(&base);
                    if base.len() > tau || base_weight + 2 > w_weight {
                        continue;
                    }
                    let target = w_weight - 2 - base_weight;
                    if target == 0 {
                        edges.insert(SearchEdge {
                            ends,
                            u: base.clone(),
                            w: w.to_vec(),
                        });
                        continue;
                    }
                    let rest: Vec<Vertex> = a
                        .members()
                        .iter()
                        .copied()
                        .filter(|x| m.binary_search(x).is_err())
                        .collect();
                    let _ = for_each_subset::<_, ()>(&rest, tau - base.len(), |extra| {
                        if g.weight_of(extra) == target {
                            let mut u = base.clone();
                            u.extend_from_slice(extra);
                            u.sort_unstable();
                            edges.insert(SearchEdge {
                                ends,
                                u,
                                w: w.to_vec(),
                            });
                        }
                        ControlFlow::Continue(())
                    });
                }
            }
        }
    });
    Ok(SearchGraph {
        vertices,
        edges: edges.into_iter().collect(),
    })
}

fn independent_subsets(
    g: &ConflictGraph,
    pool: &[Vertex],
    max: usize,
    from: usize,
    current: &mut Vec<Vertex>,
    visit: &mut impl FnMut(&[Vertex]),
) {
    if current.len() == max {
        return;
    }
    for i in from..pool.len() {
        let v = pool[i];
        if current.iter().any(|&x| g.adjacent(x, v)) {
            continue;
        }
        current.push(v);
        visit(current);
        independent_subsets(g, pool, max, i + 1, current, visit);
        current.pop();
    }
}

/// Re-checks every clause of the edge-inducing pair definition for `edge`.
pub fn is_edge_inducing(g: &ConflictGraph, a: &Packing, tau: usize, edge: &SearchEdge) -> bool {
    let SearchEdge { ends, u, w } = edge;
    if u.iter().any(|&x| !a.contains(x)) || w.iter().any(|&x| a.contains(x)) {
        return false;
    }
    if w.is_empty() || !g.is_independent(w) || u.len() > tau || w.len() > tau {
        return false;
    }
    if g.weight_of(u) + 2 != g.weight_of(w) {
        return false;
    }
    let rest: Vec<Vertex> = a
        .members()
        .iter()
        .copied()
        .filter(|x| !u.contains(x))
        .collect();
    let e = g.neighborhood(w, &rest);
    let mut expected = vec![ends[0], ends[1]];
    expected.dedup();
    e == expected && e.iter().all(|&x| g.weight(x) == 2)
}

/// A set of search-graph edges with more edges than touched vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledBinocular {
    edge_ids: Vec<usize>,
    edges: Vec<SearchEdge>,
}

impl LabeledBinocular {
    pub fn new(sg: &SearchGraph, mut edge_ids: Vec<usize>) -> Result<Self, SearchGraphError> {
        edge_ids.sort_unstable();
        for (i, &id) in edge_ids.iter().enumerate() {
            if id >= sg.edges.len() {
                return Err(SearchGraphError::UnknownEdge(id));
            }
            if i > 0 && edge_ids[i - 1] == id {
                return Err(SearchGraphError::RepeatedEdge(id));
            }
        }
        let edges: Vec<SearchEdge> = edge_ids.iter().map(|&i| sg.edges[i].clone()).collect();
        let b = LabeledBinocular { edge_ids, edges };
        let vertices = b.vertices().len();
        if b.edges.len() <= vertices {
            return Err(SearchGraphError::NotABinocular {
                edges: b.edges.len(),
                vertices,
            });
        }
        Ok(b)
    }

    pub fn edge_ids(&self) -> &[usize] {
        &self.edge_ids
    }

    pub fn edges(&self) -> &[SearchEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        let set: BTreeSet<Vertex> = self.edges.iter().flat_map(|e| e.ends).collect();
        set.into_iter().collect()
    }

    /// Loops.
    pub fn e1(&self) -> impl Iterator<Item = &SearchEdge> {
        self.edges.iter().filter(|e| e.is_loop())
    }

    /// Two-endpoint edges.
    pub fn e2(&self) -> impl Iterator<Item = &SearchEdge> {
        self.edges.iter().filter(|e| !e.is_loop())
    }

    /// `U(B)`: all endpoints and `U` labels.
    pub fn u_set(&self) -> Vec<Vertex> {
        let set: BTreeSet<Vertex> = self
            .edges
            .iter()
            .flat_map(|e| e.ends.iter().chain(&e.u).copied())
            .collect();
        set.into_iter().collect()
    }

    /// `W(B)`: the union of all `W` labels.
    pub fn w_set(&self) -> Vec<Vertex> {
        let set: BTreeSet<Vertex> = self.edges.iter().flat_map(|e| e.w.iter().copied()).collect();
        set.into_iter().collect()
    }
}

fn union<'a>(sets: impl Iterator<Item = &'a Vec<Vertex>>) -> BTreeSet<Vertex> {
    sets.flat_map(|s| s.iter().copied()).collect()
}

/// Checks the three improving-binocular conditions: disjoint `W` labels on
/// two-endpoint edges, the loop weight inequality, and independence of `W(B)`.
pub fn is_improving_binocular(b: &LabeledBinocular, g: &ConflictGraph) -> bool {
    let mut seen = BTreeSet::new();
    for e in b.e2() {
        if !e.w.iter().all(|&x| seen.insert(x)) {
            return false;
        }
    }
    let w2 = seen;
    let u2 = union(b.e2().map(|e| &e.u));
    let loop_w: Vec<Vertex> = union(b.e1().map(|e| &e.w))
        .into_iter()
        .filter(|x| !w2.contains(x))
        .collect();
    let loop_u: Vec<Vertex> = union(b.e1().map(|e| &e.u))
        .into_iter()
        .filter(|x| !u2.contains(x))
        .collect();
    let loops = b.e1().count() as u32;
    if g.weight_of(&loop_w) < g.weight_of(&loop_u) + 2 * loops {
        return false;
    }
    g.is_independent(&b.w_set())
}

/// Returns `W(B)`, after confirming `N(W(B), A) ⊆ U(B)`, `w(W(B)) > w(U(B))`
/// and that `W(B)` is a local improvement of `A`.
pub fn extract_improvement(
    b: &LabeledBinocular,
    g: &ConflictGraph,
    a: &Packing,
) -> Result<Vec<Vertex>, SearchGraphError> {
    if !is_improving_binocular(b, g) {
        return Err(SearchGraphError::NotImproving);
    }
    let w = b.w_set();
    let u = b.u_set();
    let covered = g.neighborhood(&w, a.members()).iter().all(|x| u.contains(x));
    if !covered || g.weight_of(&w) <= g.weight_of(&u) || !is_local_improvement(g, a, &w) {
        return Err(SearchGraphError::ExtractionFailed(w));
    }
    Ok(w)
}
