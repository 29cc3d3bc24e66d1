//! Normalization of analysis tuples `(G, w, A, B)`: removal of deletable
//! vertices, then deletion of the short alternating weight-1 paths, bridging
//! the paths that touch both sides. The result is bipartite between `A` and
//! `B` with no edge between two weight-1 vertices.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conflict::{assert_claw_structure, ClawViolation, ConflictGraph, Vertex};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("weight {weight} of vertex {vertex} is not 1 or 2")]
    BadWeight { vertex: Vertex, weight: u32 },
    #[error("vertex {0} out of range")]
    OutOfRange(Vertex),
    #[error("edge ({0}, {1}) is a loop")]
    Loop(Vertex, Vertex),
    #[error("set {side} is not independent: edge ({u}, {v})")]
    NotIndependent { side: char, u: Vertex, v: Vertex },
    #[error("graph is not nice: {0:?}")]
    NotNice(ClawViolation),
}

/// A weighted graph with two independent vertex sets. Serialized as
/// `{"weights": [..], "edges": [[u, v], ..], "a": [..], "b": [..]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisTuple {
    pub weights: Vec<u32>,
    pub edges: Vec<[Vertex; 2]>,
    pub a: Vec<Vertex>,
    pub b: Vec<Vertex>,
}

impl AnalysisTuple {
    pub fn graph(&self) -> ConflictGraph {
        let edges: Vec<(Vertex, Vertex)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        ConflictGraph::from_edges(self.weights.clone(), &edges)
    }

    pub fn weight_a(&self) -> u32 {
        self.a.iter().map(|&v| self.weights[v]).sum()
    }

    pub fn weight_b(&self) -> u32 {
        self.b.iter().map(|&v| self.weights[v]).sum()
    }

    /// Checks weights, ranges, independence of `A` and `B`, and niceness
    /// (4-claw free, 3-claws centered at weight 2).
    pub fn validate(&self) -> Result<(), NormalizeError> {
        let n = self.weights.len();
        for (v, &w) in self.weights.iter().enumerate() {
            if !(1..=2).contains(&w) {
                return Err(NormalizeError::BadWeight { vertex: v, weight: w });
            }
        }
        for &v in self.edges.iter().flatten().chain(&self.a).chain(&self.b) {
            if v >= n {
                return Err(NormalizeError::OutOfRange(v));
            }
        }
        if let Some(e) = self.edges.iter().find(|e| e[0] == e[1]) {
            return Err(NormalizeError::Loop(e[0], e[1]));
        }
        let g = self.graph();
        for (side, set) in [('A', &self.a), ('B', &self.b)] {
            for (i, &u) in set.iter().enumerate() {
                if let Some(&v) = set[i + 1..].iter().find(|&&v| g.adjacent(u, v)) {
                    return Err(NormalizeError::NotIndependent { side, u, v });
                }
            }
        }
        match assert_claw_structure(&g).into_iter().next() {
            Some(c) => Err(NormalizeError::NotNice(c)),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeletionCase {
    OutsideAB,
    InBoth,
    ClosedComponent,
    LongPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathClass {
    /// Only neighbor outside the path lies in `A`.
    P1,
    /// Only neighbor outside the path lies in `B`.
    P2,
    /// One outside neighbor on each side; they get bridged.
    P3,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathRecord {
    pub vertices: Vec<Vertex>,
    pub class: PathClass,
    /// Endpoint cut off an odd component, kept in the graph.
    pub trimmed: Option<Vertex>,
    pub bridge: Option<[Vertex; 2]>,
}

/// Every step of a normalization, in original vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Certificate {
    pub deleted: Vec<(Vertex, DeletionCase)>,
    /// Vertex sets of the long-path components that lost vertices.
    pub long_paths: Vec<Vec<Vertex>>,
    pub paths: Vec<PathRecord>,
}

impl Certificate {
    pub fn is_empty(&self) -> bool {
        self.deleted.is_empty() && self.paths.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedInstance {
    /// The normalized tuple, vertices renumbered compactly.
    pub tuple: AnalysisTuple,
    /// Original id of each normalized vertex.
    pub original: Vec<Vertex>,
    pub certificate: Certificate,
}

fn light_components(g: &ConflictGraph, light: &BTreeSet<Vertex>) -> Vec<Vec<Vertex>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &s in light {
        if !seen.insert(s) {
            continue;
        }
        let mut comp = vec![s];
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &u in g.neighbors(v) {
                if light.contains(&u) && seen.insert(u) {
                    comp.push(u);
                    stack.push(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Vertices of a path component in path order.
fn path_order(g: &ConflictGraph, comp: &[Vertex]) -> Vec<Vertex> {
    let inside = |v: Vertex| -> Vec<Vertex> {
        g.neighbors(v)
            .iter()
            .copied()
            .filter(|u| comp.binary_search(u).is_ok())
            .collect()
    };
    let start = comp
        .iter()
        .copied()
        .find(|&v| inside(v).len() <= 1)
        .expect("a path has an endpoint");
    let mut order = vec![start];
    let mut prev = None;
    let mut at = start;
    while let Some(next) = inside(at).into_iter().find(|&u| Some(u) != prev) {
        prev = Some(at);
        at = next;
        order.push(at);
    }
    order
}

fn is_cycle(g: &ConflictGraph, comp: &[Vertex]) -> bool {
    comp.len() >= 3
        && comp.iter().all(|&v| {
            g.neighbors(v)
                .iter()
                .filter(|u| comp.binary_search(u).is_ok())
                .count()
                == 2
        })
}

/// The deletable vertices of `t`, with the case that applies to each.
pub fn deletable_with_cases(t: &AnalysisTuple) -> (Vec<(Vertex, DeletionCase)>, Vec<Vec<Vertex>>) {
    let g = t.graph();
    let a: BTreeSet<Vertex> = t.a.iter().copied().collect();
    let b: BTreeSet<Vertex> = t.b.iter().copied().collect();
    let mut out = Vec::new();
    for v in 0..g.len() {
        match (a.contains(&v), b.contains(&v)) {
            (false, false) => out.push((v, DeletionCase::OutsideAB)),
            (true, true) => out.push((v, DeletionCase::InBoth)),
            _ => {}
        }
    }
    let light: BTreeSet<Vertex> = (0..g.len())
        .filter(|&v| g.weight(v) == 1 && (a.contains(&v) ^ b.contains(&v)))
        .collect();
    let ab = |v: &Vertex| a.contains(v) || b.contains(v);
    let mut long_paths = Vec::new();
    for comp in light_components(&g, &light) {
        let closed = comp.iter().all(|&v| {
            g.neighbors(v)
                .iter()
                .filter(|u| ab(u))
                .all(|u| comp.binary_search(u).is_ok())
        });
        if is_cycle(&g, &comp) || (comp.len() % 2 == 0 && closed) {
            out.extend(comp.iter().map(|&v| (v, DeletionCase::ClosedComponent)));
            continue;
        }
        let order = path_order(&g, &comp);
        let inner = if order.len() > 2 { &order[1..order.len() - 1] } else { &[][..] };
        let inner_a = inner
            .iter()
            .filter(|v| a.contains(v))
            .count();
        if inner_a >= 3 {
            let before = out.len();
            for &v in &comp {
                let outside_b = g
                    .neighbors(v)
                    .iter()
                    .any(|u| b.contains(u) && comp.binary_search(u).is_err());
                if !outside_b {
                    out.push((v, DeletionCase::LongPath));
                }
            }
            if out.len() > before {
                long_paths.push(comp);
            }
        }
    }
    out.sort_unstable();
    (out, long_paths)
}

pub fn deletable_set(t: &AnalysisTuple) -> Vec<Vertex> {
    deletable_with_cases(t).0.into_iter().map(|(v, _)| v).collect()
}

pub fn normalize(t: &AnalysisTuple) -> Result<NormalizedInstance, NormalizeError> {
    t.validate()?;
    let g = t.graph();
    let a: BTreeSet<Vertex> = t.a.iter().copied().collect();
    let b: BTreeSet<Vertex> = t.b.iter().copied().collect();
    let light: BTreeSet<Vertex> = (0..g.len())
        .filter(|&v| g.weight(v) == 1 && (a.contains(&v) ^ b.contains(&v)))
        .collect();
    for comp in light_components(&g, &light) {
        let degrees_ok = comp.iter().all(|&v| {
            g.neighbors(v)
                .iter()
                .filter(|u| comp.binary_search(u).is_ok())
                .count()
                <= 2
        });
        let edges_inside: usize = comp
            .iter()
            .map(|&v| g.neighbors(v).iter().filter(|u| comp.binary_search(u).is_ok()).count())
            .sum::<usize>()
            / 2;
        assert!(
            degrees_ok && edges_inside <= comp.len(),
            "weight-1 component {comp:?} is neither a path nor a cycle"
        );
    }

    let (deleted, long_paths) = deletable_with_cases(t);
    let gone: BTreeSet<Vertex> = deleted.iter().map(|&(v, _)| v).collect();
    let alive = |v: &Vertex| !gone.contains(v);
    debug_assert!(
        (0..g.len())
            .filter(alive)
            .all(|v| g.neighbors(v).iter().all(|u| !a.contains(u) || alive(u))),
        "a deleted solution vertex still has a surviving neighbor"
    );

    // Path family on the remaining weight-1 components.
    let light: BTreeSet<Vertex> = light.into_iter().filter(alive).collect();
    let mut removed = gone.clone();
    let mut bridges: Vec<[Vertex; 2]> = Vec::new();
    let mut paths = Vec::new();
    for comp in light_components(&g, &light) {
        if comp.len() == 1 {
            continue;
        }
        let mut order = path_order(&g, &comp);
        let trimmed = if order.len() % 2 == 1 { order.pop() } else { None };
        let on_path: BTreeSet<Vertex> = order.iter().copied().collect();
        let outside: BTreeSet<Vertex> = order
            .iter()
            .flat_map(|&v| g.neighbors(v).iter().copied())
            .filter(|u| alive(u) && !on_path.contains(u))
            .collect();
        let out_a: Vec<Vertex> = outside.iter().copied().filter(|u| a.contains(u)).collect();
        let out_b: Vec<Vertex> = outside.iter().copied().filter(|u| b.contains(u)).collect();
        assert!(out_a.len() <= 1 && out_b.len() <= 1, "path {order:?} has too many outside neighbors");
        let (class, bridge) = match (out_a.first(), out_b.first()) {
            (Some(_), None) => (PathClass::P1, None),
            (None, Some(_)) => (PathClass::P2, None),
            (Some(&u), Some(&v)) => (PathClass::P3, Some([u, v])),
            (None, None) => unreachable!("closed even components are deletable"),
        };
        removed.extend(order.iter().copied());
        bridges.extend(bridge);
        let mut vertices = order;
        vertices.sort_unstable();
        paths.push(PathRecord {
            vertices,
            class,
            trimmed,
            bridge,
        });
    }

    let original: Vec<Vertex> = (0..g.len()).filter(|v| !removed.contains(v)).collect();
    let new_id = |v: Vertex| original.binary_search(&v).ok();
    let mut edges: BTreeSet<[Vertex; 2]> = BTreeSet::new();
    for (u, v) in g.edges() {
        if let (Some(x), Some(y)) = (new_id(u), new_id(v)) {
            edges.insert([x, y]);
        }
    }
    for [u, v] in &bridges {
        let (x, y) = (new_id(*u).unwrap(), new_id(*v).unwrap());
        edges.insert([x.min(y), x.max(y)]);
    }
    let tuple = AnalysisTuple {
        weights: original.iter().map(|&v| g.weight(v)).collect(),
        edges: edges.into_iter().collect(),
        a: t.a.iter().filter_map(|&v| new_id(v)).collect(),
        b: t.b.iter().filter_map(|&v| new_id(v)).collect(),
    };
    let out = NormalizedInstance {
        tuple,
        original,
        certificate: Certificate {
            deleted,
            long_paths,
            paths,
        },
    };
    assert!(ratio_transfer_holds(t, &out.tuple), "ratio transfer at 4/3 failed");
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormalizationViolation {
    VertexOutsideAB(Vertex),
    VertexInBoth(Vertex),
    EdgeWithinSide([Vertex; 2]),
    LightEdge([Vertex; 2]),
    Claw(ClawViolation),
    InvalidTuple(String),
}

/// Every way in which `n` fails to be a normalized instance.
pub fn check_normalized(n: &NormalizedInstance) -> Vec<NormalizationViolation> {
    let t = &n.tuple;
    let mut found = Vec::new();
    if let Err(e) = t.validate() {
        if !matches!(e, NormalizeError::NotNice(_) | NormalizeError::NotIndependent { .. }) {
            return vec![NormalizationViolation::InvalidTuple(e.to_string())];
        }
    }
    let g = t.graph();
    let a: BTreeSet<Vertex> = t.a.iter().copied().collect();
    let b: BTreeSet<Vertex> = t.b.iter().copied().collect();
    for v in 0..g.len() {
        match (a.contains(&v), b.contains(&v)) {
            (false, false) => found.push(NormalizationViolation::VertexOutsideAB(v)),
            (true, true) => found.push(NormalizationViolation::VertexInBoth(v)),
            _ => {}
        }
    }
    for (u, v) in g.edges() {
        if a.contains(&u) == a.contains(&v) || b.contains(&u) == b.contains(&v) {
            found.push(NormalizationViolation::EdgeWithinSide([u, v]));
        }
        if g.weight(u) == 1 && g.weight(v) == 1 {
            found.push(NormalizationViolation::LightEdge([u, v]));
        }
    }
    found.extend(assert_claw_structure(&g).into_iter().map(NormalizationViolation::Claw));
    found
}

/// `3 w(B') <= 4 w(A')` on the normalized tuple implies the same on the
/// original one.
pub fn ratio_transfer_holds(original: &AnalysisTuple, normalized: &AnalysisTuple) -> bool {
    let premise = 3 * normalized.weight_b() <= 4 * normalized.weight_a();
    !premise || 3 * original.weight_b() <= 4 * original.weight_a()
}

/// Results of the weight bookkeeping identities for one normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bookkeeping {
    /// `w(A \ D) - w(A_bar)`.
    pub a_loss: i64,
    /// `w(B \ D) - w(B_bar)`.
    pub b_loss: i64,
    /// `sum over the path family of |V(P) ∩ B|`.
    pub path_b: i64,
    /// Long-path components violating `3 |Q ∩ D ∩ B| <= 4 |Q ∩ D ∩ A|`.
    pub bad_long_paths: Vec<Vec<Vertex>>,
}

impl Bookkeeping {
    pub fn holds(&self) -> bool {
        self.a_loss == self.b_loss && self.b_loss == self.path_b && self.bad_long_paths.is_empty()
    }
}

pub fn bookkeeping(original: &AnalysisTuple, n: &NormalizedInstance) -> Bookkeeping {
    let deleted: BTreeSet<Vertex> = n.certificate.deleted.iter().map(|&(v, _)| v).collect();
    let w = |set: &[Vertex]| -> i64 {
        set.iter()
            .filter(|v| !deleted.contains(v))
            .map(|&v| original.weights[v] as i64)
            .sum()
    };
    let b_set: BTreeSet<Vertex> = original.b.iter().copied().collect();
    let a_set: BTreeSet<Vertex> = original.a.iter().copied().collect();
    let path_b = n
        .certificate
        .paths
        .iter()
        .map(|p| p.vertices.iter().filter(|v| b_set.contains(v)).count() as i64)
        .sum();
    let bad_long_paths = n
        .certificate
        .long_paths
        .iter()
        .filter(|q| {
            let in_d = |side: &BTreeSet<Vertex>| {
                q.iter().filter(|v| deleted.contains(v) && side.contains(v)).count()
            };
            3 * in_d(&b_set) > 4 * in_d(&a_set)
        })
        .cloned()
        .collect();
    Bookkeeping {
        a_loss: w(&original.a) - n.tuple.weight_a() as i64,
        b_loss: w(&original.b) - n.tuple.weight_b() as i64,
        path_b,
        bad_long_paths,
    }
}
