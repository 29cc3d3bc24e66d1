//! Conflict graphs: one vertex per set, an edge whenever two sets share an
//! element. Packings are exactly the independent sets of this graph.

use std::fmt::Write as _;

use crate::instance::Instance;

/// Vertex index; equal to the index of the underlying set.
pub type Vertex = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGraph {
    weights: Vec<u32>,
    adjacency: Vec<Vec<Vertex>>,
}

/// Split of a vertex set into weight-1 and weight-2 members.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WeightClasses {
    pub prime: Vec<Vertex>,
    pub double_prime: Vec<Vertex>,
}

impl ConflictGraph {
    pub fn build(instance: &Instance) -> Self {
        let n = instance.len();
        let mut by_element: Vec<Vec<Vertex>> = vec![Vec::new(); instance.universe_size()];
        for (v, set) in instance.sets().iter().enumerate() {
            for &e in set.elements() {
                by_element[e.index()].push(v);
            }
        }
        let mut adjacency: Vec<Vec<Vertex>> = vec![Vec::new(); n];
        for holders in &by_element {
            for (i, &a) in holders.iter().enumerate() {
                for &b in &holders[i + 1..] {
                    adjacency[a].push(b);
                    adjacency[b].push(a);
                }
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        ConflictGraph {
            weights: instance.sets().iter().map(|s| s.weight()).collect(),
            adjacency,
        }
    }

    /// Builds an arbitrary weighted simple graph. Self-loops and repeated
    /// edges are dropped.
    pub fn from_edges(weights: Vec<u32>, edges: &[(Vertex, Vertex)]) -> Self {
        let n = weights.len();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            assert!(a < n && b < n, "edge ({a}, {b}) out of range");
            if a != b {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        ConflictGraph { weights, adjacency }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, v: Vertex) -> u32 {
        self.weights[v]
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn weight_of(&self, vs: &[Vertex]) -> u32 {
        vs.iter().map(|&v| self.weights[v]).sum()
    }

    /// Number of weight-2 vertices in `vs`.
    pub fn heavy_count(&self, vs: &[Vertex]) -> usize {
        vs.iter().filter(|&&v| self.weights[v] == 2).count()
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adjacency[v]
    }

    pub fn adjacent(&self, a: Vertex, b: Vertex) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }

    pub fn is_independent(&self, vs: &[Vertex]) -> bool {
        vs.iter()
            .enumerate()
            .all(|(i, &a)| vs[i + 1..].iter().all(|&b| a != b && !self.adjacent(a, b)))
    }

    /// `N(U, W)`: the members of `W` that lie in `U` or are adjacent to it.
    /// Returned sorted.
    pub fn neighborhood(&self, u: &[Vertex], w: &[Vertex]) -> Vec<Vertex> {
        let mut out: Vec<Vertex> = w
            .iter()
            .copied()
            .filter(|&x| u.iter().any(|&y| y == x || self.adjacent(x, y)))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn weight_classes(&self, vs: &[Vertex]) -> WeightClasses {
        let (double_prime, prime) = vs.iter().partition(|&&v| self.weights[v] == 2);
        WeightClasses {
            prime,
            double_prime,
        }
    }

    /// Graphviz rendering; vertices are labelled `id:weight`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph conflict {\n");
        for (v, w) in self.weights.iter().enumerate() {
            let _ = writeln!(out, "  {v} [label=\"{v}:{w}\"];");
        }
        for (a, b) in self.edges() {
            let _ = writeln!(out, "  {a} -- {b};");
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClawViolation {
    /// A weight-1 vertex centering an induced 3-claw.
    LightThreeClaw { center: Vertex, talons: [Vertex; 3] },
    FourClaw { center: Vertex, talons: [Vertex; 4] },
}

/// Enumerates induced claws that a conflict graph can never contain. An
/// empty result means the graph is 4-claw free with every 3-claw centered at
/// a weight-2 vertex.
pub fn assert_claw_structure(g: &ConflictGraph) -> Vec<ClawViolation> {
    let mut found = Vec::new();
    for center in 0..g.len() {
        let nb = g.neighbors(center);
        let independent_with = |chosen: &[Vertex], x: Vertex| chosen.iter().all(|&y| !g.adjacent(x, y));
        for (i, &a) in nb.iter().enumerate() {
            for (j, &b) in nb.iter().enumerate().skip(i + 1) {
                if g.adjacent(a, b) {
                    continue;
                }
                for (k, &c) in nb.iter().enumerate().skip(j + 1) {
                    if !independent_with(&[a, b], c) {
                        continue;
                    }
                    if g.weight(center) == 1 {
                        found.push(ClawViolation::LightThreeClaw {
                            center,
                            talons: [a, b, c],
                        });
                    }
                    for &d in &nb[k + 1..] {
                        if independent_with(&[a, b, c], d) {
                            found.push(ClawViolation::FourClaw {
                                center,
                                talons: [a, b, c, d],
                            });
                        }
                    }
                }
            }
        }
    }
    found
}
