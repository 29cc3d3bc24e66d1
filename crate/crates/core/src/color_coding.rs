//! Colorful binocular search: universe colorings, the colorful sub-graph, the
//! walk dynamic program and the loop/walk structure search.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::conflict::{ConflictGraph, Vertex};
use crate::instance::Instance;
use crate::local_search::{Packing, SearchParams};
use crate::search_graph::{is_improving_binocular, LabeledBinocular, SearchGraph};

/// Upper limit on walk length accepted by [`compute_walks`].
pub const MAX_WALK_LEN: usize = 64;
/// Upper limit on reachable states kept by one walk table.
pub const MAX_WALK_STATES: usize = 1 << 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WalkError {
    #[error("walk length cap {0} exceeds {MAX_WALK_LEN}")]
    LengthBudget(usize),
    #[error("loop unions of size {0} cannot be tracked (limit 64)")]
    LoopUnion(usize),
    #[error("more than {MAX_WALK_STATES} reachable walk states")]
    StateBudget,
}

/// A set of colors `0..t` stored as a bitset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ColorSet(Vec<u64>);

impl ColorSet {
    pub fn new(t: usize) -> Self {
        ColorSet(vec![0; t.div_ceil(64)])
    }

    pub fn insert(&mut self, c: usize) {
        self.0[c / 64] |= 1 << (c % 64);
    }

    pub fn contains(&self, c: usize) -> bool {
        self.0.get(c / 64).is_some_and(|w| w >> (c % 64) & 1 == 1)
    }

    pub fn union_with(&mut self, other: &ColorSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    pub fn union(&self, other: &ColorSet) -> ColorSet {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn is_disjoint(&self, other: &ColorSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & b == 0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.0.len() * 64).filter(|&c| self.contains(c))
    }
}

/// An assignment of one of `t` colors to every universe element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    t: usize,
    assignment: Vec<u32>,
}

impl Coloring {
    pub fn new(t: usize, assignment: Vec<u32>) -> Self {
        assert!(assignment.iter().all(|&c| (c as usize) < t), "color out of range");
        Coloring { t, assignment }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn color(&self, element: usize) -> u32 {
        self.assignment[element]
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.t];
        self.assignment
            .iter()
            .all(|&c| !std::mem::replace(&mut seen[c as usize], true))
    }
}

/// `ceil(3 tau^2 log2 n)`, at least 1.
pub fn default_t(tau: usize, n: usize) -> usize {
    let t = (3.0 * (tau * tau) as f64 * (n.max(1) as f64).log2()).ceil() as usize;
    t.max(1)
}

/// `ceil(tau log2 n)`, at least 1: the largest binocular (and walk) examined.
pub fn walk_length_cap(tau: usize, n: usize) -> usize {
    ((tau as f64 * (n.max(1) as f64).log2()).ceil() as usize).max(1)
}

/// Independent uniform colorings, reproducible from `seed`. With `injective`
/// a single identity coloring with one color per element is returned.
pub fn make_colorings(
    universe_n: usize,
    t: usize,
    reps: usize,
    seed: u64,
    injective: bool,
) -> Vec<Coloring> {
    if injective {
        let t = universe_n.max(1);
        return vec![Coloring::new(t, (0..universe_n as u32).collect())];
    }
    assert!(t >= 1 && reps >= 1, "need t >= 1 and reps >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..reps)
        .map(|_| {
            let assignment = (0..universe_n).map(|_| rng.gen_range(0..t as u32)).collect();
            Coloring::new(t, assignment)
        })
        .collect()
}

/// Smallest `R` with `(1 - k!/t^k)^R <= fail`: the number of uniform
/// colorings needed so that a fixed `k`-element set is colored injectively
/// by at least one of them with probability `1 - fail`.
pub fn reps_for_confidence(k: usize, t: usize, fail: f64) -> usize {
    assert!(k <= t && fail > 0.0 && fail < 1.0);
    let p: f64 = (0..k).map(|i| (t - i) as f64 / t as f64).product();
    if p >= 1.0 {
        return 1;
    }
    (fail.ln() / (1.0 - p).ln()).ceil() as usize
}

/// `col_f(v)` for every vertex of the conflict graph of `instance`.
pub fn vertex_colors(instance: &Instance, f: &Coloring) -> Vec<ColorSet> {
    instance
        .sets()
        .iter()
        .map(|s| {
            let mut c = ColorSet::new(f.t());
            for e in s.elements() {
                c.insert(f.color(e.index()) as usize);
            }
            c
        })
        .collect()
}

fn pairwise_disjoint<'a>(sets: impl Iterator<Item = &'a ColorSet>, t: usize) -> bool {
    let mut acc = ColorSet::new(t);
    for s in sets {
        if !acc.is_disjoint(s) {
            return false;
        }
        acc.union_with(s);
    }
    true
}

/// The search graph restricted to edges whose `W` vertices have pairwise
/// disjoint color sets.
#[derive(Debug, Clone)]
pub struct ColorfulSearchGraph<'a> {
    pub sg: &'a SearchGraph,
    /// Ids (into `sg.edges`) of the retained edges, ascending.
    pub kept: Vec<usize>,
    /// `col_f(W(e))` for every edge of `sg`.
    pub edge_colors: Vec<ColorSet>,
    incident: BTreeMap<Vertex, Vec<usize>>,
    t: usize,
}

impl ColorfulSearchGraph<'_> {
    pub fn loops(&self) -> Vec<usize> {
        self.kept
            .iter()
            .copied()
            .filter(|&i| self.sg.edges[i].is_loop())
            .collect()
    }

    /// Retained non-loop edges at `v`.
    pub fn incident(&self, v: Vertex) -> &[usize] {
        self.incident.get(&v).map_or(&[], Vec::as_slice)
    }
}

pub fn colorful_subgraph<'a>(sg: &'a SearchGraph, colors: &[ColorSet]) -> ColorfulSearchGraph<'a> {
    let t = colors.first().map_or(0, |c| c.0.len() * 64);
    let mut kept = Vec::new();
    let mut edge_colors = Vec::with_capacity(sg.edges.len());
    let mut incident: BTreeMap<Vertex, Vec<usize>> = BTreeMap::new();
    for (i, e) in sg.edges.iter().enumerate() {
        let mut c = ColorSet::new(t);
        for &v in &e.w {
            c.union_with(&colors[v]);
        }
        edge_colors.push(c);
        if pairwise_disjoint(e.w.iter().map(|&v| &colors[v]), t) {
            kept.push(i);
            if !e.is_loop() {
                incident.entry(e.ends[0]).or_default().push(i);
                incident.entry(e.ends[1]).or_default().push(i);
            }
        }
    }
    ColorfulSearchGraph {
        sg,
        kept,
        edge_colors,
        incident,
        t,
    }
}

/// A key of the walk table for a fixed start vertex: the walk's end vertex,
/// its color set `C`, and `X`/`Y` as bitmasks over the fixed loop unions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WalkState {
    pub end: Vertex,
    pub colors: ColorSet,
    pub x: u64,
    pub y: u64,
    pub len: usize,
}

/// Every reachable state of colorful loop-free walks from one start vertex,
/// each with a stored witness walk.
#[derive(Debug, Clone)]
pub struct WalkTable {
    pub start: Vertex,
    states: Vec<WalkState>,
    parent: Vec<Option<(usize, usize)>>,
    index: HashMap<WalkState, usize>,
    by_end: BTreeMap<Vertex, Vec<usize>>,
}

impl WalkTable {
    pub fn states(&self) -> &[WalkState] {
        &self.states
    }

    pub fn contains(&self, key: &WalkState) -> bool {
        self.index.contains_key(key)
    }

    /// State ids ending at `v`, in discovery order (non-decreasing length).
    pub fn ending_at(&self, v: Vertex) -> &[usize] {
        self.by_end.get(&v).map_or(&[], Vec::as_slice)
    }

    pub fn state(&self, id: usize) -> &WalkState {
        &self.states[id]
    }

    /// Edge ids of the stored witness walk for state `id`, in walk order.
    pub fn walk(&self, mut id: usize) -> Vec<usize> {
        let mut edges = Vec::new();
        while let Some((prev, e)) = self.parent[id] {
            edges.push(e);
            id = prev;
        }
        edges.reverse();
        edges
    }
}

fn mask_of(items: &[Vertex], within: &[Vertex]) -> u64 {
    items
        .iter()
        .filter_map(|v| within.binary_search(v).ok())
        .fold(0, |m, i| m | 1 << i)
}

/// Forward dynamic program over the walks that start at `u`, use retained
/// non-loop edges with pairwise disjoint color sets, and have length at most
/// `max_len`. `loop_u` and `loop_w` must be sorted.
pub fn compute_walks(
    csg: &ColorfulSearchGraph<'_>,
    loop_u: &[Vertex],
    loop_w: &[Vertex],
    u: Vertex,
    max_len: usize,
) -> Result<WalkTable, WalkError> {
    if max_len > MAX_WALK_LEN {
        return Err(WalkError::LengthBudget(max_len));
    }
    let union_size = loop_u.len().max(loop_w.len());
    if union_size > 64 {
        return Err(WalkError::LoopUnion(union_size));
    }
    let base = WalkState {
        end: u,
        colors: ColorSet::new(csg.t),
        x: 0,
        y: 0,
        len: 0,
    };
    let mut table = WalkTable {
        start: u,
        states: vec![base.clone()],
        parent: vec![None],
        index: HashMap::from([(base, 0)]),
        by_end: BTreeMap::from([(u, vec![0])]),
    };
    let mut frontier = 0..1;
    for _ in 0..max_len {
        let layer_end = table.states.len();
        for id in frontier.clone() {
            let s = table.states[id].clone();
            for &e in csg.incident(s.end) {
                let c = &csg.edge_colors[e];
                if !c.is_disjoint(&s.colors) {
                    continue;
                }
                let edge = &csg.sg.edges[e];
                let next = WalkState {
                    end: edge.opposite(s.end),
                    colors: s.colors.union(c),
                    x: s.x | mask_of(&edge.u, loop_u),
                    y: s.y | mask_of(&edge.w, loop_w),
                    len: s.len + 1,
                };
                if table.index.contains_key(&next) {
                    continue;
                }
                if table.states.len() >= MAX_WALK_STATES {
                    return Err(WalkError::StateBudget);
                }
                let nid = table.states.len();
                table.by_end.entry(next.end).or_default().push(nid);
                table.index.insert(next.clone(), nid);
                table.states.push(next);
                table.parent.push(Some((id, e)));
            }
        }
        if table.states.len() == layer_end {
            break;
        }
        frontier = layer_end..table.states.len();
    }
    Ok(table)
}

/// Per-`L` context: the loop unions and lazily built walk tables.
struct LoopContext<'c, 'a> {
    csg: &'c ColorfulSearchGraph<'a>,
    colors: &'c [ColorSet],
    g: &'c ConflictGraph,
    loops: Vec<usize>,
    loop_u: Vec<Vertex>,
    loop_w: Vec<Vertex>,
    max_len: usize,
    tables: BTreeMap<Vertex, WalkTable>,
}

impl LoopContext<'_, '_> {
    fn table(&mut self, v: Vertex) -> Option<&WalkTable> {
        if !self.tables.contains_key(&v) {
            let t = compute_walks(self.csg, &self.loop_u, &self.loop_w, v, self.max_len).ok()?;
            self.tables.insert(v, t);
        }
        self.tables.get(&v)
    }

    /// Checks the structure clauses for the walks `parts` (table start, state
    /// id) and returns the assembled binocular if all of them hold.
    fn assemble(&self, parts: &[(Vertex, usize)]) -> Option<LabeledBinocular> {
        let t = self.csg.t;
        let mut c = ColorSet::new(t);
        let (mut x, mut y) = (0u64, 0u64);
        for &(start, id) in parts {
            let s = self.tables[&start].state(id);
            if !c.is_disjoint(&s.colors) {
                return None;
            }
            c.union_with(&s.colors);
            x |= s.x;
            y |= s.y;
        }
        let rest_w: Vec<Vertex> = self
            .loop_w
            .iter()
            .enumerate()
            .filter(|(i, _)| y >> i & 1 == 0)
            .map(|(_, &v)| v)
            .collect();
        let rest_u: Vec<Vertex> = self
            .loop_u
            .iter()
            .enumerate()
            .filter(|(i, _)| x >> i & 1 == 0)
            .map(|(_, &v)| v)
            .collect();
        let rest_colors: Vec<&ColorSet> = rest_w.iter().map(|&v| &self.colors[v]).collect();
        if rest_colors.iter().any(|rc| !rc.is_disjoint(&c)) {
            return None;
        }
        let needed = self.g.weight_of(&rest_u) + 2 * self.loops.len() as u32;
        if self.g.weight_of(&rest_w) < needed {
            return None;
        }
        if !pairwise_disjoint(rest_colors.into_iter(), t) {
            return None;
        }
        let mut ids = self.loops.clone();
        for &(start, id) in parts {
            ids.extend(self.tables[&start].walk(id));
        }
        let b = LabeledBinocular::new(self.csg.sg, ids).ok()?;
        is_improving_binocular(&b, self.g).then_some(b)
    }
}

fn union_of(sets: impl Iterator<Item = Vec<Vertex>>) -> Vec<Vertex> {
    let mut out: Vec<Vertex> = sets.flatten().collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Looks for a colorful binocular built from at most two loops and at most
/// three walks of length at most `max_len`, following the four structural
/// shapes of colorful minimal binoculars.
pub fn find_colorful_binocular(
    csg: &ColorfulSearchGraph<'_>,
    colors: &[ColorSet],
    g: &ConflictGraph,
    max_len: usize,
) -> Option<LabeledBinocular> {
    let loops = csg.loops();
    let mut choices: Vec<Vec<usize>> = vec![Vec::new()];
    choices.extend(loops.iter().map(|&l| vec![l]));
    for (i, &a) in loops.iter().enumerate() {
        for &b in &loops[i + 1..] {
            choices.push(vec![a, b]);
        }
    }
    let vertices = &csg.sg.vertices;
    for l in choices {
        let edges = &csg.sg.edges;
        let mut cx = LoopContext {
            csg,
            colors,
            g,
            loop_u: union_of(l.iter().map(|&i| edges[i].u.clone())),
            loop_w: union_of(l.iter().map(|&i| edges[i].w.clone())),
            loops: l.clone(),
            max_len,
            tables: BTreeMap::new(),
        };
        let found = match l.as_slice() {
            [a, b] => two_loops(&mut cx, edges[*a].ends[0], edges[*b].ends[0]),
            [a] => one_loop(&mut cx, edges[*a].ends[0], vertices),
            _ => no_loops(&mut cx, vertices),
        };
        if found.is_some() {
            return found;
        }
    }
    None
}

fn two_loops(cx: &mut LoopContext<'_, '_>, u: Vertex, v: Vertex) -> Option<LabeledBinocular> {
    let ids = cx.table(u)?.ending_at(v).to_vec();
    ids.into_iter().find_map(|p| cx.assemble(&[(u, p)]))
}

fn one_loop(cx: &mut LoopContext<'_, '_>, u: Vertex, vertices: &[Vertex]) -> Option<LabeledBinocular> {
    for &v in vertices {
        let paths = cx.table(u)?.ending_at(v).to_vec();
        if paths.is_empty() {
            continue;
        }
        let t = cx.table(v)?;
        let cycles: Vec<usize> = t
            .ending_at(v)
            .iter()
            .copied()
            .filter(|&c| t.state(c).len >= 2)
            .collect();
        for &p in &paths {
            for &c in &cycles {
                if let Some(b) = cx.assemble(&[(u, p), (v, c)]) {
                    return Some(b);
                }
            }
        }
    }
    None
}

fn closed_walks(cx: &mut LoopContext<'_, '_>, v: Vertex) -> Option<Vec<usize>> {
    let t = cx.table(v)?;
    Some(
        t.ending_at(v)
            .iter()
            .copied()
            .filter(|&c| t.state(c).len >= 2)
            .collect(),
    )
}

fn no_loops(cx: &mut LoopContext<'_, '_>, vertices: &[Vertex]) -> Option<LabeledBinocular> {
    for (i, &u) in vertices.iter().enumerate() {
        let cu = closed_walks(cx, u)?;
        for &v in &vertices[i..] {
            let paths: Vec<usize> = cx.table(u)?.ending_at(v).to_vec();
            if u != v {
                // Three u-v walks.
                let tu = &cx.tables[&u];
                for (a, &p1) in paths.iter().enumerate() {
                    for (b, &p2) in paths.iter().enumerate().skip(a + 1) {
                        if !tu.state(p1).colors.is_disjoint(&tu.state(p2).colors) {
                            continue;
                        }
                        for &p3 in &paths[b + 1..] {
                            if let Some(bin) = cx.assemble(&[(u, p1), (u, p2), (u, p3)]) {
                                return Some(bin);
                            }
                        }
                    }
                }
            }
            // Two closed walks joined by a walk.
            if cu.is_empty() {
                continue;
            }
            let cv = closed_walks(cx, v)?;
            for &c1 in &cu {
                for &c2 in &cv {
                    if u == v && c2 <= c1 {
                        continue;
                    }
                    for &p in &paths {
                        if let Some(bin) = cx.assemble(&[(u, c1), (v, c2), (u, p)]) {
                            return Some(bin);
                        }
                    }
                }
            }
        }
    }
    None
}

/// Tries `coloring_reps` colorings (or one injective coloring) and returns
/// the colorful binocular of the lowest-indexed successful coloring, which is always improving.
pub fn search_improving_binocular(
    sg: &SearchGraph,
    g: &ConflictGraph,
    a: &Packing,
    instance: &Instance,
    params: &SearchParams,
) -> Option<LabeledBinocular> {
    debug_assert!(a.is_valid(g));
    if sg.edges.len() < 2 {
        return None;
    }
    let n = g.len();
    let t = params.t_override.unwrap_or_else(|| default_t(params.tau, n));
    let max_len = walk_length_cap(params.tau, n).min(MAX_WALK_LEN);
    let colorings = make_colorings(
        instance.universe_size(),
        t,
        params.coloring_reps,
        params.seed,
        params.injective_colorings,
    );
    // Lowest coloring index wins, whatever the scheduling.
    colorings.par_iter().find_map_first(|f| {
        let colors = vertex_colors(instance, f);
        let csg = colorful_subgraph(sg, &colors);
        let b = find_colorful_binocular(&csg, &colors, g, max_len)?;
        assert!(is_improving_binocular(&b, g), "colorful binocular not improving");
        Some(b)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search_graph::{enumerate_search_edges, SearchEdge};
    use crate::local_search::PairMode;
    use std::collections::BTreeSet;

    fn cs(t: usize, cs: &[usize]) -> ColorSet {
        let mut s = ColorSet::new(t);
        for &c in cs {
            s.insert(c);
        }
        s
    }

    #[test]
    fn color_set_operations() {
        let a = cs(130, &[0, 64, 129]);
        let b = cs(130, &[1, 65]);
        assert!(a.is_disjoint(&b));
        assert_eq!(a.union(&b).len(), 5);
        assert!(!a.is_disjoint(&cs(130, &[129])));
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert!(ColorSet::new(3).is_empty());
    }

    #[test]
    fn colorings_are_reproducible_and_injective_mode_is_identity() {
        assert_eq!(make_colorings(20, 5, 3, 9, false), make_colorings(20, 5, 3, 9, false));
        assert_ne!(make_colorings(20, 5, 3, 9, false), make_colorings(20, 5, 3, 10, false));
        let inj = make_colorings(7, 2, 5, 0, true);
        assert_eq!(inj.len(), 1);
        assert!(inj[0].is_injective());
        assert_eq!(inj[0].t(), 7);
    }

    #[test]
    fn repetitions_for_six_element_target() {
        let p: f64 = (1..=6).product::<u64>() as f64 / 6f64.powi(6);
        let expected = (0.01f64.ln() / (1.0 - p).ln()).ceil() as usize;
        assert_eq!(reps_for_confidence(6, 6, 0.01), expected);
        assert_eq!(expected, 297);
    }

    #[test]
    fn default_sizes() {
        assert_eq!(default_t(4, 8), 144);
        assert_eq!(default_t(4, 1), 1);
        assert_eq!(walk_length_cap(4, 8), 12);
        assert_eq!(walk_length_cap(3, 1), 1);
    }

    fn edge(ends: [Vertex; 2], u: &[Vertex], w: &[Vertex]) -> SearchEdge {
        SearchEdge {
            ends,
            u: u.to_vec(),
            w: w.to_vec(),
        }
    }

    fn graph(vertices: Vec<Vertex>, edges: Vec<SearchEdge>) -> SearchGraph {
        SearchGraph { vertices, edges }
    }

    #[test]
    fn colorful_subgraph_filters_edges() {
        // Vertex colors: 2 and 3 share color 1, 4 is separate.
        let colors = vec![cs(4, &[0]), cs(4, &[0]), cs(4, &[1]), cs(4, &[1, 2]), cs(4, &[3])];
        let sg = graph(
            vec![0, 1],
            vec![edge([0, 1], &[], &[2, 3]), edge([0, 1], &[], &[2, 4]), edge([0, 0], &[], &[3])],
        );
        let csg = colorful_subgraph(&sg, &colors);
        assert_eq!(csg.kept, vec![1, 2]);
        assert_eq!(csg.loops(), vec![2]);
        assert_eq!(csg.incident(0), &[1]);
    }

    #[test]
    fn walk_base_and_single_step() {
        let colors = vec![cs(4, &[]), cs(4, &[]), cs(4, &[2])];
        let sg = graph(vec![0, 1], vec![edge([0, 1], &[], &[2])]);
        let csg = colorful_subgraph(&sg, &colors);
        let t = compute_walks(&csg, &[], &[], 0, 3).unwrap();
        let base = WalkState {
            end: 0,
            colors: cs(4, &[]),
            x: 0,
            y: 0,
            len: 0,
        };
        assert!(t.contains(&base));
        assert!(!t.contains(&WalkState { end: 1, ..base.clone() }));
        assert!(t.contains(&WalkState {
            end: 1,
            colors: cs(4, &[2]),
            len: 1,
            ..base
        }));
        // The single edge cannot be reused.
        assert_eq!(t.states().len(), 2);
        assert!(matches!(compute_walks(&csg, &[], &[], 0, 65), Err(WalkError::LengthBudget(65))));
    }

    #[test]
    fn parallel_edges_with_equal_colors_do_not_close() {
        let colors = vec![cs(4, &[]), cs(4, &[]), cs(4, &[1]), cs(4, &[1])];
        let sg = graph(vec![0, 1], vec![edge([0, 1], &[], &[2]), edge([0, 1], &[], &[3])]);
        let csg = colorful_subgraph(&sg, &colors);
        let t = compute_walks(&csg, &[], &[], 0, 4).unwrap();
        assert!(t.states().iter().all(|s| s.len <= 1));
    }

    /// Brute force: every colorful loop-free walk from `u`, reduced to keys.
    fn brute_walks(
        csg: &ColorfulSearchGraph<'_>,
        lu: &[Vertex],
        lw: &[Vertex],
        u: Vertex,
        max_len: usize,
    ) -> BTreeSet<WalkState> {
        fn rec(
            csg: &ColorfulSearchGraph<'_>,
            lu: &[Vertex],
            lw: &[Vertex],
            walk: &mut Vec<usize>,
            end: Vertex,
            max_len: usize,
            out: &mut BTreeSet<WalkState>,
        ) {
            let mut colors = ColorSet::new(csg.t);
            let (mut x, mut y) = (0, 0);
            for &e in walk.iter() {
                colors.union_with(&csg.edge_colors[e]);
                x |= mask_of(&csg.sg.edges[e].u, lu);
                y |= mask_of(&csg.sg.edges[e].w, lw);
            }
            out.insert(WalkState {
                end,
                colors,
                x,
                y,
                len: walk.len(),
            });
            if walk.len() == max_len {
                return;
            }
            for &e in csg.incident(end) {
                if pairwise_disjoint(
                    walk.iter().chain(std::iter::once(&e)).map(|&i| &csg.edge_colors[i]),
                    csg.t,
                ) {
                    walk.push(e);
                    rec(csg, lu, lw, walk, csg.sg.edges[e].opposite(end), max_len, out);
                    walk.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        rec(csg, lu, lw, &mut Vec::new(), u, max_len, &mut out);
        out
    }

    #[test]
    fn walk_table_matches_brute_force_and_replays() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let nv = rng.gen_range(2..6);
            let t = 8;
            // Outside vertices nv.. carry one or two colors each.
            let mut colors: Vec<ColorSet> = (0..nv).map(|_| ColorSet::new(t)).collect();
            for _ in 0..8 {
                let mut c = ColorSet::new(t);
                c.insert(rng.gen_range(0..t));
                if rng.gen_bool(0.3) {
                    c.insert(rng.gen_range(0..t));
                }
                colors.push(c);
            }
            let edges: Vec<SearchEdge> = (0..rng.gen_range(1..10))
                .map(|_| {
                    let a = rng.gen_range(0..nv);
                    let b = rng.gen_range(0..nv);
                    let w = vec![nv + rng.gen_range(0..8)];
                    let u = if rng.gen_bool(0.5) { vec![rng.gen_range(0..nv)] } else { vec![] };
                    edge([a.min(b), a.max(b)], &u, &w)
                })
                .collect();
            let sg = graph((0..nv).collect(), edges);
            let csg = colorful_subgraph(&sg, &colors);
            let lu: Vec<Vertex> = vec![0];
            let lw: Vec<Vertex> = vec![nv, nv + 1];
            for u in 0..nv {
                let table = compute_walks(&csg, &lu, &lw, u, 4).unwrap();
                let dp: BTreeSet<WalkState> = table.states().iter().cloned().collect();
                assert_eq!(dp, brute_walks(&csg, &lu, &lw, u, 4));
                for (id, s) in table.states().iter().enumerate() {
                    let walk = table.walk(id);
                    assert_eq!(walk.len(), s.len);
                    let mut at = u;
                    let mut c = ColorSet::new(t);
                    for &e in &walk {
                        at = sg.edges[e].opposite(at);
                        c.union_with(&csg.edge_colors[e]);
                    }
                    assert_eq!((at, c), (s.end, s.colors.clone()));
                }
            }
        }
    }

    fn gadget(outside: &[&[Vertex]]) -> (Instance, ConflictGraph, Packing) {
        // Solution triples a1 = {0,1,2}, a2 = {3,4,5}; each outside triple
        // takes one element from each touched solution set plus fresh ones.
        let mut sets = vec!["0 1 2".to_string(), "3 4 5".to_string()];
        let mut fresh = 100;
        let mut used = [0usize; 2];
        for touches in outside {
            let mut elems = Vec::new();
            for &t in *touches {
                elems.push((t * 3 + used[t]).to_string());
                used[t] += 1;
            }
            while elems.len() < 3 {
                elems.push(fresh.to_string());
                fresh += 1;
            }
            sets.push(elems.join(" "));
        }
        let inst = Instance::parse(&sets.join("\n"), crate::Format::Text).unwrap();
        let g = ConflictGraph::build(&inst);
        (inst, g, Packing::new(vec![0, 1]))
    }

    #[test]
    fn finds_double_loop_with_zero_length_walk() {
        let (inst, g, a) = gadget(&[&[0], &[0]]);
        let sg = enumerate_search_edges(&g, &a, 1, PairMode::Canonical, 16).unwrap();
        let params = SearchParams {
            injective_colorings: true,
            ..SearchParams::with_tau(1)
        };
        let b = search_improving_binocular(&sg, &g, &a, &inst, &params).unwrap();
        assert_eq!(b.e1().count(), 2);
        assert_eq!(b.w_set(), vec![2, 3]);
    }

    #[test]
    fn finds_theta() {
        let (inst, g, a) = gadget(&[&[0, 1], &[0, 1], &[0, 1]]);
        let sg = enumerate_search_edges(&g, &a, 1, PairMode::Canonical, 16).unwrap();
        let params = SearchParams {
            injective_colorings: true,
            ..SearchParams::with_tau(1)
        };
        let b = search_improving_binocular(&sg, &g, &a, &inst, &params).unwrap();
        assert_eq!(b.len(), 3);
        assert!(b.e1().next().is_none());
    }

    #[test]
    fn no_binocular_in_single_edge_graph() {
        let (inst, g, a) = gadget(&[&[0, 1]]);
        let sg = enumerate_search_edges(&g, &a, 2, PairMode::Canonical, 16).unwrap();
        assert!(search_improving_binocular(&sg, &g, &a, &inst, &SearchParams::with_tau(2)).is_none());
        let empty = SearchGraph::default();
        assert!(search_improving_binocular(&empty, &g, &a, &inst, &SearchParams::default()).is_none());
    }
}
