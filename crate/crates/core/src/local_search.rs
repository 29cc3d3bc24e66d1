//! The local-search driver and bounded-size improvement search.
//!
//! A set `X` improves a packing `A` if it is independent and either outweighs
//! its neighborhood `N(X, A)` or ties it while holding more weight-2 sets.
//! [`solve`] applies such improvements (and, in the general mode, improving
//! binoculars) until none of bounded size remains.

use std::collections::BTreeSet;
use std::ops::ControlFlow;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color_coding::search_improving_binocular;
use crate::conflict::{ConflictGraph, Vertex};
use crate::enumerate::{for_each_connected_subset, for_each_subset};
use crate::hereditary::is_hereditary;
use crate::instance::{Instance, SetId};
use crate::search_graph::{enumerate_search_edges, extract_improvement, LabeledBinocular};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LocalSearchError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("instance is not hereditary")]
    NotHereditary,
    #[error("{0:?} is not a local improvement of the current packing")]
    NotAnImprovement(Vec<Vertex>),
    #[error(transparent)]
    SearchGraph(#[from] crate::search_graph::SearchGraphError),
}

/// A pairwise-disjoint sub-collection, stored as sorted vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Packing {
    members: Vec<Vertex>,
}

impl Packing {
    pub fn new(mut members: Vec<Vertex>) -> Self {
        members.sort_unstable();
        members.dedup();
        Packing { members }
    }

    pub fn members(&self) -> &[Vertex] {
        &self.members
    }

    pub fn set_ids(&self) -> Vec<SetId> {
        self.members.iter().map(|&v| SetId(v as u32)).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn weight(&self, g: &ConflictGraph) -> u32 {
        g.weight_of(&self.members)
    }

    pub fn heavy_count(&self, g: &ConflictGraph) -> usize {
        g.heavy_count(&self.members)
    }

    pub fn is_valid(&self, g: &ConflictGraph) -> bool {
        g.is_independent(&self.members)
    }
}

/// A local improvement together with the solution sets it displaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Improvement {
    pub added: Vec<Vertex>,
    pub removed: Vec<Vertex>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Bounded improvements plus the improving-binocular phase.
    General,
    /// Bounded improvements only, with `tau >= 10`.
    Hereditary,
}

/// How edge-inducing pairs are enumerated for the search graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairMode {
    /// `U` is exactly the part of `N(W, A)` outside the edge endpoints.
    Canonical,
    /// `U` ranges over every subset of `A`; tiny instances only.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    pub tau: usize,
    pub mode: Mode,
    pub seed: u64,
    pub coloring_reps: usize,
    pub pair_mode: PairMode,
    /// Use plain subset enumeration instead of grown candidates.
    pub naive_improve: bool,
    /// Number of colors; defaults to `ceil(3 tau^2 log2 |V|)`.
    pub t_override: Option<usize>,
    /// Color the universe injectively (one color per element).
    pub injective_colorings: bool,
    /// Vertex budget above which full pair enumeration is refused.
    pub full_pair_budget: usize,
}

pub const DEFAULT_TAU: usize = 4;
/// Small instances at low tau give colorful-hit rates near 3% per coloring;
/// 256 repetitions keep the miss rate there below 0.1%.
pub const DEFAULT_COLORING_REPS: usize = 256;
pub const HEREDITARY_TAU: usize = 10;

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            tau: DEFAULT_TAU,
            mode: Mode::General,
            seed: 0,
            coloring_reps: DEFAULT_COLORING_REPS,
            pair_mode: PairMode::Canonical,
            naive_improve: false,
            t_override: None,
            injective_colorings: false,
            full_pair_budget: crate::search_graph::DEFAULT_FULL_PAIR_BUDGET,
        }
    }
}

impl SearchParams {
    /// `tau = 4 * ceil(2 / epsilon)` for `epsilon = num / den`.
    pub fn tau_for_epsilon(num: u64, den: u64) -> Result<usize, LocalSearchError> {
        if num == 0 || den == 0 {
            return Err(LocalSearchError::Params(
                "epsilon must be a positive rational".into(),
            ));
        }
        Ok((4 * (2 * den).div_ceil(num)) as usize)
    }

    pub fn with_tau(tau: usize) -> Self {
        SearchParams {
            tau,
            ..SearchParams::default()
        }
    }

    pub fn hereditary(seed: u64) -> Self {
        SearchParams {
            tau: HEREDITARY_TAU,
            mode: Mode::Hereditary,
            seed,
            ..SearchParams::default()
        }
    }

    pub fn validate(&self) -> Result<(), LocalSearchError> {
        if self.tau == 0 {
            return Err(LocalSearchError::Params("tau must be positive".into()));
        }
        if self.coloring_reps == 0 {
            return Err(LocalSearchError::Params(
                "coloring_reps must be positive".into(),
            ));
        }
        if self.mode == Mode::Hereditary && self.tau < HEREDITARY_TAU {
            return Err(LocalSearchError::Params(format!(
                "hereditary mode needs tau >= {HEREDITARY_TAU}"
            )));
        }
        if self.t_override == Some(0) {
            return Err(LocalSearchError::Params("t must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RunStats {
    /// Passes of the main loop that changed the packing.
    pub iterations: u64,
    pub improvements_applied: u64,
    pub binoculars_applied: u64,
    pub final_weight: u32,
    pub wall_ms: u64,
}

impl RunStats {
    /// `2 |V| (|V| + 2)`, the largest admissible iteration count.
    pub fn iteration_bound(vertices: usize) -> u64 {
        let n = vertices as u64;
        2 * n * (n + 2)
    }
}

/// Lexicographic gain `(w(X) - w(N), |X''| - |N''|)`.
fn gain(g: &ConflictGraph, added: &[Vertex], removed: &[Vertex]) -> (i64, i64) {
    (
        g.weight_of(added) as i64 - g.weight_of(removed) as i64,
        g.heavy_count(added) as i64 - g.heavy_count(removed) as i64,
    )
}

pub fn is_local_improvement(g: &ConflictGraph, a: &Packing, x: &[Vertex]) -> bool {
    if x.is_empty() || !g.is_independent(x) {
        return false;
    }
    let removed = g.neighborhood(x, a.members());
    gain(g, x, &removed) > (0, 0)
}

/// Which enumeration [`find_improvement_with`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImprovementSearch {
    /// Connected growth over shared solution neighborhoods.
    Grown,
    /// Every vertex subset up to the size bound.
    Naive,
}

pub fn find_improvement(g: &ConflictGraph, a: &Packing, tau: usize) -> Option<Improvement> {
    find_improvement_with(g, a, tau, ImprovementSearch::Grown)
}

pub fn find_improvement_with(
    g: &ConflictGraph,
    a: &Packing,
    tau: usize,
    search: ImprovementSearch,
) -> Option<Improvement> {
    match search {
        ImprovementSearch::Grown => grown_search(g, a, tau),
        ImprovementSearch::Naive => naive_search(g, a, tau),
    }
}

fn naive_search(g: &ConflictGraph, a: &Packing, tau: usize) -> Option<Improvement> {
    let all: Vec<Vertex> = (0..g.len()).collect();
    let hit = for_each_subset(&all, tau, |x| {
        if is_local_improvement(g, a, x) {
            ControlFlow::Break(x.to_vec())
        } else {
            ControlFlow::Continue(())
        }
    });
    match hit {
        ControlFlow::Break(added) => {
            let removed = g.neighborhood(&added, a.members());
            Some(Improvement { added, removed })
        }
        ControlFlow::Continue(()) => None,
    }
}

/// A minimal improvement never splits into parts with disjoint solution
/// neighborhoods (one part would already improve), so it suffices to grow
/// candidates that are connected through shared neighbors in `A`.
fn grown_search(g: &ConflictGraph, a: &Packing, tau: usize) -> Option<Improvement> {
    let candidates: Vec<Vertex> = (0..g.len()).filter(|&v| !a.contains(v)).collect();
    let a_nbrs: Vec<Vec<Vertex>> = candidates
        .iter()
        .map(|&v| g.neighborhood(&[v], a.members()))
        .collect();
    if let Some(i) = a_nbrs.iter().position(Vec::is_empty) {
        return Some(Improvement {
            added: vec![candidates[i]],
            removed: Vec::new(),
        });
    }

    // Candidates sharing a solution neighbor, indexed by solution vertex.
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); g.len()];
    for (i, nb) in a_nbrs.iter().enumerate() {
        for &s in nb {
            holders[s].push(i);
        }
    }
    let mut link: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); candidates.len()];
    for list in &holders {
        for (k, &i) in list.iter().enumerate() {
            for &j in &list[k + 1..] {
                if !g.adjacent(candidates[i], candidates[j]) {
                    link[i].insert(j);
                    link[j].insert(i);
                }
            }
        }
    }
    let link: Vec<Vec<usize>> = link.into_iter().map(|s| s.into_iter().collect()).collect();

    let mut removed_buf: Vec<Vertex> = Vec::new();
    let hit = for_each_connected_subset(
        &link,
        tau,
        |cur, j| cur.iter().all(|&i| !g.adjacent(candidates[i], candidates[j])),
        |x| {
            removed_buf.clear();
            for &i in x {
                removed_buf.extend_from_slice(&a_nbrs[i]);
            }
            removed_buf.sort_unstable();
            removed_buf.dedup();
            let added: Vec<Vertex> = x.iter().map(|&i| candidates[i]).collect();
            if gain(g, &added, &removed_buf) > (0, 0) {
                let mut added = added;
                added.sort_unstable();
                ControlFlow::Break(Improvement {
                    added,
                    removed: removed_buf.clone(),
                })
            } else {
                ControlFlow::Continue(())
            }
        },
    );
    match hit {
        ControlFlow::Break(imp) => Some(imp),
        ControlFlow::Continue(()) => None,
    }
}

/// `A \ N(X, A) ∪ X`.
pub fn apply_improvement(
    g: &ConflictGraph,
    a: &Packing,
    x: &[Vertex],
) -> Result<Packing, LocalSearchError> {
    if !is_local_improvement(g, a, x) {
        return Err(LocalSearchError::NotAnImprovement(x.to_vec()));
    }
    let removed = g.neighborhood(x, a.members());
    let mut members: Vec<Vertex> = a
        .members()
        .iter()
        .copied()
        .filter(|v| removed.binary_search(v).is_err())
        .collect();
    members.extend_from_slice(x);
    let next = Packing::new(members);
    debug_assert!(next.is_valid(g));
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Local,
    Binocular,
}

/// One applied change, reported to [`solve_with_observer`] callers.
#[derive(Debug)]
pub struct Step<'a> {
    pub kind: StepKind,
    pub graph: &'a ConflictGraph,
    pub before: &'a Packing,
    pub added: &'a [Vertex],
    pub after: &'a Packing,
    pub binocular: Option<&'a LabeledBinocular>,
}

pub fn solve(
    instance: &Instance,
    params: &SearchParams,
) -> Result<(Packing, RunStats), LocalSearchError> {
    solve_with_observer(instance, params, |_| {})
}

pub fn solve_with_observer(
    instance: &Instance,
    params: &SearchParams,
    mut observer: impl FnMut(&Step<'_>),
) -> Result<(Packing, RunStats), LocalSearchError> {
    params.validate()?;
    if params.mode == Mode::Hereditary && !is_hereditary(instance) {
        return Err(LocalSearchError::NotHereditary);
    }
    let start = Instant::now();
    let g = ConflictGraph::build(instance);
    let search = if params.naive_improve {
        ImprovementSearch::Naive
    } else {
        ImprovementSearch::Grown
    };
    let mut a = Packing::default();
    let mut stats = RunStats::default();
    let mut progress = (0u32, 0usize);
    let mut advance = |after: &Packing| {
        let next = (after.weight(&g), after.heavy_count(&g));
        assert!(next > progress, "local search failed to make progress");
        assert!(after.is_valid(&g), "packing lost independence");
        progress = next;
    };

    loop {
        let mut changed = false;
        if let Some(imp) = find_improvement_with(&g, &a, params.tau, search) {
            let next = apply_improvement(&g, &a, &imp.added)?;
            advance(&next);
            observer(&Step {
                kind: StepKind::Local,
                graph: &g,
                before: &a,
                added: &imp.added,
                after: &next,
                binocular: None,
            });
            a = next;
            stats.improvements_applied += 1;
            changed = true;
        }
        if params.mode == Mode::General {
            let sg = enumerate_search_edges(
                &g,
                &a,
                params.tau,
                params.pair_mode,
                params.full_pair_budget,
            )?;
            let round_seed = params.seed ^ stats.iterations.wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let round = SearchParams {
                seed: round_seed,
                ..params.clone()
            };
            if let Some(b) = search_improving_binocular(&sg, &g, &a, instance, &round) {
                let added = extract_improvement(&b, &g, &a)
                    .expect("an improving binocular always yields a local improvement");
                let next = apply_improvement(&g, &a, &added)?;
                advance(&next);
                observer(&Step {
                    kind: StepKind::Binocular,
                    graph: &g,
                    before: &a,
                    added: &added,
                    after: &next,
                    binocular: Some(&b),
                });
                a = next;
                stats.binoculars_applied += 1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        stats.iterations += 1;
    }

    assert!(
        stats.iterations <= RunStats::iteration_bound(g.len()),
        "iteration bound exceeded: {} > {}",
        stats.iterations,
        RunStats::iteration_bound(g.len())
    );
    stats.final_weight = a.weight(&g);
    stats.wall_ms = start.elapsed().as_millis() as u64;
    Ok((a, stats))
}
