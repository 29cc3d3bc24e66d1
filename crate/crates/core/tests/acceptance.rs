//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p setpack --test acceptance`. Reference values are
//! recomputed here by brute force rather than taken from the library.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use setpack::binocular::{
    all_minimal_binoculars, berman_furer_bound, berman_furer_witness, classify_minimal_binocular,
    find_minimal_binocular, naive_improving_binocular, BinocularShape, Multigraph,
};
use setpack::color_coding::{
    colorful_subgraph, compute_walks, search_improving_binocular, ColorSet, ColorfulSearchGraph, WalkState,
};
use setpack::conflict::ConflictGraph;
use setpack::hereditary::{hereditary_closure, solve_hereditary};
use setpack::instance::{generate_3dm, generate_random};
use setpack::local_search::{
    apply_improvement, find_improvement, find_improvement_with, is_local_improvement, solve_with_observer,
    ImprovementSearch, StepKind,
};
use setpack::normalizer::{bookkeeping, check_normalized, normalize, ratio_transfer_holds, AnalysisTuple};
use setpack::oracle::{solve_exact, DEFAULT_ORACLE_BUDGET};
use setpack::search_graph::{enumerate_search_edges, is_improving_binocular, SearchEdge, SearchGraph};
use setpack::{Instance, Packing, PairMode, RunStats, SearchParams};

struct Outcome {
    pass: bool,
    detail: String,
}

/// Facts gathered from every local-search run in the suite.
#[derive(Default)]
struct Campaign {
    runs: usize,
    bound_violations: Vec<String>,
    binocular_steps: usize,
    unsound_steps: Vec<String>,
}

impl Campaign {
    fn solve(&mut self, instance: &Instance, params: &SearchParams, tag: &str) -> (Packing, RunStats) {
        let mut steps = 0;
        let mut unsound = Vec::new();
        let (a, stats) = solve_with_observer(instance, params, |step| {
            if step.kind != StepKind::Binocular {
                return;
            }
            steps += 1;
            let b = step.binocular.expect("binocular steps carry their binocular");
            let sound = is_improving_binocular(b, step.graph)
                && b.w_set() == step.added
                && is_local_improvement(step.graph, step.before, step.added);
            if !sound {
                unsound.push(format!("{tag}: {:?}", step.added));
            }
        })
        .expect("valid parameters");
        self.runs += 1;
        self.binocular_steps += steps;
        self.unsound_steps.extend(unsound);
        let bound = RunStats::iteration_bound(instance.len());
        if stats.iterations > bound {
            self.bound_violations.push(format!("{tag}: {} > {bound}", stats.iterations));
        }
        (a, stats)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn ratio(opt: u32, alg: u32) -> (u64, u64) {
    let (n, d) = (opt as u64, alg.max(1) as u64);
    let g = gcd(n, d).max(1);
    (n / g, d / g)
}

fn criterion_1(c: &mut Campaign) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut failures = Vec::new();
    let mut worst = (0u64, 1u64);
    let mut total_sets = 0;
    let count: usize = 200;
    for i in 0..count {
        let universe = rng.gen_range(9..=15);
        let triples = rng.gen_range(5..=10);
        let base = generate_random(universe, triples, 1.0, rng.gen()).unwrap();
        let closed = hereditary_closure(&base);
        total_sets += closed.instance().len();
        let (a, stats) = solve_hereditary(&closed, i as u64).unwrap();
        let bound = RunStats::iteration_bound(closed.instance().len());
        if stats.iterations > bound {
            c.bound_violations.push(format!("hereditary #{i}"));
        }
        c.runs += 1;
        let g = ConflictGraph::build(closed.instance());
        assert!(a.is_valid(&g));
        let alg = a.weight(&g);
        let opt = solve_exact(closed.instance(), DEFAULT_ORACLE_BUDGET).unwrap().optimum_weight;
        if 3 * opt > 4 * alg {
            failures.push(format!("#{i}: opt {opt}, alg {alg}"));
        }
        let r = ratio(opt, alg);
        if r.0 * worst.1 > worst.0 * r.1 {
            worst = r;
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!(
            "{}/{count} instances satisfy 3*OPT <= 4*ALG (avg {} sets, worst OPT/ALG = {}/{}){}",
            count - failures.len(),
            total_sets / count,
            worst.0,
            worst.1,
            list(&failures)
        ),
    }
}

fn list(items: &[String]) -> String {
    if items.is_empty() {
        String::new()
    } else {
        format!("; failures: {}", items.iter().take(5).cloned().collect::<Vec<_>>().join(", "))
    }
}

fn any_local_improvement(g: &ConflictGraph, a: &Packing) -> bool {
    let outside: Vec<usize> = (0..g.len()).filter(|v| !a.contains(*v)).collect();
    (1u32..1 << outside.len()).any(|mask| {
        let x: Vec<usize> = (0..outside.len()).filter(|j| mask >> j & 1 == 1).map(|j| outside[j]).collect();
        is_local_improvement(g, a, &x)
    })
}

fn criterion_2(c: &mut Campaign) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut failures = Vec::new();
    let mut worst = (1u64, 1u64);
    let mut fallback = 0;
    let count: usize = 100;
    for i in 0..count {
        let part = rng.gen_range(3..=4);
        let m = rng.gen_range(6..=12);
        let inst = generate_3dm(part, m, rng.gen()).unwrap();
        let params = SearchParams {
            seed: i as u64,
            ..SearchParams::with_tau(8)
        };
        let (a, _) = c.solve(&inst, &params, &format!("3dm #{i}"));
        let g = ConflictGraph::build(&inst);
        let alg = a.weight(&g);
        let opt = solve_exact(&inst, DEFAULT_ORACLE_BUDGET).unwrap().optimum_weight;
        if find_improvement(&g, &a, 8).is_some() {
            failures.push(format!("#{i}: improvement left"));
        }
        // Any improving binocular yields a local improvement, so the absence
        // of improvements of every size rules binoculars out as well.
        if any_local_improvement(&g, &a) {
            fallback += 1;
            match enumerate_search_edges(&g, &a, 8, PairMode::Canonical, 16) {
                Ok(sg) => match naive_improving_binocular(&sg, &g, &a, 8) {
                    Ok(None) => {}
                    Ok(Some(_)) => failures.push(format!("#{i}: improving binocular left")),
                    Err(e) => failures.push(format!("#{i}: {e}")),
                },
                Err(e) => failures.push(format!("#{i}: {e}")),
            }
        }
        if 3 * opt > 5 * alg {
            failures.push(format!("#{i}: opt {opt}, alg {alg}"));
        }
        let r = ratio(opt, alg);
        if r.0 * worst.1 > worst.0 * r.1 {
            worst = r;
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!(
            "{}/{count} 3DM instances within 5/3 at tau = 8, empirical worst OPT/ALG = {}/{}, {fallback} needed the 8-edge binocular scan{}",
            count - failures.len(),
            worst.0,
            worst.1,
            list(&failures)
        ),
    }
}

/// Small-tau general runs on random instances, so that binoculars actually
/// get applied.
fn binocular_campaign(c: &mut Campaign) {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for i in 0..150 {
        let inst = if i % 2 == 0 {
            generate_3dm(rng.gen_range(3..=5), rng.gen_range(8..=16), rng.gen()).unwrap()
        } else {
            generate_random(rng.gen_range(9..=18), rng.gen_range(8..=18), 0.8, rng.gen()).unwrap()
        };
        let params = SearchParams {
            seed: i as u64,
            injective_colorings: i % 3 == 0,
            ..SearchParams::with_tau(rng.gen_range(1..=2))
        };
        c.solve(&inst, &params, &format!("campaign #{i}"));
    }
}

fn criterion_3(c: &Campaign) -> Outcome {
    Outcome {
        pass: c.unsound_steps.is_empty() && c.binocular_steps > 0,
        detail: format!(
            "{} binocular steps over {} runs, {} failed the local-improvement recheck{}",
            c.binocular_steps,
            c.runs,
            c.unsound_steps.len(),
            list(&c.unsound_steps)
        ),
    }
}

fn mask(items: &[usize], within: &[usize]) -> u64 {
    items
        .iter()
        .filter_map(|v| within.iter().position(|w| w == v))
        .fold(0, |m, i| m | 1 << i)
}

fn brute_walks(
    csg: &ColorfulSearchGraph<'_>,
    t: usize,
    lu: &[usize],
    lw: &[usize],
    u: usize,
    max_len: usize,
) -> BTreeSet<WalkState> {
    let sg = csg.sg;
    let non_loops: Vec<usize> = csg.kept.iter().copied().filter(|&e| !sg.edges[e].is_loop()).collect();
    let mut out = BTreeSet::new();
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(u, Vec::new())];
    while let Some((end, walk)) = stack.pop() {
        let mut colors = ColorSet::new(t);
        let (mut x, mut y) = (0, 0);
        for &e in &walk {
            colors.union_with(&csg.edge_colors[e]);
            x |= mask(&sg.edges[e].u, lu);
            y |= mask(&sg.edges[e].w, lw);
        }
        out.insert(WalkState {
            end,
            colors: colors.clone(),
            x,
            y,
            len: walk.len(),
        });
        if walk.len() == max_len {
            continue;
        }
        for &e in &non_loops {
            let edge = &sg.edges[e];
            if !edge.ends.contains(&end) || !csg.edge_colors[e].is_disjoint(&colors) {
                continue;
            }
            let next = if edge.ends[0] == end { edge.ends[1] } else { edge.ends[0] };
            let mut w = walk.clone();
            w.push(e);
            stack.push((next, w));
        }
    }
    out
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (mut keys, mut mismatches, mut replay_failures) = (0usize, Vec::new(), 0usize);
    let count = 100;
    let t = 12;
    for i in 0..count {
        let nv = rng.gen_range(2..=8);
        let outside = 10;
        let mut colors: Vec<ColorSet> = (0..nv).map(|_| ColorSet::new(t)).collect();
        for _ in 0..outside {
            let mut c = ColorSet::new(t);
            for _ in 0..rng.gen_range(1..=2) {
                c.insert(rng.gen_range(0..t));
            }
            colors.push(c);
        }
        let m = rng.gen_range(1..=14);
        let edges: Vec<SearchEdge> = (0..m)
            .map(|_| {
                let a = rng.gen_range(0..nv);
                let b = if rng.gen_bool(0.15) { a } else { rng.gen_range(0..nv) };
                let mut w: Vec<usize> = (0..rng.gen_range(1..=2)).map(|_| nv + rng.gen_range(0..outside)).collect();
                w.sort_unstable();
                w.dedup();
                let mut u: Vec<usize> = (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..nv)).collect();
                u.sort_unstable();
                u.dedup();
                SearchEdge {
                    ends: [a.min(b), a.max(b)],
                    u,
                    w,
                }
            })
            .collect();
        let sg = SearchGraph {
            vertices: (0..nv).collect(),
            edges,
        };
        let csg = colorful_subgraph(&sg, &colors);
        let mut lu: Vec<usize> = (0..nv).filter(|_| rng.gen_bool(0.3)).collect();
        lu.truncate(4);
        let lw: Vec<usize> = (nv..nv + outside).filter(|_| rng.gen_bool(0.3)).take(4).collect();
        for u in 0..nv {
            let table = compute_walks(&csg, &lu, &lw, u, 6).unwrap();
            let dp: BTreeSet<WalkState> = table.states().iter().cloned().collect();
            let brute = brute_walks(&csg, t, &lu, &lw, u, 6);
            keys += brute.len();
            if dp != brute {
                mismatches.push(format!("graph #{i} from {u}"));
            }
            for (id, s) in table.states().iter().enumerate() {
                let walk = table.walk(id);
                let mut at = u;
                let mut c = ColorSet::new(t);
                let (mut x, mut y) = (0, 0);
                let mut ok = walk.len() == s.len;
                for &e in &walk {
                    let edge = &sg.edges[e];
                    ok &= edge.ends.contains(&at) && c.is_disjoint(&csg.edge_colors[e]);
                    at = if edge.ends[0] == at { edge.ends[1] } else { edge.ends[0] };
                    c.union_with(&csg.edge_colors[e]);
                    x |= mask(&edge.u, &lu);
                    y |= mask(&edge.w, &lw);
                }
                if !ok || (at, c, x, y) != (s.end, s.colors.clone(), s.x, s.y) {
                    replay_failures += 1;
                }
            }
        }
    }
    Outcome {
        pass: mismatches.is_empty() && replay_failures == 0,
        detail: format!(
            "{count} random search graphs, {keys} reachable keys, {} table mismatches, {replay_failures} witness replay failures{}",
            mismatches.len(),
            list(&mismatches)
        ),
    }
}

fn random_multigraph(rng: &mut ChaCha8Rng, max_v: usize, max_e: usize) -> Multigraph {
    let n = rng.gen_range(1..=max_v);
    let m = rng.gen_range(1..=max_e);
    let edges = (0..m)
        .map(|_| {
            let a = rng.gen_range(0..n);
            let b = if rng.gen_bool(0.15) { a } else { rng.gen_range(0..n) };
            [a.min(b), a.max(b)]
        })
        .collect();
    Multigraph::new((0..n).collect(), edges)
}

fn spanned(edges: &[[usize; 2]]) -> (usize, usize) {
    let vs: BTreeSet<usize> = edges.iter().flatten().copied().collect();
    (edges.len(), vs.len())
}

fn connected(edges: &[[usize; 2]]) -> bool {
    let vs: BTreeSet<usize> = edges.iter().flatten().copied().collect();
    let Some(&first) = vs.iter().next() else {
        return true;
    };
    let mut seen = BTreeSet::from([first]);
    let mut grew = true;
    while grew {
        grew = false;
        for e in edges {
            if seen.contains(&e[0]) != seen.contains(&e[1]) {
                seen.insert(e[0]);
                seen.insert(e[1]);
                grew = true;
            }
        }
    }
    seen.len() == vs.len()
}

/// Follows `walk` from `start`; returns the end vertex if consecutive edges
/// meet.
fn follow(edges: &[[usize; 2]], start: usize, walk: &[usize]) -> Option<usize> {
    let mut at = start;
    for &e in walk {
        let [a, b] = edges[e];
        at = if a == at {
            b
        } else if b == at {
            a
        } else {
            return None;
        };
    }
    Some(at)
}

fn shape_is_valid(b: &Multigraph, shape: &BinocularShape) -> bool {
    let e = b.edges();
    let mut all: Vec<usize> = shape.parts().concat();
    all.sort_unstable();
    if all != (0..e.len()).collect::<Vec<_>>() {
        return false;
    }
    match shape {
        BinocularShape::TwoCyclesAndPath {
            u,
            v,
            cycle_u,
            cycle_v,
            path,
        } => {
            !cycle_u.is_empty()
                && !cycle_v.is_empty()
                && follow(e, *u, cycle_u) == Some(*u)
                && follow(e, *v, cycle_v) == Some(*v)
                && follow(e, *u, path) == Some(*v)
        }
        BinocularShape::ThreePaths { u, v, paths } => {
            u != v && paths.iter().all(|p| follow(e, *u, p) == Some(*v))
        }
    }
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let (mut minimal_total, mut failures) = (0usize, Vec::new());
    let count = 200;
    for i in 0..count {
        let h = random_multigraph(&mut rng, 7, 10);
        let edges = h.edges();
        let m = edges.len();
        // Brute force: all edge subsets with more edges than spanned vertices.
        let bino: Vec<u32> = (1u32..1 << m)
            .filter(|&mask| {
                let sub: Vec<[usize; 2]> = (0..m).filter(|j| mask >> j & 1 == 1).map(|j| edges[j]).collect();
                let (ne, nv) = spanned(&sub);
                ne > nv
            })
            .collect();
        let minimal: BTreeSet<u32> = bino
            .iter()
            .copied()
            .filter(|&x| !bino.iter().any(|&y| y != x && y & x == y))
            .collect();
        let from_lib: BTreeSet<u32> = all_minimal_binoculars(&h)
            .iter()
            .map(|ids| ids.iter().fold(0, |acc, &j| acc | 1 << j))
            .collect();
        if minimal != from_lib {
            failures.push(format!("#{i}: minimal sets differ"));
        }
        if find_minimal_binocular(&h, m).is_some() != !bino.is_empty() {
            failures.push(format!("#{i}: search disagrees with scan"));
        }
        for &x in &minimal {
            minimal_total += 1;
            let ids: Vec<usize> = (0..m).filter(|j| x >> j & 1 == 1).collect();
            let sub = h.edge_subgraph(&ids);
            let (ne, nv) = spanned(sub.edges());
            if ne != nv + 1 || !connected(sub.edges()) {
                failures.push(format!("#{i}: {ids:?} has |E| = {ne}, |V| = {nv}"));
                continue;
            }
            match classify_minimal_binocular(&sub) {
                Ok(shape) if shape_is_valid(&sub, &shape) => {}
                other => failures.push(format!("#{i}: {ids:?} classified as {other:?}")),
            }
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!(
            "{count} multigraphs, {minimal_total} minimal binoculars, all connected with |E| = |V| + 1 and exactly decomposed: {}{}",
            failures.is_empty(),
            list(&failures)
        ),
    }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let count = 100;
    for i in 0..count {
        let s: usize = rng.gen_range(1..=3);
        let n: usize = rng.gen_range(2..=12);
        let m = ((s + 1) * n).div_ceil(s) + rng.gen_range(0..=2);
        let edges: Vec<[usize; 2]> = (0..m)
            .map(|_| loop {
                let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                if a != b || n == 1 {
                    break [a.min(b), a.max(b)];
                }
            })
            .collect();
        let h = Multigraph::new((0..n).collect(), edges.clone());
        let bound = berman_furer_bound(s, n);
        match berman_furer_witness(&h, s) {
            Ok(w) => {
                let mut pool = edges.clone();
                let subgraph = w.edges().iter().all(|e| match pool.iter().position(|p| p == e) {
                    Some(p) => {
                        pool.swap_remove(p);
                        true
                    }
                    None => false,
                });
                let size = w.edges().len();
                worst = worst.max(size as f64 / bound);
                if !subgraph || size <= w.vertices().len() || size as f64 > bound {
                    failures.push(format!("#{i}: size {size}, bound {bound:.1}"));
                }
            }
            Err(e) => failures.push(format!("#{i}: {e}")),
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!(
            "{}/{count} dense multigraphs yield a binocular within 4*s*log2|V| (largest size/bound = {worst:.2}){}",
            count - failures.len(),
            list(&failures)
        ),
    }
}

/// Packing that admits no improvement of size at most `tau`.
fn local_optimum(g: &ConflictGraph, tau: usize) -> Packing {
    let mut a = Packing::default();
    while let Some(imp) = find_improvement(g, &a, tau) {
        a = apply_improvement(g, &a, &imp.added).unwrap();
    }
    a
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut qualifying = 0;
    let mut worst_random = 100;
    let mut injective_failures = Vec::new();
    let mut random_failures = Vec::new();
    let mut tried = 0;
    while qualifying < 50 && tried < 5000 {
        tried += 1;
        let tau = rng.gen_range(1..=2);
        let inst = generate_3dm(rng.gen_range(3..=5), rng.gen_range(6..=14), rng.gen()).unwrap();
        let g = ConflictGraph::build(&inst);
        let a = local_optimum(&g, tau);
        let sg = enumerate_search_edges(&g, &a, tau, PairMode::Canonical, 16).unwrap();
        if naive_improving_binocular(&sg, &g, &a, 4).unwrap().is_none() {
            continue;
        }
        qualifying += 1;
        let base = SearchParams::with_tau(tau);
        let successes = (0..100)
            .filter(|&trial| {
                let params = SearchParams {
                    seed: trial,
                    ..base.clone()
                };
                search_improving_binocular(&sg, &g, &a, &inst, &params).is_some()
            })
            .count();
        worst_random = worst_random.min(successes);
        if successes < 99 {
            random_failures.push(format!("instance {qualifying}: {successes}/100"));
        }
        let injective = SearchParams {
            injective_colorings: true,
            ..base
        };
        if search_improving_binocular(&sg, &g, &a, &inst, &injective).is_none() {
            injective_failures.push(format!("instance {qualifying}"));
        }
    }
    let mut failures = random_failures.clone();
    failures.extend(injective_failures.iter().map(|f| format!("injective {f}")));
    Outcome {
        pass: qualifying == 50 && failures.is_empty(),
        detail: format!(
            "{qualifying} qualifying instances; worst random success {worst_random}/100 trials, injective success {}/{qualifying}{}",
            qualifying - injective_failures.len(),
            list(&failures)
        ),
    }
}

fn criterion_8(c: &Campaign) -> Outcome {
    Outcome {
        pass: c.bound_violations.is_empty(),
        detail: format!(
            "{} solves, {} exceeded 2|V|(|V|+2) iterations{}",
            c.runs,
            c.bound_violations.len(),
            list(&c.bound_violations)
        ),
    }
}

fn random_independent(g: &ConflictGraph, rng: &mut ChaCha8Rng, keep: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.shuffle(rng);
    let mut set: Vec<usize> = Vec::new();
    for v in order {
        if set.iter().all(|&u| !g.adjacent(u, v)) && rng.gen_bool(keep) {
            set.push(v);
        }
    }
    set.sort_unstable();
    set
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut failures = Vec::new();
    let (mut paths, mut deleted, mut bridges) = (0, 0, 0);
    let count = 500;
    for i in 0..count {
        let inst = generate_random(rng.gen_range(8..=18), rng.gen_range(5..=18), rng.gen_range(0.0..=1.0), rng.gen()).unwrap();
        let g = ConflictGraph::build(&inst);
        let t = AnalysisTuple {
            weights: g.weights().to_vec(),
            edges: g.edges().map(|(u, v)| [u, v]).collect(),
            a: random_independent(&g, &mut rng, 1.0),
            b: random_independent(&g, &mut rng, if i % 4 == 0 { 0.7 } else { 1.0 }),
        };
        let n = match normalize(&t) {
            Ok(n) => n,
            Err(e) => {
                failures.push(format!("#{i}: {e}"));
                continue;
            }
        };
        paths += n.certificate.paths.len();
        deleted += n.certificate.deleted.len();
        bridges += n.certificate.paths.iter().filter(|p| p.bridge.is_some()).count();
        let violations = check_normalized(&n);
        if !violations.is_empty() {
            failures.push(format!("#{i}: {violations:?}"));
        }
        if !ratio_transfer_holds(&t, &n.tuple) {
            failures.push(format!("#{i}: ratio transfer"));
        }
        let bk = bookkeeping(&t, &n);
        if !bk.holds() {
            failures.push(format!("#{i}: {bk:?}"));
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!(
            "{}/{count} tuples normalized cleanly ({deleted} deletions, {paths} paths, {bridges} bridges){}",
            count - failures.len(),
            list(&failures)
        ),
    }
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut failures = Vec::new();
    let mut with_improvement = 0;
    let count = 300;
    for i in 0..count {
        let inst = generate_random(rng.gen_range(6..=12), rng.gen_range(3..=12), rng.gen_range(0.0..=1.0), rng.gen()).unwrap();
        let g = ConflictGraph::build(&inst);
        let tau = rng.gen_range(1..=4);
        let a = match i % 3 {
            0 => local_optimum(&g, rng.gen_range(1..=tau)),
            _ => Packing::new(random_independent(&g, &mut rng, 0.6)),
        };
        let grown = find_improvement_with(&g, &a, tau, ImprovementSearch::Grown);
        let naive = find_improvement_with(&g, &a, tau, ImprovementSearch::Naive);
        if naive.is_some() {
            with_improvement += 1;
        }
        if grown.is_some() != naive.is_some() {
            failures.push(format!("#{i}: grown {:?}, naive {:?}", grown.is_some(), naive.is_some()));
        }
        if let Some(imp) = grown {
            if imp.added.len() > tau || !is_local_improvement(&g, &a, &imp.added) {
                failures.push(format!("#{i}: invalid grown result"));
            }
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!(
            "{}/{count} agree ({with_improvement} with an improvement){}",
            count - failures.len(),
            list(&failures)
        ),
    }
}

fn main() -> ExitCode {
    let names = [
        "hereditary 4/3 guarantee",
        "3DM embedding within 5/3",
        "binocular steps are local improvements",
        "walk table equals brute force",
        "minimal binocular structure",
        "Berman-Furer witness size",
        "color-coding completeness",
        "iteration bound",
        "normalizer invariants",
        "grown vs naive improvement search",
    ];
    let mut campaign = Campaign::default();
    let mut results: BTreeMap<usize, (Outcome, f64)> = BTreeMap::new();
    let mut timed = |k: usize, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let out = f();
        results.insert(k, (out, start.elapsed().as_secs_f64()));
    };
    timed(1, &mut || criterion_1(&mut campaign));
    timed(2, &mut || criterion_2(&mut campaign));
    timed(4, &mut criterion_4);
    timed(5, &mut criterion_5);
    timed(6, &mut criterion_6);
    timed(7, &mut criterion_7);
    timed(9, &mut criterion_9);
    timed(10, &mut criterion_10);
    let start = Instant::now();
    binocular_campaign(&mut campaign);
    let campaign_secs = start.elapsed().as_secs_f64();
    results.insert(3, (criterion_3(&campaign), campaign_secs));
    results.insert(8, (criterion_8(&campaign), 0.0));

    let mut all = true;
    for (k, (out, secs)) in &results {
        all &= out.pass;
        println!(
            "criterion {k:>2} [{}]: {} ({:.1}s) {}",
            names[k - 1],
            if out.pass { "PASS" } else { "FAIL" },
            secs,
            out.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
