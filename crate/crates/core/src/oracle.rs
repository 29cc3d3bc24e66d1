//! Exact maximum-weight packing by branch and bound, for auditing the local
//! search on small instances.

use thiserror::Error;

use crate::conflict::{ConflictGraph, Vertex};
use crate::instance::Instance;
use crate::local_search::Packing;

pub const DEFAULT_ORACLE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("node budget of {0} exhausted; instance too large for the exact oracle")]
    BudgetExhausted(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub optimum_weight: u32,
    pub witness: Packing,
    pub nodes_explored: u64,
}

struct Search<'a> {
    instance: &'a Instance,
    g: ConflictGraph,
    order: Vec<Vertex>,
    blocked: Vec<u32>,
    chosen: Vec<Vertex>,
    best: (u32, Vec<Vertex>),
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    /// Two bounds on what the sets from position `i` on can still add: the
    /// sum of their weights, and `2/3` of the free elements they cover
    /// (every set has weight at most two thirds of its size).
    fn bound(&self, i: usize) -> u32 {
        let mut sum = 0;
        let mut free = vec![false; self.instance.universe_size()];
        for &v in &self.order[i..] {
            if self.blocked[v] == 0 {
                sum += self.g.weight(v);
                for e in self.instance.sets()[v].elements() {
                    free[e.index()] = true;
                }
            }
        }
        let elements = free.iter().filter(|&&f| f).count() as u32;
        sum.min(2 * elements / 3)
    }

    fn run(&mut self, i: usize, weight: u32) -> Result<(), OracleError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(OracleError::BudgetExhausted(self.budget));
        }
        if weight > self.best.0 {
            self.best = (weight, self.chosen.clone());
        }
        let Some(pos) = (i..self.order.len()).find(|&p| self.blocked[self.order[p]] == 0) else {
            return Ok(());
        };
        if weight + self.bound(pos) <= self.best.0 {
            return Ok(());
        }
        let v = self.order[pos];
        // Include.
        self.chosen.push(v);
        for &u in self.g.neighbors(v) {
            self.blocked[u] += 1;
        }
        self.blocked[v] += 1;
        let r = self.run(pos + 1, weight + self.g.weight(v));
        self.blocked[v] -= 1;
        for &u in self.g.neighbors(v) {
            self.blocked[u] -= 1;
        }
        self.chosen.pop();
        r?;
        // Exclude.
        self.blocked[v] += 1;
        let r = self.run(pos + 1, weight);
        self.blocked[v] -= 1;
        r
    }
}

/// Branches on sets in order of decreasing weight (ties by index).
pub fn solve_exact(instance: &Instance, budget: u64) -> Result<OracleResult, OracleError> {
    let g = ConflictGraph::build(instance);
    let mut order: Vec<Vertex> = (0..g.len()).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(g.weight(v)));
    let mut s = Search {
        instance,
        blocked: vec![0; g.len()],
        g,
        order,
        chosen: Vec::new(),
        best: (0, Vec::new()),
        nodes: 0,
        budget,
    };
    s.run(0, 0)?;
    let witness = Packing::new(s.best.1);
    debug_assert!(witness.is_valid(&s.g) && witness.weight(&s.g) == s.best.0);
    Ok(OracleResult {
        optimum_weight: s.best.0,
        witness,
        nodes_explored: s.nodes,
    })
}
