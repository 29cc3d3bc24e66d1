//! Hereditary instances: every 3-set comes with its three 2-subsets. On such
//! instances plain local search with improvements of size at most 10 already
//! reaches ratio 4/3, with no binocular phase.

use std::collections::HashSet;

use crate::instance::{ElementId, Instance};
use crate::local_search::{solve, LocalSearchError, Packing, RunStats, SearchParams};

pub fn is_hereditary(instance: &Instance) -> bool {
    let present: HashSet<Vec<ElementId>> = instance
        .sets()
        .iter()
        .map(|s| {
            let mut k = s.elements().to_vec();
            k.sort_unstable();
            k
        })
        .collect();
    instance.sets().iter().filter(|s| s.len() == 3).all(|s| {
        let e = s.elements();
        [[e[0], e[1]], [e[0], e[2]], [e[1], e[2]]].iter().all(|pair| {
            let mut k = pair.to_vec();
            k.sort_unstable();
            present.contains(&k)
        })
    })
}

/// An instance known to satisfy [`is_hereditary`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HereditaryInstance {
    base: Instance,
}

impl HereditaryInstance {
    pub fn new(instance: Instance) -> Result<Self, LocalSearchError> {
        if is_hereditary(&instance) {
            Ok(HereditaryInstance { base: instance })
        } else {
            Err(LocalSearchError::NotHereditary)
        }
    }

    pub fn instance(&self) -> &Instance {
        &self.base
    }

    pub fn into_instance(self) -> Instance {
        self.base
    }
}

/// Adds every missing 2-subset of a 3-set, after the existing sets and in
/// order of first need.
pub fn hereditary_closure(instance: &Instance) -> HereditaryInstance {
    let mut b = instance.to_builder();
    for s in instance.sets().iter().filter(|s| s.len() == 3) {
        let labels: Vec<&str> = s.elements().iter().map(|&e| instance.label(e)).collect();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let pair = [labels[i], labels[j]];
            if !b.contains(&pair) {
                b.add_set(&pair).expect("a fresh 2-subset is always valid");
            }
        }
    }
    let base = b.build();
    debug_assert!(is_hereditary(&base));
    HereditaryInstance { base }
}

/// Local search with improvements of size at most 10 and no binocular
/// phase.
pub fn solve_hereditary(
    instance: &HereditaryInstance,
    seed: u64,
) -> Result<(Packing, RunStats), LocalSearchError> {
    solve(&instance.base, &SearchParams::hereditary(seed))
}
