//! Exhaustive enumeration helpers shared by the search routines.

use std::ops::ControlFlow;

/// Visits every `k`-subset of `items` for `k = 1..=max_size`, smaller sizes
/// first and lexicographically (by position) within a size.
pub fn for_each_subset<T: Copy, B>(
    items: &[T],
    max_size: usize,
    mut visit: impl FnMut(&[T]) -> ControlFlow<B>,
) -> ControlFlow<B> {
    let mut buf = Vec::with_capacity(max_size);
    for k in 1..=max_size.min(items.len()) {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            buf.clear();
            buf.extend(idx.iter().map(|&i| items[i]));
            visit(&buf)?;
            // Advance to the next combination.
            let mut i = k;
            while i > 0 && idx[i - 1] == items.len() - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    ControlFlow::Continue(())
}

/// Enumerates each connected vertex subset of size at most `max_size` of the
/// graph given by `adjacency` exactly once (ESU scheme, Wernicke 2006).
///
/// `admit(current, v)` may veto adding `v` to `current`; it must be
/// hereditary (a vetoed set stays vetoed under supersets), otherwise sets are
/// silently missed.
pub fn for_each_connected_subset<B>(
    adjacency: &[Vec<usize>],
    max_size: usize,
    mut admit: impl FnMut(&[usize], usize) -> bool,
    mut visit: impl FnMut(&[usize]) -> ControlFlow<B>,
) -> ControlFlow<B> {
    if max_size == 0 {
        return ControlFlow::Continue(());
    }
    let n = adjacency.len();
    let mut covered = vec![0u32; n];
    let mut current = Vec::with_capacity(max_size);
    for root in 0..n {
        if !admit(&current, root) {
            continue;
        }
        let mut esu = Esu {
            adjacency,
            max_size,
            root,
            covered: &mut covered,
            current: &mut current,
        };
        esu.push(root);
        let ext: Vec<usize> = adjacency[root].iter().copied().filter(|&u| u > root).collect();
        let flow = esu.extend(ext, &mut admit, &mut visit);
        esu.pop();
        flow?;
    }
    ControlFlow::Continue(())
}

struct Esu<'a> {
    adjacency: &'a [Vec<usize>],
    max_size: usize,
    root: usize,
    covered: &'a mut Vec<u32>,
    current: &'a mut Vec<usize>,
}

impl Esu<'_> {
    fn push(&mut self, v: usize) {
        self.current.push(v);
        self.covered[v] += 1;
        for &u in &self.adjacency[v] {
            self.covered[u] += 1;
        }
    }

    fn pop(&mut self) {
        let v = self.current.pop().expect("pop on empty subset");
        self.covered[v] -= 1;
        for &u in &self.adjacency[v] {
            self.covered[u] -= 1;
        }
    }

    fn extend<B>(
        &mut self,
        ext: Vec<usize>,
        admit: &mut impl FnMut(&[usize], usize) -> bool,
        visit: &mut impl FnMut(&[usize]) -> ControlFlow<B>,
    ) -> ControlFlow<B> {
        visit(self.current)?;
        if self.current.len() == self.max_size {
            return ControlFlow::Continue(());
        }
        for (i, &w) in ext.iter().enumerate() {
            if !admit(self.current, w) {
                continue;
            }
            let mut next = ext[i + 1..].to_vec();
            for &u in &self.adjacency[w] {
                if u > self.root && self.covered[u] == 0 && !next.contains(&u) {
                    next.push(u);
                }
            }
            self.push(w);
            let flow = self.extend(next, admit, visit);
            self.pop();
            flow?;
        }
        ControlFlow::Continue(())
    }
}
