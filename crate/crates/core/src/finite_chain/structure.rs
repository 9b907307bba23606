//! Communication classes and period.

use crate::finite_chain::FiniteKernel;
use crate::real::Real;

/// Irreducibility and period of a kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    pub irreducible: bool,
    /// Period through state 0; meaningful only when irreducible.
    pub period: usize,
    /// Communication classes with no transitions leaving them.
    pub closed_classes: Vec<Vec<usize>>,
}

impl Structure {
    pub fn is_ergodic(&self) -> bool {
        self.irreducible && self.period == 1
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Strongly connected components, Kosaraju with explicit stacks.
fn components<T: Real>(p: &FiniteKernel<T>) -> Vec<usize> {
    let n = p.n();
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for (j, _) in p.row(i) {
            rev[j].push(i);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack: Vec<(usize, Vec<usize>)> = vec![(s, p.row(s).map(|e| e.0).collect())];
        while let Some((u, next)) = stack.last_mut() {
            if let Some(v) = next.pop() {
                if !seen[v] {
                    seen[v] = true;
                    let succ = p.row(v).map(|e| e.0).collect();
                    stack.push((v, succ));
                }
            } else {
                order.push(*u);
                stack.pop();
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut c = 0;
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = c;
        while let Some(u) = stack.pop() {
            for &v in &rev[u] {
                if comp[v] == usize::MAX {
                    comp[v] = c;
                    stack.push(v);
                }
            }
        }
        c += 1;
    }
    comp
}

/// SCC-based irreducibility test; period as the gcd of
/// `level(u) + 1 − level(v)` over edges, with BFS levels from state 0.
pub fn check_irreducible_aperiodic<T: Real>(p: &FiniteKernel<T>) -> Structure {
    let n = p.n();
    let comp = components(p);
    let n_comp = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut leaves = vec![false; n_comp];
    for i in 0..n {
        for (j, _) in p.row(i) {
            if comp[i] != comp[j] {
                leaves[comp[i]] = true;
            }
        }
    }
    let mut closed: Vec<Vec<usize>> = vec![Vec::new(); n_comp];
    for (i, &c) in comp.iter().enumerate() {
        if !leaves[c] {
            closed[c].push(i);
        }
    }
    let mut closed_classes: Vec<Vec<usize>> = closed.into_iter().filter(|c| !c.is_empty()).collect();
    closed_classes.sort();
    let irreducible = n_comp == 1;
    let mut period = 0;
    if irreducible {
        let mut level = vec![usize::MAX; n];
        level[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for (v, _) in p.row(u) {
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for u in 0..n {
            for (v, _) in p.row(u) {
                let d = (level[u] + 1).abs_diff(level[v]);
                period = gcd(period, d);
            }
        }
    }
    Structure {
        irreducible,
        period,
        closed_classes,
    }
}
