//! Exact maximum-weight k-matching for small graphs.
//!
//! [`max_weight_k_matching`] is a branch-and-bound over edges in heaviest-first
//! order. [`brute_force_oracle`] enumerates every k-subset and exists only to
//! check the former.
//!
//! Both break ties identically: among optimal k-matchings, the winner is the
//! one whose edge positions in heaviest-first order form the lexicographically
//! smallest sequence. Equivalently, compare the optimal matchings edge by edge
//! from the heaviest down and keep the first that is heavier at the first
//! difference.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{Edge, Matching, Weight};

/// Largest edge count [`brute_force_oracle`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// Edges sorted heaviest first with vertices relabeled onto `0..vertices`.
struct Compact<W> {
    edges: Vec<Edge<W>>,
    ends: Vec<(u32, u32)>,
    vertices: usize,
}

impl<W: Weight> Compact<W> {
    fn new(edges: &[Edge<W>]) -> Self {
        let mut edges = edges.to_vec();
        edges.sort_by_key(|e| std::cmp::Reverse(e.beta()));
        edges.dedup();
        let mut label: HashMap<u32, u32> = HashMap::new();
        let mut id = |v: u32| {
            let next = label.len() as u32;
            *label.entry(v).or_insert(next)
        };
        let ends = edges.iter().map(|e| (id(e.u()), id(e.v()))).collect();
        Compact {
            vertices: label.len(),
            edges,
            ends,
        }
    }

    fn matching(&self, picks: &[usize]) -> Matching<W> {
        Matching::new(picks.iter().map(|&i| self.edges[i]).collect())
    }
}

struct Search<'a, W> {
    g: &'a Compact<W>,
    k: usize,
    used: Vec<bool>,
    picks: Vec<usize>,
    best: Option<(W, Vec<usize>)>,
    nodes: u64,
}

impl<W: Weight> Search<'_, W> {
    fn free(&self, i: usize) -> bool {
        let (a, b) = self.g.ends[i];
        !self.used[a as usize] && !self.used[b as usize]
    }

    /// Sum of the `need` heaviest still-usable edges from `i` on, or `None`
    /// when fewer than `need` remain.
    fn bound(&self, i: usize, need: usize, cur: W) -> Option<W> {
        let mut total = cur;
        let mut found = 0;
        for j in i..self.g.edges.len() {
            if found == need {
                break;
            }
            if self.free(j) {
                total = total + self.g.edges[j].weight();
                found += 1;
            }
        }
        (found == need).then_some(total)
    }

    fn run(&mut self, mut i: usize, cur: W) {
        self.nodes += 1;
        let depth = self.picks.len();
        if depth == self.k {
            if self.best.as_ref().is_none_or(|(w, _)| cur > *w) {
                self.best = Some((cur, self.picks.clone()));
            }
            return;
        }
        let m = self.g.edges.len();
        while i < m && !self.free(i) {
            i += 1;
        }
        if i == m || m - i < self.k - depth {
            return;
        }
        let Some(bound) = self.bound(i, self.k - depth, cur) else {
            return;
        };
        if self.best.as_ref().is_some_and(|(w, _)| bound <= *w) {
            return;
        }
        let (a, b) = self.g.ends[i];
        self.used[a as usize] = true;
        self.used[b as usize] = true;
        self.picks.push(i);
        self.run(i + 1, cur + self.g.edges[i].weight());
        self.picks.pop();
        self.used[a as usize] = false;
        self.used[b as usize] = false;
        self.run(i + 1, cur);
    }
}

/// A maximum-weight matching with exactly `k` edges, or `None` if the graph
/// has no k-matching. `k = 0` yields the empty matching.
///
/// ```
/// use kmatch::{max_weight_k_matching, Edge};
///
/// let path = [Edge::new(0, 1, 5u64), Edge::new(1, 2, 1), Edge::new(2, 3, 5)];
/// let best = max_weight_k_matching(&path, 2).unwrap();
/// assert_eq!(best.weight(), 10);
/// assert!(max_weight_k_matching(&path, 3).is_none());
/// ```
pub fn max_weight_k_matching<W: Weight>(edges: &[Edge<W>], k: usize) -> Option<Matching<W>> {
    solve_counted(edges, k).0
}

/// As [`max_weight_k_matching`], also returning the number of search nodes.
pub fn solve_counted<W: Weight>(edges: &[Edge<W>], k: usize) -> (Option<Matching<W>>, u64) {
    let g = Compact::new(edges);
    let mut s = Search {
        g: &g,
        k,
        used: vec![false; g.vertices],
        picks: Vec::with_capacity(k),
        best: None,
        nodes: 0,
    };
    s.run(0, W::default());
    let nodes = s.nodes;
    (s.best.map(|(_, picks)| g.matching(&picks)), nodes)
}

/// Exhaustive enumeration of all k-subsets of at most [`BRUTE_FORCE_LIMIT`] edges.
pub fn brute_force_oracle<W: Weight>(edges: &[Edge<W>], k: usize) -> Result<Option<Matching<W>>> {
    if edges.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::InfeasibleSize {
            edges: edges.len(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let g = Compact::new(edges);
    let mut best: Option<(W, Vec<usize>)> = None;
    let mut subset = Vec::with_capacity(k);

    fn visit<W: Weight>(
        g: &Compact<W>,
        k: usize,
        start: usize,
        subset: &mut Vec<usize>,
        best: &mut Option<(W, Vec<usize>)>,
    ) {
        if subset.len() == k {
            let mut seen = vec![false; g.vertices];
            for &i in subset.iter() {
                let (a, b) = g.ends[i];
                if seen[a as usize] || seen[b as usize] {
                    return;
                }
                seen[a as usize] = true;
                seen[b as usize] = true;
            }
            let w = subset.iter().fold(W::default(), |acc, &i| acc + g.edges[i].weight());
            if best.as_ref().is_none_or(|(bw, _)| w > *bw) {
                *best = Some((w, subset.clone()));
            }
            return;
        }
        for i in start..g.edges.len() {
            subset.push(i);
            visit(g, k, i + 1, subset, best);
            subset.pop();
        }
    }

    visit(&g, k, 0, &mut subset, &mut best);
    Ok(best.map(|(_, picks)| g.matching(&picks)))
}
