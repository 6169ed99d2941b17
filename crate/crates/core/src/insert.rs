//! The insert-only streaming matcher.
//!
//! Arrivals are cut into segments of `L = 4k^2` edges. For each of a few
//! random vertex partitions `f` the matcher keeps a sketch equal to the
//! reduced compact subgraph of the prefix up to the last finished segment
//! boundary. When a segment fills, each sketch is merged with it by a
//! [`Reducer`] that runs in the background, a fixed number of micro-steps per
//! later arrival, and is guaranteed to finish before the next segment fills.
//!
//! ```
//! use kmatch::{Edge, InsertMatcher, real};
//! use rand::SeedableRng;
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
//! let mut m = InsertMatcher::new(10, 2, 0.25, &mut rng).unwrap();
//! for (u, v, w) in [(0, 1, 3.0), (1, 2, 9.0), (2, 3, 4.0), (4, 5, 1.5)] {
//!     m.process_insert(Edge::new(u, v, real(w))).unwrap();
//! }
//! let best = m.query().unwrap();
//! assert_eq!(best.len(), 2);
//! ```

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Edge, Matching, Weight};
use crate::reducer::{Emit, Reducer, VertexPartitionHash, REDUCER_STEP_CONSTANT};
use crate::solver::max_weight_k_matching;

/// Number of partition hashes for failure budget `epsilon`: the least `t`
/// with `2^-t <= epsilon`.
pub fn hash_count(epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let mut t = 0;
    while epsilon * ((1u64 << t) as f64) < 1.0 {
        t += 1;
    }
    Ok(t)
}

/// Micro-steps spent per arrival with `hashes` partitions.
///
/// Each merge reads at most `12k^2` edges (a generous cap over the sketch and
/// one segment), so all merges together need at most `c * 13k^2 * hashes`
/// steps; spreading that over the `4k^2` arrivals of a segment gives this.
pub fn step_budget(hashes: usize) -> u64 {
    (13 * REDUCER_STEP_CONSTANT * hashes as u64).div_ceil(4) + 1
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct InsertStats {
    pub arrivals: u64,
    /// Fixed per-arrival step budget.
    pub budget: u64,
    /// Largest number of reducer micro-steps charged to one arrival.
    pub max_steps_per_insert: u64,
    pub total_steps: u64,
    /// Steps spent finishing merges at a segment boundary. Zero unless the
    /// budget is too small.
    pub overrun_steps: u64,
    /// Steps spent inside `query`.
    pub query_steps: u64,
    /// Most edges held at once: sketches, segments, reducer outputs.
    pub peak_stored_edges: usize,
}

#[derive(Clone, Debug)]
struct Lane<W> {
    f: VertexPartitionHash,
    sketch: Vec<Edge<W>>,
    /// Prefix length `sketch` summarizes.
    covered: u64,
    merge: Option<Reducer<W>>,
    /// Prefix length the running merge will summarize.
    target: u64,
}

impl<W: Weight> Lane<W> {
    fn complete(&mut self) {
        if let Some(r) = self.merge.take() {
            self.sketch = r.into_output().0;
            self.covered = self.target;
        }
    }
}

#[derive(Clone, Debug)]
pub struct InsertMatcher<W> {
    n: u32,
    k: usize,
    epsilon: f64,
    segment_len: usize,
    lanes: Vec<Lane<W>>,
    filling: Vec<Edge<W>>,
    stats: InsertStats,
}

impl<W: Weight> InsertMatcher<W> {
    pub fn new<R: Rng + ?Sized>(n: u32, k: usize, epsilon: f64, rng: &mut R) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        let hashes = hash_count(epsilon)?;
        let lanes = (0..hashes)
            .map(|_| {
                Ok(Lane {
                    f: VertexPartitionHash::random(k, rng)?,
                    sketch: Vec::new(),
                    covered: 0,
                    merge: None,
                    target: 0,
                })
            })
            .collect::<Result<_>>()?;
        Ok(InsertMatcher {
            n,
            k,
            epsilon,
            segment_len: 4 * k * k,
            lanes,
            filling: Vec::new(),
            stats: InsertStats {
                budget: step_budget(hashes),
                ..InsertStats::default()
            },
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn hash_count(&self) -> usize {
        self.lanes.len()
    }

    pub fn segment_len(&self) -> usize {
        self.segment_len
    }

    pub fn stats(&self) -> InsertStats {
        self.stats
    }

    pub fn partition(&self, lane: usize) -> &VertexPartitionHash {
        &self.lanes[lane].f
    }

    /// The latest finished sketch of `lane` and the prefix length it covers.
    ///
    /// `None` only in the short window where a running merge is rewriting
    /// that sketch in place.
    pub fn sketch(&self, lane: usize) -> Option<(&[Edge<W>], u64)> {
        let l = &self.lanes[lane];
        match &l.merge {
            Some(r) => r.base().map(|b| (b, l.covered)),
            None => Some((&l.sketch, l.covered)),
        }
    }

    /// Space-bound the matcher promises: `12k^2` per hash plus `4k^2`.
    pub fn space_bound(&self) -> usize {
        let k2 = self.k * self.k;
        12 * k2 * self.lanes.len() + 4 * k2
    }

    fn stored_edges(&self) -> usize {
        let mut total = self.filling.len();
        let mut segment = 0;
        for l in &self.lanes {
            total += l.sketch.len();
            if let Some(r) = &l.merge {
                total += r.stored_edges();
                segment = segment.max(r.shared_len());
            }
        }
        total + segment
    }

    fn note_storage(&mut self) {
        let now = self.stored_edges();
        self.stats.peak_stored_edges = self.stats.peak_stored_edges.max(now);
    }

    /// Feeds one arrival. Rejects loops and out-of-range endpoints.
    pub fn process_insert(&mut self, e: Edge<W>) -> Result<()> {
        if e.is_loop() || e.v() >= self.n {
            return Err(Error::invalid(format!(
                "edge ({}, {}) is a loop or leaves the vertex range [0, {})",
                e.u(),
                e.v(),
                self.n
            )));
        }
        self.filling.push(e);
        self.stats.arrivals += 1;

        let mut left = self.stats.budget;
        for lane in &mut self.lanes {
            if left == 0 {
                break;
            }
            if let Some(r) = &mut lane.merge {
                left -= r.advance(left);
                if r.is_done() {
                    lane.complete();
                }
            }
        }
        let mut spent = self.stats.budget - left;
        self.note_storage();

        if self.filling.len() == self.segment_len {
            for lane in &mut self.lanes {
                if let Some(r) = &mut lane.merge {
                    let over = r.finish();
                    self.stats.overrun_steps += over;
                    spent += over;
                    lane.complete();
                }
            }
            let segment = Arc::new(std::mem::take(&mut self.filling));
            let at = self.stats.arrivals;
            for lane in &mut self.lanes {
                let base = std::mem::take(&mut lane.sketch);
                lane.merge = Some(Reducer::new(lane.f.clone(), base, segment.clone(), Emit::InPlace));
                lane.target = at;
            }
            self.note_storage();
        }
        self.stats.total_steps += spent;
        self.stats.max_steps_per_insert = self.stats.max_steps_per_insert.max(spent);
        Ok(())
    }

    /// The heaviest k-matching found across all sketches, or `None` if no
    /// sketch holds one.
    ///
    /// Pending merges are driven to completion first (at most `O(k^2)` work),
    /// so streaming can resume afterwards with nothing lost.
    pub fn query(&mut self) -> Option<Matching<W>> {
        for lane in &mut self.lanes {
            if let Some(r) = &mut lane.merge {
                self.stats.query_steps += r.finish();
                lane.complete();
            }
        }
        let filling = Arc::new(std::mem::take(&mut self.filling));
        let mut best: Option<Matching<W>> = None;
        for i in 0..self.lanes.len() {
            let lane = &mut self.lanes[i];
            let base = std::mem::take(&mut lane.sketch);
            let mut r = Reducer::new(lane.f.clone(), base, filling.clone(), Emit::Copy);
            self.stats.query_steps += r.finish();
            let (view, base) = r.into_output();
            lane.sketch = base.expect("copy mode returns the base");
            self.filling_peek(&filling, view.len());
            if let Some(m) = max_weight_k_matching(&view, self.k) {
                if best.as_ref().is_none_or(|b| m.weight() > b.weight()) {
                    best = Some(m);
                }
            }
        }
        self.filling = Arc::try_unwrap(filling).expect("query reducers released the segment");
        best
    }

    /// Peak accounting during a query, while the segment is lent out.
    fn filling_peek(&mut self, filling: &Arc<Vec<Edge<W>>>, extra: usize) {
        let now = self.stored_edges() + filling.len() + extra;
        self.stats.peak_stored_edges = self.stats.peak_stored_edges.max(now);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::real;
    use crate::reducer::{reduce, sorted_by_beta};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn hash_counts() {
        assert_eq!(hash_count(1.0 / 16.0).unwrap(), 4);
        assert_eq!(hash_count(0.5).unwrap(), 1);
        assert_eq!(hash_count(0.3).unwrap(), 2);
        assert!(hash_count(1.0).is_err());
        assert!(hash_count(0.0).is_err());
        assert!(hash_count(f64::NAN).is_err());
    }

    #[test]
    fn constructor_checks() {
        assert!(InsertMatcher::<u64>::new(10, 0, 0.5, &mut rng(0)).is_err());
        assert!(InsertMatcher::<u64>::new(10, 2, 1.0, &mut rng(0)).is_err());
        let m = InsertMatcher::<u64>::new(10, 2, 1.0 / 16.0, &mut rng(0)).unwrap();
        assert_eq!(m.hash_count(), 4);
        assert_eq!(m.segment_len(), 16);
    }

    #[test]
    fn empty_and_single_edge() {
        let mut m = InsertMatcher::<u64>::new(5, 1, 0.5, &mut rng(1)).unwrap();
        assert!(m.query().is_none());
        m.process_insert(Edge::new(1, 3, 7)).unwrap();
        assert_eq!(m.query().unwrap().edges(), &[Edge::new(1, 3, 7)]);
    }

    #[test]
    fn rejects_bad_edges() {
        let mut m = InsertMatcher::<u64>::new(5, 1, 0.5, &mut rng(1)).unwrap();
        assert!(m.process_insert(Edge::new(2, 2, 1)).is_err());
        assert!(m.process_insert(Edge::new(2, 5, 1)).is_err());
    }

    #[test]
    fn first_segment_is_buffered_and_second_boundary_has_sketch() {
        let k = 2;
        let mut r = rng(2);
        let mut m = InsertMatcher::new(30, k, 0.25, &mut r).unwrap();
        let l = m.segment_len();
        let mut edges = Vec::new();
        while edges.len() < 2 * l {
            let (a, b) = (r.gen_range(0..30), r.gen_range(0..30));
            if a != b {
                edges.push(Edge::new(a, b, real(r.gen_range(0.0..10.0))));
            }
        }
        for e in &edges[..l] {
            m.process_insert(*e).unwrap();
        }
        assert_eq!(m.stats().total_steps, 0);
        for e in &edges[l..] {
            m.process_insert(*e).unwrap();
        }
        for lane in 0..m.hash_count() {
            let (sk, covered) = m.sketch(lane).unwrap();
            assert_eq!(covered, l as u64);
            let want = reduce(&edges[..l], m.partition(lane));
            assert_eq!(sorted_by_beta(sk.to_vec()), want);
        }
    }

    #[test]
    fn mid_stream_query_does_not_disturb_sketches() {
        let k = 2;
        let mut r = rng(5);
        let mut a = InsertMatcher::new(40, k, 0.25, &mut rng(9)).unwrap();
        let mut b = a.clone();
        let edges: Vec<Edge<u64>> = (0..200)
            .map(|_| loop {
                let (x, y) = (r.gen_range(0..40), r.gen_range(0..40));
                if x != y {
                    break Edge::new(x, y, r.gen_range(1..100));
                }
            })
            .collect();
        for (i, e) in edges.iter().enumerate() {
            a.process_insert(*e).unwrap();
            b.process_insert(*e).unwrap();
            if i % 7 == 3 {
                a.query();
            }
        }
        assert_eq!(a.query(), b.query());
        for lane in 0..a.hash_count() {
            let (sa, ca) = a.sketch(lane).unwrap();
            let (sb, cb) = b.sketch(lane).unwrap();
            assert_eq!(ca, cb);
            assert_eq!(sorted_by_beta(sa.to_vec()), sorted_by_beta(sb.to_vec()));
        }
    }
}
