//! The dynamic (insert and delete) streaming matcher.
//!
//! A [`HashScheme`] built for `2k` maps every vertex to `d2` cells of
//! `[d4]`. An edge `(u, v)` of weight `w` updates the l0-sampler keyed by
//! `(i, j, w)` for every `i` in `H+(u)` and `j` in `H+(v)`. At query time each
//! live sampler is sampled once and the union of the samples is solved
//! exactly.
//!
//! With [`DynamicMatcher::new_approx`] the weight key is replaced by the
//! index `t` of the geometric class `(1+ε)^(t-1) < w <= (1+ε)^t`, which caps
//! the number of distinct keys by `log_(1+ε)` of the weight spread.
//!
//! ```
//! use kmatch::{DynamicMatcher, StreamElement};
//! use rand::SeedableRng;
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
//! let mut m = DynamicMatcher::new(8, 1, &mut rng).unwrap();
//! m.process_update(&StreamElement::insert(0, 1, 4)).unwrap();
//! m.process_update(&StreamElement::insert(2, 3, 9)).unwrap();
//! m.process_update(&StreamElement::delete(2, 3, 9)).unwrap();
//! let best = m.query().matching.unwrap();
//! assert_eq!(best.weight(), 4);
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{
    edge_from_index, edge_index, edge_universe, real, Edge, LiveGraph, Matching, Mode, Op, RealWeight, StreamElement,
    StreamViolation, ViolationKind,
};
use crate::hashing::HashScheme;
use crate::l0::{L0Params, L0Sampler};
use crate::solver::max_weight_k_matching;

/// The class index `t` with `(1+ε)^(t-1) < w <= (1+ε)^t`.
pub fn round_weight(w: f64, epsilon: f64) -> Result<i64> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::invalid(format!("weight must be positive and finite, got {w}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let base = 1.0 + epsilon;
    let mut t = (w.ln() / base.ln()).ceil() as i64;
    // The log estimate can be off by one near a boundary; settle it with powers.
    while base.powi(t as i32) < w {
        t += 1;
    }
    while base.powi((t - 1) as i32) >= w {
        t -= 1;
    }
    Ok(t)
}

/// Default sampler failure probability for parameter `k`: `1 / (20 k^4 ln 2k)`.
pub fn default_delta(k: usize) -> f64 {
    let k = k as f64;
    1.0 / (20.0 * k.powi(4) * (2.0 * k).ln())
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DynamicConfig {
    /// Replaces the default sampler failure probability.
    pub delta_override: Option<f64>,
    /// Track the live graph and reject illegal updates.
    pub validate: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DynamicStats {
    pub updates: u64,
    /// Grid keys touched by the last update; always `d2^2`.
    pub keys_touched_last: u64,
    /// Largest work charged to one update: one unit per sampler cell touched
    /// plus one per weight-index search.
    pub max_update_work: u64,
    pub last_update_work: u64,
    /// Most distinct weight keys live at once.
    pub peak_weight_keys: usize,
    pub peak_samplers: usize,
}

/// The answer to a query plus what it cost.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicAnswer {
    pub matching: Option<Matching<u64>>,
    /// Live samplers queried.
    pub samplers: usize,
    /// Samplers that failed to produce a sample.
    pub fails: usize,
    /// Distinct edges recovered from the samplers.
    pub sampled_edges: usize,
}

type Grid = HashMap<(u64, u64), BTreeMap<u64, L0Sampler>>;

#[derive(Clone, Debug)]
pub struct DynamicMatcher {
    n: u32,
    k: usize,
    epsilon: Option<f64>,
    delta: f64,
    scheme: HashScheme,
    params: Arc<L0Params>,
    grid: Grid,
    samplers: usize,
    /// Live edge count per grid weight key.
    key_counts: BTreeMap<u64, i64>,
    /// Live edge count per true weight.
    weight_counts: BTreeMap<u64, i64>,
    live: Option<LiveGraph<u64>>,
    stats: DynamicStats,
    hu: Vec<u64>,
    hv: Vec<u64>,
}

impl DynamicMatcher {
    pub fn new<R: Rng + ?Sized>(n: u32, k: usize, rng: &mut R) -> Result<Self> {
        Self::build(n, k, None, DynamicConfig::default(), rng)
    }

    /// The approximate variant: weights are keyed by their `(1+ε)` class.
    pub fn new_approx<R: Rng + ?Sized>(n: u32, k: usize, epsilon: f64, rng: &mut R) -> Result<Self> {
        Self::build(n, k, Some(epsilon), DynamicConfig::default(), rng)
    }

    pub fn build<R: Rng + ?Sized>(
        n: u32,
        k: usize,
        epsilon: Option<f64>,
        config: DynamicConfig,
        rng: &mut R,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if (n as u64) < 2 * k as u64 {
            return Err(Error::invalid(format!(
                "a {k}-matching needs at least {} vertices, got n={n}",
                2 * k
            )));
        }
        if let Some(eps) = epsilon {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {eps}")));
            }
        }
        let delta = config.delta_override.unwrap_or_else(|| default_delta(k));
        let scheme = HashScheme::build(n as u64, 2 * k, rng)?;
        let params = L0Params::new(edge_universe(n).max(1), delta, rng)?;
        let d2 = scheme.params().d2 as usize;
        Ok(DynamicMatcher {
            n,
            k,
            epsilon,
            delta,
            scheme,
            params,
            grid: HashMap::new(),
            samplers: 0,
            key_counts: BTreeMap::new(),
            weight_counts: BTreeMap::new(),
            live: config.validate.then(|| LiveGraph::new(n)),
            stats: DynamicStats::default(),
            hu: Vec::with_capacity(d2),
            hv: Vec::with_capacity(d2),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    pub fn scheme(&self) -> &HashScheme {
        &self.scheme
    }

    pub fn sampler_params(&self) -> &Arc<L0Params> {
        &self.params
    }

    pub fn stats(&self) -> DynamicStats {
        self.stats
    }

    /// Live `(i, j, key)` samplers.
    pub fn sampler_count(&self) -> usize {
        self.samplers
    }

    /// Live `(i, j)` pairs with at least one sampler.
    pub fn pair_count(&self) -> usize {
        self.grid.len()
    }

    /// Distinct live weight keys in the grid.
    pub fn weight_keys(&self) -> usize {
        self.key_counts.len()
    }

    /// Distinct live true weights (the statistic `W`).
    pub fn distinct_weights(&self) -> usize {
        self.weight_counts.len()
    }

    /// Ratio of the largest to the smallest live weight, if any edge is live.
    pub fn weight_spread(&self) -> Option<f64> {
        let (lo, hi) = (
            self.weight_counts.keys().next()?,
            self.weight_counts.keys().next_back()?,
        );
        Some(*hi as f64 / (*lo).max(1) as f64)
    }

    /// Worst-case work of one update so far: `d2^2` sampler updates of at
    /// most `levels * repetitions` cells each, plus a search in a weight
    /// index holding at most `W` keys.
    pub fn update_work_bound(&self) -> u64 {
        let d2 = self.scheme.params().d2;
        d2 * d2 * (self.params.cells() as u64 + 1 + search_cost(self.stats.peak_weight_keys))
    }

    fn weight_key(&self, w: u64) -> Result<u64> {
        match self.epsilon {
            None => Ok(w),
            Some(eps) => Ok(round_weight(w as f64, eps)? as u64),
        }
    }

    fn violation(&self, kind: ViolationKind) -> Error {
        Error::MalformedStream(StreamViolation {
            position: self.stats.updates as usize + 1,
            kind,
        })
    }

    /// Applies one insertion or deletion.
    pub fn process_update(&mut self, el: &StreamElement<u64>) -> Result<()> {
        let e = el.edge;
        if e.is_loop() {
            return Err(self.violation(ViolationKind::SelfLoop { vertex: e.u() }));
        }
        if e.v() >= self.n {
            return Err(self.violation(ViolationKind::VertexOutOfRange {
                vertex: e.v(),
                n: self.n,
            }));
        }
        let key = self.weight_key(e.weight())?;
        if let Some(live) = &mut self.live {
            if let Err(kind) = live.apply(el, Mode::Dynamic) {
                let err = Error::MalformedStream(StreamViolation {
                    position: self.stats.updates as usize + 1,
                    kind,
                });
                return Err(err);
            }
        }
        let delta = match el.op {
            Op::Insert => 1,
            Op::Delete => -1,
        };
        let payload = if self.epsilon.is_some() { e.weight() as i64 } else { 0 };
        let touch = self.params.touch(edge_index(self.n, e.u(), e.v()));
        self.scheme.eval_into(e.u() as u64, &mut self.hu);
        self.scheme.eval_into(e.v() as u64, &mut self.hv);

        let mut work = 0u64;
        for &i in &self.hu {
            for &j in &self.hv {
                let by_weight = self.grid.entry((i, j)).or_default();
                let search = search_cost(by_weight.len());
                let sampler = by_weight.entry(key).or_insert_with(|| {
                    self.samplers += 1;
                    L0Sampler::new(self.params.clone())
                });
                sampler.apply(&touch, delta, payload);
                work += touch.len() as u64 + 1 + search;
                if sampler.is_zero() {
                    by_weight.remove(&key);
                    self.samplers -= 1;
                    if by_weight.is_empty() {
                        self.grid.remove(&(i, j));
                    }
                }
            }
        }
        bump(&mut self.key_counts, key, delta);
        bump(&mut self.weight_counts, e.weight(), delta);

        let d2 = self.hu.len() as u64;
        self.stats.updates += 1;
        self.stats.keys_touched_last = d2 * d2;
        self.stats.last_update_work = work;
        self.stats.max_update_work = self.stats.max_update_work.max(work);
        self.stats.peak_weight_keys = self.stats.peak_weight_keys.max(self.key_counts.len());
        self.stats.peak_samplers = self.stats.peak_samplers.max(self.samplers);
        Ok(())
    }

    /// Samples every live sampler once and returns the edges recovered,
    /// with their true weights, plus `(samplers, fails)`.
    pub fn sample_edges(&self) -> (Vec<Edge<u64>>, usize, usize) {
        let mut edges = BTreeSet::new();
        let mut fails = 0;
        for by_weight in self.grid.values() {
            for (&key, sampler) in by_weight {
                match sampler.query() {
                    Some(s) if s.multiplicity == 1 => {
                        let (u, v) = edge_from_index(self.n, s.index);
                        let w = if self.epsilon.is_some() { s.payload as u64 } else { key };
                        edges.insert((u, v, w));
                    }
                    // Multiplicity other than one cannot arise from a legal stream.
                    Some(_) | None => fails += 1,
                }
            }
        }
        let edges = edges.into_iter().map(|(u, v, w)| Edge::new(u, v, w)).collect();
        (edges, self.samplers, fails)
    }

    /// Solves the sampled subgraph exactly.
    ///
    /// In approximate mode each sampled edge is solved at weight `(1+ε)^t`
    /// for its class `t`, and the reported weights are the true ones.
    pub fn query(&self) -> DynamicAnswer {
        let (edges, samplers, fails) = self.sample_edges();
        let matching = match self.epsilon {
            None => max_weight_k_matching(&edges, self.k),
            Some(eps) => {
                let base = 1.0 + eps;
                let rounded: Vec<Edge<RealWeight>> = edges
                    .iter()
                    .map(|e| {
                        let t = round_weight(e.weight() as f64, eps).expect("weights are positive");
                        e.with_weight(real(base.powi(t as i32)))
                    })
                    .collect();
                let truth: HashMap<(u32, u32), u64> = edges.iter().map(|e| (e.endpoints(), e.weight())).collect();
                max_weight_k_matching(&rounded, self.k)
                    .map(|m| Matching::new(m.edges().iter().map(|e| e.with_weight(truth[&e.endpoints()])).collect()))
            }
        };
        DynamicAnswer {
            matching,
            samplers,
            fails,
            sampled_edges: edges.len(),
        }
    }

    /// Adds another matcher's grid cell-wise. Both must come from the same
    /// randomness (e.g. one is a clone of the other taken before updates).
    pub fn merge(&mut self, other: &DynamicMatcher) -> Result<()> {
        let same_params = Arc::ptr_eq(&self.params, &other.params) || self.params == other.params;
        if self.scheme != other.scheme || !same_params || self.n != other.n || self.epsilon != other.epsilon {
            return Err(Error::IncompatibleSketch);
        }
        if self.live.is_some() || other.live.is_some() {
            return Err(Error::invalid("matchers in validation mode cannot be merged"));
        }
        for (&pair, theirs) in &other.grid {
            let ours = self.grid.entry(pair).or_default();
            for (&key, sampler) in theirs {
                match ours.get_mut(&key) {
                    Some(s) => {
                        s.merge(sampler)?;
                        if s.is_zero() {
                            ours.remove(&key);
                            self.samplers -= 1;
                        }
                    }
                    None => {
                        ours.insert(key, sampler.clone());
                        self.samplers += 1;
                    }
                }
            }
            if ours.is_empty() {
                self.grid.remove(&pair);
            }
        }
        for (&k, &c) in &other.key_counts {
            bump(&mut self.key_counts, k, c);
        }
        for (&w, &c) in &other.weight_counts {
            bump(&mut self.weight_counts, w, c);
        }
        self.stats.updates += other.stats.updates;
        self.stats.peak_weight_keys = self.stats.peak_weight_keys.max(self.key_counts.len());
        self.stats.peak_samplers = self.stats.peak_samplers.max(self.samplers);
        self.stats.max_update_work = self.stats.max_update_work.max(other.stats.max_update_work);
        Ok(())
    }
}

/// Comparisons for a search among `keys` ordered keys.
fn search_cost(keys: usize) -> u64 {
    64 - (keys as u64 + 1).leading_zeros() as u64
}

fn bump(map: &mut BTreeMap<u64, i64>, key: u64, delta: i64) {
    let c = map.entry(key).or_insert(0);
    *c += delta;
    if *c == 0 {
        map.remove(&key);
    }
}
