//! Seeded benchmark trials with per-update instrumentation.

use std::collections::BTreeMap;
use std::time::Instant;

use kmatch::{materialize, max_weight_k_matching, DynamicConfig, DynamicMatcher, InsertMatcher, Result, Weight};
use serde::Serialize;

use crate::gen::{random_dynamic_stream, random_insert_stream, RandomSpec, WeightDist};
use crate::par::par_map;
use crate::seed::{rng_for, trial_seed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchMode {
    Ins,
    Dyn,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchSpec {
    pub mode: BenchMode,
    pub n: u32,
    pub k: usize,
    /// Required for `ins`; selects the approximate matcher for `dyn`.
    pub epsilon: Option<f64>,
    pub delta_override: Option<f64>,
    pub inserts: usize,
    pub deletes: usize,
    pub weights: WeightDist,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Percentiles {
    pub p50: u64,
    pub p90: u64,
    pub p99: u64,
    pub max: u64,
}

impl Percentiles {
    fn of(mut xs: Vec<u64>) -> Self {
        if xs.is_empty() {
            return Percentiles::default();
        }
        xs.sort_unstable();
        let at = |q: f64| xs[((xs.len() - 1) as f64 * q).round() as usize];
        Percentiles {
            p50: at(0.5),
            p90: at(0.9),
            p99: at(0.99),
            max: *xs.last().expect("non-empty"),
        }
    }
}

/// Machine-readable benchmark summary. Field names are stable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub mode: BenchMode,
    pub n: u32,
    pub k: usize,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub trials: usize,
    pub updates_per_trial: usize,
    pub seed: u64,
    /// Per-update work limit: the reducer step budget (`ins`) or the
    /// sampler-grid work bound (`dyn`).
    pub step_budget: u64,
    /// Work charged to a single update, over all updates of all trials.
    pub max_steps: u64,
    /// `steps -> number of updates` over all trials.
    pub step_histogram: BTreeMap<u64, u64>,
    pub peak_stored_edges: Option<usize>,
    pub space_bound: Option<usize>,
    pub peak_samplers: Option<usize>,
    pub peak_pairs: Option<usize>,
    /// Largest number of distinct live weights seen at query time.
    pub distinct_weights: Option<usize>,
    pub sampler_fails: Option<usize>,
    pub update_wall_ns: Percentiles,
    pub query_wall_ns: Percentiles,
    /// Trials whose answer weight equals the exact optimum.
    pub correct_trials: usize,
    pub within_budget: bool,
}

struct Trial {
    steps: Vec<u64>,
    update_ns: Vec<u64>,
    query_ns: u64,
    peak_edges: usize,
    space_bound: usize,
    peak_samplers: usize,
    peak_pairs: usize,
    distinct_weights: usize,
    fails: usize,
    bound: u64,
    delta: f64,
    correct: bool,
}

fn same_weight(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0),
        _ => false,
    }
}

fn ins_trial(spec: &BenchSpec, t: usize) -> Result<Trial> {
    let seed = trial_seed(spec.seed, t as u64);
    let s = random_insert_stream(&RandomSpec {
        n: spec.n,
        k: spec.k,
        inserts: spec.inserts,
        deletes: 0,
        weights: spec.weights,
        seed,
    })?;
    let eps = spec.epsilon.unwrap_or(1.0 / 16.0);
    let mut m = InsertMatcher::new(spec.n, spec.k, eps, &mut rng_for(seed, 1))?;
    let mut steps = Vec::with_capacity(s.len());
    let mut update_ns = Vec::with_capacity(s.len());
    for el in &s.elements {
        let before = m.stats().total_steps;
        let clock = Instant::now();
        m.process_insert(el.edge)?;
        update_ns.push(clock.elapsed().as_nanos() as u64);
        steps.push(m.stats().total_steps - before);
    }
    let clock = Instant::now();
    let got = m.query();
    let query_ns = clock.elapsed().as_nanos() as u64;
    let want = max_weight_k_matching(&materialize(&s)?.edges(), spec.k);
    let st = m.stats();
    Ok(Trial {
        steps,
        update_ns,
        query_ns,
        peak_edges: st.peak_stored_edges,
        space_bound: m.space_bound(),
        peak_samplers: 0,
        peak_pairs: 0,
        distinct_weights: 0,
        fails: 0,
        bound: st.budget,
        delta: 0.0,
        correct: same_weight(got.map(|m| m.weight().to_f64()), want.map(|m| m.weight().to_f64()))
            && st.overrun_steps == 0,
    })
}

fn dyn_trial(spec: &BenchSpec, t: usize) -> Result<Trial> {
    let seed = trial_seed(spec.seed, t as u64);
    let s = random_dynamic_stream(&RandomSpec {
        n: spec.n,
        k: spec.k,
        inserts: spec.inserts,
        deletes: spec.deletes,
        weights: spec.weights,
        seed,
    })?;
    let config = DynamicConfig {
        delta_override: spec.delta_override,
        validate: false,
    };
    let mut m = DynamicMatcher::build(spec.n, spec.k, spec.epsilon, config, &mut rng_for(seed, 1))?;
    let mut steps = Vec::with_capacity(s.len());
    let mut update_ns = Vec::with_capacity(s.len());
    let mut peak_pairs = 0;
    for el in &s.elements {
        let clock = Instant::now();
        m.process_update(el)?;
        update_ns.push(clock.elapsed().as_nanos() as u64);
        steps.push(m.stats().last_update_work);
        peak_pairs = peak_pairs.max(m.pair_count());
    }
    let clock = Instant::now();
    let ans = m.query();
    let query_ns = clock.elapsed().as_nanos() as u64;
    let want = max_weight_k_matching(&materialize(&s)?.edges(), spec.k).map(|m| m.weight() as f64);
    let got = ans.matching.map(|m| m.weight() as f64);
    let correct = match spec.epsilon {
        None => same_weight(got, want),
        // The approximate matcher is correct when within a (1 - eps) factor.
        Some(eps) => match (got, want) {
            (Some(g), Some(w)) => g >= (1.0 - eps) * w,
            (g, w) => g.is_none() && w.is_none(),
        },
    };
    let st = m.stats();
    Ok(Trial {
        steps,
        update_ns,
        query_ns,
        peak_edges: 0,
        space_bound: 0,
        peak_samplers: st.peak_samplers,
        peak_pairs,
        distinct_weights: m.distinct_weights(),
        fails: ans.fails,
        bound: m.update_work_bound(),
        delta: m.delta(),
        correct,
    })
}

pub fn bench(spec: &BenchSpec) -> Result<BenchReport> {
    let trials = par_map(spec.trials, |t| match spec.mode {
        BenchMode::Ins => ins_trial(spec, t),
        BenchMode::Dyn => dyn_trial(spec, t),
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut hist = BTreeMap::new();
    for t in &trials {
        for &s in &t.steps {
            *hist.entry(s).or_insert(0) += 1;
        }
    }
    let max_steps = hist.keys().next_back().copied().unwrap_or(0);
    // The dynamic bound depends on the number of distinct weights, so each
    // trial is held to its own.
    let budget = trials.iter().map(|t| t.bound).max().unwrap_or(0);
    let ins = spec.mode == BenchMode::Ins;
    let peak_edges = trials.iter().map(|t| t.peak_edges).max().unwrap_or(0);
    let space_bound = trials.first().map_or(0, |t| t.space_bound);
    let within = trials
        .iter()
        .all(|t| t.steps.iter().all(|&s| s <= t.bound) && (!ins || t.peak_edges <= t.space_bound));
    Ok(BenchReport {
        mode: spec.mode,
        n: spec.n,
        k: spec.k,
        epsilon: spec.epsilon.or(ins.then_some(1.0 / 16.0)),
        delta: (!ins).then(|| trials.first().map_or(0.0, |t| t.delta)),
        trials: spec.trials,
        updates_per_trial: trials.first().map_or(0, |t| t.steps.len()),
        seed: spec.seed,
        step_budget: budget,
        max_steps,
        step_histogram: hist,
        peak_stored_edges: ins.then_some(peak_edges),
        space_bound: ins.then_some(space_bound),
        peak_samplers: (!ins).then(|| trials.iter().map(|t| t.peak_samplers).max().unwrap_or(0)),
        peak_pairs: (!ins).then(|| trials.iter().map(|t| t.peak_pairs).max().unwrap_or(0)),
        distinct_weights: (!ins).then(|| trials.iter().map(|t| t.distinct_weights).max().unwrap_or(0)),
        sampler_fails: (!ins).then(|| trials.iter().map(|t| t.fails).sum()),
        update_wall_ns: Percentiles::of(trials.iter().flat_map(|t| t.update_ns.iter().copied()).collect()),
        query_wall_ns: Percentiles::of(trials.iter().map(|t| t.query_ns).collect()),
        correct_trials: trials.iter().filter(|t| t.correct).count(),
        within_budget: within,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(mode: BenchMode) -> BenchSpec {
        BenchSpec {
            mode,
            n: 40,
            k: 2,
            epsilon: None,
            delta_override: None,
            inserts: 120,
            deletes: 30,
            weights: WeightDist::Uniform { lo: 1.0, hi: 5.0 },
            trials: 4,
            seed: 5,
        }
    }

    #[test]
    fn ins_bench_respects_the_budget() {
        let r = bench(&BenchSpec {
            deletes: 0,
            ..spec(BenchMode::Ins)
        })
        .unwrap();
        assert!(r.within_budget);
        assert_eq!(r.updates_per_trial, 120);
        assert_eq!(r.step_histogram.values().sum::<u64>(), 480);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["mode"], "ins");
        assert!(json["step_histogram"].is_object());
    }

    #[test]
    fn dyn_bench_counts_everything_but_wall_time_deterministically() {
        let a = bench(&spec(BenchMode::Dyn)).unwrap();
        let b = bench(&spec(BenchMode::Dyn)).unwrap();
        assert!(a.within_budget);
        assert_eq!(a.step_histogram, b.step_histogram);
        assert_eq!(a.correct_trials, b.correct_trials);
        assert_eq!(a.updates_per_trial, 150);
    }
}
