use std::collections::HashMap;
use std::sync::Arc;

use kmatch::{max_weight_k_matching, reduce, Edge, Emit, Reducer, VertexPartitionHash};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The reduced compact subgraph straight from its definition, quadratic and
/// independent of the library code paths.
fn definitional(edges: &[Edge<u64>], f: &VertexPartitionHash) -> Vec<Edge<u64>> {
    let k = f.k();
    let mut best: HashMap<(u32, u32), Edge<u64>> = HashMap::new();
    for e in edges {
        let (a, b) = (f.bucket(e.u()), f.bucket(e.v()));
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        let slot = best.entry(key).or_insert(*e);
        if e.beta() > slot.beta() {
            *slot = *e;
        }
    }
    let compact: Vec<Edge<u64>> = best.into_values().collect();
    let heavier_at = |bucket: u32, e: &Edge<u64>| {
        compact
            .iter()
            .filter(|o| o.beta() > e.beta())
            .filter(|o| f.bucket(o.u()) == bucket || f.bucket(o.v()) == bucket)
            .count()
    };
    let mut kept: Vec<Edge<u64>> = compact
        .iter()
        .filter(|e| heavier_at(f.bucket(e.u()), e) < 2 * k && heavier_at(f.bucket(e.v()), e) < 2 * k)
        .copied()
        .collect();
    kept.sort_by_key(|e| std::cmp::Reverse(e.beta()));
    kept.truncate(4 * k * k);
    kept
}

fn sorted(mut v: Vec<Edge<u64>>) -> Vec<Edge<u64>> {
    v.sort_by_key(|e| std::cmp::Reverse(e.beta()));
    v
}

fn edges(n: u32, max_len: usize) -> impl Strategy<Value = Vec<Edge<u64>>> {
    proptest::collection::vec((0..n, 0..n, 1u64..6), 0..max_len).prop_map(|raw| {
        raw.into_iter()
            .filter(|(a, b, _)| a != b)
            .map(|(a, b, w)| Edge::new(a, b, w))
            .collect()
    })
}

fn partition(k: usize, seed: u64) -> VertexPartitionHash {
    VertexPartitionHash::random(k, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn stepwise_reducer_matches_definition(g in edges(40, 200), k in 1usize..5, seed in any::<u64>()) {
        let f = partition(k, seed);
        let want = definitional(&g, &f);
        prop_assert_eq!(reduce(&g, &f), want.clone());
        let mut r = Reducer::over(f.clone(), g.clone());
        let steps = r.finish();
        prop_assert!(steps <= r.step_bound());
        prop_assert_eq!(sorted(r.into_output().0), want);
    }

    #[test]
    fn in_place_merge_reduces_its_two_inputs(
        g in edges(30, 160), cut in 0usize..160, k in 1usize..4, seed in any::<u64>()
    ) {
        let f = partition(k, seed);
        let cut = cut.min(g.len());
        let base = reduce(&g[..cut], &f);
        let mut union = base.clone();
        union.extend_from_slice(&g[cut..]);
        let mut r = Reducer::new(f.clone(), base, Arc::new(g[cut..].to_vec()), Emit::InPlace);
        r.finish();
        let merged = sorted(r.into_output().0);
        prop_assert_eq!(&merged, &definitional(&union, &f));
        // The merged sketch need not equal the reduction of the whole prefix,
        // but it keeps the same best k-matching weight.
        let whole = reduce(&g, &f);
        prop_assert_eq!(
            max_weight_k_matching(&merged, k).map(|m| m.weight()),
            max_weight_k_matching(&whole, k).map(|m| m.weight())
        );
    }

    #[test]
    fn reduction_is_idempotent_and_a_subgraph(g in edges(30, 150), k in 1usize..4, seed in any::<u64>()) {
        let f = partition(k, seed);
        let once = reduce(&g, &f);
        prop_assert!(once.len() <= 4 * k * k);
        prop_assert!(once.iter().all(|e| g.contains(e)));
        prop_assert_eq!(reduce(&once, &f), once);
    }

    #[test]
    fn nice_optimum_survives_reduction(g in edges(40, 120), k in 1usize..4, seed in any::<u64>()) {
        let f = partition(k, seed);
        if let Some(best) = max_weight_k_matching(&g, k) {
            let mut buckets: Vec<u32> = best
                .edges()
                .iter()
                .flat_map(|e| [f.bucket(e.u()), f.bucket(e.v())])
                .collect();
            buckets.sort_unstable();
            buckets.dedup();
            if buckets.len() == 2 * k {
                let sketch = reduce(&g, &f);
                let got = max_weight_k_matching(&sketch, k);
                prop_assert_eq!(got.map(|m| m.weight()), Some(best.weight()));
            }
        }
    }
}
