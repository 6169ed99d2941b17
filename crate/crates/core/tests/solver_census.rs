use kmatch::{brute_force_oracle, max_weight_k_matching, Edge, LiveGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn check(edges: &[Edge<u64>], k: usize) {
    let got = max_weight_k_matching(edges, k);
    assert_eq!(got, brute_force_oracle(edges, k).unwrap(), "edges={edges:?} k={k}");
    if let Some(m) = got {
        assert_eq!(m.len(), k);
        assert!(m.is_vertex_disjoint());
        assert_eq!(m.weight(), m.edges().iter().map(|e| e.weight()).sum::<u64>());
        let g = LiveGraph::from_edges(16, edges.iter().copied());
        assert!(m.is_matching_of(&g));
    }
}

#[test]
fn every_edge_subset_of_k5() {
    let all: Vec<(u32, u32)> = (0..5).flat_map(|a| (a + 1..5).map(move |b| (a, b))).collect();
    for mask in 0u32..1 << all.len() {
        if mask.count_ones() > 8 {
            continue;
        }
        let picked: Vec<(u32, u32)> = (0..all.len()).filter(|i| mask >> i & 1 == 1).map(|i| all[i]).collect();
        for weighting in 0..3 {
            let edges: Vec<Edge<u64>> = picked
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| {
                    let w = match weighting {
                        0 => 1,
                        1 => i as u64 + 1,
                        _ => (i as u64 * 7) % 3 + 1,
                    };
                    Edge::new(a, b, w)
                })
                .collect();
            for k in 0..=3 {
                check(&edges, k);
            }
        }
    }
}

#[test]
fn adding_an_edge_never_lowers_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..2000 {
        let n = rng.gen_range(4..12);
        let mut edges: Vec<Edge<u64>> = Vec::new();
        let k = rng.gen_range(1..4);
        let mut prev = None;
        for _ in 0..15 {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a == b {
                continue;
            }
            edges.push(Edge::new(a, b, rng.gen_range(1..20)));
            let now = max_weight_k_matching(&edges, k).map(|m| m.weight());
            assert!(now >= prev, "{edges:?}");
            prev = now;
        }
    }
}
