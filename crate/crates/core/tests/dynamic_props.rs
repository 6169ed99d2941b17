use kmatch::{materialize, max_weight_k_matching, DynamicMatcher, Edge, Mode, Op, Stream, StreamElement};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_dynamic(n: u32, inserts: usize, deletes: usize, wmax: u64, rng: &mut ChaCha8Rng) -> Stream<u64> {
    let mut s = Stream::new(n, 2, Mode::Dynamic);
    let mut live: Vec<Edge<u64>> = Vec::new();
    let (mut ins, mut del) = (0, 0);
    while ins < inserts || del < deletes {
        let delete = del < deletes && !live.is_empty() && (ins == inserts || rng.gen_bool(0.3));
        if delete {
            let e = live.swap_remove(rng.gen_range(0..live.len()));
            s.push(StreamElement {
                edge: e,
                op: Op::Delete,
            });
            del += 1;
        } else if ins < inserts {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a == b || live.iter().any(|e| e.endpoints() == (a.min(b), a.max(b))) {
                continue;
            }
            let e = Edge::new(a, b, rng.gen_range(1..=wmax));
            live.push(e);
            s.push(StreamElement::insert(a, b, e.weight()));
            ins += 1;
        }
    }
    s
}

#[test]
fn samples_are_live_edges_and_answers_never_beat_the_optimum() {
    for t in 0..12u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(t);
        let s = random_dynamic(24, 60, 25, 5, &mut rng);
        let truth = materialize(&s).unwrap();
        let mut exact = DynamicMatcher::new(24, 2, &mut rng).unwrap();
        let mut approx = DynamicMatcher::new_approx(24, 2, 0.25, &mut rng).unwrap();
        let mut inserted = 0u64;
        for el in &s.elements {
            exact.process_update(el).unwrap();
            approx.process_update(el).unwrap();
            inserted += (el.op == Op::Insert) as u64;
        }
        let d2 = exact.scheme().params().d2;
        assert!(exact.sampler_count() as u64 <= d2 * d2 * inserted);
        assert!(exact.stats().max_update_work <= exact.update_work_bound());
        let (sampled, _, _) = exact.sample_edges();
        assert!(sampled.iter().all(|e| truth.contains(e)), "unsound sample");
        let best = max_weight_k_matching(&truth.edges(), 2).map(|m| m.weight());
        let ans = exact.query();
        assert_eq!(ans.matching.is_none(), max_weight_k_matching(&sampled, 2).is_none());
        if best.is_none() {
            assert!(ans.matching.is_none());
        }
        let got = ans.matching.map(|m| m.weight());
        assert!(got <= best);
        let ap = approx.query();
        assert!(ap.matching.as_ref().map(|m| m.weight()) <= best);
        if let Some(m) = ap.matching {
            assert!(m.is_matching_of(&truth));
        }
    }
}

#[test]
fn a_graph_without_a_k_matching_always_answers_none() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut m = DynamicMatcher::new(12, 2, &mut rng).unwrap();
    for v in 1..12 {
        m.process_update(&StreamElement::insert(0, v, v as u64)).unwrap();
    }
    for v in (1..12).step_by(2) {
        m.process_update(&StreamElement::delete(0, v, v as u64)).unwrap();
    }
    assert!(m.query().matching.is_none());
}

#[test]
fn equal_weights_make_the_approximation_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let s = random_dynamic(20, 40, 10, 1, &mut rng);
    let seed: u64 = rng.gen();
    let mut a = DynamicMatcher::new(20, 2, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    let mut b = DynamicMatcher::new_approx(20, 2, 0.5, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    for el in &s.elements {
        a.process_update(el).unwrap();
        b.process_update(el).unwrap();
    }
    assert_eq!(b.weight_keys(), 1);
    assert_eq!(a.query(), b.query());
}
