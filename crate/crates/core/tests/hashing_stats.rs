use std::collections::BTreeSet;

use kmatch::{HashScheme, KWiseHash, UniversalHash, MERSENNE_61};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn universal_collision_rate_is_at_most_one_over_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (x, y, r, trials) = (12_345u64, 987_654u64, 16u64, 40_000);
    let hits = (0..trials)
        .filter(|_| {
            let h = UniversalHash::random(r, &mut rng).unwrap();
            h.eval(x) == h.eval(y)
        })
        .count();
    let rate = hits as f64 / trials as f64;
    // 1/16 plus four standard deviations.
    assert!(
        rate <= 1.0 / 16.0 + 4.0 * (1.0 / 16.0 * 15.0 / 16.0 / trials as f64).sqrt(),
        "{rate}"
    );
}

#[test]
fn squared_range_is_injective_more_than_half_the_time() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let points: Vec<u64> = (0..12).map(|_| rng.gen_range(0..1_000_000)).collect();
    let r = (points.len() * points.len()) as u64;
    let trials = 4000;
    let perfect = (0..trials)
        .filter(|_| {
            let h = UniversalHash::random(r, &mut rng).unwrap();
            points.iter().map(|&x| h.eval(x)).collect::<BTreeSet<_>>().len() == points.len()
        })
        .count();
    assert!(perfect as f64 / trials as f64 > 0.5, "{perfect}/{trials}");
}

#[test]
fn three_wise_joint_distribution_is_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (r, trials) = (4u64, 64_000usize);
    let points = [5u64, 77, 1_000_003];
    let mut counts = [0u64; 64];
    for _ in 0..trials {
        let h = KWiseHash::random(3, r, &mut rng).unwrap();
        let cell = points.iter().fold(0, |acc, &x| acc * r + h.eval(x));
        counts[cell as usize] += 1;
    }
    let expect = trials as f64 / 64.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    // Upper 0.1% point of chi-square with 63 degrees of freedom.
    assert!(chi2 < 103.4, "chi2 = {chi2}");
}

#[test]
fn kwise_hash_uses_the_mersenne_field_by_default() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = KWiseHash::random(5, 100, &mut rng).unwrap();
    assert_eq!(h.independence(), 5);
    assert!(h.coefficients().iter().all(|&c| c < MERSENNE_61));
}

#[test]
fn scheme_distinguishes_random_subsets_often() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let k = 4;
    let trials = 400;
    let good = (0..trials)
        .filter(|_| {
            let s = HashScheme::build(10_000, k, &mut rng).unwrap();
            let mut subset = BTreeSet::new();
            while subset.len() < k {
                subset.insert(rng.gen_range(0..10_000u64));
            }
            s.distinguishes(&subset.into_iter().collect::<Vec<_>>())
        })
        .count();
    // Theory gives about 0.955 at k = 4.
    assert!(good as f64 / trials as f64 >= 0.9, "{good}/{trials}");
}

#[test]
fn scheme_text_round_trip_preserves_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let s = HashScheme::build(5000, 6, &mut rng).unwrap();
    let back = HashScheme::from_text(&s.to_text()).unwrap();
    for x in (0..5000).step_by(37) {
        assert_eq!(s.eval(x), back.eval(x));
    }
}
