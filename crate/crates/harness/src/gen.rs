//! Stream generators: seeded random streams and the two lower-bound families.

use std::collections::{BTreeSet, HashSet};

use kmatch::{edge_universe, real, Edge, Error, Mode, Op, RealWeight, Result, Stream, StreamElement};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::seed::rng_for;

/// How random edge weights are drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightDist {
    /// Uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// `exp` of a uniform draw on `[ln lo, ln hi]`.
    LogUniform { lo: f64, hi: f64 },
}

impl WeightDist {
    fn check(&self) -> Result<()> {
        let (lo, hi) = match *self {
            WeightDist::Uniform { lo, hi } | WeightDist::LogUniform { lo, hi } => (lo, hi),
        };
        let ok = lo.is_finite() && hi.is_finite() && lo <= hi && lo >= 0.0;
        let ok = ok && !(matches!(self, WeightDist::LogUniform { .. }) && lo <= 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad weight range {self:?}")))
        }
    }

    fn real(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            WeightDist::Uniform { lo, hi } if lo == hi => lo,
            WeightDist::Uniform { lo, hi } => rng.gen_range(lo..hi),
            WeightDist::LogUniform { lo, hi } if lo == hi => lo,
            WeightDist::LogUniform { lo, hi } => rng.gen_range(lo.ln()..hi.ln()).exp(),
        }
    }

    /// An integer weight, at least 1.
    fn integer(&self, rng: &mut ChaCha8Rng) -> u64 {
        match *self {
            WeightDist::Uniform { lo, hi } => rng.gen_range(lo.ceil().max(1.0) as u64..=hi.floor().max(1.0) as u64),
            WeightDist::LogUniform { .. } => (self.real(rng).round() as u64).max(1),
        }
    }
}

/// Parameters of a random stream.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomSpec {
    pub n: u32,
    pub k: usize,
    pub inserts: usize,
    /// Deletions; dynamic streams only.
    pub deletes: usize,
    pub weights: WeightDist,
    pub seed: u64,
}

fn random_pair(n: u32, rng: &mut ChaCha8Rng) -> (u32, u32) {
    loop {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            return (a.min(b), a.max(b));
        }
    }
}

/// Insert-only stream of distinct random edges.
pub fn random_insert_stream(spec: &RandomSpec) -> Result<Stream<RealWeight>> {
    spec.weights.check()?;
    if spec.deletes != 0 {
        return Err(Error::InvalidParameter("insert-only streams have no deletions".into()));
    }
    if spec.inserts as u64 > edge_universe(spec.n) {
        return Err(Error::InvalidParameter(format!(
            "{} distinct edges do not fit on {} vertices",
            spec.inserts, spec.n
        )));
    }
    let mut rng = rng_for(spec.seed, 0);
    let mut seen = HashSet::new();
    let mut s = Stream::new(spec.n, spec.k, Mode::InsertOnly);
    while s.len() < spec.inserts {
        let (u, v) = random_pair(spec.n, &mut rng);
        if seen.insert((u, v)) {
            s.push(StreamElement::insert(u, v, real(spec.weights.real(&mut rng))));
        }
    }
    Ok(s)
}

/// Insert-only arrivals that may repeat a vertex pair, for streams longer
/// than the number of pairs.
pub fn random_insert_arrivals(n: u32, count: usize, weights: WeightDist, seed: u64) -> Result<Vec<Edge<RealWeight>>> {
    weights.check()?;
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two vertices".into()));
    }
    let mut rng = rng_for(seed, 0);
    Ok((0..count)
        .map(|_| {
            let (u, v) = random_pair(n, &mut rng);
            Edge::new(u, v, real(weights.real(&mut rng)))
        })
        .collect())
}

/// Dynamic stream: insertions of absent pairs interleaved with deletions of
/// live edges, each deletion carrying the live weight.
pub fn random_dynamic_stream(spec: &RandomSpec) -> Result<Stream<u64>> {
    spec.weights.check()?;
    if spec.deletes > spec.inserts {
        return Err(Error::InvalidParameter("more deletions than insertions".into()));
    }
    if spec.inserts as u64 > edge_universe(spec.n) {
        return Err(Error::InvalidParameter(format!(
            "{} insertions may not all be live on {} vertices",
            spec.inserts, spec.n
        )));
    }
    let mut rng = rng_for(spec.seed, 0);
    let mut s = Stream::new(spec.n, spec.k, Mode::Dynamic);
    let mut live: Vec<Edge<u64>> = Vec::new();
    let mut pairs: HashSet<(u32, u32)> = HashSet::new();
    let (mut ins, mut del) = (0, 0);
    while ins < spec.inserts || del < spec.deletes {
        // Deletions are spread so that the last one lands near the end.
        let left_ins = spec.inserts - ins;
        let left_del = spec.deletes - del;
        let delete =
            left_del > 0 && !live.is_empty() && (left_ins == 0 || rng.gen_range(0..left_ins + left_del) < left_del);
        if delete {
            let e = live.swap_remove(rng.gen_range(0..live.len()));
            pairs.remove(&e.endpoints());
            s.push(StreamElement {
                edge: e,
                op: Op::Delete,
            });
            del += 1;
        } else {
            let (u, v) = random_pair(spec.n, &mut rng);
            if !pairs.insert((u, v)) {
                continue;
            }
            let e = Edge::new(u, v, spec.weights.integer(&mut rng));
            live.push(e);
            s.push(StreamElement {
                edge: e,
                op: Op::Insert,
            });
            ins += 1;
        }
    }
    Ok(s)
}

/// Side length `k1 = ceil(sqrt(m))` of the index grid.
pub fn index_side(m: usize) -> usize {
    let mut k1 = 0;
    while k1 * k1 < m {
        k1 += 1;
    }
    k1
}

/// Grid cell of index `y` in `1..=m`, row-major, both coordinates 1-based.
pub fn index_cell(y: usize, k1: usize) -> (usize, usize) {
    ((y - 1) / k1 + 1, (y - 1) % k1 + 1)
}

/// The index family: a graph with a `2k1`-matching exactly when bit `z` of
/// `x` is set. `x[i]` is bit `i + 1`.
///
/// Vertices: `l_i = i-1`, `l*_i = k1+i-1`, `r_i = 2k1+i-1`, `r*_i = 3k1+i-1`,
/// then the star centre `4k1` and its leaves. Set bits become `l*_s r*_t`
/// edges, then the star is inserted, then `l_s l*_s` for `s != p_z` and
/// `r_t r*_t` for `t != q_z`. All weights are 1.
pub fn index_hard(x: &[bool], z: usize, n: u32) -> Result<Stream<RealWeight>> {
    let m = x.len();
    if m == 0 {
        return Err(Error::InvalidParameter("the bit string is empty".into()));
    }
    if !(1..=m).contains(&z) {
        return Err(Error::InvalidParameter(format!("z={z} lies outside 1..={m}")));
    }
    let k1 = index_side(m);
    let base = 4 * k1 as u32;
    // The star needs an edge, so two vertices beyond the grid.
    if n < base + 2 {
        return Err(Error::InvalidParameter(format!(
            "n must be at least 4*ceil(sqrt(m))+2 = {}, got {n}",
            base + 2
        )));
    }
    let k1u = k1 as u32;
    let (l, ls, r, rs) = (
        |i: usize| i as u32 - 1,
        |i: usize| k1u + i as u32 - 1,
        |i: usize| 2 * k1u + i as u32 - 1,
        |i: usize| 3 * k1u + i as u32 - 1,
    );
    let one = real(1.0);
    let mut s = Stream::new(n, 2 * k1, Mode::InsertOnly);
    for (y, _) in x.iter().enumerate().filter(|(_, &bit)| bit) {
        let (p, q) = index_cell(y + 1, k1);
        s.push(StreamElement::insert(ls(p), rs(q), one));
    }
    for leaf in base + 1..n {
        s.push(StreamElement::insert(base, leaf, one));
    }
    let (pz, qz) = index_cell(z, k1);
    for i in (1..=k1).filter(|&i| i != pz) {
        s.push(StreamElement::insert(l(i), ls(i), one));
    }
    for i in (1..=k1).filter(|&i| i != qz) {
        s.push(StreamElement::insert(r(i), rs(i), one));
    }
    Ok(s)
}

/// Length of the first phase of [`index_hard`]: set bits plus star edges.
pub fn index_hard_first_phase(x: &[bool], n: u32) -> usize {
    x.iter().filter(|&&b| b).count() + (n as usize - 4 * index_side(x.len()) - 1)
}

/// The partial-maximum family: path edges `v_{i-1} v_i` of weight `a_i`
/// for `i` in `1..=m`, then deletions of the edges indexed by `b`.
pub fn partial_max_hard(a: &[u64], b: &BTreeSet<usize>, n: u32) -> Result<Stream<u64>> {
    let m = a.len();
    if m == 0 {
        return Err(Error::InvalidParameter("the value sequence is empty".into()));
    }
    if a.iter().collect::<BTreeSet<_>>().len() != m {
        return Err(Error::InvalidParameter("values must be distinct".into()));
    }
    if b.len() >= m || b.iter().any(|&i| !(1..=m).contains(&i)) {
        return Err(Error::InvalidParameter(format!("B must be a proper subset of 1..={m}")));
    }
    if (n as usize) < m + 1 {
        return Err(Error::InvalidParameter(format!(
            "a path of {m} edges needs n >= {}",
            m + 1
        )));
    }
    let mut s = Stream::new(n, 1, Mode::Dynamic);
    for (i, &w) in a.iter().enumerate() {
        s.push(StreamElement::insert(i as u32, i as u32 + 1, w));
    }
    for &i in b {
        s.push(StreamElement::delete(i as u32 - 1, i as u32, a[i - 1]));
    }
    Ok(s)
}
