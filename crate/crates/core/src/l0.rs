//! l0-sampling over a dynamic integer vector.
//!
//! Each of `R` repetitions nests `L` levels: level `l` keeps index `x` iff the
//! low `l` bits of a limited-independence hash `g_r(x)` are zero, so level 0
//! sees everything and each level keeps about half of the one below. Every
//! (repetition, level) pair owns a one-sparse recovery cell. A query returns
//! the first cell that verifies as holding exactly one index.
//!
//! All randomness lives in [`L0Params`]. Samplers built from the same `Arc`'d
//! parameters are linear sketches of one another and can be merged.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::hashing::{mul_mod, pow_mod, KWiseHash, MERSENNE_61};

const Q: u64 = MERSENNE_61;

fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Repetitions needed for failure probability `delta`: least `t` with `2^-t <= delta`.
fn repetitions(delta: f64) -> usize {
    let mut t = 0;
    while delta * ((1u64 << t) as f64) < 1.0 {
        t += 1;
    }
    t
}

/// `(c0, c1, fp) = (Σ x_i, Σ i x_i, Σ x_i z^i mod q)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OneSparseCell {
    pub c0: i64,
    pub c1: i128,
    pub fp: u64,
}

fn signed_mod(v: i64) -> u64 {
    v.rem_euclid(Q as i64) as u64
}

impl OneSparseCell {
    #[inline]
    fn add(&mut self, index: u64, delta: i64, power: u64) {
        self.c0 += delta;
        self.c1 += index as i128 * delta as i128;
        let term = mul_mod(signed_mod(delta), power, Q);
        self.fp = crate::hashing::add_mod(self.fp, term, Q);
    }

    fn merge(&mut self, other: &OneSparseCell) {
        self.c0 += other.c0;
        self.c1 += other.c1;
        self.fp = crate::hashing::add_mod(self.fp, other.fp, Q);
    }

    pub fn is_zero(&self) -> bool {
        self.c0 == 0 && self.c1 == 0 && self.fp == 0
    }

    /// `(index, multiplicity)` if the cell is consistent with a single live
    /// index below `universe` under fingerprint base `z`.
    pub fn decode(&self, z: u64, universe: u64) -> Option<(u64, i64)> {
        if self.c0 == 0 || self.c1 % self.c0 as i128 != 0 {
            return None;
        }
        let j = self.c1 / self.c0 as i128;
        if j < 0 || j >= universe as i128 {
            return None;
        }
        let j = j as u64;
        (mul_mod(signed_mod(self.c0), pow_mod(z, j, Q), Q) == self.fp).then_some((j, self.c0))
    }

    pub fn to_text(&self) -> String {
        format!("{} {} {}", self.c0, self.c1, self.fp)
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let t: Vec<&str> = s.split_whitespace().collect();
        let bad = || Error::parse(1, format!("cell must be `c0 c1 fp`, got `{s}`"));
        let [c0, c1, fp] = t[..] else {
            return Err(bad());
        };
        Ok(OneSparseCell {
            c0: c0.parse().map_err(|_| bad())?,
            c1: c1.parse().map_err(|_| bad())?,
            fp: fp.parse().map_err(|_| bad())?,
        })
    }
}

/// Shared randomness and shape of a family of samplers.
#[derive(Debug, PartialEq, Eq)]
pub struct L0Params {
    universe: u64,
    levels: usize,
    reps: usize,
    level_hash: Vec<KWiseHash>,
    z: Vec<u64>,
}

/// The cells one index lands in, with `z^index` precomputed for each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Touch {
    index: u64,
    cells: Vec<(u32, u64)>,
}

impl Touch {
    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

impl L0Params {
    /// Parameters for vectors indexed by `[universe]` with failure probability `delta`.
    pub fn new<R: Rng + ?Sized>(universe: u64, delta: f64, rng: &mut R) -> Result<Arc<Self>> {
        if universe == 0 {
            return Err(Error::invalid("sampler universe must be non-empty"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
        }
        let levels = ceil_log2(universe) as usize + 1;
        let reps = repetitions(delta);
        let kappa = reps + 2;
        let range = 1u64 << (levels - 1);
        let level_hash = (0..reps)
            .map(|_| KWiseHash::random(kappa, range, rng))
            .collect::<Result<_>>()?;
        let z = (0..reps * levels).map(|_| rng.gen_range(1..Q)).collect();
        Ok(Arc::new(L0Params {
            universe,
            levels,
            reps,
            level_hash,
            z,
        }))
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn repetitions(&self) -> usize {
        self.reps
    }

    /// Total cells per sampler, `levels * repetitions`.
    pub fn cells(&self) -> usize {
        self.levels * self.reps
    }

    pub fn touch(&self, index: u64) -> Touch {
        assert!(index < self.universe, "index {index} outside [0, {})", self.universe);
        let mut cells = Vec::with_capacity(2 * self.reps);
        for (r, g) in self.level_hash.iter().enumerate() {
            let hv = g.eval(index);
            let deepest = if hv == 0 {
                self.levels - 1
            } else {
                (hv.trailing_zeros() as usize).min(self.levels - 1)
            };
            for l in 0..=deepest {
                let c = r * self.levels + l;
                cells.push((c as u32, pow_mod(self.z[c], index, Q)));
            }
        }
        Touch { index, cells }
    }
}

/// A successful sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sample {
    pub index: u64,
    pub multiplicity: i64,
    /// Payload sum of the sampled index divided by its multiplicity.
    pub payload: i128,
}

#[derive(Clone, Debug)]
struct Slot {
    cell: u32,
    sketch: OneSparseCell,
    payload: i128,
}

/// One l0-sampler; only non-zero cells are stored.
///
/// Each update can carry an integer payload that is summed alongside the
/// counts; a successful sample reports the payload of its index. Callers use
/// it to attach a value (for instance a true edge weight) to indices.
#[derive(Clone, Debug)]
pub struct L0Sampler {
    params: Arc<L0Params>,
    slots: Vec<Slot>,
}

impl L0Sampler {
    pub fn new(params: Arc<L0Params>) -> Self {
        L0Sampler {
            params,
            slots: Vec::new(),
        }
    }

    pub fn params(&self) -> &Arc<L0Params> {
        &self.params
    }

    /// Adds `delta` at `index`.
    pub fn update(&mut self, index: u64, delta: i64) {
        let t = self.params.touch(index);
        self.apply(&t, delta, 0);
    }

    /// Adds `delta` at a precomputed touch, with payload `payload` per unit.
    pub fn apply(&mut self, touch: &Touch, delta: i64, payload: i64) {
        for &(cell, power) in &touch.cells {
            let pos = match self.slots.binary_search_by_key(&cell, |s| s.cell) {
                Ok(p) => p,
                Err(p) => {
                    self.slots.insert(
                        p,
                        Slot {
                            cell,
                            sketch: OneSparseCell::default(),
                            payload: 0,
                        },
                    );
                    p
                }
            };
            let slot = &mut self.slots[pos];
            slot.sketch.add(touch.index, delta, power);
            slot.payload += payload as i128 * delta as i128;
            if slot.sketch.is_zero() && slot.payload == 0 {
                self.slots.remove(pos);
            }
        }
    }

    /// True when every cell is zero (the vector is zero, barring collisions).
    pub fn is_zero(&self) -> bool {
        self.slots.is_empty()
    }

    /// Non-zero cells currently stored.
    pub fn stored_cells(&self) -> usize {
        self.slots.len()
    }

    /// First verifying cell in (repetition, level) order, or `None` on failure.
    pub fn query(&self) -> Option<Sample> {
        self.slots.iter().find_map(|s| {
            let z = self.params.z[s.cell as usize];
            let (index, multiplicity) = s.sketch.decode(z, self.params.universe)?;
            Some(Sample {
                index,
                multiplicity,
                payload: s.payload / multiplicity as i128,
            })
        })
    }

    /// Cell-wise sum with a sampler built from the same parameters.
    pub fn merge(&mut self, other: &L0Sampler) -> Result<()> {
        if !Arc::ptr_eq(&self.params, &other.params) && self.params != other.params {
            return Err(Error::IncompatibleSketch);
        }
        for s in &other.slots {
            match self.slots.binary_search_by_key(&s.cell, |x| x.cell) {
                Ok(p) => {
                    let slot = &mut self.slots[p];
                    slot.sketch.merge(&s.sketch);
                    slot.payload += s.payload;
                    if slot.sketch.is_zero() && slot.payload == 0 {
                        self.slots.remove(p);
                    }
                }
                Err(p) => self.slots.insert(p, s.clone()),
            }
        }
        Ok(())
    }

    /// Dense cell dump, one `c0 c1 fp` triple per line in cell order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut it = self.slots.iter().peekable();
        for c in 0..self.params.cells() as u32 {
            let cell = match it.peek() {
                Some(s) if s.cell == c => it.next().map(|s| s.sketch).unwrap(),
                _ => OneSparseCell::default(),
            };
            writeln!(out, "{}", cell.to_text()).unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(universe: u64, delta: f64, seed: u64) -> Arc<L0Params> {
        L0Params::new(universe, delta, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn shape() {
        let p = params(1000, 0.01, 1);
        assert_eq!(p.levels(), 11);
        assert_eq!(p.repetitions(), 7);
        assert_eq!(params(1, 0.5, 1).levels(), 1);
        assert!(L0Params::new(0, 0.1, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        assert!(L0Params::new(10, 1.0, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn insert_then_delete_cancels() {
        let mut s = L0Sampler::new(params(500, 0.05, 2));
        s.update(42, 1);
        assert!(!s.is_zero());
        s.update(42, -1);
        assert!(s.is_zero());
        assert!(s.query().is_none());
    }

    #[test]
    fn single_insert_sits_in_level_zero() {
        let p = params(500, 0.05, 3);
        let mut s = L0Sampler::new(p.clone());
        s.update(17, 1);
        let dump = s.to_text();
        let first = dump.lines().next().unwrap();
        let want = OneSparseCell {
            c0: 1,
            c1: 17,
            fp: pow_mod(p.z[0], 17, Q),
        };
        assert_eq!(OneSparseCell::from_text(first).unwrap(), want);
        assert_eq!(
            s.query(),
            Some(Sample {
                index: 17,
                multiplicity: 1,
                payload: 0
            })
        );
    }

    #[test]
    fn mixed_updates_never_return_dead_indices() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for trial in 0..50 {
            let mut s = L0Sampler::new(params(64, 0.05, 100 + trial));
            let mut live = [0i64; 64];
            for _ in 0..1000 {
                let i = rng.gen_range(0..64);
                if live[i] > 0 && rng.gen_bool(0.5) {
                    live[i] -= 1;
                    s.update(i as u64, -1);
                } else if live[i] == 0 {
                    live[i] += 1;
                    s.update(i as u64, 1);
                }
            }
            for (i, l) in live.iter_mut().enumerate() {
                if *l > 0 && i != 3 && i != 7 {
                    s.update(i as u64, -*l);
                    *l = 0;
                }
            }
            for i in [3usize, 7] {
                if live[i] == 0 {
                    s.update(i as u64, 1);
                }
            }
            let got = s.query().expect("support {3, 7} should sample");
            assert!(got.index == 3 || got.index == 7);
            assert_eq!(got.multiplicity, 1);
        }
    }

    #[test]
    fn payload_follows_the_sample() {
        let p = params(100, 0.05, 5);
        let mut s = L0Sampler::new(p.clone());
        s.apply(&p.touch(9), 1, 1234);
        s.apply(&p.touch(50), 1, 77);
        s.apply(&p.touch(50), -1, 77);
        let got = s.query().unwrap();
        assert_eq!((got.index, got.payload), (9, 1234));
    }

    #[test]
    fn merge_requires_shared_parameters() {
        let p = params(100, 0.1, 6);
        let mut a = L0Sampler::new(p.clone());
        let mut b = L0Sampler::new(p.clone());
        a.update(1, 1);
        b.update(2, 1);
        a.merge(&b).unwrap();
        let mut whole = L0Sampler::new(p);
        whole.update(2, 1);
        whole.update(1, 1);
        assert_eq!(a.to_text(), whole.to_text());
        let alien = L0Sampler::new(params(100, 0.1, 7));
        assert_eq!(a.merge(&alien), Err(Error::IncompatibleSketch));
    }

    #[test]
    fn two_index_cell_is_rejected() {
        let z = 12345u64;
        let mut c = OneSparseCell::default();
        c.add(3, 1, pow_mod(z, 3, Q));
        c.add(5, 1, pow_mod(z, 5, Q));
        // c1 / c0 = 4, an index that was never inserted.
        assert_eq!(c.c1 / c.c0 as i128, 4);
        assert_eq!(c.decode(z, 100), None);
    }

    #[test]
    fn cell_text_round_trip() {
        let c = OneSparseCell {
            c0: -3,
            c1: -170141183460469231731687303715884105728,
            fp: 99,
        };
        assert_eq!(OneSparseCell::from_text(&c.to_text()).unwrap(), c);
        assert!(OneSparseCell::from_text("1 2").is_err());
    }
}
