//! Hash families over a prime field and the two-level scheme used by the
//! dynamic matcher.
//!
//! Everything here evaluates with 128-bit intermediates, so no input below the
//! prime can overflow. The default prime is the Mersenne prime 2^61 - 1, which
//! gets a shift-and-add reduction instead of a division.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};

/// 2^61 - 1.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

#[inline]
fn reduce61(x: u128) -> u64 {
    let lo = (x as u64) & MERSENNE_61;
    let hi = (x >> 61) as u64;
    // x < 2^122 so hi < 2^61 and lo + hi < 2^62.
    let s = lo + hi;
    let s = (s & MERSENNE_61) + (s >> 61);
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

/// `a * b mod p`, for `a, b < p`.
#[inline]
pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    let prod = a as u128 * b as u128;
    if p == MERSENNE_61 {
        reduce61(prod)
    } else {
        (prod % p as u128) as u64
    }
}

/// `a + b mod p`, for `a, b < p`.
#[inline]
pub fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    let p = p as u128;
    (if s >= p { s - p } else { s }) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for b in BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `h(x) = ((a x + b) mod p) mod r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniversalHash {
    a: u64,
    b: u64,
    p: u64,
    r: u64,
}

impl UniversalHash {
    pub fn new(a: u64, b: u64, p: u64, r: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::invalid(format!("modulus {p} is not prime")));
        }
        if a == 0 || a >= p || b >= p {
            return Err(Error::invalid(format!(
                "need 1 <= a < p and 0 <= b < p, got a={a}, b={b}, p={p}"
            )));
        }
        if r == 0 {
            return Err(Error::invalid("hash range must be at least 1"));
        }
        Ok(UniversalHash { a, b, p, r })
    }

    /// Draws `(a, b)` uniformly over the Mersenne-61 field.
    pub fn random<R: Rng + ?Sized>(r: u64, rng: &mut R) -> Result<Self> {
        let p = MERSENNE_61;
        Self::new(rng.gen_range(1..p), rng.gen_range(0..p), p, r)
    }

    #[inline]
    pub fn eval(&self, x: u64) -> u64 {
        let x = x % self.p;
        add_mod(mul_mod(self.a, x, self.p), self.b, self.p) % self.r
    }

    pub fn range(&self) -> u64 {
        self.r
    }

    pub fn coefficients(&self) -> (u64, u64) {
        (self.a, self.b)
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }
}

/// A random polynomial of degree `kappa - 1` over `F_p`, reduced into `[r]`.
///
/// Coefficients are stored lowest degree first, so `[b, a]` is `a x + b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KWiseHash {
    coeffs: Vec<u64>,
    p: u64,
    r: u64,
}

impl KWiseHash {
    pub fn new(coeffs: Vec<u64>, p: u64, r: u64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("independence degree must be at least 1"));
        }
        if !is_prime(p) {
            return Err(Error::invalid(format!("modulus {p} is not prime")));
        }
        if let Some(c) = coeffs.iter().find(|&&c| c >= p) {
            return Err(Error::invalid(format!("coefficient {c} is not below p={p}")));
        }
        if r == 0 {
            return Err(Error::invalid("hash range must be at least 1"));
        }
        Ok(KWiseHash { coeffs, p, r })
    }

    pub fn random<R: Rng + ?Sized>(kappa: usize, r: u64, rng: &mut R) -> Result<Self> {
        let p = MERSENNE_61;
        let coeffs = (0..kappa).map(|_| rng.gen_range(0..p)).collect();
        Self::new(coeffs, p, r)
    }

    /// Polynomial value in `F_p` before the range reduction.
    #[inline]
    pub fn eval_field(&self, x: u64) -> u64 {
        let x = x % self.p;
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| add_mod(mul_mod(acc, x, self.p), c, self.p))
    }

    #[inline]
    pub fn eval(&self, x: u64) -> u64 {
        self.eval_field(x) % self.r
    }

    pub fn independence(&self) -> usize {
        self.coeffs.len()
    }

    pub fn range(&self) -> u64 {
        self.r
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coeffs
    }
}

/// Sizes of the two-level scheme for a given `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashParams {
    pub k: usize,
    /// Independence of the level-one function.
    pub kappa: usize,
    /// Level-one range; a power of two.
    pub d1: u64,
    /// Number of level-two functions.
    pub d2: u64,
    /// Level-two range.
    pub d3: u64,
    /// Total image size, `d1 * d2 * d3`.
    pub d4: u64,
}

impl HashParams {
    pub fn for_k(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid(format!(
                "the hash scheme needs k >= 2 (ln k vanishes at k = 1), got {k}"
            )));
        }
        let ln = (k as f64).ln();
        let kappa = (12.0 * ln).ceil() as usize;
        let target = k as f64 / ln;
        let mut d1 = 1u64;
        while (d1 as f64) < target {
            d1 *= 2;
        }
        let d2 = (8.0 * ln).ceil() as u64;
        let root = (13.0 * ln).ceil() as u64;
        let d3 = root * root;
        Ok(HashParams {
            k,
            kappa,
            d1,
            d2,
            d3,
            d4: d1 * d2 * d3,
        })
    }
}

/// The bundle `H+ = {h_1+, ..., h_d2+}` with
/// `h_i+(x) = f(x) d2 d3 + (i - 1) d3 + h_i(x)`.
///
/// `f` splits the universe into `d1` level-one buckets `U_j`. Inside the block
/// of bucket `j`, each `h_i` owns its own interval of length `d3`, so the
/// images of different buckets never meet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashScheme {
    params: HashParams,
    f: KWiseHash,
    h: Vec<UniversalHash>,
}

impl HashScheme {
    pub fn build<R: Rng + ?Sized>(universe: u64, k: usize, rng: &mut R) -> Result<Self> {
        let params = HashParams::for_k(k)?;
        if universe < k as u64 {
            return Err(Error::invalid(format!(
                "universe of size {universe} is smaller than k={k}"
            )));
        }
        let f = KWiseHash::random(params.kappa, params.d1, rng)?;
        let h = (0..params.d2)
            .map(|_| UniversalHash::random(params.d3, rng))
            .collect::<Result<_>>()?;
        Ok(HashScheme { params, f, h })
    }

    /// Assembles a scheme from explicit parts; ranges must match `HashParams::for_k(k)`.
    pub fn from_parts(k: usize, f: KWiseHash, h: Vec<UniversalHash>) -> Result<Self> {
        let params = HashParams::for_k(k)?;
        if f.independence() != params.kappa || f.range() != params.d1 {
            return Err(Error::invalid(
                "level-one function does not match the scheme parameters",
            ));
        }
        if h.len() as u64 != params.d2 || h.iter().any(|g| g.range() != params.d3) {
            return Err(Error::invalid("level-two functions do not match the scheme parameters"));
        }
        Ok(HashScheme { params, f, h })
    }

    pub fn params(&self) -> &HashParams {
        &self.params
    }

    pub fn level_one(&self) -> &KWiseHash {
        &self.f
    }

    pub fn level_two(&self) -> &[UniversalHash] {
        &self.h
    }

    /// Level-one bucket `f(x)`.
    #[inline]
    pub fn bucket(&self, x: u64) -> u64 {
        self.f.eval(x)
    }

    /// Writes `H+(x)` into `out` (cleared first), ordered by `i`.
    pub fn eval_into(&self, x: u64, out: &mut Vec<u64>) {
        out.clear();
        let HashParams { d2, d3, .. } = self.params;
        let base = self.bucket(x) * d2 * d3;
        out.extend(self.h.iter().enumerate().map(|(i, h)| base + i as u64 * d3 + h.eval(x)));
    }

    pub fn eval(&self, x: u64) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.h.len());
        self.eval_into(x, &mut out);
        out
    }

    /// True iff every non-empty `S ∩ U_j` is mapped injectively by some `h_i`.
    pub fn distinguishes(&self, subset: &[u64]) -> bool {
        let mut by_bucket: Vec<(u64, u64)> = subset.iter().map(|&x| (self.bucket(x), x)).collect();
        by_bucket.sort_unstable();
        let mut images = Vec::new();
        by_bucket.chunk_by(|a, b| a.0 == b.0).all(|group| {
            group.len() == 1
                || self.h.iter().any(|h| {
                    images.clear();
                    images.extend(group.iter().map(|&(_, x)| h.eval(x)));
                    images.sort_unstable();
                    images.windows(2).all(|w| w[0] != w[1])
                })
        })
    }

    /// Members of `candidates` whose `H+` image contains `q`.
    pub fn inverse_class(&self, q: u64, candidates: impl IntoIterator<Item = u64>) -> Vec<u64> {
        let HashParams { d2, d3, d4, .. } = self.params;
        if q >= d4 {
            return Vec::new();
        }
        let j = q / (d2 * d3);
        let i = ((q % (d2 * d3)) / d3) as usize;
        let val = q % d3;
        candidates
            .into_iter()
            .filter(|&x| self.bucket(x) == j && self.h[i].eval(x) == val)
            .collect()
    }

    /// Text form: `k d1 d2 d3 d4 p`, then the level-one coefficients on one
    /// line, then one `a b` line per level-two function.
    pub fn to_text(&self) -> String {
        let HashParams { k, d1, d2, d3, d4, .. } = self.params;
        let mut out = String::new();
        writeln!(out, "{k} {d1} {d2} {d3} {d4} {}", self.f.p).unwrap();
        let coeffs: Vec<String> = self.f.coeffs.iter().map(u64::to_string).collect();
        writeln!(out, "{}", coeffs.join(" ")).unwrap();
        for h in &self.h {
            writeln!(out, "{} {}", h.a, h.b).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let mut numbers = |what: &str| -> Result<(usize, Vec<u64>)> {
            let (no, line) = lines.next().ok_or_else(|| Error::parse(0, format!("missing {what}")))?;
            let nums = line
                .split_whitespace()
                .map(|t| t.parse::<u64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(no, format!("{what}: {e}")))?;
            Ok((no, nums))
        };
        let (no, header) = numbers("header")?;
        let [k, d1, d2, d3, d4, p] = header[..] else {
            return Err(Error::parse(no, "header must be `k d1 d2 d3 d4 p`"));
        };
        let params = HashParams::for_k(k as usize)?;
        if (d1, d2, d3, d4) != (params.d1, params.d2, params.d3, params.d4) {
            return Err(Error::parse(no, "header sizes disagree with k"));
        }
        let (_, coeffs) = numbers("level-one coefficients")?;
        let f = KWiseHash::new(coeffs, p, d1)?;
        let mut h = Vec::with_capacity(d2 as usize);
        for _ in 0..d2 {
            let (no, ab) = numbers("level-two function")?;
            let [a, b] = ab[..] else {
                return Err(Error::parse(no, "expected `a b`"));
            };
            h.push(UniversalHash::new(a, b, p, d3)?);
        }
        Self::from_parts(k as usize, f, h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mersenne_reduction_matches_u128_remainder() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let a = rng.gen_range(0..MERSENNE_61);
            let b = rng.gen_range(0..MERSENNE_61);
            let want = ((a as u128 * b as u128) % MERSENNE_61 as u128) as u64;
            assert_eq!(mul_mod(a, b, MERSENNE_61), want);
        }
        let top = MERSENNE_61 - 1;
        assert_eq!(mul_mod(top, top, MERSENNE_61), 1);
    }

    #[test]
    fn primality() {
        assert!(is_prime(13));
        assert!(is_prime(MERSENNE_61));
        assert!(!is_prime(1));
        assert!(!is_prime(91));
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn universal_hand_values() {
        let h = UniversalHash::new(3, 5, 13, 4).unwrap();
        assert_eq!(h.eval(7), 0);
        assert_eq!(h.eval(2), 3);
        let id = UniversalHash::new(1, 0, 13, 13).unwrap();
        for x in 0..13 {
            assert_eq!(id.eval(x), x);
        }
    }

    #[test]
    fn universal_rejects_bad_parameters() {
        assert!(UniversalHash::new(0, 1, 13, 4).is_err());
        assert!(UniversalHash::new(13, 1, 13, 4).is_err());
        assert!(UniversalHash::new(2, 13, 13, 4).is_err());
        assert!(UniversalHash::new(2, 1, 12, 4).is_err());
        assert!(UniversalHash::new(2, 1, 13, 0).is_err());
    }

    #[test]
    fn kwise_small_cases() {
        let c = KWiseHash::new(vec![11], 13, 5).unwrap();
        assert!((0..50).all(|x| c.eval(x) == 1));
        let id = KWiseHash::new(vec![0, 1], 13, 13).unwrap();
        assert_eq!(id.eval(9), 9);
        let lin = KWiseHash::new(vec![5, 3], 13, 4).unwrap();
        let uni = UniversalHash::new(3, 5, 13, 4).unwrap();
        assert!((0..100).all(|x| lin.eval(x) == uni.eval(x)));
    }

    #[test]
    fn params_for_small_k() {
        let p8 = HashParams::for_k(8).unwrap();
        assert_eq!((p8.d1, p8.d2, p8.d3, p8.d4, p8.kappa), (4, 17, 784, 53_312, 25));
        let p4 = HashParams::for_k(4).unwrap();
        assert_eq!((p4.d1, p4.d2, p4.d3), (4, 12, 361));
        // 13 ln 2 = 9.01, so the square root of d3 rounds up to 10.
        let p2 = HashParams::for_k(2).unwrap();
        assert_eq!((p2.d1, p2.d2, p2.d3), (4, 6, 100));
        assert!(matches!(HashParams::for_k(1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn d1_brackets_k_over_ln_k() {
        for k in 2..2000 {
            let p = HashParams::for_k(k).unwrap();
            let t = k as f64 / (k as f64).ln();
            assert!(p.d1.is_power_of_two());
            assert!(t <= p.d1 as f64);
            assert!(p.d1 == 1 || ((p.d1 / 2) as f64) < t);
        }
    }

    #[test]
    fn offset_formula_example() {
        let p = HashParams::for_k(8).unwrap();
        let (f, i, hi) = (2u64, 3u64, 10u64);
        assert_eq!(f * p.d2 * p.d3 + (i - 1) * p.d3 + hi, 28_234);
    }

    fn scheme(k: usize, seed: u64) -> HashScheme {
        HashScheme::build(100_000, k, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn eval_has_block_structure() {
        let s = scheme(8, 3);
        let p = *s.params();
        for x in 0..500 {
            let img = s.eval(x);
            assert_eq!(img.len() as u64, p.d2);
            for (i, &q) in img.iter().enumerate() {
                assert!(q < p.d4);
                assert_eq!(q / (p.d2 * p.d3), s.bucket(x));
                assert_eq!((q % (p.d2 * p.d3)) / p.d3, i as u64);
            }
            assert!(img.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn distinguishes_trivial_cases() {
        let s = scheme(8, 4);
        assert!(s.distinguishes(&[42]));
        assert!(s.distinguishes(&[]));
        // One element per level-one bucket.
        let mut picked = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for x in 0.. {
            if seen.insert(s.bucket(x)) {
                picked.push(x);
            }
            if seen.len() as u64 == s.params().d1 {
                break;
            }
        }
        assert!(s.distinguishes(&picked));
    }

    #[test]
    fn inverse_class_matches_forward_image() {
        let s = scheme(4, 5);
        for x in 0..200u64 {
            for q in s.eval(x) {
                assert!(s.inverse_class(q, 0..200).contains(&x));
            }
        }
        let q = s.eval(7)[0];
        for y in s.inverse_class(q, 0..200) {
            assert!(s.eval(y).contains(&q));
        }
        assert!(s.inverse_class(s.params().d4, 0..10).is_empty());
    }

    #[test]
    fn text_round_trip() {
        let s = scheme(6, 9);
        let text = s.to_text();
        let back = HashScheme::from_text(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn text_rejects_mismatched_header() {
        let s = scheme(6, 9);
        let text = s.to_text().replacen("6 ", "7 ", 1);
        assert!(HashScheme::from_text(&text).is_err());
        assert!(HashScheme::from_text("").is_err());
    }

    #[test]
    fn build_rejects_k_one_and_tiny_universe() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(HashScheme::build(10, 1, &mut rng).is_err());
        assert!(HashScheme::build(3, 4, &mut rng).is_err());
    }
}
