//! Segmented prime generation fused with on-the-fly supersingularity
//! filtering, and CRT prime selection for both evaluation algorithms.

use crate::arith::{Fp2El, Tower};
use crate::ec::is_supersingular;
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use once_cell::sync::Lazy;
use rayon::prelude::*;
use std::sync::Mutex;
use thiserror::Error;

/// Hard ceiling on sieving ranges.
pub const SIEVE_CEILING: u64 = 1 << 50;
/// Base primes never exceed this bound (√ of the ceiling).
const BASE_LIMIT: u64 = 1 << 25;

/// Errors from prime selection.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SieveError {
    /// The requested interval exceeds the 2^50 ceiling.
    #[error("sieve range [{lo}, {hi}] exceeds the supported ceiling")]
    RangeTooLarge { lo: u64, hi: u64 },
    /// The admissible-prime stream hit the ceiling before reaching the
    /// target product.
    #[error("prime stream exhausted before the CRT product reached its bound")]
    StreamExhausted,
    /// The curve model degenerates modulo this prime.
    #[error("bad reduction at q = {q}")]
    BadReduction { q: u64 },
}

/// Lazily grown table of base primes (doubling the limit on demand).
static BASE_PRIMES: Lazy<Mutex<(u64, Vec<u64>)>> =
    Lazy::new(|| Mutex::new((0, Vec::new())));

fn base_primes_up_to(limit: u64) -> Vec<u64> {
    assert!(limit <= BASE_LIMIT);
    let mut guard = BASE_PRIMES.lock().unwrap();
    if guard.0 < limit {
        let mut new_limit = guard.0.max(1 << 16);
        while new_limit < limit {
            new_limit = (new_limit * 2).min(BASE_LIMIT);
        }
        let n = new_limit as usize;
        let mut composite = vec![false; n + 1];
        let mut primes = Vec::new();
        for cand in 2..=n {
            if !composite[cand] {
                primes.push(cand as u64);
                let mut m = cand * cand;
                while m <= n {
                    composite[m] = true;
                    m += cand;
                }
            }
        }
        *guard = (new_limit, primes);
    }
    let cut = guard
        .1
        .partition_point(|&p| p <= limit);
    guard.1[..cut].to_vec()
}

/// The primes in a segment `[lo, hi]`, found by a segmented sieve of
/// Eratosthenes over the base-prime table.
#[derive(Clone, Debug)]
pub struct PrimeStream {
    pub lo: u64,
    pub hi: u64,
    base: Vec<u64>,
    bitmap: Vec<bool>,
}

impl PrimeStream {
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        let lo = self.lo;
        self.bitmap
            .iter()
            .enumerate()
            .filter(|(_, &is_p)| is_p)
            .map(move |(i, _)| lo + i as u64)
    }

    /// Number of base primes used (exposed for the scaling diagnostics).
    pub fn base_count(&self) -> usize {
        self.base.len()
    }
}

/// All primes in `[lo, hi]`, `hi ≤ 2^50`.
pub fn segmented_primes(lo: u64, hi: u64) -> Result<PrimeStream, SieveError> {
    if hi > SIEVE_CEILING || hi < lo {
        return Err(SieveError::RangeTooLarge { lo, hi });
    }
    let lo = lo.max(2);
    let width = (hi - lo + 1) as usize;
    let root = (hi as f64).sqrt() as u64 + 1;
    let base = base_primes_up_to(root.min(BASE_LIMIT));
    let mut bitmap = vec![true; width];
    for &p in &base {
        if p * p > hi {
            break;
        }
        let start = (lo.div_ceil(p) * p).max(p * p);
        let mut m = start;
        while m <= hi {
            bitmap[(m - lo) as usize] = false;
            m += p;
        }
        // p itself, when inside the segment, stays prime.
        if p >= lo && p <= hi {
            bitmap[(p - lo) as usize] = true;
        }
    }
    Ok(PrimeStream { lo, hi, base, bitmap })
}

/// A set of CRT primes with product exceeding a target bound.
#[derive(Clone, Debug)]
pub struct CrtPrimeSet {
    pub primes: Vec<u64>,
    pub product: BigUint,
    pub bound: BigUint,
}

/// The CRT primes for big-characteristic evaluation: consecutive primes
/// starting at the first prime `≥ 12(ℓ+2)+1` until their product exceeds
/// `B`. The lower bound guarantees at least ℓ+2 supersingular classes
/// modulo every member.
pub fn select_primes_bigchar(ell: u64, bound: &BigUint) -> CrtPrimeSet {
    let start = 12 * (ell + 2) + 1;
    let mut primes = Vec::new();
    let mut product = BigUint::one();
    let mut lo = start;
    let width = 1 << 12;
    while product <= *bound {
        let stream = segmented_primes(lo, lo + width).expect("small range");
        for q in stream.primes() {
            primes.push(q);
            product *= q;
            if product > *bound {
                break;
            }
        }
        lo += width + 1;
    }
    CrtPrimeSet { primes, product, bound: bound.clone() }
}

/// Whether the curve with j-invariant `j̄ mod q` is supersingular over
/// `F_{q²}`, for use as an on-the-fly filter. Fails with `BadReduction`
/// when the standard model degenerates modulo `q` (q ≤ 3, where
/// `108·1728 ≡ 0`).
pub fn supersingular_reduction_test(jbar: &BigUint, q: u64) -> Result<bool, SieveError> {
    if q <= 3 {
        return Err(SieveError::BadReduction { q });
    }
    let j = jbar.mod_floor(&BigUint::from(q)).to_u64().unwrap();
    // Congruence shortcuts for the canonical models.
    if j == 0 {
        return Ok(q % 3 == 2);
    }
    if j == 1728 % q {
        return Ok(q % 4 == 3);
    }
    let t = Tower::build(q, 1);
    Ok(is_supersingular(&t, Fp2El::from_base(j)))
}

/// The CRT primes for big-level evaluation: primes `q > Δ = ⌈log₂ B⌉`
/// (scanned in segments of length Δ, in parallel) such that `j̄ mod q` is
/// supersingular, until the product exceeds `B`.
pub fn select_primes_biglevel(jbar: &BigUint, bound: &BigUint) -> Result<CrtPrimeSet, SieveError> {
    let delta = bound.bits().max(8);
    let mut primes = Vec::new();
    let mut product = BigUint::one();
    let mut lo = delta + 1;
    const BATCH: u64 = 64;
    while product <= *bound {
        if lo > SIEVE_CEILING {
            return Err(SieveError::StreamExhausted);
        }
        // Sieve and filter a batch of segments in parallel; merge ascending.
        let segs: Vec<(u64, u64)> = (0..BATCH)
            .map(|i| {
                let l = lo + i * (delta + 1);
                (l, (l + delta).min(SIEVE_CEILING))
            })
            .filter(|(l, h)| l <= h)
            .collect();
        let admitted: Vec<Vec<u64>> = segs
            .par_iter()
            .map(|&(l, h)| {
                let stream = segmented_primes(l, h).expect("bounded segment");
                stream
                    .primes()
                    .filter(|&q| supersingular_reduction_test(jbar, q).unwrap_or(false))
                    .collect()
            })
            .collect();
        for qs in admitted {
            for q in qs {
                if product > *bound {
                    break;
                }
                primes.push(q);
                product *= q;
            }
        }
        lo += BATCH * (delta + 1);
    }
    Ok(CrtPrimeSet { primes, product, bound: bound.clone() })
}

/// Deterministic Miller–Rabin for u64 inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut a: u64, mut e: u64| {
        let mut acc = 1u64;
        a %= n;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, a);
            }
            a = mulmod(a, a);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    #[test]
    fn segment_examples() {
        let s = segmented_primes(10, 30).unwrap();
        assert_eq!(s.primes().collect::<Vec<_>>(), vec![11, 13, 17, 19, 23, 29]);
        let s = segmented_primes(2, 2).unwrap();
        assert_eq!(s.primes().collect::<Vec<_>>(), vec![2]);
        assert!(matches!(
            segmented_primes(2, SIEVE_CEILING + 1),
            Err(SieveError::RangeTooLarge { .. })
        ));
    }

    #[test]
    fn segment_matches_trial_division() {
        let lo = 1_000_000u64;
        let hi = lo + 10_000;
        let s = segmented_primes(lo, hi).unwrap();
        let got: Vec<u64> = s.primes().collect();
        let expect: Vec<u64> = (lo..=hi).filter(|&n| trial_division(n)).collect();
        assert_eq!(got, expect);
    }

    fn trial_division(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn segments_partition_independently() {
        let all: Vec<u64> = segmented_primes(100, 300).unwrap().primes().collect();
        let mut parts: Vec<u64> = segmented_primes(100, 199).unwrap().primes().collect();
        parts.extend(segmented_primes(200, 300).unwrap().primes());
        assert_eq!(all, parts);
    }

    #[test]
    fn bigchar_selection() {
        // ℓ = 5: first prime ≥ 85 is 89.
        let set = select_primes_bigchar(5, &BigUint::from_u64(2).unwrap());
        assert_eq!(set.primes, vec![89]);
        // Product strictly exceeds the bound; greedy minimality.
        let bound = BigUint::from_u64(1_000_000_000).unwrap();
        let set = select_primes_bigchar(5, &bound);
        assert!(set.product > bound);
        let trimmed: BigUint = set.primes[..set.primes.len() - 1]
            .iter()
            .map(|&q| BigUint::from(q))
            .product();
        assert!(trimmed <= bound);
        assert!(set.primes.iter().all(|&q| q >= 85));
        assert!(set.primes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn reduction_test_examples() {
        assert_eq!(supersingular_reduction_test(&BigUint::from(0u32), 11), Ok(true));
        assert_eq!(supersingular_reduction_test(&BigUint::from(1u32), 13), Ok(false));
        assert!(matches!(
            supersingular_reduction_test(&BigUint::from(5u32), 3),
            Err(SieveError::BadReduction { q: 3 })
        ));
    }

    #[test]
    fn biglevel_j_zero_admits_two_mod_three() {
        let bound = BigUint::from_u64(1 << 40).unwrap();
        let set = select_primes_biglevel(&BigUint::from(0u32), &bound).unwrap();
        assert!(set.product > bound);
        let delta = bound.bits();
        for &q in &set.primes {
            assert!(q > delta);
            assert_eq!(q % 3, 2, "j = 0 admits exactly q ≡ 2 (mod 3)");
        }
        // No admissible prime in range was skipped.
        let max = *set.primes.last().unwrap();
        let all: Vec<u64> = segmented_primes(delta + 1, max)
            .unwrap()
            .primes()
            .filter(|&q| q % 3 == 2)
            .collect();
        assert_eq!(set.primes, all);
    }

    #[test]
    fn biglevel_j_1728_admits_three_mod_four() {
        let bound = BigUint::from_u64(1 << 30).unwrap();
        let set = select_primes_biglevel(&BigUint::from(1728u32), &bound).unwrap();
        for &q in &set.primes {
            assert_eq!(q % 4, 3);
        }
    }

    #[test]
    fn miller_rabin_agrees_with_trial_division() {
        for n in 0..2000u64 {
            assert_eq!(is_prime_u64(n), trial_division(n), "n = {n}");
        }
        assert!(is_prime_u64((1 << 31) - 1));
        assert!(!is_prime_u64((1 << 31) + 1));
    }
}
