//! Height bounds and streaming explicit Chinese-remainder reconstruction.
//!
//! The CRT-based evaluation strategies compute each coefficient of the
//! output polynomial modulo many small primes `q` and reconstruct its value
//! modulo the target characteristic `p` without ever materializing the
//! (potentially enormous) integer. The accumulator below keeps only
//! `O(ℓ · log p)` state between per-prime updates: one running sum mod `p`
//! and one fixed-point rational sum per coefficient.
//!
//! Because the reconstructed coefficients are signed, finalization lifts
//! into the symmetric range `(−∏q/2, ∏q/2]` before reducing mod `p`; a
//! non-negative lift would corrupt every negative coefficient.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from the accumulator protocol.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CrtError {
    /// The same modulus was supplied to `crt_update` twice.
    #[error("modulus {q} already consumed by an earlier update")]
    ModulusReuse { q: u64 },
    /// `crt_finalize` was called before all moduli were updated.
    #[error("{missing} moduli still awaiting updates at finalization")]
    IncompleteUpdateSet { missing: usize },
    /// The update names a modulus the accumulator was not built with.
    #[error("modulus {q} is not part of the accumulator's prime set")]
    UnknownModulus { q: u64 },
    /// Residue vectors must all share one length.
    #[error("residue vector of length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// An upper bound `B = 2^exponent` on the absolute value of the integer
/// coefficients being reconstructed, stored as its binary exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct HeightBound {
    /// `⌈log₂ B⌉` for the algorithm-specific formula.
    pub exponent: u64,
}

impl HeightBound {
    /// The bound as an integer, `2^exponent`.
    pub fn bound(&self) -> BigUint {
        BigUint::one() << self.exponent
    }
}

/// Rounds a sum of exact binary logarithms up to an integer exponent.
/// Rounding happens once, at the end: under-rounding any intermediate term
/// could leave the CRT modulus product short of the true height.
fn ceil_log_sum(terms: &[f64]) -> u64 {
    let total: f64 = terms.iter().sum();
    total.ceil() as u64
}

/// Height bound for big-characteristic evaluation:
/// `B = 2^{6ℓ·log₂ℓ + 18ℓ + log₂p + log₂(ℓ+2)}`.
pub fn height_bound_bigchar(ell: u64, p: u64) -> HeightBound {
    let l = ell as f64;
    let exponent = ceil_log_sum(&[
        6.0 * l * l.log2(),
        18.0 * l,
        (p as f64).log2(),
        (l + 2.0).log2(),
    ]);
    HeightBound { exponent }
}

/// Height bound for big-level evaluation:
/// `B = 2^{6ℓ·log₂ℓ + 18ℓ + (ℓ+1)·log₂j̄ + log₂(ℓ+2)}`.
/// Lifts `j̄ ∈ {0, 1}` are padded to 2 so the logarithm stays positive.
pub fn height_bound_biglevel(ell: u64, jbar: &BigUint) -> HeightBound {
    let l = ell as f64;
    let two = BigUint::from(2u32);
    let jpad = if *jbar < two { &two } else { jbar };
    // Exact enough: j̄ < 2^64 throughout the library, so to_f64 is faithful
    // to well below the final ceiling.
    let log_j = jpad.to_f64().expect("finite lift").log2();
    let exponent = ceil_log_sum(&[
        6.0 * l * l.log2(),
        18.0 * l,
        (l + 1.0) * log_j,
        (l + 2.0).log2(),
    ]);
    HeightBound { exponent }
}

/// The integer powers `(j^1 mod p, …, j^{ℓ+1} mod p)` lifted to `[0, p−1]`.
pub fn lift_powers(p: u64, j: u64, ell: u64) -> Vec<u64> {
    let j = j % p;
    let mut out = Vec::with_capacity(ell as usize + 1);
    let mut acc = 1u64;
    for _ in 0..=ell {
        acc = ((acc as u128 * j as u128) % p as u128) as u64;
        out.push(acc);
    }
    out
}

/// Fractional fixed-point scale for the rounding sums (64 fractional bits;
/// the per-term error is below 2⁻⁶⁴, so thousands of terms stay far from a
/// rounding boundary).
const FRAC_BITS: u32 = 64;

/// Streaming explicit-CRT state: consumes one residue vector per modulus,
/// in any order, then reduces the symmetric-range reconstruction mod `p`.
#[derive(Debug, Clone)]
pub struct CrtAccumulator {
    p: u64,
    moduli: Vec<u64>,
    used: Vec<bool>,
    /// `(M/q)⁻¹ mod q` per modulus.
    inv: Vec<u64>,
    /// `(M/q) mod p` per modulus.
    mq_mod_p: Vec<u64>,
    /// `M mod p`.
    m_mod_p: u64,
    /// Residue-vector length, fixed by the first update.
    width: Option<usize>,
    /// Per-coefficient `Σ a_q·(M/q) mod p`, `a_q` the symmetric residue.
    sum_p: Vec<u64>,
    /// Per-coefficient `Σ a_q/q` in 64-bit fixed point.
    frac: Vec<i128>,
}

/// Resumable snapshot of an accumulator: the target modulus, the prime set
/// with its consumption flags, and the per-coefficient running sums.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct CrtCheckpoint {
    pub p: u64,
    pub moduli: Vec<u64>,
    pub used: Vec<bool>,
    pub width: Option<usize>,
    pub sum_p: Vec<u64>,
    /// Fixed-point fractional sums, split for portable serialization.
    pub frac: Vec<(i64, u64)>,
}

fn inv_mod(a: u64, q: u64) -> u64 {
    // Extended Euclid; q is prime and a ≢ 0.
    let (mut r0, mut r1) = (q as i128, (a % q) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (t0, t1) = (t1, t0 - k * t1);
    }
    debug_assert_eq!(r0, 1, "modulus not coprime to cofactor");
    (t0.rem_euclid(q as i128)) as u64
}

/// Builds the accumulator: per-modulus cofactor inverses and cofactor
/// images mod `p`, via one big-integer division per modulus.
pub fn crt_precompute(moduli: &[u64], p: u64) -> CrtAccumulator {
    let m: BigUint = moduli.iter().map(|&q| BigUint::from(q)).product();
    let mut inv = Vec::with_capacity(moduli.len());
    let mut mq_mod_p = Vec::with_capacity(moduli.len());
    for &q in moduli {
        let mq = &m / q;
        let mq_q = (&mq % q).to_u64().unwrap();
        inv.push(inv_mod(mq_q, q));
        mq_mod_p.push((&mq % p).to_u64().unwrap());
    }
    CrtAccumulator {
        p,
        moduli: moduli.to_vec(),
        used: vec![false; moduli.len()],
        inv,
        mq_mod_p,
        m_mod_p: (&m % p).to_u64().unwrap(),
        width: None,
        sum_p: Vec::new(),
        frac: Vec::new(),
    }
}

impl CrtAccumulator {
    /// The target characteristic.
    pub fn target(&self) -> u64 {
        self.p
    }

    /// The modulus set, in construction order.
    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    /// Snapshot for resuming an interrupted evaluation.
    pub fn checkpoint(&self) -> CrtCheckpoint {
        CrtCheckpoint {
            p: self.p,
            moduli: self.moduli.clone(),
            used: self.used.clone(),
            width: self.width,
            sum_p: self.sum_p.clone(),
            frac: self
                .frac
                .iter()
                .map(|&f| ((f >> 64) as i64, f as u64))
                .collect(),
        }
    }

    /// Rebuilds an accumulator from a snapshot (redoing the cheap
    /// precomputation, which is not part of the checkpoint).
    pub fn from_checkpoint(ck: &CrtCheckpoint) -> CrtAccumulator {
        let mut acc = crt_precompute(&ck.moduli, ck.p);
        acc.used = ck.used.clone();
        acc.width = ck.width;
        acc.sum_p = ck.sum_p.clone();
        acc.frac = ck
            .frac
            .iter()
            .map(|&(hi, lo)| ((hi as i128) << 64) | lo as i128)
            .collect();
        acc
    }
}

/// Folds one modulus' residue vector into the running sums. Each modulus
/// may be consumed exactly once; vectors must all share one length.
pub fn crt_update(acc: &mut CrtAccumulator, q: u64, residues: &[u64]) -> Result<(), CrtError> {
    let k = acc
        .moduli
        .iter()
        .position(|&m| m == q)
        .ok_or(CrtError::UnknownModulus { q })?;
    if acc.used[k] {
        return Err(CrtError::ModulusReuse { q });
    }
    match acc.width {
        None => {
            acc.width = Some(residues.len());
            acc.sum_p = vec![0; residues.len()];
            acc.frac = vec![0; residues.len()];
        }
        Some(w) if w != residues.len() => {
            return Err(CrtError::LengthMismatch {
                expected: w,
                got: residues.len(),
            });
        }
        _ => {}
    }
    acc.used[k] = true;
    let p = acc.p as i128;
    for (i, &r) in residues.iter().enumerate() {
        // Symmetric per-prime contribution a_q = r·(M/q)⁻¹ in (−q/2, q/2].
        let a = ((r % q) as u128 * acc.inv[k] as u128 % q as u128) as u64;
        let a = if a > q / 2 { a as i128 - q as i128 } else { a as i128 };
        let s = (acc.sum_p[i] as i128 + a * acc.mq_mod_p[k] as i128).rem_euclid(p);
        acc.sum_p[i] = s as u64;
        // a/q in fixed point, rounded to nearest (error < one ulp).
        acc.frac[i] += ((a << FRAC_BITS) + q as i128 / 2).div_euclid(q as i128);
    }
    Ok(())
}

/// Completes the reconstruction: per coefficient, the reduction mod `p` of
/// the unique integer in `(−∏q/2, ∏q/2]` matching every residue.
pub fn crt_finalize(acc: &CrtAccumulator) -> Result<Vec<u64>, CrtError> {
    let missing = acc.used.iter().filter(|&&u| !u).count();
    if missing > 0 {
        return Err(CrtError::IncompleteUpdateSet { missing });
    }
    let p = acc.p as i128;
    let out = acc
        .sum_p
        .iter()
        .zip(&acc.frac)
        .map(|(&s, &f)| {
            // Σ a_q·(M/q) = M·(Σ a_q/q); subtracting round(Σ a_q/q)·M
            // leaves the symmetric representative.
            let r = (f + (1i128 << (FRAC_BITS - 1))) >> FRAC_BITS;
            (s as i128 - r * acc.m_mod_p as i128).rem_euclid(p) as u64
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::{BigInt, Sign};
    use num_integer::Integer;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bigchar_bound_examples() {
        assert_eq!(height_bound_bigchar(5, 101).exponent, 170);
        // Monotone in ℓ and p.
        let mut prev = 0;
        for ell in [2u64, 3, 5, 7, 11, 13] {
            let e = height_bound_bigchar(ell, 101).exponent;
            assert!(e > prev);
            prev = e;
        }
        assert!(height_bound_bigchar(5, 1009).exponent > height_bound_bigchar(5, 101).exponent);
    }

    #[test]
    fn biglevel_bound_examples() {
        assert_eq!(height_bound_biglevel(5, &BigUint::from(2u32)).exponent, 169);
        // 0 and 1 pad to 2.
        assert_eq!(
            height_bound_biglevel(5, &BigUint::from(0u32)).exponent,
            height_bound_biglevel(5, &BigUint::from(2u32)).exponent
        );
        // Exceeds the big-characteristic bound once (ℓ+1)·log j̄ > log p.
        let big_j = BigUint::from(1u64 << 40);
        assert!(
            height_bound_biglevel(5, &big_j).exponent > height_bound_bigchar(5, 1009).exponent
        );
    }

    #[test]
    fn lift_powers_examples() {
        assert_eq!(lift_powers(7, 3, 2), vec![3, 2, 6]);
        assert_eq!(lift_powers(101, 1, 4), vec![1; 5]);
        assert_eq!(lift_powers(101, 0, 4), vec![0; 5]);
    }

    #[test]
    fn two_modulus_reconstruction() {
        // Residues (2 mod 3, 3 mod 5) determine 8 mod 15; the symmetric
        // representative in (−7.5, 7.5] is −7, i.e. 0 mod 7.
        let mut acc = crt_precompute(&[3, 5], 7);
        crt_update(&mut acc, 3, &[2]).unwrap();
        crt_update(&mut acc, 5, &[3]).unwrap();
        assert_eq!(crt_finalize(&acc).unwrap(), vec![0]);
        // A value inside the symmetric range comes back on the nose:
        // 4 ≡ (1 mod 3, 4 mod 5) → 4 mod 7.
        let mut acc = crt_precompute(&[3, 5], 7);
        crt_update(&mut acc, 3, &[1]).unwrap();
        crt_update(&mut acc, 5, &[4]).unwrap();
        assert_eq!(crt_finalize(&acc).unwrap(), vec![4]);
        // And a negative one: −4 ≡ (2 mod 3, 1 mod 5) → 3 mod 7.
        let mut acc = crt_precompute(&[3, 5], 7);
        crt_update(&mut acc, 3, &[2]).unwrap();
        crt_update(&mut acc, 5, &[1]).unwrap();
        assert_eq!(crt_finalize(&acc).unwrap(), vec![3]);
    }

    #[test]
    fn single_modulus_identity() {
        let mut acc = crt_precompute(&[101], 97);
        crt_update(&mut acc, 101, &[41]).unwrap();
        assert_eq!(crt_finalize(&acc).unwrap(), vec![41 % 97]);
    }

    #[test]
    fn protocol_errors() {
        let mut acc = crt_precompute(&[3, 5], 7);
        crt_update(&mut acc, 3, &[1]).unwrap();
        assert_eq!(crt_update(&mut acc, 3, &[1]), Err(CrtError::ModulusReuse { q: 3 }));
        assert_eq!(crt_update(&mut acc, 11, &[1]), Err(CrtError::UnknownModulus { q: 11 }));
        assert_eq!(
            crt_update(&mut acc, 5, &[1, 2]),
            Err(CrtError::LengthMismatch { expected: 1, got: 2 })
        );
        assert_eq!(
            crt_finalize(&acc),
            Err(CrtError::IncompleteUpdateSet { missing: 1 })
        );
    }

    fn random_moduli(rng: &mut impl Rng, min_bits: u64) -> Vec<u64> {
        let mut qs = Vec::new();
        let mut bits = 0.0f64;
        while bits < min_bits as f64 {
            let q = loop {
                let c = rng.gen_range(5u64..100_000);
                if crate::sieve::is_prime_u64(c) && !qs.contains(&c) {
                    break c;
                }
            };
            bits += (q as f64).log2();
            qs.push(q);
        }
        qs
    }

    #[test]
    fn randomized_signed_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = 1_000_003u64;
        for _ in 0..200 {
            let c: i128 = rng.gen_range(-(1i128 << 100)..=(1i128 << 100));
            let qs = random_moduli(&mut rng, 102);
            let mut acc = crt_precompute(&qs, p);
            for &q in &qs {
                let r = (c.rem_euclid(q as i128)) as u64;
                crt_update(&mut acc, q, &[r]).unwrap();
            }
            let got = crt_finalize(&acc).unwrap()[0];
            assert_eq!(got as i128, c.rem_euclid(p as i128), "c = {c}");
        }
    }

    #[test]
    fn bigint_round_trip_beyond_machine_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = 2_147_483_647u64; // 2³¹ − 1
        for trial in 0..20 {
            let bytes: Vec<u8> = (0..40).map(|_| rng.gen()).collect();
            let sign = if trial % 2 == 0 { Sign::Plus } else { Sign::Minus };
            let c = BigInt::from_bytes_le(sign, &bytes);
            let qs = random_moduli(&mut rng, 325);
            let mut acc = crt_precompute(&qs, p);
            for &q in &qs {
                let r = c.mod_floor(&BigInt::from(q)).to_u64().unwrap();
                crt_update(&mut acc, q, &[r]).unwrap();
            }
            let got = crt_finalize(&acc).unwrap()[0];
            let want = c.mod_floor(&BigInt::from(p)).to_u64().unwrap();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn pipeline_is_linear_and_order_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = 10_007u64;
        let qs = random_moduli(&mut rng, 80);
        let c1: i128 = rng.gen_range(-(1i128 << 38)..(1i128 << 38));
        let c2: i128 = rng.gen_range(-(1i128 << 38)..(1i128 << 38));
        let run = |vals: &[i128], order_rev: bool| {
            let mut acc = crt_precompute(&qs, p);
            let seq: Vec<u64> = if order_rev {
                qs.iter().rev().copied().collect()
            } else {
                qs.clone()
            };
            for q in seq {
                let rs: Vec<u64> = vals.iter().map(|c| c.rem_euclid(q as i128) as u64).collect();
                crt_update(&mut acc, q, &rs).unwrap();
            }
            crt_finalize(&acc).unwrap()
        };
        let a = run(&[c1, c2], false);
        let b = run(&[c1, c2], true);
        assert_eq!(a, b, "update order is immaterial");
        let s = run(&[c1 + c2], false);
        assert_eq!(s[0], (a[0] + a[1]) % p, "accumulation is linear");
    }

    #[test]
    fn checkpoint_round_trip() {
        let p = 10_007u64;
        let qs = [101u64, 103, 107];
        let mut acc = crt_precompute(&qs, p);
        crt_update(&mut acc, 103, &[5, 7]).unwrap();
        let ck = acc.checkpoint();
        let json = serde_json::to_string(&ck).unwrap();
        let back: CrtCheckpoint = serde_json::from_str(&json).unwrap();
        let mut resumed = CrtAccumulator::from_checkpoint(&back);
        crt_update(&mut resumed, 101, &[1, 2]).unwrap();
        crt_update(&mut resumed, 107, &[3, 4]).unwrap();
        crt_update(&mut acc, 101, &[1, 2]).unwrap();
        crt_update(&mut acc, 107, &[3, 4]).unwrap();
        assert_eq!(crt_finalize(&acc).unwrap(), crt_finalize(&resumed).unwrap());
    }
}
