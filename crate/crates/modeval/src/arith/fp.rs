//! Word-sized prime field `F_p` with `u128` intermediate products.
//!
//! Every inner characteristic in this crate (CRT primes, characteristics of
//! curves we walk on) fits in a machine word; arbitrary-precision integers
//! appear only at the CRT boundary in [`crate::crt`].

use num_bigint::BigUint;
use num_traits::Zero;

/// Context for arithmetic modulo a word-sized odd prime `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fp {
    p: u64,
}

impl Fp {
    /// Creates the field context. `p` must be an odd prime `> 3`; primality
    /// is the caller's responsibility (checked in debug builds).
    pub fn new(p: u64) -> Self {
        debug_assert!(p > 3 && p % 2 == 1, "characteristic must be an odd prime > 3");
        Fp { p }
    }

    /// The characteristic.
    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Canonical representative of `x`.
    #[inline]
    pub fn reduce_u64(&self, x: u64) -> u64 {
        x % self.p
    }

    /// Canonical representative of a signed value.
    #[inline]
    pub fn reduce_i128(&self, x: i128) -> u64 {
        let p = self.p as i128;
        (((x % p) + p) % p) as u64
    }

    /// Canonical representative of a big unsigned value.
    pub fn reduce_big(&self, x: &BigUint) -> u64 {
        let m = x % BigUint::from(self.p);
        if m.is_zero() {
            0
        } else {
            m.to_u64_digits()[0]
        }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b; // a, b < p <= 2^63, no overflow
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    /// `a * b + c mod p`.
    #[inline]
    pub fn mul_add(&self, a: u64, b: u64, c: u64) -> u64 {
        ((a as u128 * b as u128 + c as u128) % self.p as u128) as u64
    }

    /// Modular exponentiation.
    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        a %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse of a nonzero element.
    pub fn inv(&self, a: u64) -> u64 {
        debug_assert!(a % self.p != 0, "inverse of zero");
        // Extended Euclid on (a, p); p prime so gcd = 1.
        let (mut r0, mut r1) = (a as i128 % self.p as i128, self.p as i128);
        let (mut s0, mut s1) = (1i128, 0i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1);
        self.reduce_i128(s0)
    }

    /// Legendre symbol: `1` for nonzero squares, `p - 1` for non-squares, `0` for zero.
    pub fn legendre(&self, a: u64) -> u64 {
        self.pow(a, (self.p - 1) / 2)
    }

    /// Whether `a` is a square (zero counts as a square).
    pub fn is_square(&self, a: u64) -> bool {
        a % self.p == 0 || self.legendre(a) == 1
    }

    /// Tonelli–Shanks square root; `None` for non-squares.
    pub fn sqrt(&self, a: u64) -> Option<u64> {
        let a = a % self.p;
        if a == 0 {
            return Some(0);
        }
        if self.legendre(a) != 1 {
            return None;
        }
        if self.p % 4 == 3 {
            return Some(self.pow(a, (self.p + 1) / 4));
        }
        // General Tonelli–Shanks.
        let mut q = self.p - 1;
        let mut s = 0u32;
        while q % 2 == 0 {
            q /= 2;
            s += 1;
        }
        // Deterministic search for a non-square.
        let mut z = 2u64;
        while self.legendre(z) != self.p - 1 {
            z += 1;
        }
        let mut m = s;
        let mut c = self.pow(z, q);
        let mut t = self.pow(a, q);
        let mut r = self.pow(a, (q + 1) / 2);
        while t != 1 {
            // Find least i with t^(2^i) = 1.
            let mut i = 0u32;
            let mut t2 = t;
            while t2 != 1 {
                t2 = self.mul(t2, t2);
                i += 1;
            }
            let b = self.pow(c, 1u64 << (m - i - 1));
            m = i;
            c = self.mul(b, b);
            t = self.mul(t, c);
            r = self.mul(r, b);
        }
        Some(r)
    }

    /// The smallest quadratic non-residue, used as `ω²` for `F_{p²}`.
    pub fn smallest_nonresidue(&self) -> u64 {
        let mut c = 2u64;
        loop {
            if self.legendre(c) == self.p - 1 {
                return c;
            }
            c += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let f = Fp::new(101);
        assert_eq!(f.add(70, 70), 39);
        assert_eq!(f.sub(3, 10), 94);
        assert_eq!(f.mul(50, 51), 50 * 51 % 101);
        assert_eq!(f.mul(f.inv(37), 37), 1);
        assert_eq!(f.pow(2, 100), 1); // Fermat
    }

    #[test]
    fn sqrt_all_squares() {
        for p in [101u64, 1009, 65537, 13] {
            let f = Fp::new(p);
            for a in 0..p.min(500) {
                let sq = f.mul(a, a);
                let r = f.sqrt(sq).expect("square must have a root");
                assert!(r == a || r == f.neg(a), "p={p} a={a}");
            }
        }
    }

    #[test]
    fn nonresidue_is_not_square() {
        for p in [7u64, 1009, 2147483647] {
            let f = Fp::new(p);
            let c = f.smallest_nonresidue();
            assert!(!f.is_square(c));
        }
    }
}
