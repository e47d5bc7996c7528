//! The quadratic extension `F_{p²} = F_p(ω)`, `ω² = c` a non-residue.

use super::fp::Fp;

/// An element `c0 + c1·ω` of `F_{p²}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fp2El {
    pub c0: u64,
    pub c1: u64,
}

impl Fp2El {
    pub const ZERO: Fp2El = Fp2El { c0: 0, c1: 0 };
    pub const ONE: Fp2El = Fp2El { c0: 1, c1: 0 };

    #[inline]
    pub fn from_base(c0: u64) -> Self {
        Fp2El { c0, c1: 0 }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.c0 == 0 && self.c1 == 0
    }

    /// Whether the element lies in the prime field.
    #[inline]
    pub fn is_base(&self) -> bool {
        self.c1 == 0
    }
}

/// Context for `F_{p²}` arithmetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fp2 {
    fp: Fp,
    /// ω² = c, the smallest quadratic non-residue of `F_p`.
    c: u64,
}

impl Fp2 {
    pub fn new(p: u64) -> Self {
        let fp = Fp::new(p);
        let c = fp.smallest_nonresidue();
        Fp2 { fp, c }
    }

    #[inline]
    pub fn fp(&self) -> &Fp {
        &self.fp
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.fp.p()
    }

    /// ω².
    #[inline]
    pub fn nonresidue(&self) -> u64 {
        self.c
    }

    #[inline]
    pub fn add(&self, a: Fp2El, b: Fp2El) -> Fp2El {
        Fp2El { c0: self.fp.add(a.c0, b.c0), c1: self.fp.add(a.c1, b.c1) }
    }

    #[inline]
    pub fn sub(&self, a: Fp2El, b: Fp2El) -> Fp2El {
        Fp2El { c0: self.fp.sub(a.c0, b.c0), c1: self.fp.sub(a.c1, b.c1) }
    }

    #[inline]
    pub fn neg(&self, a: Fp2El) -> Fp2El {
        Fp2El { c0: self.fp.neg(a.c0), c1: self.fp.neg(a.c1) }
    }

    #[inline]
    pub fn mul(&self, a: Fp2El, b: Fp2El) -> Fp2El {
        let f = &self.fp;
        let t0 = f.mul(a.c0, b.c0);
        let t1 = f.mul(a.c1, b.c1);
        let cross = f.add(f.mul(a.c0, b.c1), f.mul(a.c1, b.c0));
        Fp2El { c0: f.add(t0, f.mul(self.c, t1)), c1: cross }
    }

    #[inline]
    pub fn mul_base(&self, a: Fp2El, s: u64) -> Fp2El {
        Fp2El { c0: self.fp.mul(a.c0, s), c1: self.fp.mul(a.c1, s) }
    }

    pub fn square(&self, a: Fp2El) -> Fp2El {
        self.mul(a, a)
    }

    /// Norm to `F_p`: `a·a^p = c0² − c·c1²`.
    pub fn norm(&self, a: Fp2El) -> u64 {
        let f = &self.fp;
        f.sub(f.mul(a.c0, a.c0), f.mul(self.c, f.mul(a.c1, a.c1)))
    }

    /// Frobenius `a ↦ a^p` (conjugation).
    #[inline]
    pub fn conj(&self, a: Fp2El) -> Fp2El {
        Fp2El { c0: a.c0, c1: self.fp.neg(a.c1) }
    }

    pub fn inv(&self, a: Fp2El) -> Fp2El {
        debug_assert!(!a.is_zero(), "inverse of zero in F_p^2");
        let n_inv = self.fp.inv(self.norm(a));
        self.mul_base(self.conj(a), n_inv)
    }

    pub fn pow(&self, a: Fp2El, mut e: u128) -> Fp2El {
        let mut acc = Fp2El::ONE;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Whether `a` is a square in `F_{p²}` (zero counts as square).
    pub fn is_square(&self, a: Fp2El) -> bool {
        // a square in F_{p²} iff norm(a) is a square in F_p.
        a.is_zero() || self.fp.is_square(self.norm(a))
    }

    /// Square root in `F_{p²}` by Tonelli–Shanks with `u128` exponents.
    pub fn sqrt(&self, a: Fp2El) -> Option<Fp2El> {
        if a.is_zero() {
            return Some(Fp2El::ZERO);
        }
        if !self.is_square(a) {
            return None;
        }
        let p = self.p() as u128;
        let order = p * p - 1;
        let mut q = order;
        let mut s = 0u32;
        while q % 2 == 0 {
            q /= 2;
            s += 1;
        }
        // Deterministic search for a non-square in F_{p²}.
        let mut z = Fp2El { c0: 1, c1: 1 };
        while self.is_square(z) {
            z = Fp2El { c0: self.fp.add(z.c0, 1), c1: z.c1 };
        }
        let mut m = s;
        let mut c = self.pow(z, q);
        let mut t = self.pow(a, q);
        let mut r = self.pow(a, (q + 1) / 2);
        while t != Fp2El::ONE {
            let mut i = 0u32;
            let mut t2 = t;
            while t2 != Fp2El::ONE {
                t2 = self.mul(t2, t2);
                i += 1;
            }
            let b = self.pow(c, 1u128 << (m - i - 1));
            m = i;
            c = self.mul(b, b);
            t = self.mul(t, c);
            r = self.mul(r, b);
        }
        debug_assert_eq!(self.mul(r, r), a);
        Some(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_smoke() {
        let f = Fp2::new(103);
        let a = Fp2El { c0: 5, c1: 7 };
        let b = Fp2El { c0: 11, c1: 99 };
        assert_eq!(f.mul(a, b), f.mul(b, a));
        assert_eq!(f.mul(a, f.inv(a)), Fp2El::ONE);
        // Frobenius is the identity exactly on the base field.
        assert_eq!(f.conj(Fp2El::from_base(42)), Fp2El::from_base(42));
        assert_ne!(f.conj(a), a);
    }

    #[test]
    fn sqrt_roundtrip() {
        let f = Fp2::new(101);
        for c0 in 0..20u64 {
            for c1 in 0..20u64 {
                let a = Fp2El { c0, c1 };
                let sq = f.mul(a, a);
                let r = f.sqrt(sq).expect("square has a root");
                assert!(r == a || r == f.neg(a));
            }
        }
    }

    #[test]
    fn base_nonresidue_becomes_square() {
        // ω² = c: every F_p element is a square in F_{p²}.
        let f = Fp2::new(1009);
        let c = f.nonresidue();
        assert!(f.is_square(Fp2El::from_base(c)));
        let r = f.sqrt(Fp2El::from_base(c)).unwrap();
        assert_eq!(f.mul(r, r), Fp2El::from_base(c));
    }
}
