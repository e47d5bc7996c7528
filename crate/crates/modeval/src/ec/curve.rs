//! Curve models, point arithmetic, and certified torsion bases.

use super::pairing::weil_pairing;
use super::EcError;
use crate::arith::{Ext, Fp2, Fp2El, Tower};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

/// A short Weierstrass curve `y² = x³ + a·x + b` over `F_{p²}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Curve {
    pub a: Fp2El,
    pub b: Fp2El,
}

/// A point on a curve, with coordinates in an extension tower.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Point {
    Infinity,
    Affine { x: Ext, y: Ext },
}

impl Point {
    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    pub fn x(&self) -> Option<&Ext> {
        match self {
            Point::Infinity => None,
            Point::Affine { x, .. } => Some(x),
        }
    }
}

impl Curve {
    /// The standard model with the requested j-invariant: `(0, 1)` for
    /// j = 0, `(1, 0)` for j = 1728, and otherwise
    /// `a = 3j(1728 − j)`, `b = 2j(1728 − j)²`.
    pub fn from_j(f: &Fp2, j: Fp2El) -> Curve {
        let c1728 = Fp2El::from_base(f.fp().reduce_u64(1728));
        if j.is_zero() {
            return Curve { a: Fp2El::ZERO, b: Fp2El::ONE };
        }
        if j == c1728 {
            return Curve { a: Fp2El::ONE, b: Fp2El::ZERO };
        }
        let d = f.sub(c1728, j);
        let a = f.mul(f.mul_base(j, 3), d);
        let b = f.mul(f.mul_base(j, 2), f.square(d));
        Curve { a, b }
    }

    /// `j = 1728·4a³ / (4a³ + 27b²)`.
    pub fn j_invariant(&self, f: &Fp2) -> Fp2El {
        let a3 = f.mul_base(f.mul(self.a, f.square(self.a)), 4);
        let disc = f.add(a3, f.mul_base(f.square(self.b), 27));
        f.mul(f.mul_base(a3, f.fp().reduce_u64(1728)), f.inv(disc))
    }

    /// The quadratic twist by the standard nonsquare of `F_{p²}`.
    pub fn twist(&self, f: &Fp2) -> Curve {
        // A nonsquare of F_{p²}: ω·c where c is the F_p nonresidue defining
        // F_{p²} — its norm is −c², a nonresidue exactly when p ≡ 1 (mod 4);
        // otherwise ω itself has nonsquare norm −c.
        let omega = Fp2El { c0: 0, c1: 1 };
        let d = if f.p() % 4 == 1 {
            f.mul_base(omega, f.nonresidue())
        } else {
            omega
        };
        let d2 = f.square(d);
        Curve {
            a: f.mul(self.a, d2),
            b: f.mul(self.b, f.mul(d2, d)),
        }
    }

    pub fn rhs(&self, t: &Tower, x: &Ext) -> Ext {
        let x2 = t.square(x);
        let x3 = t.mul(&x2, x);
        t.add(&t.add(&x3, &t.mul_fp2(x, self.a)), &t.embed(self.b))
    }

    pub fn is_on_curve(&self, t: &Tower, p: &Point) -> bool {
        match p {
            Point::Infinity => true,
            Point::Affine { x, y } => t.square(y) == self.rhs(t, x),
        }
    }

    pub fn neg(&self, t: &Tower, p: &Point) -> Point {
        match p {
            Point::Infinity => Point::Infinity,
            Point::Affine { x, y } => Point::Affine { x: x.clone(), y: t.neg(y) },
        }
    }

    pub fn add(&self, t: &Tower, p: &Point, q: &Point) -> Point {
        let (x1, y1) = match p {
            Point::Infinity => return q.clone(),
            Point::Affine { x, y } => (x, y),
        };
        let (x2, y2) = match q {
            Point::Infinity => return p.clone(),
            Point::Affine { x, y } => (x, y),
        };
        let lambda = if x1 == x2 {
            if *y1 == t.neg(y2) {
                return Point::Infinity;
            }
            // Tangent: (3x² + a) / 2y.
            let num = t.add(&t.scale(&t.square(x1), 3), &t.embed(self.a));
            t.mul(&num, &t.inv(&t.scale(y1, 2)))
        } else {
            t.mul(&t.sub(y2, y1), &t.inv(&t.sub(x2, x1)))
        };
        let x3 = t.sub(&t.sub(&t.square(&lambda), x1), x2);
        let y3 = t.sub(&t.mul(&lambda, &t.sub(x1, &x3)), y1);
        Point::Affine { x: x3, y: y3 }
    }

    pub fn double(&self, t: &Tower, p: &Point) -> Point {
        self.add(t, p, p)
    }

    pub fn sub(&self, t: &Tower, p: &Point, q: &Point) -> Point {
        self.add(t, p, &self.neg(t, q))
    }

    pub fn mul_u64(&self, t: &Tower, p: &Point, n: u64) -> Point {
        self.mul_big(t, p, &BigUint::from(n))
    }

    pub fn mul_big(&self, t: &Tower, p: &Point, n: &BigUint) -> Point {
        if n.is_zero() || p.is_infinity() {
            return Point::Infinity;
        }
        let mut acc = Point::Infinity;
        for i in (0..n.bits()).rev() {
            acc = self.double(t, &acc);
            if n.bit(i) {
                acc = self.add(t, &acc, p);
            }
        }
        acc
    }

    /// Applies the `p^m`-power Frobenius to the coordinates. This is an
    /// isogeny `E → E^(p^m)`; it is an endomorphism when the coefficients
    /// are fixed by that power of Frobenius.
    pub fn frobenius_point(&self, t: &Tower, p: &Point, m: usize) -> Point {
        match p {
            Point::Infinity => Point::Infinity,
            Point::Affine { x, y } => Point::Affine {
                x: t.frobenius(x, m),
                y: t.frobenius(y, m),
            },
        }
    }

    /// A uniformly random point (up to the sign of y) over the tower.
    pub fn random_point<R: Rng>(&self, t: &Tower, rng: &mut R) -> Point {
        loop {
            let x = t.rand(rng);
            let rhs = self.rhs(t, &x);
            if let Some(mut y) = t.sqrt(&rhs) {
                if rng.gen::<bool>() {
                    y = t.neg(&y);
                }
                return Point::Affine { x, y };
            }
        }
    }

    /// The exponent of `E(F_{p^{2k}})` for a curve with `π_{p²} = [−p]`:
    /// the group is `(ℤ/M)²` with `M = |(−p)^k − 1|`.
    pub fn rational_exponent(t: &Tower) -> BigUint {
        let pk = BigUint::from(t.p()).pow(t.k() as u32);
        if t.k() % 2 == 0 {
            pk - BigUint::one()
        } else {
            pk + BigUint::one()
        }
    }

    /// Whether this model (as opposed to its twist) satisfies
    /// `π_{p²} = [−p]`, i.e. `E(F_{p²})` has exponent `p + 1`.
    pub fn has_minus_p_frobenius<R: Rng>(&self, t: &Tower, rng: &mut R) -> bool {
        assert_eq!(t.k(), 1, "twist detection runs over F_{{p²}}");
        let m = BigUint::from(t.p()) + BigUint::one();
        (0..4).all(|_| {
            let p = self.random_point(t, rng);
            self.mul_big(t, &p, &m).is_infinity()
        })
    }

    /// Replaces the curve by its twist if needed so that `π_{p²} = [−p]`.
    pub fn fix_twist<R: Rng>(&self, t: &Tower, rng: &mut R) -> Result<Curve, EcError> {
        if self.has_minus_p_frobenius(t, rng) {
            return Ok(*self);
        }
        let tw = self.twist(t.fp2());
        if tw.has_minus_p_frobenius(t, rng) {
            Ok(tw)
        } else {
            Err(EcError::SearchExhausted("fixing the Frobenius twist"))
        }
    }

    /// A basis of `E[m]` for a prime power `m = ℓ^e`, certified by a Weil
    /// pairing of exact order `m`. Requires `π_{p²} = [−p]` on this model.
    pub fn torsion_basis<R: Rng>(
        &self,
        t: &Tower,
        m: u64,
        rng: &mut R,
    ) -> Result<(Point, Point), EcError> {
        let ell = smallest_prime_factor(m);
        let exponent = Curve::rational_exponent(t);
        let (cof, rem) = exponent.div_rem(&BigUint::from(m));
        if !rem.is_zero() {
            return Err(EcError::TowerTooSmall { m, k: t.k() });
        }
        let sub = m / ell;
        let sample = |rng: &mut R| -> Result<Point, EcError> {
            for _ in 0..64 {
                let p = self.mul_big(t, &self.random_point(t, rng), &cof);
                if !self.mul_u64(t, &p, sub).is_infinity() {
                    debug_assert!(self.mul_u64(t, &p, m).is_infinity());
                    return Ok(p);
                }
            }
            Err(EcError::SearchExhausted("sampling a torsion generator"))
        };
        let p = sample(rng)?;
        for _ in 0..64 {
            let q = sample(rng)?;
            match weil_pairing(t, self, &p, &q, m) {
                Ok(zeta) => {
                    if t.pow(&zeta, sub) != t.one() {
                        return Ok((p, q));
                    }
                }
                Err(EcError::PairingDegenerate) => {}
                Err(e) => return Err(e),
            }
        }
        Err(EcError::SearchExhausted("certifying torsion independence"))
    }

    /// The order of a point known to lie in `E[m]`, `m = ℓ^e` a prime power.
    pub fn order_dividing(&self, t: &Tower, p: &Point, m: u64) -> u64 {
        let ell = smallest_prime_factor(m);
        let mut ord = 1u64;
        let mut q = p.clone();
        while !q.is_infinity() {
            q = self.mul_u64(t, &q, ell);
            ord *= ell;
        }
        debug_assert_eq!(m % ord, 0);
        ord
    }
}

/// Smallest prime factor (trial division; inputs here are small).
pub(crate) fn smallest_prime_factor(m: u64) -> u64 {
    assert!(m > 1);
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            return d;
        }
        d += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    #[test]
    fn j_roundtrip() {
        let f = Fp2::new(211);
        for j0 in [0u64, 1728 % 211, 5, 77, 150] {
            let j = Fp2El::from_base(j0);
            let e = Curve::from_j(&f, j);
            assert_eq!(e.j_invariant(&f), j);
        }
        let j = Fp2El { c0: 3, c1: 9 };
        assert_eq!(Curve::from_j(&f, j).j_invariant(&f), j);
    }

    #[test]
    fn group_law_associativity() {
        let t = Tower::build(211, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let e = Curve::from_j(t.fp2(), Fp2El { c0: 12, c1: 34 });
        let p = e.random_point(&t, &mut rng);
        let q = e.random_point(&t, &mut rng);
        let r = e.random_point(&t, &mut rng);
        assert!(e.is_on_curve(&t, &p));
        let lhs = e.add(&t, &e.add(&t, &p, &q), &r);
        let rhs = e.add(&t, &p, &e.add(&t, &q, &r));
        assert_eq!(lhs, rhs);
        assert!(e.add(&t, &p, &e.neg(&t, &p)).is_infinity());
        // Scalar multiplication distributes.
        let s = e.mul_u64(&t, &p, 13);
        let mut acc = Point::Infinity;
        for _ in 0..13 {
            acc = e.add(&t, &acc, &p);
        }
        assert_eq!(s, acc);
    }

    #[test]
    fn supersingular_exponent_and_torsion_basis() {
        // p = 103 ≡ 3 (mod 4): j = 1728 is supersingular, π² = −p on the
        // right twist, and E(F_{p²}) ≅ (ℤ/(p+1))².
        let t = Tower::build(103, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let e = Curve::from_j(t.fp2(), Fp2El::from_base(1728 % 103))
            .fix_twist(&t, &mut rng)
            .unwrap();
        // p + 1 = 104 = 8·13.
        let (p8, q8) = e.torsion_basis(&t, 8, &mut rng).unwrap();
        assert_eq!(e.order_dividing(&t, &p8, 8), 8);
        assert_eq!(e.order_dividing(&t, &q8, 8), 8);
        let (p13, _) = e.torsion_basis(&t, 13, &mut rng).unwrap();
        assert_eq!(e.order_dividing(&t, &p13, 13), 13);
        // E[3] needs a bigger tower: order of −103 mod 3 is 2.
        assert!(matches!(
            e.torsion_basis(&t, 3, &mut rng),
            Err(EcError::TowerTooSmall { .. })
        ));
        let t2 = Tower::build(103, 2);
        let (p3, q3) = e.torsion_basis(&t2, 3, &mut rng).unwrap();
        assert!(!weil_pairing(&t2, &e, &p3, &q3, 3).unwrap().is_zero());
    }

    #[test]
    fn frobenius_squared_is_minus_p() {
        let t = Tower::build(103, 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let t1 = Tower::build(103, 1);
        let e = Curve::from_j(t1.fp2(), Fp2El::from_base(1728 % 103))
            .fix_twist(&t1, &mut rng)
            .unwrap();
        let p = e.random_point(&t, &mut rng);
        let lhs = e.frobenius_point(&t, &p, 2);
        let rhs = e.neg(&t, &e.mul_u64(&t, &p, 103));
        assert_eq!(lhs, rhs);
    }
}
