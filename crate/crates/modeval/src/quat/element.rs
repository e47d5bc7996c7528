//! Quaternion elements with exact rational coordinates.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;

#[inline]
pub(crate) fn cadd(a: i128, b: i128) -> i128 {
    a.checked_add(b).expect("quaternion coordinate overflow (add)")
}

#[inline]
pub(crate) fn cmul(a: i128, b: i128) -> i128 {
    a.checked_mul(b).expect("quaternion coordinate overflow (mul)")
}

#[inline]
pub(crate) fn csub(a: i128, b: i128) -> i128 {
    a.checked_sub(b).expect("quaternion coordinate overflow (sub)")
}

fn gcd5(vals: [i128; 5]) -> i128 {
    vals.iter().fold(0i128, |g, &v| g.gcd(&v))
}

/// `(t + x·i + y·j + z·k) / d` with `d > 0` and content 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quat {
    pub t: i128,
    pub x: i128,
    pub y: i128,
    pub z: i128,
    pub d: i128,
}

impl Quat {
    pub fn new(t: i128, x: i128, y: i128, z: i128, d: i128) -> Quat {
        assert!(d != 0, "zero denominator");
        let mut q = Quat { t, x, y, z, d };
        q.normalize();
        q
    }

    pub fn from_int(t: i128) -> Quat {
        Quat { t, x: 0, y: 0, z: 0, d: 1 }
    }

    pub fn zero() -> Quat {
        Quat::from_int(0)
    }

    pub fn one() -> Quat {
        Quat::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.t == 0 && self.x == 0 && self.y == 0 && self.z == 0
    }

    /// Whether the element lies in ℤ + ℤi + ℤj + ℤk.
    pub fn is_coordinate_integral(&self) -> bool {
        self.d == 1
    }

    fn normalize(&mut self) {
        if self.d < 0 {
            self.t = -self.t;
            self.x = -self.x;
            self.y = -self.y;
            self.z = -self.z;
            self.d = -self.d;
        }
        let g = gcd5([self.t, self.x, self.y, self.z, self.d]);
        if g > 1 {
            self.t /= g;
            self.x /= g;
            self.y /= g;
            self.z /= g;
            self.d /= g;
        }
        if self.is_zero() {
            self.d = 1;
        }
    }

    pub fn neg(&self) -> Quat {
        Quat { t: -self.t, x: -self.x, y: -self.y, z: -self.z, d: self.d }
    }

    pub fn scaled(&self, num: i128, den: i128) -> Quat {
        Quat::new(
            cmul(self.t, num),
            cmul(self.x, num),
            cmul(self.y, num),
            cmul(self.z, num),
            cmul(self.d, den),
        )
    }
}

/// The definite quaternion algebra `(−q, −p | ℚ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuatAlgebra {
    pub q: i128,
    pub p: i128,
}

impl QuatAlgebra {
    pub fn new(q: i128, p: i128) -> QuatAlgebra {
        assert!(q > 0 && p > 0);
        QuatAlgebra { q, p }
    }

    pub fn add(&self, a: &Quat, b: &Quat) -> Quat {
        Quat::new(
            cadd(cmul(a.t, b.d), cmul(b.t, a.d)),
            cadd(cmul(a.x, b.d), cmul(b.x, a.d)),
            cadd(cmul(a.y, b.d), cmul(b.y, a.d)),
            cadd(cmul(a.z, b.d), cmul(b.z, a.d)),
            cmul(a.d, b.d),
        )
    }

    pub fn sub(&self, a: &Quat, b: &Quat) -> Quat {
        self.add(a, &b.neg())
    }

    pub fn mul(&self, a: &Quat, b: &Quat) -> Quat {
        let (q, p) = (self.q, self.p);
        let qp = cmul(q, p);
        let t = csub(
            csub(cmul(a.t, b.t), cmul(q, cmul(a.x, b.x))),
            cadd(cmul(p, cmul(a.y, b.y)), cmul(qp, cmul(a.z, b.z))),
        );
        let x = cadd(
            cadd(cmul(a.t, b.x), cmul(a.x, b.t)),
            cmul(p, csub(cmul(a.y, b.z), cmul(a.z, b.y))),
        );
        let y = cadd(
            cadd(cmul(a.t, b.y), cmul(a.y, b.t)),
            cmul(q, csub(cmul(a.z, b.x), cmul(a.x, b.z))),
        );
        let z = cadd(
            cadd(cmul(a.t, b.z), cmul(a.z, b.t)),
            csub(cmul(a.x, b.y), cmul(a.y, b.x)),
        );
        Quat::new(t, x, y, z, cmul(a.d, b.d))
    }

    pub fn conj(&self, a: &Quat) -> Quat {
        Quat { t: a.t, x: -a.x, y: -a.y, z: -a.z, d: a.d }
    }

    /// Reduced norm as an exact rational.
    pub fn nrd(&self, a: &Quat) -> BigRational {
        let big = |v: i128| BigInt::from(v);
        let num = big(a.t) * big(a.t)
            + big(self.q) * big(a.x) * big(a.x)
            + big(self.p) * big(a.y) * big(a.y)
            + big(self.q) * big(self.p) * big(a.z) * big(a.z);
        BigRational::new(num, big(a.d) * big(a.d))
    }

    /// Reduced trace as an exact rational.
    pub fn trd(&self, a: &Quat) -> BigRational {
        BigRational::new(BigInt::from(2 * a.t), BigInt::from(a.d))
    }

    /// The symmetric bilinear form `trd(a·conj(b))`, integral on integral
    /// elements.
    pub fn inner(&self, a: &Quat, b: &Quat) -> BigRational {
        let big = |v: i128| BigInt::from(v);
        let num = big(2)
            * (big(a.t) * big(b.t)
                + big(self.q) * big(a.x) * big(b.x)
                + big(self.p) * big(a.y) * big(b.y)
                + big(self.q) * big(self.p) * big(a.z) * big(b.z));
        BigRational::new(num, big(a.d) * big(b.d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn alg() -> QuatAlgebra {
        QuatAlgebra::new(1, 103)
    }

    #[test]
    fn multiplication_table() {
        let b = alg();
        let i = Quat::new(0, 1, 0, 0, 1);
        let j = Quat::new(0, 0, 1, 0, 1);
        let k = Quat::new(0, 0, 0, 1, 1);
        assert_eq!(b.mul(&i, &i), Quat::from_int(-1));
        assert_eq!(b.mul(&j, &j), Quat::from_int(-103));
        assert_eq!(b.mul(&i, &j), k);
        assert_eq!(b.mul(&j, &i), k.neg());
        assert_eq!(b.mul(&k, &k), Quat::from_int(-103));
        assert_eq!(b.mul(&i, &k), j.neg());
        assert_eq!(b.mul(&k, &i), j);
        assert_eq!(b.mul(&j, &k), Quat::new(0, 103, 0, 0, 1));
        assert_eq!(b.mul(&k, &j), Quat::new(0, -103, 0, 0, 1));
    }

    #[test]
    fn norm_is_multiplicative() {
        let b = QuatAlgebra::new(7, 59);
        let a = Quat::new(3, -2, 5, 1, 2);
        let c = Quat::new(-1, 4, 2, -3, 3);
        let prod = b.mul(&a, &c);
        assert_eq!(b.nrd(&prod), b.nrd(&a) * b.nrd(&c));
        // nrd(a) = a·conj(a).
        let n = b.mul(&a, &b.conj(&a));
        assert_eq!(b.trd(&n) / BigRational::from(BigInt::from(2)), b.nrd(&a));
        assert!(b.nrd(&b.sub(&n, &n)).is_zero());
    }

    #[test]
    fn associativity() {
        let b = QuatAlgebra::new(11, 1009);
        let a = Quat::new(1, 2, 3, 4, 5);
        let c = Quat::new(-7, 1, 0, 2, 3);
        let d = Quat::new(0, -1, 6, 1, 2);
        assert_eq!(b.mul(&b.mul(&a, &c), &d), b.mul(&a, &b.mul(&c, &d)));
    }
}
