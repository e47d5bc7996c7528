//! Dense univariate polynomial arithmetic over extension towers.
//!
//! Coefficients are [`Ext`] elements of a fixed [`Tower`]; the context is
//! passed explicitly to every operation. Products use Karatsuba above a
//! threshold; interpolation switches from Lagrange to the subproduct-tree
//! algorithm at degree 32; root extraction uses distinct-degree reduction
//! (gcd with `x^q − x`) followed by equal-degree splitting, and reports
//! roots in lexicographic order of their coefficient vectors.

use crate::arith::{Ext, Tower};
use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

/// Degree bound above which interpolation uses the subproduct tree.
pub const FAST_INTERPOLATION_THRESHOLD: usize = 32;
const KARATSUBA_THRESHOLD: usize = 32;

/// Errors from polynomial algorithms.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    /// Two interpolation points share an abscissa.
    #[error("duplicate abscissa in interpolation input")]
    DuplicateAbscissa,
}

/// A polynomial in little-endian coefficient order; the empty vector is zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    pub c: Vec<Ext>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { c: vec![] }
    }

    pub fn from_coeffs(mut c: Vec<Ext>) -> Poly {
        while c.last().map(|e| e.is_zero()).unwrap_or(false) {
            c.pop();
        }
        Poly { c }
    }

    pub fn constant(t: &Tower, a: Ext) -> Poly {
        Poly::from_coeffs(vec![a]).normalized(t)
    }

    fn normalized(self, _t: &Tower) -> Poly {
        self
    }

    pub fn one(t: &Tower) -> Poly {
        Poly { c: vec![t.one()] }
    }

    pub fn x(t: &Tower) -> Poly {
        Poly { c: vec![t.zero(), t.one()] }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    pub fn leading(&self) -> Option<&Ext> {
        self.c.last()
    }

    pub fn coeff(&self, t: &Tower, i: usize) -> Ext {
        self.c.get(i).cloned().unwrap_or_else(|| t.zero())
    }

    pub fn add(&self, t: &Tower, rhs: &Poly) -> Poly {
        let n = self.c.len().max(rhs.c.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.c.get(i).cloned().unwrap_or_else(|| t.zero());
            let b = rhs.c.get(i).cloned().unwrap_or_else(|| t.zero());
            out.push(t.add(&a, &b));
        }
        Poly::from_coeffs(out)
    }

    pub fn sub(&self, t: &Tower, rhs: &Poly) -> Poly {
        let n = self.c.len().max(rhs.c.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.c.get(i).cloned().unwrap_or_else(|| t.zero());
            let b = rhs.c.get(i).cloned().unwrap_or_else(|| t.zero());
            out.push(t.sub(&a, &b));
        }
        Poly::from_coeffs(out)
    }

    pub fn neg(&self, t: &Tower) -> Poly {
        Poly { c: self.c.iter().map(|a| t.neg(a)).collect() }
    }

    pub fn scale(&self, t: &Tower, s: &Ext) -> Poly {
        Poly::from_coeffs(self.c.iter().map(|a| t.mul(a, s)).collect())
    }

    pub fn mul(&self, t: &Tower, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        Poly::from_coeffs(mul_vec(t, &self.c, &rhs.c))
    }

    /// Multiplication by `x^k`.
    pub fn shift(&self, t: &Tower, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![t.zero(); k];
        out.extend(self.c.iter().cloned());
        Poly { c: out }
    }

    pub fn derivative(&self, t: &Tower) -> Poly {
        if self.c.len() <= 1 {
            return Poly::zero();
        }
        let out = self
            .c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, a)| t.scale(a, (i as u64) % t.p()))
            .collect();
        Poly::from_coeffs(out)
    }

    /// Euclidean division; the divisor may have any nonzero leading coefficient.
    pub fn divrem(&self, t: &Tower, b: &Poly) -> (Poly, Poly) {
        assert!(!b.is_zero(), "division by zero polynomial");
        let db = b.degree().unwrap();
        if self.degree().map(|d| d < db).unwrap_or(true) {
            return (Poly::zero(), self.clone());
        }
        let lb_inv = t.inv(b.leading().unwrap());
        let mut rem = self.c.clone();
        let mut quo = vec![t.zero(); rem.len() - db];
        while rem.len() > db {
            let dr = rem.len() - 1;
            let q = t.mul(&rem[dr], &lb_inv);
            if !q.is_zero() {
                quo[dr - db] = q.clone();
                for i in 0..=db {
                    let s = t.mul(&q, &b.c[i]);
                    rem[dr - db + i] = t.sub(&rem[dr - db + i], &s);
                }
            }
            while rem.last().map(|e| e.is_zero()).unwrap_or(false) {
                rem.pop();
            }
            if rem.len() <= db {
                break;
            }
        }
        (Poly::from_coeffs(quo), Poly::from_coeffs(rem))
    }

    pub fn rem(&self, t: &Tower, b: &Poly) -> Poly {
        self.divrem(t, b).1
    }

    /// Monic gcd.
    pub fn gcd(&self, t: &Tower, rhs: &Poly) -> Poly {
        let mut r0 = self.clone();
        let mut r1 = rhs.clone();
        while !r1.is_zero() {
            let r = r0.rem(t, &r1);
            r0 = r1;
            r1 = r;
        }
        r0.monic(t)
    }

    pub fn monic(&self, t: &Tower) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some(l) => {
                let inv = t.inv(l);
                self.scale(t, &inv)
            }
        }
    }

    pub fn eval(&self, t: &Tower, x: &Ext) -> Ext {
        let mut acc = t.zero();
        for a in self.c.iter().rev() {
            acc = t.add(&t.mul(&acc, x), a);
        }
        acc
    }

    /// `∏ (x − rᵢ)` via a balanced product tree.
    pub fn from_roots(t: &Tower, roots: &[Ext]) -> Poly {
        if roots.is_empty() {
            return Poly::one(t);
        }
        if roots.len() == 1 {
            return Poly { c: vec![t.neg(&roots[0]), t.one()] };
        }
        let mid = roots.len() / 2;
        let l = Poly::from_roots(t, &roots[..mid]);
        let r = Poly::from_roots(t, &roots[mid..]);
        l.mul(t, &r)
    }

    /// `self^e mod m`.
    pub fn powmod(&self, t: &Tower, e: &BigUint, m: &Poly) -> Poly {
        let mut acc = Poly::one(t);
        let base = self.rem(t, m);
        let bits = e.bits();
        for i in (0..bits).rev() {
            acc = acc.mul(t, &acc).rem(t, m);
            if e.bit(i) {
                acc = acc.mul(t, &base).rem(t, m);
            }
        }
        acc
    }

    /// Interpolates the unique polynomial of degree `< points.len()` through
    /// the given `(x, y)` pairs.
    pub fn interpolate(t: &Tower, points: &[(Ext, Ext)]) -> Result<Poly, PolyError> {
        let mut seen: Vec<&Ext> = points.iter().map(|(x, _)| x).collect();
        seen.sort();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(PolyError::DuplicateAbscissa);
        }
        if points.is_empty() {
            return Ok(Poly::zero());
        }
        if points.len() <= FAST_INTERPOLATION_THRESHOLD {
            return Ok(lagrange(t, points));
        }
        Ok(fast_interpolate(t, points))
    }

    /// Evaluates `self` at every point (subproduct-tree multipoint evaluation).
    pub fn multi_eval(&self, t: &Tower, xs: &[Ext]) -> Vec<Ext> {
        if xs.len() <= 8 {
            return xs.iter().map(|x| self.eval(t, x)).collect();
        }
        let tree = SubproductTree::build(t, xs);
        tree.eval_down(t, self)
    }

    /// Distinct roots in the tower with multiplicities, lex-ordered by
    /// coefficient vector.
    pub fn roots(&self, t: &Tower) -> Vec<(Ext, usize)> {
        if self.degree().unwrap_or(0) == 0 {
            return vec![];
        }
        // Linear-factor part: gcd(f, x^q − x).
        let q = t.cardinality();
        let monic = self.monic(t);
        let xq = Poly::x(t).powmod(t, &q, &monic);
        let lin = xq.sub(t, &Poly::x(t)).gcd(t, &monic);
        let mut found = Vec::new();
        split_roots(t, &lin, &mut found, &mut 0u64);
        found.sort();
        found
            .into_iter()
            .map(|r| {
                // Multiplicity by repeated division.
                let factor = Poly { c: vec![t.neg(&r), t.one()] };
                let mut m = 0usize;
                let mut cur = monic.clone();
                loop {
                    let (q2, rem) = cur.divrem(t, &factor);
                    if rem.is_zero() {
                        m += 1;
                        cur = q2;
                    } else {
                        break;
                    }
                }
                (r, m)
            })
            .collect()
    }

    /// Convenience: distinct roots without multiplicities.
    pub fn distinct_roots(&self, t: &Tower) -> Vec<Ext> {
        self.roots(t).into_iter().map(|(r, _)| r).collect()
    }
}

fn mul_vec(t: &Tower, a: &[Ext], b: &[Ext]) -> Vec<Ext> {
    if a.len().min(b.len()) < KARATSUBA_THRESHOLD {
        let mut out = vec![t.zero(); a.len() + b.len() - 1];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if !bj.is_zero() {
                    out[i + j] = t.add(&out[i + j], &t.mul(ai, bj));
                }
            }
        }
        return out;
    }
    // Karatsuba.
    let m = a.len().max(b.len()).div_ceil(2);
    let (a0, a1) = a.split_at(a.len().min(m));
    let (b0, b1) = b.split_at(b.len().min(m));
    let z0 = mul_vec(t, a0, b0);
    let z2 = if a1.is_empty() || b1.is_empty() {
        vec![]
    } else {
        mul_vec(t, a1, b1)
    };
    let asum: Vec<Ext> = (0..a0.len().max(a1.len()))
        .map(|i| {
            let x = a0.get(i).cloned().unwrap_or_else(|| t.zero());
            let y = a1.get(i).cloned().unwrap_or_else(|| t.zero());
            t.add(&x, &y)
        })
        .collect();
    let bsum: Vec<Ext> = (0..b0.len().max(b1.len()))
        .map(|i| {
            let x = b0.get(i).cloned().unwrap_or_else(|| t.zero());
            let y = b1.get(i).cloned().unwrap_or_else(|| t.zero());
            t.add(&x, &y)
        })
        .collect();
    let z1full = mul_vec(t, &asum, &bsum);
    let mut out = vec![t.zero(); a.len() + b.len() - 1];
    for (i, v) in z0.iter().enumerate() {
        out[i] = t.add(&out[i], v);
    }
    for (i, v) in z1full.iter().enumerate() {
        let mut w = v.clone();
        if let Some(x) = z0.get(i) {
            w = t.sub(&w, x);
        }
        if let Some(x) = z2.get(i) {
            w = t.sub(&w, x);
        }
        if i + m < out.len() && !w.is_zero() {
            out[i + m] = t.add(&out[i + m], &w);
        }
    }
    for (i, v) in z2.iter().enumerate() {
        if i + 2 * m < out.len() {
            out[i + 2 * m] = t.add(&out[i + 2 * m], v);
        }
    }
    out
}

fn lagrange(t: &Tower, points: &[(Ext, Ext)]) -> Poly {
    let mut acc = Poly::zero();
    for (i, (xi, yi)) in points.iter().enumerate() {
        let mut num = Poly::one(t);
        let mut den = t.one();
        for (j, (xj, _)) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            num = num.mul(t, &Poly { c: vec![t.neg(xj), t.one()] });
            den = t.mul(&den, &t.sub(xi, xj));
        }
        let w = t.mul(yi, &t.inv(&den));
        acc = acc.add(t, &num.scale(t, &w));
    }
    acc
}

struct SubproductTree {
    /// nodes[level][i]; level 0 = leaves (x − xᵢ).
    levels: Vec<Vec<Poly>>,
}

impl SubproductTree {
    fn build(t: &Tower, xs: &[Ext]) -> SubproductTree {
        let leaves: Vec<Poly> = xs
            .iter()
            .map(|x| Poly { c: vec![t.neg(x), t.one()] })
            .collect();
        let mut levels = vec![leaves];
        while levels.last().unwrap().len() > 1 {
            let prev = levels.last().unwrap();
            let mut next = Vec::with_capacity(prev.len().div_ceil(2));
            for pair in prev.chunks(2) {
                if pair.len() == 2 {
                    next.push(pair[0].mul(t, &pair[1]));
                } else {
                    next.push(pair[0].clone());
                }
            }
            levels.push(next);
        }
        SubproductTree { levels }
    }

    fn root(&self) -> &Poly {
        &self.levels.last().unwrap()[0]
    }

    fn eval_down(&self, t: &Tower, f: &Poly) -> Vec<Ext> {
        let mut rems = vec![f.rem(t, self.root())];
        for level in (0..self.levels.len() - 1).rev() {
            let nodes = &self.levels[level];
            let mut next = Vec::with_capacity(nodes.len());
            for (i, node) in nodes.iter().enumerate() {
                next.push(rems[i / 2].rem(t, node));
            }
            rems = next;
        }
        rems
            .into_iter()
            .map(|r| if r.is_zero() { t.zero() } else { r.c[0].clone() })
            .collect()
    }

    /// Builds `Σ cᵢ · M/(x − xᵢ)` bottom-up.
    fn combine_up(&self, t: &Tower, cs: &[Ext]) -> Poly {
        let mut cur: Vec<Poly> = cs.iter().map(|c| Poly::from_coeffs(vec![c.clone()])).collect();
        for level in 0..self.levels.len() - 1 {
            let nodes = &self.levels[level];
            let mut next = Vec::with_capacity(nodes.len().div_ceil(2));
            let mut i = 0;
            while i < nodes.len() {
                if i + 1 < nodes.len() {
                    let lhs = cur[i].mul(t, &nodes[i + 1]);
                    let rhs = cur[i + 1].mul(t, &nodes[i]);
                    next.push(lhs.add(t, &rhs));
                } else {
                    next.push(cur[i].clone());
                }
                i += 2;
            }
            cur = next;
        }
        cur.into_iter().next().unwrap()
    }
}

fn fast_interpolate(t: &Tower, points: &[(Ext, Ext)]) -> Poly {
    let xs: Vec<Ext> = points.iter().map(|(x, _)| x.clone()).collect();
    let tree = SubproductTree::build(t, &xs);
    let m_deriv = tree.root().derivative(t);
    let dvals = tree.eval_down(t, &m_deriv);
    let cs: Vec<Ext> = points
        .iter()
        .zip(&dvals)
        .map(|((_, y), d)| t.mul(y, &t.inv(d)))
        .collect();
    tree.combine_up(t, &cs)
}

fn split_roots(t: &Tower, f: &Poly, out: &mut Vec<Ext>, counter: &mut u64) {
    match f.degree() {
        None | Some(0) => {}
        Some(1) => {
            // x + c0 (monic) → root −c0.
            let r = t.neg(&f.c[0]);
            out.push(r);
        }
        Some(_) => {
            // Equal-degree splitting on a product of distinct linear factors.
            let half = (t.cardinality() - BigUint::one()) >> 1;
            loop {
                *counter += 1;
                // Deterministic "random" affine shift.
                let mut coeffs = vec![0u64; t.degree()];
                let mut c = *counter;
                for slot in coeffs.iter_mut() {
                    *slot = (c % t.p()).wrapping_add(1) % t.p();
                    c = c.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    if c % 3 == 0 {
                        break;
                    }
                }
                let shift = Poly { c: vec![Ext(coeffs), t.one()] };
                let w = shift.powmod(t, &half, f).sub(t, &Poly::one(t));
                let g = w.gcd(t, f);
                let dg = g.degree().unwrap_or(0);
                if dg > 0 && dg < f.degree().unwrap() {
                    let (q, r) = f.divrem(t, &g);
                    debug_assert!(r.is_zero());
                    split_roots(t, &g, out, counter);
                    split_roots(t, &q, out, counter);
                    return;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    fn tw() -> Tower {
        Tower::build(101, 1)
    }

    #[test]
    fn mul_matches_schoolbook_karatsuba() {
        let t = tw();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let a = Poly::from_coeffs((0..70).map(|_| t.rand(&mut rng)).collect());
        let b = Poly::from_coeffs((0..55).map(|_| t.rand(&mut rng)).collect());
        let prod = a.mul(&t, &b);
        // Compare against direct schoolbook.
        let mut out = vec![t.zero(); a.c.len() + b.c.len() - 1];
        for (i, ai) in a.c.iter().enumerate() {
            for (j, bj) in b.c.iter().enumerate() {
                out[i + j] = t.add(&out[i + j], &t.mul(ai, bj));
            }
        }
        assert_eq!(prod, Poly::from_coeffs(out));
    }

    #[test]
    fn divrem_identity() {
        let t = tw();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let a = Poly::from_coeffs((0..20).map(|_| t.rand(&mut rng)).collect());
        let b = Poly::from_coeffs((0..7).map(|_| t.rand(&mut rng)).collect());
        let (q, r) = a.divrem(&t, &b);
        assert_eq!(a, q.mul(&t, &b).add(&t, &r));
        assert!(r.degree().unwrap_or(0) < b.degree().unwrap());
    }

    #[test]
    fn from_roots_and_roots_roundtrip() {
        let t = tw();
        let roots: Vec<Ext> = [3u64, 17, 42, 99, 3].iter().map(|&c| t.embed_base(c)).collect();
        let f = Poly::from_roots(&t, &roots);
        assert_eq!(f.degree(), Some(5));
        let found = f.roots(&t);
        let mult: usize = found.iter().map(|(_, m)| m).sum();
        assert_eq!(mult, 5);
        assert!(found.iter().any(|(r, m)| *r == t.embed_base(3) && *m == 2));
    }

    #[test]
    fn interpolate_small_and_large_agree_with_eval() {
        let t = tw();
        for n in [5usize, 40] {
            let pts: Vec<(Ext, Ext)> = (0..n as u64)
                .map(|i| (t.embed_base(i + 1), t.embed_base((i * i + 7) % 101)))
                .collect();
            let f = Poly::interpolate(&t, &pts).unwrap();
            assert!(f.degree().unwrap() < n);
            for (x, y) in &pts {
                assert_eq!(&f.eval(&t, x), y);
            }
        }
    }

    #[test]
    fn interpolate_duplicate_abscissa() {
        let t = tw();
        let pts = vec![
            (t.embed_base(1), t.embed_base(2)),
            (t.embed_base(1), t.embed_base(3)),
        ];
        assert_eq!(Poly::interpolate(&t, &pts), Err(PolyError::DuplicateAbscissa));
    }

    #[test]
    fn gcd_of_shared_factor() {
        let t = tw();
        let shared = Poly::from_roots(&t, &[t.embed_base(9), t.embed_base(13)]);
        let a = shared.mul(&t, &Poly::from_roots(&t, &[t.embed_base(2)]));
        let b = shared.mul(&t, &Poly::from_roots(&t, &[t.embed_base(4)]));
        assert_eq!(a.gcd(&t, &b), shared.monic(&t));
    }

    #[test]
    fn roots_in_genuine_extension() {
        let t = Tower::build(103, 2); // F_{103^4}
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let roots: Vec<Ext> = (0..6).map(|_| t.rand(&mut rng)).collect();
        let f = Poly::from_roots(&t, &roots);
        let found: Vec<Ext> = f.roots(&t).into_iter().map(|(r, _)| r).collect();
        let mut expect = roots.clone();
        expect.sort();
        expect.dedup();
        assert_eq!(found, expect);
    }
}
