//! Exact LLL reduction and short-vector enumeration for the reduced-norm
//! quadratic form, at the tiny ranks (≤ 4) that occur here.

use super::element::{Quat, QuatAlgebra};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

fn gram(alg: &QuatAlgebra, basis: &[Quat]) -> Vec<Vec<BigRational>> {
    let n = basis.len();
    let mut g = vec![vec![BigRational::zero(); n]; n];
    for r in 0..n {
        for c in 0..n {
            g[r][c] = alg.inner(&basis[r], &basis[c]);
        }
    }
    g
}

/// Gram–Schmidt data: `mu[i][j]` for j < i, and squared lengths `b[i]` of
/// the orthogonalised vectors, all exact.
fn gram_schmidt(g: &[Vec<BigRational>]) -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
    let n = g.len();
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    let mut b = vec![BigRational::zero(); n];
    for i in 0..n {
        for j in 0..i {
            let mut s = g[i][j].clone();
            for k in 0..j {
                let t = &mu[i][k] * &mu[j][k] * &b[k];
                s -= t;
            }
            mu[i][j] = s / &b[j];
        }
        let mut s = g[i][i].clone();
        for k in 0..i {
            let t = &mu[i][k] * &mu[i][k] * &b[k];
            s -= t;
        }
        b[i] = s;
    }
    (mu, b)
}

/// In-place LLL reduction (δ = 99/100) with respect to the reduced norm.
pub fn lll_reduce(alg: &QuatAlgebra, basis: &mut Vec<Quat>) {
    let delta = BigRational::new(BigInt::from(99), BigInt::from(100));
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut g = gram(alg, basis);
    let (mut mu, mut b) = gram_schmidt(&g);
    let n = basis.len();
    let mut k = 1;
    while k < n {
        // Size reduction.
        for j in (0..k).rev() {
            if mu[k][j].abs() > half {
                let r = mu[k][j].round().to_integer();
                let q = quat_scale_int(alg, &basis[j], &r);
                basis[k] = alg.sub(&basis[k], &q);
                g = gram(alg, basis);
                let gs = gram_schmidt(&g);
                mu = gs.0;
                b = gs.1;
            }
        }
        // Lovász condition.
        let lhs = &b[k];
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &b[k - 1];
        if *lhs >= rhs {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            g = gram(alg, basis);
            let gs = gram_schmidt(&g);
            mu = gs.0;
            b = gs.1;
            k = k.max(2) - 1;
            if k == 0 {
                k = 1;
            }
        }
    }
}

fn quat_scale_int(alg: &QuatAlgebra, q: &Quat, r: &BigInt) -> Quat {
    let ri = i128::try_from(r).expect("LLL coefficient exceeds i128");
    let _ = alg;
    q.scaled(ri, 1)
}

/// All lattice vectors `v = Σ cᵢ·basisᵢ` with `0 < nrd(v) ≤ bound`,
/// up to sign (one representative of ±v each), by Fincke–Pohst
/// enumeration on the exact Gram–Schmidt data.
pub fn vectors_up_to(alg: &QuatAlgebra, basis: &[Quat], bound: &BigRational) -> Vec<Quat> {
    let n = basis.len();
    let g = gram(alg, basis);
    let (mu, b) = gram_schmidt(&g);
    // inner = 2·nrd, so enumerate Q(v) ≤ 2·bound in the inner form.
    let target = bound * BigRational::from(BigInt::from(2));
    let mut out = Vec::new();
    let mut coeffs = vec![BigInt::zero(); n];
    enumerate(
        alg,
        basis,
        &mu,
        &b,
        &target,
        n,
        &mut coeffs,
        &BigRational::zero(),
        &mut out,
    );
    out
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    alg: &QuatAlgebra,
    basis: &[Quat],
    mu: &[Vec<BigRational>],
    b: &[BigRational],
    remaining: &BigRational,
    level: usize,
    coeffs: &mut Vec<BigInt>,
    _acc: &BigRational,
    out: &mut Vec<Quat>,
) {
    if level == 0 {
        // Leading nonzero coefficient positive: dedupes ±v.
        if coeffs.iter().all(|c| c.is_zero()) {
            return;
        }
        let mut v = Quat::zero();
        for (i, c) in coeffs.iter().enumerate() {
            let ci = i128::try_from(c).expect("enumeration coefficient overflow");
            v = alg.add(&v, &basis[i].scaled(ci, 1));
        }
        out.push(v);
        return;
    }
    let i = level - 1;
    // Center of the admissible interval for cᵢ given the outer choices.
    let mut center = BigRational::zero();
    for j in level..coeffs.len() {
        let t = &mu[j][i] * BigRational::from(coeffs[j].clone());
        center -= t;
    }
    if b[i].is_zero() {
        return;
    }
    // (cᵢ − center)²·bᵢ ≤ remaining.
    let radius2 = remaining / &b[i];
    // Integer range scan around the center.
    let lo = floor_sqrt_shift(&center, &radius2, true);
    let hi = floor_sqrt_shift(&center, &radius2, false);
    let mut c = lo;
    while c <= hi {
        let diff = BigRational::from(c.clone()) - &center;
        let used = &diff * &diff * &b[i];
        if used <= *remaining {
            coeffs[i] = c.clone();
            let next_rem = remaining - &used;
            // Enforce sign canonicalisation at the outermost nonzero level.
            let outer_zero = (level..coeffs.len()).all(|j| coeffs[j].is_zero());
            if !(outer_zero && c.is_negative()) {
                enumerate(
                    alg,
                    basis,
                    mu,
                    b,
                    &next_rem,
                    level - 1,
                    coeffs,
                    &BigRational::zero(),
                    out,
                );
            }
        }
        c += BigInt::one();
    }
    coeffs[level - 1] = BigInt::zero();
}

/// Floor/ceil of `center ± sqrt(radius2)` as integers (loose but safe).
fn floor_sqrt_shift(center: &BigRational, radius2: &BigRational, lower: bool) -> BigInt {
    // Integer sqrt upper bound of radius2.
    let r_ceil = {
        let num = radius2.numer().clone();
        let den = radius2.denom().clone();
        // ceil(sqrt(num/den)) ≤ ceil(sqrt(ceil(num/den))) + 1
        let q = (&num + &den - BigInt::one()) / &den;
        q.sqrt() + BigInt::one()
    };
    if lower {
        (center - BigRational::from(r_ceil)).floor().to_integer()
    } else {
        (center + BigRational::from(r_ceil)).ceil().to_integer()
    }
}

/// The nonzero vectors of minimal reduced norm (up to sign).
pub fn shortest_vectors(alg: &QuatAlgebra, basis: &[Quat]) -> Vec<Quat> {
    let mut red = basis.to_vec();
    lll_reduce(alg, &mut red);
    let start = red
        .iter()
        .map(|v| alg.nrd(v))
        .min()
        .expect("nonempty basis");
    let cands = vectors_up_to(alg, &red, &start);
    let min = cands
        .iter()
        .map(|v| alg.nrd(v))
        .min()
        .expect("at least the basis vector");
    cands.into_iter().filter(|v| alg.nrd(v) == min).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::Lattice;

    #[test]
    fn lll_finds_unit_in_maximal_order() {
        // The shortest vectors of a maximal order are the units; nrd = 1.
        let alg = QuatAlgebra::new(1, 103);
        let o = Lattice::from_generators(&[
            Quat::one(),
            Quat::new(0, 1, 0, 0, 1),
            Quat::new(0, 1, 1, 0, 2),
            Quat::new(1, 0, 0, 1, 2),
        ])
        .unwrap();
        let sv = shortest_vectors(&alg, &o.basis());
        assert!(sv.iter().all(|v| alg.nrd(v) == BigRational::one()));
        assert!(sv.len() >= 2); // at least ±1, ±i up to sign
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let alg = QuatAlgebra::new(1, 59);
        let o = Lattice::standard();
        let bound = BigRational::from(BigInt::from(10));
        let mut got: Vec<_> = vectors_up_to(&alg, &o.basis(), &bound)
            .into_iter()
            .map(|v| std::cmp::max(v, v.neg()))
            .collect();
        got.sort();
        got.dedup();
        let mut brute = vec![];
        for t in -4i128..=4 {
            for x in -4i128..=4 {
                for y in -1i128..=1 {
                    // q·p = 59: z must be 0 for nrd ≤ 10.
                    let v = Quat::new(t, x, y, 0, 1);
                    if v.is_zero() {
                        continue;
                    }
                    if alg.nrd(&v) <= bound {
                        brute.push(std::cmp::max(v, v.neg()));
                    }
                }
            }
        }
        brute.sort();
        brute.dedup();
        assert_eq!(got, brute);
    }
}
