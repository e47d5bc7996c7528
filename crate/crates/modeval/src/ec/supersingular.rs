//! Supersingularity testing and the `F_p`-rational class-group action.

use super::curve::{Curve, Point};
use super::pairing::{dlog_in_mu, weil_pairing};
use super::{EcError, Isogeny};
use crate::arith::{Fp2, Fp2El, Tower};
use crate::poly::Poly;
use rand::Rng;

/// Coefficients of the classical modular polynomial of level 2, as a cubic
/// in X with coefficients polynomial in Y = j:
/// Φ₂ = X³ + c₂(j)X² + c₁(j)X + c₀(j).
fn phi2_in_x(f: &Fp2, j: Fp2El) -> [Fp2El; 4] {
    let r = |v: i128| Fp2El::from_base(f.fp().reduce_i128(v));
    let j2 = f.square(j);
    let j3 = f.mul(j2, j);
    let c2 = f.add(f.sub(f.mul_base(j, 1488), j2), r(-162000));
    let c1 = f.add(
        f.add(f.mul_base(j2, 1488), f.mul(j, r(40773375))),
        r(8748000000),
    );
    let c0 = f.add(
        f.add(j3, f.mul(j2, r(-162000))),
        f.add(f.mul(j, r(8748000000)), r(-157464000000000)),
    );
    [c0, c1, c2, Fp2El::ONE]
}

/// Roots (with multiplicity) in `F_{p²}` of `Φ₂(X, j)`, the j-invariants
/// of the curves 2-isogenous to one with invariant `j`.
pub fn two_isogenous_j(t: &Tower, j: Fp2El) -> Vec<(Fp2El, usize)> {
    assert_eq!(t.k(), 1);
    let coeffs = phi2_in_x(t.fp2(), j);
    let poly = Poly::from_coeffs(coeffs.iter().map(|c| t.embed(*c)).collect());
    poly.roots(t)
        .into_iter()
        .map(|(r, m)| (t.coerce(&r).expect("roots over k = 1"), m))
        .collect()
}

/// Whether the curve with j-invariant `j ∈ F_{p²}` is supersingular.
///
/// Uses the congruence shortcuts for j = 0 and j = 1728, and otherwise the
/// isogeny-volcano criterion: a supersingular j has all three 2-isogeny
/// neighbours in `F_{p²}`, and three independent non-backtracking walks of
/// length ⌊log₂ p⌋ + 1 never fall off the (finite-depth) ordinary volcano.
pub fn is_supersingular(t: &Tower, j: Fp2El) -> bool {
    assert_eq!(t.k(), 1);
    let f = t.fp2();
    let p = f.p();
    if j.is_zero() {
        return p % 3 == 2;
    }
    if j == Fp2El::from_base(f.fp().reduce_u64(1728)) {
        return p % 4 == 3;
    }
    let start = two_isogenous_j(t, j);
    let mult: usize = start.iter().map(|(_, m)| m).sum();
    if mult < 3 {
        return false;
    }
    let mut paths = Vec::with_capacity(3);
    for (r, m) in &start {
        for _ in 0..*m {
            paths.push((j, *r));
            if paths.len() == 3 {
                break;
            }
        }
    }
    let steps = 63 - p.leading_zeros() as usize + 1;
    for _ in 0..steps {
        for (prev, cur) in paths.iter_mut() {
            // Divide Φ₂(X, cur) by (X − prev): synthetic division.
            let c = phi2_in_x(f, *cur);
            let b2 = c[3];
            let b1 = f.add(c[2], f.mul(b2, *prev));
            let b0 = f.add(c[1], f.mul(b1, *prev));
            debug_assert!(f.add(c[0], f.mul(b0, *prev)).is_zero(), "backtracking root");
            // Solve b2·X² + b1·X + b0 = 0 over F_{p²}.
            let disc = f.sub(f.square(b1), f.mul_base(f.mul(b2, b0), 4));
            let root = match f.sqrt(disc) {
                Some(s) => f.mul(f.sub(s, b1), f.inv(f.mul_base(b2, 2))),
                None => return false,
            };
            *prev = *cur;
            *cur = root;
        }
    }
    true
}

/// One step of the class-group action on supersingular curves over `F_p`:
/// the isogeny with kernel `E[ℓ] ∩ ker(π − λ)` for the Frobenius eigenvalue
/// `λ` with `λ² ≡ −p (mod ℓ)`, taking the representative in `(0, ℓ/2)` when
/// `positive` and its negative otherwise.
///
/// `t` must be a tower over which `E[ℓ]` is rational, i.e. of degree `2k`
/// with `k` the multiplicative order of `−p` modulo `ℓ`.
pub fn group_action_step<R: Rng>(
    t: &Tower,
    e: &Curve,
    ell: u64,
    positive: bool,
    rng: &mut R,
) -> Result<Curve, EcError> {
    assert!(ell % 2 == 1 && ell > 2, "odd prime steps only");
    assert!(
        e.a.is_base() && e.b.is_base(),
        "the class-group action needs a model over F_p"
    );
    let p = t.p();
    let target = (ell - p % ell) % ell;
    let lambda0 = (1..ell)
        .find(|l| l * l % ell == target)
        .ok_or(EcError::NotSplit { ell })?;
    let canonical = lambda0.min(ell - lambda0);
    let lambda = if positive { canonical } else { ell - canonical };
    // Resample the torsion basis when a Miller line degenerates.
    let mut attempt = || -> Result<Point, EcError> {
        let (bp, bq) = e.torsion_basis(t, ell, rng)?;
        let zeta = weil_pairing(t, e, &bp, &bq, ell)?;
        let coords = |r: &Point| -> Result<(u64, u64), EcError> {
            let a = dlog_in_mu(t, &zeta, &weil_pairing(t, e, r, &bq, ell)?, ell)?;
            let b = dlog_in_mu(t, &zeta, &weil_pairing(t, e, &bp, r, ell)?, ell)?;
            Ok((a, b))
        };
        let (a, c) = coords(&e.frobenius_point(t, &bp, 1))?;
        let (b, d) = coords(&e.frobenius_point(t, &bq, 1))?;
        // Eigenvector of [[a, b], [c, d]] for eigenvalue λ.
        let (x, y) = if b % ell != 0 || (lambda + ell - a) % ell != 0 {
            (b % ell, (lambda + ell - a) % ell)
        } else {
            ((lambda + ell - d) % ell, c % ell)
        };
        Ok(e.add(t, &e.mul_u64(t, &bp, x), &e.mul_u64(t, &bq, y)))
    };
    let mut r = attempt();
    for _ in 0..6 {
        match r {
            Err(EcError::PairingDegenerate) => r = attempt(),
            _ => break,
        }
    }
    let r = r?;
    debug_assert!(!r.is_infinity());
    debug_assert_eq!(
        e.frobenius_point(t, &r, 1),
        e.mul_u64(t, &r, lambda),
        "kernel generator must be a Frobenius eigenvector"
    );
    let phi = Isogeny::from_kernel_point(t, e, &r, ell)?;
    debug_assert!(phi.codomain.a.is_base() && phi.codomain.b.is_base());
    Ok(phi.codomain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    #[test]
    fn supersingular_matches_point_counts_over_fp() {
        // Over F_p a curve is supersingular iff its trace vanishes, i.e.
        // |E(F_p)| = p + 1. Check every j ∈ F_p against a naive count.
        for p in [101u64, 103] {
            let t = Tower::build(p, 1);
            let f = t.fp2();
            let fp = f.fp();
            for j0 in 0..p {
                let e = Curve::from_j(f, Fp2El::from_base(j0));
                let (a, b) = (e.a.c0, e.b.c0);
                assert!(e.a.is_base() && e.b.is_base());
                let mut count = p + 1;
                for x in 0..p {
                    let rhs = fp.add(fp.mul(x, fp.mul(x, x)), fp.add(fp.mul(a, x), b));
                    match fp.legendre(rhs) {
                        0 => count += 0,
                        1 => count += 1,
                        _ => count -= 1,
                    }
                }
                let ss = count == p + 1;
                assert_eq!(
                    is_supersingular(&t, Fp2El::from_base(j0)),
                    ss,
                    "p = {p}, j = {j0}"
                );
            }
        }
    }

    #[test]
    fn supersingular_in_fp2_neighbourhood() {
        // Neighbours of a supersingular j are supersingular, including
        // those with j ∈ F_{p²} \ F_p.
        let p = 103u64;
        let t = Tower::build(p, 1);
        let j0 = Fp2El::from_base(1728 % p);
        assert!(is_supersingular(&t, j0));
        let mut frontier = vec![j0];
        let mut seen = std::collections::HashSet::new();
        for _ in 0..3 {
            let mut next = vec![];
            for j in frontier.drain(..) {
                if !seen.insert(j) {
                    continue;
                }
                for (n, _) in two_isogenous_j(&t, j) {
                    assert!(is_supersingular(&t, n), "neighbour {n:?}");
                    next.push(n);
                }
            }
            frontier = next;
        }
        assert!(seen.len() > 1);
    }

    #[test]
    fn group_action_steps_invert_and_commute() {
        // p = 59 ≡ 2 (mod 3): ℓ = 3 splits, with E[3] rational over F_{p²}.
        let p = 59u64;
        let t = Tower::build(p, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let e = Curve::from_j(t.fp2(), Fp2El::from_base(1728 % p));
        let f = t.fp2();
        let e1 = group_action_step(&t, &e, 3, true, &mut rng).unwrap();
        let back = group_action_step(&t, &e1, 3, false, &mut rng).unwrap();
        assert_eq!(back.j_invariant(f), e.j_invariant(f), "inverse step");
        // Commutativity of two successive positive steps along different
        // walks of the same ideal class square.
        let e2 = group_action_step(&t, &e1, 3, true, &mut rng).unwrap();
        let e1b = group_action_step(&t, &e, 3, true, &mut rng).unwrap();
        let e2b = group_action_step(&t, &e1b, 3, true, &mut rng).unwrap();
        assert_eq!(e2.j_invariant(f), e2b.j_invariant(f));
    }

    #[test]
    fn group_action_not_split() {
        // p = 103 ≡ 1 (mod 3): −p is not a square mod 3.
        let t = Tower::build(103, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let e = Curve::from_j(t.fp2(), Fp2El::from_base(1728 % 103));
        assert!(matches!(
            group_action_step(&t, &e, 3, true, &mut rng),
            Err(EcError::NotSplit { ell: 3 })
        ));
    }
}
