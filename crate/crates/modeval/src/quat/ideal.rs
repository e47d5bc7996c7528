//! Left ideals of maximal orders: norms, local enumeration, connecting
//! ideals, and equivalence testing.

use super::element::{Quat, QuatAlgebra};
use super::lattice::Lattice;
use super::reduce::{lll_reduce, shortest_vectors, vectors_up_to};
use super::QuatError;
use crate::arith::Fp;
use crate::sieve::is_prime_u64;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

fn norm_i128(alg: &QuatAlgebra, l: &Lattice) -> i128 {
    l.norm(alg)
        .to_integer()
        .to_i128()
        .expect("ideal norm exceeds i128")
}

/// `O_L(I) = I·Ī / n(I)`.
pub fn left_order(alg: &QuatAlgebra, i: &Lattice) -> Lattice {
    let n = norm_i128(alg, i);
    i.product(alg, &i.conjugate(alg)).scaled(1, n)
}

/// `O_R(I) = Ī·I / n(I)`.
pub fn right_order(alg: &QuatAlgebra, i: &Lattice) -> Lattice {
    let n = norm_i128(alg, i);
    i.conjugate(alg).product(alg, i).scaled(1, n)
}

/// The right-scaled ideal `I·β`.
pub fn ideal_times_quat(alg: &QuatAlgebra, i: &Lattice, beta: &Quat) -> Lattice {
    let gens: Vec<Quat> = i.basis().iter().map(|b| alg.mul(b, beta)).collect();
    Lattice::from_generators(&gens).expect("scaled ideal stays full")
}

/// The `ℓ+1` left `O`-ideals of reduced norm `ℓ` (`ℓ` prime, unramified).
///
/// Samples elements of `O/ℓO` with reduced norm ≡ 0 (mod ℓ) — solving the
/// norm form as a quadratic in one coordinate — and collects the distinct
/// ideals `Oα + Oℓ` of norm exactly ℓ.
pub fn ideals_of_norm_ell<R: Rng>(
    alg: &QuatAlgebra,
    order: &Lattice,
    ell: u64,
    rng: &mut R,
) -> Result<Vec<Lattice>, QuatError> {
    let b = order.basis();
    let make_ideal = |alpha: &Quat| -> Lattice {
        let mut gens: Vec<Quat> = b.iter().map(|v| alg.mul(v, alpha)).collect();
        gens.extend(b.iter().map(|v| v.scaled(ell as i128, 1)));
        Lattice::from_generators(&gens).expect("norm-ℓ ideal is full")
    };
    let target = BigRational::from(BigInt::from(ell));
    let mut found: Vec<Lattice> = Vec::with_capacity(ell as usize + 1);
    let push = |ideal: Lattice, found: &mut Vec<Lattice>| {
        if ideal.norm(alg) == target && !found.contains(&ideal) {
            found.push(ideal);
        }
    };
    if ell <= 3 {
        // Exhaust O/ℓO.
        let l = ell as i128;
        for c0 in 0..l {
            for c1 in 0..l {
                for c2 in 0..l {
                    for c3 in 0..l {
                        let alpha = combine(alg, &b, [c0, c1, c2, c3]);
                        if alpha.is_zero() {
                            continue;
                        }
                        let n = alg.nrd(&alpha);
                        if (n.numer() % BigInt::from(ell)).is_zero() {
                            push(make_ideal(&alpha), &mut found);
                        }
                    }
                }
            }
        }
        if found.len() == ell as usize + 1 {
            return Ok(found);
        }
        return Err(QuatError::SearchExhausted("enumerating norm-ℓ ideals"));
    }
    let fl = Fp::new(ell);
    let budget = 64 * (ell + 1) * (64 - ell.leading_zeros() as u64);
    for _ in 0..budget {
        let c: [i128; 3] = [
            rng.gen_range(0..ell) as i128,
            rng.gen_range(0..ell) as i128,
            rng.gen_range(0..ell) as i128,
        ];
        let rest = combine(alg, &b, [0, c[0], c[1], c[2]]);
        // nrd(c0·b0 + rest) as a quadratic in c0, fitted from three values.
        let f0 = alg.nrd(&rest);
        let f1 = alg.nrd(&alg.add(&b[0], &rest));
        let at2 = alg.add(&b[0], &b[0]);
        let f2 = alg.nrd(&alg.add(&at2, &rest));
        let two = BigRational::from(BigInt::from(2));
        let qa = (&f2 - &f1 * &two + &f0) / &two;
        let qb = &f1 - &f0 - &qa;
        let (a_m, b_m, c_m) = (rat_mod(&qa, ell), rat_mod(&qb, ell), rat_mod(&f0, ell));
        for c0 in solve_quadratic_mod(&fl, a_m, b_m, c_m) {
            let alpha = combine(alg, &b, [c0 as i128, c[0], c[1], c[2]]);
            if alpha.is_zero() {
                continue;
            }
            debug_assert!((alg.nrd(&alpha).numer() % BigInt::from(ell)).is_zero());
            push(make_ideal(&alpha), &mut found);
        }
        if found.len() == ell as usize + 1 {
            return Ok(found);
        }
    }
    Err(QuatError::SearchExhausted("sampling norm-ℓ ideals"))
}

fn combine(alg: &QuatAlgebra, b: &[Quat; 4], c: [i128; 4]) -> Quat {
    let mut acc = Quat::zero();
    for (v, ci) in b.iter().zip(c) {
        acc = alg.add(&acc, &v.scaled(ci, 1));
    }
    acc
}

/// Reduces an ℓ-integral rational mod ℓ.
fn rat_mod(r: &BigRational, ell: u64) -> u64 {
    let l = BigInt::from(ell);
    let num = ((r.numer() % &l) + &l) % &l;
    let den = ((r.denom() % &l) + &l) % &l;
    let fl = Fp::new(ell);
    fl.mul(num.to_u64().unwrap(), fl.inv(den.to_u64().unwrap()))
}

/// Roots of `a·x² + b·x + c` modulo an odd prime.
pub(crate) fn solve_quadratic_mod(f: &Fp, a: u64, b: u64, c: u64) -> Vec<u64> {
    if a == 0 {
        if b == 0 {
            return vec![];
        }
        return vec![f.mul(f.neg(c), f.inv(b))];
    }
    let disc = f.sub(f.mul(b, b), f.mul(4 % f.p(), f.mul(a, c)));
    match f.sqrt(disc) {
        None => vec![],
        Some(s) => {
            let inv2a = f.inv(f.mul(2, a));
            let r1 = f.mul(f.sub(s, b), inv2a);
            let r2 = f.mul(f.sub(f.neg(s), b), inv2a);
            if r1 == r2 {
                vec![r1]
            } else {
                vec![r1, r2]
            }
        }
    }
}

/// An integral ideal connecting `O₁` to `O₂` (left order `O₁`, right
/// order `O₂`), as a coordinate-integral scaling of `O₁·O₂`.
pub fn connecting_ideal(alg: &QuatAlgebra, o1: &Lattice, o2: &Lattice) -> Lattice {
    let l = o1.product(alg, o2);
    l.scaled(l.den, 1)
}

/// Whether two left ideals of the same maximal order are equivalent
/// (`I₂ = I₁·β` for some `β ∈ B^×`): the minimal norm of `Ī₁·I₂` equals
/// `n(I₁)·n(I₂)` exactly when a witness exists.
pub fn ideals_are_equivalent(alg: &QuatAlgebra, i1: &Lattice, i2: &Lattice) -> bool {
    let l = i1.conjugate(alg).product(alg, i2);
    let sv = shortest_vectors(alg, &l.basis());
    let min = alg.nrd(&sv[0]);
    min == i1.norm(alg) * i2.norm(alg)
}

/// An equivalent left ideal of odd prime reduced norm, coprime to `p`, `q`,
/// and the listed values, together with the witness `β ∈ I` realising
/// `J = I·β̄ / n(I)`.
pub fn equivalent_prime_ideal(
    alg: &QuatAlgebra,
    i: &Lattice,
    avoid: &[i128],
) -> Result<(Lattice, Quat), QuatError> {
    let mut basis = i.basis().to_vec();
    lll_reduce(alg, &mut basis);
    let n = i.norm(alg);
    let n_int = n.to_integer();
    // Enumerate by growing bound until a usable β appears.
    let mut bound = alg
        .nrd(&basis[0])
        .max(alg.nrd(&basis[1]))
        .max(alg.nrd(&basis[2]))
        .max(alg.nrd(&basis[3]));
    for _ in 0..8 {
        let mut cands = vectors_up_to(alg, &basis, &bound);
        cands.sort_by_key(|v| alg.nrd(v).to_integer());
        for beta in cands {
            let nb = alg.nrd(&beta).to_integer();
            let quo = &nb / &n_int;
            if &quo * &n_int != nb {
                continue;
            }
            let quo_i = match quo.to_i128() {
                Some(v) => v,
                None => continue,
            };
            if quo_i < 3 || quo_i % 2 == 0 || quo_i == alg.p || quo_i == alg.q {
                continue;
            }
            if avoid.iter().any(|&a| a != 0 && quo_i % a == 0 && a > 1) {
                continue;
            }
            if !is_prime_u64(quo_i as u64) {
                continue;
            }
            let j = ideal_times_quat(alg, i, &alg.conj(&beta)).scaled(1, n_int.to_i128().unwrap());
            debug_assert_eq!(j.norm(alg).to_integer(), quo);
            return Ok((j, beta));
        }
        bound = bound * BigRational::from(BigInt::from(4));
    }
    Err(QuatError::SearchExhausted("finding an equivalent prime ideal"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    fn o0(p: i128) -> (QuatAlgebra, Lattice) {
        assert_eq!(p % 4, 3);
        let alg = QuatAlgebra::new(1, p);
        let o = Lattice::from_generators(&[
            Quat::one(),
            Quat::new(0, 1, 0, 0, 1),
            Quat::new(0, 1, 1, 0, 2),
            Quat::new(1, 0, 0, 1, 2),
        ])
        .unwrap();
        (alg, o)
    }

    #[test]
    fn norm_ell_ideals_count_and_orders() {
        let (alg, o) = o0(103);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for ell in [2u64, 3, 5, 7] {
            let ideals = ideals_of_norm_ell(&alg, &o, ell, &mut rng).unwrap();
            assert_eq!(ideals.len(), ell as usize + 1, "ℓ = {ell}");
            for i in &ideals {
                assert_eq!(i.norm(&alg), BigRational::from(BigInt::from(ell)));
                assert_eq!(left_order(&alg, i), o);
                let or = right_order(&alg, i);
                assert!(or.is_order(&alg));
                assert_eq!(or.reduced_discriminant(&alg), BigInt::from(103));
            }
        }
    }

    #[test]
    fn connecting_ideal_connects() {
        let (alg, o) = o0(103);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(22);
        let ideals = ideals_of_norm_ell(&alg, &o, 2, &mut rng).unwrap();
        let o2 = right_order(&alg, &ideals[0]);
        let c = connecting_ideal(&alg, &o, &o2);
        assert_eq!(left_order(&alg, &c), o);
        assert_eq!(right_order(&alg, &c), o2);
        // The connecting ideal is equivalent to the norm-2 ideal itself.
        assert!(ideals_are_equivalent(&alg, &ideals[0], &c));
    }

    #[test]
    fn inequivalent_ideals_detected() {
        let (alg, o) = o0(1019);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let ideals = ideals_of_norm_ell(&alg, &o, 3, &mut rng).unwrap();
        // With p = 1019 the class number exceeds 1, so some pair of norm-3
        // ideals must be inequivalent; and every ideal is equivalent to
        // itself.
        for i in &ideals {
            assert!(ideals_are_equivalent(&alg, i, i));
        }
        let any_inequiv = ideals
            .iter()
            .skip(1)
            .any(|i| !ideals_are_equivalent(&alg, &ideals[0], i));
        assert!(any_inequiv);
    }

    #[test]
    fn equivalent_prime_ideal_is_equivalent() {
        let (alg, o) = o0(1019);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(24);
        let ideals = ideals_of_norm_ell(&alg, &o, 2, &mut rng).unwrap();
        for i in &ideals {
            let (j, beta) = equivalent_prime_ideal(&alg, i, &[2]).unwrap();
            let nj = j.norm(&alg).to_integer().to_i128().unwrap();
            assert!(nj % 2 == 1 && nj != 1019 && is_prime_u64(nj as u64));
            assert!(ideals_are_equivalent(&alg, i, &j));
            assert!(i.contains(&beta));
        }
    }
}
