//! Computing the endomorphism ring of a supersingular curve given by its
//! j-invariant over `F_p`.
//!
//! Every supersingular j in `F_p` is the image of a curve defined over
//! `F_p`, which lives on one of (at most) two levels of the `F_p`-rational
//! isogeny graph, distinguished by the rank of the rational 2-torsion.
//! After moving the starting curve to the correct level by a vertical
//! 2-isogeny, a meet-in-the-middle walk with horizontal odd-degree steps
//! (the class-group action) connects it to the target. The quaternion side
//! mirrors the path: a step of degree ℓ with Frobenius eigenvalue λ
//! multiplies the accumulated ideal by `𝒪ℓ + 𝒪(π − λ)`; the ideal is
//! re-reduced after every step, conjugating the quaternion that represents
//! Frobenius along.

use std::collections::HashMap;

use num_traits::ToPrimitive;
use rand::Rng;

use crate::arith::{Fp2El, Tower};
use crate::ec::{group_action_step, is_supersingular, Curve, Isogeny, Point};
use crate::poly::Poly;
use crate::quat::{
    equivalent_prime_ideal, ideal_times_quat, right_order, Lattice, Quat, QuatAlgebra,
};
use crate::sieve::is_prime_u64;

use super::kernel::kernel_to_ideal;
use super::starting::minus_p_order;
use super::{DeuringContext, DeuringError};

/// The x-coordinates (in `F_p`) of the rational 2-torsion of a curve over
/// `F_p`: the base-field roots of `x³ + ax + b`.
fn rational_two_torsion_x(t1: &Tower, e: &Curve) -> Vec<Fp2El> {
    debug_assert!(e.a.is_base() && e.b.is_base());
    let cubic = Poly::from_coeffs(vec![
        t1.embed(e.b),
        t1.embed(e.a),
        t1.zero(),
        t1.one(),
    ]);
    let mut out: Vec<Fp2El> = cubic
        .distinct_roots(t1)
        .into_iter()
        .filter_map(|r| t1.coerce(&r).ok())
        .filter(|x| x.is_base())
        .collect();
    out.sort();
    out
}

/// Split odd primes usable as horizontal walk steps: `λ² ≡ −p (mod ℓ)` is
/// solvable with `λ ≠ 0`, and the ℓ-torsion tower stays small.
fn walk_primes(p: u64, count: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let mut ell = 3u64;
    while out.len() < count && ell < 1000 {
        if is_prime_u64(ell) && p % ell != 0 {
            let target = (ell - p % ell) % ell;
            let split = target != 0 && (1..ell).any(|l| l * l % ell == target);
            if split {
                if let Some(k) = minus_p_order(p, ell) {
                    if k <= 12 {
                        out.push(ell);
                    }
                }
            }
        }
        ell += 2;
    }
    out
}

/// The canonical eigenvalue used by [`group_action_step`] for a step of
/// degree `ell` in the given direction.
fn step_eigenvalue(p: u64, ell: u64, positive: bool) -> u64 {
    let target = (ell - p % ell) % ell;
    let lambda0 = (1..ell)
        .find(|l| l * l % ell == target)
        .expect("walk primes are split");
    let canonical = lambda0.min(ell - lambda0);
    if positive {
        canonical
    } else {
        ell - canonical
    }
}

/// Applies one quaternion-side step: `J ← Jℓ + J(π − λ)`, reduced back to
/// prime norm, conjugating the Frobenius representative accordingly.
fn step_ideal(
    alg: &QuatAlgebra,
    j_ideal: &Lattice,
    pi: &Quat,
    ell: u64,
    lambda: u64,
) -> Result<(Lattice, Quat), DeuringError> {
    let elem = alg.sub(pi, &Quat::from_int(lambda as i128));
    let grown = j_ideal
        .scaled(ell as i128, 1)
        .sum(&ideal_times_quat(alg, j_ideal, &elem));
    let primitive = make_primitive(&grown);
    let (reduced, beta) = equivalent_prime_ideal(alg, &primitive, &[])?;
    // J_new = J_old·β̄/n, so Frobenius conjugates by β: π ← βπβ̄ / nrd(β).
    let nrd = alg
        .nrd(&beta)
        .to_integer()
        .to_i128()
        .expect("β norm fits i128");
    let pi_new = alg
        .mul(&alg.mul(&beta, pi), &alg.conj(&beta))
        .scaled(1, nrd);
    debug_assert!(alg.trd(&pi_new).to_integer().to_i128() == Some(0));
    debug_assert!(alg.nrd(&pi_new).to_integer().to_i128() == Some(alg.p));
    Ok((reduced, pi_new))
}

/// Clears denominators and content from a lattice (both preserve the right
/// order and the ideal class up to scalars).
fn make_primitive(l: &Lattice) -> Lattice {
    let basis = l.basis();
    let mut den = 1i128;
    for q in &basis {
        den = lcm_i128(den, q.d);
    }
    let integral = l.scaled(den, 1);
    let mut content = 0i128;
    for q in integral.basis() {
        for c in [q.t, q.x, q.y, q.z] {
            content = gcd_i128(content, c);
        }
    }
    integral.scaled(1, content.max(1))
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm_i128(a: i128, b: i128) -> i128 {
    a / gcd_i128(a, b) * b
}

/// A node of the meet-in-the-middle walk.
#[derive(Clone)]
struct Node {
    curve: Curve,
    path: Vec<(u64, bool)>,
}

/// Computes a maximal order isomorphic to `End(E_j)` for a supersingular
/// `j ∈ F_p`.
pub fn endo_ring<R: Rng>(
    ctx: &DeuringContext,
    j: u64,
    rng: &mut R,
) -> Result<Lattice, DeuringError> {
    Ok(right_order(&ctx.alg, &endo_ring_ideal(ctx, j, rng)?))
}

/// Computes a left `𝒪₀`-ideal whose right order is isomorphic to
/// `End(E_j)` and whose class corresponds to the curve with j-invariant
/// exactly `j` (no Galois ambiguity: the walk stays over `F_p`-rational
/// j-invariants). Composing this ideal with left ideals of its right
/// order keeps neighbor translations class-exact.
pub fn endo_ring_ideal<R: Rng>(
    ctx: &DeuringContext,
    j: u64,
    rng: &mut R,
) -> Result<Lattice, DeuringError> {
    let f2 = &ctx.f2;
    let t1 = ctx.tower(1);
    let j_el = Fp2El::from_base(f2.fp().reduce_u64(j));
    if !is_supersingular(&t1, j_el) {
        return Err(DeuringError::NotSupersingular(j));
    }
    let target = Curve::from_j(f2, j_el);
    let rank_t = rational_two_torsion_x(&t1, &target).len();

    // Level matching: move E₀ by a vertical 2-isogeny when the rational
    // 2-torsion ranks disagree (only possible for p ≡ 3 mod 4).
    let rank_0 = rational_two_torsion_x(&t1, &ctx.e0).len();
    let (start, mut j_ideal, mut pi) = if rank_0 == rank_t {
        (ctx.e0, ctx.order0, Quat::new(0, 0, 1, 0, 1))
    } else {
        vertical_step(ctx, &t1, rank_t, rng)?
    };

    // Meet-in-the-middle frontiers over F_p-rational j-invariants.
    let primes = walk_primes(ctx.p, (64 - ctx.p.leading_zeros() as usize) + 4);
    if primes.is_empty() {
        return Err(DeuringError::SearchBudgetExceeded(
            "no usable split primes for the class-group walk",
        ));
    }
    let towers: Vec<std::sync::Arc<Tower>> = primes
        .iter()
        .map(|&ell| ctx.tower(minus_p_order(ctx.p, ell).unwrap()))
        .collect();
    let key = |c: &Curve| -> u64 {
        let jv = c.j_invariant(f2);
        debug_assert!(jv.is_base());
        jv.c0
    };
    let mut sides = [
        HashMap::from([(
            key(&start),
            Node {
                curve: start,
                path: Vec::new(),
            },
        )]),
        HashMap::from([(
            key(&target),
            Node {
                curve: target,
                path: Vec::new(),
            },
        )]),
    ];
    let mut frontiers = [vec![key(&start)], vec![key(&target)]];
    let collision = 'outer: loop {
        if let Some(k) = sides[0].keys().find(|k| sides[1].contains_key(*k)) {
            break *k;
        }
        // Expand the smaller side by one breadth-first layer.
        let mut side = usize::from(sides[1].len() < sides[0].len());
        if frontiers[side].is_empty() {
            side = 1 - side;
        }
        if frontiers[side].is_empty() || sides[0].len() + sides[1].len() > 8192 {
            return Err(DeuringError::SearchBudgetExceeded(
                "meet-in-the-middle walk exhausted its budget",
            ));
        }
        let frontier = std::mem::take(&mut frontiers[side]);
        let mut next = Vec::new();
        for fk in frontier {
            let node = sides[side][&fk].clone();
            for (i, &ell) in primes.iter().enumerate() {
                for positive in [true, false] {
                    let stepped = group_action_step(&towers[i], &node.curve, ell, positive, rng)?;
                    let sk = key(&stepped);
                    if sides[side].contains_key(&sk) {
                        continue;
                    }
                    let mut path = node.path.clone();
                    path.push((ell, positive));
                    sides[side].insert(
                        sk,
                        Node {
                            curve: stepped,
                            path,
                        },
                    );
                    next.push(sk);
                    if sides[1 - side].contains_key(&sk) {
                        frontiers[side] = next;
                        break 'outer sk;
                    }
                }
            }
        }
        frontiers[side] = next;
    };

    // Replay the combined path on the quaternion side. The target-side
    // path is traversed in reverse; each reversed step is the dual
    // isogeny, whose kernel is the other Frobenius eigenspace (λ ↦ −λ,
    // i.e. the opposite direction).
    let mut steps: Vec<(u64, bool)> = sides[0][&collision].path.clone();
    steps.extend(
        sides[1][&collision]
            .path
            .iter()
            .rev()
            .map(|&(ell, positive)| (ell, !positive)),
    );
    for (ell, positive) in steps {
        let lambda = step_eigenvalue(ctx.p, ell, positive);
        let (next, next_pi) = step_ideal(&ctx.alg, &j_ideal, &pi, ell, lambda)?;
        j_ideal = next;
        pi = next_pi;
    }
    Ok(j_ideal)
}

/// Moves `E₀` to the other 2-isogeny level; returns the moved curve, the
/// kernel ideal of the vertical isogeny and the Frobenius representative.
fn vertical_step<R: Rng>(
    ctx: &DeuringContext,
    t1: &Tower,
    rank_t: usize,
    rng: &mut R,
) -> Result<(Curve, Lattice, Quat), DeuringError> {
    for x0 in rational_two_torsion_x(t1, &ctx.e0) {
        let kernel = Point::Affine {
            x: t1.embed(x0),
            y: t1.zero(),
        };
        let phi = Isogeny::from_kernel_point(t1, &ctx.e0, &kernel, 2)?;
        let cod = phi.codomain;
        debug_assert!(cod.a.is_base() && cod.b.is_base());
        if rational_two_torsion_x(t1, &cod).len() != rank_t {
            continue;
        }
        let ideal = kernel_to_ideal(ctx, x0, Fp2El::ZERO, 2, rng)?;
        return Ok((cod, ideal, Quat::new(0, 0, 1, 0, 1)));
    }
    Err(DeuringError::SearchBudgetExceeded(
        "no vertical 2-isogeny reaches the target level",
    ))
}
