//! Maximal orders: maximalization of suborders, canonical type invariants,
//! and enumeration of all types by a 2-ideal walk with a mass-formula check.

use super::element::{Quat, QuatAlgebra};
use super::ideal::{equivalent_prime_ideal, ideals_of_norm_ell, right_order};
use super::lattice::Lattice;
use super::reduce::{lll_reduce, shortest_vectors, vectors_up_to};
use super::QuatError;
use crate::arith::Fp;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use std::collections::HashMap;

/// Canonical isomorphism invariant of a maximal order: the
/// lexicographically minimal Gram matrix of `trd(x·ȳ)` over reduced bases
/// of the trace-zero sublattice. Orders are conjugate in `B^×` exactly when
/// their invariants agree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderType(pub [[i128; 3]; 3]);

/// Basis of the trace-zero sublattice `O⁰ = {x ∈ O : trd(x) = 0}`.
fn trace_zero_basis(alg: &QuatAlgebra, order: &Lattice) -> [Quat; 3] {
    let b = order.basis();
    // Kernel of c ↦ Σ cᵢ·t-coord(bᵢ) over ℤ, by Euclidean reduction of the
    // coefficient vector with a tracked unimodular transform.
    let mut v: [i128; 4] = [0; 4];
    for (i, q) in b.iter().enumerate() {
        v[i] = q.t; // common denominator cancels in the kernel condition
    }
    let mut u = [[0i128; 4]; 4];
    for (i, row) in u.iter_mut().enumerate() {
        row[i] = 1;
    }
    loop {
        // Find the two smallest nonzero |v| entries and reduce.
        let mut idx: Vec<usize> = (0..4).filter(|&i| v[i] != 0).collect();
        idx.sort_by_key(|&i| v[i].abs());
        if idx.len() <= 1 {
            break;
        }
        let (a, bidx) = (idx[0], idx[1]);
        let f = v[bidx] / v[a];
        v[bidx] -= f * v[a];
        for c in 0..4 {
            u[bidx][c] -= f * u[a][c];
        }
    }
    let kernel_rows: Vec<usize> = (0..4).filter(|&i| v[i] == 0).collect();
    assert_eq!(kernel_rows.len(), 3, "trace form has rank 1 on an order");
    let mut out = Vec::with_capacity(3);
    for &r in &kernel_rows {
        let mut acc = Quat::zero();
        for (c, q) in b.iter().enumerate() {
            if u[r][c] != 0 {
                acc = alg.add(&acc, &q.scaled(u[r][c], 1));
            }
        }
        out.push(acc);
    }
    [out[0], out[1], out[2]]
}

/// The canonical type invariant of a maximal order.
pub fn order_type(alg: &QuatAlgebra, order: &Lattice) -> OrderType {
    let mut basis = trace_zero_basis(alg, order).to_vec();
    lll_reduce(alg, &mut basis);
    let bound = basis
        .iter()
        .map(|v| alg.nrd(v))
        .max()
        .expect("three basis vectors");
    let all = vectors_up_to(alg, &basis, &bound);
    // The candidate set must be a lattice invariant, so cut it at the third
    // successive minimum (greedy independent picks achieve the minima in
    // rank 3) rather than at the basis-dependent LLL bound.
    let mut sorted: Vec<&Quat> = all.iter().collect();
    sorted.sort_by_key(|v| alg.nrd(v));
    let mut picks: Vec<[i128; 3]> = Vec::new();
    let mut lambda3 = bound.clone();
    for v in &sorted {
        let c = coords_in_basis(alg, &basis, v);
        let independent = match picks.len() {
            0 => true,
            1 => !cross_zero(&picks[0], &c),
            _ => det3(&picks[0], &picks[1], &c) != 0,
        };
        if independent {
            picks.push(c);
            if picks.len() == 3 {
                lambda3 = alg.nrd(v);
                break;
            }
        }
    }
    let cands: Vec<Quat> = all
        .into_iter()
        .filter(|v| alg.nrd(v) <= lambda3)
        .collect();
    // Integer coordinates of each candidate in the reduced basis, for the
    // unimodularity test.
    let coords: Vec<[i128; 3]> = cands
        .iter()
        .map(|v| coords_in_basis(alg, &basis, v))
        .collect();
    let inner_i = |a: &Quat, b: &Quat| -> i128 {
        let r = alg.inner(a, b);
        assert!(r.is_integer());
        r.to_integer().to_i128().expect("Gram entry fits i128")
    };
    let nrds: Vec<BigRational> = cands.iter().map(|v| alg.nrd(v)).collect();
    let mut best: Option<[[i128; 3]; 3]> = None;
    for (i1, v1) in cands.iter().enumerate() {
        for (i2, v2) in cands.iter().enumerate() {
            if i2 == i1 || nrds[i2] < nrds[i1] {
                continue;
            }
            for (i3, v3) in cands.iter().enumerate() {
                if i3 == i1 || i3 == i2 || nrds[i3] < nrds[i2] {
                    continue;
                }
                let det = det3(&coords[i1], &coords[i2], &coords[i3]);
                if det != 1 && det != -1 {
                    continue;
                }
                let (g11, g22, g33) = (inner_i(v1, v1), inner_i(v2, v2), inner_i(v3, v3));
                let (g12, g13, g23) = (inner_i(v1, v2), inner_i(v1, v3), inner_i(v2, v3));
                for (s2, s3) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    let m = [
                        [g11, s2 * g12, s3 * g13],
                        [s2 * g12, g22, s2 * s3 * g23],
                        [s3 * g13, s2 * s3 * g23, g33],
                    ];
                    if best.as_ref().map(|b| m < *b).unwrap_or(true) {
                        best = Some(m);
                    }
                }
            }
        }
    }
    OrderType(best.expect("reduced basis always qualifies"))
}

fn coords_in_basis(alg: &QuatAlgebra, basis: &[Quat], v: &Quat) -> [i128; 3] {
    // Solve the 3-dim linear system via the Gram matrix (exact rationals).
    let g: Vec<Vec<BigRational>> = (0..3)
        .map(|r| (0..3).map(|c| alg.inner(&basis[r], &basis[c])).collect())
        .collect();
    let rhs: Vec<BigRational> = (0..3).map(|r| alg.inner(&basis[r], v)).collect();
    let sol = solve3(&g, &rhs);
    let mut out = [0i128; 3];
    for (i, s) in sol.iter().enumerate() {
        assert!(s.is_integer(), "candidate must lie in the sublattice");
        out[i] = s.to_integer().to_i128().expect("coordinate fits i128");
    }
    out
}

fn solve3(g: &[Vec<BigRational>], rhs: &[BigRational]) -> [BigRational; 3] {
    // Cramer's rule.
    let det = |m: &[Vec<BigRational>]| -> BigRational {
        &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
            - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
            + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
    };
    let d = det(&g.to_vec());
    let mut out = [
        BigRational::zero(),
        BigRational::zero(),
        BigRational::zero(),
    ];
    for col in 0..3 {
        let mut m = g.to_vec();
        for r in 0..3 {
            m[r][col] = rhs[r].clone();
        }
        out[col] = det(&m) / &d;
    }
    out
}

/// Whether two integer vectors are collinear (zero cross product).
fn cross_zero(a: &[i128; 3], b: &[i128; 3]) -> bool {
    a[1] * b[2] == a[2] * b[1] && a[2] * b[0] == a[0] * b[2] && a[0] * b[1] == a[1] * b[0]
}

fn det3(a: &[i128; 3], b: &[i128; 3], c: &[i128; 3]) -> i128 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// All maximal orders containing the given order, by repeatedly adjoining
/// index-`r` superorder generators for primes `r` dividing
/// `discrd(O)/p`.
pub fn maximal_orders_above(
    alg: &QuatAlgebra,
    start: &Lattice,
) -> Result<Vec<Lattice>, QuatError> {
    assert!(start.is_order(alg), "input must be an order");
    let p_big = BigInt::from(alg.p);
    let mut work = vec![*start];
    let mut seen = vec![*start];
    let mut maximal = Vec::new();
    while let Some(o) = work.pop() {
        let disc = o.reduced_discriminant(alg);
        if disc == p_big {
            if !maximal.contains(&o) {
                maximal.push(o);
            }
            continue;
        }
        let excess = (&disc / &p_big).to_i128().expect("discriminant quotient");
        assert_eq!(BigInt::from(excess) * &p_big, disc, "p must divide discrd");
        let mut found_super = false;
        for r in prime_factors(excess) {
            for sup in superorders_of_index(alg, &o, r) {
                found_super = true;
                if !seen.contains(&sup) {
                    seen.push(sup);
                    work.push(sup);
                }
            }
        }
        if !found_super {
            return Err(QuatError::UnsupportedPrime { q: alg.q, p: alg.p });
        }
    }
    if maximal.is_empty() {
        return Err(QuatError::UnsupportedPrime { q: alg.q, p: alg.p });
    }
    Ok(maximal)
}

fn prime_factors(mut n: i128) -> Vec<i128> {
    let mut out = vec![];
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Superorders `O' ⊃ O` with `[O' : O] = r`, each generated over `O` by one
/// element `x = v/r` with `v ∈ O`, `v` nonzero mod `rO`, and `trd(x)`,
/// `nrd(x)` integral.
fn superorders_of_index(alg: &QuatAlgebra, o: &Lattice, r: i128) -> Vec<Lattice> {
    let b = o.basis();
    let mut out: Vec<Lattice> = Vec::new();
    let try_candidate = |c: [i128; 4], out: &mut Vec<Lattice>| {
        // v = Σ cᵢbᵢ, x = v/r.
        let mut v = Quat::zero();
        for (q, ci) in b.iter().zip(c) {
            v = alg.add(&v, &q.scaled(ci, 1));
        }
        if v.is_zero() {
            return;
        }
        let x = v.scaled(1, r);
        if !alg.trd(&x).is_integer() || !alg.nrd(&x).is_integer() {
            return;
        }
        let mut gens = b.to_vec();
        gens.push(x);
        let sup = Lattice::from_generators(&gens).expect("superorder candidate full");
        if sup == *o || out.contains(&sup) {
            return;
        }
        if sup.is_order(alg) {
            out.push(sup);
        }
    };
    if r <= 3 {
        for c0 in 0..r {
            for c1 in 0..r {
                for c2 in 0..r {
                    for c3 in 0..r {
                        try_candidate([c0, c1, c2, c3], &mut out);
                    }
                }
            }
        }
        return out;
    }
    // For odd r: solve nrd(Σ cᵢbᵢ) ≡ 0 (mod r) as a quadratic in c₀ for each
    // (c₁, c₂, c₃); exact integrality is still rechecked per candidate.
    let fr = Fp::new(r as u64);
    let den = o.den;
    let qf = |w: [i128; 4]| -> i128 {
        w[0] * w[0] + alg.q * w[1] * w[1] + alg.p * w[2] * w[2] + alg.q * alg.p * w[3] * w[3]
    };
    let row_combo = |c: [i128; 4]| -> [i128; 4] {
        let mut w = [0i128; 4];
        for (i, ci) in c.iter().enumerate() {
            for (col, wc) in w.iter_mut().enumerate() {
                *wc += ci * o.rows[i][col];
            }
        }
        w
    };
    let _ = den;
    for c1 in 0..r {
        for c2 in 0..r {
            for c3 in 0..r {
                // Quadratic in c0 fitted from three exact evaluations.
                let f = |c0: i128| qf(row_combo([c0, c1, c2, c3]));
                let (f0, f1, f2) = (f(0), f(1), f(2));
                let a2 = (f2 - 2 * f1 + f0) / 2;
                let a1 = f1 - f0 - a2;
                let reduce = |v: i128| v.rem_euclid(r) as u64;
                for c0 in
                    super::ideal::solve_quadratic_mod(&fr, reduce(a2), reduce(a1), reduce(f0))
                {
                    try_candidate([c0 as i128, c1, c2, c3], &mut out);
                }
            }
        }
    }
    out
}

/// A maximal-order type discovered by the 2-ideal walk.
#[derive(Clone, Debug)]
pub struct TypeEntry {
    /// Canonical invariant.
    pub ty: OrderType,
    /// A representative maximal order of this type.
    pub order: Lattice,
    /// An integral left `O₀`-ideal of odd prime norm whose right order is
    /// `order` (for the base type: the unit ideal `O₀`).
    pub witness: Lattice,
    /// Whether the order contains a trace-zero element of norm `p` (a
    /// Frobenius): exactly the types whose ideal class is Galois-fixed.
    /// Types without one account for two ideal classes each.
    pub galois_stable: bool,
}

/// Whether the trace-zero part of the order represents `p`.
fn has_frobenius(alg: &QuatAlgebra, order: &Lattice) -> bool {
    let mut basis = trace_zero_basis(alg, order).to_vec();
    lll_reduce(alg, &mut basis);
    let bound = BigRational::from(BigInt::from(alg.p));
    vectors_up_to(alg, &basis, &bound)
        .iter()
        .any(|v| alg.nrd(v) == bound)
}

/// Enumerates every maximal-order type of the algebra by walking the
/// 2-ideal graph from `o0`, keeping one reduced witness ideal per type and
/// verifying the Eichler mass formula `Σ 1/|Oᵢ^×| = (p−1)/24` at the end.
pub fn enumerate_maximal_order_types<R: Rng>(
    alg: &QuatAlgebra,
    o0: &Lattice,
    rng: &mut R,
) -> Result<Vec<TypeEntry>, QuatError> {
    let mut types: HashMap<OrderType, usize> = HashMap::new();
    let mut entries: Vec<TypeEntry> = Vec::new();
    let root = TypeEntry {
        ty: order_type(alg, o0),
        order: *o0,
        witness: *o0,
        galois_stable: has_frobenius(alg, o0),
    };
    types.insert(root.ty.clone(), 0);
    entries.push(root);
    let mut frontier = vec![0usize];
    while let Some(idx) = frontier.pop() {
        let (order, witness) = (entries[idx].order, entries[idx].witness);
        let steps = ideals_of_norm_ell(alg, &order, 2, rng)?;
        for j in steps {
            let next_order = right_order(alg, &j);
            let ty = order_type(alg, &next_order);
            if types.contains_key(&ty) {
                continue;
            }
            // Compose the witness with the step and reduce its norm.
            let composed = witness.product(alg, &j);
            let composed = composed.scaled(composed.den, 1);
            let (reduced, _beta) = equivalent_prime_ideal(alg, &composed, &[2])
                .unwrap_or((composed, Quat::one()));
            let next = right_order(alg, &reduced);
            let entry = TypeEntry {
                ty: ty.clone(),
                galois_stable: has_frobenius(alg, &next),
                order: next,
                witness: reduced,
            };
            debug_assert_eq!(order_type(alg, &entry.order), ty);
            types.insert(ty, entries.len());
            frontier.push(entries.len());
            entries.push(entry);
        }
    }
    // Mass formula check: the sum runs over ideal classes, and a type
    // whose class is not Galois-fixed accounts for two of them.
    let mut mass = BigRational::zero();
    for e in &entries {
        let units = 2 * shortest_vectors(alg, &e.order.basis()).len();
        let classes = if e.galois_stable { 1 } else { 2 };
        mass += BigRational::new(BigInt::from(classes), BigInt::from(units));
    }
    let expect = BigRational::new(BigInt::from(alg.p - 1), BigInt::from(24));
    if mass != expect {
        return Err(QuatError::SearchExhausted(
            "type enumeration failed the mass formula check",
        ));
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    #[test]
    fn maximalize_standard_suborder() {
        // p ≡ 3 (mod 4), q = 1: ℤ⟨1,i,j,k⟩ sits inside the maximal order
        // ⟨1, i, (i+j)/2, (1+k)/2⟩.
        let alg = QuatAlgebra::new(1, 103);
        let start = Lattice::standard();
        let maxes = maximal_orders_above(&alg, &start).unwrap();
        assert!(!maxes.is_empty());
        let known = Lattice::from_generators(&[
            Quat::one(),
            Quat::new(0, 1, 0, 0, 1),
            Quat::new(0, 1, 1, 0, 2),
            Quat::new(1, 0, 0, 1, 2),
        ])
        .unwrap();
        assert!(maxes.contains(&known));
        for m in &maxes {
            assert!(m.is_order(&alg));
            assert_eq!(m.reduced_discriminant(&alg), BigInt::from(103));
        }
    }

    #[test]
    fn maximalize_q7() {
        // q = 7, p = 13 (the CM discriminant −7 case).
        let alg = QuatAlgebra::new(7, 13);
        let maxes = maximal_orders_above(&alg, &Lattice::standard()).unwrap();
        for m in &maxes {
            assert_eq!(m.reduced_discriminant(&alg), BigInt::from(13));
        }
    }

    #[test]
    fn order_type_invariance_under_conjugation() {
        let alg = QuatAlgebra::new(1, 1019);
        let o0 = Lattice::from_generators(&[
            Quat::one(),
            Quat::new(0, 1, 0, 0, 1),
            Quat::new(0, 1, 1, 0, 2),
            Quat::new(1, 0, 0, 1, 2),
        ])
        .unwrap();
        // Conjugate by a random unit-denominator element: γ O γ⁻¹ is again
        // maximal with the same type.
        let gamma = Quat::new(1, 2, 0, 1, 1);
        let n = alg.nrd(&gamma).to_integer().to_i128().unwrap();
        let gens: Vec<Quat> = o0
            .basis()
            .iter()
            .map(|b| {
                alg.mul(&alg.mul(&gamma, b), &alg.conj(&gamma)).scaled(1, n)
            })
            .collect();
        let conj = Lattice::from_generators(&gens).unwrap();
        assert!(conj.is_order(&alg));
        assert_eq!(order_type(&alg, &o0), order_type(&alg, &conj));
    }

    #[test]
    fn type_enumeration_small_primes() {
        // Known type numbers: p = 103 ≡ 7 (mod 12) → h = ⌊103/12⌋ + 1 = 9
        // ideal classes; types pair Galois-conjugate classes.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let alg = QuatAlgebra::new(1, 103);
        let o0 = Lattice::from_generators(&[
            Quat::one(),
            Quat::new(0, 1, 0, 0, 1),
            Quat::new(0, 1, 1, 0, 2),
            Quat::new(1, 0, 0, 1, 2),
        ])
        .unwrap();
        let entries = enumerate_maximal_order_types(&alg, &o0, &mut rng).unwrap();
        // The mass check inside already passed. Of the 9 classes, 5 are
        // Galois-fixed (the class number of disc −103) and the other 4 pair
        // up, giving 7 types.
        assert_eq!(entries.len(), 7);
        assert_eq!(entries.iter().filter(|e| e.galois_stable).count(), 5);
        for e in &entries {
            assert!(e.order.is_order(&alg));
            assert_eq!(super::right_order(&alg, &e.witness), e.order);
        }
    }
}
