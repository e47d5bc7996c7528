//! Ideal kernels: converting between left `𝒪₀`-ideals and isogeny kernels
//! on the starting curve.
//!
//! An integral left ideal `J` of powersmooth norm `∏ ℓᵉ` determines the
//! subgroup `E₀[J] = {P : α(P) = 0 ∀α ∈ J}`, of order `n(J)`. Its ℓ-part
//! is computed inside `E₀[ℓᵉ]` by expressing each ideal generator as a
//! 2×2 matrix (via Weil-pairing discrete logarithms on a torsion basis)
//! and intersecting the matrix kernels. The resulting kernel points are
//! all found on `E₀` first, pushed through the partial isogeny chain, and
//! consumed one prime degree at a time.

use rand::Rng;

use crate::arith::{Ext, Fp2El, Tower};
use crate::ec::{dlog_in_mu, weil_pairing, Curve, EcError, Isogeny, Point};
use crate::quat::{Lattice, Quat};

use super::starting::{lattice_norm_u64, minus_p_order};
use super::{DeuringContext, DeuringError};

/// Discrete logarithm of `e(first, second)` in base `ζ`, retrying with
/// `first + c·shift` when a Miller evaluation degenerates; `w` is the known
/// exponent with `e(shift, second) = ζ^w`.
fn pair_dlog(
    t: &Tower,
    e: &Curve,
    first: &Point,
    second: &Point,
    shift: &Point,
    w: u64,
    zeta: &Ext,
    m: u64,
) -> Result<u64, DeuringError> {
    let mut cur = first.clone();
    for c in 0..4u64 {
        match weil_pairing(t, e, &cur, second, m) {
            Ok(v) => {
                let d = dlog_in_mu(t, zeta, &v, m)?;
                // e(first + c·shift, second) = ζ^{d}, so subtract c·w.
                return Ok((d + m - c * w % m) % m);
            }
            Err(EcError::PairingDegenerate) => {
                cur = e.add(t, &cur, shift);
            }
            Err(err) => return Err(err.into()),
        }
    }
    Err(DeuringError::SearchBudgetExceeded(
        "Weil pairing kept degenerating",
    ))
}

/// Coordinates of `p` with respect to the `m`-torsion basis `(r, s)` with
/// pairing `ζ = e(r, s)`.
pub(crate) fn coords_in_basis(
    t: &Tower,
    e: &Curve,
    p: &Point,
    r: &Point,
    s: &Point,
    zeta: &Ext,
    m: u64,
) -> Result<(u64, u64), DeuringError> {
    // p = a·r + b·s gives e(p, s) = ζ^a and e(p, r) = ζ^{−b}.
    let a = pair_dlog(t, e, p, s, r, 1, zeta, m)?;
    let minus_b = pair_dlog(t, e, p, r, s, m - 1, zeta, m)?;
    Ok((a, (m - minus_b) % m))
}

/// v_ℓ of a positive integer, together with the cofactor.
fn split_valuation(mut d: u64, ell: u64) -> (u32, u64) {
    let mut v = 0u32;
    while d % ell == 0 {
        d /= ell;
        v += 1;
    }
    (v, d)
}

fn inv_mod(a: u64, m: u64) -> u64 {
    // Extended Euclid; gcd(a, m) = 1.
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let qt = r0 / r1;
        (r0, r1) = (r1, r0 - qt * r1);
        (s0, s1) = (s1, s0 - qt * s1);
    }
    debug_assert_eq!(r0, 1);
    (s0.rem_euclid(m as i128)) as u64
}

/// The kernel ideal `{α ∈ 𝒪₀ : α(P) = 0}` of a point `P ∈ E₀[m]` of prime
/// order `m` with coordinates in `F_{p²}`, given as affine coordinates.
///
/// Retries with a fresh torsion basis when a Weil-pairing line degenerates;
/// at tiny torsion levels every shift of a fixed basis can hit a pole.
pub fn kernel_to_ideal<R: Rng>(
    ctx: &DeuringContext,
    px: Fp2El,
    py: Fp2El,
    m: u64,
    rng: &mut R,
) -> Result<Lattice, DeuringError> {
    let mut last = None;
    for _ in 0..6 {
        match kernel_to_ideal_once(ctx, px, py, m, rng) {
            Err(DeuringError::Ec(EcError::PairingDegenerate))
            | Err(DeuringError::SearchBudgetExceeded(_)) => {
                last = Some(DeuringError::SearchBudgetExceeded(
                    "kernel ideal retries exhausted",
                ));
            }
            other => return other,
        }
    }
    Err(last.unwrap())
}

fn kernel_to_ideal_once<R: Rng>(
    ctx: &DeuringContext,
    px: Fp2El,
    py: Fp2El,
    m: u64,
    rng: &mut R,
) -> Result<Lattice, DeuringError> {
    let basis = ctx.order0.basis();
    let vmax = basis
        .iter()
        .map(|w| split_valuation(w.d as u64, m).0)
        .max()
        .unwrap();
    let big = m.pow(1 + vmax);
    let k = minus_p_order(ctx.p, big).ok_or(DeuringError::NotSupersingular(px.c0))?;
    let t = ctx.tower(k);
    let (r, s) = ctx.e0.torsion_basis(&t, big, rng)?;
    let zeta = weil_pairing(&t, &ctx.e0, &r, &s, big)?;
    let pt = Point::Affine {
        x: t.embed(px),
        y: t.embed(py),
    };
    debug_assert!(ctx.e0.is_on_curve(&t, &pt));
    debug_assert!(ctx.e0.mul_u64(&t, &pt, m).is_infinity());
    let (a, b) = coords_in_basis(&t, &ctx.e0, &pt, &r, &s, &zeta, big)?;
    let shrink = big / m;
    debug_assert!(a % shrink == 0 && b % shrink == 0);
    // P″ with m^vmax·P″ = P, used to evaluate denominators exactly.
    let pp = ctx.e0.add(
        &t,
        &ctx.e0.mul_u64(&t, &r, a / shrink),
        &ctx.e0.mul_u64(&t, &s, b / shrink),
    );
    // Row i: the E[m]-coordinates of (basis_i)(P).
    let mut rows = [[0u64; 2]; 4];
    for (i, w) in basis.iter().enumerate() {
        let (v_i, d_i) = split_valuation(w.d as u64, m);
        // Evaluate the numerator on m^{vmax−v_i}·P″; the image already has
        // order dividing m (it is m^{v_i}·d'·wᵢ(arg)), so its coordinates
        // are divisible by big/m regardless of v_i.
        let arg = ctx.e0.mul_u64(&t, &pp, m.pow(vmax - v_i));
        let img = ctx.eval_quat(&t, &[w.t, w.x, w.y, w.z], &arg);
        let (u, v) = coords_in_basis(&t, &ctx.e0, &img, &r, &s, &zeta, big)?;
        let unit = big / m;
        debug_assert!(u % unit == 0 && v % unit == 0);
        let dinv = inv_mod(d_i % m, m);
        rows[i][0] = (u / unit) % m * dinv % m;
        rows[i][1] = (v / unit) % m * dinv % m;
    }
    // Solve Σ cᵢ·rows[i] ≡ 0 (mod m) by Gaussian elimination on the
    // transposed 2×4 system; collect a basis of the solution space.
    let sols = nullspace_mod(&rows, m);
    let mut gens = Vec::new();
    for c in &sols {
        let mut acc = Quat::zero();
        for i in 0..4 {
            acc = ctx.alg.add(&acc, &basis[i].scaled(c[i] as i128, 1));
        }
        gens.push(acc);
    }
    for w in &basis {
        gens.push(w.scaled(m as i128, 1));
    }
    let ideal = Lattice::from_generators(&gens)?;
    debug_assert_eq!(lattice_norm_u64(&ctx.alg, &ideal), m);
    Ok(ideal)
}

/// A basis of `{c ∈ (ℤ/m)⁴ : Σ cᵢ rowsᵢ ≡ 0}` for prime `m`.
fn nullspace_mod(rows: &[[u64; 2]; 4], m: u64) -> Vec<[u64; 4]> {
    // Two equations in four unknowns: eliminate in the 2×4 matrix whose
    // columns are the rows' entries.
    let mut mat = [[0u64; 4]; 2];
    for i in 0..4 {
        mat[0][i] = rows[i][0] % m;
        mat[1][i] = rows[i][1] % m;
    }
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for col in 0..4 {
        let mut piv = None;
        for row in rank..2 {
            if mat[row][col] % m != 0 {
                piv = Some(row);
                break;
            }
        }
        let Some(pr) = piv else { continue };
        mat.swap(rank, pr);
        let inv = inv_mod(mat[rank][col], m);
        for j in 0..4 {
            mat[rank][j] = mat[rank][j] * inv % m;
        }
        for row in 0..2 {
            if row != rank && mat[row][col] != 0 {
                let f = mat[row][col];
                for j in 0..4 {
                    mat[row][j] = (mat[row][j] + (m - f) * mat[rank][j]) % m;
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == 2 {
            break;
        }
    }
    let mut out = Vec::new();
    for free in 0..4 {
        if pivots.contains(&free) {
            continue;
        }
        let mut c = [0u64; 4];
        c[free] = 1;
        for (r, &pc) in pivots.iter().enumerate() {
            c[pc] = (m - mat[r][free] % m) % m;
        }
        out.push(c);
    }
    out
}

/// Translates an integral left `𝒪₀`-ideal of powersmooth norm `∏ ℓᵉ`
/// (given with its norm factorization) into the j-invariant of the
/// codomain of the isogeny `E₀ → E₀/E₀[J]`.
pub fn ideal_to_j<R: Rng>(
    ctx: &DeuringContext,
    ideal: &Lattice,
    factors: &[(u64, u32)],
    rng: &mut R,
) -> Result<Fp2El, DeuringError> {
    let norm = factors.iter().fold(num_bigint::BigInt::from(1), |acc, &(l, e)| {
        acc * num_bigint::BigInt::from(l.pow(e))
    });
    debug_assert_eq!(ideal.norm(&ctx.alg).to_integer(), norm);
    if factors.is_empty() {
        return Ok(ctx.j0);
    }
    // Phase 1: compute every prime-power kernel point on E₀.
    let mut kernels: Vec<(u64, u32, std::sync::Arc<Tower>, Point)> = Vec::new();
    for &(ell, e) in factors {
        let (t, k) = ideal_kernel_point(ctx, ideal, ell, e, rng)?;
        kernels.push((ell, e, t, k));
    }
    // Phase 2: push each kernel through the chain built so far and split
    // it into degree-ℓ steps.
    let mut cur = ctx.e0;
    let mut chain: Vec<Isogeny> = Vec::new();
    for (ell, e, t, mut k) in kernels {
        for phi in &chain {
            k = phi.eval(&t, &k);
        }
        debug_assert_eq!(cur.order_dividing(&t, &k, ell.pow(e)), ell.pow(e));
        for step in (1..=e).rev() {
            let small = cur.mul_u64(&t, &k, ell.pow(step - 1));
            let phi = Isogeny::from_kernel_point(&t, &cur, &small, ell)?;
            k = phi.eval(&t, &k);
            cur = phi.codomain;
            chain.push(phi);
        }
    }
    Ok(cur.j_invariant(&ctx.f2))
}

/// The generator of the `ℓᵉ`-part of `E₀[J]`, together with the tower it
/// lives on; resamples the torsion basis when a pairing degenerates.
fn ideal_kernel_point<R: Rng>(
    ctx: &DeuringContext,
    ideal: &Lattice,
    ell: u64,
    e: u32,
    rng: &mut R,
) -> Result<(std::sync::Arc<Tower>, Point), DeuringError> {
    let mut last = None;
    for _ in 0..6 {
        match ideal_kernel_point_once(ctx, ideal, ell, e, rng) {
            Err(DeuringError::Ec(EcError::PairingDegenerate)) => {
                last = Some(DeuringError::SearchBudgetExceeded(
                    "ideal kernel retries exhausted",
                ));
            }
            other => return other,
        }
    }
    Err(last.unwrap())
}

fn ideal_kernel_point_once<R: Rng>(
    ctx: &DeuringContext,
    ideal: &Lattice,
    ell: u64,
    e: u32,
    rng: &mut R,
) -> Result<(std::sync::Arc<Tower>, Point), DeuringError> {
    let basis = ideal.basis();
    let me = ell.pow(e);
    let vmax = basis
        .iter()
        .map(|w| split_valuation(w.d as u64, ell).0)
        .max()
        .unwrap();
    let big = me
        .checked_mul(ell.pow(vmax))
        .expect("torsion level fits u64");
    let k = minus_p_order(ctx.p, big).ok_or(DeuringError::SearchBudgetExceeded(
        "torsion level shares a factor with p",
    ))?;
    if k > 192 {
        return Err(DeuringError::SearchBudgetExceeded(
            "torsion tower degree is impractically large",
        ));
    }
    let t = ctx.tower(k);
    let (r, s) = ctx.e0.torsion_basis(&t, big, rng)?;
    let zeta = weil_pairing(&t, &ctx.e0, &r, &s, big)?;
    // Matrix of each generator on E[ℓᵉ] with respect to (ℓ^vmax·r, ℓ^vmax·s).
    let mut mats: Vec<[[u64; 2]; 2]> = Vec::new();
    for w in &basis {
        let (v_i, d_i) = split_valuation(w.d as u64, ell);
        let coords = [w.t, w.x, w.y, w.z];
        let mut mat = [[0u64; 2]; 2];
        for (col, gen) in [&r, &s].into_iter().enumerate() {
            let img = ctx.eval_quat(&t, &coords, gen);
            let (u, v) = coords_in_basis(&t, &ctx.e0, &img, &r, &s, &zeta, big)?;
            // Reduce to E[ℓ^{e+v_i}] and divide the matrix by ℓ^{v_i}.
            let sub = ell.pow(e + v_i);
            let lv = ell.pow(v_i);
            debug_assert!(u % sub % lv == 0 && v % sub % lv == 0);
            let dinv = inv_mod(d_i % me, me);
            mat[0][col] = (u % sub / lv) % me * dinv % me;
            mat[1][col] = (v % sub / lv) % me * dinv % me;
        }
        mats.push(mat);
    }
    // Brute-force the joint kernel of the four matrices in (ℤ/ℓᵉ)². It
    // must be cyclic of order ℓᵉ; a solution with a unit coordinate
    // generates it.
    let sol_order = |a: u64, b: u64| -> u64 {
        if a == 0 && b == 0 {
            1
        } else {
            me / gcd_u64(gcd_u64(a, b), me)
        }
    };
    let mut best: Option<(u64, u64)> = None;
    let mut count = 0u64;
    for a in 0..me {
        for b in 0..me {
            let ok = mats.iter().all(|mt| {
                (mt[0][0] as u128 * a as u128 + mt[0][1] as u128 * b as u128) % me as u128 == 0
                    && (mt[1][0] as u128 * a as u128 + mt[1][1] as u128 * b as u128)
                        % me as u128
                        == 0
            });
            if !ok {
                continue;
            }
            count += 1;
            if best.map_or(true, |(ba, bb)| sol_order(a, b) > sol_order(ba, bb)) {
                best = Some((a, b));
            }
        }
    }
    let best_ok = best.map_or(false, |(a, b)| sol_order(a, b) == me);
    if count != me || !best_ok {
        return Err(DeuringError::SearchBudgetExceeded(
            "ideal kernel is not cyclic of the expected order",
        ));
    }
    let (a, b) = best.unwrap();
    let lv = ell.pow(vmax);
    let r1 = ctx.e0.mul_u64(&t, &r, lv);
    let s1 = ctx.e0.mul_u64(&t, &s, lv);
    let kgen = ctx.e0.add(
        &t,
        &ctx.e0.mul_u64(&t, &r1, a),
        &ctx.e0.mul_u64(&t, &s1, b),
    );
    debug_assert_eq!(ctx.e0.order_dividing(&t, &kgen, me), me);
    Ok((t, kgen))
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}
