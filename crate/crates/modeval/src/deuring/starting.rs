//! Starting curves with explicitly known endomorphism rings.
//!
//! For every prime `p > 3` at least one curve with complex multiplication
//! by a class-number-one order has supersingular reduction `E₀/F_p`. Its
//! endomorphism ring contains Frobenius `π` (with `π² = [−p]`) and the
//! reduction `ι` of the CM endomorphism `√−q` (with `ι² = [−q]` and
//! `ιπ = −πι`), so `1, ι, π, ιπ` span a suborder of `End(E₀)` realising
//! the quaternion algebra `(−q, −p | ℚ)`. The full endomorphism ring is
//! the unique maximal order above that suborder all of whose elements act
//! integrally on torsion points.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_traits::ToPrimitive;
use rand::Rng;

use crate::arith::{Fp2, Fp2El, Tower};
use crate::ec::{isomorphism_scaling, Curve, Isogeny, Point};
use crate::quat::{maximal_orders_above, Lattice, QuatAlgebra};
use crate::sieve::is_prime_u64;

use super::DeuringError;

/// Class-number-one CM discriminants with the j-invariant of a curve whose
/// endomorphism ring is the maximal order of `ℚ(√D)`.
const CM_TABLE: &[(i64, i128)] = &[
    (-3, 0),
    (-4, 1728),
    (-7, -3375),
    (-8, 8000),
    (-11, -32768),
    (-19, -884736),
    (-43, -884736000),
    (-67, -147_197_952_000),
    (-163, -262_537_412_640_768_000),
];

/// The CM endomorphism `ι` with `ι² = [−q]` on the starting curve.
#[derive(Clone, Debug)]
pub enum CmEndo {
    /// `q = 1`: the automorphism `(x, y) ↦ (−x, √−1·y)` on `y² = x³ + ax`.
    Auto {
        /// A square root of −1 in `F_{p²}`.
        i_unit: Fp2El,
    },
    /// `q > 1`: a degree-`q` isogeny `E₀ → E` with `j(E) = j(E₀)`,
    /// composed with the isomorphism `(x, y) ↦ (u²x, u³y)` back to `E₀`.
    Endo {
        /// The degree-`q` isogeny out of `E₀`.
        phi: Isogeny,
        /// `u²` of the isomorphism from `phi.codomain` to `E₀`.
        u2: Fp2El,
        /// `u³` of the isomorphism from `phi.codomain` to `E₀`.
        u3: Fp2El,
    },
}

impl CmEndo {
    /// Applies `ι` to a point of `E₀` over any tower.
    pub fn eval(&self, t: &Tower, p: &Point) -> Point {
        match self {
            CmEndo::Auto { i_unit } => match p {
                Point::Infinity => Point::Infinity,
                Point::Affine { x, y } => Point::Affine {
                    x: t.neg(x),
                    y: t.mul_fp2(y, *i_unit),
                },
            },
            CmEndo::Endo { phi, u2, u3 } => match phi.eval(t, p) {
                Point::Infinity => Point::Infinity,
                Point::Affine { x, y } => Point::Affine {
                    x: t.mul_fp2(&x, *u2),
                    y: t.mul_fp2(&y, *u3),
                },
            },
        }
    }
}

/// Multiplicative order of `−p` modulo `m` (the tower degree over which
/// `E[m]` becomes rational), or `None` when `gcd(m, p) ≠ 1`.
pub(crate) fn minus_p_order(p: u64, m: u64) -> Option<usize> {
    if m <= 1 {
        return Some(1);
    }
    if p % m == 0 || m % p == 0 {
        return None;
    }
    let m = m as u128;
    let r = (m - (p as u128) % m) % m;
    if r == 0 {
        return None;
    }
    let mut acc = 1u128;
    for k in 1..=(m as usize) {
        acc = acc * r % m;
        if acc == 1 {
            return Some(k);
        }
    }
    None
}

/// The anchor of the order ↔ curve dictionary at a prime `p`: a
/// supersingular curve `E₀/F_p`, the CM endomorphism `ι`, and the maximal
/// order `𝒪₀ ⊂ (−q, −p | ℚ)` matching `End(E₀)` under
/// `i ↦ ι, j ↦ π, k ↦ ιπ`.
pub struct DeuringContext {
    /// The base prime.
    pub p: u64,
    /// The CM discriminant used for the starting curve.
    pub disc: i64,
    /// The degree of `ι` (so `i² = −q` in the algebra).
    pub q: u64,
    /// The quaternion algebra `(−q, −p | ℚ)`.
    pub alg: QuatAlgebra,
    /// The starting curve, defined over `F_p`.
    pub e0: Curve,
    /// `j(E₀)`.
    pub j0: Fp2El,
    /// The CM endomorphism.
    pub iota: CmEndo,
    /// The maximal order isomorphic to `End(E₀)`.
    pub order0: Lattice,
    /// Arithmetic over `F_{p²}`.
    pub f2: Fp2,
    towers: Mutex<HashMap<usize, Arc<Tower>>>,
}

impl DeuringContext {
    /// Builds the dictionary anchor at `p`, trying CM discriminants in
    /// order of class number until one has supersingular reduction.
    pub fn new<R: Rng>(p: u64, rng: &mut R) -> Result<DeuringContext, DeuringError> {
        assert!(p > 3 && is_prime_u64(p), "p must be a prime > 3");
        let f2 = Fp2::new(p);
        let fp = f2.fp().clone();
        for &(disc, j_int) in CM_TABLE {
            let q = if disc % 2 == 0 {
                (-disc / 4) as u64
            } else {
                (-disc) as u64
            };
            if q == p {
                continue;
            }
            // Supersingular reduction needs D inert or ramified at p.
            let d_mod = fp.reduce_i128(disc as i128);
            if fp.legendre(d_mod) == 1 {
                continue;
            }
            let j0 = Fp2El::from_base(fp.reduce_i128(j_int));
            let ctx = DeuringContext::build(p, disc, q, j0, f2.clone(), rng)?;
            return Ok(ctx);
        }
        Err(DeuringError::StartingCurveUnavailable(p))
    }

    fn build<R: Rng>(
        p: u64,
        disc: i64,
        q: u64,
        j0: Fp2El,
        f2: Fp2,
        rng: &mut R,
    ) -> Result<DeuringContext, DeuringError> {
        let e0 = Curve::from_j(&f2, j0);
        debug_assert!(e0.a.is_base() && e0.b.is_base());
        let towers: Mutex<HashMap<usize, Arc<Tower>>> = Mutex::new(HashMap::new());
        let tower = |k: usize| -> Arc<Tower> {
            let mut map = towers.lock().unwrap();
            map.entry(k)
                .or_insert_with(|| Arc::new(Tower::build(p, k)))
                .clone()
        };
        let t1 = tower(1);
        debug_assert!(e0.has_minus_p_frobenius(&t1, rng));
        let iota = build_iota(&f2, &e0, j0, p, q, &tower, rng)?;

        // Identify 𝒪₀ = θ⁻¹(End(E₀)) among the maximal orders above
        // ℤ⟨1, i, j, k⟩: it is the unique one acting integrally on torsion.
        let alg = QuatAlgebra::new(q as i128, p as i128);
        let candidates = maximal_orders_above(&alg, &Lattice::standard())?;
        let mut order0 = None;
        'cand: for cand in &candidates {
            for w in cand.basis() {
                if w.d == 1 {
                    continue;
                }
                let mut d = w.d as u64;
                let mut r = 2u64;
                while d > 1 {
                    if r * r > d {
                        r = d;
                    }
                    if d % r != 0 {
                        r += 1;
                        continue;
                    }
                    let mut m = 1u64;
                    while d % r == 0 {
                        d /= r;
                        m *= r;
                    }
                    let k = minus_p_order(p, m)
                        .ok_or(DeuringError::StartingCurveUnavailable(p))?;
                    let t = tower(k);
                    let (bp, bq) = e0.torsion_basis(&t, m, rng)?;
                    let coords = [w.t, w.x, w.y, w.z];
                    let kills = eval_quat_raw(&t, &e0, &iota, &coords, &bp).is_infinity()
                        && eval_quat_raw(&t, &e0, &iota, &coords, &bq).is_infinity();
                    if !kills {
                        continue 'cand;
                    }
                }
            }
            order0 = Some(*cand);
            break;
        }
        let order0 = order0.ok_or(DeuringError::StartingCurveUnavailable(p))?;
        debug_assert!(order0.is_order(&alg));
        Ok(DeuringContext {
            p,
            disc,
            q,
            alg,
            e0,
            j0,
            iota,
            order0,
            f2,
            towers,
        })
    }

    /// The (cached) degree-`2k` extension tower of `F_p`.
    pub fn tower(&self, k: usize) -> Arc<Tower> {
        let mut map = self.towers.lock().unwrap();
        map.entry(k)
            .or_insert_with(|| Arc::new(Tower::build(self.p, k)))
            .clone()
    }

    /// Applies the integral quaternion `t + x·i + y·j + z·k` to a point of
    /// `E₀` through `i ↦ ι, j ↦ π, k ↦ ιπ`.
    pub fn eval_quat(&self, t: &Tower, coords: &[i128; 4], p: &Point) -> Point {
        eval_quat_raw(t, &self.e0, &self.iota, coords, p)
    }
}

/// `[c]P` for a signed integer scalar.
fn mul_signed(t: &Tower, e: &Curve, p: &Point, c: i128) -> Point {
    let n = num_bigint::BigUint::from(c.unsigned_abs());
    let q = e.mul_big(t, p, &n);
    if c < 0 {
        e.neg(t, &q)
    } else {
        q
    }
}

fn eval_quat_raw(
    t: &Tower,
    e0: &Curve,
    iota: &CmEndo,
    coords: &[i128; 4],
    p: &Point,
) -> Point {
    let pi_p = e0.frobenius_point(t, p, 1);
    let iota_p = iota.eval(t, p);
    let iota_pi_p = iota.eval(t, &pi_p);
    let mut acc = mul_signed(t, e0, p, coords[0]);
    acc = e0.add(t, &acc, &mul_signed(t, e0, &iota_p, coords[1]));
    acc = e0.add(t, &acc, &mul_signed(t, e0, &pi_p, coords[2]));
    e0.add(t, &acc, &mul_signed(t, e0, &iota_pi_p, coords[3]))
}

/// All isomorphism scalings `(u², u³)` from a curve to itself.
fn automorphism_scalings(f2: &Fp2, e: &Curve) -> Vec<(Fp2El, Fp2El)> {
    let one = Fp2El::ONE;
    let mut u2s = vec![one, f2.neg(one)];
    if e.a.is_zero() {
        // j = 0: u² runs over the cube roots of unity.
        if let Some(s) = f2.sqrt(f2.neg(Fp2El::from_base(3))) {
            let inv2 = f2.inv(Fp2El::from_base(2));
            let omega = f2.mul(f2.sub(s, one), inv2);
            u2s.push(omega);
            u2s.push(f2.square(omega));
        }
    }
    let mut out = Vec::new();
    for u2 in u2s {
        // A valid scaling needs a·u⁴ = a, b·u⁶ = b and (u³)² = (u²)³.
        if f2.mul(e.a, f2.square(u2)) != e.a {
            continue;
        }
        let u3s = f2.mul(u2, f2.square(u2));
        if let Some(u3) = f2.sqrt(u3s) {
            for cand in [u3, f2.neg(u3)] {
                if f2.mul(e.b, f2.square(cand)) == e.b {
                    out.push((u2, cand));
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Realises `ι` with `ι² = [−q]` and `ιπ = −πι` on `E₀`.
fn build_iota<R: Rng>(
    f2: &Fp2,
    e0: &Curve,
    j0: Fp2El,
    p: u64,
    q: u64,
    tower: &dyn Fn(usize) -> Arc<Tower>,
    rng: &mut R,
) -> Result<CmEndo, DeuringError> {
    let t1 = tower(1);
    if q == 1 {
        let i_unit = f2
            .sqrt(f2.neg(Fp2El::ONE))
            .expect("√−1 exists in F_{p²}");
        let iota = CmEndo::Auto { i_unit };
        debug_assert!(verify_iota(&t1, e0, &iota, q, rng));
        return Ok(iota);
    }
    // Search the q+1 order-q subgroups for the kernel of √−q: the quotient
    // is isomorphic to E₀ again, and composing with that isomorphism gives
    // a trace-zero endomorphism squaring to [−q].
    let k = minus_p_order(p, q).ok_or(DeuringError::StartingCurveUnavailable(p))?;
    let tq = tower(k);
    let (gp, gq) = e0.torsion_basis(&tq, q, rng)?;
    let mut gens = vec![gq.clone()];
    let mut acc = gp.clone();
    for _ in 0..q {
        gens.push(acc.clone());
        acc = e0.add(&tq, &acc, &gq);
    }
    for gen in &gens {
        let phi = match Isogeny::from_kernel_point(&tq, e0, gen, q) {
            Ok(phi) => phi,
            Err(_) => continue,
        };
        if phi.codomain.j_invariant(f2) != j0 {
            continue;
        }
        let (u20, u30) = match isomorphism_scaling(f2, &phi.codomain, e0) {
            Ok(u) => u,
            Err(_) => continue,
        };
        for (v2, v3) in automorphism_scalings(f2, e0) {
            let cand = CmEndo::Endo {
                phi: phi.clone(),
                u2: f2.mul(u20, v2),
                u3: f2.mul(u30, v3),
            };
            if verify_iota(&t1, e0, &cand, q, rng) {
                return Ok(cand);
            }
        }
    }
    Err(DeuringError::SearchBudgetExceeded(
        "realising the CM endomorphism on the starting curve",
    ))
}

/// Checks `ι² = [−q]` and `ιπ = −πι` on random points over `F_{p²}`.
fn verify_iota<R: Rng>(t1: &Tower, e0: &Curve, iota: &CmEndo, q: u64, rng: &mut R) -> bool {
    for _ in 0..4 {
        let pt = e0.random_point(t1, rng);
        let sq = iota.eval(t1, &iota.eval(t1, &pt));
        if sq != e0.neg(t1, &e0.mul_u64(t1, &pt, q)) {
            return false;
        }
        let a = iota.eval(t1, &e0.frobenius_point(t1, &pt, 1));
        let b = e0.frobenius_point(t1, &iota.eval(t1, &pt), 1);
        if a != e0.neg(t1, &b) {
            return false;
        }
    }
    true
}

/// Convenience: the integer norm of a lattice (asserting integrality).
pub(crate) fn lattice_norm_u64(alg: &QuatAlgebra, l: &Lattice) -> u64 {
    l.norm(alg)
        .to_integer()
        .to_u64()
        .expect("ideal norm fits u64")
}
