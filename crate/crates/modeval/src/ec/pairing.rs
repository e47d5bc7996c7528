//! Weil pairings via Miller's algorithm, and discrete logarithms in μ_m.

use super::curve::{smallest_prime_factor, Curve, Point};
use super::EcError;
use crate::arith::{Ext, Tower};
use std::collections::HashMap;

/// Evaluates the Miller function `f_{m,P}` at `q`. Fails with
/// [`EcError::PairingDegenerate`] when an intermediate line vanishes at `q`,
/// which happens exactly when `q` meets the multiples of `p` encountered by
/// the loop.
fn miller(t: &Tower, e: &Curve, p: &Point, q: &Point, m: u64) -> Result<Ext, EcError> {
    let (xq, yq) = match q {
        Point::Infinity => return Err(EcError::PairingDegenerate),
        Point::Affine { x, y } => (x, y),
    };
    let (mut xv, mut yv) = match p {
        Point::Infinity => return Err(EcError::PairingDegenerate),
        Point::Affine { x, y } => (x.clone(), y.clone()),
    };
    let (xp, yp) = (xv.clone(), yv.clone());
    let mut num = t.one();
    let mut den = t.one();
    // Evaluates the line through v and w (tangent when v = w) at q,
    // together with the vertical through v + w, updating (v) := v + w.
    let step = |xv: &mut Ext,
                    yv: &mut Ext,
                    xw: &Ext,
                    yw: &Ext,
                    num: &mut Ext,
                    den: &mut Ext|
     -> Result<(), EcError> {
        let slope = if xv == xw {
            // Tangent (the caller excludes yv = 0 beforehand).
            let slope_num = t.add(&t.scale(&t.square(xv), 3), &t.embed(e.a));
            t.mul(&slope_num, &t.inv(&t.scale(yv, 2)))
        } else {
            t.mul(&t.sub(yw, yv), &t.inv(&t.sub(xw, xv)))
        };
        let line = t.sub(&t.sub(yq, yv), &t.mul(&slope, &t.sub(xq, xv)));
        let x3 = t.sub(&t.sub(&t.square(&slope), xv), xw);
        let y3 = t.sub(&t.mul(&slope, &t.sub(xv, &x3)), yv);
        let vert = t.sub(xq, &x3);
        if line.is_zero() || vert.is_zero() {
            return Err(EcError::PairingDegenerate);
        }
        *num = t.mul(num, &line);
        *den = t.mul(den, &vert);
        *xv = x3;
        *yv = y3;
        Ok(())
    };
    let bits = 64 - m.leading_zeros() as usize;
    let mut v_is_inf = false;
    for i in (0..bits - 1).rev() {
        if v_is_inf {
            return Err(EcError::PairingDegenerate);
        }
        num = t.square(&num);
        den = t.square(&den);
        // Doubling: 2V = O exactly when yv = 0.
        if yv.is_zero() {
            let line = t.sub(xq, &xv);
            if line.is_zero() {
                return Err(EcError::PairingDegenerate);
            }
            num = t.mul(&num, &line);
            v_is_inf = true;
        } else {
            let (xw, yw) = (xv.clone(), yv.clone());
            step(&mut xv, &mut yv, &xw, &yw, &mut num, &mut den)?;
        }
        if (m >> i) & 1 == 1 {
            if v_is_inf {
                return Err(EcError::PairingDegenerate);
            }
            if xv == xp && yv == t.neg(&yp) {
                let line = t.sub(xq, &xv);
                if line.is_zero() {
                    return Err(EcError::PairingDegenerate);
                }
                num = t.mul(&num, &line);
                v_is_inf = true;
            } else if xv == xp && yv == yp {
                // Adding P to itself: tangent doubling.
                let (xw, yw) = (xv.clone(), yv.clone());
                step(&mut xv, &mut yv, &xw, &yw, &mut num, &mut den)?;
            } else {
                step(&mut xv, &mut yv, &xp, &yp, &mut num, &mut den)?;
            }
        }
    }
    debug_assert!(v_is_inf, "Miller loop must terminate at O for m-torsion P");
    Ok(t.mul(&num, &t.inv(&den)))
}

/// The Weil pairing `e_m(p, q)` for points of order dividing `m`, via
/// `(−1)^m · f_{m,P}(Q) / f_{m,Q}(P)`.
///
/// Returns 1 for dependent inputs when that can be detected cheaply, and
/// [`EcError::PairingDegenerate`] when a Miller line vanishes — callers
/// either resample or shift by other m-torsion points and use bilinearity.
pub fn weil_pairing(t: &Tower, e: &Curve, p: &Point, q: &Point, m: u64) -> Result<Ext, EcError> {
    if p.is_infinity() || q.is_infinity() || p == q || *p == e.neg(t, q) {
        return Ok(t.one());
    }
    let fp = miller(t, e, p, q, m)?;
    let fq = miller(t, e, q, p, m)?;
    let mut out = t.mul(&fp, &t.inv(&fq));
    if m % 2 == 1 {
        out = t.neg(&out);
    }
    Ok(out)
}

/// Solves `zeta^x = target` for `x` modulo `m = ℓ^e` (prime power), where
/// `zeta` has exact order `m`. Pohlig–Hellman digit extraction with
/// baby-step/giant-step inside each ℓ-subgroup.
pub fn dlog_in_mu(t: &Tower, zeta: &Ext, target: &Ext, m: u64) -> Result<u64, EcError> {
    let ell = smallest_prime_factor(m);
    let mut e = 0u32;
    let mut mm = m;
    while mm > 1 {
        mm /= ell;
        e += 1;
    }
    debug_assert_eq!(ell.pow(e), m);
    // ζ of order ℓ for the digit subproblems.
    let zeta_l = t.pow(zeta, m / ell);
    let table = bsgs_table(t, &zeta_l, ell);
    let baby = ((ell as f64).sqrt().ceil()) as u64;
    let giant = t.inv(&t.pow(&zeta_l, baby));
    let zeta_inv = t.inv(zeta);
    let mut x = 0u64;
    let mut cur = target.clone();
    for i in 0..e {
        // cur = ζ^(remaining digits · ℓ^i); extract digit i.
        let probe = t.pow(&cur, m / ell.pow(i + 1));
        let d = bsgs_solve(t, &table, baby, &giant, &probe, ell)
            .ok_or(EcError::DlogFailed { m })?;
        x += d * ell.pow(i);
        cur = t.mul(&cur, &t.pow(&zeta_inv, d * ell.pow(i)));
    }
    if t.pow(zeta, x) != *target {
        return Err(EcError::DlogFailed { m });
    }
    Ok(x)
}

fn bsgs_table(t: &Tower, g: &Ext, order: u64) -> HashMap<Ext, u64> {
    let baby = ((order as f64).sqrt().ceil()) as u64;
    let mut table = HashMap::with_capacity(baby as usize);
    let mut acc = t.one();
    for j in 0..baby {
        table.entry(acc.clone()).or_insert(j);
        acc = t.mul(&acc, g);
    }
    table
}

fn bsgs_solve(
    t: &Tower,
    table: &HashMap<Ext, u64>,
    baby: u64,
    giant: &Ext,
    target: &Ext,
    order: u64,
) -> Option<u64> {
    let mut cur = target.clone();
    for i in 0..baby + 1 {
        if let Some(j) = table.get(&cur) {
            let x = (i * baby + j) % order;
            return Some(x);
        }
        cur = t.mul(&cur, giant);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Fp2El;
    use rand_chacha::rand_core::SeedableRng;

    fn setup() -> (Tower, Curve, rand_chacha::ChaCha8Rng) {
        let t = Tower::build(103, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let e = Curve::from_j(t.fp2(), Fp2El::from_base(1728 % 103))
            .fix_twist(&t, &mut rng)
            .unwrap();
        (t, e, rng)
    }

    #[test]
    fn weil_pairing_is_bilinear_and_alternating() {
        let (t, e, mut rng) = setup();
        let m = 13; // 13 | p + 1 = 104
        let (p, q) = e.torsion_basis(&t, m, &mut rng).unwrap();
        let z = weil_pairing(&t, &e, &p, &q, m).unwrap();
        assert_eq!(t.pow(&z, m), t.one());
        assert_ne!(z, t.one());
        let p2 = e.mul_u64(&t, &p, 2);
        assert_eq!(weil_pairing(&t, &e, &p2, &q, m).unwrap(), t.square(&z));
        assert_eq!(
            weil_pairing(&t, &e, &q, &p, m).unwrap(),
            t.inv(&z),
            "antisymmetry"
        );
        assert_eq!(weil_pairing(&t, &e, &p, &p, m).unwrap(), t.one());
    }

    #[test]
    fn pairing_order_two_power() {
        let (t, e, mut rng) = setup();
        let m = 8;
        let (p, q) = e.torsion_basis(&t, m, &mut rng).unwrap();
        let z = weil_pairing(&t, &e, &p, &q, m).unwrap();
        assert_eq!(t.pow(&z, 8), t.one());
        assert_ne!(t.pow(&z, 4), t.one());
    }

    #[test]
    fn dlog_roundtrip() {
        let (t, e, mut rng) = setup();
        let m = 8;
        let (p, q) = e.torsion_basis(&t, m, &mut rng).unwrap();
        let z = weil_pairing(&t, &e, &p, &q, m).unwrap();
        for x in 0..m {
            let target = t.pow(&z, x);
            assert_eq!(dlog_in_mu(&t, &z, &target, m).unwrap(), x);
        }
    }

    #[test]
    fn frobenius_matrix_via_pairing_dlogs() {
        // Express π_p on E[13] in a basis and check det ≡ p, tr ≡ 0 (mod 13):
        // the characteristic polynomial of Frobenius is X² + p here.
        let (t, e, mut rng) = setup();
        let m = 13u64;
        let (p, q) = e.torsion_basis(&t, m, &mut rng).unwrap();
        let z = weil_pairing(&t, &e, &p, &q, m).unwrap();
        let entries = |r: &Point| -> (u64, u64) {
            // r = aP + bQ: e(r,Q) = z^a, e(P,r) = z^b.
            let a = dlog_in_mu(&t, &z, &weil_pairing(&t, &e, r, &q, m).unwrap(), m).unwrap();
            let b = dlog_in_mu(&t, &z, &weil_pairing(&t, &e, &p, r, m).unwrap(), m).unwrap();
            (a, b)
        };
        let (a, c) = entries(&e.frobenius_point(&t, &p, 1));
        let (b, d) = entries(&e.frobenius_point(&t, &q, 1));
        assert_eq!((a + d) % m, 0, "trace");
        let det = (a as i128 * d as i128 - b as i128 * c as i128).rem_euclid(m as i128) as u64;
        assert_eq!(det, 103 % m, "determinant");
    }
}
