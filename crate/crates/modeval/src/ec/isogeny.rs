//! Separable isogenies from kernel data, in Vélu/Kohel normal form.

use super::curve::{Curve, Point};
use super::EcError;
use crate::arith::{Ext, Fp2El, Tower};

/// A separable isogeny of prime degree with `F_{p²}`-rational kernel,
/// stored as rational maps with coefficients in `F_{p²}` so it can be
/// evaluated on points over any tower.
#[derive(Clone, Debug)]
pub struct Isogeny {
    pub domain: Curve,
    pub codomain: Curve,
    pub degree: u64,
    /// Monic kernel polynomial (degree (ℓ−1)/2, or 1 for ℓ = 2),
    /// little-endian.
    pub kernel_poly: Vec<Fp2El>,
    /// Numerator N of x ↦ N(x)/h(x)² (x − x₀ shifted form for ℓ = 2).
    num: Vec<Fp2El>,
}

fn poly_eval(t: &Tower, c: &[Fp2El], x: &Ext) -> Ext {
    let mut acc = t.zero();
    for a in c.iter().rev() {
        acc = t.add(&t.mul(&acc, x), &t.embed(*a));
    }
    acc
}

fn poly_derive(f: &crate::arith::Fp2, c: &[Fp2El]) -> Vec<Fp2El> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, a)| f.mul_base(*a, (i as u64) % f.p()))
        .collect()
}

fn poly_mul_f(f: &crate::arith::Fp2, a: &[Fp2El], b: &[Fp2El]) -> Vec<Fp2El> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Fp2El::ZERO; a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j] = f.add(out[i + j], f.mul(*ai, *bj));
        }
    }
    out
}

fn poly_sub_f(f: &crate::arith::Fp2, a: &[Fp2El], b: &[Fp2El]) -> Vec<Fp2El> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(Fp2El::ZERO);
            let y = b.get(i).copied().unwrap_or(Fp2El::ZERO);
            f.sub(x, y)
        })
        .collect()
}

impl Isogeny {
    /// Builds the isogeny with the given monic kernel polynomial over
    /// `F_{p²}` (degree (ℓ−1)/2 for odd ℓ; degree 1 with the abscissa of a
    /// 2-torsion point for ℓ = 2).
    pub fn from_kernel_poly(
        f: &crate::arith::Fp2,
        domain: &Curve,
        h: &[Fp2El],
        ell: u64,
    ) -> Result<Isogeny, EcError> {
        let (a, b) = (domain.a, domain.b);
        if ell == 2 {
            if h.len() != 2 || h[1] != Fp2El::ONE {
                return Err(EcError::NotRational);
            }
            let x0 = f.neg(h[0]);
            // t = 3x₀² + a, w = x₀·t; codomain (a − 5t, b − 7w).
            let tq = f.add(f.mul_base(f.square(x0), 3), a);
            let wq = f.mul(x0, tq);
            let codomain = Curve {
                a: f.sub(a, f.mul_base(tq, 5)),
                b: f.sub(b, f.mul_base(wq, 7)),
            };
            // φ_x = (x(x − x₀) + t)/(x − x₀): numerator x² − x₀x + t.
            let num = vec![tq, f.neg(x0), Fp2El::ONE];
            return Ok(Isogeny {
                domain: *domain,
                codomain,
                degree: 2,
                kernel_poly: h.to_vec(),
                num,
            });
        }
        let d = ((ell - 1) / 2) as usize;
        if h.len() != d + 1 || h[d] != Fp2El::ONE {
            return Err(EcError::NotRational);
        }
        // Elementary symmetric functions of the kernel abscissas.
        let e1 = if d >= 1 { f.neg(h[d - 1]) } else { Fp2El::ZERO };
        let e2 = if d >= 2 { h[d - 2] } else { Fp2El::ZERO };
        let e3 = if d >= 3 { f.neg(h[d - 3]) } else { Fp2El::ZERO };
        // Power sums p₂ = e₁² − 2e₂, p₃ = e₁³ − 3e₁e₂ + 3e₃.
        let p2 = f.sub(f.square(e1), f.mul_base(e2, 2));
        let p3 = f.add(
            f.sub(f.mul(e1, f.square(e1)), f.mul_base(f.mul(e1, e2), 3)),
            f.mul_base(e3, 3),
        );
        let v = f.add(f.mul_base(p2, 6), f.mul_base(a, 2 * d as u64));
        let w = f.add(
            f.add(f.mul_base(p3, 10), f.mul_base(f.mul(a, e1), 6)),
            f.mul_base(b, 4 * d as u64),
        );
        let codomain = Curve {
            a: f.sub(a, f.mul_base(v, 5)),
            b: f.sub(b, f.mul_base(w, 7)),
        };
        // N = (ℓx − 2e₁)h² − (6x² + 2a)h′h − 4(x³ + ax + b)(h″h − h′²).
        let hp = poly_derive(f, h);
        let hpp = poly_derive(f, &hp);
        let lin = vec![f.neg(f.mul_base(e1, 2)), Fp2El::from_base(f.fp().reduce_u64(ell))];
        let quad = vec![f.mul_base(a, 2), Fp2El::ZERO, Fp2El::from_base(6)];
        let cubic = vec![f.mul_base(b, 4), f.mul_base(a, 4), Fp2El::ZERO, Fp2El::from_base(4)];
        let term1 = poly_mul_f(f, &lin, &poly_mul_f(f, h, h));
        let term2 = poly_mul_f(f, &quad, &poly_mul_f(f, &hp, h));
        let term3 = poly_mul_f(
            f,
            &cubic,
            &poly_sub_f(f, &poly_mul_f(f, &hpp, h), &poly_mul_f(f, &hp, &hp)),
        );
        let mut num = poly_sub_f(f, &poly_sub_f(f, &term1, &term2), &term3);
        while num.last() == Some(&Fp2El::ZERO) {
            num.pop();
        }
        debug_assert_eq!(num.len(), ell as usize + 1);
        debug_assert_eq!(num[ell as usize], Fp2El::ONE);
        Ok(Isogeny {
            domain: *domain,
            codomain,
            degree: ell,
            kernel_poly: h.to_vec(),
            num,
        })
    }

    /// Builds the degree-ℓ isogeny whose kernel is generated by `k`, a
    /// point of exact order ℓ (over any tower). The kernel polynomial must
    /// descend to `F_{p²}`, i.e. the subgroup ⟨k⟩ must be Galois-stable.
    pub fn from_kernel_point(
        t: &Tower,
        domain: &Curve,
        k: &Point,
        ell: u64,
    ) -> Result<Isogeny, EcError> {
        let f = t.fp2();
        if ell == 2 {
            let x0 = match k {
                Point::Affine { x, y } if y.is_zero() => t.coerce(x).map_err(|_| EcError::NotRational)?,
                _ => return Err(EcError::NotRational),
            };
            return Isogeny::from_kernel_poly(f, domain, &[f.neg(x0), Fp2El::ONE], 2);
        }
        let d = (ell - 1) / 2;
        let mut xs = Vec::with_capacity(d as usize);
        let mut cur = k.clone();
        for _ in 0..d {
            match &cur {
                Point::Affine { x, .. } => xs.push(x.clone()),
                Point::Infinity => return Err(EcError::NotRational),
            }
            cur = domain.add(t, &cur, k);
        }
        let hext = crate::poly::Poly::from_roots(t, &xs);
        let mut h = Vec::with_capacity(hext.c.len());
        for c in &hext.c {
            h.push(t.coerce(c).map_err(|_| EcError::NotRational)?);
        }
        Isogeny::from_kernel_poly(f, domain, &h, ell)
    }

    /// Evaluates the isogeny at a point over any tower of the same prime.
    pub fn eval(&self, t: &Tower, p: &Point) -> Point {
        let (x, y) = match p {
            Point::Infinity => return Point::Infinity,
            Point::Affine { x, y } => (x, y),
        };
        let f = t.fp2();
        let hx = poly_eval(t, &self.kernel_poly, x);
        if hx.is_zero() {
            return Point::Infinity;
        }
        if self.degree == 2 {
            // φ_x = num(x)/(x − x₀), φ_y = y·(1 − t/(x − x₀)²).
            let x0 = f.neg(self.kernel_poly[0]);
            let tq = self.num[0]; // num = x² − x₀x + t
            let dinv = t.inv(&hx);
            let phix = t.mul(&poly_eval(t, &self.num, x), &dinv);
            let corr = t.mul_fp2(&t.square(&dinv), tq);
            let phiy = t.mul(y, &t.sub(&t.one(), &corr));
            let _ = x0;
            return Point::Affine { x: phix, y: phiy };
        }
        // φ_x = N/h², φ_y = y(N′h − 2Nh′)/h³.
        let nx = poly_eval(t, &self.num, x);
        let ndx = poly_eval(t, &poly_derive(f, &self.num), x);
        let hdx = poly_eval(t, &poly_derive(f, &self.kernel_poly), x);
        let hinv = t.inv(&hx);
        let h2inv = t.square(&hinv);
        let phix = t.mul(&nx, &h2inv);
        let numy = t.sub(&t.mul(&ndx, &hx), &t.scale(&t.mul(&nx, &hdx), 2));
        let phiy = t.mul(y, &t.mul(&numy, &t.mul(&h2inv, &hinv)));
        Point::Affine { x: phix, y: phiy }
    }
}

/// Finds `u² ∈ F_{p²}` realising an isomorphism `(x, y) ↦ (u²x, u³y)` from
/// `e1` to `e2`; returns the pair `(u², u³)`. Fails when the curves are not
/// isomorphic over `F_{p²}`.
pub fn isomorphism_scaling(
    f: &crate::arith::Fp2,
    e1: &Curve,
    e2: &Curve,
) -> Result<(Fp2El, Fp2El), EcError> {
    let check = |u2: Fp2El, u3: Fp2El| -> Option<(Fp2El, Fp2El)> {
        let ok_a = f.mul(e1.a, f.square(u2)) == e2.a;
        let ok_b = f.mul(e1.b, f.square(u3)) == e2.b;
        // u³ must be consistent: (u³)² = (u²)³.
        let consistent = f.square(u3) == f.mul(u2, f.square(u2));
        if ok_a && ok_b && consistent {
            Some((u2, u3))
        } else {
            None
        }
    };
    if !e1.a.is_zero() && !e1.b.is_zero() {
        // u⁴ = a₂/a₁ and u⁶ = b₂/b₁ force u² = (b₂a₁)/(a₂b₁).
        let u2 = f.mul(f.mul(e2.b, e1.a), f.inv(f.mul(e2.a, e1.b)));
        let u3s = f.mul(u2, f.square(u2));
        if let Some(u3) = f.sqrt(u3s) {
            for cand in [u3, f.neg(u3)] {
                if let Some(ans) = check(u2, cand) {
                    return Ok(ans);
                }
            }
        }
        return Err(EcError::NoIsomorphism);
    }
    if e1.a.is_zero() && e2.a.is_zero() && !e1.b.is_zero() {
        // j = 0: u⁶ = b₂/b₁; enumerate the sixth roots via two square roots
        // and the cube roots of unity when present.
        let u6 = f.mul(e2.b, f.inv(e1.b));
        for u3 in sqrt_both(f, u6) {
            for u2 in cbrt_all(f, u6) {
                if let Some(ans) = check(u2, u3) {
                    return Ok(ans);
                }
            }
        }
        return Err(EcError::NoIsomorphism);
    }
    if e1.b.is_zero() && e2.b.is_zero() && !e1.a.is_zero() {
        // j = 1728: u⁴ = a₂/a₁.
        let u4 = f.mul(e2.a, f.inv(e1.a));
        for u2 in sqrt_both(f, u4) {
            if let Some(u3s) = f.sqrt(f.mul(u2, f.square(u2))) {
                for u3 in [u3s, f.neg(u3s)] {
                    if let Some(ans) = check(u2, u3) {
                        return Ok(ans);
                    }
                }
            }
        }
        return Err(EcError::NoIsomorphism);
    }
    Err(EcError::NoIsomorphism)
}

fn sqrt_both(f: &crate::arith::Fp2, a: Fp2El) -> Vec<Fp2El> {
    match f.sqrt(a) {
        Some(r) => vec![r, f.neg(r)],
        None => vec![],
    }
}

fn cbrt_all(f: &crate::arith::Fp2, a: Fp2El) -> Vec<Fp2El> {
    // Roots of x³ − a over F_{p²}, via the general root finder.
    let t = Tower::build(f.p(), 1);
    let g = crate::poly::Poly::from_coeffs(vec![
        t.neg(&t.embed(a)),
        t.zero(),
        t.zero(),
        t.one(),
    ]);
    g.distinct_roots(&t)
        .iter()
        .map(|r| t.coerce(r).expect("degree-one tower"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    #[test]
    fn two_isogeny_maps_points_to_codomain() {
        let t = Tower::build(103, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let e = Curve::from_j(t.fp2(), Fp2El::from_base(1728 % 103))
            .fix_twist(&t, &mut rng)
            .unwrap();
        let (k, _) = e.torsion_basis(&t, 2, &mut rng).unwrap();
        let phi = Isogeny::from_kernel_point(&t, &e, &k, 2).unwrap();
        assert!(phi.eval(&t, &k).is_infinity());
        for _ in 0..8 {
            let p = e.random_point(&t, &mut rng);
            let q = phi.eval(&t, &p);
            assert!(phi.codomain.is_on_curve(&t, &q));
            // Homomorphism: φ(2P) = 2φ(P).
            assert_eq!(phi.eval(&t, &e.double(&t, &p)), phi.codomain.double(&t, &q));
        }
    }

    #[test]
    fn odd_isogeny_maps_points_to_codomain() {
        // p + 1 = 104 = 8·13: a 13-isogeny is rational over F_{p²}.
        let t = Tower::build(103, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let e = Curve::from_j(t.fp2(), Fp2El::from_base(1728 % 103))
            .fix_twist(&t, &mut rng)
            .unwrap();
        let (k, _) = e.torsion_basis(&t, 13, &mut rng).unwrap();
        let phi = Isogeny::from_kernel_point(&t, &e, &k, 13).unwrap();
        assert!(phi.eval(&t, &k).is_infinity());
        assert!(phi.eval(&t, &e.mul_u64(&t, &k, 5)).is_infinity());
        for _ in 0..8 {
            let p = e.random_point(&t, &mut rng);
            let q = phi.eval(&t, &p);
            assert!(phi.codomain.is_on_curve(&t, &q), "image on codomain");
            let r = e.random_point(&t, &mut rng);
            assert_eq!(
                phi.eval(&t, &e.add(&t, &p, &r)),
                phi.codomain.add(&t, &q, &phi.eval(&t, &r)),
                "homomorphism"
            );
        }
    }

    #[test]
    fn composed_isogenies_act_as_scalar_times_dual() {
        // φ̂∘φ = [ℓ]: check |φ(E[ℓ])| collapses and degrees multiply through
        // a 2-isogeny followed by evaluation of doubling.
        let t = Tower::build(103, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let e = Curve::from_j(t.fp2(), Fp2El::from_base(1728 % 103))
            .fix_twist(&t, &mut rng)
            .unwrap();
        let (k, q2) = e.torsion_basis(&t, 2, &mut rng).unwrap();
        let phi = Isogeny::from_kernel_point(&t, &e, &k, 2).unwrap();
        // The image of the complementary 2-torsion point generates ker φ̂.
        let img = phi.eval(&t, &q2);
        assert!(!img.is_infinity());
        assert!(phi.codomain.double(&t, &img).is_infinity());
        let psi = Isogeny::from_kernel_point(&t, &phi.codomain, &img, 2).unwrap();
        // ψ∘φ has kernel E[2] ⊇ ⟨k, q2⟩ and equals [2] up to isomorphism.
        let p = e.random_point(&t, &mut rng);
        let through = psi.eval(&t, &phi.eval(&t, &p));
        let (u2, u3) = isomorphism_scaling(t.fp2(), &psi.codomain, &e).unwrap();
        let mapped = match through {
            Point::Affine { x, y } => Point::Affine {
                x: t.mul_fp2(&x, u2),
                y: t.mul_fp2(&y, u3),
            },
            Point::Infinity => Point::Infinity,
        };
        let doubled = e.double(&t, &p);
        // Up to the ±1 automorphism.
        assert!(mapped == doubled || mapped == e.neg(&t, &doubled));
    }

    #[test]
    fn isomorphism_scaling_generic_curves() {
        let f = crate::arith::Fp2::new(211);
        let e1 = Curve::from_j(&f, Fp2El { c0: 4, c1: 9 });
        // Scale by u = 3 + ω.
        let u = Fp2El { c0: 3, c1: 1 };
        let u2 = f.square(u);
        let e2 = Curve {
            a: f.mul(e1.a, f.square(u2)),
            b: f.mul(e1.b, f.mul(f.square(u2), u2)),
        };
        let (s2, s3) = isomorphism_scaling(&f, &e1, &e2).unwrap();
        assert_eq!(s2, u2);
        assert_eq!(f.square(s3), f.mul(s2, f.square(s2)));
    }
}
