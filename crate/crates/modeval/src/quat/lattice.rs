//! Full-rank lattices in the quaternion algebra, in canonical Hermite
//! normal form over the basis `(1, i, j, k)`.

use super::element::{cmul, Quat, QuatAlgebra};
use super::QuatError;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// A full lattice `Λ ⊂ B`, stored as four HNF basis rows over `(1, i, j, k)`
/// with a common positive denominator. The representation is canonical, so
/// equality and hashing compare lattices as sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    pub rows: [[i128; 4]; 4],
    pub den: i128,
}

fn to_big(v: i128) -> BigInt {
    BigInt::from(v)
}

fn from_big(v: &BigInt) -> i128 {
    i128::try_from(v).expect("lattice coordinate exceeds i128")
}

/// Row-style Hermite normal form of an `n × 4` integer matrix whose row
/// space has full rank; upper triangular with positive diagonal and
/// above-diagonal entries reduced into `[0, pivot)`.
fn hnf(mut rows: Vec<[BigInt; 4]>) -> Result<[[BigInt; 4]; 4], QuatError> {
    let mut out: Vec<[BigInt; 4]> = Vec::with_capacity(4);
    for col in 0..4 {
        loop {
            // Pick the row with the smallest nonzero |entry| in this column.
            let mut best: Option<usize> = None;
            for (r, row) in rows.iter().enumerate() {
                if row[col].is_zero() {
                    continue;
                }
                if best.map(|b| row[col].abs() < rows[b][col].abs()).unwrap_or(true) {
                    best = Some(r);
                }
            }
            let b = match best {
                Some(b) => b,
                None => return Err(QuatError::DegenerateLattice),
            };
            let pivot = rows[b][col].clone();
            let mut done = true;
            for r in 0..rows.len() {
                if r == b || rows[r][col].is_zero() {
                    continue;
                }
                let f = (&rows[r][col]).div_floor(&pivot);
                for c in 0..4 {
                    let s = &rows[b][c] * &f;
                    rows[r][c] -= s;
                }
                if !rows[r][col].is_zero() {
                    done = false;
                }
            }
            if done {
                let mut piv = rows.swap_remove(b);
                if piv[col].is_negative() {
                    for c in piv.iter_mut() {
                        *c = -&*c;
                    }
                }
                out.push(piv);
                break;
            }
        }
        // Drop rows that became zero.
        rows.retain(|r| r.iter().any(|v| !v.is_zero()));
    }
    // Reduce above-diagonal entries, ascending so that a reduction in
    // column `i` (which touches columns ≥ i) happens before later columns
    // are themselves reduced.
    for i in 1..4 {
        let pivot = out[i][i].clone();
        for r in 0..i {
            let f = (&out[r][i]).div_floor(&pivot);
            if !f.is_zero() {
                for c in 0..4 {
                    let s = &out[i][c] * &f;
                    out[r][c] -= s;
                }
            }
        }
    }
    Ok([
        out[0].clone(),
        out[1].clone(),
        out[2].clone(),
        out[3].clone(),
    ])
}

impl Lattice {
    /// The lattice generated by the given elements (at least four,
    /// spanning).
    pub fn from_generators(gens: &[Quat]) -> Result<Lattice, QuatError> {
        let mut den: i128 = 1;
        for g in gens {
            den = den / den.gcd(&g.d) * g.d;
        }
        let rows: Vec<[BigInt; 4]> = gens
            .iter()
            .filter(|g| !g.is_zero())
            .map(|g| {
                let s = den / g.d;
                [
                    to_big(cmul(g.t, s)),
                    to_big(cmul(g.x, s)),
                    to_big(cmul(g.y, s)),
                    to_big(cmul(g.z, s)),
                ]
            })
            .collect();
        let h = hnf(rows)?;
        // Reduce the common content of all entries against the denominator.
        let mut g = to_big(den);
        for row in &h {
            for v in row {
                g = g.gcd(v);
            }
        }
        let gi = from_big(&g);
        let mut rows_i = [[0i128; 4]; 4];
        for (r, row) in h.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                rows_i[r][c] = from_big(&(v / &g));
            }
        }
        Ok(Lattice { rows: rows_i, den: den / gi })
    }

    /// The standard lattice ℤ⟨1, i, j, k⟩.
    pub fn standard() -> Lattice {
        Lattice {
            rows: [
                [1, 0, 0, 0],
                [0, 1, 0, 0],
                [0, 0, 1, 0],
                [0, 0, 0, 1],
            ],
            den: 1,
        }
    }

    pub fn basis(&self) -> [Quat; 4] {
        let row = |r: usize| {
            Quat::new(
                self.rows[r][0],
                self.rows[r][1],
                self.rows[r][2],
                self.rows[r][3],
                self.den,
            )
        };
        [row(0), row(1), row(2), row(3)]
    }

    /// Membership test by exact back-substitution on the HNF.
    pub fn contains(&self, q: &Quat) -> bool {
        // Solve c · rows = v · (den / q.d) over ℚ and check integrality.
        let target: Vec<BigRational> = [q.t, q.x, q.y, q.z]
            .iter()
            .map(|&v| BigRational::new(to_big(v) * to_big(self.den), to_big(q.d)))
            .collect();
        let mut rem = target;
        // Row vector against an upper-triangular basis: column `i` is only
        // touched by rows `0..=i`, so substitution runs forward.
        for i in 0..4 {
            let c = &rem[i] / BigRational::from(to_big(self.rows[i][i]));
            if !c.is_integer() {
                return false;
            }
            for col in 0..4 {
                let s = &c * BigRational::from(to_big(self.rows[i][col]));
                rem[col] -= s;
            }
        }
        rem.iter().all(|v| v.is_zero())
    }

    /// Coordinates of `q` in this basis, if `q` lies in the ℚ-span with
    /// denominator dividing out (always full rank), as exact rationals.
    pub fn coordinates(&self, q: &Quat) -> [BigRational; 4] {
        let mut rem: Vec<BigRational> = [q.t, q.x, q.y, q.z]
            .iter()
            .map(|&v| BigRational::new(to_big(v) * to_big(self.den), to_big(q.d)))
            .collect();
        let mut out = [
            BigRational::zero(),
            BigRational::zero(),
            BigRational::zero(),
            BigRational::zero(),
        ];
        for i in 0..4 {
            let c = &rem[i] / BigRational::from(to_big(self.rows[i][i]));
            for col in 0..4 {
                let s = &c * BigRational::from(to_big(self.rows[i][col]));
                rem[col] -= s;
            }
            out[i] = c;
        }
        out
    }

    /// Coordinate covolume `|det| / den⁴`.
    pub fn covolume(&self) -> BigRational {
        let det = to_big(self.rows[0][0])
            * to_big(self.rows[1][1])
            * to_big(self.rows[2][2])
            * to_big(self.rows[3][3]);
        let d = to_big(self.den);
        BigRational::new(det, &d * &d * &d * &d)
    }

    /// Lattice sum `Λ₁ + Λ₂`.
    pub fn sum(&self, other: &Lattice) -> Lattice {
        let mut gens = Vec::with_capacity(8);
        gens.extend(self.basis());
        gens.extend(other.basis());
        Lattice::from_generators(&gens).expect("sum of full lattices is full")
    }

    /// Lattice product `Λ₁·Λ₂` (all pairwise basis products).
    pub fn product(&self, alg: &QuatAlgebra, other: &Lattice) -> Lattice {
        let mut gens = Vec::with_capacity(16);
        for a in self.basis() {
            for b in other.basis() {
                gens.push(alg.mul(&a, &b));
            }
        }
        Lattice::from_generators(&gens).expect("product of full lattices is full")
    }

    /// The conjugate lattice `Λ̄`.
    pub fn conjugate(&self, alg: &QuatAlgebra) -> Lattice {
        let gens: Vec<Quat> = self.basis().iter().map(|b| alg.conj(b)).collect();
        Lattice::from_generators(&gens).expect("conjugate is full")
    }

    /// Scales the lattice by the rational `num/den`.
    pub fn scaled(&self, num: i128, den: i128) -> Lattice {
        let gens: Vec<Quat> = self.basis().iter().map(|b| b.scaled(num, den)).collect();
        Lattice::from_generators(&gens).expect("scaling preserves rank")
    }

    /// The reduced norm of a lattice ideal whose left (equivalently right)
    /// order is maximal: `n(Λ)² = covol(Λ)·4q`.
    pub fn norm(&self, alg: &QuatAlgebra) -> BigRational {
        let n2 = self.covolume() * BigRational::from(to_big(4 * alg.q));
        ratio_sqrt(&n2).expect("ideal norm must be a perfect rational square")
    }

    /// Whether the lattice is an order: contains 1, closed under
    /// multiplication, integral basis traces and norms.
    pub fn is_order(&self, alg: &QuatAlgebra) -> bool {
        if !self.contains(&Quat::one()) {
            return false;
        }
        let b = self.basis();
        for x in &b {
            if !alg.trd(x).is_integer() || !alg.nrd(x).is_integer() {
                return false;
            }
        }
        for x in &b {
            for y in &b {
                if !self.contains(&alg.mul(x, y)) {
                    return false;
                }
            }
        }
        true
    }

    /// The reduced discriminant of an order.
    pub fn reduced_discriminant(&self, alg: &QuatAlgebra) -> BigInt {
        // discrd² = |det(trd(bᵢ·bⱼ))|.
        let b = self.basis();
        let mut m = vec![vec![BigRational::zero(); 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                m[r][c] = alg.trd(&alg.mul(&b[r], &b[c]));
            }
        }
        let det = det4(&m).abs();
        let sq = ratio_sqrt(&det).expect("discriminant must be a square");
        assert!(sq.is_integer());
        sq.to_integer()
    }
}

fn det4(m: &[Vec<BigRational>]) -> BigRational {
    // Laplace expansion along the first row.
    let minor = |skip_c: usize| -> BigRational {
        let idx: Vec<usize> = (0..4).filter(|&c| c != skip_c).collect();
        let a = |r: usize, c: usize| &m[r][idx[c]];
        let det3 = a(1, 0) * (a(2, 1) * a(3, 2) - a(2, 2) * a(3, 1))
            - a(1, 1) * (a(2, 0) * a(3, 2) - a(2, 2) * a(3, 0))
            + a(1, 2) * (a(2, 0) * a(3, 1) - a(2, 1) * a(3, 0));
        det3
    };
    let mut det = BigRational::zero();
    for c in 0..4 {
        let term = &m[0][c] * minor(c);
        if c % 2 == 0 {
            det += term;
        } else {
            det -= term;
        }
    }
    det
}

/// Exact square root of a nonnegative rational, if it is a perfect square.
pub(crate) fn ratio_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The standard maximal order for p ≡ 3 (mod 4), q = 1:
    /// ⟨1, i, (i + j)/2, (1 + k)/2⟩.
    fn o0(_p: i128) -> Lattice {
        Lattice::from_generators(&[
            Quat::one(),
            Quat::new(0, 1, 0, 0, 1),
            Quat::new(0, 1, 1, 0, 2),
            Quat::new(1, 0, 0, 1, 2),
        ])
        .unwrap()
    }

    #[test]
    fn hnf_is_canonical() {
        let l1 = o0(103);
        // Same lattice from a different generating set.
        let b = l1.basis();
        let alg = QuatAlgebra::new(1, 103);
        let gens = [
            alg.add(&b[0], &b[1]),
            alg.sub(&b[1], &b[3]),
            alg.add(&b[2], &alg.add(&b[0], &b[0])),
            b[3],
            alg.add(&b[2], &b[3]),
        ];
        let l2 = Lattice::from_generators(&gens).unwrap();
        assert_eq!(l1, l2);
    }

    #[test]
    fn membership_and_coordinates() {
        let l = o0(103);
        assert!(l.contains(&Quat::one()));
        assert!(l.contains(&Quat::new(1, 0, 0, 1, 2)));
        assert!(!l.contains(&Quat::new(0, 0, 1, 0, 2)));
        assert!(!l.contains(&Quat::new(1, 1, 1, 1, 3)));
        let b = l.basis();
        for v in &b {
            let coords = l.coordinates(v);
            assert!(coords.iter().all(|c| c.is_integer()));
        }
    }

    #[test]
    fn maximal_order_invariants() {
        for p in [103i128, 59] {
            let alg = QuatAlgebra::new(1, p);
            if p % 4 != 3 {
                continue;
            }
            let l = o0(p);
            assert!(l.is_order(&alg));
            assert_eq!(l.reduced_discriminant(&alg), BigInt::from(p));
            // covol = 1/(4q).
            assert_eq!(
                l.covolume(),
                BigRational::new(BigInt::from(1), BigInt::from(4))
            );
        }
    }

    #[test]
    fn product_and_norm() {
        let p = 103i128;
        let alg = QuatAlgebra::new(1, p);
        let o = o0(p);
        // A left ideal of norm 2: O·α + O·2 with nrd(α) ≡ 0 (mod 2).
        let alpha = Quat::new(1, 1, 0, 0, 1); // nrd = 2, and (1+i)/2 ∉ O
        let two = o.scaled(2, 1);
        let mut gens: Vec<Quat> = o.basis().iter().map(|b| alg.mul(b, &alpha)).collect();
        gens.extend(two.basis());
        let i = Lattice::from_generators(&gens).unwrap();
        assert_eq!(i.norm(&alg), BigRational::from(BigInt::from(2)));
        // The product I·Ī recovers n(I)·O_L(I) = 2·O.
        let prod = i.product(&alg, &i.conjugate(&alg));
        assert_eq!(prod, o.scaled(2, 1));
    }
}
