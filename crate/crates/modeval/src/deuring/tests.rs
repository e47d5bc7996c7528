use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arith::Fp2El;
use crate::ec::is_supersingular;
use crate::quat::{ideals_are_equivalent, order_type, right_order};

use super::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn context_builds_at_small_primes() {
    for p in [11u64, 13, 23, 31, 101] {
        let ctx = DeuringContext::new(p, &mut rng(1)).unwrap();
        let t1 = ctx.tower(1);
        assert!(is_supersingular(&t1, ctx.j0), "j₀ supersingular at p = {p}");
        assert_eq!(
            ctx.order0.reduced_discriminant(&ctx.alg),
            num_bigint::BigInt::from(p),
            "𝒪₀ maximal at p = {p}"
        );
    }
}

#[test]
fn order_to_j_fixes_the_anchor() {
    for p in [13u64, 31] {
        let ctx = DeuringContext::new(p, &mut rng(2)).unwrap();
        let j = order_to_j(&ctx, &ctx.order0, &mut rng(3)).unwrap();
        assert_eq!(j, ctx.j0, "𝒪₀ maps back to j₀ at p = {p}");
    }
}

#[test]
fn big_table_census_p11() {
    // At p = 11 there are exactly two supersingular j-invariants,
    // 0 and 1728 ≡ 1, one per maximal-order type.
    let ctx = DeuringContext::new(11, &mut rng(4)).unwrap();
    let table = orders_to_j_big(&ctx, None, 5).unwrap();
    let mut js: Vec<Fp2El> = table.iter().map(|e| e.j).collect();
    js.sort();
    assert_eq!(js, vec![Fp2El::from_base(0), Fp2El::from_base(1)]);
    for e in &table {
        let o = right_order(&ctx.alg, &e.witness_ideal);
        assert_eq!(order_type(&ctx.alg, &o), e.order_type);
    }
}

#[test]
fn endo_ring_round_trip_p31() {
    let ctx = DeuringContext::new(31, &mut rng(6)).unwrap();
    let table = orders_to_j_big(&ctx, None, 7).unwrap();
    assert_eq!(table.len(), 3, "three order types at p = 31");
    for e in &table {
        assert!(e.j.is_base(), "all types Galois-stable at p = 31");
        let order = endo_ring(&ctx, e.j.c0, &mut rng(8)).unwrap();
        assert_eq!(
            order_type(&ctx.alg, &order),
            e.order_type,
            "endo_ring recovers the type of j = {}",
            e.j.c0
        );
        let back = order_to_j(&ctx, &order, &mut rng(9)).unwrap();
        assert_eq!(back, e.j, "round trip through the dictionary");
    }
}

#[test]
fn vertical_levels_p23() {
    // p = 23 ≡ 3 (mod 4): the F_p-graph has two levels distinguished by
    // the rational 2-torsion rank, and endo_ring must bridge them.
    let ctx = DeuringContext::new(23, &mut rng(10)).unwrap();
    let table = orders_to_j_big(&ctx, None, 11).unwrap();
    let base_js: Vec<u64> = table.iter().filter(|e| e.j.is_base()).map(|e| e.j.c0).collect();
    assert!(!base_js.is_empty());
    for j in base_js {
        let order = endo_ring(&ctx, j, &mut rng(12)).unwrap();
        let back = order_to_j(&ctx, &order, &mut rng(13)).unwrap();
        assert_eq!(back, Fp2El::from_base(j));
    }
}

#[test]
fn kernel_ideal_of_rational_two_torsion() {
    // The kernel ideal of a rational 2-torsion point is an integral
    // norm-2 left ideal, equivalent to itself under rewriting.
    let ctx = DeuringContext::new(23, &mut rng(14)).unwrap();
    let t1 = ctx.tower(1);
    let cubic = crate::poly::Poly::from_coeffs(vec![
        t1.embed(ctx.e0.b),
        t1.embed(ctx.e0.a),
        t1.zero(),
        t1.one(),
    ]);
    let root = cubic
        .distinct_roots(&t1)
        .into_iter()
        .find_map(|r| t1.coerce(&r).ok())
        .expect("a rational 2-torsion point exists");
    let ideal = kernel_to_ideal(&ctx, root, Fp2El::ZERO, 2, &mut rng(15)).unwrap();
    assert_eq!(
        ideal.norm(&ctx.alg),
        num_rational::BigRational::from_integer(2.into())
    );
    assert!(ideals_are_equivalent(&ctx.alg, &ideal, &ideal));
}

