//! End-to-end checks of the evaluation drivers against an independent
//! implementation that expands Φ_ℓ over ℤ from the q-expansion of j.

use std::path::PathBuf;

use modeval::eval::{
    modular_evaluation_big_char, modular_evaluation_big_level, supersingular_evaluation,
    EvalConfig,
};

/// A cache directory shared by every test in this binary (and across
/// runs), so the per-prime j-invariant tables are built once.
fn cfg() -> EvalConfig {
    let dir: PathBuf = std::env::temp_dir().join("modeval-test-jtables");
    EvalConfig {
        seed: 7,
        cache_dir: Some(dir),
        ..EvalConfig::default()
    }
}

#[test]
fn big_char_matches_integer_expansion() {
    // Φ₂(j, Y) mod 13 for ordinary and supersingular j alike.
    let cfg = cfg();
    for j in [1u64, 5, 7] {
        let got = modular_evaluation_big_char(13, j, 2, &cfg).unwrap();
        assert_eq!(
            got.coefficients,
            modeval_oracle::phi_eval_mod(2, 13, j),
            "j = {j}"
        );
    }
}

#[test]
fn big_char_level_three() {
    let cfg = cfg();
    let got = modular_evaluation_big_char(1009, 64, 3, &cfg).unwrap();
    assert_eq!(got.coefficients, modeval_oracle::phi_eval_mod(3, 1009, 64));
}

#[test]
fn supersingular_route_matches_integer_expansion() {
    // Every supersingular j over F_101, level 2: the quaternion route must
    // reproduce the reduction of the integer polynomial.
    let cfg = cfg();
    let census = modeval_oracle::supersingular_census(101);
    for &j in &census.linear {
        let got = supersingular_evaluation(101, j, 2, &cfg).unwrap();
        assert_eq!(
            got.coefficients,
            modeval_oracle::phi_eval_mod(2, 101, j),
            "j = {j}"
        );
    }
}

#[test]
fn big_level_matches_integer_expansion() {
    let cfg = cfg();
    let got = modular_evaluation_big_level(13, 5, 2, &cfg, None).unwrap();
    assert_eq!(got.coefficients, modeval_oracle::phi_eval_mod(2, 13, 5));
}

#[test]
fn big_level_reuses_cached_prime_set() {
    let cfg = cfg();
    let set = modeval::eval::biglevel_primes(13, 5, 2).unwrap();
    let fresh = modular_evaluation_big_level(13, 5, 2, &cfg, None).unwrap();
    let cached = modular_evaluation_big_level(13, 5, 2, &cfg, Some(&set)).unwrap();
    assert_eq!(fresh, cached);
}

#[test]
fn fixed_seed_is_deterministic() {
    let cfg = cfg();
    let a = modular_evaluation_big_char(13, 7, 2, &cfg).unwrap();
    let b = modular_evaluation_big_char(13, 7, 2, &cfg).unwrap();
    assert_eq!(a, b);
}
