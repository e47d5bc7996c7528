//! Exact evaluation of modular polynomials `Φ_ℓ(X, j)` over finite fields.
//!
//! The library computes, for a prime `p`, a level `ℓ` and a j-invariant
//! `j ∈ F_p`, the univariate polynomial `Φ_ℓ(X, j) mod p` without ever
//! materializing the full bivariate modular polynomial. Three evaluation
//! strategies are provided (see [`eval`]):
//!
//! * a CRT strategy for large characteristic, reconstructing the integer
//!   coefficient contractions from their images modulo many small primes,
//! * a direct supersingular strategy for `j` supersingular over `F_p`,
//!   using the arithmetic of quaternion orders, and
//! * a CRT strategy for large level, sieving for primes with supersingular
//!   reduction of the given invariant.
//!
//! Supporting layers: [`arith`] (prime fields and even-degree extension
//! towers), [`poly`] (dense univariate polynomial arithmetic over towers),
//! [`ec`] (short-Weierstrass curves, torsion, pairings, isogenies),
//! [`quat`] (quaternion lattices, orders, ideals, reduction), [`deuring`]
//! (the order ↔ curve dictionary), [`sieve`] and [`crt`] (prime selection
//! and streaming reconstruction), and [`weber`] (Weber-invariant level
//! structure machinery).

pub mod arith;
pub mod crt;
pub mod deuring;
pub mod ec;
pub mod eval;
pub mod poly;
pub mod quat;
pub mod sieve;
pub mod weber;

pub use arith::{Fp, Fp2El, Tower};
pub use eval::{
    modular_evaluation_big_char, modular_evaluation_big_level, special_supersingular_evaluation,
    supersingular_evaluation, EvalConfig, EvalError, EvaluationResult,
};
pub use poly::Poly;
