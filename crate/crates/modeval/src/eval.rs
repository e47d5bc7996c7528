//! The evaluation algorithms: per-prime supersingular kernels and the two
//! CRT drivers.
//!
//! Three routes to `Φ_ℓ(j, Y) mod p` are provided:
//!
//! * [`modular_evaluation_big_char`] reconstructs the lifted coefficient
//!   contractions from their images modulo many small primes, computing
//!   each image with [`special_supersingular_evaluation`];
//! * [`supersingular_evaluation`] handles supersingular `j ∈ F_p`
//!   directly: the endomorphism ring is computed once and the ℓ+1
//!   neighbors are read off the quaternion side, with no ℓ-isogeny ever
//!   evaluated;
//! * [`modular_evaluation_big_level`] runs the supersingular route modulo
//!   primes where `j` has supersingular reduction and reconstructs by CRT.
//!
//! Exactness of every per-prime neighbor hinges on resolving the Galois
//! ambiguity (order types identify `j` only up to `j ↦ j^p`): all
//! translations below carry ideal classes, not bare orders, and compare
//! witness ideals where a table lookup is involved.

use std::path::PathBuf;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{Ext, Fp2El};
use crate::crt::{
    crt_finalize, crt_precompute, crt_update, height_bound_bigchar, height_bound_biglevel,
    lift_powers, CrtError,
};
use crate::deuring::{
    endo_ring_ideal, ideal_class_to_j, orders_to_j_big, DeuringContext, DeuringError, JTableEntry,
};
use crate::poly::Poly;
use crate::quat::{ideals_are_equivalent, ideals_of_norm_ell, order_type, right_order};
use crate::sieve::{
    is_prime_u64, select_primes_bigchar, select_primes_biglevel, supersingular_reduction_test,
    CrtPrimeSet, SieveError,
};

/// Errors from the evaluation drivers.
#[derive(Debug, Error)]
pub enum EvalError {
    /// The per-prime algorithm needs at least ℓ+2 supersingular classes.
    #[error("only {found} supersingular classes at q = {q}, need {need}")]
    InsufficientClasses { q: u64, found: usize, need: usize },
    /// Input validation.
    #[error("invalid input: {0}")]
    BadInput(&'static str),
    /// The input j-invariant is not supersingular over F_p.
    #[error("j = {0} is not supersingular")]
    NotSupersingular(u64),
    /// Every retry and prime replacement failed for one CRT prime.
    #[error("per-prime evaluation kept failing at q = {q}: {source}")]
    PrimeExhausted {
        q: u64,
        #[source]
        source: Box<EvalError>,
    },
    /// Translation-layer failure.
    #[error(transparent)]
    Deuring(#[from] DeuringError),
    /// Prime-selection failure.
    #[error(transparent)]
    Sieve(#[from] SieveError),
    /// Reconstruction-protocol failure.
    #[error(transparent)]
    Crt(#[from] CrtError),
}

/// Shared evaluation knobs.
#[derive(Debug, Clone)]
pub struct EvalConfig {
    /// Seeds every internal random choice; fixed seed ⇒ identical output.
    pub seed: u64,
    /// Directory for the per-prime j-invariant table cache.
    pub cache_dir: Option<PathBuf>,
    /// Use the full-table variant of the supersingular route when
    /// `ℓ+1 > class_number × big_set_fraction`.
    pub big_set_fraction: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            seed: 0,
            cache_dir: None,
            big_set_fraction: 1.0 / 8.0,
        }
    }
}

/// The evaluated polynomial `Φ_ℓ(j, Y) ∈ F_p[Y]`: always monic of degree
/// ℓ+1, coefficients ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvaluationResult {
    pub p: u64,
    pub ell: u64,
    pub j: u64,
    pub coefficients: Vec<u64>,
}

impl EvaluationResult {
    fn new(p: u64, ell: u64, j: u64, coefficients: Vec<u64>) -> EvaluationResult {
        assert_eq!(coefficients.len(), ell as usize + 2, "degree must be ℓ+1");
        assert_eq!(*coefficients.last().unwrap(), 1, "output must be monic");
        EvaluationResult { p, ell, j, coefficients }
    }
}

fn check_level(ell: u64) -> Result<(), EvalError> {
    if !is_prime_u64(ell) {
        return Err(EvalError::BadInput("ℓ must be prime"));
    }
    Ok(())
}

/// An interpolation node: a supersingular j-invariant together with the
/// table entry whose witness class selects it (`conj` marks the Galois
/// twin of a non-rational entry).
struct JNode {
    j: Fp2El,
    entry: usize,
    conj: bool,
}

/// One neighbor polynomial: the ℓ+1 j-invariants ℓ-isogenous to the j of
/// `table[entry]`, each resolved to the exact conjugate via witness-ideal
/// classes (Galois twins reuse this list conjugated).
fn neighbor_js(
    ctx: &DeuringContext,
    table: &[JTableEntry],
    by_type: &std::collections::HashMap<crate::quat::OrderType, usize>,
    entry: &JTableEntry,
    ell: u64,
    seed: u64,
) -> Result<Vec<Fp2El>, EvalError> {
    let alg = &ctx.alg;
    let f2 = &ctx.f2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = right_order(alg, &entry.witness_ideal);
    let ideals = ideals_of_norm_ell(alg, &order, ell, &mut rng).map_err(DeuringError::from)?;
    let mut out = Vec::with_capacity(ideals.len());
    for ik in &ideals {
        let o_k = right_order(alg, ik);
        let ty = order_type(alg, &o_k);
        let target = &table[*by_type
            .get(&ty)
            .expect("every right order type appears in the full table")];
        let j_cand = target.j;
        if j_cand.is_base() {
            out.push(j_cand);
            continue;
        }
        // Compose the path 𝒪₀ → entry → neighbor and compare its class
        // with the witness that selected `target.j`.
        let composed = entry.witness_ideal.product(alg, ik);
        let composed = composed.scaled(composed.den, 1);
        if ideals_are_equivalent(alg, &composed, &target.witness_ideal) {
            out.push(j_cand);
        } else {
            out.push(f2.conj(j_cand));
        }
    }
    Ok(out)
}

/// Evaluates the coefficient contraction `Σ_{i,k} a_{i,k} x_i Y^k` of
/// `Φ_ℓ = Σ a_{i,k} X^i Y^k` over `F_q`, from the supersingular graph at
/// `q` alone. `x` must supply the ℓ+2 values `x_0 … x_{ℓ+1}`.
pub fn special_supersingular_evaluation(
    q: u64,
    ell: u64,
    x: &[u64],
    cfg: &EvalConfig,
) -> Result<Vec<u64>, EvalError> {
    check_level(ell)?;
    let lu = ell as usize;
    if x.len() != lu + 2 {
        return Err(EvalError::BadInput("need ℓ+2 contraction values x_0…x_{ℓ+1}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ q.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let ctx = DeuringContext::new(q, &mut rng)?;
    let table = orders_to_j_big(&ctx, cfg.cache_dir.as_deref(), cfg.seed)?;
    let by_type: std::collections::HashMap<_, _> = table
        .iter()
        .enumerate()
        .map(|(i, e)| (e.order_type.clone(), i))
        .collect();

    // Interpolation nodes: every supersingular j-invariant, ordered by the
    // canonical type invariant (Galois twins directly after their entry).
    let mut order_idx: Vec<usize> = (0..table.len()).collect();
    order_idx.sort_by(|&a, &b| table[a].order_type.0.cmp(&table[b].order_type.0));
    let mut nodes = Vec::new();
    for &i in &order_idx {
        nodes.push(JNode { j: table[i].j, entry: i, conj: false });
        if !table[i].j.is_base() {
            nodes.push(JNode { j: ctx.f2.conj(table[i].j), entry: i, conj: true });
        }
    }
    if nodes.len() < lu + 2 {
        return Err(EvalError::InsufficientClasses {
            q,
            found: nodes.len(),
            need: lu + 2,
        });
    }
    nodes.truncate(lu + 2);

    // Neighbor lists per distinct entry among the selected nodes.
    let entries: Vec<usize> = {
        let mut e: Vec<usize> = nodes.iter().map(|n| n.entry).collect();
        e.dedup();
        e
    };
    let neighbor_lists: Result<std::collections::HashMap<usize, Vec<Fp2El>>, EvalError> = entries
        .par_iter()
        .map(|&i| {
            let js = neighbor_js(
                &ctx,
                &table,
                &by_type,
                &table[i],
                ell,
                cfg.seed ^ (i as u64).wrapping_mul(0x2545_f491_4f6c_dd1d),
            )?;
            Ok((i, js))
        })
        .collect();
    let neighbor_lists = neighbor_lists?;

    // Contract each node's neighbor polynomial against x, then interpolate
    // in Y through the ℓ+2 nodes.
    let t1 = ctx.tower(1);
    let points: Vec<(Ext, Ext)> = nodes
        .iter()
        .map(|node| {
            let js = &neighbor_lists[&node.entry];
            let roots: Vec<Ext> = js
                .iter()
                .map(|&v| t1.embed(if node.conj { ctx.f2.conj(v) } else { v }))
                .collect();
            let poly = Poly::from_roots(&t1, &roots);
            let mut y = t1.zero();
            for (m, &xm) in x.iter().enumerate() {
                let c = poly.coeff(&t1, m);
                y = t1.add(&y, &t1.scale(&c, xm % q));
            }
            (t1.embed(node.j), y)
        })
        .collect();
    let p_y = Poly::interpolate(&t1, &points).expect("nodes are distinct");

    // Galois stability: the contraction has coefficients in F_q.
    let mut out = vec![0u64; lu + 2];
    for (k, slot) in out.iter_mut().enumerate() {
        let c = p_y.coeff(&t1, k);
        let el = t1.coerce(&c).expect("coefficients lie in F_{q²}");
        assert!(el.is_base(), "contraction must be Galois-stable");
        *slot = el.c0;
    }
    Ok(out)
}

/// Collects per-prime residues in parallel with retry and prime
/// replacement: a prime whose evaluation keeps failing after reseeded
/// retries is swapped for the next admissible one.
fn collect_residues<F, G>(
    mut primes: Vec<u64>,
    eval_one: F,
    mut next_prime: G,
) -> Result<Vec<(u64, Vec<u64>)>, EvalError>
where
    F: Fn(u64, u64) -> Result<Vec<u64>, EvalError> + Sync,
    G: FnMut(u64) -> Option<u64>,
{
    let mut done: Vec<(u64, Vec<u64>)> = Vec::new();
    for round in 0..4 {
        let results: Vec<(u64, Result<Vec<u64>, EvalError>)> = primes
            .par_iter()
            .map(|&q| (q, eval_one(q, round)))
            .collect();
        let mut failed = Vec::new();
        let mut last_err = None;
        for (q, r) in results {
            match r {
                Ok(v) => done.push((q, v)),
                Err(e) => {
                    failed.push(q);
                    last_err = Some((q, e));
                }
            }
        }
        if failed.is_empty() {
            return Ok(done);
        }
        if round == 3 {
            let (q, e) = last_err.unwrap();
            return Err(EvalError::PrimeExhausted { q, source: Box::new(e) });
        }
        // First retry with fresh randomness, then replace the stragglers.
        if round >= 1 {
            let mut hi = done
                .iter()
                .map(|&(q, _)| q)
                .chain(failed.iter().copied())
                .max()
                .unwrap();
            let mut replacements = Vec::new();
            for _ in &failed {
                match next_prime(hi) {
                    Some(q) => {
                        hi = q;
                        replacements.push(q);
                    }
                    None => return Err(EvalError::Sieve(SieveError::StreamExhausted)),
                }
            }
            primes = replacements;
        } else {
            primes = failed;
        }
    }
    unreachable!("loop returns or errors by round 3")
}

fn finalize(p: u64, updates: &[(u64, Vec<u64>)]) -> Result<Vec<u64>, EvalError> {
    let moduli: Vec<u64> = updates.iter().map(|&(q, _)| q).collect();
    let mut acc = crt_precompute(&moduli, p);
    for (q, residues) in updates {
        crt_update(&mut acc, *q, residues)?;
    }
    Ok(crt_finalize(&acc)?)
}

/// `Φ_ℓ(j, Y) mod p` by the big-characteristic CRT strategy: lift the
/// powers of `j`, evaluate the contraction modulo enough small primes, and
/// reconstruct each coefficient through the explicit CRT.
pub fn modular_evaluation_big_char(
    p: u64,
    j: u64,
    ell: u64,
    cfg: &EvalConfig,
) -> Result<EvaluationResult, EvalError> {
    check_level(ell)?;
    if !is_prime_u64(p) || p == ell {
        return Err(EvalError::BadInput("p must be prime and distinct from ℓ"));
    }
    let mut x = vec![1u64];
    x.extend(lift_powers(p, j, ell));
    let bound = height_bound_bigchar(ell, p);
    let set = select_primes_bigchar(ell, &bound.bound());
    let start = 12 * (ell + 2) + 1;
    let updates = collect_residues(
        set.primes.clone(),
        |q, round| {
            let xq: Vec<u64> = x.iter().map(|&v| v % q).collect();
            let cfg_q = EvalConfig {
                seed: cfg.seed ^ round.wrapping_mul(0x0d1b_54a3_2d19_2ed0),
                ..cfg.clone()
            };
            special_supersingular_evaluation(q, ell, &xq, &cfg_q)
        },
        |hi| {
            let mut q = hi + 2;
            loop {
                if q < start {
                    q = start;
                }
                if is_prime_u64(q) {
                    return Some(q);
                }
                q += 2;
                if q > crate::sieve::SIEVE_CEILING {
                    return None;
                }
            }
        },
    )?;
    let coeffs = finalize(p, &updates)?;
    Ok(EvaluationResult::new(p, ell, j % p, coeffs))
}

/// `Φ_ℓ(j, Y) mod p` for supersingular `j ∈ F_p`, via the endomorphism
/// ring and the ℓ+1 ideals of norm ℓ — no ℓ-isogeny is computed.
pub fn supersingular_evaluation(
    p: u64,
    j: u64,
    ell: u64,
    cfg: &EvalConfig,
) -> Result<EvaluationResult, EvalError> {
    check_level(ell)?;
    if !is_prime_u64(p) || p == ell {
        return Err(EvalError::BadInput("p must be prime and distinct from ℓ"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ p.rotate_left(17));
    let ctx = DeuringContext::new(p, &mut rng)?;
    let conn = match endo_ring_ideal(&ctx, j, &mut rng) {
        Err(DeuringError::NotSupersingular(v)) => return Err(EvalError::NotSupersingular(v)),
        r => r?,
    };
    let alg = &ctx.alg;
    let order = right_order(alg, &conn);
    let ideals = ideals_of_norm_ell(alg, &order, ell, &mut rng).map_err(DeuringError::from)?;

    let class_number = p / 12
        + match p % 12 {
            1 => 0,
            5 | 7 => 1,
            _ => 2,
        };
    let use_big_table = (ell + 1) as f64 > class_number as f64 * cfg.big_set_fraction;

    let neighbors: Vec<Fp2El> = if use_big_table {
        let table = orders_to_j_big(&ctx, cfg.cache_dir.as_deref(), cfg.seed)?;
        let by_type: std::collections::HashMap<_, _> = table
            .iter()
            .enumerate()
            .map(|(i, e)| (e.order_type.clone(), i))
            .collect();
        ideals
            .iter()
            .map(|ik| {
                let ty = order_type(alg, &right_order(alg, ik));
                let target = &table[by_type[&ty]];
                if target.j.is_base() {
                    return target.j;
                }
                let composed = conn.product(alg, ik);
                let composed = composed.scaled(composed.den, 1);
                if ideals_are_equivalent(alg, &composed, &target.witness_ideal) {
                    target.j
                } else {
                    ctx.f2.conj(target.j)
                }
            })
            .collect()
    } else {
        // Small-set route: translate each composed ideal class directly;
        // carrying the class (rather than the bare right order) keeps the
        // Galois-conjugate choice exact.
        let js: Result<Vec<Fp2El>, DeuringError> = ideals
            .par_iter()
            .enumerate()
            .map(|(k, ik)| {
                let composed = conn.product(alg, ik);
                let composed = composed.scaled(composed.den, 1);
                let mut rng = ChaCha8Rng::seed_from_u64(
                    cfg.seed ^ (k as u64 + 1).wrapping_mul(0x6c62_272e_07bb_0142),
                );
                ideal_class_to_j(&ctx, &composed, &mut rng)
            })
            .collect();
        js?
    };

    let t1 = ctx.tower(1);
    let roots: Vec<Ext> = neighbors.iter().map(|&v| t1.embed(v)).collect();
    let poly = Poly::from_roots(&t1, &roots);
    let mut coeffs = vec![0u64; ell as usize + 2];
    for (k, slot) in coeffs.iter_mut().enumerate() {
        let c = poly.coeff(&t1, k);
        let el = t1.coerce(&c).expect("neighbor polynomial lives in F_{p²}");
        assert!(el.is_base(), "neighbor multiset must be Galois-stable");
        *slot = el.c0;
    }
    Ok(EvaluationResult::new(p, ell, j % p, coeffs))
}

/// The CRT primes for the big-level strategy, exposed separately because
/// the set depends only on `(j̄, B)` and is reusable across levels (a set
/// selected for some ℓ also suffices for any ℓ′ ≤ ℓ on the same `j̄`).
pub fn biglevel_primes(p: u64, j: u64, ell: u64) -> Result<CrtPrimeSet, EvalError> {
    let jbar = BigUint::from(j % p);
    let bound = height_bound_biglevel(ell, &jbar);
    Ok(select_primes_biglevel(&jbar, &bound.bound())?)
}

/// `Φ_ℓ(j, Y) mod p` by the big-level CRT strategy: run the supersingular
/// route modulo primes where `j̄` has supersingular reduction, then
/// reconstruct. Pass a cached prime set to skip the selection scan.
pub fn modular_evaluation_big_level(
    p: u64,
    j: u64,
    ell: u64,
    cfg: &EvalConfig,
    cached_primes: Option<&CrtPrimeSet>,
) -> Result<EvaluationResult, EvalError> {
    check_level(ell)?;
    if !is_prime_u64(p) || p == ell {
        return Err(EvalError::BadInput("p must be prime and distinct from ℓ"));
    }
    let jbar = j % p;
    let set = match cached_primes {
        Some(s) => s.clone(),
        None => biglevel_primes(p, j, ell)?,
    };
    let jb = BigUint::from(jbar);
    let updates = collect_residues(
        set.primes.clone(),
        |q, round| {
            let cfg_q = EvalConfig {
                seed: cfg.seed ^ round.wrapping_mul(0x0d1b_54a3_2d19_2ed0),
                ..cfg.clone()
            };
            let r = supersingular_evaluation(q, jbar % q, ell, &cfg_q)?;
            Ok(r.coefficients)
        },
        |hi| {
            // Next prime beyond `hi` with supersingular reduction of j̄.
            let mut q = hi + 2;
            while q <= crate::sieve::SIEVE_CEILING {
                if is_prime_u64(q)
                    && supersingular_reduction_test(&jb, q).unwrap_or(false)
                    && q != ell
                {
                    return Some(q);
                }
                q += 2;
            }
            None
        },
    )?;
    let coeffs = finalize(p, &updates)?;
    Ok(EvaluationResult::new(p, ell, jbar, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> EvalConfig {
        EvalConfig { seed: 42, ..EvalConfig::default() }
    }

    #[test]
    fn supersingular_single_class_p13() {
        // p = 13 has the single supersingular class j = 5; all three
        // 2-isogeny neighbors are 5 itself: (Y−5)³ = Y³ + 11Y² + 10Y + 5.
        let r = supersingular_evaluation(13, 5, 2, &cfg()).unwrap();
        assert_eq!(r.coefficients, vec![5, 10, 11, 1]);
    }

    #[test]
    fn supersingular_single_class_p5_j0() {
        let r = supersingular_evaluation(5, 0, 2, &cfg()).unwrap();
        assert_eq!(r.coefficients, vec![0, 0, 0, 1]);
    }

    #[test]
    fn supersingular_rejects_ordinary_j() {
        assert!(matches!(
            supersingular_evaluation(13, 1, 2, &cfg()),
            Err(EvalError::NotSupersingular(1))
        ));
    }

    #[test]
    fn level_and_characteristic_validation() {
        assert!(matches!(
            supersingular_evaluation(13, 5, 4, &cfg()),
            Err(EvalError::BadInput(_))
        ));
        assert!(matches!(
            modular_evaluation_big_char(15, 2, 3, &cfg()),
            Err(EvalError::BadInput(_))
        ));
    }

    #[test]
    fn special_evaluation_degree_zero_slice() {
        // x = (1, 0, …, 0) extracts the X⁰ slice of Φ₂ mod q: the monic
        // polynomial with coefficients (c₀, c₁, c₂, c₃) =
        // (−157464000000000, 8748000000, −162000, 1).
        let q = 59u64;
        let mut x = vec![0u64; 4];
        x[0] = 1;
        let got = special_supersingular_evaluation(q, 2, &x, &cfg()).unwrap();
        let expect: Vec<u64> = [
            -157464000000000i128,
            8748000000,
            -162000,
            1,
        ]
        .iter()
        .map(|&c| c.rem_euclid(q as i128) as u64)
        .collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn special_evaluation_matches_power_vector() {
        // x_i = j^i for supersingular j over F_q gives Φ₂(j, Y) mod q,
        // which must match the direct supersingular route.
        let q = 59u64;
        let table_cfg = cfg();
        for j in [0u64, 15, 28, 47] {
            // Only run for supersingular j in F_q.
            let direct = match supersingular_evaluation(q, j, 2, &table_cfg) {
                Ok(r) => r,
                Err(EvalError::NotSupersingular(_)) => continue,
                other => other.unwrap(),
            };
            let mut x = Vec::new();
            let mut acc = 1u64;
            for _ in 0..4 {
                x.push(acc);
                acc = acc * j % q;
            }
            let got = special_supersingular_evaluation(q, 2, &x, &table_cfg).unwrap();
            assert_eq!(got, direct.coefficients, "j = {j}");
        }
    }
}
