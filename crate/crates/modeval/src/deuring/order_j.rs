//! Translating maximal orders to j-invariants.
//!
//! Each maximal order `𝒪` is connected to `𝒪₀` by the ideal
//! `I(𝒪₀, 𝒪)`; rewriting it to powersmooth norm and computing the
//! corresponding isogeny yields the exact j-invariant of the curve with
//! `End ≅ 𝒪` determined by that ideal class (equivalent ideals give the
//! same codomain, so the class of the witness pins one member of a
//! Galois-conjugate pair).

use std::io::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arith::Fp2El;
use crate::quat::{
    connecting_ideal, enumerate_maximal_order_types, klpt_powersmooth, Lattice, OrderType, Quat,
};

use super::kernel::ideal_to_j;
use super::{DeuringContext, DeuringError};

/// One row of the full order-type ↔ j-invariant table.
#[derive(Clone, Debug)]
pub struct JTableEntry {
    /// The canonical type invariant of the maximal order.
    pub order_type: OrderType,
    /// The j-invariant of the curve whose endomorphism ring has this type
    /// and whose ideal class matches the witness.
    pub j: Fp2El,
    /// A reduced left `𝒪₀`-ideal whose right order has this type; its
    /// class identifies `j` exactly among `{j, j^p}`.
    pub witness_ideal: Lattice,
}

/// Translates one maximal order into the j-invariant of a curve with that
/// endomorphism ring (one member of the conjugate pair `{j, j^p}`,
/// selected by the class of the connecting ideal).
pub fn order_to_j<R: rand::Rng>(
    ctx: &DeuringContext,
    order: &Lattice,
    rng: &mut R,
) -> Result<Fp2El, DeuringError> {
    let conn = connecting_ideal(&ctx.alg, &ctx.order0, order);
    ideal_class_to_j(ctx, &conn, rng)
}

/// Translates a left `𝒪₀`-ideal (of arbitrary norm) into the j-invariant
/// selected by its class.
pub fn ideal_class_to_j<R: rand::Rng>(
    ctx: &DeuringContext,
    ideal: &Lattice,
    rng: &mut R,
) -> Result<Fp2El, DeuringError> {
    let mut last = DeuringError::SearchBudgetExceeded("powersmooth rewriting kept failing");
    for _ in 0..4 {
        let out = match klpt_powersmooth(&ctx.alg, &ctx.order0, ideal, rng) {
            Ok(out) => out,
            Err(err) => {
                last = err.into();
                continue;
            }
        };
        match ideal_to_j(ctx, &out.ideal, &out.norm_factors, rng) {
            Ok(j) => return Ok(j),
            Err(err) => last = err,
        }
    }
    Err(last)
}

/// Translates a small set of maximal orders in parallel. The seed makes
/// the internal randomness reproducible; results are exact and
/// run-independent.
pub fn orders_to_j_small_set(
    ctx: &DeuringContext,
    orders: &[Lattice],
    seed: u64,
) -> Result<Vec<Fp2El>, DeuringError> {
    orders
        .par_iter()
        .enumerate()
        .map(|(idx, order)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (idx as u64).wrapping_mul(0x9e37_79b9));
            order_to_j(ctx, order, &mut rng)
        })
        .collect()
}

/// Builds the full table of order types with their j-invariants and
/// witness ideals, covering the entire supersingular graph at `p`. When a
/// cache directory is given, the table is read from / written to
/// `jtable_p<p>.txt` inside it.
pub fn orders_to_j_big(
    ctx: &DeuringContext,
    cache_dir: Option<&Path>,
    seed: u64,
) -> Result<Vec<JTableEntry>, DeuringError> {
    let cache_file = cache_dir.map(|d| d.join(format!("jtable_p{}.txt", ctx.p)));
    if let Some(path) = &cache_file {
        if let Ok(text) = std::fs::read_to_string(path) {
            if let Some(entries) = parse_table(&text) {
                return Ok(entries);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let types = enumerate_maximal_order_types(&ctx.alg, &ctx.order0, &mut rng)?;
    let entries: Result<Vec<JTableEntry>, DeuringError> = types
        .par_iter()
        .enumerate()
        .map(|(idx, entry)| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ (idx as u64).wrapping_mul(0x517c_c1b7));
            let j = ideal_class_to_j(ctx, &entry.witness, &mut rng)?;
            Ok(JTableEntry {
                order_type: entry.ty.clone(),
                j,
                witness_ideal: entry.witness,
            })
        })
        .collect();
    let entries = entries?;
    if let Some(path) = &cache_file {
        let _ = write_table(path, &entries);
    }
    Ok(entries)
}

fn write_table(path: &Path, entries: &[JTableEntry]) -> std::io::Result<()> {
    let mut out = String::new();
    for e in entries {
        let mut fields: Vec<String> = Vec::new();
        for row in &e.order_type.0 {
            for v in row {
                fields.push(v.to_string());
            }
        }
        fields.push(e.j.c0.to_string());
        fields.push(e.j.c1.to_string());
        for q in e.witness_ideal.basis() {
            for v in [q.t, q.x, q.y, q.z, q.d] {
                fields.push(v.to_string());
            }
        }
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())
}

fn parse_table(text: &str) -> Option<Vec<JTableEntry>> {
    let mut entries = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let vals: Vec<i128> = line
            .split_whitespace()
            .map(|s| s.parse::<i128>().ok())
            .collect::<Option<Vec<_>>>()?;
        // 9 type entries + 2 for j + 4 quaternions of 5 coordinates.
        if vals.len() != 9 + 2 + 20 {
            return None;
        }
        let mut ty = [[0i128; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                ty[r][c] = vals[3 * r + c];
            }
        }
        let j = Fp2El {
            c0: u64::try_from(vals[9]).ok()?,
            c1: u64::try_from(vals[10]).ok()?,
        };
        let mut gens = Vec::new();
        for g in 0..4 {
            let o = 11 + 5 * g;
            gens.push(Quat::new(vals[o], vals[o + 1], vals[o + 2], vals[o + 3], vals[o + 4]));
        }
        let witness = Lattice::from_generators(&gens).ok()?;
        entries.push(JTableEntry {
            order_type: OrderType(ty),
            j,
            witness_ideal: witness,
        });
    }
    if entries.is_empty() {
        None
    } else {
        Some(entries)
    }
}
