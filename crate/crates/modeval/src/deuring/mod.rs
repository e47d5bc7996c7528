//! The explicit dictionary between maximal quaternion orders and
//! supersingular curves over `F_{p²}`.
//!
//! The translation is anchored at a starting curve `E₀/F_p` with complex
//! multiplication by a small imaginary quadratic order, whose endomorphism
//! ring is known exactly: Frobenius `π` realizes `j` (with `j² = −p`) and an
//! explicit degree-`q` endomorphism `ι` realizes `i` (with `i² = −q`). From
//! there:
//!
//! * [`ideal_to_j`] converts an integral left ideal of powersmooth norm
//!   into the isogeny with that kernel ideal and returns the exact
//!   codomain j-invariant;
//! * [`order_to_j`] composes a connecting ideal, the powersmooth rewriting
//!   from [`crate::quat::klpt_powersmooth`] and [`ideal_to_j`];
//! * [`orders_to_j_small_set`] / [`orders_to_j_big`] translate several
//!   orders at once, the latter producing a table covering every order
//!   type together with witness ideals;
//! * [`endo_ring`] inverts the dictionary: given a supersingular
//!   `j ∈ F_p` it returns a maximal order isomorphic to `End(E_j)` by a
//!   meet-in-the-middle walk through the `F_p`-rational isogeny graph.

mod endo;
mod kernel;
mod order_j;
mod starting;

pub use endo::{endo_ring, endo_ring_ideal};
pub use kernel::{ideal_to_j, kernel_to_ideal};
pub use order_j::{ideal_class_to_j, order_to_j, orders_to_j_big, orders_to_j_small_set, JTableEntry};
pub use starting::{CmEndo, DeuringContext};

use crate::ec::EcError;
use crate::quat::QuatError;
use thiserror::Error;

#[cfg(test)]
mod tests;

/// Errors from the order ↔ curve translation.
#[derive(Debug, Error)]
pub enum DeuringError {
    /// No curve in the built-in CM table has supersingular reduction at `p`
    /// with usable parameters.
    #[error("no starting curve with known endomorphism ring is available at p = {0}")]
    StartingCurveUnavailable(u64),
    /// The input j-invariant is ordinary (or otherwise outside the
    /// supersingular graph).
    #[error("the curve with j = {0} is not supersingular")]
    NotSupersingular(u64),
    /// A bounded search (walk frontier, kernel search, …) ran out of budget.
    #[error("search budget exceeded while {0}")]
    SearchBudgetExceeded(&'static str),
    /// An elliptic-curve layer failure.
    #[error(transparent)]
    Ec(#[from] EcError),
    /// A quaternion layer failure.
    #[error(transparent)]
    Quat(#[from] QuatError),
}
