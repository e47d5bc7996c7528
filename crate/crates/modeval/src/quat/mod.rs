//! Arithmetic in the rational quaternion algebra `B = (−q, −p | ℚ)`
//! ramified exactly at `p` and infinity.
//!
//! Multiplication follows `i² = −q`, `j² = −p`, `k = ij = −ji`,
//! so `ik = −qj`, `ki = qj`, `jk = pi`, `kj = −pi`, `k² = −qp`.
//! Elements carry a common denominator; lattices are stored as canonical
//! Hermite normal forms over the basis `(1, i, j, k)`. All coordinate
//! arithmetic is checked `i128`; determinant-sized quantities go through
//! `BigInt`.

mod element;
mod ideal;
mod klpt;
mod lattice;
mod order;
mod reduce;

pub use element::{Quat, QuatAlgebra};
pub use ideal::{
    connecting_ideal, equivalent_prime_ideal, ideal_times_quat, ideals_are_equivalent,
    ideals_of_norm_ell, left_order, right_order,
};
pub use klpt::{klpt_powersmooth, KlptOutput};
pub use lattice::Lattice;
pub use order::{enumerate_maximal_order_types, maximal_orders_above, order_type, OrderType};
pub use reduce::{lll_reduce, shortest_vectors};

use thiserror::Error;

/// Errors from quaternion-side algorithms.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuatError {
    /// The algebra parameters do not describe B_{p,∞} (wrong ramification).
    #[error("unsupported prime/parameter combination q = {q}, p = {p}")]
    UnsupportedPrime { q: i128, p: i128 },
    /// A lattice that should have full rank is degenerate.
    #[error("lattice is not of full rank")]
    DegenerateLattice,
    /// A bounded search ran out of candidates.
    #[error("search exhausted while {0}")]
    SearchExhausted(&'static str),
    /// The KLPT-style rewriting failed for all retries.
    #[error("failed to rewrite the ideal with powersmooth norm")]
    KlptFailure,
}
