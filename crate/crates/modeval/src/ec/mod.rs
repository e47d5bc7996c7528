//! Elliptic curves over `F_{p²}` and its even-degree extensions.
//!
//! Curves are short Weierstrass models `y² = x³ + a·x + b` with
//! coefficients in `F_{p²}`; points live in a chosen [`Tower`] so that
//! torsion subgroups of composite order become rational. The module
//! provides group arithmetic, torsion bases certified by the Weil pairing,
//! Vélu/Kohel isogenies from kernel data, a supersingularity test, and the
//! `F_p`-rational class-group action used to walk between curves with
//! commutative Frobenius structure.

mod curve;
mod isogeny;
mod pairing;
mod supersingular;

pub use curve::{Curve, Point};
pub use isogeny::{Isogeny, isomorphism_scaling};
pub use pairing::{dlog_in_mu, weil_pairing};
pub use supersingular::{group_action_step, is_supersingular};

use crate::arith::ArithError;
use thiserror::Error;

/// Errors from elliptic-curve algorithms.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EcError {
    /// The requested torsion subgroup is not rational over the given tower.
    #[error("E[{m}] is not rational over F_{{p^{{2·{k}}}}}")]
    TowerTooSmall { m: u64, k: usize },
    /// A Miller line vanished at an evaluation point; the inputs are
    /// (projectively) dependent or a fresh shift is needed.
    #[error("degenerate pairing evaluation")]
    PairingDegenerate,
    /// A kernel polynomial or codomain coefficient failed to descend to F_{p²}.
    #[error("isogeny data is not rational over F_{{p²}}")]
    NotRational,
    /// No square root of −p exists modulo ℓ, so the ℓ-isogeny step does not
    /// split into Frobenius eigenspaces.
    #[error("ell = {ell} is not split for this prime")]
    NotSplit { ell: u64 },
    /// The two curves are not isomorphic (distinct j-invariants or no
    /// admissible scaling factor over F_{p²}).
    #[error("curves are not isomorphic over F_{{p²}}")]
    NoIsomorphism,
    /// A discrete logarithm in μ_m had no solution (corrupt pairing input).
    #[error("discrete logarithm in mu_{m} failed")]
    DlogFailed { m: u64 },
    /// Point-sampling or basis search exhausted its retry budget.
    #[error("search exhausted while {0}")]
    SearchExhausted(&'static str),
    #[error(transparent)]
    Arith(#[from] ArithError),
}
