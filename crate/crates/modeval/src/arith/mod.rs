//! Finite field arithmetic: `F_p`, `F_{p²}`, and even-degree extension towers.
//!
//! The quadratic extension `F_{p²} = F_p(ω)` is fixed once per characteristic
//! with `tr(ω) = 0` and `ω²` the smallest quadratic non-residue. Higher
//! towers `F_{p^{2k}}` are built on demand; `F_{p²}` embeds into every tower
//! through the stored image of `ω`, and elements that happen to lie in the
//! image can be coerced back down.

mod fp;
mod fp2;
mod tower;

pub use fp::Fp;
pub use fp2::{Fp2, Fp2El};
pub use tower::{Ext, Tower};

use thiserror::Error;

/// Errors from field construction and embeddings.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    /// A coercion target element does not lie in the image of the embedding.
    #[error("element does not lie in the embedded subfield")]
    NotInImage,
    /// Inversion of zero or square root of a non-square where one was required.
    #[error("arithmetic domain error: {0}")]
    Domain(&'static str),
}
