//! Torsion invariants of finite Hilbert chain complexes, based free integer
//! chain complexes, and a small zoo of manifold models (intervals, circles,
//! tori, Moore complexes, Z/2-equivariant circles).
//!
//! The layers build on each other:
//!
//! * [`linalg`] — operators between finite-dimensional inner-product spaces:
//!   adjoints, the modified determinant `det⊥`, spectral density functions,
//!   finite zeta functions.
//! * [`chain`] — finite Hilbert chain complexes: Laplacians, Hodge splitting,
//!   Betti numbers, torsion, mapping cones, additivity.
//! * [`zchain`] — based free ℤ-complexes: Smith normal form homology,
//!   realification, homology Hilbert structures κ and structure-corrected
//!   torsion ρ(C; κ).
//! * [`models`] — factories for the concrete cell complexes.
//! * [`manifold`] — topological torsion ρ_top via harmonic structures.
//! * [`zeta`] — analytic torsion ρ_an from closed-form Laplacian spectra and
//!   the Cheeger–Müller style comparisons.
//! * [`equivariant`] — ℤ/2-equivariant analytic, topological and
//!   Poincaré torsion on the circle examples.
//!
//! Every sign and direction convention that had to be fixed is chosen by an
//! explicit selector (see [`zchain::ConventionSweep`]) and recorded in
//! [`document::ConventionRecord`] so that reported numbers are reproducible.

pub mod chain;
pub mod document;
pub mod equivariant;
pub mod linalg;
pub mod manifold;
pub mod models;
pub mod samples;
pub mod tolerance;
pub mod verify;
pub mod zchain;
pub mod zeta;

use thiserror::Error;

/// Error type shared by the whole crate.
#[derive(Debug, Error)]
pub enum TorsionError {
    #[error("gram matrix is not symmetric positive definite: {0}")]
    GramNotPositiveDefinite(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("boundary maps do not compose to zero: {0}")]
    NotAChainComplex(String),
    #[error("maps do not commute with the differentials: {0}")]
    NotAChainMap(String),
    #[error("sequence is not degreewise short exact: {0}")]
    NotExact(String),
    #[error("group action is invalid: {0}")]
    InvalidAction(String),
    #[error("unsupported model: {0}")]
    Unsupported(String),
    #[error("homology pattern not supported by the harmonic structure: {0}")]
    UnsupportedHomology(String),
    #[error("model carries no fundamental cycle")]
    MissingFundamentalCycle,
    #[error("zeta function has a pole at s = 1/2")]
    PoleAtHalf,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, TorsionError>;

/// (-1)^n for a possibly negative degree.
pub(crate) fn parity_sign(n: i64) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}
