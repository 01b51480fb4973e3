//! Wiener-Hopf factorization and homotopy invariants for matrix functions
//! on finite tori.

pub mod calculus;
pub mod error;
pub mod grid;
pub mod index;
pub mod poly;
pub mod series;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
