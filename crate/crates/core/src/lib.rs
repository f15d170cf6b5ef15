//! Unextendible-entanglement measures of bipartite quantum states.
//!
//! Conventions: tensor products are row-major with the left factor as the slow
//! index; all logarithms are base 2 unless a name says otherwise; states are
//! validated on construction (Hermitian, PSD within tolerance, unit trace).

pub mod applications;
pub mod cli;
pub mod conic;
pub mod divergences;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod states;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianOperator};
pub use states::BipartiteState;
