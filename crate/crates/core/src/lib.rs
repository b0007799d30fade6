//! Piatetski-Shapiro sequences `[n^c]`: certified floors, residue-class counts,
//! coprime tuple counts, exponential sums, exponent algebra and empirical error fits.

pub mod analysis;
pub mod coprime;
pub mod error;
pub mod exponent;
pub mod expsum;
pub mod interval;
pub mod order;
pub mod psseq;
pub mod realpow;

pub use error::{Error, Result};
pub use order::OrderSpec;
