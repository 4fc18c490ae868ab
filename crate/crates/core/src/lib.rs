//! Reduction-type entanglement witnesses for multi-qudit systems.
//!
//! The crate builds the witness family, reduces its validity question to an
//! exact linear program over a simplex of product-state coordinates, and
//! cross-checks every claim with a brute-force product-state search.

pub mod bell_diagonal;
pub mod choi;
pub mod detection;
pub mod error;
pub mod exact;
pub mod io;
pub mod subset;
pub mod tensor;
pub mod lp;
pub mod oracle;
pub mod region;
pub mod regression;
pub mod witness;

pub use error::{Error, Result};
pub use exact::Rational;
pub use subset::Subset;
pub use tensor::{Dims, Operator, Shape, StateVector};
pub use witness::{SpectrumSummary, WitnessParams};
