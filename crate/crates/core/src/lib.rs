pub mod bernoulli;
pub mod error;
pub mod padic;
pub mod report;
pub mod residue;
pub mod scan;
pub mod selftest;
pub mod series;
pub mod snf;
pub mod structure;
pub mod weierstrass;

pub use error::{AnomalyKind, Error, Result};
