//! Construction, verification and rate analysis of second-order lifts of
//! detailed-balanced quantum Markov semigroups on matrix algebras.

pub mod constructions;
pub mod error;
pub mod la;
pub mod opalg;
pub mod lindblad;
pub mod lifting;
pub mod random;
pub mod spectra;

pub use error::{Error, Result};
