//! Desk-scale computations around canonical measures on surfaces: CW
//! surface models and their Galois covers, Lück approximation of
//! L²-Betti numbers, discrete canonical measures on cover towers, and
//! analytic canonical forms on hyperelliptic curves and the disk.

pub mod acceptance;
pub mod complexes;
pub mod covers;
pub mod curves;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod hodge;
pub mod l2approx;

pub use error::{Error, Result};
