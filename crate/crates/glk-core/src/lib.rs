//! Exact arithmetic and bookkeeping tools for mod-`p^m` deformation
//! calculations on 2x2 representations: residue arithmetic, prime scanning,
//! tame local cohomology dimensions, Selmer-dimension accounting,
//! purity-constrained characteristic polynomials, and a seeded simulator of
//! the inductive lifting process.

pub mod charpoly;
pub mod deform;
pub mod local;
pub mod mat2;
pub mod poly;
pub mod primes;
pub mod rep_source;
pub mod residue;
pub mod selmer;
pub mod sim;

pub use mat2::Mat2;
pub use residue::{CyclotomicChar, Modulus, ResidueInt};
