//! Exact computation of word measures on symmetric groups and their wreath
//! products, built on Stallings core graphs.
//!
//! The crate computes stable Fourier coefficients of `w`-random elements of
//! `S_N` and `G ≀ S_N` as exact rational functions of `N`, primitivity-rank
//! invariants with their critical extensions, Möbius inversions over
//! graph-morphism posets, and bounded-degree searches for stable-primitivity
//! diagrams. Everything is cross-validated against independent brute-force
//! oracles in the test suite.

pub mod error;
pub mod words;
pub mod graphs;
pub mod ratfun;
pub mod enumerate;
pub mod whitehead;
pub mod session;
pub mod algebraic;
pub mod mobius;
pub mod characters;
pub mod oracle;
pub mod stable;
pub mod cli;

pub use error::{Error, Result};
