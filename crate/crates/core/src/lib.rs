//! Numerics for the spin-1 AKLT chain.
//!
//! The chain is treated three ways that must agree:
//!
//! * as a finite periodic matrix product state, checked against brute-force
//!   state-vector contraction ([`aklt`]);
//! * as an infinite-volume finitely correlated state built from the transfer
//!   channel and its iterated insertion maps ([`fcs`]);
//! * as the observation process of a causal hidden quantum Markov model whose
//!   hidden memory is the virtual spin-1/2 ([`hqmm`]).
//!
//! Basis conventions are global: the virtual qubit uses `(|up>, |down>)` at
//! indices `(0, 1)`, the physical spin-1 uses `(|+>, |0>, |->)` at `(0, 1, 2)`,
//! and on multi-site spaces site 1 is the slowest-varying Kronecker factor.

pub mod aklt;
pub mod channels;
pub mod error;
pub mod fcs;
pub mod hqmm;
pub mod linalg;
pub mod sampling;
pub mod serde_repr;
pub mod stats;

pub use error::{Error, Result};
pub use linalg::{c64, ComplexMatrix, C64};
