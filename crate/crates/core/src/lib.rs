//! Numerical core for the DISD tripartite model `A + C + B`: constrained
//! Hamiltonians, exact unitary evolution, the perturbative product-form
//! approximation, information-transfer diagnostics and sequential
//! decomposition of global unitaries.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod decompose;
pub mod error;
pub mod evolve;
pub mod locality;
pub mod model;
pub mod qcore;

pub use error::{Error, Result};
