//! Deterministic dense complex linear algebra for small multipartite
//! Hilbert spaces.

pub mod info;
pub mod linalg;
pub mod random;
pub mod state;

pub use info::{mutual_information, trace_distance, vn_entropy};
pub use linalg::{herm_propagator, kron, CMatrix, CVector, Propagator, C64};
pub use random::haar_unitary;
pub use state::{partial_trace, DensityMatrix, Dims, StateVector};
