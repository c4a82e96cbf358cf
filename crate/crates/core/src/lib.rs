//! Desk-scale simulator of a heterogeneous quantum-network link: a trapped-ion
//! node emits a polarization-entangled photon that is frequency converted,
//! stored in an atomic-frequency-comb memory, and verified by tomography and a
//! CHSH test.

// Negated comparisons like `!(x > 0.0)` are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod budget;
pub mod error;
pub mod photon_chain;
pub mod qm_node;
pub mod qstate;
pub mod rng;
pub mod scenario;
pub mod ti_node;
pub mod tomography;

pub use error::{Error, Result};
