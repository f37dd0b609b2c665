//! Construction and numerical certification of quantumness and entanglement
//! witnesses on finite-dimensional bipartite operator algebras.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense complex matrices, Kronecker/direct-sum structure and a
//!   cyclic Jacobi Hermitian eigensolver.
//! - [`algebra`]: reducible bipartite algebras `⊕_{k,l} B(C^{n_k}) ⊗ B(C^{m_l})`
//!   and their classical states.
//! - [`states`]: named states and seeded samplers.
//! - [`witnesses`]: swap, Bell-CHSH, anticommutator and shifted-swap witnesses.
//! - [`verify`]: QW/EW certification, see-saw product-state minimisation and
//!   randomized probes of the commutativity characterisation.
//! - [`scan`]: tabular parameter sweeps.
//!
//! All full-space operators use the lexicographic product basis `|ij⟩ = |i⟩⊗|j⟩`.

pub mod algebra;
pub mod error;
pub mod linalg;
pub mod scan;
pub mod states;
pub mod verify;
pub mod witnesses;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, EigenSystem, HermitianOperator, C64};
pub use states::DensityMatrix;
