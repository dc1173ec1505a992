//! Fermionic-mode quantum information under the parity super-selection rule.
//!
//! States and operators live on finite sets of fermionic modes and are stored
//! as dense matrices over the occupation-number basis. The crate provides the
//! wedge product, the signed partial trace, parity block classification,
//! channels in Kraus, Choi and Stinespring form, Schmidt decomposition and
//! purification, a Jordan–Wigner comparison and a no-signalling protocol
//! simulation.

pub mod channels;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod jordan_wigner;
pub mod linalg;
pub mod nosignal;
pub mod ptrace;
pub mod random;
pub mod ssr;

pub use error::{FermiError, Result};
pub use fock::{
    apply_annihilation, apply_creation, embed_local, index_pattern, max_modes, number_operator, parity_operator,
    pattern_index, vacuum_overlap, wedge_operators, wedge_states, Basis, CMatrix, CVector, FockOperator, FockState,
    ModeSet, OccPattern, Parity, C64, DEFAULT_MAX_MODES, DEFAULT_TOL,
};
