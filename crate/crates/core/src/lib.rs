//! Dark-state analysis for driven, dissipative N-level systems.
//!
//! A [`LevelSystem`](model::LevelSystem) declares ground and excited manifolds,
//! laser couplings and spontaneous-decay channels. From it the crate
//!
//! * solves for a time-independent rotating frame and reports the laser
//!   frequency constraints imposed by coupling loops ([`rwa`]),
//! * builds the column-stacked Lindblad generator and its non-Hermitian /
//!   quantum-jump split ([`liouville`]),
//! * classifies every stationary dark state: degenerate ground groups, the
//!   kernels of the group coupling blocks, multiplicity, purity and the Rabi
//!   conditions needed when the kernel is generically empty ([`classify`]),
//! * propagates density matrices and computes asymptotic states from the
//!   conserved quantities of the generator ([`dynamics`]).
//!
//! Ready-made systems (Λ, zigzag, fan, paired two-level, Rb-87 hyperfine
//! schemes) live in [`presets`].

pub mod classify;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod linalg;
pub mod liouville;
pub mod model;
pub mod parallel;
pub mod presets;
pub mod report;
pub mod rwa;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

/// Largest supported Hilbert-space dimension (Liouvillian ≤ 1024 × 1024).
pub const MAX_LEVELS: usize = 32;
