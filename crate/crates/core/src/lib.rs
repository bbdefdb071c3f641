//! Circulant ridge-regression visual tracking, classical and simulated quantum.
//!
//! The crate is organised bottom-up:
//!
//! - [`circulant`]: circulant and block-circulant operators, their Fourier
//!   diagonalisation and singular triples.
//! - [`tracker`]: the classical tracker (Gaussian labels, ridge regression,
//!   response maps, frame-to-frame tracking).
//! - [`statevector`]: a dense multi-register statevector engine.
//! - [`hamiltonian`]: the extended circulant Hamiltonian and its simulation by
//!   a truncated-Taylor linear combination of unitaries.
//! - [`pipeline`]: quantum training (prepares `|w⟩`) and detection (prepares `|ŷ⟩`).
//! - [`state_prep`]: preparation of the label state `|y⟩`.
//! - [`applications`]: swap test, disappearance detection and motion matching.
//!
//! Heavy inner loops go through [`exec`], which uses rayon when the `parallel`
//! feature is enabled and falls back to plain iterators otherwise.

pub mod applications;
pub mod circulant;
pub mod corpus;
pub mod csvio;
pub mod error;
pub mod exec;
mod fft;
pub mod hamiltonian;
pub mod pipeline;
pub mod seed;
pub mod state_prep;
pub mod statevector;
pub mod tracker;

pub use error::{QvtError, Result};

/// Complex amplitude type used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
