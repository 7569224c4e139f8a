//! Numerics for quantum channels built from a few randomly drawn Kraus
//! unitaries, and for deciding how close such a channel is to the
//! completely depolarizing channel `X -> tr(X) Id/d`.
//!
//! The crate is `no_std` (it needs `alloc`). Everything that touches the
//! filesystem, the command line or threads lives in the `epsrand` crate.
//!
//! Module map:
//!
//! - [`linalg`]: dense complex matrices, Hermitian eigensolver, singular
//!   values and Schatten norms.
//! - [`channels`]: uniform-weight unitary channels, Choi matrix, Kraus rank.
//! - [`ensembles`]: Haar sampling, Fourier–Weyl and Pauli families, isotropy.
//! - [`cert`]: pure-state nets, the net bound, the sup-norm estimator and
//!   the certification verdict.
//! - [`experiments`]: seeded Monte Carlo studies with per-trial records.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod cert;
pub mod channels;
pub mod ensembles;
mod error;
pub mod experiments;
pub mod linalg;
mod math;
pub mod rng;

pub use channels::{DensityMatrix, KrausChannel};
pub use ensembles::{EnsembleSpec, UnitaryEnsemble};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianEigen};
pub use num_complex::Complex64;

/// Largest Hilbert-space dimension accepted anywhere in the crate.
pub const MAX_DIM: usize = 64;
/// Largest number of Kraus unitaries in one channel.
pub const MAX_KRAUS: usize = 20_000;
/// Largest pure-state net that will be built or loaded.
pub const MAX_NET_SIZE: usize = 100_000;
