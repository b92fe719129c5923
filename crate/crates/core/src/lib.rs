//! Numerical core for quantum Zeno dynamics under stochastically timed
//! projective measurements.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: dense complex matrices, Kronecker products, Hermitian
//!   eigendecomposition and spectral time evolution.
//! * [`spin`]: local spin Hamiltonians, Zeno subspaces and the
//!   single-measurement survival function `q(mu)`.
//! * [`distributions`]: waiting-time densities, their moments, samplers and
//!   tangent-space perturbation directions.
//! * [`quadrature`]: adaptive Gauss-Kronrod integration.
//! * [`fisher`]: most-probable survival probability, Fisher information
//!   operator and matrix, Cramér-Rao bounds and Zeno-limit diagnostics.
//!
//! All times are in seconds and all angular frequencies in rad/s.

pub mod distributions;
pub mod error;
pub mod fisher;
pub mod linalg;
pub mod quadrature;
pub mod spin;

pub use distributions::{IntervalDistribution, MomentVector, PerturbationDirection, PointMass};
pub use error::{Result, ZenoError};
pub use linalg::{kron_chain, ComplexMatrix, SpectralDecomposition, StateVector};
pub use spin::{SpinModel, SurvivalFunction, SurvivalModel, ZenoSubspace};
