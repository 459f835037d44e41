//! Scattering data for the full-line matrix Schrödinger equation
//! `-psi'' + V(x) psi = k^2 psi` with an n x n Hermitian, piecewise-constant
//! potential.
//!
//! The crate computes Jost solutions and the four matrix scattering
//! coefficients by exact transfer-matrix propagation, composes fragment data
//! through transition matrices, assembles and verifies the 2n x 2n scattering
//! matrix, locates bound states on the positive imaginary axis, checks
//! Levinson's theorem, and realizes the equivalent half-line 2n x 2n problem.

pub mod analysis;
pub mod cli;
pub mod factorization;
pub mod jost;
pub mod linalg;
pub mod potential;
pub mod spectral;

pub use analysis::{assemble_s_matrix, verify_identities, IdentityReport};
pub use factorization::{compose, compose_scattering, TransitionKind, TransitionMatrix};
pub use jost::{jost_left, jost_right, scattering_data, ScatteringData, SolutionState};
pub use linalg::{ComplexMatrix, HermitianEigen, LinalgError};
pub use potential::{Fragment, HalfLinePotential, PiecewisePotential, PotentialError};
pub use spectral::{bound_states, genericity_degree, halfline_map, levinson_check, SpectralReport};
