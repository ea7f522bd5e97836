//! Knot topology and biorthogonal entanglement of a one-dimensional
//! non-Hermitian four-band lattice.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: couplings, real-space and Bloch Hamiltonians, symmetry checks
//! - [`spectral`]: dense eigensolvers, closed-form Bloch bands, band tracking
//! - [`braid`]: braid words of the energy strings and their closure invariants
//! - [`topology`]: spectral winding number, analytic phase boundaries, sweeps
//! - [`manybody`]: half-filled biorthogonal ground states, entanglement
//!   entropy, central-charge fits and fidelity susceptibility
//! - [`io`]: configuration, CSV/JSON/SVG outputs and run manifests

pub mod braid;
pub mod error;
pub mod io;
pub mod linalg;
pub mod manybody;
pub mod model;
pub mod parallel;
pub mod spectral;
pub mod topology;

pub use error::{Error, Result};
pub use model::{LatticeSpec, ModelParams, RepresentativePoint};
pub use num_complex::Complex64 as c64;
