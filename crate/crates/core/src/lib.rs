//! Bound states in the continuum for a chain of two-level emitters coupled
//! to a one-dimensional waveguide with massive dispersion.
//!
//! The crate is organised along the computation:
//!
//! * [`model`]: dispersion, form factor and derived scalars.
//! * [`selfenergy`]: evanescent corrections `β_j`, the self-energy matrix
//!   and the inverse propagator, by contour integration with an independent
//!   principal-value path.
//! * [`waves`]: spectrum of the discrete Laplacian and classification of
//!   excitation waves into exact, deformed and superradiant.
//! * [`bic`]: photon wavefunction reconstruction and field diagnostics.
//! * [`multimer`]: block construction of multimerized states.
//! * [`oracle`]: brute-force diagonalization of a discretized Hamiltonian.

pub mod bic;
pub mod error;
pub mod linalg;
pub mod model;
pub mod multimer;
pub mod oracle;
pub mod quad;
pub mod selfenergy;
pub mod waves;

pub use error::{Error, Result};
pub use model::{Dispersion, EmitterArray, WaveguideModel};
pub use num_complex::Complex64;
pub use selfenergy::{PropagatorBundle, QuadratureConfig};
