//! Semiclassical propagators in generalized coherent-state representations.
//!
//! The crate covers canonical, spin and SU(n) bosonic coherent states. It
//! builds Hamiltonians from generator polynomials, solves the complexified
//! boundary-value problem for classical trajectories, assembles the
//! semiclassical propagator and checks it against exact finite-basis
//! propagation.

pub mod error;
pub mod dynamics;
pub mod exact;
pub mod family;
pub mod hamiltonian;
pub mod linalg;
pub mod propagator;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};
pub use family::{FamilyDescriptor, FamilyKind, HilbertVector, PhasePoint};
pub use num_complex::Complex64 as C64;
