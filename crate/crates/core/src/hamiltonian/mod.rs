//! Hamiltonians as normal-ordered generator polynomials.

mod effective;
mod generator;
mod poly;

pub use effective::{effective_hamiltonian, effective_value, EffectiveField, EffectiveHamiltonianEval};
pub use generator::Generator;
pub use poly::{build_poly, poly_from, Coefficient, OperatorPolynomial, Term, TermSpec, TimeProfile};

use crate::family::FamilyDescriptor;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub fn matrix_representation(fam: &FamilyDescriptor, h: &OperatorPolynomial, t: f64) -> DMatrix<C64> {
    debug_assert!(fam == h.family());
    h.matrix(t)
}
