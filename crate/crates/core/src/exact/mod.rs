//! Exact propagation in the finite Hilbert space, used as the reference for
//! every semiclassical comparison.

mod schwinger;

pub use schwinger::{schwinger_crosscheck, schwinger_image, SchwingerReport};

use crate::family::{canonical_cutoff_for, FamilyDescriptor, FamilyKind};
use crate::hamiltonian::OperatorPolynomial;
use crate::linalg::CMat;
use crate::{Error, Result};
use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

/// Largest Hilbert dimension the canonical refinement will try.
pub const MAX_DIM: usize = 4096;
const MAX_STEPS: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactMethodKind {
    Eigendecomposition,
    SteppedMagnus2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactResult {
    pub amplitude: C64,
    pub method: ExactMethodKind,
    pub step_count: usize,
    pub error_estimate: f64,
}

/// The evolution operator `U(t_f, t_i)` together with bookkeeping.
#[derive(Clone, Debug)]
pub struct Evolution {
    pub unitary: CMat,
    pub method: ExactMethodKind,
    pub step_count: usize,
    pub error_estimate: f64,
}

pub trait ExactMethod: Send + Sync {
    fn name(&self) -> &'static str;
    fn evolve(&self, h: &OperatorPolynomial, t_i: f64, t_f: f64, tol: f64) -> Result<Evolution>;
}

/// Diagonalizes `H` once; only valid for constant coefficients.
pub struct Eigen;

impl ExactMethod for Eigen {
    fn name(&self) -> &'static str {
        "eigen"
    }

    fn evolve(&self, h: &OperatorPolynomial, t_i: f64, t_f: f64, _tol: f64) -> Result<Evolution> {
        if h.is_time_dependent() {
            return Err(Error::UnknownStrategy("eigen requires a time-independent Hamiltonian".into()));
        }
        if t_f == t_i {
            let dim = h.family().hilbert_dim();
            return Ok(Evolution {
                unitary: CMat::identity(dim, dim),
                method: ExactMethodKind::Eigendecomposition,
                step_count: 0,
                error_estimate: 0.0,
            });
        }
        let m = h.matrix(t_i);
        let dim = m.nrows();
        let hbar = h.family().hbar();
        let norm = crate::linalg::norm1(&m);
        let eig = SymmetricEigen::new(m);
        let dt = t_f - t_i;
        let phases = DVector::from_iterator(dim, eig.eigenvalues.iter().map(|&l| C64::new(0.0, -l * dt / hbar).exp()));
        let v = &eig.eigenvectors;
        let unitary = v * CMat::from_diagonal(&phases) * v.adjoint();
        Ok(Evolution {
            unitary,
            method: ExactMethodKind::Eigendecomposition,
            step_count: 1,
            error_estimate: f64::EPSILON * dim as f64 * (1.0 + norm * dt.abs() / hbar),
        })
    }
}

/// Products of midpoint exponentials with the step count doubled. The midpoint
/// rule is symmetric, so its error has only even powers of the step and one
/// Richardson step `U_2n + (U_2n - U_n)/3` cancels the leading term. Doubling
/// stops once two successive extrapolated operators agree within `tol`.
pub struct Magnus2 {
    pub initial_steps: usize,
}

impl Default for Magnus2 {
    fn default() -> Self {
        Magnus2 { initial_steps: 8 }
    }
}

fn magnus_product(h: &OperatorPolynomial, t_i: f64, t_f: f64, steps: usize) -> CMat {
    let hbar = h.family().hbar();
    let dt = (t_f - t_i) / steps as f64;
    let dim = h.family().hilbert_dim();
    let mut u = CMat::identity(dim, dim);
    let scale = C64::new(0.0, -dt / hbar);
    for k in 0..steps {
        let tm = t_i + (k as f64 + 0.5) * dt;
        let step = (h.matrix(tm) * scale).exp();
        u = step * u;
    }
    u
}

impl ExactMethod for Magnus2 {
    fn name(&self) -> &'static str {
        "magnus2"
    }

    fn evolve(&self, h: &OperatorPolynomial, t_i: f64, t_f: f64, tol: f64) -> Result<Evolution> {
        let mut steps = self.initial_steps.max(1);
        let mut raw = magnus_product(h, t_i, t_f, steps);
        let mut prev: Option<CMat> = None;
        loop {
            steps *= 2;
            let next_raw = magnus_product(h, t_i, t_f, steps);
            let next = &next_raw + (&next_raw - &raw) / C64::from(3.0);
            if let Some(p) = &prev {
                let change = crate::linalg::max_abs(&(&next - p));
                if change < tol {
                    return Ok(Evolution {
                        unitary: next,
                        method: ExactMethodKind::SteppedMagnus2,
                        step_count: steps,
                        error_estimate: change / 15.0,
                    });
                }
                if steps >= MAX_STEPS {
                    return Err(Error::NonConvergentStepping { steps, change });
                }
            }
            raw = next_raw;
            prev = Some(next);
        }
    }
}

pub struct ExactRegistry {
    methods: Vec<Box<dyn ExactMethod>>,
}

impl ExactRegistry {
    pub fn with_defaults() -> Self {
        ExactRegistry { methods: vec![Box::new(Eigen), Box::new(Magnus2::default())] }
    }

    pub fn register(&mut self, m: Box<dyn ExactMethod>) {
        self.methods.retain(|x| x.name() != m.name());
        self.methods.push(m);
    }

    pub fn names(&self) -> Vec<&str> {
        self.methods.iter().map(|m| m.name()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn ExactMethod> {
        self.methods
            .iter()
            .find(|m| m.name() == name)
            .map(|m| m.as_ref())
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }
}

/// Default method: diagonalization for constant `H`, stepping otherwise.
pub fn default_method(h: &OperatorPolynomial) -> Box<dyn ExactMethod> {
    if h.is_time_dependent() {
        Box::new(Magnus2::default())
    } else {
        Box::new(Eigen)
    }
}

fn amplitude_with(
    method: &dyn ExactMethod,
    h: &OperatorPolynomial,
    z_i: &[C64],
    z_f: &[C64],
    t_i: f64,
    t_f: f64,
    tol: f64,
) -> Result<ExactResult> {
    let fam = h.family();
    let psi_i = DVector::from_vec(fam.state_vector(z_i, true)?.amplitudes);
    let psi_f = DVector::from_vec(fam.state_vector(z_f, true)?.amplitudes);
    let ev = method.evolve(h, t_i, t_f, tol)?;
    let amplitude = psi_f.dotc(&(&ev.unitary * psi_i));
    Ok(ExactResult { amplitude, method: ev.method, step_count: ev.step_count, error_estimate: ev.error_estimate })
}

/// Same polynomial on a canonical family with a different cutoff.
fn with_cutoff(h: &OperatorPolynomial, cutoff: usize) -> Result<OperatorPolynomial> {
    let fam = h.family();
    let FamilyKind::Canonical { d, .. } = *fam.kind() else {
        return Ok(h.clone());
    };
    let f2 = FamilyDescriptor::canonical(d, cutoff)?.with_hbar(fam.hbar())?;
    Ok(OperatorPolynomial::from_terms(&f2, h.terms().to_vec()))
}

/// `<z_f| T exp(-(i/hbar) int H dt) |z_i>` with normalized endpoint states.
///
/// Canonical families are refined by doubling the cutoff until the amplitude
/// moves by less than `tol`.
pub fn propagate_exact(
    fam: &FamilyDescriptor,
    h: &OperatorPolynomial,
    z_i: &[C64],
    z_f: &[C64],
    t_i: f64,
    t_f: f64,
    tol: f64,
) -> Result<ExactResult> {
    debug_assert!(fam == h.family());
    propagate_exact_with(default_method(h).as_ref(), fam, h, z_i, z_f, t_i, t_f, tol)
}

#[allow(clippy::too_many_arguments)]
pub fn propagate_exact_with(
    method: &dyn ExactMethod,
    fam: &FamilyDescriptor,
    h: &OperatorPolynomial,
    z_i: &[C64],
    z_f: &[C64],
    t_i: f64,
    t_f: f64,
    tol: f64,
) -> Result<ExactResult> {
    let FamilyKind::Canonical { d, cutoff } = *fam.kind() else {
        return amplitude_with(method, h, z_i, z_f, t_i, t_f, tol);
    };
    if t_f == t_i {
        // Nothing spreads; the endpoint states were already checked against the cutoff.
        return amplitude_with(method, h, z_i, z_f, t_i, t_f, tol);
    }
    let zmax = z_i.iter().chain(z_f).map(|c| c.norm()).fold(0.0, f64::max);
    let mut cut = cutoff.max(canonical_cutoff_for(zmax));
    let dim_of = |c: usize| (c + 1).checked_pow(d as u32).unwrap_or(usize::MAX);
    if dim_of(cut) > MAX_DIM {
        return Err(Error::TruncationInsufficient { cutoff: cut, tail: f64::NAN });
    }
    let mut prev = amplitude_with(method, &with_cutoff(h, cut)?, z_i, z_f, t_i, t_f, tol)?;
    loop {
        let next_cut = cut * 2;
        if dim_of(next_cut) > MAX_DIM {
            return Err(Error::TruncationInsufficient { cutoff: cut, tail: f64::NAN });
        }
        let next = amplitude_with(method, &with_cutoff(h, next_cut)?, z_i, z_f, t_i, t_f, tol)?;
        let change = (next.amplitude - prev.amplitude).norm();
        if change < tol {
            return Ok(ExactResult { error_estimate: next.error_estimate.max(change), ..next });
        }
        cut = next_cut;
        prev = next;
    }
}

/// Full evolution operator in the family basis, without cutoff refinement.
pub fn evolution_operator(h: &OperatorPolynomial, t_i: f64, t_f: f64, tol: f64) -> Result<Evolution> {
    default_method(h).evolve(h, t_i, t_f, tol)
}
