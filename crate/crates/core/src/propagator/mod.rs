//! Assembly of the semiclassical propagator from converged trajectories.

mod derivatives;
mod riccati;
mod routes;
mod second_variation;

pub use derivatives::{action_derivatives_check, ActionDerivativeReport, DerivativeCheck};
pub use riccati::{riccati_reduced_propagator, RiccatiResult, RiccatiState};
pub use routes::{ReducedPropagatorRoute, RiccatiRoute, RouteRegistry, TangentRoute, TraceRoute};
pub use second_variation::{abc, second_variation, SecondVariationMatrices, SvForm};

use crate::dynamics::{enumerate_trajectories, stability_blocks, BvpOptions, SeedStrategy, Trajectory};
use crate::family::FamilyDescriptor;
use crate::hamiltonian::OperatorPolynomial;
use crate::{Error, Result};
use num_complex::Complex64 as C64;

/// Below this `|det M22|` the prefactor is treated as divergent.
pub const FOCAL_THRESHOLD: f64 = 1e-12;

fn conj(v: &[C64]) -> Vec<C64> {
    v.iter().map(|c| c.conj()).collect()
}

/// `(i/hbar) S`: the Lagrangian integral plus the boundary term, with the
/// Kahler potential at `t_f` continued along the path from its value at `t_i`.
pub fn action(fam: &FamilyDescriptor, traj: &Trajectory) -> Result<C64> {
    let p0 = traj.first();
    let f_i = fam.kahler_value(&p0.zbar, &p0.z)?;
    let q = traj.final_quadratures();
    let mut f_end = f_i + q.kahler_change;
    if let Some(zfs) = &traj.z_f_star {
        // First-order correction for the boundary residual zbar(t_f) - z_f*.
        let pf = traj.last();
        let k = fam.kahler(&pf.zbar, &pf.z)?;
        for j in 0..fam.d() {
            f_end += k.df_dzbar[j] * (zfs[j] - pf.zbar[j]);
        }
    }
    Ok(q.lagrangian + 0.5 * f_end + 0.5 * f_i)
}

/// `(i/hbar) I`.
pub fn correction_term(traj: &Trajectory) -> C64 {
    traj.final_quadratures().correction
}

/// `Lambda = -1/2 f(z_f*, z_f) - 1/2 f(z_i*, z_i)`.
pub fn normalization_term(fam: &FamilyDescriptor, z_i: &[C64], z_f: &[C64]) -> Result<f64> {
    let ff = fam.kahler_value(&conj(z_f), z_f)?;
    let fi = fam.kahler_value(&conj(z_i), z_i)?;
    Ok(-0.5 * ff.re - 0.5 * fi.re)
}

fn check_focal(traj: &Trajectory) -> Result<()> {
    for (tan, &t) in traj.tangent.iter().zip(&traj.times) {
        let det = tan.m22.determinant().norm();
        if det < FOCAL_THRESHOLD {
            return Err(Error::FocalPoint { t, det });
        }
    }
    Ok(())
}

/// `ln C = 1/2 { 1/2 [ln det g(t_i) - ln det g(t_f)] - ln det M22(t_f) }`, continuous in time.
pub fn prefactor(traj: &Trajectory) -> Result<C64> {
    check_focal(traj)?;
    let q = traj.final_quadratures();
    Ok(0.5 * (-0.5 * q.ln_det_g - q.ln_det_m22))
}

/// `ln C(t)` at every stored point.
pub fn prefactor_history(traj: &Trajectory) -> Vec<C64> {
    traj.quadratures.iter().map(|q| 0.5 * (-0.5 * q.ln_det_g - q.ln_det_m22)).collect()
}

/// `ln C(t)` from pointwise principal logarithms, for comparison modulo `2 pi i`.
pub fn prefactor_pointwise(fam: &FamilyDescriptor, traj: &Trajectory) -> Result<Vec<C64>> {
    let p0 = traj.first();
    let g0 = fam.metric(&p0.zbar, &p0.z)?.determinant().ln();
    traj.points
        .iter()
        .zip(&traj.tangent)
        .map(|(p, tan)| {
            let g = fam.metric(&p.zbar, &p.z)?.determinant().ln();
            Ok(0.25 * (g0 - g) - 0.5 * tan.m22.determinant().ln())
        })
        .collect()
}

/// Largest `|tr[xi B] - 1/2 tr[R11 - R22]|` over the stored points of `traj`.
pub fn trace_identity_residual(fam: &FamilyDescriptor, poly: &OperatorPolynomial, traj: &Trajectory) -> Result<f64> {
    let mut worst = 0.0f64;
    for (p, &t) in traj.points.iter().zip(&traj.times) {
        let [_, b, _] = abc(fam, poly, p, t, SvForm::Metric)?;
        let xi = fam.metric_inverse(&p.zbar, &p.z)?;
        let r = stability_blocks(fam, poly, p, t)?;
        let lhs = (xi * b).trace();
        let rhs = 0.5 * (r.r11.trace() - r.r22.trace());
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// One trajectory's share of the propagator.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagatorContribution {
    pub is_over_hbar: C64,
    pub ii_over_hbar: C64,
    pub lambda: f64,
    pub ln_prefactor: C64,
    pub amplitude: C64,
}

impl PropagatorContribution {
    pub fn from_trajectory(fam: &FamilyDescriptor, traj: &Trajectory) -> Result<Self> {
        let z_i = &traj.first().z;
        let zfs = traj.z_f_star.clone().unwrap_or_else(|| traj.last().zbar.clone());
        let z_f = conj(&zfs);
        let is = action(fam, traj)?;
        let ii = correction_term(traj);
        let lambda = normalization_term(fam, z_i, &z_f)?;
        let lc = prefactor(traj)?;
        let amplitude = (is + ii + lambda + lc).exp();
        Ok(PropagatorContribution { is_over_hbar: is, ii_over_hbar: ii, lambda, ln_prefactor: lc, amplitude })
    }

    /// `ln K_red` by the trace formula: `ln C + (i/hbar) I`.
    pub fn ln_kred(&self) -> C64 {
        self.ln_prefactor + self.ii_over_hbar
    }

    /// Flagged by the amplitude bound `|exp((i/hbar) S + Lambda)| > 1 + 1e-6`.
    pub fn is_spurious(&self) -> bool {
        (self.is_over_hbar + self.lambda).exp().norm() > 1.0 + 1e-6
    }
}

pub fn assemble_ksc(contributions: &[PropagatorContribution]) -> Result<C64> {
    if contributions.is_empty() {
        return Err(Error::EmptyContributionSet);
    }
    Ok(contributions.iter().map(|c| c.amplitude).sum())
}

#[derive(Clone, Debug)]
pub struct SemiclassicalResult {
    pub ksc: C64,
    pub contributions: Vec<PropagatorContribution>,
    pub trajectories: Vec<Trajectory>,
    /// Trajectories found but dropped (focal points or the spurious filter).
    pub discarded: Vec<(Trajectory, String)>,
}

/// Enumerates trajectories, builds their contributions and sums them.
#[allow(clippy::too_many_arguments)]
pub fn semiclassical_propagator(
    fam: &FamilyDescriptor,
    poly: &OperatorPolynomial,
    z_i: &[C64],
    z_f: &[C64],
    t_i: f64,
    t_f: f64,
    strategy: &dyn SeedStrategy,
    opts: &BvpOptions,
    filter_spurious: bool,
) -> Result<SemiclassicalResult> {
    let trajs = enumerate_trajectories(fam, poly, z_i, &conj(z_f), t_i, t_f, strategy, opts);
    let mut contributions = Vec::new();
    let mut kept = Vec::new();
    let mut discarded = Vec::new();
    for t in trajs {
        match PropagatorContribution::from_trajectory(fam, &t) {
            Ok(c) if filter_spurious && c.is_spurious() => discarded.push((t, "spurious".to_string())),
            Ok(c) => {
                contributions.push(c);
                kept.push(t);
            }
            Err(e) => discarded.push((t, e.to_string())),
        }
    }
    let ksc = assemble_ksc(&contributions)?;
    Ok(SemiclassicalResult { ksc, contributions, trajectories: kept, discarded })
}
