//! Reduced propagator from the Riccati equation for `G11`.

use super::second_variation::second_variation;
use crate::dynamics::ode::{integrate, OdeOptions, OdeSystem};
use crate::dynamics::{EomField, Trajectory};
use crate::family::{FamilyDescriptor, PhasePoint};
use crate::hamiltonian::OperatorPolynomial;
use crate::linalg::{max_abs, CMat};
use crate::scalar::VectorField;
use crate::{Error, Result};
use num_complex::Complex64 as C64;

#[derive(Clone, Debug)]
pub struct RiccatiState {
    pub g11: CMat,
    pub ln_kred_accum: C64,
}

#[derive(Clone, Debug)]
pub struct RiccatiResult {
    pub ln_kred: C64,
    pub final_state: RiccatiState,
    /// Largest `||Theta^2 - g||` seen at accepted steps.
    pub max_sqrt_residual: f64,
    pub steps: usize,
}

struct RiccatiSystem<'a> {
    fam: &'a FamilyDescriptor,
    poly: &'a OperatorPolynomial,
    sqrt_residual: std::sync::Mutex<f64>,
}

const BLOWUP: f64 = 1e12;

impl OdeSystem for RiccatiSystem<'_> {
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) -> Result<()> {
        let d = self.fam.d();
        let n = 2 * d;
        let vel = EomField { fam: self.fam, poly: self.poly, t }.eval(&y[..n])?;
        dy[..n].copy_from_slice(&vel);
        let p = PhasePoint::from_packed(&y[..n]);
        let sv = second_variation(self.fam, self.poly, &p, t).map_err(|e| match e {
            Error::SqrtBranchFailure { .. } => Error::SqrtBranchFailure { t },
            other => other,
        })?;
        let g = CMat::from_column_slice(d, d, &y[n..n + d * d]);
        let gdot = &sv.ctil + sv.btil.transpose() * &g + &g * &sv.atil * &g + &g * &sv.btil;
        dy[n..n + d * d].copy_from_slice(gdot.as_slice());
        dy[n + d * d] = 0.5 * (&sv.atil * &g).trace();
        Ok(())
    }

    fn accept(&self, t: f64, y: &[C64]) -> Result<()> {
        let d = self.fam.d();
        let n = 2 * d;
        let g = CMat::from_column_slice(d, d, &y[n..n + d * d]);
        if !(max_abs(&g) <= BLOWUP) {
            return Err(Error::RiccatiBlowup { t });
        }
        let p = PhasePoint::from_packed(&y[..n]);
        let metric = self.fam.metric(&p.zbar, &p.z)?;
        let theta = crate::linalg::sqrtm(&metric).map_err(|_| Error::SqrtBranchFailure { t })?;
        let r = max_abs(&(&theta * &theta - &metric));
        let mut m = self.sqrt_residual.lock().unwrap();
        *m = m.max(r);
        Ok(())
    }
}

/// Integrates the Riccati equation along the trajectory with `G11(t_i) = 0` and
/// returns `ln K_red = 1/2 int tr[Atil G11] dt`.
pub fn riccati_reduced_propagator(
    fam: &FamilyDescriptor,
    poly: &OperatorPolynomial,
    traj: &Trajectory,
    tol: f64,
) -> Result<RiccatiResult> {
    let d = fam.d();
    let n = 2 * d;
    let mut y0 = vec![C64::default(); n + d * d + 1];
    y0[..n].copy_from_slice(&traj.first().packed());
    let sys = RiccatiSystem { fam, poly, sqrt_residual: std::sync::Mutex::new(0.0) };
    sys.accept(traj.t_i(), &y0)?;
    let sol = integrate(&sys, traj.t_i(), traj.t_f(), &y0, &OdeOptions::with_tol(tol))?;
    let y = sol.ys.last().unwrap();
    let g11 = CMat::from_column_slice(d, d, &y[n..n + d * d]);
    let ln_kred = y[n + d * d];
    let max_sqrt_residual = *sys.sqrt_residual.lock().unwrap();
    Ok(RiccatiResult {
        ln_kred,
        final_state: RiccatiState { g11, ln_kred_accum: ln_kred },
        max_sqrt_residual,
        steps: sol.ts.len() - 1,
    })
}
