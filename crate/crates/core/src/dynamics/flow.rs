//! Equations of motion in the duplicated phase space, stability matrix and
//! the combined state/tangent/quadrature integration.

use super::ode::{integrate, OdeOptions, OdeSolution, OdeSystem};
use crate::family::{FamilyDescriptor, PhasePoint};
use crate::hamiltonian::{EffectiveField, OperatorPolynomial};
use crate::linalg::CMat;
use crate::scalar::{gradient, hessian, jacobian, Dual, Scalar, ScalarField, VectorField};
use crate::{Error, Result};
use num_complex::Complex64 as C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct EomRhs {
    pub zdot: Vec<C64>,
    pub zbardot: Vec<C64>,
}

#[derive(Clone, Debug)]
pub struct StabilityBlocks {
    pub r11: CMat,
    pub r12: CMat,
    pub r21: CMat,
    pub r22: CMat,
}

impl StabilityBlocks {
    fn from_full(d: usize, r: &[C64]) -> Self {
        let n = 2 * d;
        let b = |r0: usize, c0: usize| CMat::from_fn(d, d, |i, j| r[(r0 + i) * n + c0 + j]);
        StabilityBlocks { r11: b(0, 0), r12: b(0, d), r21: b(d, 0), r22: b(d, d) }
    }
}

#[derive(Clone, Debug)]
pub struct TangentState {
    pub m11: CMat,
    pub m12: CMat,
    pub m21: CMat,
    pub m22: CMat,
}

impl TangentState {
    pub fn full(&self) -> CMat {
        let d = self.m11.nrows();
        let mut m = CMat::zeros(2 * d, 2 * d);
        m.view_mut((0, 0), (d, d)).copy_from(&self.m11);
        m.view_mut((0, d), (d, d)).copy_from(&self.m12);
        m.view_mut((d, 0), (d, d)).copy_from(&self.m21);
        m.view_mut((d, d), (d, d)).copy_from(&self.m22);
        m
    }
}

/// Right-hand side of the equations of motion as a vector field of `(z, zbar)`.
pub struct EomField<'a> {
    pub fam: &'a FamilyDescriptor,
    pub poly: &'a OperatorPolynomial,
    pub t: f64,
}

impl VectorField for EomField<'_> {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let d = self.fam.d();
        let field = EffectiveField::new(self.fam, self.poly, self.t);
        let (_, g) = gradient(&field, x)?;
        let (z, zbar) = x.split_at(d);
        let xi = self.fam.metric_inverse_generic(zbar, z)?;
        let mi = C64::new(0.0, -1.0 / self.fam.hbar());
        let mut out = vec![S::zero(); 2 * d];
        for j in 0..d {
            let mut a = S::zero();
            let mut b = S::zero();
            for k in 0..d {
                a += xi[k * d + j] * g[d + k];
                b += xi[j * d + k] * g[k];
            }
            out[j] = a.scale(mi);
            out[d + j] = b.scale(-mi);
        }
        Ok(out)
    }
}

pub fn eom_rhs(fam: &FamilyDescriptor, h: &OperatorPolynomial, p: &PhasePoint, t: f64) -> Result<EomRhs> {
    let d = fam.d();
    let v = EomField { fam, poly: h, t }.eval(&p.packed())?;
    Ok(EomRhs { zdot: v[..d].to_vec(), zbardot: v[d..].to_vec() })
}

pub fn stability_blocks(fam: &FamilyDescriptor, h: &OperatorPolynomial, p: &PhasePoint, t: f64) -> Result<StabilityBlocks> {
    let (_, r) = jacobian(&EomField { fam, poly: h, t }, &p.packed())?;
    Ok(StabilityBlocks::from_full(fam.d(), &r))
}

/// Directional derivative of the metric along `(dz, dzbar)`.
pub fn metric_derivative(fam: &FamilyDescriptor, p: &PhasePoint, dz: &[C64], dzbar: &[C64]) -> Result<CMat> {
    let z: Vec<Dual<C64>> = p.z.iter().zip(dz).map(|(&a, &b)| Dual::new(a, b)).collect();
    let zb: Vec<Dual<C64>> = p.zbar.iter().zip(dzbar).map(|(&a, &b)| Dual::new(a, b)).collect();
    let g = fam.metric_generic(&zb, &z)?;
    let d = fam.d();
    Ok(CMat::from_fn(d, d, |i, j| g[i * d + j].eps))
}

/// `B` in its metric-derivative form: `1/2 (zbardot d/dzbar - zdot d/dz) g - (i/hbar) d^2H/dz dzbar`.
pub(crate) fn b_second_form(fam: &FamilyDescriptor, p: &PhasePoint, vel: &EomRhs, hess_zzbar: &CMat) -> Result<CMat> {
    let minus_zdot: Vec<C64> = vel.zdot.iter().map(|v| -v).collect();
    let dg = metric_derivative(fam, p, &minus_zdot, &vel.zbardot)?;
    Ok(dg * C64::new(0.5, 0.0) - hess_zzbar * (I / fam.hbar()))
}

/// Accumulated path integrals carried alongside the flow.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quadratures {
    /// `int [1/2 (df/dzbar . zbardot - df/dz . zdot) - (i/hbar) H] dt`.
    pub lagrangian: C64,
    /// `int df/dt dt`: continuous change of the Kahler potential along the path.
    pub kahler_change: C64,
    /// `1/4 int tr[R22 - R11] dt`, i.e. `(i/hbar) I`.
    pub correction: C64,
    /// `ln det g(t) - ln det g(t_i)`.
    pub ln_det_g: C64,
    /// `ln det M22(t)`.
    pub ln_det_m22: C64,
    /// `int tr[xi B] dt`.
    pub tr_xi_b: C64,
}

const NQ: usize = 6;

#[derive(Clone, Debug, Default)]
pub struct TrajectoryDiagnostics {
    pub steps: usize,
    pub rejected_steps: usize,
    pub rhs_evals: usize,
    /// Largest `|H(t) - H(t_i)|` over stored points.
    pub max_energy_drift: f64,
    pub min_abs_det_m22: f64,
    pub min_abs_det_m: f64,
    pub newton_iterations: usize,
    pub residual_history: Vec<f64>,
    pub seed: Vec<C64>,
}

/// A classical solution sampled at the integrator's accepted steps.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub d: usize,
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    pub tangent: Vec<TangentState>,
    pub quadratures: Vec<Quadratures>,
    /// `H` at each stored point.
    pub energies: Vec<C64>,
    /// Prescribed final `zbar` when the trajectory solves a boundary-value problem.
    pub z_f_star: Option<Vec<C64>>,
    pub diagnostics: TrajectoryDiagnostics,
    solution: OdeSolution,
}

impl Trajectory {
    pub fn t_i(&self) -> f64 {
        self.times[0]
    }
    pub fn t_f(&self) -> f64 {
        *self.times.last().unwrap()
    }
    pub fn first(&self) -> &PhasePoint {
        &self.points[0]
    }
    pub fn last(&self) -> &PhasePoint {
        self.points.last().unwrap()
    }
    pub fn final_tangent(&self) -> &TangentState {
        self.tangent.last().unwrap()
    }
    pub fn final_quadratures(&self) -> &Quadratures {
        self.quadratures.last().unwrap()
    }

    /// Phase point at an arbitrary time inside the span, from dense output.
    pub fn sample(&self, t: f64) -> PhasePoint {
        let y = self.solution.sample(t);
        PhasePoint::from_packed(&y[..2 * self.d])
    }
}

/// What to carry alongside the phase-space state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Payload {
    /// State and tangent matrix only (Newton iterations).
    Tangent,
    /// Everything needed to assemble the propagator.
    Full,
}

struct Augmented<'a> {
    fam: &'a FamilyDescriptor,
    poly: &'a OperatorPolynomial,
    payload: Payload,
}

fn unpack_m(d: usize, y: &[C64]) -> CMat {
    let n = 2 * d;
    CMat::from_column_slice(n, n, &y[n..n + n * n])
}

/// Beyond these magnitudes a shot has run into a singularity of the flow.
const STATE_ESCAPE: f64 = 1e8;
const TANGENT_ESCAPE: f64 = 1e14;

impl OdeSystem for Augmented<'_> {
    fn accept(&self, t: f64, y: &[C64]) -> Result<()> {
        let n = 2 * self.fam.d();
        let big = |s: &[C64], lim: f64| s.iter().any(|v| !(v.norm() < lim));
        if big(&y[..n], STATE_ESCAPE) || big(&y[n..n + n * n], TANGENT_ESCAPE) {
            return Err(Error::StepFailure { t });
        }
        Ok(())
    }

    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) -> Result<()> {
        let fam = self.fam;
        let d = fam.d();
        let n = 2 * d;
        let x = &y[..n];
        let (vel, r) = jacobian(&EomField { fam, poly: self.poly, t }, x)?;
        dy[..n].copy_from_slice(&vel);
        let rm = CMat::from_row_slice(n, n, &r);
        let m = unpack_m(d, y);
        let mdot = &rm * &m;
        dy[n..n + n * n].copy_from_slice(mdot.as_slice());
        if self.payload == Payload::Tangent {
            return Ok(());
        }
        let q0 = n + n * n;
        let p = PhasePoint::from_packed(x);
        let v = EomRhs { zdot: vel[..d].to_vec(), zbardot: vel[d..].to_vec() };
        let field = EffectiveField::new(fam, self.poly, t);
        let (hval, _, hess) = hessian(&field, x)?;
        let k = fam.kahler(&p.zbar, &p.z)?;
        let dot = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(u, w)| u * w).sum::<C64>();
        let fzb = dot(&k.df_dzbar, &v.zbardot);
        let fz = dot(&k.df_dz, &v.zdot);
        dy[q0] = 0.5 * (fzb - fz) - I / fam.hbar() * hval;
        dy[q0 + 1] = fzb + fz;
        let tr = |a: &CMat| a.diagonal().iter().sum::<C64>();
        let blocks = StabilityBlocks::from_full(d, &r);
        dy[q0 + 2] = 0.25 * (tr(&blocks.r22) - tr(&blocks.r11));
        let xi = fam.metric_inverse(&p.zbar, &p.z)?;
        let gdot = metric_derivative(fam, &p, &v.zdot, &v.zbardot)?;
        dy[q0 + 3] = tr(&(&xi * gdot));
        let m22 = m.view((d, d), (d, d)).into_owned();
        let m22dot = mdot.view((d, d), (d, d)).into_owned();
        let m22inv = m22.try_inverse().ok_or(Error::FocalPoint { t, det: 0.0 })?;
        dy[q0 + 4] = tr(&(m22inv * m22dot));
        let hzzb = CMat::from_fn(d, d, |i, j| hess[i * n + d + j]);
        let b = b_second_form(fam, &p, &v, &hzzb)?;
        dy[q0 + 5] = tr(&(xi * b));
        Ok(())
    }
}

/// Integrates state, tangent matrix and (for `Payload::Full`) the path integrals.
#[allow(clippy::too_many_arguments)]
pub fn integrate_with(
    fam: &FamilyDescriptor,
    h: &OperatorPolynomial,
    z_i: &[C64],
    zbar_i: &[C64],
    t_i: f64,
    t_f: f64,
    tol: f64,
    payload: Payload,
) -> Result<Trajectory> {
    integrate_limited(fam, h, z_i, zbar_i, t_i, t_f, tol, payload, OdeOptions::with_tol(tol).max_steps)
}

/// As [`integrate_with`], failing with `StepFailure` after `max_steps` accepted or rejected steps.
#[allow(clippy::too_many_arguments)]
pub(crate) fn integrate_limited(
    fam: &FamilyDescriptor,
    h: &OperatorPolynomial,
    z_i: &[C64],
    zbar_i: &[C64],
    t_i: f64,
    t_f: f64,
    tol: f64,
    payload: Payload,
    max_steps: usize,
) -> Result<Trajectory> {
    let d = fam.d();
    let n = 2 * d;
    if z_i.len() != d || zbar_i.len() != d {
        return Err(Error::InvalidFamily(format!("expected {d} coordinates")));
    }
    fam.metric_inverse(zbar_i, z_i)?;
    let nq = if payload == Payload::Full { NQ } else { 0 };
    let mut y0 = vec![C64::default(); n + n * n + nq];
    y0[..d].copy_from_slice(z_i);
    y0[d..n].copy_from_slice(zbar_i);
    for k in 0..n {
        y0[n + k * n + k] = C64::new(1.0, 0.0);
    }
    let sys = Augmented { fam, poly: h, payload };
    let ode = OdeOptions { max_steps, ..OdeOptions::with_tol(tol) };
    let sol = integrate(&sys, t_i, t_f, &y0, &ode)?;

    let mut traj = Trajectory {
        d,
        times: sol.ts.clone(),
        points: Vec::with_capacity(sol.ts.len()),
        tangent: Vec::with_capacity(sol.ts.len()),
        quadratures: Vec::with_capacity(sol.ts.len()),
        energies: Vec::new(),
        z_f_star: None,
        diagnostics: TrajectoryDiagnostics {
            steps: sol.ts.len() - 1,
            rejected_steps: sol.rejected,
            rhs_evals: sol.rhs_evals,
            min_abs_det_m22: f64::INFINITY,
            min_abs_det_m: f64::INFINITY,
            ..Default::default()
        },
        solution: OdeSolution::default(),
    };
    for y in &sol.ys {
        let p = PhasePoint::from_packed(&y[..n]);
        let m = unpack_m(d, y);
        let ts = TangentState {
            m11: m.view((0, 0), (d, d)).into_owned(),
            m12: m.view((0, d), (d, d)).into_owned(),
            m21: m.view((d, 0), (d, d)).into_owned(),
            m22: m.view((d, d), (d, d)).into_owned(),
        };
        traj.diagnostics.min_abs_det_m22 = traj.diagnostics.min_abs_det_m22.min(ts.m22.determinant().norm());
        traj.diagnostics.min_abs_det_m = traj.diagnostics.min_abs_det_m.min(m.determinant().norm());
        let q = if payload == Payload::Full {
            let o = n + n * n;
            Quadratures {
                lagrangian: y[o],
                kahler_change: y[o + 1],
                correction: y[o + 2],
                ln_det_g: y[o + 3],
                ln_det_m22: y[o + 4],
                tr_xi_b: y[o + 5],
            }
        } else {
            Quadratures::default()
        };
        traj.points.push(p);
        traj.tangent.push(ts);
        traj.quadratures.push(q);
    }
    if payload == Payload::Full {
        for (p, &t) in traj.points.iter().zip(&traj.times) {
            traj.energies.push(EffectiveField::new(fam, h, t).eval(&p.packed())?);
        }
        let e0 = traj.energies[0];
        traj.diagnostics.max_energy_drift = traj.energies.iter().map(|e| (e - e0).norm()).fold(0.0, f64::max);
    }
    traj.solution = sol;
    Ok(traj)
}

/// Full integration of the flow with tangent matrix and path integrals.
pub fn integrate_trajectory(
    fam: &FamilyDescriptor,
    h: &OperatorPolynomial,
    z_i: &[C64],
    zbar_i: &[C64],
    t_i: f64,
    t_f: f64,
    tol: f64,
) -> Result<Trajectory> {
    integrate_with(fam, h, z_i, zbar_i, t_i, t_f, tol, Payload::Full)
}

