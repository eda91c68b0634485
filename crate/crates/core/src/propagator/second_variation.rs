//! Second-variation matrices `A`, `B`, `C`, the metric square root and the
//! transformed matrices used by the Riccati route.

use crate::dynamics::{b_second_form, eom_rhs, metric_derivative, stability_blocks, EomRhs};
use crate::family::{FamilyDescriptor, PhasePoint};
use crate::hamiltonian::{effective_hamiltonian, EffectiveField, OperatorPolynomial};
use crate::linalg::{sqrtm, sylvester_sym, CMat};
use crate::scalar::{gradient, hessian_generic, Dual, Scalar, ScalarField};
use crate::{Error, Result};
use num_complex::Complex64 as C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SvForm {
    /// Second derivatives of the Lagrangian, including the total time derivative.
    Definition,
    /// Metric derivatives along the velocity plus Hessian of `H`.
    Metric,
    /// Products of the metric with blocks of the stability matrix.
    Flow,
}

#[derive(Clone, Debug)]
pub struct SecondVariationMatrices {
    pub a: CMat,
    pub b: CMat,
    pub c: CMat,
    pub atil: CMat,
    pub btil: CMat,
    pub ctil: CMat,
    pub theta: CMat,
    pub theta_dot: CMat,
}

pub(crate) struct KahlerField<'a>(pub(crate) &'a FamilyDescriptor);

impl ScalarField for KahlerField<'_> {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<S> {
        let d = self.0.d();
        self.0.kahler_value(&x[d..], &x[..d])
    }
}

/// `(i/hbar) L` as a function of `(z, zbar, zdot, zbardot)`.
struct LagrangianField<'a> {
    fam: &'a FamilyDescriptor,
    poly: &'a OperatorPolynomial,
    t: f64,
}

impl ScalarField for LagrangianField<'_> {
    fn eval<S: Scalar>(&self, y: &[S]) -> Result<S> {
        let d = self.fam.d();
        let (_, df) = gradient(&KahlerField(self.fam), &y[..2 * d])?;
        let h = EffectiveField::new(self.fam, self.poly, self.t).eval(&y[..2 * d])?;
        let mut acc = S::zero();
        for k in 0..d {
            acc += (df[d + k] * y[3 * d + k] - df[k] * y[2 * d + k]).scale(C64::new(0.5, 0.0));
        }
        Ok(acc - h.scale(I / self.fam.hbar()))
    }
}

fn block(h: &[C64], n: usize, r0: usize, c0: usize, d: usize) -> CMat {
    CMat::from_fn(d, d, |i, j| h[(r0 + i) * n + c0 + j])
}

fn definition_form(fam: &FamilyDescriptor, poly: &OperatorPolynomial, p: &PhasePoint, t: f64, v: &EomRhs) -> Result<[CMat; 3]> {
    let d = fam.d();
    let n = 4 * d;
    let lf = LagrangianField { fam, poly, t };
    let y: Vec<C64> = p.z.iter().chain(&p.zbar).chain(&v.zdot).chain(&v.zbardot).copied().collect();
    let h = hessian_generic(&lf, &y)?;
    // Total time derivative of the Hessian along the flow.
    let yd: Vec<Dual<C64>> = y
        .iter()
        .enumerate()
        .map(|(k, &val)| {
            let e = if k < d {
                v.zdot[k]
            } else if k < 2 * d {
                v.zbardot[k - d]
            } else {
                C64::default()
            };
            Dual::new(val, e)
        })
        .collect();
    let hd: Vec<C64> = hessian_generic(&lf, &yd)?.iter().map(|x| x.eps).collect();
    let a = block(&h, n, 0, 0, d) - block(&hd, n, 0, 2 * d, d);
    let b = block(&h, n, 0, d, d);
    let c = block(&h, n, d, d, d) - block(&hd, n, d, 3 * d, d);
    Ok([a, b, c])
}

fn metric_form(fam: &FamilyDescriptor, poly: &OperatorPolynomial, p: &PhasePoint, t: f64, v: &EomRhs) -> Result<[CMat; 3]> {
    let d = fam.d();
    let eh = effective_hamiltonian(fam, poly, p, t)?;
    let ih = I / fam.hbar();
    let mut a = -&eh.hess_zz * ih;
    let mut c = -&eh.hess_zbarzbar * ih;
    let zero = vec![C64::default(); d];
    for k in 0..d {
        let mut e = zero.clone();
        e[k] = C64::new(1.0, 0.0);
        let dgz = metric_derivative(fam, p, &e, &zero)?;
        let dgzb = metric_derivative(fam, p, &zero, &e)?;
        for j in 0..d {
            for m in 0..d {
                a[(j, k)] += dgz[(j, m)] * v.zbardot[m];
                c[(j, k)] -= dgzb[(m, j)] * v.zdot[m];
            }
        }
    }
    let b = b_second_form(fam, p, v, &eh.hess_zzbar)?;
    Ok([a, b, c])
}

fn flow_form(fam: &FamilyDescriptor, poly: &OperatorPolynomial, p: &PhasePoint, t: f64) -> Result<[CMat; 3]> {
    let g = fam.metric(&p.zbar, &p.z)?;
    let r = stability_blocks(fam, poly, p, t)?;
    let a = -&g * &r.r21;
    let c = g.transpose() * &r.r12;
    let b = (r.r11.transpose() * &g - &g * &r.r22) * C64::new(0.5, 0.0);
    Ok([a, b, c])
}

/// `A`, `B`, `C` in the requested representation.
pub fn abc(fam: &FamilyDescriptor, poly: &OperatorPolynomial, p: &PhasePoint, t: f64, form: SvForm) -> Result<[CMat; 3]> {
    match form {
        SvForm::Definition => definition_form(fam, poly, p, t, &eom_rhs(fam, poly, p, t)?),
        SvForm::Metric => metric_form(fam, poly, p, t, &eom_rhs(fam, poly, p, t)?),
        SvForm::Flow => flow_form(fam, poly, p, t),
    }
}

/// All second-variation matrices at a trajectory point, using the metric form.
pub fn second_variation(fam: &FamilyDescriptor, poly: &OperatorPolynomial, p: &PhasePoint, t: f64) -> Result<SecondVariationMatrices> {
    let v = eom_rhs(fam, poly, p, t)?;
    let [a, b, c] = metric_form(fam, poly, p, t, &v)?;
    let g = fam.metric(&p.zbar, &p.z)?;
    let theta = sqrtm(&g).map_err(|_| Error::SqrtBranchFailure { t })?;
    let gdot = metric_derivative(fam, p, &v.zdot, &v.zbardot)?;
    let theta_dot = sylvester_sym(&theta, &gdot).ok_or(Error::SqrtBranchFailure { t })?;
    let ti = theta.clone().try_inverse().ok_or(Error::SqrtBranchFailure { t })?;
    let tit = ti.transpose();
    let atil = &ti * &a * &tit;
    let comm = (&ti * &theta_dot - &theta_dot * &ti) * C64::new(0.5, 0.0);
    let btil = &ti * &b * &ti + comm;
    let ctil = &tit * &c * &ti;
    Ok(SecondVariationMatrices { a, b, c, atil, btil, ctil, theta, theta_dot })
}
