//! The effective classical Hamiltonian `H(zbar, z; t) = {zbar*|H|z} / {zbar*|z}`.

use super::poly::OperatorPolynomial;
use crate::family::{FamilyDescriptor, PhasePoint};
use crate::linalg::CMat;
use crate::scalar::{hessian, Scalar, ScalarField};
use crate::{Error, Result};
use num_complex::Complex64 as C64;

#[derive(Clone, Debug)]
pub struct EffectiveHamiltonianEval {
    pub value: C64,
    pub grad_z: Vec<C64>,
    pub grad_zbar: Vec<C64>,
    pub hess_zz: CMat,
    pub hess_zbarzbar: CMat,
    /// `[j][k] = d^2 H / dz_j dzbar_k`.
    pub hess_zzbar: CMat,
}

/// `H` at fixed time as a scalar field of the packed coordinates.
pub struct EffectiveField<'a> {
    pub fam: &'a FamilyDescriptor,
    pub poly: &'a OperatorPolynomial,
    pub t: f64,
}

impl<'a> EffectiveField<'a> {
    pub fn new(fam: &'a FamilyDescriptor, poly: &'a OperatorPolynomial, t: f64) -> Self {
        EffectiveField { fam, poly, t }
    }
}

impl ScalarField for EffectiveField<'_> {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<S> {
        let d = self.fam.d();
        let (z, zbar) = x.split_at(d);
        let zp: Vec<C64> = z.iter().map(|v| v.primal()).collect();
        let zbp: Vec<C64> = zbar.iter().map(|v| v.primal()).collect();
        self.fam.check_truncation(&zbp, &zp)?;
        let sites = self.fam.sites();
        let mut bras = Vec::with_capacity(sites.len());
        let mut kets = Vec::with_capacity(sites.len());
        let mut dens = Vec::with_capacity(sites.len());
        for s in sites {
            let b = s.amplitudes(zbar);
            let k = s.amplitudes(z);
            let mut den = S::zero();
            for (bi, ki) in b.iter().zip(&k) {
                den += *bi * *ki;
            }
            let scale: f64 = b.iter().zip(&k).map(|(u, v)| (u.primal() * v.primal()).norm()).sum();
            if den.primal().norm() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::SingularPoint("duplicated-space overlap {zbar*|z} vanishes".into()));
            }
            bras.push(b);
            kets.push(k);
            dens.push(den);
        }
        let mut total = S::zero();
        for c in self.poly.compiled() {
            let mut prod = S::from_c64(c.coeff.eval(self.t));
            for op in &c.ops {
                let (b, k) = (&bras[op.site], &kets[op.site]);
                let mut acc = S::zero();
                for &(r, col, v) in &op.entries {
                    acc += (b[r] * k[col]).scale(v);
                }
                prod *= acc / dens[op.site];
            }
            total += prod;
        }
        Ok(total)
    }
}

/// Value, gradients and Hessian blocks of the effective Hamiltonian.
pub fn effective_hamiltonian(
    fam: &FamilyDescriptor,
    poly: &OperatorPolynomial,
    p: &PhasePoint,
    t: f64,
) -> Result<EffectiveHamiltonianEval> {
    let d = fam.d();
    let field = EffectiveField::new(fam, poly, t);
    let (value, g, h) = hessian(&field, &p.packed())?;
    let n = 2 * d;
    let block = |r0: usize, c0: usize| CMat::from_fn(d, d, |i, j| h[(r0 + i) * n + c0 + j]);
    Ok(EffectiveHamiltonianEval {
        value,
        grad_z: g[..d].to_vec(),
        grad_zbar: g[d..].to_vec(),
        hess_zz: block(0, 0),
        hess_zbarzbar: block(d, d),
        hess_zzbar: block(0, d),
    })
}

/// Value only.
pub fn effective_value(fam: &FamilyDescriptor, poly: &OperatorPolynomial, p: &PhasePoint, t: f64) -> Result<C64> {
    EffectiveField::new(fam, poly, t).eval(&p.packed())
}
