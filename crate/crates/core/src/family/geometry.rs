use super::{FamilyDescriptor, FamilyKind, HilbertVector, PhasePoint};
use crate::scalar::Scalar;
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub struct KahlerEval {
    pub f: C64,
    pub df_dzbar: Vec<C64>,
    pub df_dz: Vec<C64>,
}

/// Gradient of a scalar phase-space function.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGradient {
    pub dz: Vec<C64>,
    pub dzbar: Vec<C64>,
}

fn near_zero(w: C64, scale: f64) -> bool {
    w.norm() <= 1e-13 * scale.max(1.0)
}

impl FamilyDescriptor {
    fn check_singular<S: Scalar>(&self, zbar: &[S], z: &[S]) -> Result<()> {
        match self.kind {
            FamilyKind::Canonical { .. } => Ok(()),
            FamilyKind::Spin { .. } => {
                for k in 0..self.d {
                    let p = zbar[k].primal() * z[k].primal();
                    if near_zero(C64::new(1.0, 0.0) + p, p.norm()) {
                        return Err(Error::SingularPoint(format!("1 + zbar_{} z_{} = 0", k + 1, k + 1)));
                    }
                }
                Ok(())
            }
            FamilyKind::SuN { .. } => {
                let s: C64 = (0..self.d).map(|k| zbar[k].primal() * z[k].primal()).sum();
                if near_zero(C64::new(1.0, 0.0) + s, s.norm()) {
                    return Err(Error::SingularPoint("1 + zbar.z = 0".into()));
                }
                Ok(())
            }
        }
    }

    /// `f(zbar', z) = ln {z'|z}` with principal logarithms.
    pub fn kahler_value<S: Scalar>(&self, zbar: &[S], z: &[S]) -> Result<S> {
        self.check_singular(zbar, z)?;
        let mut f = S::zero();
        match &self.kind {
            FamilyKind::Canonical { .. } => {
                for k in 0..self.d {
                    f += zbar[k] * z[k];
                }
            }
            FamilyKind::Spin { two_j } => {
                for k in 0..self.d {
                    f += (S::one() + zbar[k] * z[k]).ln().scale(C64::new(two_j[k] as f64, 0.0));
                }
            }
            FamilyKind::SuN { big_n, .. } => {
                let mut s = S::one();
                for k in 0..self.d {
                    s += zbar[k] * z[k];
                }
                f = s.ln().scale(C64::new(*big_n as f64, 0.0));
            }
        }
        Ok(f)
    }

    /// Metric, row-major `d x d`, generic over the scalar type.
    pub fn metric_generic<S: Scalar>(&self, zbar: &[S], z: &[S]) -> Result<Vec<S>> {
        self.check_singular(zbar, z)?;
        let d = self.d;
        let mut g = vec![S::zero(); d * d];
        match &self.kind {
            FamilyKind::Canonical { .. } => {
                for k in 0..d {
                    g[k * d + k] = S::one();
                }
            }
            FamilyKind::Spin { two_j } => {
                for k in 0..d {
                    let w = S::one() + zbar[k] * z[k];
                    g[k * d + k] = S::from_f64(two_j[k] as f64) / (w * w);
                }
            }
            FamilyKind::SuN { big_n, .. } => {
                let mut s = S::one();
                for k in 0..d {
                    s += zbar[k] * z[k];
                }
                let nn = S::from_f64(*big_n as f64);
                let den = s * s;
                for j in 0..d {
                    for k in 0..d {
                        let mut v = -(zbar[j] * z[k]);
                        if j == k {
                            v += s;
                        }
                        g[j * d + k] = nn * v / den;
                    }
                }
            }
        }
        Ok(g)
    }

    /// Inverse metric from the closed forms, row-major, generic.
    pub fn metric_inverse_generic<S: Scalar>(&self, zbar: &[S], z: &[S]) -> Result<Vec<S>> {
        self.check_singular(zbar, z)?;
        let d = self.d;
        let mut xi = vec![S::zero(); d * d];
        match &self.kind {
            FamilyKind::Canonical { .. } => {
                for k in 0..d {
                    xi[k * d + k] = S::one();
                }
            }
            FamilyKind::Spin { two_j } => {
                for k in 0..d {
                    let w = S::one() + zbar[k] * z[k];
                    xi[k * d + k] = w * w / S::from_f64(two_j[k] as f64);
                }
            }
            FamilyKind::SuN { big_n, .. } => {
                let mut s = S::one();
                for k in 0..d {
                    s += zbar[k] * z[k];
                }
                let pre = s / S::from_f64(*big_n as f64);
                for j in 0..d {
                    for k in 0..d {
                        let mut v = zbar[j] * z[k];
                        if j == k {
                            v += S::one();
                        }
                        xi[j * d + k] = pre * v;
                    }
                }
            }
        }
        Ok(xi)
    }

    pub fn kahler(&self, zbar: &[C64], z: &[C64]) -> Result<KahlerEval> {
        let f = self.kahler_value(zbar, z)?;
        let (df_dzbar, df_dz) = match &self.kind {
            FamilyKind::Canonical { .. } => (z.to_vec(), zbar.to_vec()),
            FamilyKind::Spin { two_j } => {
                let w: Vec<C64> = (0..self.d).map(|k| 1.0 + zbar[k] * z[k]).collect();
                (
                    (0..self.d).map(|k| two_j[k] as f64 * z[k] / w[k]).collect(),
                    (0..self.d).map(|k| two_j[k] as f64 * zbar[k] / w[k]).collect(),
                )
            }
            FamilyKind::SuN { big_n, .. } => {
                let s: C64 = 1.0 + zbar.iter().zip(z).map(|(a, b)| a * b).sum::<C64>();
                let c = *big_n as f64 / s;
                (z.iter().map(|v| c * v).collect(), zbar.iter().map(|v| c * v).collect())
            }
        };
        Ok(KahlerEval { f, df_dzbar, df_dz })
    }

    pub fn metric(&self, zbar: &[C64], z: &[C64]) -> Result<DMatrix<C64>> {
        let d = self.d;
        Ok(DMatrix::from_row_slice(d, d, &self.metric_generic(zbar, z)?))
    }

    pub fn metric_inverse(&self, zbar: &[C64], z: &[C64]) -> Result<DMatrix<C64>> {
        let d = self.d;
        let g = self.metric(zbar, z)?;
        let xi = DMatrix::from_row_slice(d, d, &self.metric_inverse_generic(zbar, z)?);
        let cond = crate::linalg::norm1(&g) * crate::linalg::norm1(&xi);
        if !(cond <= 1e14) {
            return Err(Error::SingularMetric { cond });
        }
        Ok(xi)
    }

    /// Closed-form determinant of the metric.
    pub fn metric_det(&self, zbar: &[C64], z: &[C64]) -> Result<C64> {
        self.check_singular(zbar, z)?;
        Ok(match &self.kind {
            FamilyKind::Canonical { .. } => C64::new(1.0, 0.0),
            FamilyKind::Spin { two_j } => (0..self.d)
                .map(|k| {
                    let w = 1.0 + zbar[k] * z[k];
                    two_j[k] as f64 / (w * w)
                })
                .product(),
            FamilyKind::SuN { n, big_n } => {
                let s: C64 = 1.0 + zbar.iter().zip(z).map(|(a, b)| a * b).sum::<C64>();
                (*big_n as f64).powi(*n as i32 - 1) / s.powi(*n as i32)
            }
        })
    }

    /// `{z'|z}` when unnormalized; for `normalized` the bra label is `conj(zbar')`.
    pub fn overlap(&self, zbar_prime: &[C64], z: &[C64], normalized: bool) -> Result<C64> {
        let f = self.kahler_value(zbar_prime, z)?;
        if !normalized {
            return Ok(f.exp());
        }
        let zp: Vec<C64> = zbar_prime.iter().map(|c| c.conj()).collect();
        let zc: Vec<C64> = z.iter().map(|c| c.conj()).collect();
        let fp = self.kahler_value(zbar_prime, &zp)?;
        let fz = self.kahler_value(&zc, z)?;
        Ok((f - 0.5 * fp - 0.5 * fz).exp())
    }

    pub fn state_vector(&self, z: &[C64], normalized: bool) -> Result<HilbertVector> {
        let zc: Vec<C64> = z.iter().map(|c| c.conj()).collect();
        self.check_truncation(&zc, z)?;
        let mut amplitudes = self.analytic_amplitudes(z);
        if normalized {
            let f = self.kahler_value(&zc, z)?;
            let c = (-0.5 * f.re).exp();
            for a in amplitudes.iter_mut() {
                *a *= c;
            }
        }
        Ok(HilbertVector { amplitudes })
    }

    /// Density of the invariant measure against `d^2 z`: `kappa det g(z*, z) / pi^d`.
    pub fn measure_weight(&self, z: &[C64]) -> Result<f64> {
        let zc: Vec<C64> = z.iter().map(|c| c.conj()).collect();
        let det = self.metric(&zc, z)?.determinant();
        Ok(self.kappa() * det.re / PI.powi(self.d as i32))
    }

    /// `{A1, A2} = -i [dA1/dz xi^T dA2/dzbar - dA1/dzbar xi dA2/dz]`.
    pub fn poisson_bracket(&self, a1: &PhaseGradient, a2: &PhaseGradient, at: &PhasePoint) -> Result<C64> {
        let xi = self.metric_inverse(&at.zbar, &at.z)?;
        let d = self.d;
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..d {
            for k in 0..d {
                acc += a1.dz[j] * xi[(k, j)] * a2.dzbar[k] - a1.dzbar[j] * xi[(j, k)] * a2.dz[k];
            }
        }
        Ok(C64::new(0.0, -1.0) * acc)
    }
}
