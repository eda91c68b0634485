//! Phase-space quadrature for single-coordinate families: resolution of the
//! identity and composition of propagators.

use crate::family::{FamilyDescriptor, FamilyKind};
use crate::linalg::CMat;
use crate::{Error, Result};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    (x.iter().map(|t| c + h * t).collect(), w.iter().map(|wi| wi * h).collect())
}

/// Points and weights approximating `int d mu(z)` over the plane.
#[derive(Clone, Debug)]
pub struct PhaseSpaceRule {
    pub points: Vec<C64>,
    pub weights: Vec<f64>,
}

/// Product rule in `(x = |z|^2, theta)`: Gauss-Legendre in a compactified radius
/// and the trapezoid rule in angle.
///
/// Compact families use `u = x/(1+x)`; the canonical family uses a linear map of
/// `x` over a range that covers the retained Fock states.
pub fn phase_space_rule(fam: &FamilyDescriptor, radial: usize, angular: usize) -> Result<PhaseSpaceRule> {
    if fam.d() != 1 {
        return Err(Error::InvalidFamily("phase-space quadrature needs a single coordinate".into()));
    }
    let (us, uw, to_x): (Vec<f64>, Vec<f64>, Box<dyn Fn(f64) -> (f64, f64)>) = match fam.kind() {
        FamilyKind::Canonical { cutoff, .. } => {
            let c = *cutoff as f64;
            let top = c + 20.0 * (c + 1.0).sqrt() + 60.0;
            let (u, w) = gauss_legendre(radial, 0.0, top);
            (u, w, Box::new(|x| (x, 1.0)))
        }
        _ => {
            let (u, w) = gauss_legendre(radial, 0.0, 1.0);
            (u, w, Box::new(|u: f64| (u / (1.0 - u), 1.0 / ((1.0 - u) * (1.0 - u)))))
        }
    };
    let mut points = Vec::with_capacity(radial * angular);
    let mut weights = Vec::with_capacity(radial * angular);
    let dtheta = 2.0 * PI / angular as f64;
    for (u, wu) in us.iter().zip(&uw) {
        let (x, jac) = to_x(*u);
        let r = x.sqrt();
        for k in 0..angular {
            let z = C64::from_polar(r, k as f64 * dtheta);
            // d^2 z = r dr dtheta = dx dtheta / 2
            points.push(z);
            weights.push(fam.measure_weight(&[z])? * 0.5 * jac * wu * dtheta);
        }
    }
    Ok(PhaseSpaceRule { points, weights })
}

/// Normalized state without the truncation guard, so that the projection of
/// the identity onto a truncated space can be tested.
fn projected_state(fam: &FamilyDescriptor, z: C64) -> Result<Vec<C64>> {
    let f = fam.kahler_value(&[z.conj()], &[z])?;
    let c = (-0.5 * f.re).exp();
    Ok(fam.analytic_amplitudes(&[z]).into_iter().map(|a| a * c).collect())
}

/// `sum_q w_q |z_q><z_q|`.
pub fn resolved_identity(fam: &FamilyDescriptor, rule: &PhaseSpaceRule) -> Result<CMat> {
    let dim = fam.hilbert_dim();
    let mut acc = CMat::zeros(dim, dim);
    for (z, w) in rule.points.iter().zip(&rule.weights) {
        let v = projected_state(fam, *z)?;
        for r in 0..dim {
            for c in 0..dim {
                acc[(r, c)] += *w * v[r] * v[c].conj();
            }
        }
    }
    Ok(acc)
}

/// Largest entrywise deviation of the resolved identity from the unit matrix.
pub fn identity_resolution_deviation(fam: &FamilyDescriptor, radial: usize, angular: usize) -> Result<f64> {
    let rule = phase_space_rule(fam, radial, angular)?;
    let m = resolved_identity(fam, &rule)?;
    let dim = m.nrows();
    Ok(crate::linalg::max_abs(&(m - CMat::identity(dim, dim))))
}

/// `|K(t_f,t_i) - sum_q w_q K(t_f,t_m; z_q) K(t_m,t_i; z_q)|` for a propagator
/// `k(z_out, z_in, t_out, t_in)`.
pub fn composition_deviation<K>(rule: &PhaseSpaceRule, k: K, z_i: C64, z_f: C64, t_i: f64, t_m: f64, t_f: f64) -> Result<f64>
where
    K: Fn(C64, C64, f64, f64) -> Result<C64>,
{
    let direct = k(z_f, z_i, t_f, t_i)?;
    let mut sum = C64::default();
    for (z, w) in rule.points.iter().zip(&rule.weights) {
        sum += *w * k(z_f, *z, t_f, t_m)? * k(*z, z_i, t_m, t_i)?;
    }
    Ok((direct - sum).norm())
}
