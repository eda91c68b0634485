//! Finite-difference checks of the action's boundary derivatives.

use super::action;
use super::second_variation::KahlerField;
use crate::dynamics::{solve_bvp, BvpOptions, Trajectory};
use crate::family::FamilyDescriptor;
use crate::hamiltonian::OperatorPolynomial;
use crate::linalg::CMat;
use crate::scalar::hessian;
use crate::Result;
use num_complex::Complex64 as C64;

#[derive(Clone, Debug)]
pub struct DerivativeCheck {
    pub name: String,
    pub finite_difference: C64,
    pub analytic: C64,
    pub rel_err: f64,
}

#[derive(Clone, Debug)]
pub struct ActionDerivativeReport {
    pub first: Vec<DerivativeCheck>,
    pub second: Vec<DerivativeCheck>,
}

impl ActionDerivativeReport {
    pub fn max_first(&self) -> f64 {
        self.first.iter().map(|c| c.rel_err).fold(0.0, f64::max)
    }
    pub fn max_second(&self) -> f64 {
        self.second.iter().map(|c| c.rel_err).fold(0.0, f64::max)
    }
}

fn check(name: String, fd: C64, an: C64) -> DerivativeCheck {
    let rel_err = (fd - an).norm() / an.norm().max(1e-6);
    DerivativeCheck { name, finite_difference: fd, analytic: an, rel_err }
}

struct Boundary {
    z_i: Vec<C64>,
    zfs: Vec<C64>,
    t_i: f64,
    t_f: f64,
}

/// Kahler Hessian blocks `(f_zz, f_zzbar, f_zbarz, f_zbarzbar)` at a point.
fn kahler_blocks(fam: &FamilyDescriptor, z: &[C64], zbar: &[C64]) -> Result<[CMat; 4]> {
    let d = fam.d();
    let x: Vec<C64> = z.iter().chain(zbar).copied().collect();
    let (_, _, h) = hessian(&KahlerField(fam), &x)?;
    let n = 2 * d;
    let b = |r0: usize, c0: usize| CMat::from_fn(d, d, |i, j| h[(r0 + i) * n + c0 + j]);
    Ok([b(0, 0), b(0, d), b(d, 0), b(d, d)])
}

/// Compares finite differences of `(i/hbar) S` under perturbed boundary data
/// with the endpoint formulas, and finite differences of those formulas with
/// the tangent-matrix expressions for the second derivatives.
pub fn action_derivatives_check(
    fam: &FamilyDescriptor,
    poly: &OperatorPolynomial,
    traj: &Trajectory,
    step: f64,
) -> Result<ActionDerivativeReport> {
    let d = fam.d();
    let hb = fam.hbar();
    let base = Boundary {
        z_i: traj.first().z.clone(),
        zfs: traj.z_f_star.clone().unwrap_or_else(|| traj.last().zbar.clone()),
        t_i: traj.t_i(),
        t_f: traj.t_f(),
    };
    let opts = BvpOptions { tol: 1e-12, integrator_tol: 1e-13, ..Default::default() };
    let seed = traj.first().zbar.clone();
    let solve = |b: &Boundary| -> Result<Trajectory> { solve_bvp(fam, poly, &b.z_i, &b.zfs, b.t_i, b.t_f, &seed, &opts) };
    // Analytic first derivatives at the endpoints of a solved trajectory.
    let firsts = |t: &Trajectory| -> Result<(Vec<C64>, Vec<C64>)> {
        let p0 = t.first();
        let pf = t.last();
        let dz_i = fam.kahler(&p0.zbar, &p0.z)?.df_dz;
        let dzb_f = fam.kahler(&pf.zbar, &pf.z)?.df_dzbar;
        Ok((dz_i, dzb_f))
    };
    let ref_traj = solve(&base)?;
    let i_over = C64::new(0.0, 1.0 / hb);
    let mut first = Vec::new();
    let mut second = Vec::new();

    let shifted = |f: &dyn Fn(&mut Boundary)| -> Result<Trajectory> {
        let mut b = Boundary { z_i: base.z_i.clone(), zfs: base.zfs.clone(), t_i: base.t_i, t_f: base.t_f };
        f(&mut b);
        solve(&b)
    };

    // Integration runs forward only, so short spans use one-sided stencils
    // that lengthen the interval.
    let central = base.t_f - base.t_i > 2.0 * step;
    let s0 = action(fam, &ref_traj)?;
    let time_fd = |sign: f64, at_start: bool| -> Result<C64> {
        let shift = |x: f64| -> Result<C64> {
            let tr = if at_start { shifted(&|b| b.t_i += x)? } else { shifted(&|b| b.t_f += x)? };
            action(fam, &tr)
        };
        if central {
            Ok((shift(step)? - shift(-step)?) / (2.0 * step))
        } else {
            let h = sign * step;
            Ok((-3.0 * s0 + 4.0 * shift(h)? - shift(2.0 * h)?) / (2.0 * h))
        }
    };
    first.push(check("dS/dt_i".into(), time_fd(-1.0, true)?, i_over * ref_traj.energies[0]));
    first.push(check(
        "dS/dt_f".into(),
        time_fd(1.0, false)?,
        -i_over * *ref_traj.energies.last().unwrap(),
    ));

    let (an_zi, an_zbf) = firsts(&ref_traj)?;
    let tan = ref_traj.final_tangent();
    let m22i = tan.m22.clone().try_inverse().ok_or(crate::Error::SingularJacobian { cond: f64::INFINITY })?;
    let t11 = &tan.m12 * &m22i;
    let t12 = &tan.m11 - &tan.m12 * &m22i * &tan.m21;
    let t21 = m22i.clone();
    let t22 = -&m22i * &tan.m21;
    let p0 = ref_traj.first();
    let pf = ref_traj.last();
    let [fzz_i, fzzb_i, _, _] = kahler_blocks(fam, &p0.z, &p0.zbar)?;
    let [_, _, fzbz_f, fzbzb_f] = kahler_blocks(fam, &pf.z, &pf.zbar)?;
    let sec_a = fzbzb_f + &fzbz_f * t11;
    let sec_b = &fzbz_f * t12;
    let sec_c = &fzzb_i * t21;
    let sec_d = fzz_i + &fzzb_i * t22;

    for k in 0..d {
        let zp = shifted(&|b| b.z_i[k] += step)?;
        let zm = shifted(&|b| b.z_i[k] -= step)?;
        first.push(check(
            format!("dS/dz_i[{k}]"),
            (action(fam, &zp)? - action(fam, &zm)?) / (2.0 * step),
            an_zi[k],
        ));
        let (p_zi, p_zbf) = firsts(&zp)?;
        let (m_zi, m_zbf) = firsts(&zm)?;
        for j in 0..d {
            second.push(check(format!("d2S/dzbar_f[{j}]dz_i[{k}]"), (p_zbf[j] - m_zbf[j]) / (2.0 * step), sec_b[(j, k)]));
            second.push(check(format!("d2S/dz_i[{j}]dz_i[{k}]"), (p_zi[j] - m_zi[j]) / (2.0 * step), sec_d[(j, k)]));
        }

        let fp = shifted(&|b| b.zfs[k] += step)?;
        let fm = shifted(&|b| b.zfs[k] -= step)?;
        first.push(check(
            format!("dS/dzbar_f[{k}]"),
            (action(fam, &fp)? - action(fam, &fm)?) / (2.0 * step),
            an_zbf[k],
        ));
        let (p_zi, p_zbf) = firsts(&fp)?;
        let (m_zi, m_zbf) = firsts(&fm)?;
        for j in 0..d {
            second.push(check(format!("d2S/dzbar_f[{j}]dzbar_f[{k}]"), (p_zbf[j] - m_zbf[j]) / (2.0 * step), sec_a[(j, k)]));
            second.push(check(format!("d2S/dz_i[{j}]dzbar_f[{k}]"), (p_zi[j] - m_zi[j]) / (2.0 * step), sec_c[(j, k)]));
        }
    }
    Ok(ActionDerivativeReport { first, second })
}
