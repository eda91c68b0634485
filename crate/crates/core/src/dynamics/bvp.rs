//! Newton shooting for the two-time boundary conditions
//! `z(t_i) = z_i`, `zbar(t_f) = z_f*`.

use super::flow::{integrate_limited, integrate_with, Payload, Trajectory};
use super::seeds::{SeedContext, SeedStrategy};
use crate::family::FamilyDescriptor;
use crate::hamiltonian::OperatorPolynomial;
use crate::linalg::cond1;
use crate::{Error, Result};
use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

#[derive(Clone, Copy, Debug)]
pub struct BvpOptions {
    /// Residual tolerance on `||zbar(t_f) - z_f*||_inf`.
    pub tol: f64,
    /// Local error tolerance of the integrator.
    pub integrator_tol: f64,
    pub max_iterations: usize,
    /// Solutions closer than this in initial `zbar` are identified.
    pub dedup_tol: f64,
}

impl Default for BvpOptions {
    fn default() -> Self {
        BvpOptions { tol: 1e-10, integrator_tol: 1e-12, max_iterations: 50, dedup_tol: 1e-6 }
    }
}

/// Step budgets of a single shot and of a whole Newton solve.
const MAX_SHOT_STEPS: usize = 20_000;
const MAX_SOLVE_STEPS: usize = 60_000;

fn residual(traj: &Trajectory, z_f_star: &[C64]) -> Vec<C64> {
    traj.last().zbar.iter().zip(z_f_star).map(|(a, b)| a - b).collect()
}

fn inf_norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

#[allow(clippy::too_many_arguments)]
pub fn solve_bvp(
    fam: &FamilyDescriptor,
    h: &OperatorPolynomial,
    z_i: &[C64],
    z_f_star: &[C64],
    t_i: f64,
    t_f: f64,
    seed: &[C64],
    opts: &BvpOptions,
) -> Result<Trajectory> {
    let shoot = |zb: &[C64], limit: usize| {
        integrate_limited(fam, h, z_i, zb, t_i, t_f, opts.integrator_tol, Payload::Tangent, limit)
    };
    let mut x = seed.to_vec();
    let mut traj = shoot(&x, MAX_SHOT_STEPS)?;
    let mut work = traj.diagnostics.steps + traj.diagnostics.rejected_steps;
    let mut f = residual(&traj, z_f_star);
    let mut r = inf_norm(&f);
    let mut history = vec![r];
    let mut iterations = 0;
    while r > opts.tol {
        if iterations >= opts.max_iterations {
            return Err(Error::NoConvergence { iterations, residual: r });
        }
        iterations += 1;
        let jac = traj.final_tangent().m22.clone();
        let cond = cond1(&jac);
        if !(cond <= 1e12) {
            return Err(Error::SingularJacobian { cond });
        }
        let step = jac
            .lu()
            .solve(&DVector::from_vec(f.clone()))
            .ok_or(Error::SingularJacobian { cond: f64::INFINITY })?;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<C64> = x.iter().zip(step.iter()).map(|(a, s)| a - lambda * s).collect();
            // Trial shots far costlier than the current iterate are heading into a singularity.
            let limit = (4 * (traj.diagnostics.steps + traj.diagnostics.rejected_steps)).clamp(500, MAX_SHOT_STEPS);
            let shot = shoot(&trial, limit);
            work += shot.as_ref().map_or(limit, |t| t.diagnostics.steps + t.diagnostics.rejected_steps);
            if work > MAX_SOLVE_STEPS {
                return Err(Error::NoConvergence { iterations, residual: r });
            }
            if let Ok(t) = shot {
                let ft = residual(&t, z_f_star);
                let rt = inf_norm(&ft);
                if rt.is_finite() && rt < (1.0 - 1e-4 * lambda) * r {
                    x = trial;
                    traj = t;
                    f = ft;
                    r = rt;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1.0 / 256.0 {
                return Err(Error::NoConvergence { iterations, residual: r });
            }
        }
        history.push(r);
    }
    let mut full = integrate_with(fam, h, z_i, &x, t_i, t_f, opts.integrator_tol, Payload::Full)?;
    full.z_f_star = Some(z_f_star.to_vec());
    full.diagnostics.newton_iterations = iterations;
    full.diagnostics.residual_history = history;
    full.diagnostics.seed = seed.to_vec();
    Ok(full)
}

/// Runs Newton from every seed of `strategy` and keeps distinct converged solutions,
/// in seed order.
#[allow(clippy::too_many_arguments)]
pub fn enumerate_trajectories(
    fam: &FamilyDescriptor,
    h: &OperatorPolynomial,
    z_i: &[C64],
    z_f_star: &[C64],
    t_i: f64,
    t_f: f64,
    strategy: &dyn SeedStrategy,
    opts: &BvpOptions,
) -> Vec<Trajectory> {
    let ctx = SeedContext { fam, z_i, z_f_star, t_i, t_f };
    let seeds = strategy.seeds(&ctx);
    let found: Vec<Option<Trajectory>> = seeds
        .par_iter()
        .map(|s| solve_bvp(fam, h, z_i, z_f_star, t_i, t_f, s, opts).ok())
        .collect();
    let mut out: Vec<Trajectory> = Vec::new();
    for t in found.into_iter().flatten() {
        let zb = &t.first().zbar;
        let dup = out.iter().any(|o| {
            o.first().zbar.iter().zip(zb).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) < opts.dedup_tol
        });
        if !dup {
            out.push(t);
        }
    }
    out
}
