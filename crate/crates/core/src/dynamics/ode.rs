//! Adaptive Dormand-Prince 5(4) integration of complex ODE systems with
//! continuous (dense) output.

use crate::{Error, Result};
use num_complex::Complex64 as C64;

pub trait OdeSystem {
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) -> Result<()>;

    /// Called after each accepted step; an error aborts the integration.
    fn accept(&self, _t: f64, _y: &[C64]) -> Result<()> {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions { rtol: tol, atol: tol, max_steps: 200_000 }
    }
}

#[derive(Clone, Debug)]
struct DenseStep {
    t0: f64,
    h: f64,
    r: [Vec<C64>; 5],
}

#[derive(Clone, Debug, Default)]
pub struct OdeSolution {
    pub ts: Vec<f64>,
    pub ys: Vec<Vec<C64>>,
    pub rejected: usize,
    pub rhs_evals: usize,
    dense: Vec<DenseStep>,
}

impl OdeSolution {
    /// Fourth-order continuous extension at `t` within the integrated span.
    pub fn sample(&self, t: f64) -> Vec<C64> {
        if self.dense.is_empty() {
            return self.ys[0].clone();
        }
        let i = match self.dense.binary_search_by(|s| s.t0.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        }
        .min(self.dense.len() - 1);
        let s = &self.dense[i];
        let th = ((t - s.t0) / s.h).clamp(0.0, 1.0);
        let th1 = 1.0 - th;
        (0..s.r[0].len())
            .map(|k| s.r[0][k] + th * (s.r[1][k] + th1 * (s.r[2][k] + th * (s.r[3][k] + th1 * s.r[4][k]))))
            .collect()
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn combo(y: &[C64], h: f64, terms: &[(f64, &[C64])]) -> Vec<C64> {
    let mut out = y.to_vec();
    for &(a, k) in terms {
        if a != 0.0 {
            for (o, v) in out.iter_mut().zip(k) {
                *o += h * a * v;
            }
        }
    }
    out
}

/// Integrates from `t0` to `t1 >= t0`, recording every accepted step.
pub fn integrate<S: OdeSystem>(sys: &S, t0: f64, t1: f64, y0: &[C64], opts: &OdeOptions) -> Result<OdeSolution> {
    let n = y0.len();
    let mut sol = OdeSolution { ts: vec![t0], ys: vec![y0.to_vec()], ..Default::default() };
    if t1 <= t0 {
        return Ok(sol);
    }
    let span = t1 - t0;
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![C64::default(); n];
    sys.rhs(t, &y, &mut k1)?;
    sol.rhs_evals += 1;

    let sk = |a: &[C64], b: &[C64], i: usize| opts.atol + opts.rtol * a[i].norm().max(b[i].norm());
    // Initial step guess from the scaled norms of y and f.
    let d0 = (0..n).map(|i| (y[i].norm() / sk(&y, &y, i)).powi(2)).sum::<f64>() / n as f64;
    let d1 = (0..n).map(|i| (k1[i].norm() / sk(&y, &y, i)).powi(2)).sum::<f64>() / n as f64;
    let mut h = if d0.sqrt() < 1e-5 || d1.sqrt() < 1e-5 { 1e-6 } else { 0.01 * (d0 / d1).sqrt() };
    h = h.min(span).max(1e-12 * span);

    let mut k = vec![vec![C64::default(); n]; 6];
    let mut first_rejection_after_accept = false;
    for _ in 0..opts.max_steps {
        if t + h > t1 || (t1 - (t + h)) < 1e-12 * span {
            h = t1 - t;
        }
        let stage = |sys: &S, tt: f64, yy: &[C64], out: &mut Vec<C64>| sys.rhs(tt, yy, out);
        let y2 = combo(&y, h, &[(A21, &k1)]);
        let mut fail = stage(sys, t + C2 * h, &y2, &mut k[0]).is_err();
        if !fail {
            let y3 = combo(&y, h, &[(A31, &k1), (A32, &k[0])]);
            fail = stage(sys, t + C3 * h, &y3, &mut k[1]).is_err();
        }
        if !fail {
            let y4 = combo(&y, h, &[(A41, &k1), (A42, &k[0]), (A43, &k[1])]);
            fail = stage(sys, t + C4 * h, &y4, &mut k[2]).is_err();
        }
        if !fail {
            let y5 = combo(&y, h, &[(A51, &k1), (A52, &k[0]), (A53, &k[1]), (A54, &k[2])]);
            fail = stage(sys, t + C5 * h, &y5, &mut k[3]).is_err();
        }
        let mut ynew = Vec::new();
        if !fail {
            let y6 = combo(&y, h, &[(A61, &k1), (A62, &k[0]), (A63, &k[1]), (A64, &k[2]), (A65, &k[3])]);
            fail = stage(sys, t + h, &y6, &mut k[4]).is_err();
        }
        if !fail {
            ynew = combo(&y, h, &[(A71, &k1), (A73, &k[1]), (A74, &k[2]), (A75, &k[3]), (A76, &k[4])]);
            fail = stage(sys, t + h, &ynew, &mut k[5]).is_err();
        }
        sol.rhs_evals += 6;
        let err = if fail {
            f64::INFINITY
        } else {
            let s: f64 = (0..n)
                .map(|i| {
                    let e = h * (E1 * k1[i] + E3 * k[1][i] + E4 * k[2][i] + E5 * k[3][i] + E6 * k[4][i] + E7 * k[5][i]);
                    (e.norm() / sk(&y, &ynew, i)).powi(2)
                })
                .sum();
            (s / n as f64).sqrt()
        };
        if err.is_finite() && err <= 1.0 {
            let ydiff: Vec<C64> = (0..n).map(|i| ynew[i] - y[i]).collect();
            let bspl: Vec<C64> = (0..n).map(|i| h * k1[i] - ydiff[i]).collect();
            let r4: Vec<C64> = (0..n).map(|i| ydiff[i] - h * k[5][i] - bspl[i]).collect();
            let r5: Vec<C64> = (0..n)
                .map(|i| h * (D1 * k1[i] + D3 * k[1][i] + D4 * k[2][i] + D5 * k[3][i] + D6 * k[4][i] + D7 * k[5][i]))
                .collect();
            sol.dense.push(DenseStep { t0: t, h, r: [y.clone(), ydiff, bspl, r4, r5] });
            t = if (t1 - (t + h)).abs() <= 1e-12 * span { t1 } else { t + h };
            y = ynew;
            k1 = k[5].clone();
            sys.accept(t, &y)?;
            sol.ts.push(t);
            sol.ys.push(y.clone());
            if t >= t1 {
                return Ok(sol);
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= if first_rejection_after_accept { fac.min(1.0) } else { fac };
            first_rejection_after_accept = false;
        } else {
            sol.rejected += 1;
            first_rejection_after_accept = true;
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.25 };
            h *= fac;
            if h.abs() < 1e-14 * span.max(t.abs()) {
                if fail {
                    // Surface the underlying evaluation error if there is one.
                    let mut tmp = vec![C64::default(); n];
                    sys.rhs(t, &y, &mut tmp)?;
                }
                return Err(Error::StepFailure { t });
            }
        }
    }
    Err(Error::StepFailure { t })
}
