//! Small dense helpers on complex matrices.

use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;

pub fn norm1(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn from_rows(d: usize, v: &[C64]) -> CMat {
    DMatrix::from_row_slice(d, d, v)
}

pub fn identity(d: usize) -> CMat {
    DMatrix::identity(d, d)
}

/// 1-norm condition estimate via an explicit inverse; infinite when singular.
pub fn cond1(m: &CMat) -> f64 {
    match m.clone().try_inverse() {
        Some(inv) => norm1(m) * norm1(&inv),
        None => f64::INFINITY,
    }
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Principal square root via complex Schur form, with a Denman-Beavers fallback.
pub fn sqrtm(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let scale = norm1(a).max(1e-300);
    let fail = || Error::SqrtBranchFailure { t: f64::NAN };
    if n == 1 {
        let v = a[(0, 0)];
        if v.im.abs() <= 1e-14 * scale && v.re < 0.0 {
            return Err(fail());
        }
        return Ok(DMatrix::from_element(1, 1, v.sqrt()));
    }
    if let Some(s) = nalgebra::linalg::Schur::try_new(a.clone(), 1e-15, 10_000) {
        let (q, t) = s.unpack();
        let mut r = CMat::zeros(n, n);
        for i in 0..n {
            let l = t[(i, i)];
            if l.im.abs() <= 1e-14 * scale && l.re < 0.0 {
                return Err(fail());
            }
            r[(i, i)] = l.sqrt();
        }
        let mut ok = true;
        for j in 0..n {
            for i in (0..j).rev() {
                let mut s = t[(i, j)];
                for k in i + 1..j {
                    s -= r[(i, k)] * r[(k, j)];
                }
                let den = r[(i, i)] + r[(j, j)];
                if den.norm() < 1e-14 * scale.sqrt() {
                    ok = false;
                }
                r[(i, j)] = s / den;
            }
        }
        if ok {
            let x = &q * r * q.adjoint();
            if max_abs(&(&x * &x - a)) <= 1e-11 * scale {
                return Ok(x);
            }
        }
    }
    denman_beavers(a).ok_or_else(fail)
}

fn denman_beavers(a: &CMat) -> Option<CMat> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = identity(n);
    for _ in 0..100 {
        let yi = y.clone().try_inverse()?;
        let zi = z.clone().try_inverse()?;
        let yn = (&y + zi) * C64::new(0.5, 0.0);
        let zn = (&z + yi) * C64::new(0.5, 0.0);
        let change = max_abs(&(&yn - &y));
        y = yn;
        z = zn;
        if change <= 1e-15 * norm1(&y) {
            break;
        }
    }
    if max_abs(&(&y * &y - a)) <= 1e-10 * norm1(a).max(1e-300) {
        Some(y)
    } else {
        None
    }
}

/// Solves `X t + t X = g` for `X`.
pub fn sylvester_sym(t: &CMat, g: &CMat) -> Option<CMat> {
    let n = t.nrows();
    let nn = n * n;
    let mut k = CMat::zeros(nn, nn);
    // Column-major vec: vec(t X) = (I kron t) vec X, vec(X t) = (t^T kron I) vec X.
    for j in 0..n {
        for i in 0..n {
            let row = j * n + i;
            for l in 0..n {
                k[(row, j * n + l)] += t[(i, l)];
                k[(row, l * n + i)] += t[(l, j)];
            }
        }
    }
    let rhs = nalgebra::DVector::from_iterator(nn, g.iter().copied());
    let x = k.lu().solve(&rhs)?;
    Some(CMat::from_iterator(n, n, x.iter().copied()))
}
