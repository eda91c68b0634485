//! Complex scalars with forward-mode dual numbers.
//!
//! `Dual<S>` carries one directional derivative. Nesting gives higher
//! derivatives: `Dual<Dual<C64>>` yields mixed second derivatives.

use num_complex::Complex64 as C64;
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn from_c64(c: C64) -> Self;
    /// Value with all derivative parts stripped.
    fn primal(&self) -> C64;
    fn ln(self) -> Self;
    fn exp(self) -> Self;
    fn scale(self, c: C64) -> Self;

    fn zero() -> Self {
        Self::from_c64(C64::new(0.0, 0.0))
    }
    fn one() -> Self {
        Self::from_c64(C64::new(1.0, 0.0))
    }
    fn from_f64(x: f64) -> Self {
        Self::from_c64(C64::new(x, 0.0))
    }
    fn powu(self, n: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base *= base;
            k >>= 1;
        }
        acc
    }
}

impl Scalar for C64 {
    fn from_c64(c: C64) -> Self {
        c
    }
    fn primal(&self) -> C64 {
        *self
    }
    fn ln(self) -> Self {
        C64::ln(self)
    }
    fn exp(self) -> Self {
        C64::exp(self)
    }
    fn scale(self, c: C64) -> Self {
        self * c
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<S> {
    pub re: S,
    pub eps: S,
}

impl<S: Scalar> Dual<S> {
    pub fn new(re: S, eps: S) -> Self {
        Dual { re, eps }
    }
    pub fn var(re: S) -> Self {
        Dual { re, eps: S::one() }
    }
    pub fn cst(re: S) -> Self {
        Dual { re, eps: S::zero() }
    }
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<S: Scalar> Div for Dual<S> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.re / o.re;
        Dual::new(q, (self.eps - q * o.eps) / o.re)
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<S: Scalar> AddAssign for Dual<S> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<S: Scalar> SubAssign for Dual<S> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<S: Scalar> MulAssign for Dual<S> {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    fn from_c64(c: C64) -> Self {
        Dual::cst(S::from_c64(c))
    }
    fn primal(&self) -> C64 {
        self.re.primal()
    }
    fn ln(self) -> Self {
        Dual::new(self.re.ln(), self.eps / self.re)
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, self.eps * e)
    }
    fn scale(self, c: C64) -> Self {
        Dual::new(self.re.scale(c), self.eps.scale(c))
    }
}

/// A scalar function of the packed coordinates `x = (z_1..z_d, zbar_1..zbar_d)`.
pub trait ScalarField: Sync {
    fn eval<S: Scalar>(&self, x: &[S]) -> crate::Result<S>;
}

/// A vector-valued function of the packed coordinates.
pub trait VectorField: Sync {
    fn eval<S: Scalar>(&self, x: &[S]) -> crate::Result<Vec<S>>;
}

fn seeded<S: Scalar>(x: &[S], k: usize) -> Vec<Dual<S>> {
    x.iter()
        .enumerate()
        .map(|(j, &v)| if j == k { Dual::var(v) } else { Dual::cst(v) })
        .collect()
}

/// Value and gradient of `f` at `x`.
pub fn gradient<S: Scalar, F: ScalarField>(f: &F, x: &[S]) -> crate::Result<(S, Vec<S>)> {
    let n = x.len();
    if n == 0 {
        return Ok((f.eval(x)?, Vec::new()));
    }
    let mut g = Vec::with_capacity(n);
    let mut val = S::zero();
    for k in 0..n {
        let r = f.eval(&seeded(x, k))?;
        val = r.re;
        g.push(r.eps);
    }
    Ok((val, g))
}

/// Value and Jacobian (row-major, `out x in`) of `v` at `x`.
pub fn jacobian<S: Scalar, V: VectorField>(v: &V, x: &[S]) -> crate::Result<(Vec<S>, Vec<S>)> {
    let n = x.len();
    let mut cols: Vec<Vec<Dual<S>>> = Vec::with_capacity(n);
    for k in 0..n {
        cols.push(v.eval(&seeded(x, k))?);
    }
    if n == 0 {
        return Ok((v.eval(x)?, Vec::new()));
    }
    let m = cols[0].len();
    let val = cols[0].iter().map(|d| d.re).collect();
    let mut jac = vec![S::zero(); m * n];
    for (k, col) in cols.iter().enumerate() {
        for (i, d) in col.iter().enumerate() {
            jac[i * n + k] = d.eps;
        }
    }
    Ok((val, jac))
}

/// Gradient of a scalar field, viewed as a vector field.
pub struct GradientOf<'a, F>(pub &'a F);

impl<F: ScalarField> VectorField for GradientOf<'_, F> {
    fn eval<S: Scalar>(&self, x: &[S]) -> crate::Result<Vec<S>> {
        Ok(gradient(self.0, x)?.1)
    }
}

/// Value, gradient and Hessian (row-major) of `f` at a complex point.
pub fn hessian<F: ScalarField>(f: &F, x: &[C64]) -> crate::Result<(C64, Vec<C64>, Vec<C64>)> {
    let n = x.len();
    let mut h = vec![C64::new(0.0, 0.0); n * n];
    let mut g = vec![C64::new(0.0, 0.0); n];
    let mut val = C64::new(0.0, 0.0);
    if n == 0 {
        return Ok((f.eval(x)?, g, h));
    }
    for a in 0..n {
        for b in a..n {
            let xs: Vec<Dual<Dual<C64>>> = x
                .iter()
                .enumerate()
                .map(|(j, &v)| {
                    let inner = if j == b { Dual::var(v) } else { Dual::cst(v) };
                    let outer_eps = if j == a { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                    Dual::new(inner, Dual::cst(outer_eps))
                })
                .collect();
            let r = f.eval(&xs)?;
            val = r.re.re;
            g[b] = r.re.eps;
            g[a] = r.eps.re;
            h[a * n + b] = r.eps.eps;
            h[b * n + a] = r.eps.eps;
        }
    }
    Ok((val, g, h))
}

/// Hessian (row-major) of `f` at `x`, generic so it can itself be differentiated.
pub fn hessian_generic<S: Scalar, F: ScalarField>(f: &F, x: &[S]) -> crate::Result<Vec<S>> {
    let n = x.len();
    let mut h = vec![S::zero(); n * n];
    for a in 0..n {
        for b in a..n {
            let xs: Vec<Dual<Dual<S>>> = x
                .iter()
                .enumerate()
                .map(|(j, &v)| {
                    let inner = if j == b { Dual::var(v) } else { Dual::cst(v) };
                    let outer = if j == a { S::one() } else { S::zero() };
                    Dual::new(inner, Dual::cst(outer))
                })
                .collect();
            let r = f.eval(&xs)?;
            h[a * n + b] = r.eps.eps;
            h[b * n + a] = r.eps.eps;
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Poly;
    impl ScalarField for Poly {
        fn eval<S: Scalar>(&self, x: &[S]) -> crate::Result<S> {
            // x0^2 x1 + ln(1 + x0 x1)
            Ok(x[0] * x[0] * x[1] + (S::one() + x[0] * x[1]).ln())
        }
    }

    #[test]
    fn gradient_and_hessian_of_polynomial() {
        let x = [C64::new(0.3, 0.2), C64::new(-0.5, 0.7)];
        let (v, g, h) = hessian(&Poly, &x).unwrap();
        let w = C64::new(1.0, 0.0) + x[0] * x[1];
        assert!((v - (x[0] * x[0] * x[1] + w.ln())).norm() < 1e-15);
        let g0 = 2.0 * x[0] * x[1] + x[1] / w;
        let g1 = x[0] * x[0] + x[0] / w;
        assert!((g[0] - g0).norm() < 1e-14);
        assert!((g[1] - g1).norm() < 1e-14);
        let h01 = 2.0 * x[0] + 1.0 / (w * w);
        let h00 = 2.0 * x[1] - x[1] * x[1] / (w * w);
        assert!((h[1] - h01).norm() < 1e-14);
        assert!((h[2] - h01).norm() < 1e-14);
        assert!((h[0] - h00).norm() < 1e-14);
    }

    #[test]
    fn powu_matches_repeated_product() {
        let x = Dual::var(C64::new(0.4, -1.1));
        let p = x.powu(5);
        assert!((p.re - x.re.powi(5)).norm() < 1e-13);
        assert!((p.eps - 5.0 * x.re.powi(4)).norm() < 1e-13);
    }
}
