//! Normal-ordered operator polynomials with time-dependent coefficients.

use super::generator::{local_matrix, Generator};
use crate::family::FamilyDescriptor;
use crate::Result;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::fmt;

/// Real-valued time dependence multiplying a complex scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeProfile {
    Constant,
    Cos { omega: f64, phase: f64 },
    Sin { omega: f64, phase: f64 },
    /// Linear from 0 at `t0` to 1 at `t1`, clamped outside.
    Ramp { t0: f64, t1: f64 },
    Gaussian { center: f64, width: f64 },
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Cos { omega, phase } => (omega * t + phase).cos(),
            TimeProfile::Sin { omega, phase } => (omega * t + phase).sin(),
            TimeProfile::Ramp { t0, t1 } => ((t - t0) / (t1 - t0)).clamp(0.0, 1.0),
            TimeProfile::Gaussian { center, width } => (-(t - center).powi(2) / (2.0 * width * width)).exp(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficient {
    pub scale: C64,
    pub profile: TimeProfile,
}

impl Coefficient {
    pub fn constant(c: C64) -> Self {
        Coefficient { scale: c, profile: TimeProfile::Constant }
    }
    pub fn real(x: f64) -> Self {
        Self::constant(C64::new(x, 0.0))
    }
    pub fn eval(&self, t: f64) -> C64 {
        self.scale * self.profile.eval(t)
    }
    fn times(&self, c: C64) -> Self {
        Coefficient { scale: self.scale * c, profile: self.profile }
    }
}

/// One input term before normal ordering.
#[derive(Clone, Debug, PartialEq)]
pub struct TermSpec {
    pub coeff: Coefficient,
    pub ops: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: Coefficient,
    pub monomial: Vec<Generator>,
}

/// Sparse matrix of a monomial restricted to one tensor factor.
#[derive(Clone, Debug)]
pub(crate) struct SiteOp {
    pub site: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

#[derive(Clone, Debug)]
pub(crate) struct Compiled {
    pub coeff: Coefficient,
    pub ops: Vec<SiteOp>,
}

#[derive(Clone, Debug)]
pub struct OperatorPolynomial {
    terms: Vec<Term>,
    compiled: Vec<Compiled>,
    family: FamilyDescriptor,
}

impl fmt::Display for OperatorPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let c = t.coeff.scale;
            let is_one = c == C64::new(1.0, 0.0) && t.coeff.profile == TimeProfile::Constant;
            if !is_one || t.monomial.is_empty() {
                if c.im == 0.0 {
                    write!(f, "{}", c.re)?;
                } else {
                    write!(f, "({}{:+}i)", c.re, c.im)?;
                }
                if t.coeff.profile != TimeProfile::Constant {
                    write!(f, "*{:?}", t.coeff.profile)?;
                }
                if !t.monomial.is_empty() {
                    write!(f, " ")?;
                }
            }
            let ops: Vec<String> = t.monomial.iter().map(|g| g.to_string()).collect();
            write!(f, "{}", ops.join(" "))?;
        }
        Ok(())
    }
}

/// Rewrites monomials into normal order by repeated commutation and merges like terms.
fn normal_order(raw: Vec<Term>, hbar: f64) -> Vec<Term> {
    let mut done: Vec<Term> = Vec::new();
    let mut stack = raw;
    while let Some(term) = stack.pop() {
        let m = &term.monomial;
        let pos = (0..m.len().saturating_sub(1)).find(|&i| m[i].order_key() > m[i + 1].order_key());
        let Some(i) = pos else {
            merge(&mut done, term);
            continue;
        };
        let (x, y) = (m[i], m[i + 1]);
        let mut swapped = m.clone();
        swapped.swap(i, i + 1);
        stack.push(Term { coeff: term.coeff, monomial: swapped });
        for (c, g) in x.commutator(&y, hbar) {
            let mut mono = m[..i].to_vec();
            mono.extend(g);
            mono.extend_from_slice(&m[i + 2..]);
            stack.push(Term { coeff: term.coeff.times(c), monomial: mono });
        }
    }
    done.retain(|t| t.coeff.scale != C64::new(0.0, 0.0));
    done.sort_by(|a, b| {
        let ka: Vec<_> = a.monomial.iter().map(|g| g.order_key()).collect();
        let kb: Vec<_> = b.monomial.iter().map(|g| g.order_key()).collect();
        (a.monomial.len(), ka).cmp(&(b.monomial.len(), kb))
    });
    done
}

fn merge(done: &mut Vec<Term>, t: Term) {
    if let Some(e) = done
        .iter_mut()
        .find(|e| e.monomial == t.monomial && e.coeff.profile == t.coeff.profile)
    {
        e.coeff.scale += t.coeff.scale;
    } else {
        done.push(t);
    }
}

impl OperatorPolynomial {
    pub fn zero(fam: &FamilyDescriptor) -> Self {
        Self::from_terms(fam, Vec::new())
    }

    /// Normal-orders the given products of generators.
    pub fn from_terms(fam: &FamilyDescriptor, raw: Vec<Term>) -> Self {
        let terms = normal_order(raw, fam.hbar());
        let compiled = terms.iter().map(|t| compile(fam, t)).collect();
        OperatorPolynomial { terms, compiled, family: fam.clone() }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn family(&self) -> &FamilyDescriptor {
        &self.family
    }

    pub(crate) fn compiled(&self) -> &[Compiled] {
        &self.compiled
    }

    pub fn is_time_dependent(&self) -> bool {
        self.terms.iter().any(|t| t.coeff.profile != TimeProfile::Constant)
    }

    /// Formal adjoint, normal-ordered.
    pub fn adjoint(&self) -> Self {
        let raw = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: Coefficient { scale: t.coeff.scale.conj(), profile: t.coeff.profile },
                monomial: t.monomial.iter().rev().map(|g| g.adjoint()).collect(),
            })
            .collect();
        Self::from_terms(&self.family, raw)
    }

    /// True when the polynomial equals its adjoint term by term.
    pub fn is_hermitian(&self) -> bool {
        let adj = self.adjoint();
        let close = |a: &[Term], b: &[Term]| {
            a.iter().all(|t| {
                let other = b
                    .iter()
                    .find(|u| u.monomial == t.monomial && u.coeff.profile == t.coeff.profile)
                    .map(|u| u.coeff.scale)
                    .unwrap_or_default();
                (other - t.coeff.scale).norm() <= 1e-12 * t.coeff.scale.norm().max(1.0)
            })
        };
        close(&self.terms, &adj.terms) && close(&adj.terms, &self.terms)
    }

    /// Matrix in the family's full basis at time `t`.
    pub fn matrix(&self, t: f64) -> DMatrix<C64> {
        let fam = &self.family;
        let dim = fam.hilbert_dim();
        let mut out = DMatrix::zeros(dim, dim);
        let dims: Vec<usize> = fam.sites().iter().map(|s| s.dim()).collect();
        for c in &self.compiled {
            let coef = c.coeff.eval(t);
            let mut m = DMatrix::from_element(1, 1, coef);
            for (s, &ds) in dims.iter().enumerate() {
                let local = match c.ops.iter().find(|o| o.site == s) {
                    Some(op) => {
                        let mut l = DMatrix::zeros(ds, ds);
                        for &(r, k, v) in &op.entries {
                            l[(r, k)] = v;
                        }
                        l
                    }
                    None => DMatrix::identity(ds, ds),
                };
                m = m.kronecker(&local);
            }
            out += m;
        }
        out
    }
}

fn compile(fam: &FamilyDescriptor, t: &Term) -> Compiled {
    let mut ops = Vec::new();
    for (s, site) in fam.sites().iter().enumerate() {
        let gens: Vec<Generator> = t.monomial.iter().copied().filter(|g| g.site() == s).collect();
        if gens.is_empty() {
            continue;
        }
        let mut m = DMatrix::<C64>::identity(site.dim(), site.dim());
        for g in &gens {
            m *= local_matrix(fam, site, *g);
        }
        let mut entries = Vec::new();
        for ((r, k), v) in m.iter().enumerate().map(|(i, v)| ((i % site.dim(), i / site.dim()), v)) {
            if v.norm() != 0.0 {
                entries.push((r, k, *v));
            }
        }
        ops.push(SiteOp { site: s, entries });
    }
    Compiled { coeff: t.coeff, ops }
}

/// Parses and normal-orders a term list.
pub fn build_poly(fam: &FamilyDescriptor, spec: &[TermSpec]) -> Result<OperatorPolynomial> {
    let mut raw = Vec::with_capacity(spec.len());
    for ts in spec {
        let mut mono = Vec::with_capacity(ts.ops.len());
        for sym in &ts.ops {
            for part in sym.split_whitespace() {
                mono.push(Generator::parse(fam, part)?);
            }
        }
        raw.push(Term { coeff: ts.coeff, monomial: mono });
    }
    let poly = OperatorPolynomial::from_terms(fam, raw);
    if !poly.is_hermitian() {
        log::warn!("Hamiltonian `{poly}` is not Hermitian");
    }
    Ok(poly)
}

/// Convenience for tests and examples: constant coefficients and symbol strings.
pub fn poly_from(fam: &FamilyDescriptor, terms: &[(f64, &str)]) -> Result<OperatorPolynomial> {
    let spec: Vec<TermSpec> = terms
        .iter()
        .map(|&(c, ops)| TermSpec {
            coeff: Coefficient::real(c),
            ops: ops.split_whitespace().map(str::to_string).collect(),
        })
        .collect();
    build_poly(fam, &spec)
}

