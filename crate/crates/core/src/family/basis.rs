//! Finite bases and analytic (unnormalized) coherent-state amplitudes.
//!
//! Orderings: canonical states are occupation tuples in lexicographic order,
//! spins are tensor products with each `M` ascending from `-J`, SU(n) states
//! are tuples `(m_1..m_n)` with `sum m = N` in lexicographic order. For
//! product families the first mode or particle is the most significant digit.

use super::{FamilyDescriptor, FamilyKind};
use crate::scalar::Scalar;
use num_complex::Complex64 as C64;

/// One tensor factor of the Hilbert space and the coordinates it depends on.
#[derive(Clone, Debug)]
pub struct Site {
    /// Indices into `z` that this factor's amplitudes depend on.
    pub coords: Vec<usize>,
    /// Local basis labels. Canonical: `[m]`; spin: `[J + M]`; SU(n): `[m_1..m_n]`.
    pub labels: Vec<Vec<u32>>,
    /// Amplitude prefactors of the unnormalized coherent state.
    pub coeffs: Vec<f64>,
    /// Exponent of each coordinate in each basis amplitude.
    pub exps: Vec<Vec<u32>>,
}

impl Site {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// Unnormalized amplitudes `{m|z}` of this factor, analytic in `z`.
    pub fn amplitudes<S: Scalar>(&self, z: &[S]) -> Vec<S> {
        let maxe: Vec<u32> = (0..self.coords.len())
            .map(|c| self.exps.iter().map(|e| e[c]).max().unwrap_or(0))
            .collect();
        let powers: Vec<Vec<S>> = self
            .coords
            .iter()
            .zip(&maxe)
            .map(|(&ci, &m)| {
                let mut p = Vec::with_capacity(m as usize + 1);
                p.push(S::one());
                for k in 1..=m as usize {
                    let prev = p[k - 1];
                    p.push(prev * z[ci]);
                }
                p
            })
            .collect();
        self.exps
            .iter()
            .zip(&self.coeffs)
            .map(|(e, &c)| {
                let mut a = S::from_f64(c);
                for (pc, &k) in powers.iter().zip(e) {
                    if k > 0 {
                        a *= pc[k as usize];
                    }
                }
                a
            })
            .collect()
    }
}

fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

pub(super) fn build_sites(kind: &FamilyKind) -> Vec<Site> {
    match kind {
        FamilyKind::Canonical { d, cutoff } => (0..*d)
            .map(|j| Site {
                coords: vec![j],
                labels: (0..=*cutoff as u32).map(|m| vec![m]).collect(),
                coeffs: (0..=*cutoff as u32).map(|m| (-0.5 * ln_factorial(m)).exp()).collect(),
                exps: (0..=*cutoff as u32).map(|m| vec![m]).collect(),
            })
            .collect(),
        FamilyKind::Spin { two_j } => two_j
            .iter()
            .enumerate()
            .map(|(k, &t)| Site {
                coords: vec![k],
                labels: (0..=t).map(|m| vec![m]).collect(),
                coeffs: (0..=t)
                    .map(|m| (0.5 * (ln_factorial(t) - ln_factorial(m) - ln_factorial(t - m))).exp())
                    .collect(),
                exps: (0..=t).map(|m| vec![m]).collect(),
            })
            .collect(),
        FamilyKind::SuN { n, big_n } => {
            let labels = compositions(*n, *big_n);
            let coeffs = labels
                .iter()
                .map(|m| {
                    let l = ln_factorial(*big_n) - m.iter().map(|&k| ln_factorial(k)).sum::<f64>();
                    (0.5 * l).exp()
                })
                .collect();
            let exps = labels.iter().map(|m| m[..n - 1].to_vec()).collect();
            vec![Site { coords: (0..n - 1).collect(), labels, coeffs, exps }]
        }
    }
}

/// All `(m_1..m_n)` with sum `total`, lexicographically ascending.
pub(crate) fn compositions(n: usize, total: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for m in 0..=total {
            prefix.push(m);
            rec(n - 1, total - m, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, total, &mut Vec::new(), &mut out);
    out
}

/// `sum_{m>c} x^m/m!` relative to `sum_{m<=c} x^m/m!`.
pub(crate) fn poisson_tail(x: f64, cutoff: usize) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    // Log-terms, summed relative to the largest to avoid overflow.
    let mut lt = vec![0.0];
    let (mut l, mut top) = (0.0f64, 0.0f64);
    for m in 1.. {
        l += x.ln() - (m as f64).ln();
        lt.push(l);
        top = top.max(l);
        if m > cutoff && (m as f64) > x && l < top - 80.0 {
            break;
        }
    }
    let top = lt.iter().cloned().fold(f64::MIN, f64::max);
    let head: f64 = lt[..=cutoff].iter().map(|v| (v - top).exp()).sum();
    let tail: f64 = lt[cutoff + 1..].iter().map(|v| (v - top).exp()).sum();
    tail / head
}

/// Amplitudes in the fixed basis ordering of a family.
#[derive(Clone, Debug, PartialEq)]
pub struct HilbertVector {
    pub amplitudes: Vec<C64>,
}

impl HilbertVector {
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &HilbertVector) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Kronecker product of per-site vectors, first site most significant.
pub(crate) fn kron<S: Scalar>(parts: &[Vec<S>]) -> Vec<S> {
    let mut out = vec![S::one()];
    for p in parts {
        let mut next = Vec::with_capacity(out.len() * p.len());
        for &a in &out {
            for &b in p {
                next.push(a * b);
            }
        }
        out = next;
    }
    out
}

impl FamilyDescriptor {
    /// Labels of the full basis; each entry concatenates the per-site labels.
    pub fn basis_labels(&self) -> Vec<Vec<u32>> {
        let mut out: Vec<Vec<u32>> = vec![Vec::new()];
        for s in &self.sites {
            let mut next = Vec::with_capacity(out.len() * s.dim());
            for a in &out {
                for l in &s.labels {
                    let mut v = a.clone();
                    v.extend_from_slice(l);
                    next.push(v);
                }
            }
            out = next;
        }
        out
    }

    /// Unnormalized analytic amplitudes `{m|z}` over the full basis.
    pub fn analytic_amplitudes<S: Scalar>(&self, z: &[S]) -> Vec<S> {
        let parts: Vec<Vec<S>> = self.sites.iter().map(|s| s.amplitudes(z)).collect();
        kron(&parts)
    }
}
