//! Generator alphabets, their commutators and local matrices.

use crate::family::{FamilyDescriptor, FamilyKind, Site};
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::fmt;

/// A single generator; all indices are zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    Create(usize),
    Annihilate(usize),
    JPlus(usize),
    JMinus(usize),
    Jz(usize),
    /// `E_jk = a_j^dag a_k`.
    E(usize, usize),
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Generator::Create(j) => write!(f, "a{}†", j + 1),
            Generator::Annihilate(j) => write!(f, "a{}", j + 1),
            Generator::JPlus(k) => write!(f, "J+{}", k + 1),
            Generator::JMinus(k) => write!(f, "J-{}", k + 1),
            Generator::Jz(k) => write!(f, "Jz{}", k + 1),
            Generator::E(j, k) if j < 9 && k < 9 => write!(f, "E{}{}", j + 1, k + 1),
            Generator::E(j, k) => write!(f, "E{}_{}", j + 1, k + 1),
        }
    }
}

fn parse_index(s: &str, sym: &str, single_default: bool) -> Result<usize> {
    if s.is_empty() && single_default {
        return Ok(0);
    }
    let k: usize = s.parse().map_err(|_| Error::UnknownGenerator(sym.to_string()))?;
    if k == 0 {
        return Err(Error::IndexOutOfRange(sym.to_string()));
    }
    Ok(k - 1)
}

impl Generator {
    /// Parses a symbol such as `a1†`, `a2^`, `J+1`, `Jz`, `E12` or `E1_2`.
    pub fn parse(fam: &FamilyDescriptor, sym: &str) -> Result<Generator> {
        let s = sym.trim();
        let single = fam.d() == 1;
        let g = match fam.kind() {
            FamilyKind::Canonical { .. } => {
                let body = s.strip_prefix('a').ok_or_else(|| Error::UnknownGenerator(sym.into()))?;
                let (idx, dag) = if let Some(b) = body.strip_suffix('†') {
                    (b, true)
                } else if let Some(b) = body.strip_suffix('^') {
                    (b, true)
                } else {
                    (body, false)
                };
                let j = parse_index(idx, sym, single)?;
                if dag {
                    Generator::Create(j)
                } else {
                    Generator::Annihilate(j)
                }
            }
            FamilyKind::Spin { .. } => {
                let body = s.strip_prefix('J').ok_or_else(|| Error::UnknownGenerator(sym.into()))?;
                let mut chars = body.chars();
                let c = chars.next().ok_or_else(|| Error::UnknownGenerator(sym.into()))?;
                let rest = chars.as_str().trim_start_matches('_');
                let k = parse_index(rest, sym, single)?;
                match c {
                    '+' | 'p' => Generator::JPlus(k),
                    '-' | 'm' | '−' => Generator::JMinus(k),
                    'z' => Generator::Jz(k),
                    _ => return Err(Error::UnknownGenerator(sym.into())),
                }
            }
            FamilyKind::SuN { .. } => {
                let body = s.strip_prefix('E').ok_or_else(|| Error::UnknownGenerator(sym.into()))?;
                let body = body.trim_start_matches('_');
                let (a, b) = if let Some((a, b)) = body.split_once(['_', ',']) {
                    (a, b)
                } else if body.len() == 2 && body.chars().all(|c| c.is_ascii_digit()) {
                    body.split_at(1)
                } else {
                    return Err(Error::UnknownGenerator(sym.into()));
                };
                Generator::E(parse_index(a, sym, false)?, parse_index(b, sym, false)?)
            }
        };
        g.check_range(fam, sym)?;
        Ok(g)
    }

    fn check_range(&self, fam: &FamilyDescriptor, sym: &str) -> Result<()> {
        let ok = match (*self, fam.kind()) {
            (Generator::Create(j) | Generator::Annihilate(j), FamilyKind::Canonical { d, .. }) => j < *d,
            (Generator::JPlus(k) | Generator::JMinus(k) | Generator::Jz(k), FamilyKind::Spin { two_j }) => {
                k < two_j.len()
            }
            (Generator::E(j, k), FamilyKind::SuN { n, .. }) => j < *n && k < *n,
            _ => return Err(Error::UnknownGenerator(sym.into())),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange(sym.into()))
        }
    }

    /// Index of the tensor factor this generator acts on.
    pub fn site(&self) -> usize {
        match *self {
            Generator::Create(j) | Generator::Annihilate(j) => j,
            Generator::JPlus(k) | Generator::JMinus(k) | Generator::Jz(k) => k,
            Generator::E(..) => 0,
        }
    }

    /// Total order used for normal ordering: raising, then diagonal, then lowering.
    pub(crate) fn order_key(&self) -> (u8, usize, usize) {
        match *self {
            Generator::Create(j) => (0, j, 0),
            Generator::Annihilate(j) => (2, j, 0),
            Generator::JPlus(k) => (0, k, 0),
            Generator::Jz(k) => (1, k, 0),
            Generator::JMinus(k) => (2, k, 0),
            Generator::E(j, k) => ((j.cmp(&k) as i8 + 1) as u8, j, k),
        }
    }

    pub fn adjoint(&self) -> Generator {
        match *self {
            Generator::Create(j) => Generator::Annihilate(j),
            Generator::Annihilate(j) => Generator::Create(j),
            Generator::JPlus(k) => Generator::JMinus(k),
            Generator::JMinus(k) => Generator::JPlus(k),
            Generator::Jz(k) => Generator::Jz(k),
            Generator::E(j, k) => Generator::E(k, j),
        }
    }

    /// `[self, other]` as a linear combination; `None` denotes the identity.
    pub(crate) fn commutator(&self, other: &Generator, hbar: f64) -> Vec<(C64, Option<Generator>)> {
        use Generator::*;
        let c = |x: f64| C64::new(x, 0.0);
        match (*self, *other) {
            (Annihilate(j), Create(k)) if j == k => vec![(c(1.0), None)],
            (Create(k), Annihilate(j)) if j == k => vec![(c(-1.0), None)],
            (Jz(a), JPlus(b)) if a == b => vec![(c(hbar), Some(JPlus(a)))],
            (JPlus(a), Jz(b)) if a == b => vec![(c(-hbar), Some(JPlus(a)))],
            (Jz(a), JMinus(b)) if a == b => vec![(c(-hbar), Some(JMinus(a)))],
            (JMinus(a), Jz(b)) if a == b => vec![(c(hbar), Some(JMinus(a)))],
            (JPlus(a), JMinus(b)) if a == b => vec![(c(2.0 * hbar), Some(Jz(a)))],
            (JMinus(a), JPlus(b)) if a == b => vec![(c(-2.0 * hbar), Some(Jz(a)))],
            (E(a, b), E(cc, d)) => {
                let mut out = Vec::new();
                if b == cc {
                    out.push((c(1.0), Some(E(a, d))));
                }
                if a == d {
                    out.push((c(-1.0), Some(E(cc, b))));
                }
                out
            }
            _ => Vec::new(),
        }
    }
}

/// Dense matrix of one generator on its tensor factor.
pub(crate) fn local_matrix(fam: &FamilyDescriptor, site: &Site, g: Generator) -> DMatrix<C64> {
    let dim = site.dim();
    let hbar = fam.hbar();
    let mut m = DMatrix::zeros(dim, dim);
    match (g, fam.kind()) {
        (Generator::Create(_), _) => {
            for n in 0..dim - 1 {
                m[(n + 1, n)] = C64::new(((n + 1) as f64).sqrt(), 0.0);
            }
        }
        (Generator::Annihilate(_), _) => {
            for n in 1..dim {
                m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
            }
        }
        (Generator::JPlus(k), FamilyKind::Spin { two_j }) => {
            let t = two_j[k] as f64;
            for n in 0..dim - 1 {
                let x = n as f64;
                m[(n + 1, n)] = C64::new(hbar * ((t - x) * (x + 1.0)).sqrt(), 0.0);
            }
        }
        (Generator::JMinus(k), FamilyKind::Spin { two_j }) => {
            let t = two_j[k] as f64;
            for n in 1..dim {
                let x = n as f64;
                m[(n - 1, n)] = C64::new(hbar * (x * (t - x + 1.0)).sqrt(), 0.0);
            }
        }
        (Generator::Jz(k), FamilyKind::Spin { two_j }) => {
            let j = two_j[k] as f64 / 2.0;
            for n in 0..dim {
                m[(n, n)] = C64::new(hbar * (n as f64 - j), 0.0);
            }
        }
        (Generator::E(a, b), FamilyKind::SuN { .. }) => {
            let index: std::collections::HashMap<&Vec<u32>, usize> =
                site.labels.iter().enumerate().map(|(i, l)| (l, i)).collect();
            for (col, l) in site.labels.iter().enumerate() {
                if a == b {
                    m[(col, col)] = C64::new(l[a] as f64, 0.0);
                } else if l[b] > 0 {
                    let mut to = l.clone();
                    let amp = ((l[b] as f64) * (l[a] as f64 + 1.0)).sqrt();
                    to[b] -= 1;
                    to[a] += 1;
                    m[(index[&to], col)] = C64::new(amp, 0.0);
                }
            }
        }
        _ => unreachable!("generator validated against family at parse time"),
    }
    m
}
