//! Coherent-state families and their phase-space geometry.
//!
//! Coordinates are packed as `x = (z_1..z_d, zbar_1..zbar_d)` wherever a
//! single slice is needed. Metric convention: `g[j][k] = d^2 f / dz_j dzbar'_k`.

mod basis;
mod geometry;

pub use basis::{HilbertVector, Site};
pub use geometry::{KahlerEval, PhaseGradient};

use crate::{Error, Result};
use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

#[derive(Clone, Debug, PartialEq)]
pub enum FamilyKind {
    /// `d` bosonic modes, each truncated at occupation `cutoff`.
    Canonical { d: usize, cutoff: usize },
    /// Spins stored as twice their quantum number.
    Spin { two_j: Vec<u32> },
    /// `n` modes sharing `big_n` bosons; `d = n - 1`.
    SuN { n: usize, big_n: u32 },
}

#[derive(Clone, Debug)]
pub struct FamilyDescriptor {
    kind: FamilyKind,
    d: usize,
    hilbert_dim: usize,
    hbar: f64,
    sites: Vec<Site>,
}

impl PartialEq for FamilyDescriptor {
    fn eq(&self, o: &Self) -> bool {
        self.kind == o.kind && self.hbar == o.hbar
    }
}

/// A point of the duplicated phase space; `zbar` is independent of `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub z: Vec<C64>,
    pub zbar: Vec<C64>,
}

impl PhasePoint {
    pub fn new(z: Vec<C64>, zbar: Vec<C64>) -> Self {
        assert_eq!(z.len(), zbar.len());
        PhasePoint { z, zbar }
    }

    /// Point on the physical slice `zbar = conj(z)`.
    pub fn physical(z: &[C64]) -> Self {
        PhasePoint { z: z.to_vec(), zbar: z.iter().map(|c| c.conj()).collect() }
    }

    pub fn packed(&self) -> Vec<C64> {
        self.z.iter().chain(self.zbar.iter()).copied().collect()
    }

    pub fn from_packed(x: &[C64]) -> Self {
        let d = x.len() / 2;
        PhasePoint { z: x[..d].to_vec(), zbar: x[d..2 * d].to_vec() }
    }
}

impl FamilyDescriptor {
    pub fn canonical(d: usize, cutoff: usize) -> Result<Self> {
        if d == 0 || cutoff == 0 {
            return Err(Error::InvalidFamily("canonical needs d >= 1 and cutoff >= 1".into()));
        }
        let kind = FamilyKind::Canonical { d, cutoff };
        Ok(Self::assemble(kind, d))
    }

    /// Spins given by their quantum numbers, e.g. `&[0.5, 1.0]`.
    pub fn spin(js: &[f64]) -> Result<Self> {
        let mut two_j = Vec::with_capacity(js.len());
        for &j in js {
            let t = 2.0 * j;
            if !(t >= 1.0 && (t - t.round()).abs() < 1e-12) {
                return Err(Error::InvalidFamily(format!("spin J = {j} is not a positive half-integer")));
            }
            two_j.push(t.round() as u32);
        }
        Self::spin_twice(&two_j)
    }

    pub fn spin_twice(two_j: &[u32]) -> Result<Self> {
        if two_j.is_empty() || two_j.iter().any(|&t| t == 0) {
            return Err(Error::InvalidFamily("spin family needs at least one J >= 1/2".into()));
        }
        let kind = FamilyKind::Spin { two_j: two_j.to_vec() };
        Ok(Self::assemble(kind, two_j.len()))
    }

    pub fn sun(n: usize, big_n: u32) -> Result<Self> {
        if n < 2 || big_n < 1 {
            return Err(Error::InvalidFamily("SU(n) needs n >= 2 and N >= 1".into()));
        }
        Ok(Self::assemble(FamilyKind::SuN { n, big_n }, n - 1))
    }

    pub fn with_hbar(mut self, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidFamily(format!("hbar must be positive, got {hbar}")));
        }
        self.hbar = hbar;
        Ok(self)
    }

    fn assemble(kind: FamilyKind, d: usize) -> Self {
        let sites = basis::build_sites(&kind);
        let hilbert_dim = sites.iter().map(|s| s.dim()).product();
        FamilyDescriptor { kind, d, hilbert_dim, hbar: 1.0, sites }
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }
    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FamilyKind::Canonical { .. } => "canonical",
            FamilyKind::Spin { .. } => "spin",
            FamilyKind::SuN { .. } => "sun",
        }
    }

    /// Exact normalization constant of the invariant measure.
    pub fn kappa_exact(&self) -> BigRational {
        match &self.kind {
            FamilyKind::Canonical { .. } => BigRational::one(),
            FamilyKind::Spin { two_j } => two_j.iter().fold(BigRational::one(), |acc, &t| {
                acc * BigRational::new(BigInt::from(t + 1), BigInt::from(t))
            }),
            FamilyKind::SuN { n, big_n } => {
                let mut num = BigInt::one();
                for k in (*big_n as u64 + 1)..=(*big_n as u64 + *n as u64 - 1) {
                    num *= BigInt::from(k);
                }
                let den = BigInt::from(*big_n).pow((*n - 1) as u32);
                BigRational::new(num, den)
            }
        }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa_exact().to_f64().unwrap_or(f64::NAN)
    }

    /// Largest relative Fock tail over modes for products `x_j = |zbar_j||z_j|`.
    /// Zero for families with exact finite bases.
    pub fn truncation_tail(&self, zbar: &[C64], z: &[C64]) -> f64 {
        match self.kind {
            FamilyKind::Canonical { cutoff, .. } => zbar
                .iter()
                .zip(z)
                .map(|(a, b)| basis::poisson_tail(a.norm() * b.norm(), cutoff))
                .fold(0.0, f64::max),
            _ => 0.0,
        }
    }

    pub(crate) fn check_truncation(&self, zbar: &[C64], z: &[C64]) -> Result<()> {
        if let FamilyKind::Canonical { cutoff, .. } = self.kind {
            let tail = self.truncation_tail(zbar, z);
            if !(tail < TRUNCATION_TOL) {
                return Err(Error::TruncationInsufficient { cutoff, tail });
            }
        }
        Ok(())
    }
}

/// Relative Fock-tail budget for the canonical family.
pub const TRUNCATION_TOL: f64 = 1e-16;

/// Smallest cutoff whose relative tail at `x = |z|^2` is below the budget.
pub fn canonical_cutoff_for(max_abs_z: f64) -> usize {
    let x = max_abs_z * max_abs_z;
    let mut c = 1;
    while basis::poisson_tail(x, c) >= TRUNCATION_TOL * 0.01 {
        c += 1;
    }
    c
}
