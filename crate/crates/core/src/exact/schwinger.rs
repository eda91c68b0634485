//! Spin `J` against two bosonic modes holding `2J` particles.

use super::propagate_exact;
use crate::dynamics::{BvpOptions, SeedStrategy};
use crate::family::{FamilyDescriptor, FamilyKind};
use crate::hamiltonian::{Generator, OperatorPolynomial, Term};
use crate::propagator::semiclassical_propagator;
use crate::{Error, Result};
use num_complex::Complex64 as C64;

#[derive(Clone, Debug, PartialEq)]
pub struct SchwingerReport {
    pub exact_spin: C64,
    pub exact_boson: C64,
    pub exact_diff: f64,
    pub sc_spin: C64,
    pub sc_boson: C64,
    pub sc_diff: f64,
}

/// `Jz -> hbar (E11 - E22)/2`, `J+ -> hbar E12`, `J- -> hbar E21`.
fn image(g: Generator, hbar: f64) -> Result<Vec<(C64, Generator)>> {
    let c = |x: f64| C64::new(x, 0.0);
    match g {
        Generator::Jz(0) => Ok(vec![(c(0.5 * hbar), Generator::E(0, 0)), (c(-0.5 * hbar), Generator::E(1, 1))]),
        Generator::JPlus(0) => Ok(vec![(c(hbar), Generator::E(0, 1))]),
        Generator::JMinus(0) => Ok(vec![(c(hbar), Generator::E(1, 0))]),
        other => Err(Error::MappingMismatch(format!("no bosonic image for {other}"))),
    }
}

fn check_pair(spin: &FamilyDescriptor, boson: &FamilyDescriptor) -> Result<()> {
    let (FamilyKind::Spin { two_j }, FamilyKind::SuN { n, big_n }) = (spin.kind(), boson.kind()) else {
        return Err(Error::MappingMismatch("expected a spin family and an SU(n) family".into()));
    };
    if two_j.len() != 1 || *n != 2 || two_j[0] != *big_n {
        return Err(Error::MappingMismatch(format!("spin 2J={two_j:?} does not match n={n}, N={big_n}")));
    }
    if spin.hbar() != boson.hbar() {
        return Err(Error::MappingMismatch("hbar differs between families".into()));
    }
    Ok(())
}

/// Bosonic image of a single-spin polynomial on `boson`.
pub fn schwinger_image(h_spin: &OperatorPolynomial, boson: &FamilyDescriptor) -> Result<OperatorPolynomial> {
    check_pair(h_spin.family(), boson)?;
    let hbar = boson.hbar();
    let mut raw = Vec::new();
    for t in h_spin.terms() {
        let mut partial = vec![(t.coeff.scale, Vec::new())];
        for &g in &t.monomial {
            let img = image(g, hbar)?;
            partial = partial
                .into_iter()
                .flat_map(|(c, mono): (C64, Vec<Generator>)| {
                    img.iter().map(move |&(ci, gi)| {
                        let mut m = mono.clone();
                        m.push(gi);
                        (c * ci, m)
                    })
                })
                .collect();
        }
        for (c, monomial) in partial {
            let mut coeff = t.coeff;
            coeff.scale = c;
            raw.push(Term { coeff, monomial });
        }
    }
    Ok(OperatorPolynomial::from_terms(boson, raw))
}

/// Exact and semiclassical amplitudes for the same labels on both families.
#[allow(clippy::too_many_arguments)]
pub fn schwinger_crosscheck(
    h_spin: &OperatorPolynomial,
    h_boson: &OperatorPolynomial,
    z_i: C64,
    z_f: C64,
    t_i: f64,
    t_f: f64,
    strategy: &dyn SeedStrategy,
    opts: &BvpOptions,
) -> Result<SchwingerReport> {
    let spin = h_spin.family();
    let boson = h_boson.family();
    check_pair(spin, boson)?;
    let ms = h_spin.matrix(t_i);
    let mb = h_boson.matrix(t_i);
    let scale = crate::linalg::max_abs(&ms).max(1.0);
    if crate::linalg::max_abs(&(&ms - &mb)) > 1e-10 * scale {
        return Err(Error::MappingMismatch("Hamiltonian matrices differ under the mapping".into()));
    }
    let (zi, zf) = ([z_i], [z_f]);
    let exact_spin = propagate_exact(spin, h_spin, &zi, &zf, t_i, t_f, 1e-12)?.amplitude;
    let exact_boson = propagate_exact(boson, h_boson, &zi, &zf, t_i, t_f, 1e-12)?.amplitude;
    let sc_spin = semiclassical_propagator(spin, h_spin, &zi, &zf, t_i, t_f, strategy, opts, false)?.ksc;
    let sc_boson = semiclassical_propagator(boson, h_boson, &zi, &zf, t_i, t_f, strategy, opts, false)?.ksc;
    Ok(SchwingerReport {
        exact_spin,
        exact_boson,
        exact_diff: (exact_spin - exact_boson).norm(),
        sc_spin,
        sc_boson,
        sc_diff: (sc_spin - sc_boson).norm(),
    })
}
