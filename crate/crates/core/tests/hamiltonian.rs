mod common;

use common::*;
use nalgebra::DVector;
use proptest::prelude::*;
use semiprop::hamiltonian::{
    build_poly, effective_hamiltonian, effective_value, matrix_representation, poly_from, Coefficient, Generator,
    OperatorPolynomial, TermSpec, TimeProfile,
};
use semiprop::linalg::{max_abs, CMat};
use semiprop::{Error, FamilyDescriptor, PhasePoint, C64};

fn spec(c0: C64, profile: TimeProfile, ops: &[&str]) -> TermSpec {
    TermSpec { coeff: Coefficient { scale: c0, profile }, ops: ops.iter().map(|s| s.to_string()).collect() }
}

#[test]
fn canonical_reordering_adds_identity() {
    let fam = FamilyDescriptor::canonical(1, 5).unwrap();
    let h = poly_from(&fam, &[(1.0, "a1 a1†")]).unwrap();
    let terms = h.terms();
    assert_eq!(terms.len(), 2);
    assert!(terms.iter().any(|t| t.monomial.is_empty() && t.coeff.scale == c(1.0, 0.0)));
    assert!(terms
        .iter()
        .any(|t| t.monomial == vec![Generator::Create(0), Generator::Annihilate(0)] && t.coeff.scale == c(1.0, 0.0)));
    let shown = h.to_string();
    assert!(shown.contains("a1† a1") && shown.contains('1'), "{shown}");
}

#[test]
fn empty_spin_spec_is_zero() {
    let fam = FamilyDescriptor::spin(&[1.0]).unwrap();
    let h = build_poly(&fam, &[]).unwrap();
    assert!(h.terms().is_empty());
    assert_eq!(h.to_string(), "0");
    assert_eq!(matrix_representation(&fam, &h, 0.0), CMat::zeros(3, 3));
}

#[test]
fn sun_reordering_uses_commutators() {
    let fam = FamilyDescriptor::sun(2, 3).unwrap();
    let ordered = poly_from(&fam, &[(1.0, "E12 E21")]).unwrap();
    assert_eq!(ordered.terms().len(), 1);
    assert_eq!(ordered.terms()[0].monomial, vec![Generator::E(0, 1), Generator::E(1, 0)]);
    // E21 E12 = E12 E21 + E22 - E11
    let swapped = poly_from(&fam, &[(1.0, "E21 E12")]).unwrap();
    assert_eq!(swapped.terms().len(), 3);
    let coef = |m: Vec<Generator>| swapped.terms().iter().find(|t| t.monomial == m).unwrap().coeff.scale;
    assert_eq!(coef(vec![Generator::E(0, 1), Generator::E(1, 0)]), c(1.0, 0.0));
    assert_eq!(coef(vec![Generator::E(1, 1)]), c(1.0, 0.0));
    assert_eq!(coef(vec![Generator::E(0, 0)]), c(-1.0, 0.0));
    let direct = CMat::from(matrix_of(&fam, &[Generator::E(1, 0), Generator::E(0, 1)]));
    assert!(max_abs(&(swapped.matrix(0.0) - direct)) < 1e-13);
}

/// Product of single-generator matrices, built term by term.
fn matrix_of(fam: &FamilyDescriptor, gens: &[Generator]) -> CMat {
    let dim = fam.hilbert_dim();
    let mut m = CMat::identity(dim, dim);
    for g in gens {
        let single = poly_from(fam, &[(1.0, &g.to_string())]).unwrap();
        m *= single.matrix(0.0);
    }
    m
}

#[test]
fn unknown_and_out_of_range_generators() {
    let can = FamilyDescriptor::canonical(2, 4).unwrap();
    assert!(matches!(poly_from(&can, &[(1.0, "b1")]), Err(Error::UnknownGenerator(_))));
    assert!(matches!(poly_from(&can, &[(1.0, "a3")]), Err(Error::IndexOutOfRange(_))));
    assert!(matches!(poly_from(&can, &[(1.0, "Jz1")]), Err(Error::UnknownGenerator(_))));
    let sun = FamilyDescriptor::sun(3, 2).unwrap();
    assert!(matches!(poly_from(&sun, &[(1.0, "E14")]), Err(Error::IndexOutOfRange(_))));
    let spin = FamilyDescriptor::spin(&[1.0]).unwrap();
    assert!(poly_from(&spin, &[(1.0, "Jz"), (1.0, "J+"), (1.0, "J-1")]).is_ok());
}

#[test]
fn matrix_examples() {
    let s = FamilyDescriptor::spin(&[0.5]).unwrap().with_hbar(0.7).unwrap();
    let m = poly_from(&s, &[(1.0, "Jz1")]).unwrap().matrix(0.0);
    assert_eq!(m, CMat::from_diagonal(&DVector::from_vec(vec![c(-0.35, 0.0), c(0.35, 0.0)])));

    let can = FamilyDescriptor::canonical(1, 3).unwrap();
    let m = poly_from(&can, &[(1.0, "a1† a1")]).unwrap().matrix(0.0);
    let diag: Vec<C64> = (0..4).map(|n| c(n as f64, 0.0)).collect();
    assert!(max_abs(&(m - CMat::from_diagonal(&DVector::from_vec(diag)))) < 1e-15);

    let z = OperatorPolynomial::zero(&can);
    assert_eq!(z.matrix(1.0), CMat::zeros(4, 4));
}

#[test]
fn casimir_is_scalar() {
    for (two_j, hbar) in [(1u32, 1.0), (2, 1.0), (5, 0.5), (8, 2.0)] {
        let fam = FamilyDescriptor::spin_twice(&[two_j]).unwrap().with_hbar(hbar).unwrap();
        let h = poly_from(&fam, &[(1.0, "Jz Jz"), (0.5, "J+ J-"), (0.5, "J- J+")]).unwrap();
        let j = two_j as f64 / 2.0;
        let dim = two_j as usize + 1;
        let want = CMat::identity(dim, dim) * c(j * (j + 1.0) * hbar * hbar, 0.0);
        assert!(max_abs(&(h.matrix(0.0) - want)) < 1e-12);
    }
}

#[test]
fn hermitian_polynomials_give_hermitian_matrices() {
    let fam = FamilyDescriptor::sun(3, 3).unwrap();
    let h = build_poly(
        &fam,
        &[
            spec(c(0.4, 0.3), TimeProfile::Cos { omega: 1.3, phase: 0.2 }, &["E12"]),
            spec(c(0.4, -0.3), TimeProfile::Cos { omega: 1.3, phase: 0.2 }, &["E21"]),
            spec(c(1.1, 0.0), TimeProfile::Constant, &["E33", "E33"]),
        ],
    )
    .unwrap();
    assert!(h.is_hermitian());
    assert!(h.is_time_dependent());
    for t in [0.0, 0.7, 2.5] {
        let m = h.matrix(t);
        assert!(max_abs(&(&m - m.adjoint())) < 1e-12);
    }
    let nh = poly_from(&fam, &[(1.0, "E12")]).unwrap();
    assert!(!nh.is_hermitian());
}

#[test]
fn time_profiles() {
    assert_eq!(TimeProfile::Constant.eval(3.0), 1.0);
    assert!((TimeProfile::Sin { omega: 2.0, phase: 0.0 }.eval(0.25) - 0.5f64.sin()).abs() < 1e-15);
    assert_eq!(TimeProfile::Ramp { t0: 1.0, t1: 3.0 }.eval(2.0), 0.5);
    assert_eq!(TimeProfile::Ramp { t0: 1.0, t1: 3.0 }.eval(5.0), 1.0);
    assert_eq!(TimeProfile::Gaussian { center: 1.0, width: 0.5 }.eval(1.0), 1.0);
}

fn test_hamiltonians() -> Vec<OperatorPolynomial> {
    let can = FamilyDescriptor::canonical(2, 24).unwrap();
    let spin = FamilyDescriptor::spin(&[1.0, 1.5]).unwrap().with_hbar(0.8).unwrap();
    let sun = FamilyDescriptor::sun(3, 3).unwrap();
    vec![
        build_poly(
            &can,
            &[
                spec(c(1.0, 0.0), TimeProfile::Constant, &["a1† a1"]),
                spec(c(0.3, 0.1), TimeProfile::Sin { omega: 1.0, phase: 0.3 }, &["a1† a2"]),
                spec(c(0.3, -0.1), TimeProfile::Sin { omega: 1.0, phase: 0.3 }, &["a2† a1"]),
                spec(c(0.2, 0.0), TimeProfile::Constant, &["a2† a2† a2 a2"]),
            ],
        )
        .unwrap(),
        poly_from(&spin, &[(0.7, "Jz1"), (0.4, "Jz1 Jz2"), (0.25, "J+1 J-2"), (0.25, "J-1 J+2"), (0.3, "Jz2 Jz2")]).unwrap(),
        poly_from(&sun, &[(1.0, "E11"), (0.5, "E12 E21"), (0.5, "E21 E12"), (0.2, "E13"), (0.2, "E31"), (0.6, "E33 E33")])
            .unwrap(),
    ]
}

/// `phi(zbar)^T H phi(z) / phi(zbar)^T phi(z)` from the dense matrix.
fn ratio_oracle(h: &OperatorPolynomial, p: &PhasePoint, t: f64) -> C64 {
    let fam = h.family();
    let b = DVector::from_vec(fam.analytic_amplitudes(&p.zbar));
    let k = DVector::from_vec(fam.analytic_amplitudes(&p.z));
    (b.transpose() * h.matrix(t) * &k)[(0, 0)] / (b.transpose() * k)[(0, 0)]
}

#[test]
fn effective_hamiltonian_matches_ratio_oracle() {
    let mut r = rng(21);
    for h in test_hamiltonians() {
        let d = h.family().d();
        for _ in 0..30 {
            let p = PhasePoint::new(random_vec(&mut r, d, 0.9), random_vec(&mut r, d, 0.9));
            let t = 0.37;
            let v = effective_value(h.family(), &h, &p, t).unwrap();
            let o = ratio_oracle(&h, &p, t);
            assert!((v - o).norm() <= 1e-10 * (1.0 + o.norm()), "{} {v} {o}", h.family().name());
        }
    }
}

#[test]
fn effective_hamiltonian_closed_forms() {
    let (w, hbar) = (1.3, 0.6);
    let can = FamilyDescriptor::canonical(1, 40).unwrap().with_hbar(hbar).unwrap();
    let ho = poly_from(&can, &[(hbar * w, "a† a")]).unwrap();
    let p = PhasePoint::new(vec![c(0.4, -0.2)], vec![c(0.1, 0.5)]);
    let e = effective_hamiltonian(&can, &ho, &p, 0.0).unwrap();
    let zz = p.zbar[0] * p.z[0];
    assert!((e.value - hbar * w * zz).norm() < 1e-14);
    assert!((e.grad_zbar[0] - hbar * w * p.z[0]).norm() < 1e-14);
    assert!((e.grad_z[0] - hbar * w * p.zbar[0]).norm() < 1e-14);
    assert!((e.hess_zzbar[(0, 0)] - hbar * w).norm() < 1e-14);
    assert!(e.hess_zz[(0, 0)].norm() < 1e-14 && e.hess_zbarzbar[(0, 0)].norm() < 1e-14);

    for two_j in [1u32, 4, 7] {
        let fam = FamilyDescriptor::spin_twice(&[two_j]).unwrap().with_hbar(hbar).unwrap();
        let h = poly_from(&fam, &[(w, "Jz")]).unwrap();
        let j = two_j as f64 / 2.0;
        let v = effective_value(&fam, &h, &p, 0.0).unwrap();
        let want = w * hbar * j * (zz - 1.0) / (1.0 + zz);
        assert!((v - want).norm() < 1e-13);
    }

    // At the origin only the reference-state element survives.
    let sun = FamilyDescriptor::sun(3, 2).unwrap();
    let h = poly_from(&sun, &[(1.0, "E33"), (0.5, "E11"), (0.3, "E12"), (0.3, "E21")]).unwrap();
    let v = effective_value(&sun, &h, &PhasePoint::new(vec![c(0.0, 0.0); 2], vec![c(0.0, 0.0); 2]), 0.0).unwrap();
    let r0 = sun.basis_labels().iter().position(|l| l == &vec![0, 0, 2]).unwrap();
    assert!((v - h.matrix(0.0)[(r0, r0)]).norm() < 1e-15);
}

#[test]
fn gradients_match_finite_differences() {
    let mut r = rng(22);
    let step = 1e-6;
    for h in test_hamiltonians() {
        let fam = h.family();
        let d = fam.d();
        for _ in 0..50 {
            let p = PhasePoint::new(random_vec(&mut r, d, 0.7), random_vec(&mut r, d, 0.7));
            let e = effective_hamiltonian(fam, &h, &p, 0.2).unwrap();
            let x = p.packed();
            let grads: Vec<C64> = e.grad_z.iter().chain(&e.grad_zbar).copied().collect();
            for k in 0..2 * d {
                let at = |dx: C64| {
                    let mut y = x.clone();
                    y[k] += dx;
                    effective_value(fam, &h, &PhasePoint::from_packed(&y), 0.2).unwrap()
                };
                let dir = c(0.0, step);
                let fd = (at(dir) - at(-dir)) / (2.0 * dir);
                assert!((fd - grads[k]).norm() <= 1e-6 * grads[k].norm().max(1.0), "{} k={k}", fam.name());
            }
            // Second derivatives against differences of the dual-number gradient.
            let hs = |k: usize, dx: C64| {
                let mut y = x.clone();
                y[k] += dx;
                let e2 = effective_hamiltonian(fam, &h, &PhasePoint::from_packed(&y), 0.2).unwrap();
                e2.grad_z.iter().chain(&e2.grad_zbar).copied().collect::<Vec<_>>()
            };
            for k in 0..2 * d {
                let (gp, gm) = (hs(k, c(1e-5, 0.0)), hs(k, c(-1e-5, 0.0)));
                for j in 0..d {
                    let fd = (gp[j] - gm[j]) / 2e-5;
                    let an = if k < d { e.hess_zz[(j, k)] } else { e.hess_zzbar[(j, k - d)] };
                    assert!((fd - an).norm() <= 1e-5 * an.norm().max(1.0));
                }
            }
        }
    }
}

#[test]
fn physical_slice_is_real_and_matches_normalized_expectation() {
    let mut r = rng(23);
    for h in test_hamiltonians() {
        let fam = h.family();
        let d = fam.d();
        for _ in 0..20 {
            let z = random_vec(&mut r, d, 1.0);
            let p = PhasePoint::physical(&z);
            let t = 1.1;
            let v = effective_value(fam, &h, &p, t).unwrap();
            assert!(v.im.abs() <= 1e-12 * (1.0 + v.norm()));
            let psi = DVector::from_vec(fam.state_vector(&z, true).unwrap().amplitudes);
            let expect = psi.dotc(&(h.matrix(t) * &psi));
            assert!((v - expect).norm() <= 1e-10 * (1.0 + expect.norm()));
        }
    }
}

#[test]
fn vanishing_overlap_is_reported() {
    let fam = FamilyDescriptor::spin(&[1.0]).unwrap();
    let h = poly_from(&fam, &[(1.0, "Jz")]).unwrap();
    let p = PhasePoint::new(vec![c(1.0, 0.0)], vec![c(-1.0, 0.0)]);
    assert!(matches!(effective_value(&fam, &h, &p, 0.0), Err(Error::SingularPoint(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn normal_ordering_preserves_the_operator(
        ops in prop::collection::vec(0usize..5, 1..5),
        coef in -2.0f64..2.0,
    ) {
        let fam = FamilyDescriptor::spin(&[1.5]).unwrap();
        let alphabet = ["J+", "J-", "Jz", "J+", "J-"];
        let gens: Vec<Generator> = ops.iter().map(|&i| Generator::parse(&fam, alphabet[i]).unwrap()).collect();
        let text: Vec<&str> = ops.iter().map(|&i| alphabet[i]).collect();
        let h = poly_from(&fam, &[(coef, &text.join(" "))]).unwrap();
        let direct = matrix_of(&fam, &gens) * c(coef, 0.0);
        prop_assert!(max_abs(&(h.matrix(0.0) - direct)) < 1e-11);
        for t in h.terms() {
            let keys: Vec<_> = t.monomial.windows(2).map(|w| (w[0], w[1])).collect();
            for (a, b) in keys {
                let rank = |g: Generator| match g { Generator::JPlus(_) => 0, Generator::Jz(_) => 1, _ => 2 };
                prop_assert!(rank(a) <= rank(b));
            }
        }
    }

    #[test]
    fn adjoint_of_adjoint_is_identity(coef in (-1.0f64..1.0, -1.0f64..1.0)) {
        let fam = FamilyDescriptor::sun(3, 2).unwrap();
        let h = build_poly(&fam, &[spec(c(coef.0, coef.1), TimeProfile::Constant, &["E21", "E13"])]).unwrap();
        let back = h.adjoint().adjoint();
        prop_assert!(max_abs(&(back.matrix(0.0) - h.matrix(0.0))) < 1e-14);
        prop_assert!(max_abs(&(h.adjoint().matrix(0.0) - h.matrix(0.0).adjoint())) < 1e-14);
    }
}
