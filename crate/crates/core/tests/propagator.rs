mod common;

use common::*;
use semiprop::dynamics::{integrate_trajectory, solve_bvp, BvpOptions, Conjugate, Trajectory};
use semiprop::hamiltonian::{poly_from, OperatorPolynomial};
use semiprop::linalg::max_abs;
use semiprop::propagator::{
    abc, action, action_derivatives_check, assemble_ksc, correction_term, normalization_term, prefactor,
    prefactor_history, prefactor_pointwise, riccati_reduced_propagator, second_variation, semiclassical_propagator,
    trace_identity_residual, PropagatorContribution, RouteRegistry, SvForm,
};
use semiprop::{Error, FamilyDescriptor, C64};
use std::f64::consts::PI;

fn ho(w: f64) -> OperatorPolynomial {
    let fam = FamilyDescriptor::canonical(1, 30).unwrap();
    poly_from(&fam, &[(w, "a† a"), (0.5 * w, "")]).unwrap()
}

fn precession(j: f64, w: f64) -> OperatorPolynomial {
    let fam = FamilyDescriptor::spin(&[j]).unwrap();
    poly_from(&fam, &[(w, "Jz")]).unwrap()
}

fn twisting(j: f64) -> OperatorPolynomial {
    let fam = FamilyDescriptor::spin(&[j]).unwrap();
    poly_from(&fam, &[(1.0, "Jz Jz")]).unwrap()
}

fn scenario_hamiltonians() -> Vec<OperatorPolynomial> {
    let can = FamilyDescriptor::canonical(2, 30).unwrap();
    let spin = FamilyDescriptor::spin(&[1.0, 0.5]).unwrap();
    let sun = FamilyDescriptor::sun(3, 3).unwrap();
    vec![
        poly_from(&can, &[(1.0, "a1† a1"), (0.7, "a2† a2"), (0.2, "a1† a2"), (0.2, "a2† a1"), (0.1, "a1† a1† a1 a1")])
            .unwrap(),
        poly_from(&spin, &[(0.8, "Jz1"), (0.3, "Jz1 Jz1"), (0.25, "J+1 J-2"), (0.25, "J-1 J+2")]).unwrap(),
        poly_from(&sun, &[(0.5, "E11"), (0.3, "E12"), (0.3, "E21"), (0.2, "E23"), (0.2, "E32"), (0.15, "E33 E33")])
            .unwrap(),
    ]
}

/// Boundary-value solution from the conjugate seed.
fn solve(h: &OperatorPolynomial, zi: &[C64], zf: &[C64], t: f64) -> Trajectory {
    let opts = BvpOptions { tol: 1e-12, integrator_tol: 1e-13, ..BvpOptions::default() };
    solve_bvp(h.family(), h, zi, &conj(zf), 0.0, t, &conj(zi), &opts).unwrap()
}

#[test]
fn action_examples() {
    let w = 1.3;
    let (zi, zf) = (c(0.7, 0.3), c(-0.2, 0.5));
    let h = ho(w);
    for t in [0.4, 2.0, 5.5] {
        let tr = solve(&h, &[zi], &[zf], t);
        let expect = zf.conj() * zi * c(0.0, -w * t).exp() - c(0.0, w * t / 2.0);
        assert!((action(h.family(), &tr).unwrap() - expect).norm() < 1e-9, "t={t}");
    }

    for h in [ho(w), precession(1.5, w), twisting(2.0)] {
        let tr = solve(&h, &[zi], &[zf], 0.0);
        let f = h.family().kahler_value(&[zf.conj()], &[zi]).unwrap();
        assert!((action(h.family(), &tr).unwrap() - f).norm() < 1e-12);
    }

    for j in [0.5, 1.0, 5.0] {
        let h = precession(j, w);
        for t in [0.3, 2.5, 2.0 * PI] {
            let tr = solve(&h, &[zi], &[zf], t);
            let expect = 2.0 * j * (1.0 + zf.conj() * zi * c(0.0, -w * t).exp()).ln() + c(0.0, j * w * t);
            assert!((action(h.family(), &tr).unwrap() - expect).norm() < 1e-9, "J={j} t={t}");
        }
    }
}

#[test]
fn correction_and_normalization_examples() {
    let w = 0.9;
    let (zi, zf) = (c(0.2, -0.3), c(0.4, 0.1));
    let t = 1.7;
    for h in [ho(w), precession(0.5, w), precession(3.0, w)] {
        let tr = solve(&h, &[zi], &[zf], t);
        assert!((correction_term(&tr) - c(0.0, w * t / 2.0)).norm() < 1e-10, "{}", h.family().name());
    }
    let fam = FamilyDescriptor::spin(&[2.0]).unwrap();
    let constant = poly_from(&fam, &[(0.7, "")]).unwrap();
    let tr = solve(&constant, &[zi], &[zf], t);
    assert!(correction_term(&tr).norm() < 1e-14);

    let can = FamilyDescriptor::canonical(1, 30).unwrap();
    assert_eq!(normalization_term(&can, &[c(0.0, 0.0)], &[c(0.0, 0.0)]).unwrap(), 0.0);
    assert!((normalization_term(&can, &[c(1.0, 0.0)], &[c(2.0, 0.0)]).unwrap() + 2.5).abs() < 1e-14);
    let spin = FamilyDescriptor::spin(&[1.0]).unwrap();
    let l = normalization_term(&spin, &[c(1.0, 0.0)], &[c(0.0, 0.0)]).unwrap();
    assert!((l + 2f64.ln()).abs() < 1e-14);
    for fam in families() {
        let mut r = rng(51);
        let l = normalization_term(&fam, &random_vec(&mut r, fam.d(), 0.5), &random_vec(&mut r, fam.d(), 0.5));
        assert!(l.unwrap() <= 0.0);
    }
}

#[test]
fn prefactor_examples() {
    let w = 1.1;
    let (zi, zf) = (c(0.3, 0.3), c(-0.4, 0.2));
    let h = ho(w);
    for t in [0.5, 3.0, 9.0] {
        let tr = solve(&h, &[zi], &[zf], t);
        assert!((prefactor(&tr).unwrap() - c(0.0, -w * t / 2.0)).norm() < 1e-10, "t={t}");
    }
    for fam in families() {
        let h = OperatorPolynomial::zero(&fam);
        let z = vec![c(0.2, 0.1); fam.d()];
        let tr = solve(&h, &z, &z, 0.0);
        assert_eq!(prefactor(&tr).unwrap(), c(0.0, 0.0));
    }
    let reg = RouteRegistry::with_defaults();
    assert_eq!(reg.names(), vec!["tangent", "trace", "riccati"]);
    assert!(matches!(reg.get("wkb"), Err(Error::UnknownStrategy(_))));
    let h = precession(1.0, w);
    let tr = solve(&h, &[zi], &[zf], 2.2);
    let a = reg.get("tangent").unwrap().ln_kred(h.family(), &h, &tr).unwrap();
    let b = reg.get("trace").unwrap().ln_kred(h.family(), &h, &tr).unwrap();
    assert!((a - b).norm() < 1e-8);
}

#[test]
fn focal_points_are_reported() {
    let h = ho(1.0);
    let mut tr = solve(&h, &[c(0.1, 0.0)], &[c(0.2, 0.0)], 1.0);
    let k = tr.tangent.len() / 2;
    tr.tangent[k].m22 *= C64::new(1e-14, 0.0);
    assert!(matches!(prefactor(&tr), Err(Error::FocalPoint { .. })));
    assert!(PropagatorContribution::from_trajectory(h.family(), &tr).is_err());
}

#[test]
fn assembled_propagator_examples() {
    let w = 1.0;
    let (zi, zf) = (c(0.7, 0.3), c(-0.2, 0.5));
    let opts = BvpOptions::default();
    let h = ho(w);
    for t in [0.0, 1.0, 4.0] {
        let r = semiclassical_propagator(h.family(), &h, &[zi], &[zf], 0.0, t, &Conjugate, &opts, false).unwrap();
        assert_eq!(r.contributions.len(), 1);
        assert!(rel(r.ksc, ho_closed(zi, zf, t)) < 1e-9, "t={t}");
    }

    let h = precession(0.5, w);
    for t in [0.6, 3.0] {
        let r = semiclassical_propagator(h.family(), &h, &[zi], &[zf], 0.0, t, &Conjugate, &opts, true).unwrap();
        let expect = c(0.0, w * t / 2.0).exp() * (1.0 + zf.conj() * zi * c(0.0, -w * t).exp())
            / ((1.0 + zf.norm_sqr()).sqrt() * (1.0 + zi.norm_sqr()).sqrt());
        assert!(rel(r.ksc, expect) < 1e-9);
        assert!(rel(r.ksc, spin_closed(0.5, zi, zf, t)) < 1e-9);
    }

    for fam in families() {
        let mut r = rng(52);
        let a = random_vec(&mut r, fam.d(), 0.4);
        let b = random_vec(&mut r, fam.d(), 0.4);
        let h = poly_from(&fam, &[]).unwrap();
        let res = semiclassical_propagator(&fam, &h, &a, &b, 1.0, 1.0, &Conjugate, &opts, false).unwrap();
        let ov = fam.overlap(&conj(&b), &a, true).unwrap();
        assert!((res.ksc - ov).norm() < 1e-12, "{}", fam.name());
    }

    assert!(matches!(assemble_ksc(&[]), Err(Error::EmptyContributionSet)));
    let big = PropagatorContribution {
        is_over_hbar: c(1.0, 0.0),
        ii_over_hbar: c(0.0, 0.0),
        lambda: 0.0,
        ln_prefactor: c(0.0, 0.0),
        amplitude: c(1.0, 0.0).exp(),
    };
    assert!(big.is_spurious());
    assert!(!PropagatorContribution { is_over_hbar: c(-0.1, 2.0), ..big.clone() }.is_spurious());
    let sum = assemble_ksc(&[big.clone(), big]).unwrap();
    assert!((sum - 2.0 * c(1.0, 0.0).exp()).norm() < 1e-14);
}

/// Stored points of a short free trajectory for each scenario Hamiltonian.
fn scenario_trajectories() -> Vec<(OperatorPolynomial, Trajectory)> {
    let mut r = rng(53);
    let mut hams = scenario_hamiltonians();
    hams.push(twisting(5.0));
    hams.push(ho(1.0));
    hams.into_iter()
        .map(|h| {
            let d = h.family().d();
            let z = random_vec(&mut r, d, 0.5);
            let zb = random_vec(&mut r, d, 0.5);
            let tr = integrate_trajectory(h.family(), &h, &z, &zb, 0.0, 0.7, 1e-12).unwrap();
            (h, tr)
        })
        .collect()
}

#[test]
fn second_variation_identities() {
    for (h, tr) in scenario_trajectories() {
        let fam = h.family();
        for (p, &t) in tr.points.iter().zip(&tr.times).step_by(3) {
            let sv = second_variation(fam, &h, p, t).unwrap();
            assert!(max_abs(&(&sv.a - sv.a.transpose())) < 1e-10, "{}", fam.name());
            assert!(max_abs(&(&sv.c - sv.c.transpose())) < 1e-10, "{}", fam.name());
            let g = fam.metric(&p.zbar, &p.z).unwrap();
            assert!(max_abs(&(&sv.theta * &sv.theta - &g)) < 1e-10);
            let def = abc(fam, &h, p, t, SvForm::Definition).unwrap();
            for form in [SvForm::Metric, SvForm::Flow] {
                let other = abc(fam, &h, p, t, form).unwrap();
                for (x, y) in def.iter().zip(&other) {
                    let scale = max_abs(x).max(1.0);
                    assert!(max_abs(&(x - y)) < 1e-8 * scale, "{} {form:?}", fam.name());
                }
            }
        }
    }
}

#[test]
fn trace_identity_holds_along_trajectories() {
    for (h, tr) in scenario_trajectories() {
        let res = trace_identity_residual(h.family(), &h, &tr).unwrap();
        assert!(res < 1e-8, "{}: {res}", h.family().name());
    }
}

#[test]
fn riccati_route_matches_tangent_route() {
    let reg = RouteRegistry::with_defaults();
    let tangent = reg.get("tangent").unwrap();
    let (zi, zf) = (c(0.5, 0.2), c(0.3, -0.4));
    let h = twisting(5.0);
    for t in [0.05, 0.1, 0.2] {
        let tr = solve(&h, &[zi], &[zf], t);
        let r = riccati_reduced_propagator(h.family(), &h, &tr, 1e-12).unwrap();
        let lt = tangent.ln_kred(h.family(), &h, &tr).unwrap();
        assert!((r.ln_kred - lt).norm() < 1e-6, "t={t}: {} vs {lt}", r.ln_kred);
        assert!(r.max_sqrt_residual < 1e-10);
    }
    for (h, tr) in scenario_trajectories() {
        let a = reg.get("riccati").unwrap().ln_kred(h.family(), &h, &tr).unwrap();
        let b = tangent.ln_kred(h.family(), &h, &tr).unwrap();
        assert!((a - b).norm() < 1e-6, "{}", h.family().name());
    }

    let fam = FamilyDescriptor::spin(&[1.5]).unwrap();
    let zero = OperatorPolynomial::zero(&fam);
    let tr = solve(&zero, &[zi], &[zf], 1.0);
    let r = riccati_reduced_propagator(&fam, &zero, &tr, 1e-12).unwrap();
    assert_eq!(r.ln_kred, c(0.0, 0.0));
    assert_eq!(max_abs(&r.final_state.g11), 0.0);

    let h = ho(1.4);
    let tr = solve(&h, &[zi], &[zf], 2.0);
    assert!(riccati_reduced_propagator(h.family(), &h, &tr, 1e-12).unwrap().ln_kred.norm() < 1e-10);
}

#[test]
fn prefactor_branch_is_continuous() {
    let h = precession(5.0, 1.0);
    let (zi, zf) = (c(0.3, -0.2), c(0.1, 0.4));
    let tr = solve(&h, &[zi], &[zf], 4.0 * PI);
    let cont = prefactor_history(&tr);
    let point = prefactor_pointwise(h.family(), &tr).unwrap();
    let mut wrapped = false;
    for (a, b) in cont.iter().zip(&point) {
        let diff = a - b;
        // Equal modulo pi i: the half-power of a 2 pi i ambiguity.
        let k = diff.im / PI;
        assert!(diff.re.abs() < 1e-9 && (k - k.round()).abs() < 1e-9, "{a} vs {b}");
        wrapped |= k.round() != 0.0;
    }
    assert!(wrapped);
    for w in cont.windows(2) {
        assert!((w[1] - w[0]).norm() < PI);
    }
}

#[test]
fn action_derivatives_match_endpoint_formulas() {
    let (zi, zf) = (c(0.4, 0.1), c(-0.3, 0.2));
    let w = 1.2;
    for (h, t) in [(ho(w), 1.3), (precession(0.5, w), 0.9), (precession(2.0, w), 2.1), (precession(1.0, w), 0.0)] {
        let tr = solve(&h, &[zi], &[zf], t);
        let rep = action_derivatives_check(h.family(), &h, &tr, 1e-4).unwrap();
        assert!(rep.max_first() < 1e-5, "{} t={t}: {:?}", h.family().name(), rep.first);
        assert!(rep.max_second() < 1e-4, "{} t={t}: {:?}", h.family().name(), rep.second);
    }

    let h = ho(w);
    let t = 1.3;
    let tr = solve(&h, &[zi], &[zf], t);
    let rep = action_derivatives_check(h.family(), &h, &tr, 1e-4).unwrap();
    let get = |n: &str| rep.first.iter().find(|c| c.name == n).unwrap().analytic;
    assert!((get("dS/dzbar_f[0]") - zi * c(0.0, -w * t).exp()).norm() < 1e-9);

    let j = 2.0;
    let h = precession(j, w);
    let tr = solve(&h, &[zi], &[zf], t);
    let rep = action_derivatives_check(h.family(), &h, &tr, 1e-4).unwrap();
    let get = |n: &str| rep.first.iter().find(|c| c.name == n).unwrap().analytic;
    let e = c(0.0, -w * t).exp();
    let expect = 2.0 * j * zf.conj() * e / (1.0 + zf.conj() * zi * e);
    assert!((get("dS/dz_i[0]") - expect).norm() < 1e-9);

    let zero = OperatorPolynomial::zero(h.family());
    let tr = solve(&zero, &[zi], &[zf], t);
    let rep = action_derivatives_check(h.family(), &zero, &tr, 1e-4).unwrap();
    let df = rep.first.iter().find(|c| c.name == "dS/dt_f").unwrap();
    assert_eq!(df.analytic, c(0.0, 0.0));
    assert!(df.finite_difference.norm() < 1e-8);
}
