//! `check`: property suites for one family, with measured values against tolerances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semiprop::dynamics::integrate_trajectory;
use semiprop::family::PhaseGradient;
use semiprop::hamiltonian::{poly_from, OperatorPolynomial};
use semiprop::linalg::{max_abs, CMat};
use semiprop::propagator::{trace_identity_residual, RouteRegistry};
use semiprop::quadrature::identity_resolution_deviation;
use semiprop::{FamilyDescriptor, FamilyKind, PhasePoint, C64};
use serde::Serialize;
use std::path::{Path, PathBuf};

use crate::config::FamilyBlock;
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct PropertyCheck {
    pub name: String,
    pub measured: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub family: FamilyBlock,
    pub kappa: String,
    pub kappa_value: f64,
    pub checks: Vec<PropertyCheck>,
    /// Suites that do not apply to this family, with the reason.
    pub skipped: Vec<(String, String)>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out = vec![format!("kappa = {} ({})", self.kappa, self.kappa_value)];
        for c in &self.checks {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            out.push(format!("{tag} {}: {:.3e} (tol {:.0e})", c.name, c.measured, c.tol));
        }
        for (name, why) in &self.skipped {
            out.push(format!("SKIP {name}: {why}"));
        }
        out
    }
}

fn check(name: &str, measured: f64, tol: f64) -> PropertyCheck {
    PropertyCheck { name: name.into(), measured, tol, pass: measured <= tol }
}

fn random_c(r: &mut ChaCha8Rng, scale: f64) -> C64 {
    C64::new(r.gen_range(-scale..scale), r.gen_range(-scale..scale))
}

fn random_vec(r: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<C64> {
    (0..d).map(|_| random_c(r, scale)).collect()
}

/// A nonlinear Hamiltonian touching every degree of freedom of the family.
fn probe_hamiltonian(fam: &FamilyDescriptor) -> semiprop::Result<OperatorPolynomial> {
    let mut terms: Vec<(f64, String)> = Vec::new();
    match fam.kind() {
        FamilyKind::Canonical { d, .. } => {
            for j in 1..=*d {
                terms.push((1.0 + 0.2 * j as f64, format!("a{j}† a{j}")));
            }
            terms.push((0.1, "a1† a1† a1 a1".into()));
            if *d > 1 {
                terms.push((0.2, "a1† a2".into()));
                terms.push((0.2, "a2† a1".into()));
            }
        }
        FamilyKind::Spin { two_j } => {
            for k in 1..=two_j.len() {
                terms.push((0.8, format!("Jz{k}")));
                terms.push((0.2, format!("J+{k}")));
                terms.push((0.2, format!("J-{k}")));
            }
            terms.push((0.3, "Jz1 Jz1".into()));
        }
        FamilyKind::SuN { n, .. } => {
            for j in 1..=*n {
                terms.push((0.3 * j as f64, format!("E{j}_{j}")));
            }
            for j in 1..*n {
                terms.push((0.25, format!("E{}_{}", j, j + 1)));
                terms.push((0.25, format!("E{}_{}", j + 1, j)));
            }
            terms.push((0.1, "E1_1 E1_1".into()));
        }
    }
    let refs: Vec<(f64, &str)> = terms.iter().map(|(c, s)| (*c, s.as_str())).collect();
    poly_from(fam, &refs)
}

pub fn run_properties(block: &FamilyBlock) -> Result<PropertyReport, CliError> {
    let fam = block.build().map_err(|e| CliError::Config(format!("family: {e}")))?;
    let d = fam.d();
    let mut r = ChaCha8Rng::seed_from_u64(2024);
    let mut checks = Vec::new();
    let mut skipped = Vec::new();

    let mut inv = 0.0f64;
    let mut herm = 0.0f64;
    for _ in 0..100 {
        let z = random_vec(&mut r, d, 0.5);
        let zb = random_vec(&mut r, d, 0.5);
        let g = fam.metric(&zb, &z)?;
        let xi = fam.metric_inverse(&zb, &z)?;
        inv = inv.max(max_abs(&(&g * &xi - CMat::identity(d, d))));
        let zc: Vec<C64> = z.iter().map(|c| c.conj()).collect();
        let gp = fam.metric(&zc, &z)?;
        herm = herm.max(max_abs(&(&gp - gp.adjoint())));
    }
    checks.push(check("metric times inverse is identity", inv, 1e-12));
    checks.push(check("metric Hermitian on the physical slice", herm, 1e-12));

    let mut anti = 0.0f64;
    for _ in 0..50 {
        let at = PhasePoint::new(random_vec(&mut r, d, 0.5), random_vec(&mut r, d, 0.5));
        let a = PhaseGradient { dz: random_vec(&mut r, d, 1.0), dzbar: random_vec(&mut r, d, 1.0) };
        let b = PhaseGradient { dz: random_vec(&mut r, d, 1.0), dzbar: random_vec(&mut r, d, 1.0) };
        anti = anti.max((fam.poisson_bracket(&a, &b, &at)? + fam.poisson_bracket(&b, &a, &at)?).norm());
    }
    checks.push(check("Poisson bracket antisymmetry", anti, 1e-12));

    if d == 1 {
        let (radial, angular) = match fam.kind() {
            FamilyKind::Canonical { cutoff, .. } => (120, 2 * cutoff + 4),
            FamilyKind::Spin { two_j } => (two_j[0] as usize + 8, two_j[0] as usize + 8),
            FamilyKind::SuN { big_n, .. } => (*big_n as usize + 8, *big_n as usize + 8),
        };
        checks.push(check("identity resolution", identity_resolution_deviation(&fam, radial, angular)?, 1e-6));
    } else {
        skipped.push(("identity resolution".into(), "quadrature rule covers one complex dimension".into()));
    }

    let h = probe_hamiltonian(&fam)?;
    let z = random_vec(&mut r, d, 0.4);
    let zb = random_vec(&mut r, d, 0.4);
    let traj = integrate_trajectory(&fam, &h, &z, &zb, 0.0, 0.5, 1e-12)?;
    checks.push(check("trace identity", trace_identity_residual(&fam, &h, &traj)?, 1e-8));
    let routes = RouteRegistry::with_defaults();
    let tangent = routes.get("tangent")?.ln_kred(&fam, &h, &traj)?;
    let riccati = routes.get("riccati")?.ln_kred(&fam, &h, &traj)?;
    checks.push(check("Riccati and tangent routes agree", (tangent - riccati).norm(), 1e-6));

    let kappa = fam.kappa_exact();
    Ok(PropertyReport { family: block.clone(), kappa: kappa.to_string(), kappa_value: fam.kappa(), checks, skipped })
}

pub fn write_report(report: &PropertyReport, out_dir: &Path) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(out_dir)?;
    let kind = match report.family {
        FamilyBlock::Canonical { .. } => "canonical",
        FamilyBlock::Spin { .. } => "spin",
        FamilyBlock::Sun { .. } => "sun",
    };
    let path = out_dir.join(format!("check_{kind}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(report)? + "\n")?;
    Ok(path)
}
