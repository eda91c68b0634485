//! Scenario configuration: JSON, complex scalars as `[re, im]`, unknown keys rejected.

use semiprop::dynamics::{BvpOptions, SeedParams, SeedRegistry, SeedStrategy};
use semiprop::hamiltonian::{build_poly, Coefficient, OperatorPolynomial, TermSpec, TimeProfile};
use semiprop::{FamilyDescriptor, C64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

use crate::CliError;

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FamilyBlock {
    Canonical {
        d: usize,
        cutoff: usize,
        #[serde(default = "one")]
        hbar: f64,
    },
    Spin {
        #[serde(rename = "J")]
        j: Vec<f64>,
        #[serde(default = "one")]
        hbar: f64,
    },
    Sun {
        n: usize,
        #[serde(rename = "N")]
        big_n: u32,
        #[serde(default = "one")]
        hbar: f64,
    },
}

impl FamilyBlock {
    pub fn build(&self) -> semiprop::Result<FamilyDescriptor> {
        match self {
            FamilyBlock::Canonical { d, cutoff, hbar } => FamilyDescriptor::canonical(*d, *cutoff)?.with_hbar(*hbar),
            FamilyBlock::Spin { j, hbar } => FamilyDescriptor::spin(j)?.with_hbar(*hbar),
            FamilyBlock::Sun { n, big_n, hbar } => FamilyDescriptor::sun(*n, *big_n)?.with_hbar(*hbar),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileBlock {
    #[default]
    Constant,
    Cos {
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    Sin {
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    Ramp {
        t0: f64,
        t1: f64,
    },
    Gaussian {
        center: f64,
        width: f64,
    },
}

impl From<ProfileBlock> for TimeProfile {
    fn from(p: ProfileBlock) -> Self {
        match p {
            ProfileBlock::Constant => TimeProfile::Constant,
            ProfileBlock::Cos { omega, phase } => TimeProfile::Cos { omega, phase },
            ProfileBlock::Sin { omega, phase } => TimeProfile::Sin { omega, phase },
            ProfileBlock::Ramp { t0, t1 } => TimeProfile::Ramp { t0, t1 },
            ProfileBlock::Gaussian { center, width } => TimeProfile::Gaussian { center, width },
        }
    }
}

/// One Hamiltonian term: `coeff * profile(t) * ops`, with `ops` a space-separated product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermBlock {
    pub coeff: [f64; 2],
    pub ops: String,
    #[serde(default)]
    pub profile: ProfileBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedBlock {
    pub strategy: String,
    pub count: usize,
    pub radius: f64,
    pub rng_seed: u64,
}

impl Default for SeedBlock {
    fn default() -> Self {
        let p = SeedParams::default();
        SeedBlock { strategy: "default".into(), count: p.count, radius: p.radius, rng_seed: p.rng_seed }
    }
}

fn default_tol() -> f64 {
    1e-10
}
fn default_integrator_tol() -> f64 {
    1e-12
}
fn default_exact_tol() -> f64 {
    1e-12
}
fn default_max_iterations() -> usize {
    50
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    pub z_i: Vec<[f64; 2]>,
    pub z_f: Vec<[f64; 2]>,
    pub t_i: f64,
    pub t_f: f64,
    /// Evenly spaced samples of the final time over `[t_i, t_f]`.
    pub samples: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_integrator_tol")]
    pub integrator_tol: f64,
    #[serde(default = "default_exact_tol")]
    pub exact_tol: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default)]
    pub seeds: SeedBlock,
    #[serde(default)]
    pub filter_spurious: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub stem: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { dir: None, stem: None, formats: default_formats() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub family: FamilyBlock,
    pub hamiltonian: Vec<TermBlock>,
    pub run: RunBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

/// Everything a run needs, built once from a checked config.
pub struct Validated {
    pub family: FamilyDescriptor,
    pub hamiltonian: OperatorPolynomial,
    pub z_i: Vec<C64>,
    pub z_f: Vec<C64>,
    pub times: Vec<f64>,
    pub bvp: BvpOptions,
    pub strategy: Box<dyn SeedStrategy>,
}

fn complex(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact serialization, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn times(&self) -> Vec<f64> {
        let r = &self.run;
        match r.samples {
            0 => Vec::new(),
            1 => vec![r.t_f],
            n => (0..n).map(|k| r.t_i + (r.t_f - r.t_i) * k as f64 / (n - 1) as f64).collect(),
        }
    }

    pub fn validate(&self) -> Result<Validated, CliError> {
        let family = self.family.build().map_err(|e| config_err(format!("family: {e}")))?;
        let specs: Vec<TermSpec> = self
            .hamiltonian
            .iter()
            .map(|t| TermSpec {
                coeff: Coefficient { scale: C64::new(t.coeff[0], t.coeff[1]), profile: t.profile.into() },
                ops: t.ops.split_whitespace().map(str::to_string).collect(),
            })
            .collect();
        let hamiltonian = build_poly(&family, &specs).map_err(|e| config_err(format!("hamiltonian: {e}")))?;
        let r = &self.run;
        let d = family.d();
        if r.z_i.len() != d || r.z_f.len() != d {
            return Err(config_err(format!(
                "run: z_i and z_f need {d} components, got {} and {}",
                r.z_i.len(),
                r.z_f.len()
            )));
        }
        let finite = |v: &[[f64; 2]]| v.iter().flatten().all(|x| x.is_finite());
        if !finite(&r.z_i) || !finite(&r.z_f) || !r.t_i.is_finite() || !r.t_f.is_finite() {
            return Err(config_err("run: non-finite endpoint or time"));
        }
        let times = self.times();
        if times.is_empty() {
            return Err(config_err("run: empty time grid"));
        }
        if r.t_f < r.t_i {
            return Err(config_err("run: t_f must not precede t_i"));
        }
        for (name, v) in [("tol", r.tol), ("integrator_tol", r.integrator_tol), ("exact_tol", r.exact_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config_err(format!("run: {name} must be positive")));
            }
        }
        if r.max_iterations == 0 {
            return Err(config_err("run: max_iterations must be positive"));
        }
        if !(r.seeds.radius >= 0.0 && r.seeds.radius.is_finite()) {
            return Err(config_err("run.seeds: radius must be non-negative"));
        }
        let params = SeedParams { count: r.seeds.count, radius: r.seeds.radius, rng_seed: r.seeds.rng_seed };
        let strategy = SeedRegistry::with_defaults()
            .build(&r.seeds.strategy, &params)
            .map_err(|e| config_err(format!("run.seeds: {e}")))?;
        if self.output.formats.is_empty() {
            return Err(config_err("output: no formats requested"));
        }
        let bvp = BvpOptions {
            tol: r.tol,
            integrator_tol: r.integrator_tol,
            max_iterations: r.max_iterations,
            ..BvpOptions::default()
        };
        Ok(Validated { family, hamiltonian, z_i: complex(&r.z_i), z_f: complex(&r.z_f), times, bvp, strategy })
    }
}
