//! Seed strategies for the unknown initial `zbar`, selectable by name.

use crate::family::FamilyDescriptor;
use crate::{Error, Result};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub struct SeedContext<'a> {
    pub fam: &'a FamilyDescriptor,
    pub z_i: &'a [C64],
    pub z_f_star: &'a [C64],
    pub t_i: f64,
    pub t_f: f64,
}

impl SeedContext<'_> {
    fn conjugate(&self) -> Vec<C64> {
        self.z_i.iter().map(|c| c.conj()).collect()
    }
}

pub trait SeedStrategy: Send + Sync {
    fn name(&self) -> &str;
    fn seeds(&self, ctx: &SeedContext) -> Vec<Vec<C64>>;
}

/// The physical-slice guess `zbar_i = conj(z_i)`.
pub struct Conjugate;

impl SeedStrategy for Conjugate {
    fn name(&self) -> &str {
        "conjugate"
    }
    fn seeds(&self, ctx: &SeedContext) -> Vec<Vec<C64>> {
        vec![ctx.conjugate()]
    }
}

/// Square lattice around `conj(z_i)` and `z_f*`, one coordinate at a time.
pub struct Grid {
    pub per_axis: usize,
    pub radius: f64,
}

impl SeedStrategy for Grid {
    fn name(&self) -> &str {
        "grid"
    }
    fn seeds(&self, ctx: &SeedContext) -> Vec<Vec<C64>> {
        let m = self.per_axis.max(1);
        let offs: Vec<f64> = if m == 1 {
            vec![0.0]
        } else {
            (0..m).map(|k| -self.radius + 2.0 * self.radius * k as f64 / (m - 1) as f64).collect()
        };
        let mut out = Vec::new();
        for center in [ctx.conjugate(), ctx.z_f_star.to_vec()] {
            for c in 0..center.len() {
                for &a in &offs {
                    for &b in &offs {
                        let mut s = center.clone();
                        s[c] += C64::new(a, b);
                        out.push(s);
                    }
                }
            }
        }
        out
    }
}

/// Gaussian cloud around `conj(z_i)` from a fixed-seed generator.
pub struct Cloud {
    pub count: usize,
    pub radius: f64,
    pub rng_seed: u64,
}

impl SeedStrategy for Cloud {
    fn name(&self) -> &str {
        "cloud"
    }
    fn seeds(&self, ctx: &SeedContext) -> Vec<Vec<C64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        let normal = Normal::new(0.0, self.radius).expect("finite radius");
        let c = ctx.conjugate();
        (0..self.count)
            .map(|_| c.iter().map(|v| v + C64::new(normal.sample(&mut rng), normal.sample(&mut rng))).collect())
            .collect()
    }
}

/// Concatenation of several strategies.
pub struct Combined(pub Vec<Box<dyn SeedStrategy>>);

impl SeedStrategy for Combined {
    fn name(&self) -> &str {
        "default"
    }
    fn seeds(&self, ctx: &SeedContext) -> Vec<Vec<C64>> {
        self.0.iter().flat_map(|s| s.seeds(ctx)).collect()
    }
}

/// Tunables shared by the registered strategies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeedParams {
    pub count: usize,
    pub radius: f64,
    pub rng_seed: u64,
}

impl Default for SeedParams {
    fn default() -> Self {
        SeedParams { count: 16, radius: 0.5, rng_seed: 7 }
    }
}

type Builder = Box<dyn Fn(&SeedParams) -> Box<dyn SeedStrategy> + Send + Sync>;

pub struct SeedRegistry {
    entries: Vec<(String, Builder)>,
}

impl SeedRegistry {
    pub fn empty() -> Self {
        SeedRegistry { entries: Vec::new() }
    }

    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register("conjugate", Box::new(|_| Box::new(Conjugate)));
        r.register(
            "grid",
            Box::new(|p| Box::new(Grid { per_axis: (p.count as f64).sqrt().ceil() as usize, radius: p.radius })),
        );
        r.register(
            "cloud",
            Box::new(|p| Box::new(Cloud { count: p.count, radius: p.radius, rng_seed: p.rng_seed })),
        );
        r.register(
            "default",
            Box::new(|p| {
                Box::new(Combined(vec![
                    Box::new(Conjugate),
                    Box::new(Grid { per_axis: 3, radius: p.radius }),
                    Box::new(Cloud { count: p.count, radius: p.radius, rng_seed: p.rng_seed }),
                ]))
            }),
        );
        r
    }

    pub fn register(&mut self, name: &str, build: Builder) {
        self.entries.retain(|(n, _)| n != name);
        self.entries.push((name.to_string(), build));
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn build(&self, name: &str, params: &SeedParams) -> Result<Box<dyn SeedStrategy>> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, b)| b(params))
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }
}
