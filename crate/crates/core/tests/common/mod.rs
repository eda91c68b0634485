#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semiprop::{FamilyDescriptor, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_c(r: &mut ChaCha8Rng, scale: f64) -> C64 {
    c(r.gen_range(-scale..scale), r.gen_range(-scale..scale))
}

pub fn random_vec(r: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<C64> {
    (0..d).map(|_| random_c(r, scale)).collect()
}

pub fn conj(v: &[C64]) -> Vec<C64> {
    v.iter().map(|x| x.conj()).collect()
}

/// One representative of each family, small enough for dense checks.
pub fn families() -> Vec<FamilyDescriptor> {
    vec![
        FamilyDescriptor::canonical(2, 30).unwrap(),
        FamilyDescriptor::spin(&[0.5, 1.5]).unwrap(),
        FamilyDescriptor::sun(3, 2).unwrap(),
    ]
}

pub fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// `<z_f|z_i>` for the harmonic oscillator after time `t` with `H = a^dag a + 1/2`.
pub fn ho_closed(zi: C64, zf: C64, t: f64) -> C64 {
    (-zf.norm_sqr() / 2.0 - zi.norm_sqr() / 2.0 + zf.conj() * zi * c(0.0, -t).exp() - c(0.0, t / 2.0)).exp()
}

/// Spin precession under `H = Jz` (unit frequency).
pub fn spin_closed(j: f64, zi: C64, zf: C64, t: f64) -> C64 {
    c(0.0, j * t).exp() * (1.0 + zf.conj() * zi * c(0.0, -t).exp()).powf(2.0 * j)
        / ((1.0 + zf.norm_sqr()).powf(j) * (1.0 + zi.norm_sqr()).powf(j))
}
