#![allow(dead_code)]

use msis_core::antenna::PatternSpec;
use msis_core::{Model, Pattern, SystemConfig};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn model(sectors: usize, m: usize, pattern: Pattern) -> Model {
    Model::new(SystemConfig::symmetric(sectors, m, pattern)).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform angles at least `margin` rad away from every sector edge.
pub fn interior_angles(spec: &PatternSpec, count: usize, margin: f64, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let t = r.random::<f64>() * std::f64::consts::TAU;
        if spec.edge_distance(t) >= margin {
            out.push(t);
        }
    }
    out
}

pub fn random_vec(len: usize, seed: u64) -> Vec<Complex64> {
    let mut r = rng(seed);
    (0..len)
        .map(|_| Complex64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5))
        .collect()
}

pub fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub const PATTERNS: [Pattern; 2] = [Pattern::Isotropic, Pattern::Directive];
