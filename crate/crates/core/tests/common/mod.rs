//! Oracles shared by the integration tests. Everything here works from raw
//! vertex coordinates and does not go through the solver.

#![allow(dead_code)]

use nalgebra::Vector3;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Uniformly distributed unit vector.
pub fn random_direction(rng: &mut StdRng) -> Vector3<f64> {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let h = (1.0 - z * z).max(0.0).sqrt();
    Vector3::new(h * phi.cos(), h * phi.sin(), z)
}

/// Log-uniform value in `[lo, hi]`.
pub fn log_uniform(rng: &mut StdRng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

/// `|p - v| - |p|`, evaluated without cancellation.
pub fn distance_excess(p: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
    (v.norm_squared() - 2.0 * p.dot(v)) / ((p - v).norm() + p.norm())
}

/// Plane-wave arrival lags (m) for a source in direction `u`: `-u·v`.
pub fn plane_lags(vertices: &[Vector3<f64>], u: &Vector3<f64>) -> Vec<f64> {
    vertices.iter().map(|v| -u.dot(v)).collect()
}

pub fn bearing_elevation_of(u: &Vector3<f64>) -> (f64, f64) {
    let b = u.y.atan2(u.x).to_degrees().rem_euclid(360.0);
    let e = u.z.atan2(u.x.hypot(u.y)).to_degrees();
    (b, e)
}

pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Spread of a set of positive values relative to their mean.
pub fn relative_spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (max - min) / mean
}
