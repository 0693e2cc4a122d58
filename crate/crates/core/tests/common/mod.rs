#![allow(dead_code)]

use std::f64::consts::TAU;

use pairspec::{Complex64, Minutia, MinutiaSet};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const WIDTH: u32 = 326;
pub const HEIGHT: u32 = 357;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_minutia<R: Rng>(rng: &mut R, x: f64, y: f64) -> Minutia {
    Minutia::new(x, y, rng.random_range(0.0..TAU), rng.random_range(45..=100)).unwrap()
}

/// `z` minutiae uniform in the rectangle `[0, w] × [0, h]` of a 326×357 image.
pub fn set_in_rect<R: Rng>(rng: &mut R, z: usize, w: f64, h: f64) -> MinutiaSet {
    let ms = (0..z)
        .map(|_| {
            let x = rng.random_range(0.0..w);
            let y = rng.random_range(0.0..h);
            random_minutia(rng, x, y)
        })
        .collect();
    MinutiaSet::new(ms, WIDTH, HEIGHT).unwrap()
}

/// `z` minutiae uniform in a disk of radius `radius` about the image center,
/// so any rotation about the center keeps them inside the image.
pub fn set_in_disk<R: Rng>(rng: &mut R, z: usize, radius: f64) -> MinutiaSet {
    let (cx, cy) = (f64::from(WIDTH) / 2.0, f64::from(HEIGHT) / 2.0);
    let ms = (0..z)
        .map(|_| {
            let r = radius * rng.random_range(0.0f64..1.0).sqrt();
            let a = rng.random_range(0.0..TAU);
            random_minutia(rng, cx + r * a.cos(), cy + r * a.sin())
        })
        .collect();
    MinutiaSet::new(ms, WIDTH, HEIGHT).unwrap()
}

/// Keeps the minutiae of `s` within `radius` of the image center.
pub fn central(s: &MinutiaSet, radius: f64) -> MinutiaSet {
    let (cx, cy) = s.center();
    let ms = s
        .minutiae()
        .iter()
        .filter(|m| (m.x - cx).hypot(m.y - cy) <= radius)
        .copied()
        .collect();
    MinutiaSet::new(ms, s.width(), s.height()).unwrap()
}

pub fn random_complex<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
        .collect()
}

/// Textbook complex Pearson correlation: explicit means, explicit standard
/// deviations, then the normalized hermitian inner product divided by `n`.
pub fn naive_pearson(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    let n = u.len();
    let mut mu = Complex64::new(0.0, 0.0);
    let mut mv = Complex64::new(0.0, 0.0);
    for i in 0..n {
        mu += u[i];
        mv += v[i];
    }
    mu /= n as f64;
    mv /= n as f64;
    let mut var_u = 0.0;
    let mut var_v = 0.0;
    for i in 0..n {
        var_u += (u[i] - mu).norm_sqr();
        var_v += (v[i] - mv).norm_sqr();
    }
    let sd_u = (var_u / n as f64).sqrt();
    let sd_v = (var_v / n as f64).sqrt();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let a = (u[i] - mu) / sd_u;
        let b = (v[i] - mv) / sd_v;
        acc += a.conj() * b;
    }
    acc / n as f64
}

/// Brute-force ROC sweep: every threshold is evaluated by counting scores
/// directly, then the first sign change of FAR - FRR is interpolated.
pub fn brute_force_eer(genuine: &[f64], impostor: &[f64]) -> f64 {
    let mut thresholds: Vec<f64> = genuine.iter().chain(impostor).copied().collect();
    thresholds.push(f64::INFINITY);
    thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    thresholds.dedup();
    let mut prev: Option<(f64, f64)> = None;
    for &t in &thresholds {
        let mut fa = 0usize;
        for &s in impostor {
            if s >= t {
                fa += 1;
            }
        }
        let mut fr = 0usize;
        for &s in genuine {
            if s < t {
                fr += 1;
            }
        }
        let far = fa as f64 / impostor.len() as f64;
        let frr = fr as f64 / genuine.len() as f64;
        let d = far - frr;
        if d <= 0.0 {
            if d == 0.0 {
                return far;
            }
            let (pfar, pfrr) = prev.expect("first threshold always has FAR = 1, FRR = 0");
            let dp = pfar - pfrr;
            let s = dp / (dp - d);
            return pfar + s * (far - pfar);
        }
        prev = Some((far, frr));
    }
    unreachable!("the +inf threshold has FAR - FRR = -1")
}
