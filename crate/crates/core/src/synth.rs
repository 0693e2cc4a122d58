//! Seeded synthetic minutiae: random "master" fingers and noisy impressions
//! of them.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::eval::{Database, Finger, Impression};
use crate::minutiae::{wrap_angle, Minutia, MinutiaSet, DEFAULT_MIN_QUALITY, MAX_QUALITY};
use crate::seeding::{keyed_rng, DOMAIN_FINGER, DOMAIN_IMPRESSION, DOMAIN_PERTURB};

/// Minimum distance between generated minutiae, pixels.
pub const MIN_SEPARATION: f64 = 8.0;

const MAX_DRAWS_PER_MINUTIA: usize = 10_000;

/// Capture noise applied to a master finger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Gaussian positional noise per coordinate, pixels.
    pub jitter_sigma: f64,
    /// Gaussian orientation noise, radians.
    pub theta_sigma: f64,
    /// Probability that a minutia is lost.
    pub drop_prob: f64,
    /// Number of false minutiae added.
    pub spur_count: usize,
    /// Global rotation drawn uniformly from `[-rot_range, rot_range]`, radians.
    pub rot_range: f64,
    /// Global translation drawn uniformly from `[-trans_range, trans_range]` per axis.
    pub trans_range: f64,
    /// Quality labels move by a uniform integer in `[-quality_jitter, quality_jitter]`.
    pub quality_jitter: u8,
}

impl NoiseModel {
    pub const fn none() -> Self {
        NoiseModel {
            jitter_sigma: 0.0,
            theta_sigma: 0.0,
            drop_prob: 0.0,
            spur_count: 0,
            rot_range: 0.0,
            trans_range: 0.0,
            quality_jitter: 0,
        }
    }

    /// Desk-scale default: 2 px jitter, 0.05 rad orientation noise, 20%
    /// loss, 3 spurs, ±6° rotation, ±10 px translation.
    pub fn desk() -> Self {
        NoiseModel {
            jitter_sigma: 2.0,
            theta_sigma: 0.05,
            drop_prob: 0.2,
            spur_count: 3,
            rot_range: 6f64.to_radians(),
            trans_range: 10.0,
            quality_jitter: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !nonneg(self.jitter_sigma) || !nonneg(self.theta_sigma) || !nonneg(self.rot_range) || !nonneg(self.trans_range) {
            return Err(Error::Generation("noise parameters must be finite and >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.drop_prob) {
            return Err(Error::Generation(format!(
                "drop probability {} outside [0, 1]",
                self.drop_prob
            )));
        }
        Ok(())
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::desk()
    }
}

fn random_quality<R: Rng>(rng: &mut R) -> u8 {
    rng.random_range(DEFAULT_MIN_QUALITY..=MAX_QUALITY)
}

/// `z` minutiae placed uniformly in the image with pairwise distance at
/// least [`MIN_SEPARATION`], uniform orientations and qualities in
/// `[45, 100]`.
pub fn generate_finger(seed: u64, z: usize, width: u32, height: u32) -> Result<MinutiaSet> {
    if z < 2 {
        return Err(Error::Generation(format!("need at least 2 minutiae, got {z}")));
    }
    if width == 0 || height == 0 {
        return Err(Error::Generation("image size must be positive".into()));
    }
    let mut rng = keyed_rng(seed, DOMAIN_FINGER, z as u64, 0);
    let (w, h) = (f64::from(width), f64::from(height));
    let mut placed: Vec<Minutia> = Vec::with_capacity(z);
    while placed.len() < z {
        let mut found = None;
        for _ in 0..MAX_DRAWS_PER_MINUTIA {
            let x = rng.random_range(0.0..=w);
            let y = rng.random_range(0.0..=h);
            if placed
                .iter()
                .all(|m| (m.x - x).hypot(m.y - y) >= MIN_SEPARATION)
            {
                found = Some((x, y));
                break;
            }
        }
        let Some((x, y)) = found else {
            return Err(Error::Generation(format!(
                "could not place {z} minutiae {MIN_SEPARATION} px apart in a {width}x{height} image"
            )));
        };
        let theta = rng.random_range(0.0..TAU);
        let quality = random_quality(&mut rng);
        placed.push(Minutia::new(x, y, theta, quality)?);
    }
    MinutiaSet::new(placed, width, height)
}

/// Applies, in order: global rotation about the image center (orientations
/// follow), global translation, per-minutia jitter, orientation noise,
/// quality jitter, deletion and spur insertion. Positions are clamped to
/// the image.
pub fn perturb(s: &MinutiaSet, noise: &NoiseModel, seed: u64) -> Result<MinutiaSet> {
    noise.validate()?;
    let mut rng = keyed_rng(seed, DOMAIN_PERTURB, 0, 0);
    let (w, h) = (f64::from(s.width()), f64::from(s.height()));
    let (cx, cy) = s.center();

    let rot = if noise.rot_range > 0.0 {
        rng.random_range(-noise.rot_range..=noise.rot_range)
    } else {
        0.0
    };
    let (tx, ty) = if noise.trans_range > 0.0 {
        (
            rng.random_range(-noise.trans_range..=noise.trans_range),
            rng.random_range(-noise.trans_range..=noise.trans_range),
        )
    } else {
        (0.0, 0.0)
    };
    let jitter = normal(noise.jitter_sigma)?;
    let turn = normal(noise.theta_sigma)?;
    let (sin_r, cos_r) = rot.sin_cos();

    let mut out = Vec::with_capacity(s.len() + noise.spur_count);
    for m in s.minutiae() {
        let (mut x, mut y, mut theta) = (m.x, m.y, m.theta);
        if rot != 0.0 {
            let (dx, dy) = (x - cx, y - cy);
            x = cx + cos_r * dx - sin_r * dy;
            y = cy + sin_r * dx + cos_r * dy;
            theta += rot;
        }
        x += tx;
        y += ty;
        if let Some(d) = &jitter {
            x += d.sample(&mut rng);
            y += d.sample(&mut rng);
        }
        if let Some(d) = &turn {
            theta += d.sample(&mut rng);
        }
        let mut quality = m.quality;
        if noise.quality_jitter > 0 {
            let k = i32::from(noise.quality_jitter);
            let q = i32::from(quality) + rng.random_range(-k..=k);
            quality = q.clamp(0, i32::from(MAX_QUALITY)) as u8;
        }
        let keep = noise.drop_prob == 0.0 || !rng.random_bool(noise.drop_prob);
        if keep {
            out.push(Minutia {
                x: x.clamp(0.0, w),
                y: y.clamp(0.0, h),
                theta: wrap_angle(theta),
                quality,
            });
        }
    }
    for _ in 0..noise.spur_count {
        let x = rng.random_range(0.0..=w);
        let y = rng.random_range(0.0..=h);
        let theta = rng.random_range(0.0..TAU);
        let quality = random_quality(&mut rng);
        out.push(Minutia::new(x, y, theta, quality)?);
    }
    MinutiaSet::new(out, s.width(), s.height())
}

fn normal(sigma: f64) -> Result<Option<Normal<f64>>> {
    if sigma == 0.0 {
        return Ok(None);
    }
    Normal::new(0.0, sigma)
        .map(Some)
        .map_err(|e| Error::Generation(e.to_string()))
}

/// Shape and noise of a synthetic database.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthProfile {
    pub fingers: usize,
    pub impressions: usize,
    pub minutiae: usize,
    pub width: u32,
    pub height: u32,
    /// Fingers per person when naming files `<person>_<finger>_<image>`.
    pub fingers_per_person: usize,
    pub noise: NoiseModel,
    pub seed: u64,
}

impl Default for SynthProfile {
    /// 50 fingers × 6 impressions of 35 minutiae on 326×357 images.
    fn default() -> Self {
        SynthProfile {
            fingers: 50,
            impressions: 6,
            minutiae: 35,
            width: 326,
            height: 357,
            fingers_per_person: 10,
            noise: NoiseModel::desk(),
            seed: 2017,
        }
    }
}

/// Generates a whole database. Finger `f` uses a master derived from
/// `(seed, f)`; impression `i` of it uses a perturbation seed derived from
/// `(seed, f, i)`, so any subset can be regenerated independently.
pub fn synth_database(profile: &SynthProfile) -> Result<Database> {
    if profile.fingers_per_person == 0 {
        return Err(Error::Generation("fingers_per_person must be positive".into()));
    }
    let mut fingers = Vec::with_capacity(profile.fingers);
    for f in 0..profile.fingers {
        let master_seed = keyed_rng(profile.seed, DOMAIN_FINGER, f as u64, 0).random::<u64>();
        let master = generate_finger(master_seed, profile.minutiae, profile.width, profile.height)?;
        let person = (f / profile.fingers_per_person + 1) as u32;
        let finger = (f % profile.fingers_per_person + 1) as u32;
        let mut impressions = Vec::with_capacity(profile.impressions);
        for i in 0..profile.impressions {
            let seed = keyed_rng(profile.seed, DOMAIN_IMPRESSION, f as u64, i as u64).random::<u64>();
            let image = (i + 1) as u32;
            impressions.push(Impression {
                image,
                name: format!("{person}_{finger}_{image}.xyt"),
                minutiae: perturb(&master, &profile.noise, seed)?,
            });
        }
        fingers.push(Finger {
            person,
            finger,
            impressions,
        });
    }
    Ok(Database::new(fingers))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minutiae::pair_geometry;

    #[test]
    fn generated_finger_respects_separation() {
        let s = generate_finger(1, 35, 326, 357).unwrap();
        assert_eq!(s.len(), 35);
        let ms = s.minutiae();
        for i in 0..ms.len() {
            for j in i + 1..ms.len() {
                assert!(pair_geometry(&ms[i], &ms[j]).unwrap().r >= MIN_SEPARATION);
            }
            assert!((45..=100).contains(&ms[i].quality));
        }
        assert_eq!(generate_finger(1, 35, 326, 357).unwrap(), s);
        assert_ne!(generate_finger(2, 35, 326, 357).unwrap(), s);
        assert_eq!(generate_finger(9, 2, 326, 357).unwrap().len(), 2);
    }

    #[test]
    fn generation_failures() {
        assert!(generate_finger(1, 1, 326, 357).is_err());
        assert!(matches!(generate_finger(1, 50, 10, 10), Err(Error::Generation(_))));
    }

    #[test]
    fn zero_noise_is_identity() {
        let s = generate_finger(5, 30, 326, 357).unwrap();
        assert_eq!(perturb(&s, &NoiseModel::none(), 99).unwrap(), s);
    }

    #[test]
    fn full_drop_empties() {
        let s = generate_finger(5, 30, 326, 357).unwrap();
        let noise = NoiseModel {
            drop_prob: 1.0,
            ..NoiseModel::none()
        };
        assert!(perturb(&s, &noise, 1).unwrap().is_empty());
        let noise = NoiseModel {
            drop_prob: 1.0,
            spur_count: 4,
            ..NoiseModel::none()
        };
        assert_eq!(perturb(&s, &noise, 1).unwrap().len(), 4);
    }

    #[test]
    fn perturb_is_deterministic_and_bounded() {
        let s = generate_finger(5, 35, 326, 357).unwrap();
        let a = perturb(&s, &NoiseModel::desk(), 3).unwrap();
        assert_eq!(a, perturb(&s, &NoiseModel::desk(), 3).unwrap());
        assert_ne!(a, perturb(&s, &NoiseModel::desk(), 4).unwrap());
        assert!(a.minutiae().iter().all(|m| m.x >= 0.0 && m.x <= 326.0 && m.y >= 0.0 && m.y <= 357.0));
    }

    #[test]
    fn rigid_noise_preserves_distances() {
        // keep every minutia well inside so nothing is clamped
        let inner = generate_finger(11, 20, 120, 120).unwrap();
        let ms = inner
            .minutiae()
            .iter()
            .map(|m| Minutia { x: m.x + 103.0, y: m.y + 118.0, ..*m })
            .collect();
        let s = MinutiaSet::new(ms, 326, 357).unwrap();
        let noise = NoiseModel {
            rot_range: 6f64.to_radians(),
            trans_range: 10.0,
            ..NoiseModel::none()
        };
        for seed in 0..20 {
            let p = perturb(&s, &noise, seed).unwrap();
            assert_eq!(p.len(), s.len());
            for i in 0..s.len() {
                for j in 0..s.len() {
                    if i == j {
                        continue;
                    }
                    let r0 = pair_geometry(&s.minutiae()[i], &s.minutiae()[j]).unwrap().r;
                    let r1 = pair_geometry(&p.minutiae()[i], &p.minutiae()[j]).unwrap().r;
                    assert!((r0 - r1).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn invalid_noise_rejected() {
        let s = generate_finger(5, 10, 326, 357).unwrap();
        let bad = NoiseModel {
            drop_prob: 1.5,
            ..NoiseModel::none()
        };
        assert!(perturb(&s, &bad, 0).is_err());
    }

    #[test]
    fn database_layout() {
        let profile = SynthProfile {
            fingers: 12,
            impressions: 3,
            ..SynthProfile::default()
        };
        let db = synth_database(&profile).unwrap();
        assert_eq!(db.fingers().len(), 12);
        assert_eq!(db.fingers()[11].person, 2);
        assert_eq!(db.fingers()[11].finger, 2);
        assert_eq!(db.fingers()[0].impressions[2].name, "1_1_3.xyt");
        assert_eq!(db, synth_database(&profile).unwrap());
    }
}
