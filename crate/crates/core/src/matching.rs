//! Complex correlation scores, fusion and rotation search.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::minutiae::{MinutiaSet, DEFAULT_MIN_QUALITY};
use crate::spectral::{
    compute_template, transform_template, Family, GridPair, RadialProfile, SpectralTemplate, Variant,
};

/// Complex Pearson correlation
/// `ρ(u, v) = (1/n) Σ conj((u_i - ū)/σ_u) (v_i - v̄)/σ_v`
/// with complex means and real standard deviations.
pub fn complex_pearson(u: &[Complex64], v: &[Complex64]) -> Result<Complex64> {
    if u.len() != v.len() {
        return Err(Error::IncompatibleTemplates(format!(
            "vector lengths differ: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    if u.len() < 2 {
        return Err(Error::DegenerateScore("need at least two entries".into()));
    }
    let n = u.len() as f64;
    let mu = u.iter().sum::<Complex64>() / n;
    let mv = v.iter().sum::<Complex64>() / n;

    let mut cross = Complex64::new(0.0, 0.0);
    let (mut su, mut sv) = (0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        let da = a - mu;
        let db = b - mv;
        cross += da.conj() * db;
        su += da.norm_sqr();
        sv += db.norm_sqr();
    }
    if su == 0.0 || sv == 0.0 {
        return Err(Error::DegenerateScore("zero variance".into()));
    }
    // the 1/n factors of the two standard deviations and the mean cancel
    Ok(cross / (su.sqrt() * sv.sqrt()))
}

/// `|ρ(F, F')|` with both templates flattened in row-major grid order.
pub fn score(f: &SpectralTemplate, f2: &SpectralTemplate) -> Result<f64> {
    if f.variant() != f2.variant() {
        return Err(Error::IncompatibleTemplates(format!(
            "variants differ: {} vs {}",
            f.variant(),
            f2.variant()
        )));
    }
    if f.grid() != f2.grid() {
        return Err(Error::IncompatibleTemplates("grids differ".into()));
    }
    Ok(complex_pearson(f.values(), f2.values())?.norm())
}

/// Sum of the location and location-orientation scores.
pub fn fused_score(
    fx: &SpectralTemplate,
    fx2: &SpectralTemplate,
    ft: &SpectralTemplate,
    ft2: &SpectralTemplate,
) -> Result<f64> {
    check_variant(fx, Variant::Location)?;
    check_variant(fx2, Variant::Location)?;
    check_variant(ft, Variant::LocationOrientation)?;
    check_variant(ft2, Variant::LocationOrientation)?;
    if fx.family() != ft.family() {
        return Err(Error::IncompatibleTemplates("cannot fuse L and M scores".into()));
    }
    Ok(score(fx, fx2)? + score(ft, ft2)?)
}

fn check_variant(t: &SpectralTemplate, want: Variant) -> Result<()> {
    if t.variant() != want {
        return Err(Error::IncompatibleTemplates(format!(
            "expected a {want} template, got {}",
            t.variant()
        )));
    }
    Ok(())
}

/// The two templates of one fingerprint that enter a fused score.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplatePair {
    location: SpectralTemplate,
    orientation: SpectralTemplate,
}

impl TemplatePair {
    pub fn new(location: SpectralTemplate, orientation: SpectralTemplate) -> Result<Self> {
        check_variant(&location, Variant::Location)?;
        check_variant(&orientation, Variant::LocationOrientation)?;
        if location.family() != orientation.family() {
            return Err(Error::IncompatibleTemplates("template families differ".into()));
        }
        Ok(TemplatePair {
            location,
            orientation,
        })
    }

    pub fn compute(s: &MinutiaSet, grids: &GridPair) -> Result<Self> {
        TemplatePair::new(
            compute_template(s, Variant::Location, &grids.location)?,
            compute_template(s, Variant::LocationOrientation, &grids.orientation)?,
        )
    }

    pub fn location(&self) -> &SpectralTemplate {
        &self.location
    }

    pub fn orientation(&self) -> &SpectralTemplate {
        &self.orientation
    }

    pub fn family(&self) -> Family {
        self.location.family()
    }

    pub fn rotated(&self, phi: f64) -> Result<Self> {
        Ok(TemplatePair {
            location: transform_template(&self.location, phi, 1.0)?,
            orientation: transform_template(&self.orientation, phi, 1.0)?,
        })
    }

    pub fn into_parts(self) -> (SpectralTemplate, SpectralTemplate) {
        (self.location, self.orientation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchResult {
    pub score_x: f64,
    pub score_xtheta: f64,
    pub fused: f64,
    /// Rotation applied to the probe at the best score, radians.
    pub phi_opt: f64,
}

/// Rotates the probe by every candidate angle and keeps the best fused
/// score. Equal scores resolve to the smallest `|φ|`, then the negative
/// angle.
pub fn match_with_rotation(enrolled: &TemplatePair, probe: &TemplatePair, angles: &[f64]) -> Result<MatchResult> {
    if angles.is_empty() {
        return Err(Error::Protocol("rotation angle list is empty".into()));
    }
    let mut best: Option<MatchResult> = None;
    for &phi in angles {
        let rotated = probe.rotated(phi)?;
        let score_x = score(&enrolled.location, &rotated.location)?;
        let score_xtheta = score(&enrolled.orientation, &rotated.orientation)?;
        let candidate = MatchResult {
            score_x,
            score_xtheta,
            fused: score_x + score_xtheta,
            phi_opt: phi,
        };
        if best.is_none_or(|b| prefer(&candidate, &b)) {
            best = Some(candidate);
        }
    }
    Ok(best.expect("angle list is non-empty"))
}

fn prefer(a: &MatchResult, b: &MatchResult) -> bool {
    if a.fused != b.fused {
        return a.fused > b.fused;
    }
    let (pa, pb) = (a.phi_opt.abs(), b.phi_opt.abs());
    if pa != pb {
        return pa < pb;
    }
    a.phi_opt < b.phi_opt
}

/// Angles `k·step` for `|k·step| <= max`, in radians, ascending.
pub fn angle_range(max_deg: f64, step_deg: f64) -> Vec<f64> {
    if step_deg.is_nan() || max_deg.is_nan() || step_deg <= 0.0 || max_deg < 0.0 {
        return vec![0.0];
    }
    let n = (max_deg / step_deg + 1e-9).floor() as i64;
    (-n..=n).map(|k| (k as f64 * step_deg).to_radians()).collect()
}

/// Named rotation-search ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RotationPreset {
    #[default]
    Off,
    /// `|φ| <= 3°`, step 1.5°.
    Narrow,
    /// `|φ| <= 4.5°`, step 1.5°.
    Wide,
}

impl RotationPreset {
    pub fn angles(self) -> Vec<f64> {
        match self {
            RotationPreset::Off => vec![0.0],
            RotationPreset::Narrow => angle_range(3.0, 1.5),
            RotationPreset::Wide => angle_range(4.5, 1.5),
        }
    }
}

/// Everything needed to turn minutiae into templates and compare them.
#[derive(Debug, Clone, PartialEq)]
pub struct Matcher {
    pub grids: GridPair,
    pub min_quality: u32,
    pub angles: Vec<f64>,
    pub flip_y: bool,
}

impl Matcher {
    pub fn new(family: Family, profile: RadialProfile) -> Self {
        Matcher {
            grids: GridPair::for_profile(family, profile),
            min_quality: u32::from(DEFAULT_MIN_QUALITY),
            angles: vec![0.0],
            flip_y: false,
        }
    }

    pub fn with_angles(mut self, angles: Vec<f64>) -> Self {
        self.angles = angles;
        self
    }

    pub fn family(&self) -> Family {
        self.grids.location.family()
    }

    /// Minutiae after orientation convention and quality filtering.
    pub fn prepare(&self, s: &MinutiaSet) -> MinutiaSet {
        let s = if self.flip_y { s.flip_y() } else { s.clone() };
        s.filter_quality(self.min_quality)
    }

    pub fn enroll(&self, s: &MinutiaSet) -> Result<TemplatePair> {
        TemplatePair::compute(&self.prepare(s), &self.grids)
    }

    pub fn compare(&self, enrolled: &TemplatePair, probe: &TemplatePair) -> Result<MatchResult> {
        match_with_rotation(enrolled, probe, &self.angles)
    }
}
