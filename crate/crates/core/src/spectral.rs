//! Pair-based spectral functions.
//!
//! For every ordered admissible pair `(a, b)` with distance `R_ab` and
//! direction `φ_ab`, the four functions accumulate
//!
//! ```text
//! L_x (q, w) = Σ e^{iqφ_ab} e^{iw ln R_ab}
//! L_xθ(q, w) = Σ e^{iqφ_ab} e^{iw ln R_ab} e^{i(θ_a - θ_b)}
//! M_x (q, R) = Σ e^{iqφ_ab} exp(-(R - R_ab)² / 2σ²)
//! M_xθ(q, R) = Σ e^{iqφ_ab} exp(-(R - R_ab)² / 2σ²) e^{i(θ_a - θ_b)}
//! ```
//!
//! Entries are summed in the order produced by
//! [`admissible_pairs`](crate::minutiae::admissible_pairs), so templates are
//! bit-reproducible.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::minutiae::{admissible_pairs, MinutiaSet, Pair};

/// Which spectral function a grid belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `(q, w)` grid: Fourier transform in both the angle and `ln R`.
    L,
    /// `(q, R)` grid: Fourier transform in the angle, Gaussian peaks in `R`.
    M,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::L => "L",
            Family::M => "M",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" | "l" => Ok(Family::L),
            "M" | "m" => Ok(Family::M),
            other => Err(Error::InvalidGrid(format!("unknown family {other:?}"))),
        }
    }
}

/// Whether the orientation phase `e^{i(θ_a - θ_b)}` enters the sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Location,
    LocationOrientation,
}

impl Variant {
    pub fn tag(self) -> &'static str {
        match self {
            Variant::Location => "x",
            Variant::LocationOrientation => "xtheta",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(Variant::Location),
            "xtheta" => Ok(Variant::LocationOrientation),
            other => Err(Error::InvalidGrid(format!("unknown variant {other:?}"))),
        }
    }
}

/// Radial sampling profile for M grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RadialProfile {
    /// `R ∈ [16, 130]`, 20 points; tuned on 256-pixel-wide images.
    #[default]
    Mcyt,
    /// `R ∈ [16, 160]`, 25 points; tuned on 326-pixel-wide images.
    Verifinger,
}

impl RadialProfile {
    /// Picks the profile whose reference image width is closest from below.
    pub fn for_image_width(width: u32) -> Self {
        if width >= 326 {
            RadialProfile::Verifinger
        } else {
            RadialProfile::Mcyt
        }
    }

    fn radial_range(self) -> (f64, f64, usize) {
        match self {
            RadialProfile::Mcyt => (16.0, 130.0, 20),
            RadialProfile::Verifinger => (16.0, 160.0, 25),
        }
    }
}

pub const DEFAULT_SIGMA: f64 = 2.3;
pub const L_MAX_Q: i32 = 24;
pub const M_MAX_Q: i32 = 16;
pub const L_W_RANGE: (f64, f64, usize) = (0.2, 37.7, 32);

/// `n` equally spaced values from `a` to `b`, both endpoints included.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let step = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
                .collect()
        }
    }
}

/// The discrete evaluation grid of a spectral template.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    family: Family,
    q_values: Vec<i32>,
    /// `w` values for [`Family::L`], `R` in pixels for [`Family::M`].
    radial_values: Vec<f64>,
    sigma: f64,
}

impl GridSpec {
    pub fn new(family: Family, q_values: Vec<i32>, radial_values: Vec<f64>, sigma: f64) -> Result<Self> {
        if q_values.is_empty() || radial_values.is_empty() {
            return Err(Error::InvalidGrid("grid has no points".into()));
        }
        if q_values.contains(&0) {
            return Err(Error::InvalidGrid("q = 0 is not allowed".into()));
        }
        let mut sorted = q_values.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidGrid("q values must be distinct".into()));
        }
        if radial_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("radial values must be finite".into()));
        }
        if radial_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("radial values must be strictly increasing".into()));
        }
        if family == Family::M && !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidGrid(format!("sigma must be positive, got {sigma}")));
        }
        Ok(GridSpec {
            family,
            q_values,
            radial_values,
            sigma,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn q_values(&self) -> &[i32] {
        &self.q_values
    }

    pub fn radial_values(&self) -> &[f64] {
        &self.radial_values
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.q_values.len() * self.radial_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same grid with every odd `q` removed.
    pub fn even_q_only(&self) -> Result<Self> {
        let q = self.q_values.iter().copied().filter(|q| q % 2 == 0).collect();
        GridSpec::new(self.family, q, self.radial_values.clone(), self.sigma)
    }
}

/// Default grid for a family and variant, picking the M radial profile from
/// the image width.
pub fn default_grid(family: Family, variant: Variant, image_width: u32) -> GridSpec {
    grid_for_profile(family, variant, RadialProfile::for_image_width(image_width))
}

/// Default grid for an explicitly chosen radial profile. The profile only
/// affects M grids.
pub fn grid_for_profile(family: Family, variant: Variant, profile: RadialProfile) -> GridSpec {
    let keep = |q: &i32| variant == Variant::LocationOrientation || q % 2 == 0;
    let grid = match family {
        Family::L => {
            let q = (-L_MAX_Q..=L_MAX_Q).filter(|&q| q != 0).filter(keep).collect();
            let (a, b, n) = L_W_RANGE;
            GridSpec::new(Family::L, q, linspace(a, b, n), DEFAULT_SIGMA)
        }
        Family::M => {
            let q = (1..=M_MAX_Q).filter(keep).collect();
            let (a, b, n) = profile.radial_range();
            GridSpec::new(Family::M, q, linspace(a, b, n), DEFAULT_SIGMA)
        }
    };
    grid.expect("built-in grids are valid")
}

/// Location and orientation grids used together for fused matching.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPair {
    pub location: GridSpec,
    pub orientation: GridSpec,
}

impl GridPair {
    pub fn for_profile(family: Family, profile: RadialProfile) -> Self {
        GridPair {
            location: grid_for_profile(family, Variant::Location, profile),
            orientation: grid_for_profile(family, Variant::LocationOrientation, profile),
        }
    }

    pub fn for_variant(&self, variant: Variant) -> &GridSpec {
        match variant {
            Variant::Location => &self.location,
            Variant::LocationOrientation => &self.orientation,
        }
    }
}

/// A complex-valued spectral function sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTemplate {
    grid: GridSpec,
    variant: Variant,
    /// Row-major: `values[qi * n_radial + ri]`.
    values: Vec<Complex64>,
    source: Option<String>,
}

impl SpectralTemplate {
    pub fn from_parts(grid: GridSpec, variant: Variant, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidGrid("template contains non-finite values".into()));
        }
        Ok(SpectralTemplate {
            grid,
            variant,
            values,
            source: None,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn family(&self) -> Family {
        self.grid.family
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn get(&self, qi: usize, ri: usize) -> Complex64 {
        self.values[qi * self.grid.radial_values.len() + ri]
    }

    /// Values at the grid row with the given `q`, if present.
    pub fn row(&self, q: i32) -> Option<&[Complex64]> {
        let qi = self.grid.q_values.iter().position(|&v| v == q)?;
        let n = self.grid.radial_values.len();
        Some(&self.values[qi * n..(qi + 1) * n])
    }

    /// `max |a - b| / max |a|` over all entries (infinity norm).
    pub fn relative_difference(&self, other: &SpectralTemplate) -> f64 {
        assert_eq!(self.values.len(), other.values.len(), "template sizes differ");
        let scale = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let diff = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}

/// Computes `L_x` or `L_xθ` on a [`Family::L`] grid.
pub fn compute_l(s: &MinutiaSet, variant: Variant, grid: &GridSpec) -> Result<SpectralTemplate> {
    expect_family(grid, Family::L)?;
    compute_template(s, variant, grid)
}

/// Computes `M_x` or `M_xθ` on a [`Family::M`] grid.
pub fn compute_m(s: &MinutiaSet, variant: Variant, grid: &GridSpec) -> Result<SpectralTemplate> {
    expect_family(grid, Family::M)?;
    compute_template(s, variant, grid)
}

/// Computes the spectral function selected by the grid's family.
pub fn compute_template(s: &MinutiaSet, variant: Variant, grid: &GridSpec) -> Result<SpectralTemplate> {
    let pairs = admissible_pairs(s);
    if pairs.is_empty() {
        return Err(Error::InsufficientMinutiae { count: s.len() });
    }
    compute_from_pairs(&pairs.pairs, variant, grid)
}

/// M template that ignores pairs farther than `cutoff_sigmas · σ` from a
/// radial grid point. Faster, but no longer equal to the exact sum.
pub fn compute_m_with_cutoff(
    s: &MinutiaSet,
    variant: Variant,
    grid: &GridSpec,
    cutoff_sigmas: f64,
) -> Result<SpectralTemplate> {
    expect_family(grid, Family::M)?;
    let pairs = admissible_pairs(s);
    if pairs.is_empty() {
        return Err(Error::InsufficientMinutiae { count: s.len() });
    }
    let values = accumulate(&pairs.pairs, variant, grid, Some(cutoff_sigmas * grid.sigma));
    SpectralTemplate::from_parts(grid.clone(), variant, values)
}

/// Evaluates the spectral sum over an explicit pair list, honoring each
/// pair's weight.
pub fn compute_from_pairs(pairs: &[Pair], variant: Variant, grid: &GridSpec) -> Result<SpectralTemplate> {
    if pairs.is_empty() {
        return Err(Error::InsufficientMinutiae { count: 0 });
    }
    let values = accumulate(pairs, variant, grid, None);
    SpectralTemplate::from_parts(grid.clone(), variant, values)
}

fn expect_family(grid: &GridSpec, family: Family) -> Result<()> {
    if grid.family != family {
        return Err(Error::InvalidGrid(format!(
            "expected a {family} grid, got {}",
            grid.family
        )));
    }
    Ok(())
}

fn accumulate(pairs: &[Pair], variant: Variant, grid: &GridSpec, cutoff: Option<f64>) -> Vec<Complex64> {
    let nq = grid.q_values.len();
    let nr = grid.radial_values.len();
    let mut out = vec![Complex64::new(0.0, 0.0); nq * nr];
    let mut angular = vec![Complex64::new(0.0, 0.0); nq];
    let inv_two_var = 1.0 / (2.0 * grid.sigma * grid.sigma);

    // Pair loop outermost: each entry still sees the pairs in list order.
    for p in pairs {
        let orient = match variant {
            Variant::Location => None,
            Variant::LocationOrientation => Some(Complex64::cis(p.dtheta)),
        };
        for (slot, &q) in angular.iter_mut().zip(&grid.q_values) {
            let mut v = Complex64::cis(f64::from(q) * p.geometry.phi);
            if let Some(o) = orient {
                v *= o;
            }
            if p.weight != 1.0 {
                v *= p.weight;
            }
            *slot = v;
        }

        match grid.family {
            Family::L => {
                let ln_r = p.geometry.r.ln();
                for (ri, &w) in grid.radial_values.iter().enumerate() {
                    let radial = Complex64::cis(w * ln_r);
                    for (qi, a) in angular.iter().enumerate() {
                        out[qi * nr + ri] += a * radial;
                    }
                }
            }
            Family::M => {
                for (ri, &r) in grid.radial_values.iter().enumerate() {
                    let d = r - p.geometry.r;
                    if cutoff.is_some_and(|c| d.abs() > c) {
                        continue;
                    }
                    let g = (-d * d * inv_two_var).exp();
                    for (qi, a) in angular.iter().enumerate() {
                        out[qi * nr + ri] += a * g;
                    }
                }
            }
        }
    }
    out
}

/// Applies the phase law of a global rotation by `phi` (and, for L grids, a
/// scaling by `lambda`) without recomputing the sum.
pub fn transform_template(t: &SpectralTemplate, phi: f64, lambda: f64) -> Result<SpectralTemplate> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::UnsupportedTransform(format!(
            "scale factor must be positive, got {lambda}"
        )));
    }
    if t.grid.family == Family::M && lambda != 1.0 {
        return Err(Error::UnsupportedTransform(
            "M templates have no scaling law; lambda must be 1".into(),
        ));
    }
    if !phi.is_finite() {
        return Err(Error::UnsupportedTransform(format!("rotation angle {phi} is not finite")));
    }
    if phi == 0.0 && lambda == 1.0 {
        return Ok(t.clone());
    }

    let nr = t.grid.radial_values.len();
    let ln_lambda = lambda.ln();
    let mut values = t.values.clone();
    for (qi, &q) in t.grid.q_values.iter().enumerate() {
        let rot = Complex64::cis(f64::from(q) * phi);
        for (ri, &radial) in t.grid.radial_values.iter().enumerate() {
            let factor = match t.grid.family {
                Family::L if lambda != 1.0 => rot * Complex64::cis(radial * ln_lambda),
                _ => rot,
            };
            values[qi * nr + ri] *= factor;
        }
    }
    Ok(SpectralTemplate {
        grid: t.grid.clone(),
        variant: t.variant,
        values,
        source: t.source.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minutiae::Minutia;
    use std::f64::consts::PI;

    fn two_point_set() -> MinutiaSet {
        MinutiaSet::new(
            vec![
                Minutia::new(0.0, 0.0, 0.0, 80).unwrap(),
                Minutia::new(3.0, 4.0, 0.0, 80).unwrap(),
            ],
            326,
            357,
        )
        .unwrap()
    }

    #[test]
    fn linspace_includes_endpoints() {
        let v = linspace(0.2, 37.7, 32);
        assert_eq!(v.len(), 32);
        assert_eq!(v[0], 0.2);
        assert_eq!(v[31], 37.7);
        let step = (37.7 - 0.2) / 31.0;
        for w in v.windows(2) {
            assert!((w[1] - w[0] - step).abs() < 1e-12);
        }
    }

    #[test]
    fn default_grid_sizes() {
        let g = default_grid(Family::M, Variant::LocationOrientation, 256);
        assert_eq!(g.q_values(), (1..=16).collect::<Vec<_>>().as_slice());
        assert_eq!(g.radial_values().len(), 20);
        assert_eq!(g.radial_values()[0], 16.0);
        assert_eq!(g.radial_values()[19], 130.0);
        assert_eq!(g.sigma(), 2.3);
        assert_eq!(g.len(), 320);

        let g = default_grid(Family::M, Variant::Location, 326);
        assert_eq!(g.q_values(), &[2, 4, 6, 8, 10, 12, 14, 16]);
        assert_eq!(g.radial_values().len(), 25);
        assert_eq!(g.radial_values()[24], 160.0);
        assert_eq!(g.len(), 200);

        for w in [100, 256, 326, 1000] {
            let g = default_grid(Family::L, Variant::LocationOrientation, w);
            assert_eq!(g.q_values().len(), 48);
            assert_eq!(g.len(), 1536);
        }
        let g = default_grid(Family::L, Variant::Location, 326);
        assert!(g.q_values().iter().all(|q| q % 2 == 0));
        assert_eq!(g.q_values().len(), 24);
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(Family::M, vec![1, 1], vec![1.0], 1.0).is_err());
        assert!(GridSpec::new(Family::M, vec![0], vec![1.0], 1.0).is_err());
        assert!(GridSpec::new(Family::M, vec![1], vec![2.0, 1.0], 1.0).is_err());
        assert!(GridSpec::new(Family::M, vec![1], vec![1.0], 0.0).is_err());
        assert!(GridSpec::new(Family::L, vec![1], vec![1.0], 0.0).is_ok());
        assert!(GridSpec::new(Family::L, vec![], vec![1.0], 0.0).is_err());
    }

    #[test]
    fn l_two_points() {
        let grid = GridSpec::new(Family::L, vec![1, 2], vec![1.0], 0.0).unwrap();
        let t = compute_l(&two_point_set(), Variant::Location, &grid).unwrap();
        let phi = 4.0f64.atan2(3.0);
        let expected = Complex64::cis(2.0 * phi) * Complex64::cis(5.0f64.ln()) * 2.0;
        let got = t.get(1, 0);
        assert!((got - expected).norm() < 1e-14);
        assert!((got.norm() - 2.0).abs() < 1e-14);
        assert!(t.get(0, 0).norm() < 1e-15);
    }

    #[test]
    fn m_two_points() {
        let grid = GridSpec::new(Family::M, vec![1, 2], vec![5.0, 5.0 + 2.3], 2.3).unwrap();
        let t = compute_m(&two_point_set(), Variant::Location, &grid).unwrap();
        let at5 = t.get(1, 0);
        // 2·e^{2i·atan2(4,3)} = 2·(cos 2φ + i sin 2φ) with cos 2φ = -7/25, sin 2φ = 24/25
        assert!((at5 - Complex64::new(-0.56, 1.92)).norm() < 1e-14);
        assert!(t.get(0, 0).norm() < 1e-15);
        assert!((t.get(1, 1) - at5 * (-0.5f64).exp()).norm() < 1e-14);
    }

    #[test]
    fn family_mismatch_is_an_error() {
        let g = default_grid(Family::M, Variant::Location, 256);
        assert!(matches!(
            compute_l(&two_point_set(), Variant::Location, &g),
            Err(Error::InvalidGrid(_))
        ));
    }

    #[test]
    fn too_few_minutiae() {
        let g = default_grid(Family::M, Variant::Location, 256);
        let one = MinutiaSet::new(vec![Minutia::new(1.0, 1.0, 0.0, 50).unwrap()], 256, 400).unwrap();
        assert!(matches!(
            compute_m(&one, Variant::Location, &g),
            Err(Error::InsufficientMinutiae { count: 1 })
        ));
    }

    #[test]
    fn transform_identities() {
        let g = default_grid(Family::M, Variant::Location, 256);
        let s = MinutiaSet::new(
            vec![
                Minutia::new(10.0, 10.0, 0.3, 80).unwrap(),
                Minutia::new(40.0, 25.0, 1.3, 80).unwrap(),
                Minutia::new(22.0, 60.0, 2.3, 80).unwrap(),
            ],
            256,
            400,
        )
        .unwrap();
        let t = compute_m(&s, Variant::Location, &g).unwrap();
        assert_eq!(transform_template(&t, 0.0, 1.0).unwrap(), t);
        let half_turn = transform_template(&t, PI, 1.0).unwrap();
        assert!(t.relative_difference(&half_turn) < 1e-14);
        assert!(matches!(
            transform_template(&t, 0.1, 1.1),
            Err(Error::UnsupportedTransform(_))
        ));
    }

    #[test]
    fn cutoff_approximates_exact_sum() {
        let g = default_grid(Family::M, Variant::LocationOrientation, 256);
        let s = MinutiaSet::new(
            (0..10)
                .map(|i| {
                    let f = f64::from(i);
                    Minutia::new(20.0 + 9.0 * f, 60.0 + (f * 1.7).sin() * 40.0, f, 80).unwrap()
                })
                .collect(),
            256,
            400,
        )
        .unwrap();
        let exact = compute_m(&s, Variant::LocationOrientation, &g).unwrap();
        let fast = compute_m_with_cutoff(&s, Variant::LocationOrientation, &g, 6.0).unwrap();
        assert!(exact.relative_difference(&fast) < 1e-6);
    }
}
