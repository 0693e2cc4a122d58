//! Single-minutia spectral function on a log-polar frequency grid, kept as a
//! reference point for accuracy and cost comparisons.
//!
//! `G[α][β] = e^{-σ²k²/2} |Σ_j e^{-i(k_x x_j + k_y y_j)}|` with
//! `k_x = e^α cos β`, `k_y = e^α sin β`. Translation invariance comes from
//! the modulus; rotations become circular column shifts and scalings become
//! row shifts.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::minutiae::MinutiaSet;
use crate::spectral::{linspace, Variant};

pub const BASELINE_ALPHA_COUNT: usize = 128;
pub const BASELINE_BETA_COUNT: usize = 256;

/// Log-radial frequency range in radians per pixel.
pub const BASELINE_K_RANGE: (f64, f64) = (0.02, 1.2);

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineGrid {
    alpha_values: Vec<f64>,
    beta_values: Vec<f64>,
    sigma: f64,
}

impl BaselineGrid {
    /// `alpha_count` log-radii spanning `[ln k_min, ln k_max]` and
    /// `beta_count` angles `j·2π/beta_count`.
    pub fn new(alpha_count: usize, beta_count: usize, k_range: (f64, f64), sigma: f64) -> Result<Self> {
        if alpha_count == 0 || beta_count == 0 {
            return Err(Error::InvalidGrid("baseline grid has no points".into()));
        }
        let (k_min, k_max) = k_range;
        if !(k_min > 0.0 && k_max > k_min && k_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("bad frequency range {k_min}..{k_max}")));
        }
        let alpha = linspace(k_min.ln(), k_max.ln(), alpha_count);
        let beta = (0..beta_count)
            .map(|j| TAU * j as f64 / beta_count as f64)
            .collect();
        Self::from_values(alpha, beta, sigma)
    }

    pub fn from_values(alpha_values: Vec<f64>, beta_values: Vec<f64>, sigma: f64) -> Result<Self> {
        if alpha_values.is_empty() || beta_values.is_empty() {
            return Err(Error::InvalidGrid("baseline grid has no points".into()));
        }
        if alpha_values.windows(2).any(|w| w[0] >= w[1]) || beta_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("grid values must be strictly increasing".into()));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidGrid(format!("sigma must be >= 0, got {sigma}")));
        }
        Ok(BaselineGrid {
            alpha_values,
            beta_values,
            sigma,
        })
    }

    pub fn alpha_values(&self) -> &[f64] {
        &self.alpha_values
    }

    pub fn beta_values(&self) -> &[f64] {
        &self.beta_values
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.alpha_values.len() * self.beta_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for BaselineGrid {
    fn default() -> Self {
        BaselineGrid::new(
            BASELINE_ALPHA_COUNT,
            BASELINE_BETA_COUNT,
            BASELINE_K_RANGE,
            crate::spectral::DEFAULT_SIGMA,
        )
        .expect("default baseline grid is valid")
    }
}

/// Real-valued baseline template, row-major over `(α, β)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineTemplate {
    grid: BaselineGrid,
    variant: Variant,
    values: Vec<f64>,
    source: Option<String>,
}

impl BaselineTemplate {
    pub fn from_parts(grid: BaselineGrid, variant: Variant, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(BaselineTemplate {
            grid,
            variant,
            values,
            source: None,
        })
    }

    pub fn grid(&self) -> &BaselineGrid {
        &self.grid
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> usize {
        self.grid.alpha_values.len()
    }

    pub fn cols(&self) -> usize {
        self.grid.beta_values.len()
    }

    pub fn get(&self, ai: usize, bi: usize) -> f64 {
        self.values[ai * self.cols() + bi]
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    /// Copy with columns rolled by `shift`: `out[α][β] = self[α][β - shift]`.
    pub fn roll_columns(&self, shift: i64) -> BaselineTemplate {
        let mut out = self.clone();
        out.values = roll_columns(&self.values, self.rows(), self.cols(), shift);
        out
    }
}

fn roll_columns(values: &[f64], rows: usize, cols: usize, shift: i64) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    let s = shift.rem_euclid(cols as i64) as usize;
    for r in 0..rows {
        let src = &values[r * cols..(r + 1) * cols];
        let dst = &mut out[r * cols..(r + 1) * cols];
        for (j, v) in src.iter().enumerate() {
            dst[(j + s) % cols] = *v;
        }
    }
    out
}

/// Evaluates the baseline spectral function. With
/// [`Variant::LocationOrientation`] each term carries `e^{iθ_j}` before the
/// modulus is taken.
pub fn compute_g(s: &MinutiaSet, grid: &BaselineGrid, variant: Variant) -> Result<BaselineTemplate> {
    if s.is_empty() {
        return Err(Error::InsufficientMinutiae { count: 0 });
    }
    let ms = s.minutiae();
    let orient: Vec<Complex64> = ms
        .iter()
        .map(|m| match variant {
            Variant::Location => Complex64::new(1.0, 0.0),
            Variant::LocationOrientation => Complex64::cis(m.theta),
        })
        .collect();
    let trig: Vec<(f64, f64)> = grid.beta_values.iter().map(|b| b.sin_cos()).collect();
    let half_var = 0.5 * grid.sigma * grid.sigma;

    let mut values = Vec::with_capacity(grid.len());
    for &alpha in &grid.alpha_values {
        let k = alpha.exp();
        let damping = (-half_var * k * k).exp();
        for &(sb, cb) in &trig {
            let (kx, ky) = (k * cb, k * sb);
            let sum: Complex64 = ms
                .iter()
                .zip(&orient)
                .map(|(m, o)| Complex64::cis(-(kx * m.x + ky * m.y)) * o)
                .sum();
            values.push(damping * sum.norm());
        }
    }
    BaselineTemplate::from_parts(grid.clone(), variant, values)
}

/// Real Pearson correlation of two equally long vectors.
pub fn pearson(u: &[f64], v: &[f64]) -> Result<f64> {
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
    let mu = u.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let (mut suv, mut suu, mut svv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        let (da, db) = (a - mu, b - mv);
        suv += da * db;
        suu += da * da;
        svv += db * db;
    }
    if suu == 0.0 || svv == 0.0 {
        return Err(Error::DegenerateScore("zero variance".into()));
    }
    Ok(suv / (suu.sqrt() * svv.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineMatch {
    pub score: f64,
    /// Column shift of the probe relative to the reference.
    pub shift: i64,
}

/// Maximizes the Pearson correlation between `probe` and the reference
/// rolled by each candidate column shift. Ties go to the smallest `|shift|`,
/// then to the negative one.
pub fn baseline_match(probe: &BaselineTemplate, reference: &BaselineTemplate, shifts: &[i64]) -> Result<BaselineMatch> {
    if probe.grid != reference.grid {
        return Err(Error::IncompatibleTemplates("baseline grids differ".into()));
    }
    if shifts.is_empty() {
        return Err(Error::Protocol("shift list is empty".into()));
    }
    let mut best: Option<BaselineMatch> = None;
    for &shift in shifts {
        let rolled = roll_columns(&reference.values, reference.rows(), reference.cols(), shift);
        let score = pearson(&probe.values, &rolled)?;
        let better = match best {
            None => true,
            Some(b) => {
                score > b.score
                    || (score == b.score
                        && (shift.abs(), shift) < (b.shift.abs(), b.shift))
            }
        };
        if better {
            best = Some(BaselineMatch { score, shift });
        }
    }
    Ok(best.expect("shift list is non-empty"))
}
