//! Analytic cost of one verification, excluding any helper-data
//! reconstruction.
//!
//! ```text
//! single-minutia: N_gr·Z·T_s      + (N_φ - 1)·N_gr·T_rot + N_φ·c·N_gr
//! pair-based:     N_gr·C(Z,2)·T_s + (N_φ - 1)·N_gr·T_rot + N_φ·c·N_gr
//! ```

use crate::error::{Error, Result};

/// Grid size of the single-minutia log-polar representation (128 × 256).
pub const BASELINE_GRID_POINTS: u64 = 128 * 256;

/// Upper bound on the pair-based M grid (16 q values × 25 radii).
pub const PAIR_GRID_POINTS: u64 = 16 * 25;

/// Typical minutia count per fingerprint.
pub const TYPICAL_MINUTIAE: u64 = 35;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub n_grid: u64,
    pub z: u64,
    pub n_phi: u64,
    /// Cost of one summation term at one grid point.
    pub t_sum: f64,
    /// Cost of applying the rotation phase at one grid point.
    pub t_rot: f64,
    /// Cost per grid point of one score evaluation.
    pub c_score: f64,
}

impl CostModel {
    pub fn new(n_grid: u64, z: u64, n_phi: u64, t_sum: f64, t_rot: f64, c_score: f64) -> Result<Self> {
        if n_grid == 0 || z == 0 || n_phi == 0 {
            return Err(Error::InvalidCostModel("counts must be positive".into()));
        }
        if !(t_sum > 0.0 && t_rot > 0.0 && c_score > 0.0) || !(t_sum.is_finite() && c_score.is_finite()) {
            return Err(Error::InvalidCostModel("cost units must be positive and finite".into()));
        }
        if t_rot >= t_sum {
            return Err(Error::InvalidCostModel(format!(
                "rotation cost {t_rot} must be below summation cost {t_sum}"
            )));
        }
        Ok(CostModel {
            n_grid,
            z,
            n_phi,
            t_sum,
            t_rot,
            c_score,
        })
    }

    /// Unit costs with `T_s = 1`, `T_rot = 0.5`, `c = 0.1`.
    pub fn with_unit_costs(n_grid: u64, z: u64, n_phi: u64) -> Result<Self> {
        CostModel::new(n_grid, z, n_phi, 1.0, 0.5, 0.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    /// Summation terms: `N_gr·Z` or `N_gr·C(Z,2)`.
    pub summation_terms: u64,
    /// Summation terms divided by `Z`: `N_gr` or `N_gr·(Z-1)/2`.
    pub terms_per_minutia: f64,
    pub summation: f64,
    pub rotation: f64,
    pub scoring: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.summation + self.rotation + self.scoring
    }
}

pub fn verification_cost(m: &CostModel, pair_based: bool) -> Result<CostBreakdown> {
    let terms_per_grid_point = if pair_based {
        if m.z < 2 {
            return Err(Error::InvalidCostModel("pair-based cost needs Z >= 2".into()));
        }
        m.z * (m.z - 1) / 2
    } else {
        m.z
    };
    let summation_terms = m.n_grid * terms_per_grid_point;
    let n_grid = m.n_grid as f64;
    Ok(CostBreakdown {
        summation_terms,
        terms_per_minutia: summation_terms as f64 / m.z as f64,
        summation: summation_terms as f64 * m.t_sum,
        rotation: (m.n_phi - 1) as f64 * n_grid * m.t_rot,
        scoring: m.n_phi as f64 * m.c_score * n_grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_term_counts() {
        let base = verification_cost(&CostModel::with_unit_costs(32768, 35, 11).unwrap(), false).unwrap();
        assert_eq!(base.summation_terms, 32768 * 35);
        assert_eq!(base.terms_per_minutia, 32768.0);
        let pair = verification_cost(&CostModel::with_unit_costs(400, 35, 11).unwrap(), true).unwrap();
        assert_eq!(pair.summation_terms, 400 * 595);
        assert_eq!(pair.terms_per_minutia, 6800.0);
    }

    #[test]
    fn single_angle_has_no_rotation_cost() {
        let c = verification_cost(&CostModel::with_unit_costs(400, 35, 1).unwrap(), true).unwrap();
        assert_eq!(c.rotation, 0.0);
        assert_eq!(c.total(), c.summation + c.scoring);
    }

    #[test]
    fn linear_in_unit_costs() {
        let m = CostModel::new(400, 35, 11, 1.0, 0.3, 0.2).unwrap();
        let m2 = CostModel { t_sum: 2.0, ..m };
        let (a, b) = (verification_cost(&m, true).unwrap(), verification_cost(&m2, true).unwrap());
        assert_eq!(b.summation, 2.0 * a.summation);
        assert_eq!((b.rotation, b.scoring), (a.rotation, a.scoring));
        let m3 = CostModel { c_score: 0.4, ..m };
        let c = verification_cost(&m3, true).unwrap();
        assert_eq!(c.scoring, 2.0 * a.scoring);
        assert_eq!(c.summation, a.summation);
    }

    #[test]
    fn invariants_enforced() {
        assert!(CostModel::new(400, 35, 11, 1.0, 1.0, 0.1).is_err());
        assert!(CostModel::new(0, 35, 11, 1.0, 0.5, 0.1).is_err());
        assert!(CostModel::new(400, 35, 11, 1.0, 0.5, 0.0).is_err());
        let one = CostModel::with_unit_costs(400, 1, 1).unwrap();
        assert!(verification_cost(&one, true).is_err());
        assert!(verification_cost(&one, false).is_ok());
    }

    #[test]
    fn pair_grid_wins_below_crossover() {
        // N_pair·(Z-1)/2 < N_base holds up to Z = 164
        for z in 2..=164 {
            let pair = verification_cost(&CostModel::with_unit_costs(PAIR_GRID_POINTS, z, 1).unwrap(), true).unwrap();
            let base = verification_cost(&CostModel::with_unit_costs(BASELINE_GRID_POINTS, z, 1).unwrap(), false).unwrap();
            assert!(pair.summation_terms < base.summation_terms, "z = {z}");
        }
        let pair = verification_cost(&CostModel::with_unit_costs(PAIR_GRID_POINTS, 165, 1).unwrap(), true).unwrap();
        let base = verification_cost(&CostModel::with_unit_costs(BASELINE_GRID_POINTS, 165, 1).unwrap(), false).unwrap();
        assert!(pair.summation_terms > base.summation_terms);
    }
}
