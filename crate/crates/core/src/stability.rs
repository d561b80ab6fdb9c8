//! String-configuration stability boundary `ε_s(μ)`.
//!
//! `B′(ε) = B′(0) + ε² D` with `D` a positive diagonal, so every eigenvalue of
//! `B′` increases with `ε` and the smallest one has a single zero crossing.
//! That crossing is `ε_s`; the string is stable for `ε > ε_s`.
//!
//! Reflection through the center commutes with `B′`, so the problem splits
//! into a symmetric block (center ion moves, contains the zigzag mode) and an
//! antisymmetric block (center fixed, independent of `μ`). `ε_s` is the larger
//! of the two block roots and the cusp is where they cross.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::equilibrium::equilibrium_positions;
use crate::error::{Error, Result};
use crate::modes::transverse_matrix_with;
use crate::numerics::{
    bisect, bisect_largest_root, log_space, symmetric_eigen, symmetric_eigenvalues,
};
use crate::types::{
    validate_ion_count, validate_mass_ratio, CrystalConfig, EquilibriumConfiguration,
    COLD_THRESHOLD,
};

/// Lower end of the `ε` scan.
pub const EPSILON_LO: f64 = 0.3;
/// Initial upper end of the `ε` scan; doubled while the string is still unstable there.
pub const EPSILON_HI: f64 = 10.0;
pub const SCAN_POINTS: usize = 400;
const ROOT_TOL: f64 = 1e-13;
const EPSILON_CEILING: f64 = 1e6;
const CUSP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GoverningMode {
    /// Zigzag: neighbors displaced oppositely, center ion moving.
    CenterMoving,
    /// Zigzag-like mode with the center ion at rest.
    CenterFixed,
}

impl GoverningMode {
    pub fn as_str(self) -> &'static str {
        match self {
            GoverningMode::CenterMoving => "center_moving",
            GoverningMode::CenterFixed => "center_fixed",
        }
    }
}

/// `ε_s` for one `(n, μ)` and the mode that goes soft there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub n: usize,
    pub mu: f64,
    pub epsilon_s: f64,
    pub governing_mode: GoverningMode,
    /// Eigenvector of `B′(ε_s)` for the vanishing eigenvalue.
    pub critical_vector: Vec<f64>,
}

/// Largest zero of `f` on `[EPSILON_LO, hi]`, raising `hi` until `f(hi) > 0`.
fn largest_root_expanding<F: FnMut(f64) -> f64>(mut f: F) -> Result<f64> {
    let mut hi = EPSILON_HI;
    while f(hi) <= 0.0 {
        hi *= 2.0;
        if hi > EPSILON_CEILING {
            return Err(Error::NotBracketed { lo: EPSILON_LO, hi });
        }
    }
    bisect_largest_root(f, EPSILON_LO, hi, ROOT_TOL, SCAN_POINTS)
}

fn smallest_eigenvalue(m: &DMatrix<f64>) -> f64 {
    // B′ is symmetric by construction; the solver cannot fail on it.
    symmetric_eigenvalues(m).map(|v| v[0]).unwrap_or(f64::NAN)
}

fn transverse_entries(n: usize, mu: f64, eps: f64, eq: &EquilibriumConfiguration) -> DMatrix<f64> {
    let config = CrystalConfig {
        n,
        mu,
        epsilon: eps,
    };
    transverse_matrix_with(&config, eq).entries().clone()
}

fn validate(n: usize, mu: f64) -> Result<()> {
    validate_ion_count(n)?;
    validate_mass_ratio(mu)?;
    Ok(())
}

pub fn epsilon_s(n: usize, mu: f64) -> Result<CriticalPoint> {
    validate(n, mu)?;
    let eq = equilibrium_positions(n)?;
    epsilon_s_with(&eq, mu)
}

/// [`epsilon_s`] for a precomputed equilibrium.
pub fn epsilon_s_with(eq: &EquilibriumConfiguration, mu: f64) -> Result<CriticalPoint> {
    let n = eq.len();
    validate(n, mu)?;
    let root =
        largest_root_expanding(|eps| smallest_eigenvalue(&transverse_entries(n, mu, eps, eq)))?;
    let eig = symmetric_eigen(&transverse_entries(n, mu, root, eq))?;
    let critical_vector = eig.vector(0);
    let governing_mode = if critical_vector[n / 2].abs() < COLD_THRESHOLD {
        GoverningMode::CenterFixed
    } else {
        GoverningMode::CenterMoving
    };
    Ok(CriticalPoint {
        n,
        mu,
        epsilon_s: root,
        governing_mode,
        critical_vector,
    })
}

/// Orthonormal basis of the reflection-symmetric (`center_moving = true`) or
/// antisymmetric subspace, as columns.
fn parity_basis(n: usize, center_moving: bool) -> DMatrix<f64> {
    let half = n / 2;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let cols = if center_moving { half + 1 } else { half };
    let mut p = DMatrix::zeros(n, cols);
    for i in 0..half {
        p[(i, i)] = s;
        p[(n - 1 - i, i)] = if center_moving { s } else { -s };
    }
    if center_moving {
        p[(half, half)] = 1.0;
    }
    p
}

/// Zero crossings of the two parity blocks of `B′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchRoots {
    pub center_moving: f64,
    pub center_fixed: f64,
}

impl BranchRoots {
    pub fn epsilon_s(&self) -> f64 {
        self.center_moving.max(self.center_fixed)
    }
}

fn block_root(eq: &EquilibriumConfiguration, mu: f64, center_moving: bool) -> Result<f64> {
    let n = eq.len();
    let p = parity_basis(n, center_moving);
    let pt = p.transpose();
    largest_root_expanding(|eps| {
        let b = transverse_entries(n, mu, eps, eq);
        let block = &pt * b * &p;
        let block = (&block + block.transpose()) * 0.5;
        smallest_eigenvalue(&block)
    })
}

pub fn branch_roots(n: usize, mu: f64) -> Result<BranchRoots> {
    validate(n, mu)?;
    let eq = equilibrium_positions(n)?;
    branch_roots_with(&eq, mu)
}

pub fn branch_roots_with(eq: &EquilibriumConfiguration, mu: f64) -> Result<BranchRoots> {
    Ok(BranchRoots {
        center_moving: block_root(eq, mu, true)?,
        center_fixed: block_root(eq, mu, false)?,
    })
}

/// Location of the switch between governing modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cusp {
    /// Grid points on either side of the switch.
    pub mu_lo: f64,
    pub mu_hi: f64,
    /// Crossing of the two branch roots, refined to 1e-6 in `μ`.
    pub mu: f64,
    pub epsilon_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityBoundary {
    pub n: usize,
    pub mu_grid: Vec<f64>,
    pub epsilon_s: Vec<f64>,
    pub governing_mode: Vec<GoverningMode>,
    pub cusp: Option<Cusp>,
}

impl StabilityBoundary {
    /// Grid index nearest (in `log μ`) to the refined cusp.
    pub fn cusp_row(&self) -> Option<usize> {
        let cusp = self.cusp?;
        let target = cusp.mu.ln();
        (0..self.mu_grid.len()).min_by(|&a, &b| {
            let da = (self.mu_grid[a].ln() - target).abs();
            let db = (self.mu_grid[b].ln() - target).abs();
            da.total_cmp(&db)
        })
    }
}

/// `ε_s` sampled on a log grid, with the cusp located between grid points
/// whose governing modes differ.
pub fn stability_curve(
    n: usize,
    mu_min: f64,
    mu_max: f64,
    points: usize,
) -> Result<StabilityBoundary> {
    validate(n, mu_min)?;
    validate(n, mu_max)?;
    if !(mu_min < mu_max) || points < 2 {
        return Err(Error::Invalid(format!(
            "stability curve needs mu_min < mu_max and at least 2 points (got [{mu_min}, {mu_max}], {points})"
        )));
    }
    let grid = log_space(mu_min, mu_max, points);
    stability_curve_on(n, &grid)
}

pub fn stability_curve_on(n: usize, mu_grid: &[f64]) -> Result<StabilityBoundary> {
    validate_ion_count(n)?;
    let eq = equilibrium_positions(n)?;
    let mut epsilon_s = Vec::with_capacity(mu_grid.len());
    let mut governing_mode = Vec::with_capacity(mu_grid.len());
    for &mu in mu_grid {
        let cp = epsilon_s_with(&eq, mu)?;
        epsilon_s.push(cp.epsilon_s);
        governing_mode.push(cp.governing_mode);
    }

    let cusp = match governing_mode.windows(2).position(|w| w[0] != w[1]) {
        Some(i) => Some(refine_cusp(&eq, mu_grid[i], mu_grid[i + 1])?),
        None => None,
    };

    Ok(StabilityBoundary {
        n,
        mu_grid: mu_grid.to_vec(),
        epsilon_s,
        governing_mode,
        cusp,
    })
}

fn refine_cusp(eq: &EquilibriumConfiguration, mu_lo: f64, mu_hi: f64) -> Result<Cusp> {
    let fixed = block_root(eq, mu_lo, false)?;
    let mu = bisect(
        |mu| {
            block_root(eq, mu, true)
                .map(|r| r - fixed)
                .unwrap_or(f64::NAN)
        },
        mu_lo,
        mu_hi,
        CUSP_TOL,
    )?;
    Ok(Cusp {
        mu_lo,
        mu_hi,
        mu,
        epsilon_s: fixed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::spectrum;
    use crate::types::Branch;

    #[test]
    fn identical_three_ions() {
        let cp = epsilon_s(3, 1.0).unwrap();
        assert!((cp.epsilon_s - 2.9_f64.sqrt()).abs() < 1e-10);
        assert!((cp.epsilon_s - 1.7029386).abs() < 1e-7);
        assert_eq!(cp.governing_mode, GoverningMode::CenterMoving);
    }

    #[test]
    fn light_center_three_ions() {
        let cp = epsilon_s(3, 0.01).unwrap();
        assert!((cp.epsilon_s - 1.5_f64.sqrt()).abs() < 1e-10);
        assert_eq!(cp.governing_mode, GoverningMode::CenterFixed);
    }

    #[test]
    fn beryllium_center_three_ions() {
        let mu = 9.012 / 23.985;
        let cp = epsilon_s(3, mu).unwrap();
        // largest root of (x − 1.3)(x − 2.1μ) = 1.28μ with x = ε²
        let b = 1.3 + 2.1 * mu;
        let c = 1.3 * 2.1 * mu - 1.28 * mu;
        let x = 0.5 * (b + (b * b - 4.0 * c).sqrt());
        assert!((cp.epsilon_s - x.sqrt()).abs() < 1e-10);
        assert!((cp.epsilon_s - 1.3354).abs() < 1e-3);
        assert_eq!(cp.governing_mode, GoverningMode::CenterMoving);
    }

    #[test]
    fn scan_expands_past_default_ceiling() {
        let cp = epsilon_s(9, 100.0).unwrap();
        assert!(cp.epsilon_s > EPSILON_HI);
        let c = CrystalConfig::new(9, 100.0, 1.01 * cp.epsilon_s).unwrap();
        assert!(spectrum(&c, Branch::Transverse).unwrap().is_stable());
        let c = CrystalConfig::new(9, 100.0, 0.99 * cp.epsilon_s).unwrap();
        assert!(!spectrum(&c, Branch::Transverse).unwrap().is_stable());
    }

    #[test]
    fn branch_roots_agree_with_full_matrix() {
        for n in [3, 5, 7, 9] {
            for mu in [0.02, 0.3, 1.0, 12.0] {
                let full = epsilon_s(n, mu).unwrap();
                let roots = branch_roots(n, mu).unwrap();
                assert!((roots.epsilon_s() - full.epsilon_s).abs() < 1e-10);
                let expect = if roots.center_moving > roots.center_fixed {
                    GoverningMode::CenterMoving
                } else {
                    GoverningMode::CenterFixed
                };
                assert_eq!(full.governing_mode, expect, "n={n} mu={mu}");
            }
        }
    }

    #[test]
    fn three_ion_cusp_closed_form() {
        // center-moving root equals 1.5 when 0.2 (1.5 − 2.1μ) = 1.28μ
        let curve = stability_curve(3, 0.01, 100.0, 41).unwrap();
        let cusp = curve.cusp.unwrap();
        assert!((cusp.mu - 0.3 / 1.7).abs() < 2e-6);
        assert!(cusp.mu_lo < cusp.mu && cusp.mu < cusp.mu_hi);
        assert!((cusp.epsilon_s - 1.5_f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(stability_curve(3, 1.0, 0.5, 10).is_err());
        assert!(stability_curve(4, 0.1, 1.0, 10).is_err());
        assert!(epsilon_s(3, 0.0).is_err());
    }
}
