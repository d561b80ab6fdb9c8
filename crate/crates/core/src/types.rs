//! Shared dimensionless data model.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Static transverse split of the trap. Fixed so that `ω_y = ω_x`.
pub const ALPHA: f64 = 0.5;

pub const MIN_MASS_RATIO: f64 = 1e-3;
pub const MAX_MASS_RATIO: f64 = 1e3;
pub const MAX_IONS: usize = 25;

/// Center-ion amplitude below which a mode counts as cold.
pub const COLD_THRESHOLD: f64 = 1e-8;

/// Dimensionless problem statement for an odd string with a substituted center ion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrystalConfig {
    /// Number of ions (odd, 3..=25).
    pub n: usize,
    /// Center-ion mass over outer-ion mass.
    pub mu: f64,
    /// Radial-to-axial confinement ratio `ω_r0 / ω_z`. Ignored by axial work.
    pub epsilon: f64,
}

impl CrystalConfig {
    pub fn new(n: usize, mu: f64, epsilon: f64) -> Result<Self, ConfigError> {
        validate_ion_count(n)?;
        validate_mass_ratio(mu)?;
        validate_anisotropy(epsilon)?;
        Ok(Self { n, mu, epsilon })
    }

    /// Config for axial-only work; `epsilon` is set to a placeholder of 1.
    pub fn axial(n: usize, mu: f64) -> Result<Self, ConfigError> {
        Self::new(n, mu, 1.0)
    }

    /// Zero-based index of the center ion.
    pub fn center(&self) -> usize {
        self.n / 2
    }

    /// One-based center label `n_c = (N+1)/2`.
    pub fn center_label(&self) -> usize {
        self.n.div_ceil(2)
    }

    pub fn alpha(&self) -> f64 {
        ALPHA
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self, ConfigError> {
        Self::new(self.n, self.mu, epsilon)
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self, ConfigError> {
        Self::new(self.n, mu, self.epsilon)
    }
}

pub(crate) fn validate_ion_count(n: usize) -> Result<(), ConfigError> {
    if n.is_multiple_of(2) {
        return Err(ConfigError::EvenIonCount(n));
    }
    if n < 3 {
        return Err(ConfigError::TooFewIons(n));
    }
    if n > MAX_IONS {
        return Err(ConfigError::TooManyIons(n));
    }
    Ok(())
}

pub(crate) fn validate_mass_ratio(mu: f64) -> Result<(), ConfigError> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(ConfigError::NonPositiveMassRatio(mu));
    }
    if !(MIN_MASS_RATIO..=MAX_MASS_RATIO).contains(&mu) {
        return Err(ConfigError::MassRatioOutOfRange(mu));
    }
    Ok(())
}

pub(crate) fn validate_anisotropy(epsilon: f64) -> Result<(), ConfigError> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(ConfigError::NonPositiveAnisotropy(epsilon));
    }
    Ok(())
}

/// Normalized equilibrium positions `u_i = z_i / ℓ`, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumConfiguration {
    pub positions: Vec<f64>,
    /// Max-norm of the force-balance residual at `positions`.
    pub residual: f64,
}

impl EquilibriumConfiguration {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `1/|u_i − u_j|³` for `i ≠ j`.
    pub fn inverse_cube(&self, i: usize, j: usize) -> f64 {
        let d = (self.positions[i] - self.positions[j]).abs();
        1.0 / (d * d * d)
    }
}

/// Direction of motion a matrix or spectrum describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Axial,
    /// Motion along x. With `α = 1/2` the y branch is identical.
    Transverse,
}

impl Branch {
    /// Number of physical directions sharing this spectrum.
    pub fn multiplicity(self) -> usize {
        match self {
            Branch::Axial => 1,
            Branch::Transverse => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Axial => "axial",
            Branch::Transverse => "transverse",
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Branch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "axial" => Ok(Branch::Axial),
            "transverse" => Ok(Branch::Transverse),
            other => Err(format!(
                "unknown branch `{other}` (expected axial|transverse)"
            )),
        }
    }
}

/// Mass-scaled stiffness matrix, normalized to `ω_z²`.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalMatrix {
    branch: Branch,
    entries: DMatrix<f64>,
    config: CrystalConfig,
}

impl DynamicalMatrix {
    pub(crate) fn new(branch: Branch, entries: DMatrix<f64>, config: CrystalConfig) -> Self {
        debug_assert_eq!(entries, entries.transpose());
        Self {
            branch,
            entries,
            config,
        }
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn config(&self) -> &CrystalConfig {
        &self.config
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeClass {
    /// Center ion at rest; decoupled from uniform fields.
    Cold,
    Hot,
}

impl ModeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeClass::Cold => "cold",
            ModeClass::Hot => "hot",
        }
    }
}

/// Sorted normal-mode spectrum of one branch.
///
/// Squared frequencies are stored signed; a negative value marks an unstable
/// mode (imaginary frequency).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSpectrum {
    branch: Branch,
    squared: Vec<f64>,
    eigenvectors: Vec<Vec<f64>>,
    classes: Vec<ModeClass>,
    config: CrystalConfig,
}

impl ModeSpectrum {
    pub(crate) fn new(
        branch: Branch,
        squared: Vec<f64>,
        eigenvectors: Vec<Vec<f64>>,
        config: CrystalConfig,
    ) -> Self {
        let center = config.center();
        let classes = eigenvectors
            .iter()
            .map(|v| {
                if v[center].abs() < COLD_THRESHOLD {
                    ModeClass::Cold
                } else {
                    ModeClass::Hot
                }
            })
            .collect();
        Self {
            branch,
            squared,
            eigenvectors,
            classes,
            config,
        }
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn config(&self) -> &CrystalConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.squared.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squared.is_empty()
    }

    /// Signed squared frequencies `ζ_k²`, ascending.
    pub fn squared_frequencies(&self) -> &[f64] {
        &self.squared
    }

    /// `ζ_k` for a stable mode, `None` otherwise.
    pub fn frequency(&self, k: usize) -> Option<f64> {
        let s = self.squared[k];
        (s > 0.0).then(|| s.sqrt())
    }

    /// Frequencies with the sign of `ζ_k²` carried over: `sign(ζ²)·√|ζ²|`.
    pub fn signed_frequencies(&self) -> Vec<f64> {
        self.squared
            .iter()
            .map(|&s| s.signum() * s.abs().sqrt())
            .collect()
    }

    /// Eigenvector of mode `k` in normalized coordinates.
    pub fn eigenvector(&self, k: usize) -> &[f64] {
        &self.eigenvectors[k]
    }

    pub fn eigenvectors(&self) -> &[Vec<f64>] {
        &self.eigenvectors
    }

    pub fn class(&self, k: usize) -> ModeClass {
        self.classes[k]
    }

    pub fn classes(&self) -> &[ModeClass] {
        &self.classes
    }

    pub fn is_stable(&self) -> bool {
        self.squared.iter().all(|&s| s > 0.0)
    }

    pub fn unstable_modes(&self) -> impl Iterator<Item = usize> + '_ {
        self.squared
            .iter()
            .enumerate()
            .filter(|(_, &s)| s <= 0.0)
            .map(|(k, _)| k)
    }

    pub fn cold_modes(&self) -> impl Iterator<Item = usize> + '_ {
        self.classes
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == ModeClass::Cold)
            .map(|(k, _)| k)
    }
}

/// Sampled motion of a single excited mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeTrajectory {
    pub mode: usize,
    pub amplitude: f64,
    pub phase: f64,
    /// Normalized times `T = ω_z t`.
    pub times: Vec<f64>,
    /// `displacements[s][i]` is `q_i` at `times[s]`, in units of `ℓ`.
    pub displacements: Vec<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_config_valid() {
        let c = CrystalConfig::new(3, 1.0, 2.0).unwrap();
        assert_eq!(c.center_label(), 2);
        assert_eq!(c.center(), 1);
        assert_eq!(c.alpha(), 0.5);
    }

    #[test]
    fn make_config_rejections() {
        assert_eq!(
            CrystalConfig::new(4, 1.0, 2.0),
            Err(ConfigError::EvenIonCount(4))
        );
        assert_eq!(
            CrystalConfig::new(1, 1.0, 2.0),
            Err(ConfigError::TooFewIons(1))
        );
        assert_eq!(
            CrystalConfig::new(27, 1.0, 2.0),
            Err(ConfigError::TooManyIons(27))
        );
        assert_eq!(
            CrystalConfig::new(3, 0.0, 2.0),
            Err(ConfigError::NonPositiveMassRatio(0.0))
        );
        assert_eq!(
            CrystalConfig::new(3, 5e3, 2.0),
            Err(ConfigError::MassRatioOutOfRange(5e3))
        );
        assert_eq!(
            CrystalConfig::new(3, 1.0, -1.0),
            Err(ConfigError::NonPositiveAnisotropy(-1.0))
        );
        assert!(matches!(
            CrystalConfig::new(3, f64::NAN, 1.0),
            Err(ConfigError::NonPositiveMassRatio(_))
        ));
    }

    #[test]
    fn branch_parse() {
        assert_eq!("axial".parse::<Branch>().unwrap(), Branch::Axial);
        assert_eq!(Branch::Transverse.multiplicity(), 2);
        assert!("radial".parse::<Branch>().is_err());
    }
}
