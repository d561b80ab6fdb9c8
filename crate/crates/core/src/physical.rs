//! Laboratory units: ion species, trap frequencies, the length scale and the
//! pseudopotential relations.
//!
//! `ω_z` is always the axial frequency of a single *outer* ion, and every
//! dimensionless frequency converts to Hz as `ζ · ω_z / 2π`.

use std::f64::consts::{PI, SQRT_2};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::modes::{fractional_spacing, spectrum, Spacing};
use crate::stability::epsilon_s;
use crate::types::{Branch, CrystalConfig, ModeSpectrum};

pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
pub const HBAR: f64 = 1.054571817e-34;
pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;
pub const ATOMIC_MASS_UNIT: f64 = 1.66053906660e-27;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IonSpecies {
    pub name: String,
    /// Mass in unified atomic mass units.
    pub mass_u: f64,
    /// Charge in units of `e`.
    pub charge: u32,
}

impl IonSpecies {
    pub fn new(name: impl Into<String>, mass_u: f64, charge: u32) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::Invalid(format!("invalid species name {name:?}")));
        }
        if !(mass_u.is_finite() && mass_u > 0.0) {
            return Err(Error::Invalid(format!(
                "species {name}: mass must be positive, got {mass_u}"
            )));
        }
        if charge < 1 {
            return Err(Error::Invalid(format!(
                "species {name}: charge must be at least 1"
            )));
        }
        Ok(Self {
            name,
            mass_u,
            charge,
        })
    }

    pub fn mass_kg(&self) -> f64 {
        self.mass_u * ATOMIC_MASS_UNIT
    }

    pub fn charge_coulombs(&self) -> f64 {
        self.charge as f64 * ELEMENTARY_CHARGE
    }
}

/// Mass ratio `μ = M/m` of a center ion over the outer ions.
pub fn mass_ratio(outer: &IonSpecies, center: &IonSpecies) -> f64 {
    center.mass_u / outer.mass_u
}

/// Named species, built-ins first. Later entries replace earlier ones of the same name.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeciesTable {
    species: Vec<IonSpecies>,
}

impl Default for SpeciesTable {
    fn default() -> Self {
        Self::builtin()
    }
}

impl SpeciesTable {
    /// Isotopic masses of ⁹Be and ²⁴Mg.
    pub fn builtin() -> Self {
        Self {
            species: vec![
                IonSpecies::new("Be9", 9.0122, 1).expect("valid"),
                IonSpecies::new("Mg24", 23.9850, 1).expect("valid"),
            ],
        }
    }

    pub fn get(&self, name: &str) -> Result<&IonSpecies> {
        self.species
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::Invalid(format!("unknown species `{name}`")))
    }

    pub fn iter(&self) -> impl Iterator<Item = &IonSpecies> {
        self.species.iter()
    }

    pub fn insert(&mut self, species: IonSpecies) {
        match self.species.iter_mut().find(|s| s.name == species.name) {
            Some(existing) => *existing = species,
            None => self.species.push(species),
        }
    }

    /// Parses `name mass_u [charge]` lines. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Vec<IonSpecies>> {
        let mut out = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad =
                |msg: String| Error::Invalid(format!("species file line {}: {msg}", lineno + 1));
            if !(2..=3).contains(&fields.len()) {
                return Err(bad(format!(
                    "expected `name mass_u [charge]`, got {line:?}"
                )));
            }
            let mass: f64 = fields[1]
                .parse()
                .map_err(|_| bad(format!("bad mass {:?}", fields[1])))?;
            let charge: u32 = match fields.get(2) {
                Some(c) => c.parse().map_err(|_| bad(format!("bad charge {c:?}")))?,
                None => 1,
            };
            out.push(IonSpecies::new(fields[0], mass, charge).map_err(|e| bad(e.to_string()))?);
        }
        Ok(out)
    }

    pub fn extend_from_str(&mut self, text: &str) -> Result<()> {
        for s in Self::parse(text)? {
            self.insert(s);
        }
        Ok(())
    }

    pub fn load(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.extend_from_str(&text)
    }
}

/// Length scale `ℓ = (q²/(4πε₀ m ω_z²))^(1/3)` in meters.
pub fn length_scale(species: &IonSpecies, axial_hz: f64) -> f64 {
    let q = species.charge_coulombs();
    let omega = 2.0 * PI * axial_hz;
    (q * q / (4.0 * PI * VACUUM_PERMITTIVITY * species.mass_kg() * omega * omega)).cbrt()
}

/// Pseudopotential radial frequency `ω_r0/2π = qχ/(√2 Ω m)/2π` in Hz.
pub fn radial_from_rf(species: &IonSpecies, rf_hz: f64, rf_strength: f64) -> f64 {
    let omega_rf = 2.0 * PI * rf_hz;
    species.charge_coulombs() * rf_strength / (SQRT_2 * omega_rf * species.mass_kg()) / (2.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RadialDrive {
    /// `ω_r0/2π` for the outer species, given directly.
    Direct { radial_hz: f64 },
    /// RF drive frequency `Ω/2π` and strength `χ` (V/m²).
    Rf { rf_hz: f64, rf_strength: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhysicalTrapParams {
    outer: IonSpecies,
    axial_hz: f64,
    radial: Option<RadialDrive>,
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::Invalid(format!("{name} must be positive, got {x}")))
    }
}

impl PhysicalTrapParams {
    pub fn new(outer: IonSpecies, axial_hz: f64) -> Result<Self> {
        Ok(Self {
            outer,
            axial_hz: positive("axial frequency", axial_hz)?,
            radial: None,
        })
    }

    pub fn with_radial_hz(mut self, radial_hz: f64) -> Result<Self> {
        self.radial = Some(RadialDrive::Direct {
            radial_hz: positive("radial frequency", radial_hz)?,
        });
        Ok(self)
    }

    pub fn with_rf(mut self, rf_hz: f64, rf_strength: f64) -> Result<Self> {
        self.radial = Some(RadialDrive::Rf {
            rf_hz: positive("RF frequency", rf_hz)?,
            rf_strength: positive("RF strength", rf_strength)?,
        });
        Ok(self)
    }

    pub fn outer(&self) -> &IonSpecies {
        &self.outer
    }

    pub fn axial_hz(&self) -> f64 {
        self.axial_hz
    }

    pub fn axial_angular(&self) -> f64 {
        2.0 * PI * self.axial_hz
    }

    pub fn radial(&self) -> Option<RadialDrive> {
        self.radial
    }

    /// `a₀ = m ω_z² / q` in V/m².
    pub fn a0(&self) -> f64 {
        let w = self.axial_angular();
        self.outer.mass_kg() * w * w / self.outer.charge_coulombs()
    }

    pub fn length_scale(&self) -> f64 {
        length_scale(&self.outer, self.axial_hz)
    }

    /// `ω_r0/2π` of the outer species, if a radial drive is set.
    pub fn radial_hz(&self) -> Option<f64> {
        self.radial.map(|r| match r {
            RadialDrive::Direct { radial_hz } => radial_hz,
            RadialDrive::Rf { rf_hz, rf_strength } => {
                radial_from_rf(&self.outer, rf_hz, rf_strength)
            }
        })
    }

    /// Trap anisotropy `ε = ω_r0/ω_z`.
    pub fn epsilon(&self) -> Option<f64> {
        self.radial_hz().map(|r| r / self.axial_hz)
    }

    /// `ω_x/2π = (ω_z/2π)√(ε² − 1/2)`; `None` when the static field deconfines x.
    pub fn transverse_hz(&self) -> Option<f64> {
        let eps = self.epsilon()?;
        let x = eps * eps - crate::types::ALPHA;
        (x > 0.0).then(|| self.axial_hz * x.sqrt())
    }
}

/// A spectrum with frequencies converted to Hz.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhysicalSpectrum {
    pub spectrum: ModeSpectrum,
    pub axial_hz: f64,
    /// `sign(ζ²)·√|ζ²| · ω_z/2π`.
    pub frequencies_hz: Vec<f64>,
}

impl PhysicalSpectrum {
    pub fn spacing(&self, k: usize) -> Result<Spacing> {
        fractional_spacing(&self.spectrum, k)
    }

    pub fn spacing_hz(&self, k: usize) -> Result<f64> {
        Ok(self.spacing(k)?.absolute * self.axial_hz)
    }
}

pub fn physical_spectrum(
    config: &CrystalConfig,
    outer: &IonSpecies,
    center: &IonSpecies,
    trap: &PhysicalTrapParams,
    branch: Branch,
) -> Result<PhysicalSpectrum> {
    let mu = mass_ratio(outer, center);
    if (config.mu - mu).abs() > 1e-12 * mu {
        return Err(Error::Invalid(format!(
            "config mass ratio {} does not match {}/{} = {mu}",
            config.mu, center.name, outer.name
        )));
    }
    if trap.outer() != outer {
        return Err(Error::Invalid(format!(
            "trap is referenced to {} but the outer species is {}",
            trap.outer().name,
            outer.name
        )));
    }
    let config = match branch {
        Branch::Axial => *config,
        Branch::Transverse => {
            let eps = trap.epsilon().ok_or_else(|| {
                Error::Invalid("transverse spectrum needs a radial frequency".into())
            })?;
            config.with_epsilon(eps)?
        }
    };
    let spectrum = spectrum(&config, branch)?;
    let frequencies_hz = spectrum
        .signed_frequencies()
        .iter()
        .map(|z| z * trap.axial_hz())
        .collect();
    Ok(PhysicalSpectrum {
        spectrum,
        axial_hz: trap.axial_hz(),
        frequencies_hz,
    })
}

/// Radial confinement needed to sit at `ratio · ε_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialRequirement {
    pub epsilon_s: f64,
    pub epsilon: f64,
    /// `ω_r0/2π` of the outer species in Hz.
    pub radial_hz: f64,
    /// Set when `ratio == 1`: the string sits exactly at its instability.
    pub marginal: bool,
}

pub fn epsilon_for_ratio(
    n: usize,
    outer: &IonSpecies,
    center: &IonSpecies,
    axial_hz: f64,
    ratio: f64,
) -> Result<RadialRequirement> {
    positive("axial frequency", axial_hz)?;
    if !(ratio.is_finite() && ratio >= 1.0) {
        return Err(Error::Invalid(format!(
            "epsilon ratio must be at least 1 for a stable string, got {ratio}"
        )));
    }
    let cp = epsilon_s(n, mass_ratio(outer, center))?;
    let epsilon = ratio * cp.epsilon_s;
    Ok(RadialRequirement {
        epsilon_s: cp.epsilon_s,
        epsilon,
        radial_hz: epsilon * axial_hz,
        marginal: ratio == 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::select_logic_mode;

    fn be() -> IonSpecies {
        SpeciesTable::builtin().get("Be9").unwrap().clone()
    }

    fn mg() -> IonSpecies {
        SpeciesTable::builtin().get("Mg24").unwrap().clone()
    }

    #[test]
    fn beryllium_length_scale() {
        let l = length_scale(&be(), 10e6);
        // independent constant folding: 1.574735 µm
        assert!((l - 1.574735e-6).abs() < 1e-12, "{l}");
    }

    #[test]
    fn length_scale_scaling_laws() {
        let b = be();
        let heavy = IonSpecies::new("X", 2.0 * b.mass_u, 1).unwrap();
        let doubly = IonSpecies::new("Y", b.mass_u, 2).unwrap();
        let l = length_scale(&b, 3e6);
        assert!((length_scale(&heavy, 3e6) / l - 2f64.powf(-1.0 / 3.0)).abs() < 1e-14);
        assert!((length_scale(&doubly, 3e6) / l - 2f64.powf(2.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn length_scale_matches_a0_definition() {
        let trap = PhysicalTrapParams::new(mg(), 2e6).unwrap();
        let q = trap.outer().charge_coulombs();
        let l3 = q / (4.0 * PI * VACUUM_PERMITTIVITY * trap.a0());
        assert!((trap.length_scale().powi(3) / l3 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pseudopotential_consistency() {
        let rf_hz = 150e6;
        let chi = 4.0e9;
        let trap = PhysicalTrapParams::new(be(), 5e6)
            .unwrap()
            .with_rf(rf_hz, chi)
            .unwrap();
        let b = be();
        let omega = b.charge_coulombs() * chi / (SQRT_2 * 2.0 * PI * rf_hz * b.mass_kg());
        let got = 2.0 * PI * trap.radial_hz().unwrap();
        assert!((got / omega - 1.0).abs() < 1e-12);
        let eps = trap.epsilon().unwrap();
        let wx = trap.transverse_hz().unwrap();
        assert!((wx - 5e6 * (eps * eps - 0.5).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn species_file_parsing() {
        let mut table = SpeciesTable::builtin();
        table
            .extend_from_str("# extra\nCa40 39.9626 1\nBe9 9.0 # override\n\nSr88 87.9056 1\n")
            .unwrap();
        assert_eq!(table.get("Ca40").unwrap().mass_u, 39.9626);
        assert_eq!(table.get("Be9").unwrap().mass_u, 9.0);
        assert_eq!(table.iter().count(), 4);
        assert!(SpeciesTable::parse("X 1 2 3").is_err());
        assert!(SpeciesTable::parse("X -1 1").is_err());
        assert!(SpeciesTable::parse("X 1 0").is_err());
        assert!(SpeciesTable::parse("X abc").is_err());
        assert!(table.get("Yb171").is_err());
    }

    #[test]
    fn round_trip_to_dimensionless() {
        let (outer, center) = (be(), mg());
        let cfg = CrystalConfig::axial(5, mass_ratio(&outer, &center)).unwrap();
        let trap = PhysicalTrapParams::new(outer.clone(), 7.3e6).unwrap();
        let ps = physical_spectrum(&cfg, &outer, &center, &trap, Branch::Axial).unwrap();
        for (hz, z) in ps
            .frequencies_hz
            .iter()
            .zip(ps.spectrum.signed_frequencies())
        {
            assert!((hz / 7.3e6 / z - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mass_ratio_mismatch_rejected() {
        let (outer, center) = (be(), mg());
        let cfg = CrystalConfig::axial(3, 2.0).unwrap();
        let trap = PhysicalTrapParams::new(outer.clone(), 1e7).unwrap();
        assert!(physical_spectrum(&cfg, &outer, &center, &trap, Branch::Axial).is_err());
    }

    #[test]
    fn be_mg_be_axial_spacing() {
        let (outer, center) = (be(), mg());
        let cfg = CrystalConfig::axial(3, mass_ratio(&outer, &center)).unwrap();
        let trap = PhysicalTrapParams::new(outer.clone(), 10e6).unwrap();
        let ps = physical_spectrum(&cfg, &outer, &center, &trap, Branch::Axial).unwrap();
        let k = select_logic_mode(&ps.spectrum).unwrap();
        assert!((ps.frequencies_hz[k] - 17.3205e6).abs() < 1e3);
        assert!((ps.spacing_hz(k).unwrap() - 1.6e6).abs() < 0.05e6);
    }

    #[test]
    fn radial_requirements() {
        let be_mg = epsilon_for_ratio(3, &be(), &mg(), 10e6, 1.1).unwrap();
        assert!((be_mg.radial_hz - 27.6e6).abs() < 0.15e6);
        let mg_be = epsilon_for_ratio(3, &mg(), &be(), 10e6, 1.1).unwrap();
        assert!((mg_be.radial_hz - 14.7e6).abs() < 0.1e6);
        assert!(!mg_be.marginal);

        let marginal = epsilon_for_ratio(3, &mg(), &be(), 10e6, 1.0).unwrap();
        assert!(marginal.marginal);
        assert_eq!(marginal.epsilon, marginal.epsilon_s);
        assert!(epsilon_for_ratio(3, &mg(), &be(), 10e6, 0.9).is_err());
    }
}
