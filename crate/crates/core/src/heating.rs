//! Mode heating by a spatially uniform stochastic electric field.
//!
//! A uniform field pushes every ion with the same force. In normalized
//! coordinates that force is the vector `c = (1, …, 1/√μ, …, 1)`, so mode `k`
//! couples through `c·v^(k)`. Normalized to the COM mode of identical ions and
//! assuming a flat field spectrum, the rate is `(c·v^(k))² / (N ζ_k)`.
//! Field-gradient heating is ignored, so cold modes do not heat.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::physical::{PhysicalTrapParams, HBAR};
use crate::types::{Branch, ModeSpectrum};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatingRates {
    pub branch: Branch,
    /// `ṅ_k / ṅ_COM`, one per mode in spectrum order.
    pub normalized: Vec<f64>,
    /// Quanta per second, when a trap and field spectrum were supplied.
    pub physical: Option<Vec<f64>>,
    pub flat_spectrum: bool,
}

/// Power spectral density of the uniform field, in V² m⁻² Hz⁻¹.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpectrum {
    Flat(f64),
    /// One sample per mode, at that mode's frequency, in spectrum order.
    PerMode(Vec<f64>),
}

impl FieldSpectrum {
    fn sample(&self, k: usize) -> f64 {
        match self {
            FieldSpectrum::Flat(s) => *s,
            FieldSpectrum::PerMode(v) => v[k],
        }
    }

    fn validate(&self, modes: usize) -> Result<()> {
        let values: &[f64] = match self {
            FieldSpectrum::Flat(s) => std::slice::from_ref(s),
            FieldSpectrum::PerMode(v) => {
                if v.len() != modes {
                    return Err(Error::Invalid(format!(
                        "field spectrum has {} samples but the spectrum has {modes} modes",
                        v.len()
                    )));
                }
                v
            }
        };
        if let Some(bad) = values.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::Invalid(format!(
                "field spectral density must be positive, got {bad}"
            )));
        }
        Ok(())
    }
}

/// `v_c/√μ + Σ_{j≠c} v_j` for mode `k`.
pub fn uniform_coupling(spectrum: &ModeSpectrum, k: usize) -> f64 {
    let config = spectrum.config();
    let center = config.center();
    let inv_root_mu = 1.0 / config.mu.sqrt();
    spectrum
        .eigenvector(k)
        .iter()
        .enumerate()
        .map(|(i, v)| if i == center { v * inv_root_mu } else { *v })
        .sum()
}

/// Value of `Σ_k ζ_k r_k` implied by completeness of the eigenbasis:
/// `|c|²/N = ((N−1) + 1/μ)/N`.
pub fn sum_rule(n: usize, mu: f64) -> f64 {
    ((n as f64 - 1.0) + 1.0 / mu) / n as f64
}

fn require_stable(spectrum: &ModeSpectrum) -> Result<Vec<f64>> {
    (0..spectrum.len())
        .map(|k| spectrum.frequency(k).ok_or(Error::UnstableMode(k)))
        .collect()
}

pub fn normalized_heating(spectrum: &ModeSpectrum) -> Result<HeatingRates> {
    let zeta = require_stable(spectrum)?;
    let n = spectrum.len() as f64;
    let normalized = zeta
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let c = uniform_coupling(spectrum, k);
            c * c / (n * z)
        })
        .collect();
    Ok(HeatingRates {
        branch: spectrum.branch(),
        normalized,
        physical: None,
        flat_spectrum: true,
    })
}

/// Normalized and absolute heating rates. The trap supplies the outer-ion
/// species and `ω_z`.
pub fn physical_heating(
    spectrum: &ModeSpectrum,
    trap: &PhysicalTrapParams,
    field: &FieldSpectrum,
) -> Result<HeatingRates> {
    field.validate(spectrum.len())?;
    let mut rates = normalized_heating(spectrum)?;
    let q = trap.outer().charge_coulombs();
    let m = trap.outer().mass_kg();
    let omega_z = trap.axial_angular();
    let physical = (0..spectrum.len())
        .map(|k| {
            let omega = spectrum.frequency(k).expect("checked stable") * omega_z;
            let c = uniform_coupling(spectrum, k);
            q * q * field.sample(k) / (4.0 * m * HBAR * omega) * c * c
        })
        .collect();
    rates.physical = Some(physical);
    rates.flat_spectrum = matches!(field, FieldSpectrum::Flat(_));
    Ok(rates)
}

/// Heating rate of a single outer-species ion at `ω_z`.
pub fn single_ion_rate(trap: &PhysicalTrapParams, field_psd: f64) -> f64 {
    let q = trap.outer().charge_coulombs();
    q * q * field_psd / (4.0 * trap.outer().mass_kg() * HBAR * trap.axial_angular())
}
