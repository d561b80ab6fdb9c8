//! WebAssembly bindings for the browser demo.
//!
//! Each operation is a plain function returning a JSON string so it can be
//! exercised natively; the `#[wasm_bindgen]` wrappers only convert errors.

use ionstring::equilibrium::equilibrium_positions;
use ionstring::heating::normalized_heating;
use ionstring::modes::{fractional_spacing, select_logic_mode, spectrum};
use ionstring::stability::{epsilon_s, stability_curve};
use ionstring::{Branch, CrystalConfig, ModeSpectrum};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

pub const CURVE_MU_MIN: f64 = 0.01;
pub const CURVE_MU_MAX: f64 = 100.0;

fn modes_value(s: &ModeSpectrum, n: usize) -> Result<Value, String> {
    let positions = equilibrium_positions(n)
        .map_err(|e| e.to_string())?
        .positions;
    let heating = if s.is_stable() {
        Some(normalized_heating(s).map_err(|e| e.to_string())?.normalized)
    } else {
        None
    };
    let logic = select_logic_mode(s).ok();
    let spacing = logic.and_then(|k| fractional_spacing(s, k).ok());
    Ok(json!({
        "n": n,
        "mu": s.config().mu,
        "positions": positions,
        "frequencies": s.signed_frequencies(),
        "classes": s.classes().iter().map(|c| c.as_str()).collect::<Vec<_>>(),
        "eigenvectors": s.eigenvectors(),
        "heating": heating,
        "stable": s.is_stable(),
        "logic_mode": logic,
        "spacing": spacing,
    }))
}

/// Axial modes, heating rates and equilibrium positions.
pub fn axial_modes_json(n: usize, mu: f64) -> Result<String, String> {
    let config = CrystalConfig::axial(n, mu).map_err(|e| e.to_string())?;
    let s = spectrum(&config, Branch::Axial).map_err(|e| e.to_string())?;
    Ok(modes_value(&s, n)?.to_string())
}

/// Transverse modes at `ε = ratio · ε_s(μ)`.
pub fn transverse_modes_json(n: usize, mu: f64, ratio: f64) -> Result<String, String> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(format!("epsilon ratio must be positive, got {ratio}"));
    }
    let cp = epsilon_s(n, mu).map_err(|e| e.to_string())?;
    let config = CrystalConfig::new(n, mu, ratio * cp.epsilon_s).map_err(|e| e.to_string())?;
    let s = spectrum(&config, Branch::Transverse).map_err(|e| e.to_string())?;
    let mut v = modes_value(&s, n)?;
    v["epsilon"] = json!(config.epsilon);
    v["epsilon_s"] = json!(cp.epsilon_s);
    v["governing_mode"] = json!(cp.governing_mode.as_str());
    Ok(v.to_string())
}

/// `ε_s(μ)` on a log grid over `[0.01, 100]` with the cusp, if any.
pub fn stability_curve_json(n: usize, points: usize) -> Result<String, String> {
    let curve =
        stability_curve(n, CURVE_MU_MIN, CURVE_MU_MAX, points).map_err(|e| e.to_string())?;
    Ok(json!({
        "n": n,
        "mu": curve.mu_grid,
        "epsilon_s": curve.epsilon_s,
        "governing_mode": curve.governing_mode.iter().map(|g| g.as_str()).collect::<Vec<_>>(),
        "cusp": curve.cusp,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn axial_modes(n: usize, mu: f64) -> Result<String, JsValue> {
    axial_modes_json(n, mu).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn transverse_modes(n: usize, mu: f64, ratio: f64) -> Result<String, JsValue> {
    transverse_modes_json(n, mu, ratio).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn stability_boundary(n: usize, points: usize) -> Result<String, JsValue> {
    stability_curve_json(n, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn version() -> String {
    ionstring::VERSION.to_string()
}
