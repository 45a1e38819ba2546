//! Browser bindings: a few interactive operations on band-limited fields.
//!
//! Every map is returned row-major on the Gauss–Legendre grid of the given
//! `lmax`: `lmax + 1` rings from north to south, `2 lmax + 1` longitudes.

use spinfield::ladder::distortion_fields;
use spinfield::randomfield::{sample_coefficients, sample_stokes_bundle, Component, PowerSpectrumSet};
use spinfield::transform::{make_grid, synthesize, synthesize_real};
use wasm_bindgen::prelude::*;

/// Largest band limit offered to the page.
pub const MAX_LMAX: usize = 128;

fn check_lmax(lmax: usize) -> Result<(), String> {
    if lmax == 0 || lmax > MAX_LMAX {
        return Err(format!("lmax must be between 1 and {MAX_LMAX}"));
    }
    Ok(())
}

/// `C_l = (l + 1)^-slope`, zero below `min_ell`.
fn power_law(lmax: usize, slope: f64, min_ell: usize) -> Vec<f64> {
    (0..=lmax)
        .map(|l| if l < min_ell { 0.0 } else { (l as f64 + 1.0).powf(-slope) })
        .collect()
}

/// `[n_theta, n_phi]` of the grid for `lmax`.
pub fn grid_shape(lmax: usize) -> Result<Vec<usize>, String> {
    check_lmax(lmax)?;
    let g = make_grid(lmax).map_err(|e| e.to_string())?;
    Ok(vec![g.n_theta(), g.n_phi()])
}

/// Real isotropic scalar field with a power-law spectrum.
pub fn scalar_field(lmax: usize, slope: f64, seed: u64) -> Result<Vec<f64>, String> {
    check_lmax(lmax)?;
    let grid = make_grid(lmax).map_err(|e| e.to_string())?;
    let spec = PowerSpectrumSet::scalar("T", &power_law(lmax, slope, 0)).map_err(|e| e.to_string())?;
    let c = sample_coefficients(&spec, seed, true).map_err(|e| e.to_string())?;
    synthesize_real(&c.components[0], &grid).map_err(|e| e.to_string())
}

/// `Q` followed by `U` for power-law E and B spectra scaled by the two amplitudes.
pub fn polarization(lmax: usize, slope: f64, e_amplitude: f64, b_amplitude: f64, seed: u64) -> Result<Vec<f64>, String> {
    check_lmax(lmax)?;
    if lmax < 2 {
        return Err("polarization needs lmax >= 2".into());
    }
    let grid = make_grid(lmax).map_err(|e| e.to_string())?;
    let mut spec = PowerSpectrumSet::zeros(vec![Component::named("E"), Component::named("B")], lmax);
    for (l, c) in power_law(lmax, slope, 2).into_iter().enumerate() {
        spec.set(l, 0, 0, e_amplitude * c).map_err(|e| e.to_string())?;
        spec.set(l, 1, 1, b_amplitude * c).map_err(|e| e.to_string())?;
    }
    let s = sample_stokes_bundle(&spec, &grid, seed).map_err(|e| e.to_string())?;
    let mut out = s.maps.q;
    out.extend(s.maps.u);
    Ok(out)
}

/// Lensing maps of a random potential: `κ`, `Re γ`, `Im γ`, `|F|`, `|G|`,
/// concatenated.
pub fn lensing(lmax: usize, slope: f64, seed: u64) -> Result<Vec<f64>, String> {
    check_lmax(lmax)?;
    let grid = make_grid(lmax).map_err(|e| e.to_string())?;
    let spec = PowerSpectrumSet::scalar("phi", &power_law(lmax, slope, 1)).map_err(|e| e.to_string())?;
    let phi = sample_coefficients(&spec, seed, true).map_err(|e| e.to_string())?;
    let d = distortion_fields(&phi.components[0]).map_err(|e| e.to_string())?;
    let map = |c| synthesize(c, &grid).map_err(|e| e.to_string());
    let kappa = synthesize_real(&d.kappa, &grid).map_err(|e| e.to_string())?;
    let shear = map(&d.shear)?;
    let f1 = map(&d.flexion1)?;
    let f3 = map(&d.flexion3)?;
    let mut out = kappa;
    out.extend(shear.values().iter().map(|v| v.re));
    out.extend(shear.values().iter().map(|v| v.im));
    out.extend(f1.values().iter().map(|v| v.norm()));
    out.extend(f3.values().iter().map(|v| v.norm()));
    Ok(out)
}

fn js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = gridShape)]
pub fn grid_shape_js(lmax: usize) -> Result<Vec<usize>, JsError> {
    grid_shape(lmax).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = scalarField)]
pub fn scalar_field_js(lmax: usize, slope: f64, seed: u32) -> Result<Vec<f64>, JsError> {
    js(scalar_field(lmax, slope, seed.into()))
}

#[wasm_bindgen(js_name = polarization)]
pub fn polarization_js(lmax: usize, slope: f64, e_amplitude: f64, b_amplitude: f64, seed: u32) -> Result<Vec<f64>, JsError> {
    js(polarization(lmax, slope, e_amplitude, b_amplitude, seed.into()))
}

#[wasm_bindgen(js_name = lensing)]
pub fn lensing_js(lmax: usize, slope: f64, seed: u32) -> Result<Vec<f64>, JsError> {
    js(lensing(lmax, slope, seed.into()))
}
