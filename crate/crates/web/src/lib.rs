//! wasm-bindgen entry points for the static demo page in `www/`.
//!
//! Every export returns a JSON string; the plain functions underneath are what
//! the native tests exercise.

use serde::Serialize;
use unext::applications::overhead;
use unext::measures::{e_max_u, e_min_u, e_rel_u, is_two_extendible, unext_fidelity, MeasureOptions};
use unext::states::{erased, isotropic, pure_from_schmidt};
use wasm_bindgen::prelude::*;

/// Keeps the page responsive: the isotropic extension has order d³ (d = 4 takes seconds).
const MAX_ISOTROPIC_DIM: usize = 3;
/// Pure states have rank one, so their extensions stay small.
const MAX_SCHMIDT_RANK: usize = 4;

#[derive(Serialize, Debug)]
pub struct SdpReport {
    pub e_max: f64,
    pub e_min: f64,
    pub fidelity: f64,
    /// −log₂ of the fidelity.
    pub e_half: f64,
    pub two_extendible: Option<bool>,
}

#[derive(Serialize, Debug)]
pub struct OverheadReport {
    pub e_rel: f64,
    pub gap: f64,
    /// Lower bound on copies per ebit from the measure; `null` when infinite.
    pub overhead: Option<f64>,
    /// The known optimum 1/(1−ε) of the flag-and-post-select protocol.
    pub protocol: Option<f64>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn sdp_report(rho: &unext::BipartiteState) -> Result<SdpReport, String> {
    let e = |r: unext::Result<unext::measures::MeasureResult>| r.map(|m| m.value).map_err(|e| e.to_string());
    let fidelity = e(unext_fidelity(rho))?;
    Ok(SdpReport {
        e_max: e(e_max_u(rho))?,
        e_min: e(e_min_u(rho))?,
        fidelity,
        e_half: (-fidelity.log2()).max(0.0),
        two_extendible: is_two_extendible(rho).map_err(|e| e.to_string())?.is_feasible(),
    })
}

pub fn isotropic_report(d: usize, r: f64) -> Result<SdpReport, String> {
    if !(2..=MAX_ISOTROPIC_DIM).contains(&d) {
        return Err(format!("d must be between 2 and {MAX_ISOTROPIC_DIM}"));
    }
    sdp_report(&isotropic(d, r).map_err(|e| e.to_string())?)
}

/// `schmidt` is a comma- or space-separated list of coefficients (normalized here).
pub fn pure_report(schmidt: &str) -> Result<SdpReport, String> {
    let coeffs: Vec<f64> = schmidt
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("'{t}' is not a number")))
        .collect::<Result<_, _>>()?;
    if coeffs.is_empty() || coeffs.len() > MAX_SCHMIDT_RANK {
        return Err(format!("give between 1 and {MAX_SCHMIDT_RANK} coefficients"));
    }
    let total: f64 = coeffs.iter().sum();
    if !(total > 0.0) || coeffs.iter().any(|&c| c < 0.0) {
        return Err("coefficients must be nonnegative and not all zero".into());
    }
    let coeffs: Vec<f64> = coeffs.iter().map(|c| c / total).collect();
    sdp_report(&pure_from_schmidt(&coeffs, None).map_err(|e| e.to_string())?)
}

pub fn erased_report(eps: f64) -> Result<OverheadReport, String> {
    let rho = erased(eps).map_err(|e| e.to_string())?;
    let m = e_rel_u(&rho, &MeasureOptions::default()).map_err(|e| e.to_string())?;
    Ok(OverheadReport {
        e_rel: m.value,
        gap: m.diagnostics.gap,
        overhead: finite(overhead(1.0, m.value)),
        protocol: finite(1.0 / (1.0 - eps)),
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn isotropic_measures(d: usize, r: f64) -> Result<String, JsError> {
    to_js(isotropic_report(d, r))
}

#[wasm_bindgen]
pub fn pure_measures(schmidt: &str) -> Result<String, JsError> {
    to_js(pure_report(schmidt))
}

#[wasm_bindgen]
pub fn erased_overhead(eps: f64) -> Result<String, JsError> {
    to_js(erased_report(eps))
}
