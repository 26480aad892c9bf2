//! Browser bindings: moments to cumulants, convolution and the
//! Bercovici-Pata semigroup, all on JSON distributions.

use unshuffle::cumulants::to_cumulants;
use unshuffle::products::{bp_distribution, convolve};
use unshuffle::{ConvolutionKind, CumulantKind, Distribution, Rational};
use wasm_bindgen::prelude::*;

/// Largest degree the page accepts, to keep the tab responsive.
pub const MAX_DEGREE: usize = 6;

fn distribution(text: &str) -> Result<Distribution, String> {
    let d = Distribution::from_json(text).map_err(|e| e.to_string())?;
    if d.max_degree() > MAX_DEGREE {
        return Err(format!(
            "max_degree {} is above the demo limit {MAX_DEGREE}",
            d.max_degree()
        ));
    }
    Ok(d)
}

pub fn cumulants_json(moments: &str, kind: &str) -> Result<String, String> {
    let kind: CumulantKind = kind.parse().map_err(|e: unshuffle::Error| e.to_string())?;
    let c = to_cumulants(&distribution(moments)?, kind).map_err(|e| e.to_string())?;
    Ok(c.to_json())
}

pub fn convolve_json(first: &str, second: &str, kind: &str) -> Result<String, String> {
    let kind: ConvolutionKind = kind.parse().map_err(|e: unshuffle::Error| e.to_string())?;
    let d =
        convolve(&distribution(first)?, &distribution(second)?, kind).map_err(|e| e.to_string())?;
    Ok(d.to_json())
}

pub fn bp_json(moments: &str, t: &str) -> Result<String, String> {
    let t: Rational = t
        .trim()
        .parse()
        .map_err(|e: unshuffle::Error| e.to_string())?;
    let d = bp_distribution(&distribution(moments)?, &t).map_err(|e| e.to_string())?;
    Ok(d.to_json())
}

#[wasm_bindgen]
pub fn cumulants(moments: &str, kind: &str) -> Result<String, JsError> {
    cumulants_json(moments, kind).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = convolve)]
pub fn convolve_js(first: &str, second: &str, kind: &str) -> Result<String, JsError> {
    convolve_json(first, second, kind).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn bp(moments: &str, t: &str) -> Result<String, JsError> {
    bp_json(moments, t).map_err(|e| JsError::new(&e))
}
