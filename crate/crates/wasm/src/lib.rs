//! Browser bindings for the stability-region explorer in `www/`.
//!
//! Every export returns JSON text; errors surface as JavaScript exceptions.
//! A `y` argument that is NaN or `-Infinity` selects `D_-inf`.

use imexstab::region::{boundary_locus, exact_boundary, member_finite, member_infinite, region_summary, ScaledStep};
use imexstab::scheme::{build_scheme, order_condition_residual, zero_stability};
use imexstab::splitting::{certify, delta_grid, largest_stable_delta};
use num_complex::Complex64;
use serde::Serialize;
use wasm_bindgen::prelude::*;

const SCAN_STEP: f64 = 0.01;
const SCALAR_ANGLES: usize = 32;

fn scaled_step(y: f64) -> Result<ScaledStep, String> {
    if y.is_nan() || y == f64::NEG_INFINITY {
        Ok(ScaledStep::NegInfinity)
    } else if y < 0.0 && y.is_finite() {
        Ok(ScaledStep::Finite(y))
    } else {
        Err(format!("y must be negative, got {y}"))
    }
}

fn to_json(v: &impl Serialize) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

fn pairs(points: &[Complex64]) -> Vec<[f64; 2]> {
    points.iter().map(|z| [z.re, z.im]).collect()
}

#[derive(Serialize)]
struct Coefficients {
    r: usize,
    delta: f64,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    order_condition_residual: f64,
    zero_stable: bool,
}

pub fn coefficients_json(r: usize, delta: f64) -> Result<String, String> {
    let s = build_scheme(r, delta).map_err(|e| e.to_string())?;
    let zs = zero_stability(&s).map_err(|e| e.to_string())?;
    to_json(&Coefficients {
        r,
        delta,
        a: s.a().to_vec(),
        b: s.b().to_vec(),
        c: s.c().to_vec(),
        order_condition_residual: order_condition_residual(&s),
        zero_stable: zs.stable,
    })
}

#[derive(Serialize)]
struct Region {
    exact: Option<Vec<[f64; 2]>>,
    locus: Vec<[f64; 2]>,
    m_l: f64,
    m_r: f64,
    circle_center: f64,
    circle_radius: f64,
}

pub fn region_json(r: usize, delta: f64, y: f64, samples: usize) -> Result<String, String> {
    let step = scaled_step(y)?;
    let s = build_scheme(r, delta).map_err(|e| e.to_string())?;
    let exact = match step {
        ScaledStep::NegInfinity => Some(pairs(&exact_boundary(r, delta, samples).map_err(|e| e.to_string())?.points)),
        ScaledStep::Finite(_) => None,
    };
    let locus = boundary_locus(step, &s, samples).map_err(|e| e.to_string())?;
    let summary = region_summary(r, delta).map_err(|e| e.to_string())?;
    to_json(&Region {
        exact,
        locus: pairs(&locus.points),
        m_l: summary.m_l,
        m_r: summary.m_r,
        circle_center: summary.circle_center,
        circle_radius: summary.circle_radius,
    })
}

pub fn member(r: usize, delta: f64, re: f64, im: f64, y: f64) -> Result<bool, String> {
    let s = build_scheme(r, delta).map_err(|e| e.to_string())?;
    let mu = Complex64::new(re, im);
    Ok(match scaled_step(y)? {
        ScaledStep::NegInfinity => member_infinite(mu, &s),
        ScaledStep::Finite(y) => member_finite(mu, y, &s),
    })
}

#[derive(Serialize)]
struct ScalarCertificate {
    mu: f64,
    status: imexstab::splitting::VerdictStatus,
    largest_certified_delta: Option<f64>,
    scan_step: f64,
}

/// Certify `u' = lambda_a u + lambda_b u` (`lambda_a < 0`) and scan for the
/// largest certified delta.
pub fn scalar_certify_json(lambda_a: f64, lambda_b: f64, r: usize, delta: f64) -> Result<String, String> {
    let p = imexstab::scalar_problem(lambda_a, lambda_b).map_err(|e| e.to_string())?;
    let verdict = certify(&p.split, r, delta, 1.0, SCALAR_ANGLES).map_err(|e| e.to_string())?;
    let grid = delta_grid(SCAN_STEP).map_err(|e| e.to_string())?;
    let largest = largest_stable_delta(&p.split, r, 1.0, &grid, SCALAR_ANGLES).map_err(|e| e.to_string())?;
    to_json(&ScalarCertificate {
        mu: lambda_b / -lambda_a,
        status: verdict.status,
        largest_certified_delta: largest,
        scan_step: SCAN_STEP,
    })
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen]
pub fn coefficients(r: usize, delta: f64) -> Result<String, JsError> {
    coefficients_json(r, delta).map_err(js)
}

#[wasm_bindgen]
pub fn region(r: usize, delta: f64, y: f64, samples: usize) -> Result<String, JsError> {
    region_json(r, delta, y, samples).map_err(js)
}

#[wasm_bindgen]
pub fn is_member(r: usize, delta: f64, re: f64, im: f64, y: f64) -> Result<bool, JsError> {
    member(r, delta, re, im, y).map_err(js)
}

#[wasm_bindgen]
pub fn scalar_certify(lambda_a: f64, lambda_b: f64, r: usize, delta: f64) -> Result<String, JsError> {
    scalar_certify_json(lambda_a, lambda_b, r, delta).map_err(js)
}
