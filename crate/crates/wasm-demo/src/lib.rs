//! Browser bindings: three JSON-returning entry points used by `www/index.html`.

use eqbif::continuation::{continue_branch, detect_bifurcation, switch_branch, GalerkinProblem, StepControl};
use eqbif::potentials::builtin;
use eqbif::predictor::{predict, EpsilonPolicy};
use eqbif::spectral::Domain;
use eqbif::{Error, Result};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn domain(kind: &str, dim: usize) -> Result<Domain> {
    match kind {
        "sphere" => Domain::sphere(dim),
        "ball" => Domain::ball(dim),
        other => Err(Error::Config(format!("unknown domain {other:?}"))),
    }
}

fn finish(r: Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.kind(), "message": e.to_string() }).to_string(),
    }
}

fn spectrum_value(kind: &str, dim: usize, cutoff: f64) -> Result<Value> {
    let d = domain(kind, dim)?;
    Ok(json!({ "domain": d.to_string(), "eigenvalues": d.spectrum_upto(cutoff)? }))
}

fn levels_value(potential: &str, kind: &str, dim: usize, cutoff: f64) -> Result<Value> {
    let spec = builtin(potential)?;
    let d = domain(kind, dim)?;
    Ok(serde_json::to_value(predict(&spec, &d, cutoff, EpsilonPolicy::Auto, 0)?).expect("prediction serialises"))
}

fn branch_value(potential: &str, kind: &str, dim: usize, lambda_star: f64, epsilon: f64) -> Result<Value> {
    if !(epsilon > 0.0) {
        return Err(Error::Config("epsilon must be positive".into()));
    }
    let spec = builtin(potential)?;
    let problem = GalerkinProblem::with_default_truncation(domain(kind, dim)?, spec)?;
    let window = (lambda_star - epsilon, lambda_star + epsilon);
    let star = detect_bifurcation(&problem, window, 100)?
        .into_iter()
        .min_by(|a, b| (a - lambda_star).abs().total_cmp(&(b - lambda_star).abs()))
        .ok_or(Error::NoBranch(lambda_star))?;
    let seed = switch_branch(&problem, star, eqbif::continuation::DEFAULT_AMPLITUDE)?;
    let branch = continue_branch(&problem, &seed, window, 80, StepControl::default())?;
    let points: Vec<Value> = branch
        .points
        .iter()
        .map(|p| json!({ "lambda": p.lambda, "sup_norm": p.sup_norm, "deviation": p.deviation }))
        .collect();
    Ok(json!({ "detected": star, "termination": branch.termination, "points": points }))
}

/// Laplace eigenvalues up to `cutoff` as JSON.
#[wasm_bindgen]
pub fn spectrum(kind: &str, dim: usize, cutoff: f64) -> String {
    finish(spectrum_value(kind, dim, cutoff))
}

/// Predicted levels and degree-jump candidates for a builtin potential.
#[wasm_bindgen]
pub fn levels(potential: &str, kind: &str, dim: usize, cutoff: f64) -> String {
    finish(levels_value(potential, kind, dim, cutoff))
}

/// Branch bifurcating near `lambda_star`, continued across `lambda_star ± epsilon`.
#[wasm_bindgen]
pub fn branch(potential: &str, kind: &str, dim: usize, lambda_star: f64, epsilon: f64) -> String {
    finish(branch_value(potential, kind, dim, lambda_star, epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entry_points_return_json() {
        let s: Value = serde_json::from_str(&spectrum("ball", 2, 10.0)).unwrap();
        assert!(s["eigenvalues"].as_array().unwrap().len() >= 3);
        let l: Value = serde_json::from_str(&levels("pitchfork-scalar", "sphere", 2, 10.0)).unwrap();
        assert_eq!(l["levels"], json!([1.0, 4.0, 9.0]));
        let b: Value = serde_json::from_str(&branch("pitchfork-scalar", "sphere", 2, 1.0, 0.5)).unwrap();
        assert!(b["points"].as_array().unwrap().len() > 3);
        let e: Value = serde_json::from_str(&spectrum("torus", 2, 10.0)).unwrap();
        assert_eq!(e["error"], json!("config"));
    }
}
