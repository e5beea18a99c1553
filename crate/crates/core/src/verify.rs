//! End-to-end check: predicted levels against levels detected on the
//! trivial branch of the Galerkin problem, with a branch continued from each.

use serde::Serialize;

use crate::continuation::{
    continue_branch, detect_bifurcation, switch_branch, Branch, GalerkinProblem, StepControl, Termination,
};
use crate::error::{Error, Result};
use crate::potentials::{symmetric_spectrum, PotentialSpec, GROUPING_TOL};
use crate::predictor::{predict, EpsilonPolicy, Guarantee};
use crate::spectral::Domain;

/// Tolerance for matching predicted and detected sphere levels.
pub const MATCH_TOL: f64 = 1e-6;

pub const EMPTY_VERDICT: &str = "no predicted levels; no detected branches";

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub window: (f64, f64),
    pub truncation: Option<usize>,
    pub epsilon: EpsilonPolicy,
    pub steps: usize,
    pub amplitude: f64,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            window: (0.1, 10.0),
            truncation: None,
            epsilon: EpsilonPolicy::Auto,
            steps: 200,
            amplitude: crate::continuation::DEFAULT_AMPLITUDE,
            max_steps: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchSummary {
    pub points: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub max_deviation: f64,
    pub termination: Termination,
    pub pinning: Vec<String>,
}

impl BranchSummary {
    fn of(b: &Branch) -> Self {
        let lambdas = b.points.iter().map(|p| p.lambda);
        BranchSummary {
            points: b.points.len(),
            lambda_min: lambdas.clone().fold(f64::INFINITY, f64::min),
            lambda_max: lambdas.fold(f64::NEG_INFINITY, f64::max),
            max_deviation: b.max_deviation(),
            termination: b.termination,
            pinning: b.pinning.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelReport {
    pub lambda0: f64,
    pub epsilon: f64,
    pub jump: bool,
    pub guarantee: Guarantee,
    pub detected: Option<f64>,
    pub captured: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<BranchSummary>,
    /// Observed continuation outcome in terms of the global alternative.
    pub outcome: String,
    /// Ball only: which half of the alternative the data is consistent with.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heuristic: Option<String>,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub domain: String,
    pub potential: String,
    pub window: (f64, f64),
    pub truncation: usize,
    pub beta_max: f64,
    pub predicted: Vec<f64>,
    pub detected: Vec<f64>,
    pub unmatched_detected: Vec<f64>,
    pub levels: Vec<LevelReport>,
    pub verdict: String,
    pub seed: u64,
}

fn outcome(b: &Branch) -> String {
    match b.termination {
        Termination::LambdaLimit => {
            "left the parameter interval: consistent with an unbounded or far-reaching continuum (not certified)".into()
        }
        Termination::ReconnectsToTrivial(l) => format!("returned to the trivial family at lambda = {l}"),
        Termination::StepUnderflow => "continuation stalled (step underflow)".into(),
        Termination::MaxSteps => "step budget exhausted inside the interval".into(),
        Termination::Seed => "seed only".into(),
    }
}

fn ball_heuristic(b: &Branch, lambda0: f64, interval: (f64, f64)) -> String {
    let above = b.points.iter().any(|p| p.lambda > lambda0 && p.deviation > crate::continuation::RECONNECT_TOL);
    let below = b.points.iter().any(|p| p.lambda < lambda0 && p.deviation > crate::continuation::RECONNECT_TOL);
    let side = match (below, above) {
        (true, false) => format!("[{}, {lambda0})", interval.0),
        (false, true) => format!("({lambda0}, {}]", interval.1),
        _ => "both sides".into(),
    };
    format!(
        "heuristic: nontrivial solutions observed on {side}; consistent with local bifurcation along a half-interval \
         and with global bifurcation inside the interval"
    )
}

fn max_abs_alpha(spec: &PotentialSpec) -> Result<f64> {
    let s = symmetric_spectrum(&spec.a, GROUPING_TOL)?;
    Ok(s.iter().fold(0.0_f64, |m, g| m.max(g.alpha.abs())))
}

/// Predict, detect, switch and continue; return the report and the
/// continued branches in level order.
pub fn verify(spec: &PotentialSpec, domain: &Domain, opts: &VerifyOptions) -> Result<(VerifyReport, Vec<Branch>)> {
    let (a, b) = opts.window;
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("window {a}:{b} is empty")));
    }
    let problem = match opts.truncation {
        Some(n) => GalerkinProblem::new(*domain, spec.clone(), n)?,
        None => GalerkinProblem::with_default_truncation(*domain, spec.clone())?,
    };
    let cutoff = a.abs().max(b.abs()) * max_abs_alpha(spec)?;
    if problem.beta_max() < cutoff {
        return Err(Error::Config(format!(
            "truncation resolves eigenvalues up to {}, the window needs {cutoff}",
            problem.beta_max()
        )));
    }
    let prediction = predict(spec, domain, cutoff, opts.epsilon, opts.seed)?;
    let inside = |l: f64| l > a && l < b;
    let candidates: Vec<_> = prediction.candidates.into_iter().filter(|c| inside(c.lambda0)).collect();
    let predicted: Vec<f64> = if domain.is_sphere() {
        prediction.levels.into_iter().filter(|l| inside(*l)).collect()
    } else {
        candidates.iter().map(|c| c.lambda0).collect()
    };
    let detected = detect_bifurcation(&problem, opts.window, opts.steps)?;

    let mut levels = Vec::new();
    let mut branches = Vec::new();
    for cand in &candidates {
        let (lo, hi) = (cand.lambda0 - cand.epsilon, cand.lambda0 + cand.epsilon);
        let hit = if domain.is_sphere() {
            detected.iter().copied().find(|d| (d - cand.lambda0).abs() <= MATCH_TOL)
        } else {
            detected
                .iter()
                .copied()
                .filter(|d| *d > lo && *d < hi)
                .min_by(|x, y| (x - cand.lambda0).abs().total_cmp(&(y - cand.lambda0).abs()))
        };
        let mut report = LevelReport {
            lambda0: cand.lambda0,
            epsilon: cand.epsilon,
            jump: cand.jump,
            guarantee: cand.guarantee.clone(),
            detected: hit,
            captured: false,
            branch: None,
            outcome: "no level detected".into(),
            heuristic: None,
            consistent: false,
        };
        if let Some(star) = hit {
            let run = switch_branch(&problem, star, opts.amplitude)
                .and_then(|seed| continue_branch(&problem, &seed, (lo, hi), opts.max_steps, StepControl::default()));
            match run {
                Ok(branch) => {
                    report.captured = branch.is_nontrivial();
                    report.outcome = outcome(&branch);
                    if !domain.is_sphere() {
                        report.heuristic = Some(ball_heuristic(&branch, cand.lambda0, (lo, hi)));
                    }
                    report.branch = Some(BranchSummary::of(&branch));
                    branches.push(branch);
                }
                Err(e) => report.outcome = format!("branch switching failed: {e}"),
            }
        }
        report.consistent = report.captured;
        levels.push(report);
    }

    let unmatched_detected: Vec<f64> = if domain.is_sphere() {
        detected
            .iter()
            .copied()
            .filter(|d| !predicted.iter().any(|l| (l - d).abs() <= MATCH_TOL))
            .collect()
    } else {
        Vec::new()
    };
    let verdict = if predicted.is_empty() && detected.is_empty() {
        EMPTY_VERDICT.to_string()
    } else if domain.is_sphere() {
        let all_matched = levels.iter().all(|l| l.detected.is_some()) && levels.len() == predicted.len();
        if all_matched && unmatched_detected.is_empty() { "CONSISTENT" } else { "INCONSISTENT" }.to_string()
    } else if levels.iter().all(|l| l.captured) {
        "CONSISTENT".to_string()
    } else {
        "INCONSISTENT".to_string()
    };
    let report = VerifyReport {
        domain: domain.to_string(),
        potential: spec.name.clone(),
        window: opts.window,
        truncation: problem.truncation,
        beta_max: problem.beta_max(),
        predicted,
        detected,
        unmatched_detected,
        levels,
        verdict,
        seed: opts.seed,
    };
    Ok((report, branches))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::builtin;

    #[test]
    fn degenerate_ring_has_nothing_to_verify() {
        let spec = builtin("so2-ring-degenerate").unwrap();
        let opts = VerifyOptions { window: (0.1, 20.0), ..Default::default() };
        let (r, branches) = verify(&spec, &Domain::circle(), &opts).unwrap();
        assert_eq!(r.verdict, EMPTY_VERDICT);
        assert!(r.levels.is_empty() && branches.is_empty());
    }

    #[test]
    fn truncation_must_cover_window() {
        let spec = builtin("pitchfork-scalar").unwrap();
        let opts = VerifyOptions { window: (0.5, 9.5), truncation: Some(3), ..Default::default() };
        assert!(verify(&spec, &Domain::circle(), &opts).unwrap_err().is_config());
    }

    #[test]
    fn pitchfork_circle_is_consistent() {
        let spec = builtin("pitchfork-scalar").unwrap();
        let opts = VerifyOptions { window: (0.5, 9.5), ..Default::default() };
        let (r, branches) = verify(&spec, &Domain::circle(), &opts).unwrap();
        assert_eq!(r.verdict, "CONSISTENT");
        assert_eq!(r.levels.len(), 3);
        assert!(r.levels.iter().all(|l| l.captured));
        assert_eq!(branches.len(), 3);
    }
}
