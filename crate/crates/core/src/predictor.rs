//! Bifurcation levels `Λ = {β_k / α_j}` and the degree-jump test deciding
//! whether a level carries a branch.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::euler_ring::{deg_minus_id, product_decision, AtomSide, RepBlock, RepresentationDescriptor, SymbolicDegree};
use crate::potentials::{normal_slice, slice_degree, symmetric_spectrum, EigenGroup, PotentialSpec, GROUPING_TOL};
use crate::spectral::{Domain, LaplaceEigenvalue};

/// Relative tolerance of the resonance test `β = λ α`.
pub const RESONANCE_TOL: f64 = 1e-9;

/// One block of `Id − L_{λA}`: the eigenvalue `(β − λα)/(1 + β)` on
/// `V_{-Δ}(β) ⊗ E_A(α)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceBlock {
    pub beta: f64,
    pub alpha: f64,
    pub eigenvalue: f64,
    pub dimension: usize,
    pub beta_multiplicity: usize,
    pub alpha_multiplicity: usize,
    pub nontrivial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceOperatorSpectrum {
    pub lambda: f64,
    pub entries: Vec<SliceBlock>,
}

impl SliceOperatorSpectrum {
    pub fn zero_blocks(&self) -> impl Iterator<Item = &SliceBlock> {
        self.entries.iter().filter(|b| b.eigenvalue.abs() <= RESONANCE_TOL)
    }
}

/// Eigenspace nontriviality as a representation of the rotation group.
pub fn is_nontrivial(domain: &Domain, e: &LaplaceEigenvalue) -> bool {
    if domain.is_sphere() {
        e.value != 0.0
    } else {
        e.multiplicity > 1
    }
}

fn a_spectrum(spec: &PotentialSpec) -> Result<Vec<EigenGroup>> {
    symmetric_spectrum(&spec.a, GROUPING_TOL)
}

fn resonant(beta: f64, lambda: f64, alpha: f64) -> bool {
    (beta - lambda * alpha).abs() <= RESONANCE_TOL * beta.abs().max(1.0)
}

pub fn slice_spectrum(spec: &PotentialSpec, domain: &Domain, lambda: f64, beta_cutoff: f64) -> Result<SliceOperatorSpectrum> {
    let sigma = domain.spectrum_upto(beta_cutoff)?;
    let alphas = a_spectrum(spec)?;
    if sigma.is_empty() || alphas.is_empty() {
        return Err(Error::InvalidArgument("empty spectrum request".into()));
    }
    let mut entries = Vec::new();
    for e in &sigma {
        for g in &alphas {
            entries.push(SliceBlock {
                beta: e.value,
                alpha: g.alpha,
                eigenvalue: (e.value - lambda * g.alpha) / (1.0 + e.value),
                dimension: e.multiplicity * g.multiplicity,
                beta_multiplicity: e.multiplicity,
                alpha_multiplicity: g.multiplicity,
                nontrivial: is_nontrivial(domain, e),
            });
        }
    }
    Ok(SliceOperatorSpectrum { lambda, entries })
}

fn dedup_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for x in v {
        match out.last() {
            Some(&y) if (x - y).abs() <= RESONANCE_TOL * y.abs().max(1.0) => {}
            _ => out.push(x),
        }
    }
    out
}

/// `Λ` truncated to `0 < β <= beta_cutoff`, ascending.
pub fn lambda_set(spec: &PotentialSpec, domain: &Domain, beta_cutoff: f64) -> Result<Vec<f64>> {
    let sigma = domain.spectrum_upto(beta_cutoff)?;
    let alphas = a_spectrum(spec)?;
    let quotients = sigma
        .iter()
        .filter(|e| e.value > 0.0)
        .flat_map(|e| alphas.iter().filter(|g| g.alpha != 0.0).map(move |g| e.value / g.alpha))
        .collect();
    Ok(dedup_sorted(quotients))
}

fn descriptor(
    spec: &PotentialSpec,
    domain: &Domain,
    beta_cutoff: f64,
    keep: impl Fn(f64, f64) -> bool,
) -> Result<RepresentationDescriptor> {
    let sigma = domain.spectrum_upto(beta_cutoff)?;
    let alphas = a_spectrum(spec)?;
    let mut blocks = Vec::new();
    for e in sigma.iter().filter(|e| e.value > 0.0) {
        for g in &alphas {
            if keep(e.value, g.alpha) {
                blocks.push(RepBlock {
                    beta: e.value,
                    copies: g.multiplicity,
                    dimension: e.multiplicity,
                    nontrivial: is_nontrivial(domain, e),
                });
            }
        }
    }
    Ok(RepresentationDescriptor::new(blocks))
}

/// `V(λ0)`: blocks with `β = λ0 α`, `β ≠ 0`.
pub fn zero_eigenspace(spec: &PotentialSpec, domain: &Domain, lambda0: f64, beta_cutoff: f64) -> Result<RepresentationDescriptor> {
    descriptor(spec, domain, beta_cutoff, |b, a| resonant(b, lambda0, a))
}

/// `W(λ)`: blocks with `0 < β < λ α`.
pub fn negative_eigenspace(spec: &PotentialSpec, domain: &Domain, lambda: f64, beta_cutoff: f64) -> Result<RepresentationDescriptor> {
    descriptor(spec, domain, beta_cutoff, |b, a| b < lambda * a && !resonant(b, lambda, a))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Guarantee {
    SphereGlobal,
    BallAlternative { interval: (f64, f64) },
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationCandidate {
    pub lambda0: f64,
    pub epsilon: f64,
    pub witnesses: Vec<Witness>,
    #[serde(rename = "V")]
    pub v: RepresentationDescriptor,
    pub b_minus: i32,
    pub b_plus: i32,
    pub jump: bool,
    pub guarantee: Guarantee,
    pub statement: String,
}

/// Euler-ring context label for `Γ × SO(N)`.
pub fn ring_context(spec: &PotentialSpec, domain: &Domain) -> String {
    format!("U({} x SO({}))", spec.action, domain.ambient_dim)
}

/// Largest `β` that can resonate with a level of modulus at most `lambda_max`.
fn resonance_cutoff(spec: &PotentialSpec, lambda_max: f64) -> Result<f64> {
    let amax = a_spectrum(spec)?.iter().fold(0.0_f64, |m, g| m.max(g.alpha.abs()));
    Ok(lambda_max * amax * (1.0 + 1e-6) + 1e-9)
}

pub fn degree_jump(spec: &PotentialSpec, domain: &Domain, lambda0: f64, epsilon: f64, seed: u64) -> Result<BifurcationCandidate> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    if lambda0 == 0.0 || lambda0.abs() <= epsilon {
        return Err(Error::InadmissibleWindow(format!(
            "0 lies in ({}, {})",
            lambda0 - epsilon,
            lambda0 + epsilon
        )));
    }
    let (lo, hi) = (lambda0 - epsilon, lambda0 + epsilon);
    let cutoff = resonance_cutoff(spec, lo.abs().max(hi.abs()))?;
    let v = zero_eigenspace(spec, domain, lambda0, cutoff)?;
    if v.is_empty() {
        return Err(Error::NotALevel(lambda0));
    }
    if domain.is_sphere() {
        let others: Vec<f64> = lambda_set(spec, domain, cutoff)?
            .into_iter()
            .filter(|l| *l > lo && *l < hi && (l - lambda0).abs() > RESONANCE_TOL * lambda0.abs().max(1.0))
            .collect();
        if !others.is_empty() {
            return Err(Error::InadmissibleWindow(format!("levels {others:?} lie inside ({lo}, {hi})")));
        }
    }
    let slice = normal_slice(spec)?;
    let b_minus = slice_degree(spec, &slice, lo, seed)?;
    let b_plus = slice_degree(spec, &slice, hi, seed)?;
    let d: SymbolicDegree = deg_minus_id(&ring_context(spec, domain), &v);
    let side = if lambda0 > 0.0 { AtomSide::AtomOnPlus } else { AtomSide::AtomOnMinus };
    let jump = product_decision(b_plus as i64, b_minus as i64, &d, side);
    let witnesses = v
        .blocks
        .iter()
        .flat_map(|b| {
            a_spectrum(spec)
                .unwrap_or_default()
                .into_iter()
                .filter(move |g| resonant(b.beta, lambda0, g.alpha))
                .map(move |g| Witness { alpha: g.alpha, beta: b.beta })
        })
        .collect();
    let (guarantee, statement) = if domain.is_sphere() {
        if jump {
            (
                Guarantee::SphereGlobal,
                format!("global bifurcation of nonconstant solutions from the orbit at lambda = {lambda0}"),
            )
        } else {
            (Guarantee::None, "degrees on both sides agree; no conclusion".to_string())
        }
    } else if jump && v.blocks.iter().any(|b| b.nontrivial) {
        (
            Guarantee::BallAlternative { interval: (lo, hi) },
            format!(
                "either local bifurcation at every lambda of [{lo}, {lambda0}) or of ({lambda0}, {hi}], \
                 or global bifurcation at some lambda in ({lo}, {hi})"
            ),
        )
    } else {
        (Guarantee::None, "eigenspace is a trivial representation; no conclusion".to_string())
    };
    Ok(BifurcationCandidate { lambda0, epsilon, witnesses, v, b_minus, b_plus, jump, guarantee, statement })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "policy", content = "value", rename_all = "kebab-case")]
pub enum EpsilonPolicy {
    /// `min(gap/2, |λ0|/2)` with `gap` the distance to the nearest other level.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub domain: String,
    pub potential: String,
    pub beta_cutoff: f64,
    pub levels: Vec<f64>,
    pub candidates: Vec<BifurcationCandidate>,
    pub note: String,
    pub seed: u64,
}

/// `ε` chosen by [`EpsilonPolicy::Auto`] for `lambda0` among `levels`.
pub fn auto_epsilon(lambda0: f64, levels: &[f64]) -> f64 {
    let gap = levels
        .iter()
        .filter(|l| (*l - lambda0).abs() > RESONANCE_TOL * lambda0.abs().max(1.0))
        .map(|l| (l - lambda0).abs())
        .fold(f64::INFINITY, f64::min);
    (gap / 2.0).min(lambda0.abs() / 2.0)
}

pub fn predict(
    spec: &PotentialSpec,
    domain: &Domain,
    beta_cutoff: f64,
    policy: EpsilonPolicy,
    seed: u64,
) -> Result<Prediction> {
    let levels = lambda_set(spec, domain, beta_cutoff)?;
    // levels beyond the cutoff still bound the gap of the top level
    let wide = lambda_set(spec, domain, 2.0 * beta_cutoff + 10.0)?;
    let mut candidates = Vec::new();
    if domain.is_sphere() {
        for &l0 in &levels {
            let eps = match policy {
                EpsilonPolicy::Auto => auto_epsilon(l0, &wide),
                EpsilonPolicy::Fixed(e) => e,
            };
            candidates.push(degree_jump(spec, domain, l0, eps, seed)?);
        }
    } else {
        let sigma = domain.spectrum_upto(beta_cutoff)?;
        let alphas = a_spectrum(spec)?;
        let mut seeds: Vec<f64> = Vec::new();
        for e in sigma.iter().filter(|e| e.value > 0.0 && e.multiplicity > 1) {
            for g in alphas.iter().filter(|g| g.alpha != 0.0) {
                seeds.push(e.value / g.alpha);
            }
        }
        for l0 in dedup_sorted(seeds) {
            let eps = match policy {
                EpsilonPolicy::Auto => auto_epsilon(l0, &wide),
                EpsilonPolicy::Fixed(e) => e,
            };
            candidates.push(degree_jump(spec, domain, l0, eps, seed)?);
        }
    }
    let note = if domain.is_sphere() {
        if levels.is_empty() {
            "sigma(A) has no nonzero eigenvalue: no bifurcation from the orbit is possible at any lambda".to_string()
        } else {
            "bifurcation from the orbit can occur only at the listed levels".to_string()
        }
    } else {
        "ball candidates: only eigenvalues of multiplicity > 1 are tested; radial levels give no conclusion".to_string()
    };
    Ok(Prediction {
        domain: domain.to_string(),
        potential: spec.name.clone(),
        beta_cutoff,
        levels,
        candidates,
        note,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::builtin;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn slice_spectrum_examples() {
        let s = builtin("pitchfork-scalar").unwrap();
        let sp = slice_spectrum(&s, &Domain::circle(), 0.0, 5.0).unwrap();
        let ev: Vec<f64> = sp.entries.iter().map(|b| b.eigenvalue).collect();
        assert_eq!(ev, vec![0.0, 0.5, 0.8]);

        let r = builtin("so2-ring").unwrap();
        let sp = slice_spectrum(&r, &Domain::sphere2(), 2.0, 10.0).unwrap();
        let b = sp.entries.iter().find(|b| b.beta == 2.0 && b.alpha == 1.0).unwrap();
        assert_eq!((b.eigenvalue, b.dimension, b.nontrivial), (0.0, 3, true));
        let c = sp.entries.iter().find(|b| b.beta == 0.0 && b.alpha == 0.0).unwrap();
        assert_eq!(c.eigenvalue, 0.0);
        for b in &sp.entries {
            assert_eq!(b.eigenvalue, (b.beta - 2.0 * b.alpha) / (1.0 + b.beta));
        }
        assert!(slice_spectrum(&s, &Domain::circle(), 0.0, -1.0).is_err());
    }

    #[test]
    fn lambda_set_examples() {
        let s = builtin("pitchfork-scalar").unwrap();
        assert_eq!(lambda_set(&s, &Domain::circle(), 10.0).unwrap(), vec![1.0, 4.0, 9.0]);
        let r = builtin("so2-ring").unwrap();
        assert_eq!(lambda_set(&r, &Domain::sphere2(), 13.0).unwrap(), vec![2.0, 6.0, 12.0]);
        let d = builtin("so2-ring-degenerate").unwrap();
        assert!(lambda_set(&d, &Domain::sphere2(), 50.0).unwrap().is_empty());
    }

    #[test]
    fn eigenspace_examples() {
        let s = builtin("pitchfork-scalar").unwrap();
        let v = zero_eigenspace(&s, &Domain::circle(), 1.0, 10.0).unwrap();
        assert_eq!(v.blocks, vec![RepBlock { beta: 1.0, copies: 1, dimension: 2, nontrivial: true }]);
        let r = builtin("so2-ring").unwrap();
        let v = zero_eigenspace(&r, &Domain::sphere2(), 2.0, 10.0).unwrap();
        assert_eq!(v.blocks, vec![RepBlock { beta: 2.0, copies: 1, dimension: 3, nontrivial: true }]);
        assert!(zero_eigenspace(&s, &Domain::circle(), 2.5, 10.0).unwrap().is_empty());

        let w = negative_eigenspace(&s, &Domain::circle(), 1.5, 10.0).unwrap();
        assert_eq!((w.blocks.len(), w.blocks[0].beta, w.total_dimension), (1, 1.0, 2));
        assert!(negative_eigenspace(&s, &Domain::circle(), 0.5, 10.0).unwrap().is_empty());
        let w = negative_eigenspace(&r, &Domain::sphere2(), 7.0, 20.0).unwrap();
        let dims: Vec<(f64, usize)> = w.blocks.iter().map(|b| (b.beta, b.dimension)).collect();
        assert_eq!(dims, vec![(2.0, 3), (6.0, 5)]);
    }

    #[test]
    fn degree_jump_examples() {
        let s = builtin("pitchfork-scalar").unwrap();
        let c = degree_jump(&s, &Domain::circle(), 1.0, 0.5, 0).unwrap();
        assert!(c.jump);
        assert!(!c.v.is_trivial());
        assert_eq!((c.b_minus, c.b_plus), (1, 1));
        assert_eq!(c.guarantee, Guarantee::SphereGlobal);
        assert!(matches!(degree_jump(&s, &Domain::circle(), 1.0, 1.5, 0), Err(Error::InadmissibleWindow(_))));
        assert!(matches!(degree_jump(&s, &Domain::circle(), 4.0, 3.5, 0), Err(Error::InadmissibleWindow(_))));
        assert!(matches!(degree_jump(&s, &Domain::circle(), 2.5, 0.5, 0), Err(Error::NotALevel(_))));
        let d = builtin("so2-ring-degenerate").unwrap();
        assert!(degree_jump(&d, &Domain::circle(), 1.0, 0.5, 0).is_err());
        let zero = deg_minus_id("G", &c.v);
        assert!(!product_decision(0, 0, &zero, AtomSide::AtomOnPlus));
    }

    #[test]
    fn predict_examples() {
        let s = builtin("pitchfork-scalar").unwrap();
        let p = predict(&s, &Domain::circle(), 10.0, EpsilonPolicy::Auto, 0).unwrap();
        let l: Vec<f64> = p.candidates.iter().map(|c| c.lambda0).collect();
        assert_eq!(l, vec![1.0, 4.0, 9.0]);
        assert!(p.candidates.iter().all(|c| c.jump && c.guarantee == Guarantee::SphereGlobal));

        let p = predict(&s, &Domain::disk(), 10.0, EpsilonPolicy::Auto, 0).unwrap();
        let l: Vec<f64> = p.candidates.iter().map(|c| c.lambda0).collect();
        assert!(close(&l, &[3.3900, 9.3284], 1e-3), "{l:?}");
        assert!(p.candidates.iter().all(|c| matches!(c.guarantee, Guarantee::BallAlternative { .. })));

        let d = builtin("so2-ring-degenerate").unwrap();
        let p = predict(&d, &Domain::circle(), 10.0, EpsilonPolicy::Auto, 0).unwrap();
        assert!(p.candidates.is_empty() && p.note.contains("no bifurcation"));
    }

    #[test]
    fn candidates_serialize() {
        let s = builtin("pitchfork-scalar").unwrap();
        let c = degree_jump(&s, &Domain::circle(), 4.0, 1.0, 0).unwrap();
        let j = serde_json::to_value(&c).unwrap();
        for key in ["lambda0", "witnesses", "V", "b_minus", "b_plus", "jump", "guarantee"] {
            assert!(j.get(key).is_some(), "{key}");
        }
        assert_eq!(j["V"]["dim"], 2);
        assert_eq!(j["guarantee"]["kind"], "sphere-global");
    }
}
