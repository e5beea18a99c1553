//! Potentials `F(u, λ)`, their symmetry groups, and the checks of the
//! standing assumptions on `F` near the critical orbit `Γ(u0)`.

pub mod action;
pub mod polynomial;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_rational::Rational64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::brouwer::{self, Region};
use crate::error::{Error, Result};
pub use action::{GroupAction, GroupKind, GROUP_SAMPLES};
pub use polynomial::{CompiledPolynomial, Polynomial};

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const GROUPING_TOL: f64 = 1e-9;
pub const SLICE_HALF_WIDTH: f64 = 0.5;
pub const SLICE_SHRINKS: usize = 6;

/// Polynomial potential with symbolic gradient and Hessian.
#[derive(Debug)]
pub struct PolynomialPotential {
    pub formula: Polynomial,
    value: CompiledPolynomial,
    grad: Vec<CompiledPolynomial>,
    grad_lambda: Vec<CompiledPolynomial>,
    hess: Vec<Vec<CompiledPolynomial>>,
    grad_degree: u32,
}

impl PolynomialPotential {
    pub fn new(formula: Polynomial) -> Self {
        let p = formula.nvars() - 1;
        let grad_polys: Vec<Polynomial> = (0..p).map(|i| formula.derivative(i)).collect();
        let hess = grad_polys
            .iter()
            .map(|g| (0..p).map(|j| g.derivative(j).compile()).collect())
            .collect();
        PolynomialPotential {
            value: formula.compile(),
            grad: grad_polys.iter().map(Polynomial::compile).collect(),
            grad_lambda: grad_polys.iter().map(|g| g.derivative(p).compile()).collect(),
            grad_degree: grad_polys.iter().map(Polynomial::degree_in_u).max().unwrap_or(0),
            hess,
            formula,
        }
    }

    pub fn parse(src: &str, p: usize) -> Result<Self> {
        Ok(Self::new(Polynomial::parse(src, p)?))
    }
}

/// Potential together with the symmetry, the critical point `u0` and `A`.
#[derive(Debug, Clone)]
pub struct PotentialSpec {
    pub name: String,
    pub p: usize,
    pub action: GroupAction,
    pub u0: Vec<f64>,
    pub a: DMatrix<f64>,
    /// Growth exponent `s`; carried along, never used in a computation.
    pub growth_exponent: Option<f64>,
    pub potential: Arc<PolynomialPotential>,
}

impl PotentialSpec {
    pub fn new(
        name: impl Into<String>,
        action: GroupAction,
        u0: Vec<f64>,
        a: DMatrix<f64>,
        formula: &str,
        growth_exponent: Option<f64>,
    ) -> Result<Self> {
        let p = action.p;
        if u0.len() != p {
            return Err(Error::Config(format!("u0 has {} entries, expected p = {p}", u0.len())));
        }
        if a.nrows() != p || a.ncols() != p {
            return Err(Error::Config(format!("A must be {p}x{p}")));
        }
        let asym = (&a - a.transpose()).amax();
        if asym > SYMMETRY_TOL {
            return Err(Error::Asymmetric(asym));
        }
        let potential = PolynomialPotential::parse(formula, p)?;
        Ok(PotentialSpec {
            name: name.into(),
            p,
            action,
            u0,
            a,
            growth_exponent,
            potential: Arc::new(potential),
        })
    }

    pub fn value(&self, u: &[f64], lambda: f64) -> f64 {
        self.potential.value.eval(u, lambda)
    }

    pub fn grad(&self, u: &[f64], lambda: f64) -> Vec<f64> {
        self.potential.grad.iter().map(|g| g.eval(u, lambda)).collect()
    }

    pub fn grad_into(&self, u: &[f64], lambda: f64, out: &mut [f64]) {
        for (o, g) in out.iter_mut().zip(&self.potential.grad) {
            *o = g.eval(u, lambda);
        }
    }

    /// `∂_λ ∇F(u, λ)`.
    pub fn grad_lambda_into(&self, u: &[f64], lambda: f64, out: &mut [f64]) {
        for (o, g) in out.iter_mut().zip(&self.potential.grad_lambda) {
            *o = g.eval(u, lambda);
        }
    }

    /// Total degree of `∇F` in `u`.
    pub fn grad_degree(&self) -> u32 {
        self.potential.grad_degree
    }

    pub fn hess(&self, u: &[f64], lambda: f64) -> DMatrix<f64> {
        DMatrix::from_fn(self.p, self.p, |i, j| self.potential.hess[i][j].eval(u, lambda))
    }

    pub fn hess_into(&self, u: &[f64], lambda: f64, out: &mut [f64]) {
        for i in 0..self.p {
            for j in 0..self.p {
                out[i * self.p + j] = self.potential.hess[i][j].eval(u, lambda);
            }
        }
    }

    pub fn formula(&self) -> String {
        self.potential.formula.to_string()
    }

    /// Copy with `λ` replaced by `cλ` in `F`, so that `A` becomes `cA`.
    pub fn rescaled(&self, c: Rational64) -> Self {
        let formula = self.potential.formula.scale_variable(self.p, c);
        PotentialSpec {
            name: format!("{}*{c}", self.name),
            a: &self.a * c.to_f64().unwrap_or(f64::NAN),
            potential: Arc::new(PolynomialPotential::new(formula)),
            ..self.clone()
        }
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (p = {}, action {}, F = {})", self.name, self.p, self.action, self.formula())
    }
}

pub const BUILTINS: &[&str] = &[
    "pitchfork-scalar",
    "pitchfork-subcritical",
    "pitchfork-degenerate",
    "so2-ring",
    "so2-ring-degenerate",
];

/// Builtin example potentials.
pub fn builtin(name: &str) -> Result<PotentialSpec> {
    let unit = DMatrix::from_element(1, 1, 1.0);
    let ring_a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    let so2 = || GroupAction::so2(2, (0, 1));
    match name {
        "pitchfork-scalar" => {
            PotentialSpec::new(name, GroupAction::trivial(1), vec![0.0], unit, "lambda*u1^2/2 - u1^4/4", Some(4.0))
        }
        "pitchfork-subcritical" => {
            PotentialSpec::new(name, GroupAction::trivial(1), vec![0.0], unit, "lambda*u1^2/2 + u1^4/4", Some(4.0))
        }
        "pitchfork-degenerate" => {
            PotentialSpec::new(name, GroupAction::trivial(1), vec![0.0], unit, "lambda*u1^2/2 - u1^6/6", Some(6.0))
        }
        "so2-ring" => PotentialSpec::new(name, so2()?, vec![1.0, 0.0], ring_a, "lambda*(u1^2 + u2^2 - 1)^2/8", Some(4.0)),
        "so2-ring-degenerate" => PotentialSpec::new(
            name,
            so2()?,
            vec![1.0, 0.0],
            DMatrix::zeros(2, 2),
            "lambda*(u1^2 + u2^2 - 1)^4/16",
            Some(8.0),
        ),
        _ => Err(Error::Config(format!("unknown builtin potential {name:?}; known: {}", BUILTINS.join(", ")))),
    }
}

/// Orthonormal basis of the complement of the orbit tangent space at `u0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalSlice {
    pub basis: Vec<Vec<f64>>,
    pub dimension: usize,
    /// Orthonormalised orbit tangent vectors.
    pub tangents: Vec<Vec<f64>>,
}

impl NormalSlice {
    pub fn matrix(&self, p: usize) -> DMatrix<f64> {
        DMatrix::from_fn(p, self.dimension, |i, j| self.basis[j][i])
    }
}

fn gram_schmidt_push(basis: &mut Vec<DVector<f64>>, mut v: DVector<f64>, tol: f64) -> bool {
    for _ in 0..2 {
        for b in basis.iter() {
            let c = b.dot(&v);
            v -= b * c;
        }
    }
    let n = v.norm();
    if n > tol {
        basis.push(v / n);
        true
    } else {
        false
    }
}

pub fn normal_slice(spec: &PotentialSpec) -> Result<NormalSlice> {
    let u0 = DVector::from_column_slice(&spec.u0);
    let mut tangents = Vec::new();
    for g in spec.action.generators() {
        let t = &g * &u0;
        if t.norm() < 1e-12 {
            return Err(Error::Potential(format!(
                "orbit of u0 = {:?} degenerates along a rotation generator (nontrivial isotropy)",
                spec.u0
            )));
        }
        if !gram_schmidt_push(&mut tangents, t, 1e-10) {
            return Err(Error::Potential("orbit tangent vectors are linearly dependent".into()));
        }
    }
    let mut all = tangents.clone();
    let mut basis = Vec::new();
    for i in 0..spec.p {
        let e = DVector::from_fn(spec.p, |r, _| if r == i { 1.0 } else { 0.0 });
        if gram_schmidt_push(&mut all, e, 1e-8) {
            basis.push(all.last().unwrap().clone());
        }
    }
    let clean = |v: &DVector<f64>| v.iter().map(|&x| if x.abs() < 1e-15 { 0.0 } else { x }).collect::<Vec<_>>();
    Ok(NormalSlice {
        dimension: basis.len(),
        basis: basis.iter().map(clean).collect(),
        tangents: tangents.iter().map(clean).collect(),
    })
}

/// One distinct eigenvalue of a symmetric matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenGroup {
    pub alpha: f64,
    pub multiplicity: usize,
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixSpectrum {
    pub eigenpairs: Vec<EigenGroup>,
    pub slice_restricted: Vec<EigenGroup>,
}

impl MatrixSpectrum {
    pub fn nonzero(&self) -> impl Iterator<Item = &EigenGroup> {
        self.eigenpairs.iter().filter(|g| g.alpha != 0.0)
    }
}

fn grouped_eigen(m: &DMatrix<f64>, lift: Option<&DMatrix<f64>>, tol: f64) -> Vec<EigenGroup> {
    if m.nrows() == 0 {
        return vec![];
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut groups: Vec<(Vec<f64>, Vec<Vec<f64>>)> = Vec::new();
    for idx in order {
        let val = eig.eigenvalues[idx];
        let col = eig.eigenvectors.column(idx).into_owned();
        let v = match lift {
            Some(b) => b * col,
            None => col,
        };
        let v: Vec<f64> = v.iter().copied().collect();
        match groups.last_mut() {
            Some((vals, vecs)) if (val - vals[0]).abs() <= tol * vals[0].abs().max(1.0) => {
                vals.push(val);
                vecs.push(v);
            }
            _ => groups.push((vec![val], vec![v])),
        }
    }
    groups
        .into_iter()
        .map(|(vals, vectors)| {
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let alpha = if mean.abs() <= tol { 0.0 } else { mean };
            EigenGroup { alpha, multiplicity: vectors.len(), vectors }
        })
        .collect()
}

/// Grouped spectrum `σ(A)` with multiplicities `μ_A`, ascending.
pub fn symmetric_spectrum(a: &DMatrix<f64>, tol: f64) -> Result<Vec<EigenGroup>> {
    let asym = (a - a.transpose()).amax();
    if asym > SYMMETRY_TOL {
        return Err(Error::Asymmetric(asym));
    }
    Ok(grouped_eigen(a, None, tol))
}

pub fn matrix_spectrum(a: &DMatrix<f64>, slice: &NormalSlice) -> Result<MatrixSpectrum> {
    matrix_spectrum_with(a, slice, GROUPING_TOL)
}

pub fn matrix_spectrum_with(a: &DMatrix<f64>, slice: &NormalSlice, tol: f64) -> Result<MatrixSpectrum> {
    if !a.is_square() {
        return Err(Error::InvalidArgument("matrix is not square".into()));
    }
    let asym = (a - a.transpose()).amax();
    if asym > SYMMETRY_TOL {
        return Err(Error::Asymmetric(asym));
    }
    let b = slice.matrix(a.nrows());
    let restricted = b.transpose() * a * &b;
    let restricted = (&restricted + restricted.transpose()) * 0.5;
    Ok(MatrixSpectrum {
        eigenpairs: grouped_eigen(a, None, tol),
        slice_restricted: grouped_eigen(&restricted, Some(&b), tol),
    })
}

/// `∇F(·, λ)` restricted to the normal slice, in slice coordinates.
pub fn slice_map<'a>(spec: &'a PotentialSpec, slice: &NormalSlice, lambda: f64) -> impl Fn(&[f64]) -> Vec<f64> + Sync + 'a {
    let basis = slice.basis.clone();
    move |x: &[f64]| {
        let mut u = spec.u0.clone();
        for (xi, b) in x.iter().zip(&basis) {
            for (uk, bk) in u.iter_mut().zip(b) {
                *uk += xi * bk;
            }
        }
        let g = spec.grad(&u, lambda);
        basis.iter().map(|b| b.iter().zip(&g).map(|(x, y)| x * y).sum()).collect()
    }
}

/// Local Brouwer degree of `∇F(·, λ)` on the normal slice at `u0`.
///
/// The box is shrunk from half-width [`SLICE_HALF_WIDTH`] until two successive
/// sizes give the same admissible degree.
pub fn slice_degree(spec: &PotentialSpec, slice: &NormalSlice, lambda: f64, seed: u64) -> Result<i32> {
    if slice.dimension == 0 {
        return Ok(1);
    }
    if slice.dimension > 3 {
        return Err(Error::Unsupported(format!("slice dimension {} > 3", slice.dimension)));
    }
    let f = slice_map(spec, slice, lambda);
    let mut h = SLICE_HALF_WIDTH;
    let mut prev: Option<i32> = None;
    let mut last_err = None;
    for _ in 0..=SLICE_SHRINKS {
        match brouwer::degree(&f, &Region::cube(slice.dimension, h), seed) {
            Ok(d) if prev == Some(d) => return Ok(d),
            Ok(d) => prev = Some(d),
            Err(e) => {
                prev = None;
                last_err = Some(e);
            }
        }
        h /= 2.0;
    }
    Err(Error::Inconclusive(format!(
        "slice degree at lambda = {lambda} did not stabilise{}",
        last_err.map(|e| format!(" ({e})")).unwrap_or_default()
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Pass,
    Fail,
    Undecidable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionEntry {
    pub id: &'static str,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceDegreeSample {
    pub lambda: f64,
    pub degree: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub potential: String,
    pub p: usize,
    pub action: String,
    pub u0: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub entries: Vec<AssumptionEntry>,
    pub slice_degrees: Vec<SliceDegreeSample>,
    pub fitted_growth_exponent: Option<f64>,
    pub seed: u64,
}

impl AssumptionReport {
    pub fn status(&self, id: &str) -> Option<Status> {
        self.entries.iter().find(|e| e.id == id).map(|e| e.status)
    }

    pub fn all_decidable_pass(&self) -> bool {
        self.entries.iter().all(|e| e.status != Status::Fail)
    }
}

fn apply(g: &DMatrix<f64>, u: &[f64]) -> Vec<f64> {
    (g * DVector::from_column_slice(u)).iter().copied().collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Largest `|∇F(γu, λ) − γ∇F(u, λ)|` over random samples.
pub fn equivariance_defect(spec: &PotentialSpec, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nf = spec.action.factor_count();
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let u: Vec<f64> = (0..spec.p).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let lambda = rng.gen_range(-10.0..10.0);
        let params: Vec<f64> = (0..nf).map(|_| rng.gen_range(0.0..64.0)).collect();
        let g = spec.action.element(&params);
        let lhs = spec.grad(&apply(&g, &u), lambda);
        let rhs = apply(&g, &spec.grad(&u, lambda));
        worst = worst.max(dist(&lhs, &rhs));
    }
    worst
}

fn unit_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        0 => vec![],
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * i as f64;
                    let mut v = vec![r * t.cos(), r * t.sin(), z];
                    v.resize(dim, 0.0);
                    v
                })
                .collect()
        }
    }
}

/// Check the standing assumptions on `F` at the sampled `λ`.
pub fn check_assumptions(spec: &PotentialSpec, lambda_samples: &[f64], tol: f64, seed: u64) -> AssumptionReport {
    let mut entries = Vec::new();
    let elements = spec.action.sample_elements(GROUP_SAMPLES);

    // B1: orthogonal action, equivariant gradient
    let orth = spec.action.orthogonality_defect();
    let equiv = equivariance_defect(spec, 100, seed);
    let b1_ok = orth <= SYMMETRY_TOL && equiv <= 1e-9;
    entries.push(AssumptionEntry {
        id: "B1",
        status: if b1_ok { Status::Pass } else { Status::Fail },
        detail: format!(
            "action {} on R^{}: orthogonality defect {orth:.2e} over {GROUP_SAMPLES} elements, gradient equivariance defect {equiv:.2e} over 100 samples",
            spec.action, spec.p
        ),
    });

    // B2: growth of the Hessian, metadata only
    let fitted = fit_growth(spec, lambda_samples);
    entries.push(AssumptionEntry {
        id: "B2",
        status: Status::Undecidable,
        detail: format!(
            "global growth bound not certifiable from samples; fitted exponent s = {}, declared s = {}",
            fitted.map(|s| format!("{s:.3}")).unwrap_or_else(|| "n/a".into()),
            spec.growth_exponent.map(|s| s.to_string()).unwrap_or_else(|| "none".into())
        ),
    });

    // B3: u0 critical and Hess(u0, λ) = λA
    let mut grad_res = 0.0_f64;
    let mut hess_res = 0.0_f64;
    for &l in lambda_samples {
        let g = spec.grad(&spec.u0, l);
        grad_res = grad_res.max(g.iter().fold(0.0, |m, x| m.max(x.abs())));
        hess_res = hess_res.max((spec.hess(&spec.u0, l) - &spec.a * l).amax());
        for gm in &elements {
            let gu = apply(gm, &spec.u0);
            grad_res = grad_res.max(spec.grad(&gu, l).iter().fold(0.0, |m, x| m.max(x.abs())));
        }
    }
    entries.push(AssumptionEntry {
        id: "B3",
        status: if grad_res <= tol && hess_res <= tol { Status::Pass } else { Status::Fail },
        detail: format!("max |grad F| on the orbit {grad_res:.2e}, max |Hess F(u0) - lambda A| {hess_res:.2e}"),
    });

    // B4: free orbit
    let slice = normal_slice(spec);
    let fixing = elements.iter().skip(1).filter(|g| dist(&apply(g, &spec.u0), &spec.u0) < 1e-9).count();
    let b4_ok = fixing == 0 && slice.is_ok();
    entries.push(AssumptionEntry {
        id: "B4",
        status: if b4_ok { Status::Pass } else { Status::Fail },
        detail: match &slice {
            Ok(s) => format!(
                "{fixing} non-identity sampled elements fix u0; normal slice dimension {}",
                s.dimension
            ),
            Err(e) => e.to_string(),
        },
    });

    // B5: isolation, evidence only
    entries.push(AssumptionEntry {
        id: "B5",
        status: Status::Undecidable,
        detail: match &slice {
            Ok(s) => isolation_evidence(spec, s, lambda_samples, &elements),
            Err(_) => "no normal slice".into(),
        },
    });

    // B6: nonzero local degree on the slice
    let mut degrees = Vec::new();
    let b6 = match &slice {
        Ok(s) => {
            let mut status = Status::Pass;
            let mut notes = Vec::new();
            for &l in lambda_samples.iter().filter(|l| **l != 0.0) {
                match slice_degree(spec, s, l, seed) {
                    Ok(d) => {
                        if d == 0 {
                            status = Status::Fail;
                        }
                        degrees.push(SliceDegreeSample { lambda: l, degree: Some(d) });
                    }
                    Err(e) => {
                        if status == Status::Pass {
                            status = Status::Undecidable;
                        }
                        notes.push(format!("lambda = {l}: {e}"));
                        degrees.push(SliceDegreeSample { lambda: l, degree: None });
                    }
                }
            }
            let list: Vec<String> = degrees
                .iter()
                .map(|d| format!("{}: {}", d.lambda, d.degree.map(|x| x.to_string()).unwrap_or("?".into())))
                .collect();
            let mut detail = format!("slice degrees {{{}}}", list.join(", "));
            if !notes.is_empty() {
                detail.push_str(&format!("; {}", notes.join("; ")));
            }
            AssumptionEntry { id: "B6", status, detail }
        }
        Err(e) => AssumptionEntry { id: "B6", status: Status::Fail, detail: e.to_string() },
    };
    entries.push(b6);

    AssumptionReport {
        potential: spec.name.clone(),
        p: spec.p,
        action: spec.action.to_string(),
        u0: spec.u0.clone(),
        a: (0..spec.p).map(|i| spec.a.row(i).iter().copied().collect()).collect(),
        entries,
        slice_degrees: degrees,
        fitted_growth_exponent: fitted,
        seed,
    }
}

/// Log-log slope of `max |Hess F|` at radii up to 1e3, reported as `s`.
fn fit_growth(spec: &PotentialSpec, lambda_samples: &[f64]) -> Option<f64> {
    let lambda = lambda_samples.iter().copied().find(|l| *l != 0.0).unwrap_or(1.0);
    let dirs = unit_directions(spec.p.min(3), 16);
    let radii = [1e2, 1e3];
    let mut peaks = Vec::new();
    for r in radii {
        let mut peak = 0.0_f64;
        for d in &dirs {
            let mut u = vec![0.0; spec.p];
            for (k, x) in d.iter().enumerate() {
                u[k] = r * x;
            }
            peak = peak.max(spec.hess(&u, lambda).norm());
        }
        peaks.push(peak);
    }
    if peaks.iter().any(|p| *p <= 0.0 || !p.is_finite()) {
        return None;
    }
    let slope = (peaks[1] / peaks[0]).ln() / (radii[1] / radii[0]).ln();
    Some(slope + 1.0)
}

fn isolation_evidence(
    spec: &PotentialSpec,
    slice: &NormalSlice,
    lambda_samples: &[f64],
    elements: &[DMatrix<f64>],
) -> String {
    if slice.dimension == 0 {
        return "slice is a point".into();
    }
    let (r_in, r_out) = (0.05, 0.25);
    let dirs = unit_directions(slice.dimension, 100);
    let orbit_samples = if spec.action.factor_count() == 0 { 1 } else { 100 / dirs.len().max(1) + 1 };
    let radii = 10_000 / (dirs.len() * orbit_samples);
    let mut points = 0usize;
    let mut report = Vec::new();
    for &l in lambda_samples.iter().filter(|l| **l != 0.0) {
        let mut min_ratio = f64::INFINITY;
        for gi in 0..orbit_samples {
            let g = &elements[(gi * elements.len()) / orbit_samples];
            for d in &dirs {
                for ri in 0..radii {
                    let rho = r_in + (r_out - r_in) * ri as f64 / (radii - 1).max(1) as f64;
                    let mut x = spec.u0.clone();
                    for (c, b) in d.iter().zip(&slice.basis) {
                        for (xk, bk) in x.iter_mut().zip(b) {
                            *xk += rho * c * bk;
                        }
                    }
                    let u = apply(g, &x);
                    let gn = spec.grad(&u, l).iter().map(|v| v * v).sum::<f64>().sqrt();
                    min_ratio = min_ratio.min(gn / rho);
                    points += 1;
                }
            }
        }
        report.push(format!("{l}: {min_ratio:.2e}"));
    }
    format!(
        "isolation not decidable; min |grad F|/dist on the annulus {r_in}..{r_out} around the orbit ({points} points) per lambda {{{}}}",
        report.join(", ")
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_grad(spec: &PotentialSpec, u: &[f64], l: f64, h: f64) -> Vec<f64> {
        (0..spec.p)
            .map(|i| {
                let mut a = u.to_vec();
                let mut b = u.to_vec();
                a[i] += h;
                b[i] -= h;
                (spec.value(&a, l) - spec.value(&b, l)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn builtin_derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for name in BUILTINS {
            let spec = builtin(name).unwrap();
            for _ in 0..20 {
                let u: Vec<f64> = (0..spec.p).map(|_| rng.gen_range(-1.2..1.2)).collect();
                let l = rng.gen_range(-5.0..5.0);
                let g = spec.grad(&u, l);
                let fd = fd_grad(&spec, &u, l, 1e-5);
                assert!(dist(&g, &fd) < 1e-6, "{name}: grad {g:?} vs {fd:?}");
                let h = spec.hess(&u, l);
                for j in 0..spec.p {
                    let mut a = u.clone();
                    let mut b = u.clone();
                    a[j] += 1e-5;
                    b[j] -= 1e-5;
                    let (ga, gb) = (spec.grad(&a, l), spec.grad(&b, l));
                    for i in 0..spec.p {
                        assert!((h[(i, j)] - (ga[i] - gb[i]) / 2e-5).abs() < 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn builtin_examples() {
        let s = builtin("pitchfork-scalar").unwrap();
        assert_eq!(s.grad(&[0.7], 2.0), vec![2.0 * 0.7 - 0.7f64.powi(3)]);
        assert_eq!(s.hess(&[0.0], 3.5)[(0, 0)], 3.5);
        let r = builtin("so2-ring").unwrap();
        let u = [0.3, -0.8];
        let n2 = 0.09 + 0.64;
        let g = r.grad(&u, 1.7);
        assert!((g[0] - 1.7 * (n2 - 1.0) * 0.3 / 2.0).abs() < 1e-14);
        assert!((g[1] - 1.7 * (n2 - 1.0) * -0.8 / 2.0).abs() < 1e-14);
        assert!((r.hess(&[1.0, 0.0], 2.0) - &r.a * 2.0).amax() < 1e-14);
        assert_eq!(builtin("so2-ring-degenerate").unwrap().a, DMatrix::zeros(2, 2));
        assert!(builtin("nope").unwrap_err().is_config());
    }

    #[test]
    fn equivariance_and_orbit_inclusion() {
        for name in BUILTINS {
            let spec = builtin(name).unwrap();
            assert!(equivariance_defect(&spec, 100, 1) <= 1e-9, "{name}");
            for g in spec.action.sample_elements(GROUP_SAMPLES) {
                let gu = apply(&g, &spec.u0);
                for l in [-2.0, 0.5, 3.0] {
                    assert!(spec.grad(&gu, l).iter().all(|x| x.abs() < 1e-12));
                }
            }
        }
    }

    #[test]
    fn normal_slice_examples() {
        let s = normal_slice(&builtin("pitchfork-scalar").unwrap()).unwrap();
        assert_eq!((s.basis.clone(), s.dimension), (vec![vec![1.0]], 1));
        let s = normal_slice(&builtin("so2-ring").unwrap()).unwrap();
        assert_eq!((s.basis.clone(), s.dimension), (vec![vec![1.0, 0.0]], 1));
        let spec = PotentialSpec::new(
            "r3",
            GroupAction::so2(3, (0, 1)).unwrap(),
            vec![1.0, 0.0, 0.0],
            DMatrix::zeros(3, 3),
            "lambda*(u1^2+u2^2-1)^2 + lambda*u3^2",
            None,
        )
        .unwrap();
        let s = normal_slice(&spec).unwrap();
        assert_eq!(s.basis, vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let t = &s.tangents[0];
        for b in &s.basis {
            assert!(b.iter().zip(t).map(|(x, y)| x * y).sum::<f64>().abs() <= 1e-12);
        }
        let origin = PotentialSpec::new("o", GroupAction::so2(2, (0, 1)).unwrap(), vec![0.0, 0.0], DMatrix::zeros(2, 2), "u1^2", None)
            .unwrap();
        assert!(normal_slice(&origin).is_err());
    }

    #[test]
    fn matrix_spectrum_examples() {
        let full = |p: usize| NormalSlice {
            basis: (0..p).map(|i| (0..p).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect(),
            dimension: p,
            tangents: vec![],
        };
        let pairs = |m: &MatrixSpectrum| m.eigenpairs.iter().map(|g| (g.alpha, g.multiplicity)).collect::<Vec<_>>();
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
        let m = matrix_spectrum(&d, &full(2)).unwrap();
        assert_eq!(pairs(&m), vec![(1.0, 1), (2.0, 1)]);
        let ring = builtin("so2-ring").unwrap();
        let m = matrix_spectrum(&ring.a, &full(2)).unwrap();
        assert_eq!(pairs(&m), vec![(0.0, 1), (1.0, 1)]);
        for g in &m.eigenpairs {
            let v = DVector::from_vec(g.vectors[0].clone());
            assert!((&ring.a * &v - &v * g.alpha).amax() < 1e-10);
        }
        let sl = normal_slice(&ring).unwrap();
        let m = matrix_spectrum(&ring.a, &sl).unwrap();
        assert_eq!(m.slice_restricted.iter().map(|g| (g.alpha, g.multiplicity)).collect::<Vec<_>>(), vec![(1.0, 1)]);
        let m = matrix_spectrum(&DMatrix::zeros(2, 2), &full(2)).unwrap();
        assert_eq!(pairs(&m), vec![(0.0, 2)]);
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(matrix_spectrum(&asym, &full(2)), Err(Error::Asymmetric(_))));
    }

    #[test]
    fn slice_degree_is_local() {
        let s = builtin("pitchfork-scalar").unwrap();
        let sl = normal_slice(&s).unwrap();
        for l in [0.5, 1.5, 4.0, 9.0] {
            assert_eq!(slice_degree(&s, &sl, l, 0).unwrap(), 1);
            assert_eq!(slice_degree(&s, &sl, -l, 0).unwrap(), -1);
        }
        let r = builtin("so2-ring-degenerate").unwrap();
        let sl = normal_slice(&r).unwrap();
        assert_eq!(slice_degree(&r, &sl, 2.0, 0).unwrap(), 1);
        assert_eq!(slice_degree(&r, &sl, -2.0, 0).unwrap(), -1);
    }

    #[test]
    fn assumption_reports() {
        let samples = [-3.0, -0.5, 0.5, 1.5, 4.0];
        let rep = check_assumptions(&builtin("pitchfork-scalar").unwrap(), &samples, 1e-10, 0);
        assert_eq!(rep.status("B3"), Some(Status::Pass));
        assert_eq!(rep.status("B6"), Some(Status::Pass));
        assert_eq!(rep.status("B2"), Some(Status::Undecidable));
        assert_eq!(rep.status("B5"), Some(Status::Undecidable));
        for d in &rep.slice_degrees {
            assert_eq!(d.degree, Some(d.lambda.signum() as i32));
        }
        assert!((rep.fitted_growth_exponent.unwrap() - 3.0).abs() < 0.01);

        let rep = check_assumptions(&builtin("so2-ring").unwrap(), &samples, 1e-10, 0);
        assert_eq!(rep.status("B1"), Some(Status::Pass));
        assert_eq!(rep.status("B4"), Some(Status::Pass));
        assert_eq!(rep.status("B6"), Some(Status::Pass));
        for d in &rep.slice_degrees {
            assert_eq!(d.degree, Some(d.lambda.signum() as i32));
        }

        let shifted = PotentialSpec::new(
            "shifted",
            GroupAction::trivial(1),
            vec![0.0],
            DMatrix::from_element(1, 1, 1.0),
            "lambda*u1^2/2 + u1^2/2 - u1^4/4",
            None,
        )
        .unwrap();
        assert_eq!(check_assumptions(&shifted, &samples, 1e-10, 0).status("B3"), Some(Status::Fail));
    }
}
