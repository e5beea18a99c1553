use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::GalerkinProblem;
use crate::error::{Error, Result};

/// Default branch-switching amplitude.
pub const DEFAULT_AMPLITUDE: f64 = 0.05;
/// Deviation below which a state counts as the trivial solution.
pub const RECONNECT_TOL: f64 = 1e-7;
const SINGULAR_RATIO: f64 = 1e-12;
const ZERO_EIG_TOL: f64 = 1e-12;
const BISECTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: 1e-10, max_iter: 25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepControl {
    pub initial: f64,
    pub min: f64,
    pub max: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { initial: 0.02, min: 1e-4, max: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchPoint {
    pub lambda: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub c: Vec<f64>,
    pub residual_norm: f64,
    /// Smallest `|eigenvalue|` of the Jacobian off the orbit tangents.
    pub min_offsym_singular: f64,
    /// Number of negative Jacobian eigenvalues off the orbit tangents.
    pub offsym_negative: usize,
    /// `max |u(x)|` over quadrature nodes.
    pub sup_norm: f64,
    /// `max |u(x) − u0|` over quadrature nodes.
    pub deviation: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "lambda", rename_all = "kebab-case")]
pub enum Origin {
    Trivial,
    BifurcatedAt(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "reason", content = "lambda", rename_all = "kebab-case")]
pub enum Termination {
    /// Only the seed has been computed.
    Seed,
    LambdaLimit,
    StepUnderflow,
    MaxSteps,
    ReconnectsToTrivial(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub origin: Origin,
    pub points: Vec<BranchPoint>,
    pub termination: Termination,
    /// Names of the continuous symmetry generators pinned by phase conditions.
    pub pinning: Vec<String>,
    /// Kernel direction used to leave the trivial branch.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<Vec<f64>>,
}

impl Branch {
    /// Whether some point is a nontrivial solution.
    pub fn is_nontrivial(&self) -> bool {
        self.points.iter().any(|p| p.deviation > RECONNECT_TOL)
    }

    pub fn max_deviation(&self) -> f64 {
        self.points.iter().map(|p| p.deviation).fold(0.0, f64::max)
    }

    /// `λ, sup_norm, residual_norm, min_offsym_singular` rows.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["lambda", "sup_norm", "residual_norm", "min_offsym_singular"]).map_err(io)?;
        for p in &self.points {
            w.write_record([
                format!("{:.12e}", p.lambda),
                format!("{:.12e}", p.sup_norm),
                format!("{:.6e}", p.residual_norm),
                format!("{:.6e}", p.min_offsym_singular),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self, include_coefficients: bool) -> serde_json::Value {
        let mut b = self.clone();
        if !include_coefficients {
            for p in &mut b.points {
                p.c.clear();
            }
            b.kernel = None;
        }
        serde_json::to_value(b).expect("branch serialises")
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solve `[M B; Cᵀ 0] x = rhs`, failing when the pivots degenerate.
fn solve_bordered(m: &DMatrix<f64>, cols: &[DVector<f64>], rows: &[DVector<f64>], rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let (n, k) = (m.nrows(), cols.len());
    let mut big = DMatrix::zeros(n + k, m.ncols() + k);
    big.view_mut((0, 0), (n, m.ncols())).copy_from(m);
    for (j, col) in cols.iter().enumerate() {
        for i in 0..col.len() {
            big[(i, m.ncols() + j)] = col[i];
        }
    }
    for (j, row) in rows.iter().enumerate() {
        for i in 0..row.len() {
            big[(n + j, i)] = row[i];
        }
    }
    if !big.is_square() {
        return Err(Error::InvalidArgument("bordered system is not square".into()));
    }
    let lu = big.lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].abs()).collect();
    let max = diag.iter().copied().fold(0.0, f64::max);
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > SINGULAR_RATIO * max) {
        return Err(Error::SingularJacobian(format!("pivot ratio {:.2e}", min / max.max(f64::MIN_POSITIVE))));
    }
    lu.solve(rhs).ok_or_else(|| Error::SingularJacobian("LU solve failed".into()))
}

/// Spectrum of `J` restricted to the orthogonal complement of `tangents`.
fn offsym_spectrum(j: &DMatrix<f64>, tangents: &[DVector<f64>]) -> Vec<f64> {
    let n = j.nrows();
    if tangents.is_empty() {
        return SymmetricEigen::new(j.clone()).eigenvalues.iter().copied().collect();
    }
    let mut p = DMatrix::identity(n, n);
    for t in tangents {
        p -= t * t.transpose();
    }
    let pe = SymmetricEigen::new(p);
    let keep: Vec<usize> = (0..n).filter(|&i| pe.eigenvalues[i] > 0.5).collect();
    let q = DMatrix::from_fn(n, keep.len(), |r, c| pe.eigenvectors[(r, keep[c])]);
    let r = q.transpose() * j * &q;
    SymmetricEigen::new((&r + r.transpose()) * 0.5).eigenvalues.iter().copied().collect()
}

fn spectrum_summary(ev: &[f64]) -> (f64, usize) {
    let scale = ev.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let min = ev.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
    let neg = ev.iter().filter(|x| **x < -ZERO_EIG_TOL * scale).count();
    (if min.is_finite() { min } else { 0.0 }, neg)
}

fn make_point(problem: &GalerkinProblem, c: Vec<f64>, lambda: f64, iterations: usize) -> Result<BranchPoint> {
    let r = problem.assemble_residual(&c, lambda)?;
    let j = problem.jacobian(&c, lambda)?;
    let t = problem.pinning_basis(&c)?;
    let (min, neg) = spectrum_summary(&offsym_spectrum(&j, &t));
    let (sup, dev) = problem.sup_norms(&c)?;
    Ok(BranchPoint {
        lambda,
        residual_norm: norm(&r),
        min_offsym_singular: min,
        offsym_negative: neg,
        sup_norm: sup,
        deviation: dev,
        iterations,
        c,
    })
}

/// Newton iteration at fixed `λ`, with one phase condition per continuous
/// symmetry keeping the update orthogonal to the group orbit.
pub fn newton_solve(problem: &GalerkinProblem, c0: &[f64], lambda: f64, opts: NewtonOptions) -> Result<BranchPoint> {
    if c0.iter().any(|x| !x.is_finite()) || !lambda.is_finite() {
        return Err(Error::InvalidArgument("initial guess must be finite".into()));
    }
    let mut c = c0.to_vec();
    for it in 0..=opts.max_iter {
        let r = problem.assemble_residual(&c, lambda)?;
        let rn = norm(&r);
        if it > 0 && rn <= opts.tol {
            return make_point(problem, c, lambda, it);
        }
        if it == opts.max_iter || !rn.is_finite() {
            break;
        }
        let j = problem.jacobian(&c, lambda)?;
        let t = problem.pinning_basis(&c)?;
        let mut rhs = DVector::zeros(c.len() + t.len());
        for (i, v) in r.iter().enumerate() {
            rhs[i] = -v;
        }
        let x = solve_bordered(&j, &t, &t, &rhs)?;
        for (ci, dx) in c.iter_mut().zip(x.iter()) {
            *ci += dx;
        }
    }
    Err(Error::NotConverged(format!("newton at lambda = {lambda} after {} iterations", opts.max_iter)))
}

/// Nonconstant-mode spectrum of the Jacobian on the trivial branch.
fn trivial_spectrum(problem: &GalerkinProblem, lambda: f64) -> Result<Vec<f64>> {
    let j = problem.jacobian(&vec![0.0; problem.dim()], lambda)?;
    let idx = problem.nonconstant_indices();
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| j[(idx[r], idx[c])]);
    Ok(SymmetricEigen::new(sub).eigenvalues.iter().copied().collect())
}

fn negative_count(problem: &GalerkinProblem, lambda: f64) -> Result<usize> {
    Ok(spectrum_summary(&trivial_spectrum(problem, lambda)?).1)
}

/// Levels in `window` where an eigenvalue of the trivial-branch Jacobian
/// (nonconstant modes) crosses zero, refined by bisection.
pub fn detect_bifurcation(problem: &GalerkinProblem, window: (f64, f64), steps: usize) -> Result<Vec<f64>> {
    let (a, b) = window;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid window ({a}, {b})")));
    }
    let steps = steps.max(1);
    let grid: Vec<f64> = (0..=steps).map(|i| a + (b - a) * i as f64 / steps as f64).collect();
    let counts: Vec<usize> = grid.iter().map(|&l| negative_count(problem, l)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for i in 0..steps {
        refine(problem, grid[i], counts[i], grid[i + 1], counts[i + 1], &mut out)?;
    }
    Ok(out)
}

fn refine(problem: &GalerkinProblem, a: f64, na: usize, b: f64, nb: usize, out: &mut Vec<f64>) -> Result<()> {
    if na == nb {
        return Ok(());
    }
    if b - a < BISECTION_TOL {
        out.push(0.5 * (a + b));
        return Ok(());
    }
    let m = 0.5 * (a + b);
    let nm = negative_count(problem, m)?;
    refine(problem, a, na, m, nm, out)?;
    refine(problem, m, nm, b, nb, out)
}

/// The trivial solution `c = 0` at `λ` as a one-point branch.
pub fn trivial_branch(problem: &GalerkinProblem, lambda: f64) -> Result<Branch> {
    let p = newton_solve(problem, &vec![0.0; problem.dim()], lambda, NewtonOptions::default())?;
    Ok(Branch {
        origin: Origin::Trivial,
        points: vec![p],
        termination: Termination::Seed,
        pinning: pinning_names(problem),
        kernel: None,
    })
}

fn pinning_names(problem: &GalerkinProblem) -> Vec<String> {
    let mut names: Vec<String> = match problem.domain.ambient_dim {
        3 => vec!["domain-x".into(), "domain-y".into(), "domain-z".into()],
        _ => vec!["domain".into()],
    };
    for i in 0..problem.spec.action.dimension() {
        names.push(format!("gamma-{}", i + 1));
    }
    names
}

/// Kernel direction of the trivial Jacobian at `λ*`, aligned with the
/// coordinate axis it overlaps most.
fn kernel_direction(problem: &GalerkinProblem, lambda_star: f64) -> Result<DVector<f64>> {
    let j = problem.jacobian(&vec![0.0; problem.dim()], lambda_star)?;
    let idx = problem.nonconstant_indices();
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| j[(idx[r], idx[c])]);
    let eig = SymmetricEigen::new(sub);
    let scale = eig.eigenvalues.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let kernel: Vec<usize> = (0..idx.len()).filter(|&i| eig.eigenvalues[i].abs() <= 1e-6 * scale).collect();
    if kernel.is_empty() {
        return Err(Error::NoBranch(lambda_star));
    }
    let k = DMatrix::from_fn(idx.len(), kernel.len(), |r, c| eig.eigenvectors[(r, kernel[c])]);
    let weights: Vec<f64> = (0..idx.len()).map(|r| k.row(r).norm_squared()).collect();
    let best = (0..idx.len()).fold(0, |b, r| if weights[r] > weights[b] + 1e-12 { r } else { b });
    let proj = &k * k.row(best).transpose();
    let proj = &proj / proj.norm();
    let mut v = DVector::zeros(problem.dim());
    for (r, &i) in idx.iter().enumerate() {
        v[i] = if proj[r].abs() < 1e-14 { 0.0 } else { proj[r] };
    }
    Ok(v)
}

/// Newton on `(c, λ)` for `R(c, λ) = 0` plus one scalar condition
/// `row · (c, λ) = target`, with phase conditions for the symmetries.
fn augmented_newton(
    problem: &GalerkinProblem,
    mut c: Vec<f64>,
    mut lambda: f64,
    row: &DVector<f64>,
    target: f64,
    opts: NewtonOptions,
) -> Result<(Vec<f64>, f64, usize)> {
    let n = problem.dim();
    for it in 0..=opts.max_iter {
        let r = problem.assemble_residual(&c, lambda)?;
        let cond = row.rows(0, n).dot(&DVector::from_column_slice(&c)) + row[n] * lambda - target;
        let rn = norm(&r);
        if it > 0 && rn <= opts.tol && cond.abs() <= opts.tol {
            return Ok((c, lambda, it));
        }
        if it == opts.max_iter || !rn.is_finite() {
            break;
        }
        let j = problem.jacobian(&c, lambda)?;
        let rl = problem.residual_lambda(&c, lambda)?;
        let t = problem.pinning_basis(&c)?;
        let mut m = DMatrix::zeros(n + 1, n + 1);
        m.view_mut((0, 0), (n, n)).copy_from(&j);
        for i in 0..n {
            m[(i, n)] = rl[i];
        }
        for i in 0..=n {
            m[(n, i)] = row[i];
        }
        let cols: Vec<DVector<f64>> = t.iter().map(|v| v.clone().insert_row(n, 0.0)).collect();
        let mut rhs = DVector::zeros(n + 1 + t.len());
        for (i, v) in r.iter().enumerate() {
            rhs[i] = -v;
        }
        rhs[n] = -cond;
        let x = solve_bordered(&m, &cols, &cols, &rhs)?;
        for (ci, dx) in c.iter_mut().zip(x.iter()) {
            *ci += dx;
        }
        lambda += x[n];
        if !lambda.is_finite() {
            break;
        }
    }
    Err(Error::NotConverged(format!("augmented newton near lambda = {lambda}")))
}

/// Leave the trivial branch at `λ*` along the kernel direction with
/// amplitude `ε0`; `λ` is solved for, starting on either side of `λ*`.
pub fn switch_branch(problem: &GalerkinProblem, lambda_star: f64, amplitude: f64) -> Result<Branch> {
    if amplitude == 0.0 || !amplitude.is_finite() {
        return Err(Error::InvalidArgument(format!("switching amplitude must be nonzero, got {amplitude}")));
    }
    let v = kernel_direction(problem, lambda_star)?;
    let n = problem.dim();
    let row = v.clone().insert_row(n, 0.0);
    let offset = 0.01 * lambda_star.abs().max(1.0);
    let c0: Vec<f64> = v.iter().map(|x| amplitude * x).collect();
    for side in [1.0, -1.0] {
        let start = lambda_star + side * offset;
        if let Ok((c, l, it)) = augmented_newton(problem, c0.clone(), start, &row, amplitude, NewtonOptions::default()) {
            let p = make_point(problem, c, l, it)?;
            if p.deviation > RECONNECT_TOL {
                return Ok(Branch {
                    origin: Origin::BifurcatedAt(lambda_star),
                    points: vec![p],
                    termination: Termination::Seed,
                    pinning: pinning_names(problem),
                    kernel: Some(v.iter().copied().collect()),
                });
            }
        }
    }
    Err(Error::NoBranch(lambda_star))
}

/// Unit tangent of the solution curve at `(c, λ)` oriented along `prev`.
fn curve_tangent(problem: &GalerkinProblem, c: &[f64], lambda: f64, prev: &DVector<f64>) -> Result<DVector<f64>> {
    let n = problem.dim();
    let j = problem.jacobian(c, lambda)?;
    let rl = problem.residual_lambda(c, lambda)?;
    let t = problem.pinning_basis(c)?;
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(&j);
    for i in 0..n {
        m[(i, n)] = rl[i];
    }
    for i in 0..=n {
        m[(n, i)] = prev[i];
    }
    let cols: Vec<DVector<f64>> = t.iter().map(|v| v.clone().insert_row(n, 0.0)).collect();
    let mut rhs = DVector::zeros(n + 1 + t.len());
    rhs[n] = 1.0;
    let x = solve_bordered(&m, &cols, &cols, &rhs)?;
    let tau = x.rows(0, n + 1).into_owned();
    Ok(&tau / tau.norm())
}

/// Pseudo-arclength continuation from the last point of `seed`.
pub fn continue_branch(
    problem: &GalerkinProblem,
    seed: &Branch,
    lambda_limits: (f64, f64),
    max_steps: usize,
    control: StepControl,
) -> Result<Branch> {
    let last = seed.points.last().ok_or_else(|| Error::InvalidArgument("empty seed branch".into()))?;
    if !(control.min > 0.0 && control.min <= control.initial && control.initial <= control.max) {
        return Err(Error::InvalidArgument("step control needs 0 < min <= initial <= max".into()));
    }
    let n = problem.dim();
    let (lo, hi) = lambda_limits;
    let state = |p: &BranchPoint| DVector::from_iterator(n + 1, p.c.iter().copied().chain(std::iter::once(p.lambda)));
    let mut x = state(last);
    let prev = if seed.points.len() >= 2 {
        &x - state(&seed.points[seed.points.len() - 2])
    } else {
        match seed.origin {
            Origin::BifurcatedAt(_) if last.deviation > RECONNECT_TOL => {
                let mut d = x.clone();
                d[n] = 0.0;
                d
            }
            _ => {
                let mut d = DVector::zeros(n + 1);
                d[n] = if last.lambda < hi { 1.0 } else { -1.0 };
                d
            }
        }
    };
    let mut tau = curve_tangent(problem, &x.as_slice()[..n], x[n], &(&prev / prev.norm()))?;
    let mut branch = seed.clone();
    let mut h = control.initial;
    let mut steps = 0;
    let opts = NewtonOptions { tol: 1e-10, max_iter: 12 };
    let star = match seed.origin {
        Origin::BifurcatedAt(l) => Some(l),
        Origin::Trivial => None,
    };
    branch.termination = Termination::MaxSteps;
    while steps < max_steps {
        let pred = &x + &tau * h;
        let target = tau.dot(&pred);
        let attempt = augmented_newton(problem, pred.as_slice()[..n].to_vec(), pred[n], &tau, target, opts);
        let (c, l, it) = match attempt {
            Ok(v) => v,
            Err(_) => {
                h /= 2.0;
                if h < control.min {
                    branch.termination = Termination::StepUnderflow;
                    break;
                }
                continue;
            }
        };
        steps += 1;
        let point = make_point(problem, c, l, it)?;
        let new_x = state(&point);
        let new_tau = match curve_tangent(problem, &point.c, point.lambda, &tau) {
            Ok(t) => t,
            Err(_) => {
                let d = &new_x - &x;
                &d / d.norm()
            }
        };
        x = new_x;
        tau = new_tau;
        let dev = point.deviation;
        branch.points.push(point);
        if !(lo..=hi).contains(&l) {
            branch.termination = Termination::LambdaLimit;
            break;
        }
        if let Some(s) = star {
            if dev < RECONNECT_TOL && (l - s).abs() > 1e-3 * s.abs().max(1.0) {
                branch.termination = Termination::ReconnectsToTrivial(l);
                break;
            }
        }
        if it <= 4 {
            h = (h * 1.5).min(control.max);
        }
    }
    Ok(branch)
}
