//! Spectral Galerkin discretisation of `−Δu = ∇F(u, λ)` on the circle, S² and
//! the disk, with Newton solves, bifurcation detection on the trivial branch,
//! branch switching and pseudo-arclength continuation.

mod solver;
pub mod symmetry;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;
use crate::spectral::{basis_for, BasisFunction, Domain, DomainKind, LaplaceEigenvalue, Quadrature};

pub use solver::{
    continue_branch, detect_bifurcation, newton_solve, switch_branch, trivial_branch, Branch, BranchPoint,
    NewtonOptions, Origin, StepControl, Termination, DEFAULT_AMPLITUDE, RECONNECT_TOL,
};

/// Radial Gauss nodes on the disk.
pub const DISK_RADIAL_NODES: usize = 48;
/// Default disk truncation: all eigenvalues up to this value.
pub const DISK_BETA_MAX: f64 = 60.0;

/// Galerkin truncation of the problem on a fixed domain.
///
/// Coefficients are laid out as `c[b * p + i]` for basis function `b` and
/// potential component `i`; `u = ũ0 + Σ c e`.
#[derive(Debug, Clone)]
pub struct GalerkinProblem {
    pub domain: Domain,
    pub spec: PotentialSpec,
    pub truncation: usize,
    pub eigenvalues: Vec<LaplaceEigenvalue>,
    pub basis: Vec<BasisFunction>,
    pub betas: Vec<f64>,
    pub quadrature: Quadrature,
    /// `e_b(x_q)`, `Q × Nb`.
    values: DMatrix<f64>,
    /// `w_q e_b(x_q)`, `Q × Nb`.
    weighted: DMatrix<f64>,
    /// Value of the constant basis function.
    const_value: f64,
}

/// Default number of distinct eigenvalues kept on `domain`.
pub fn default_truncation(domain: &Domain) -> Result<usize> {
    match (domain.kind, domain.ambient_dim) {
        (DomainKind::Sphere, 2) => Ok(16),
        (DomainKind::Sphere, 3) => Ok(9),
        (DomainKind::Ball, 2) => Ok(domain.spectrum_upto(DISK_BETA_MAX)?.len()),
        _ => Err(Error::Unsupported(format!("continuation on {domain}"))),
    }
}

fn first_eigenvalues(domain: &Domain, n: usize) -> Result<Vec<LaplaceEigenvalue>> {
    let mut cutoff = 16.0;
    loop {
        let s = domain.spectrum_upto(cutoff)?;
        if s.len() > n {
            return Ok(s.into_iter().take(n).collect());
        }
        cutoff *= 2.0;
    }
}

impl GalerkinProblem {
    pub fn new(domain: Domain, spec: PotentialSpec, truncation: usize) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::InvalidArgument("truncation must be at least 1".into()));
        }
        default_truncation(&domain)?;
        let eigenvalues = first_eigenvalues(&domain, truncation)?;
        let mut basis = Vec::new();
        let mut betas = Vec::new();
        for e in &eigenvalues {
            for b in basis_for(domain, e)? {
                basis.push(b);
                betas.push(e.value);
            }
        }
        let lmax = eigenvalues.iter().map(|e| e.angular_degree).max().unwrap_or(0);
        // integrands e·∇F(u) are polynomials of this degree in the angular variables
        let degree = (spec.grad_degree().max(1) as usize + 1) * lmax.max(1);
        let quadrature = match (domain.kind, domain.ambient_dim) {
            (DomainKind::Sphere, 2) => Quadrature::circle(degree + 2),
            (DomainKind::Sphere, 3) => Quadrature::sphere(degree / 2 + 1, degree + 2),
            _ => Quadrature::disk(DISK_RADIAL_NODES, (degree + 2).max(16)),
        };
        let nq = quadrature.len();
        let nb = basis.len();
        let values = DMatrix::from_fn(nq, nb, |q, b| basis[b].eval(&quadrature.points[q]));
        let weighted = DMatrix::from_fn(nq, nb, |q, b| quadrature.weights[q] * values[(q, b)]);
        let const_value = 1.0 / domain.measure().sqrt();
        Ok(GalerkinProblem {
            domain,
            spec,
            truncation,
            eigenvalues,
            basis,
            betas,
            quadrature,
            values,
            weighted,
            const_value,
        })
    }

    pub fn with_default_truncation(domain: Domain, spec: PotentialSpec) -> Result<Self> {
        let n = default_truncation(&domain)?;
        Self::new(domain, spec, n)
    }

    pub fn p(&self) -> usize {
        self.spec.p
    }

    /// Number of basis functions.
    pub fn basis_len(&self) -> usize {
        self.basis.len()
    }

    /// Length of the coefficient vector.
    pub fn dim(&self) -> usize {
        self.spec.p * self.basis.len()
    }

    pub fn beta_max(&self) -> f64 {
        self.betas.iter().copied().fold(0.0, f64::max)
    }

    /// Flat index of coefficient `(b, i)`.
    pub fn index(&self, b: usize, i: usize) -> usize {
        b * self.spec.p + i
    }

    fn check(&self, c: &[f64]) -> Result<()> {
        if c.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "coefficient vector has length {}, layout needs {}",
                c.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub(crate) fn to_matrix(&self, c: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.basis.len(), self.spec.p, c)
    }

    pub(crate) fn to_flat(m: &DMatrix<f64>) -> Vec<f64> {
        m.transpose().as_slice().to_vec()
    }

    /// `u(x_q)` at every quadrature node, `Q × p`.
    pub fn field_at_nodes(&self, c: &[f64]) -> Result<DMatrix<f64>> {
        self.check(c)?;
        let mut u = &self.values * self.to_matrix(c);
        for mut row in u.row_iter_mut() {
            for (x, u0) in row.iter_mut().zip(&self.spec.u0) {
                *x += u0;
            }
        }
        Ok(u)
    }

    fn pointwise(&self, u: &DMatrix<f64>, lambda: f64, f: impl Fn(&[f64], f64, &mut [f64])) -> DMatrix<f64> {
        let p = self.spec.p;
        let mut out = DMatrix::zeros(u.nrows(), p);
        let mut buf = vec![0.0; p];
        let mut g = vec![0.0; p];
        for q in 0..u.nrows() {
            for i in 0..p {
                buf[i] = u[(q, i)];
            }
            f(&buf, lambda, &mut g);
            for i in 0..p {
                out[(q, i)] = g[i];
            }
        }
        out
    }

    /// `β_b c_{b,i} − ∫ ∂_i F(u(x), λ) e_b(x) dx` for every `(b, i)`.
    pub fn assemble_residual(&self, c: &[f64], lambda: f64) -> Result<Vec<f64>> {
        let u = self.field_at_nodes(c)?;
        let g = self.pointwise(&u, lambda, |x, l, out| self.spec.grad_into(x, l, out));
        let mut r = -(self.weighted.transpose() * g);
        for (b, beta) in self.betas.iter().enumerate() {
            for i in 0..self.spec.p {
                r[(b, i)] += beta * c[self.index(b, i)];
            }
        }
        Ok(Self::to_flat(&r))
    }

    /// `∂_λ` of the residual.
    pub fn residual_lambda(&self, c: &[f64], lambda: f64) -> Result<Vec<f64>> {
        let u = self.field_at_nodes(c)?;
        let g = self.pointwise(&u, lambda, |x, l, out| self.spec.grad_lambda_into(x, l, out));
        Ok(Self::to_flat(&-(self.weighted.transpose() * g)))
    }

    /// `β_b δ − ∫ e_b ∇²F(u, λ) e_b' dx`.
    pub fn jacobian(&self, c: &[f64], lambda: f64) -> Result<DMatrix<f64>> {
        let u = self.field_at_nodes(c)?;
        let p = self.spec.p;
        let nb = self.basis.len();
        let nq = u.nrows();
        let mut h = vec![DVector::zeros(nq); p * p];
        let mut buf = vec![0.0; p];
        let mut hq = vec![0.0; p * p];
        for q in 0..nq {
            for i in 0..p {
                buf[i] = u[(q, i)];
            }
            self.spec.hess_into(&buf, lambda, &mut hq);
            for (k, v) in hq.iter().enumerate() {
                h[k][q] = *v;
            }
        }
        let mut j = DMatrix::zeros(p * nb, p * nb);
        for a in 0..p {
            for b in a..p {
                let hv = &h[a * p + b];
                if hv.iter().all(|x| *x == 0.0) {
                    continue;
                }
                let mut scaled = self.values.clone();
                for (q, mut row) in scaled.row_iter_mut().enumerate() {
                    row *= hv[q];
                }
                let m = self.weighted.transpose() * scaled;
                for r in 0..nb {
                    for s in 0..nb {
                        j[(r * p + a, s * p + b)] -= m[(r, s)];
                        if a != b {
                            j[(s * p + b, r * p + a)] -= m[(r, s)];
                        }
                    }
                }
            }
        }
        for (b, beta) in self.betas.iter().enumerate() {
            for i in 0..p {
                j[(b * p + i, b * p + i)] += beta;
            }
        }
        Ok(j)
    }

    /// Discrete functional `½ Σ β c² − ∫ F(u, λ)` whose gradient is the residual.
    pub fn energy(&self, c: &[f64], lambda: f64) -> Result<f64> {
        let u = self.field_at_nodes(c)?;
        let p = self.spec.p;
        let mut quad = 0.0;
        let mut buf = vec![0.0; p];
        for q in 0..u.nrows() {
            for i in 0..p {
                buf[i] = u[(q, i)];
            }
            quad += self.quadrature.weights[q] * self.spec.value(&buf, lambda);
        }
        let lin: f64 = (0..self.basis.len())
            .flat_map(|b| (0..p).map(move |i| (b, i)))
            .map(|(b, i)| 0.5 * self.betas[b] * c[self.index(b, i)].powi(2))
            .sum();
        Ok(lin - quad)
    }

    /// `max_q |u(x_q)|` and `max_q |u(x_q) − u0|`.
    pub fn sup_norms(&self, c: &[f64]) -> Result<(f64, f64)> {
        let u = self.field_at_nodes(c)?;
        let mut full = 0.0_f64;
        let mut dev = 0.0_f64;
        for row in u.row_iter() {
            let n2: f64 = row.iter().map(|x| x * x).sum();
            let d2: f64 = row.iter().zip(&self.spec.u0).map(|(x, y)| (x - y).powi(2)).sum();
            full = full.max(n2.sqrt());
            dev = dev.max(d2.sqrt());
        }
        Ok((full, dev))
    }

    /// Indices of coefficients belonging to nonconstant modes.
    pub fn nonconstant_indices(&self) -> Vec<usize> {
        (0..self.basis.len())
            .filter(|&b| self.betas[b] > 0.0)
            .flat_map(|b| (0..self.spec.p).map(move |i| b * self.spec.p + i))
            .collect()
    }
}
