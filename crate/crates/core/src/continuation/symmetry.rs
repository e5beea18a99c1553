//! Group actions on coefficient vectors: rotations of the domain and the
//! `Γ`-action on the values, `(γ, ρ)·u = γ u(ρ⁻¹ x)`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};

use super::GalerkinProblem;
use crate::error::{Error, Result};
use crate::spectral::{DomainKind, DomainPoint};

fn rot_x(t: f64) -> DMatrix<f64> {
    let (c, s) = (t.cos(), t.sin());
    DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c])
}

fn rot_y(t: f64) -> DMatrix<f64> {
    let (c, s) = (t.cos(), t.sin());
    DMatrix::from_row_slice(3, 3, &[c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c])
}

/// Rotation of R³ about the `z` axis.
pub fn rot_z(t: f64) -> DMatrix<f64> {
    let (c, s) = (t.cos(), t.sin());
    DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0])
}

/// Rotation of R³ by `angle` about the unit vector `axis`.
pub fn axis_rotation(axis: [f64; 3], angle: f64) -> DMatrix<f64> {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let (x, y, z) = (axis[0] / n, axis[1] / n, axis[2] / n);
    let k = DMatrix::from_row_slice(3, 3, &[0.0, -z, y, z, 0.0, -x, -y, x, 0.0]);
    DMatrix::identity(3, 3) + &k * angle.sin() + &k * &k * (1.0 - angle.cos())
}

impl GalerkinProblem {
    /// Pairs `(cos, sin)` of basis functions with azimuthal frequency `n > 0`.
    fn azimuthal_pairs(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (a, fa) in self.basis.iter().enumerate() {
            if let Some((n, false)) = fa.azimuthal() {
                if n == 0 {
                    continue;
                }
                let partner = self.basis.iter().enumerate().position(|(b, fb)| {
                    b != a && fb.index == fa.index && fb.azimuthal() == Some((n, true)) && same_family(fa, fb)
                });
                if let Some(b) = partner {
                    out.push((a, b, n as f64));
                }
            }
        }
        out
    }

    /// Basis-space matrix of the rotation by `t` about the pole
    /// (`θ → θ − t` on the circle and disk, longitude shift on S²).
    pub fn azimuthal_rotation(&self, t: f64) -> DMatrix<f64> {
        let mut d = DMatrix::identity(self.basis_len(), self.basis_len());
        for (a, b, n) in self.azimuthal_pairs() {
            let (c, s) = ((n * t).cos(), (n * t).sin());
            d[(a, a)] = c;
            d[(a, b)] = -s;
            d[(b, a)] = s;
            d[(b, b)] = c;
        }
        d
    }

    fn azimuthal_generator(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.basis_len(), self.basis_len());
        for (a, b, n) in self.azimuthal_pairs() {
            g[(a, b)] = -n;
            g[(b, a)] = n;
        }
        g
    }

    /// Basis-space matrix `D_ab = ∫ e_a(x) e_b(R⁻¹x) dx` of a rotation `R`
    /// of the ambient space.
    pub fn rotation_matrix(&self, r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.domain.ambient_dim;
        if r.nrows() != n || r.ncols() != n {
            return Err(Error::InvalidArgument(format!("rotation must be {n}x{n}")));
        }
        if self.domain.kind != DomainKind::Sphere || n != 3 {
            return Ok(self.azimuthal_rotation(r[(1, 0)].atan2(r[(0, 0)])));
        }
        let rinv = r.transpose();
        let nb = self.basis_len();
        let moved: Vec<DomainPoint> = self
            .quadrature
            .points
            .iter()
            .map(|pt| {
                let x = DVector::from_vec(pt.cartesian());
                let y = &rinv * x;
                pt.from_cartesian_like(y.as_slice())
            })
            .collect();
        let shifted = DMatrix::from_fn(moved.len(), nb, |q, b| self.basis[b].eval(&moved[q]));
        let mut d = self.weighted.transpose() * shifted;
        for a in 0..nb {
            for b in 0..nb {
                if self.basis[a].index != self.basis[b].index {
                    d[(a, b)] = 0.0;
                }
            }
        }
        Ok(d)
    }

    /// Infinitesimal generators of the domain rotations on basis space.
    pub fn domain_generators(&self) -> Result<Vec<DMatrix<f64>>> {
        let gz = self.azimuthal_generator();
        if self.domain.kind == DomainKind::Sphere && self.domain.ambient_dim == 3 {
            // conjugate the z generator onto the x and y axes
            let to_x = self.rotation_matrix(&rot_y(FRAC_PI_2))?;
            let to_y = self.rotation_matrix(&rot_x(-FRAC_PI_2))?;
            let gx = &to_x * &gz * to_x.transpose();
            let gy = &to_y * &gz * to_y.transpose();
            Ok(vec![gx, gy, gz])
        } else {
            Ok(vec![gz])
        }
    }

    /// Apply a basis-space matrix to every component: `C → D C`.
    pub fn apply_domain(&self, d: &DMatrix<f64>, c: &[f64]) -> Result<Vec<f64>> {
        self.check(c)?;
        Ok(Self::to_flat(&(d * self.to_matrix(c))))
    }

    /// Rotate the state by the ambient rotation `r`.
    pub fn rotate_domain(&self, c: &[f64], r: &DMatrix<f64>) -> Result<Vec<f64>> {
        let d = self.rotation_matrix(r)?;
        self.apply_domain(&d, c)
    }

    /// `u → γ u` for `γ ∈ Γ` given as a `p × p` matrix; affine in `c`
    /// because the constant mode absorbs `γ u0 − u0`.
    pub fn act_gamma(&self, c: &[f64], g: &DMatrix<f64>) -> Result<Vec<f64>> {
        self.check(c)?;
        let mut m = self.to_matrix(c) * g.transpose();
        let u0 = DVector::from_column_slice(&self.spec.u0);
        let shift = g * &u0 - &u0;
        self.add_constant(&mut m, &shift);
        Ok(Self::to_flat(&m))
    }

    /// `γ` acting on a residual or tangent vector (linear part only).
    pub fn act_gamma_linear(&self, v: &[f64], g: &DMatrix<f64>) -> Result<Vec<f64>> {
        self.check(v)?;
        Ok(Self::to_flat(&(self.to_matrix(v) * g.transpose())))
    }

    fn add_constant(&self, m: &mut DMatrix<f64>, shift: &DVector<f64>) {
        if let Some(b0) = self.betas.iter().position(|b| *b == 0.0) {
            let scale = 1.0 / self.const_value;
            for i in 0..self.spec.p {
                m[(b0, i)] += shift[i] * scale;
            }
        }
    }

    /// Tangent vectors of the full group orbit through the state `c`,
    /// one per continuous generator (domain first, then `Γ`).
    pub fn symmetry_tangents(&self, c: &[f64]) -> Result<Vec<DVector<f64>>> {
        self.check(c)?;
        let cm = self.to_matrix(c);
        let mut out = Vec::new();
        for g in self.domain_generators()? {
            out.push(DVector::from_vec(Self::to_flat(&(&g * &cm))));
        }
        let u0 = DVector::from_column_slice(&self.spec.u0);
        for g in self.spec.action.generators() {
            let mut m = &cm * g.transpose();
            self.add_constant(&mut m, &(&g * &u0));
            out.push(DVector::from_vec(Self::to_flat(&m)));
        }
        Ok(out)
    }

    /// Orthonormal basis of the nonvanishing orbit tangents at `c`.
    pub fn pinning_basis(&self, c: &[f64]) -> Result<Vec<DVector<f64>>> {
        let mut basis: Vec<DVector<f64>> = Vec::new();
        for t in self.symmetry_tangents(c)? {
            let n0 = t.norm();
            if n0 < 1e-12 {
                continue;
            }
            let mut v = t;
            for _ in 0..2 {
                for b in &basis {
                    let k = b.dot(&v);
                    v -= b * k;
                }
            }
            let n = v.norm();
            if n > 1e-8 * n0 {
                basis.push(v / n);
            }
        }
        Ok(basis)
    }
}

fn same_family(a: &crate::spectral::BasisFunction, b: &crate::spectral::BasisFunction) -> bool {
    use crate::spectral::BasisKind::*;
    match (a.kind, b.kind) {
        (SphericalHarmonic { l: la, .. }, SphericalHarmonic { l: lb, .. }) => la == lb,
        (Fourier { .. }, Fourier { .. }) | (DiskMode { .. }, DiskMode { .. }) => true,
        _ => false,
    }
}
