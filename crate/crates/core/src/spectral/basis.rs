use std::f64::consts::PI;

use super::bessel::bessel_j;
use super::{ball_root, Domain, DomainKind, DomainPoint, LaplaceEigenvalue};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisKind {
    Constant { value: f64 },
    /// `cos(nθ)/√π` or `sin(nθ)/√π` on the circle.
    Fourier { n: usize, sine: bool },
    /// Real orthonormal spherical harmonic; negative `m` selects `sin(|m|φ)`.
    SphericalHarmonic { l: usize, m: i64 },
    /// `norm · J_l(x r) · {cos, sin}(lθ)` on the disk.
    DiskMode { l: usize, x: f64, norm: f64, sine: bool },
}

/// One L²-orthonormal eigenfunction of `-Δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisFunction {
    pub domain: Domain,
    /// Distinct-eigenvalue index `k` (1-based).
    pub index: usize,
    /// Position `j ∈ 1..=m` inside the eigenspace.
    pub component: usize,
    pub kind: BasisKind,
}

impl BasisFunction {
    pub fn eval(&self, p: &DomainPoint) -> f64 {
        match (self.kind, *p) {
            (BasisKind::Constant { value }, _) => value,
            (BasisKind::Fourier { n, sine }, DomainPoint::Circle { theta }) => {
                let a = n as f64 * theta;
                (if sine { a.sin() } else { a.cos() }) / PI.sqrt()
            }
            (BasisKind::SphericalHarmonic { l, m }, DomainPoint::Sphere { theta, phi }) => {
                real_spherical_harmonic(l, m, theta, phi)
            }
            (BasisKind::DiskMode { l, x, norm, sine }, DomainPoint::Disk { r, theta }) => {
                let a = l as f64 * theta;
                norm * bessel_j(l as f64, x * r) * if sine { a.sin() } else { a.cos() }
            }
            (k, p) => panic!("basis function {k:?} evaluated at incompatible point {p:?}"),
        }
    }

    /// Angular frequency of the function under rotations about the pole
    /// (circle/disk angle, or S² longitude), with the sign telling cos/sin.
    pub(crate) fn azimuthal(&self) -> Option<(usize, bool)> {
        match self.kind {
            BasisKind::Constant { .. } => Some((0, false)),
            BasisKind::Fourier { n, sine } => Some((n, sine)),
            BasisKind::DiskMode { l, sine, .. } => Some((l, sine)),
            BasisKind::SphericalHarmonic { m, .. } => Some((m.unsigned_abs() as usize, m < 0)),
        }
    }
}

/// Normalised associated Legendre values `N_lm P_l^m(cos θ)` for `m >= 0`,
/// without the Condon-Shortley phase.
fn normalized_legendre(l: usize, m: usize, theta: f64) -> f64 {
    let x = theta.cos();
    let s = theta.sin();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=m {
        pmm *= ((2 * k + 1) as f64 / (2 * k) as f64).sqrt() * s;
    }
    if l == m {
        return pmm;
    }
    let mut p_prev = pmm;
    let mut p = (2.0 * m as f64 + 3.0).sqrt() * x * pmm;
    for ll in (m + 2)..=l {
        let (lf, mf) = (ll as f64, m as f64);
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
        let next = a * (x * p - b * p_prev);
        p_prev = p;
        p = next;
    }
    p
}

fn real_spherical_harmonic(l: usize, m: i64, theta: f64, phi: f64) -> f64 {
    let am = m.unsigned_abs() as usize;
    let p = normalized_legendre(l, am, theta);
    match m.cmp(&0) {
        std::cmp::Ordering::Equal => p,
        std::cmp::Ordering::Greater => 2f64.sqrt() * p * (am as f64 * phi).cos(),
        std::cmp::Ordering::Less => 2f64.sqrt() * p * (am as f64 * phi).sin(),
    }
}

/// Orthonormal basis of the eigenspace of `e` on `domain`.
pub fn basis_for(domain: Domain, e: &LaplaceEigenvalue) -> Result<Vec<BasisFunction>> {
    let k = e.index;
    let mk = |component: usize, kind: BasisKind| BasisFunction { domain, index: k, component, kind };
    match (domain.kind, domain.ambient_dim) {
        (DomainKind::Sphere, 2) => {
            let n = e.angular_degree;
            if n == 0 {
                Ok(vec![mk(1, BasisKind::Constant { value: 1.0 / (2.0 * PI).sqrt() })])
            } else {
                Ok(vec![
                    mk(1, BasisKind::Fourier { n, sine: false }),
                    mk(2, BasisKind::Fourier { n, sine: true }),
                ])
            }
        }
        (DomainKind::Sphere, 3) => {
            let l = e.angular_degree;
            if l == 0 {
                return Ok(vec![mk(1, BasisKind::Constant { value: 1.0 / (4.0 * PI).sqrt() })]);
            }
            let mut out = vec![mk(1, BasisKind::SphericalHarmonic { l, m: 0 })];
            for m in 1..=l as i64 {
                out.push(mk(out.len() + 1, BasisKind::SphericalHarmonic { l, m }));
                out.push(mk(out.len() + 1, BasisKind::SphericalHarmonic { l, m: -m }));
            }
            Ok(out)
        }
        (DomainKind::Ball, 2) => {
            if e.value == 0.0 {
                return Ok(vec![mk(1, BasisKind::Constant { value: 1.0 / PI.sqrt() })]);
            }
            let l = e.angular_degree;
            let x = ball_root(e);
            let jl = bessel_j(l as f64, x);
            let lf = l as f64;
            let radial = 0.5 * (1.0 - lf * lf / (x * x)) * jl * jl;
            let angular = if l == 0 { 2.0 * PI } else { PI };
            let norm = 1.0 / (angular * radial).sqrt();
            if l == 0 {
                Ok(vec![mk(1, BasisKind::DiskMode { l, x, norm, sine: false })])
            } else {
                Ok(vec![
                    mk(1, BasisKind::DiskMode { l, x, norm, sine: false }),
                    mk(2, BasisKind::DiskMode { l, x, norm, sine: true }),
                ])
            }
        }
        _ => Err(Error::Unsupported(format!("no eigenfunction basis for {domain}"))),
    }
}

/// Orthonormal basis of the `k`-th distinct eigenspace.
pub fn basis(domain: Domain, k: usize) -> Result<Vec<BasisFunction>> {
    if k == 0 {
        return Err(Error::DomainArgument("eigenvalue index is 1-based".into()));
    }
    match (domain.kind, domain.ambient_dim) {
        (DomainKind::Sphere, 2 | 3) | (DomainKind::Ball, 2) => {}
        _ => return Err(Error::Unsupported(format!("no eigenfunction basis for {domain}"))),
    }
    let e = match domain.kind {
        DomainKind::Sphere => super::sphere_spectrum(domain.ambient_dim, k)?.pop().unwrap(),
        DomainKind::Ball => {
            let mut cutoff = 16.0;
            loop {
                let s = super::ball_neumann_spectrum(domain.ambient_dim, cutoff)?;
                if s.len() >= k {
                    break s[k - 1].clone();
                }
                if cutoff > 1e6 {
                    return Err(Error::DomainArgument(format!("eigenvalue index {k} out of range")));
                }
                cutoff *= 2.0;
            }
        }
    };
    basis_for(domain, &e)
}

#[cfg(test)]
mod tests {
    use super::super::{ball_neumann_spectrum, Quadrature};
    use super::*;

    fn gram(fs: &[BasisFunction], q: &Quadrature) -> Vec<Vec<f64>> {
        fs.iter()
            .map(|a| fs.iter().map(|b| q.integrate(|p| a.eval(p) * b.eval(p))).collect())
            .collect()
    }

    fn assert_identity(g: &[Vec<f64>], tol: f64) {
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < tol, "gram[{i}][{j}] = {v}");
            }
        }
    }

    #[test]
    fn circle_k2_is_cos_sin() {
        let b = basis(Domain::circle(), 2).unwrap();
        assert_eq!(b.len(), 2);
        let p = DomainPoint::Circle { theta: 0.3 };
        assert!((b[0].eval(&p) - 0.3f64.cos() / PI.sqrt()).abs() < 1e-15);
        assert!((b[1].eval(&p) - 0.3f64.sin() / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sphere_constant() {
        let b = basis(Domain::sphere2(), 1).unwrap();
        assert_eq!(b.len(), 1);
        let v = b[0].eval(&DomainPoint::Sphere { theta: 1.0, phi: 2.0 });
        assert!((v - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn gram_matrices_are_identity() {
        let q = Quadrature::circle(64);
        let fs: Vec<_> = (1..=10).flat_map(|k| basis(Domain::circle(), k).unwrap()).collect();
        assert_identity(&gram(&fs, &q), 1e-12);

        let q = Quadrature::sphere(24, 48);
        let fs: Vec<_> = (1..=8).flat_map(|k| basis(Domain::sphere2(), k).unwrap()).collect();
        assert_identity(&gram(&fs, &q), 1e-12);

        let q = Quadrature::disk(40, 48);
        let spec = ball_neumann_spectrum(2, 60.0).unwrap();
        let fs: Vec<_> = spec.iter().flat_map(|e| basis_for(Domain::disk(), e).unwrap()).collect();
        assert_identity(&gram(&fs, &q), 1e-10);
    }

    #[test]
    fn circle_second_difference_reproduces_eigenvalue() {
        let h = 1e-3;
        for k in 1..=6 {
            for f in basis(Domain::circle(), k).unwrap() {
                let beta = ((k - 1) * (k - 1)) as f64;
                for &t in &[0.1, 1.3, 4.0] {
                    let at = |t: f64| f.eval(&DomainPoint::Circle { theta: t });
                    let d2 = (at(t + h) - 2.0 * at(t) + at(t - h)) / (h * h);
                    assert!((d2 + beta * at(t)).abs() < 1e-4);
                }
            }
        }
    }

    #[test]
    fn sphere_laplace_beltrami_by_finite_differences() {
        let h = 1e-4;
        for k in 2..=5 {
            let beta = ((k - 1) * k) as f64;
            for f in basis(Domain::sphere2(), k).unwrap() {
                let at = |t: f64, p: f64| f.eval(&DomainPoint::Sphere { theta: t, phi: p });
                let (t, p) = (0.9, 0.4);
                let ft = (at(t + h, p) - at(t - h, p)) / (2.0 * h);
                let ftt = (at(t + h, p) - 2.0 * at(t, p) + at(t - h, p)) / (h * h);
                let fpp = (at(t, p + h) - 2.0 * at(t, p) + at(t, p - h)) / (h * h);
                let lap = ftt + t.cos() / t.sin() * ft + fpp / t.sin().powi(2);
                assert!((lap + beta * at(t, p)).abs() < 1e-5, "k={k}");
            }
        }
    }

    #[test]
    fn disk_modes_are_neumann_eigenfunctions() {
        let h = 1e-4;
        let spec = ball_neumann_spectrum(2, 30.0).unwrap();
        for e in &spec[1..] {
            for f in basis_for(Domain::disk(), e).unwrap() {
                let at = |r: f64, t: f64| f.eval(&DomainPoint::Disk { r, theta: t });
                let (r, t) = (0.6, 0.8);
                let fr = (at(r + h, t) - at(r - h, t)) / (2.0 * h);
                let frr = (at(r + h, t) - 2.0 * at(r, t) + at(r - h, t)) / (h * h);
                let ftt = (at(r, t + h) - 2.0 * at(r, t) + at(r, t - h)) / (h * h);
                let lap = frr + fr / r + ftt / (r * r);
                assert!((lap + e.value * at(r, t)).abs() < 1e-4);
                // zero normal derivative at the boundary
                let dn = (at(1.0, t) - at(1.0 - h, t)) / h;
                assert!(dn.abs() < 1e-3 * (1.0 + e.value));
            }
        }
    }

    #[test]
    fn disk_l1_normalisation_against_quadrature() {
        let spec = ball_neumann_spectrum(2, 4.0).unwrap();
        let e = spec.iter().find(|e| e.angular_degree == 1 && e.radial_index == Some(1)).unwrap();
        let fs = basis_for(Domain::disk(), e).unwrap();
        assert_eq!(fs.len(), 2);
        // Independent radial normalisation: Simpson on int_0^1 J_1(x r)^2 r dr.
        let x = e.value.sqrt();
        let n = 2000;
        let h = 1.0 / n as f64;
        let mut s = 0.0;
        for i in 0..=n {
            let r = i as f64 * h;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * bessel_j(1.0, x * r).powi(2) * r;
        }
        let radial = s * h / 3.0;
        let expect = 1.0 / (PI * radial).sqrt();
        let got = fs[0].eval(&DomainPoint::Disk { r: 0.5, theta: 0.0 }) / bessel_j(1.0, 0.5 * x);
        assert!((got - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn unsupported_domains() {
        assert!(basis(Domain::ball(3).unwrap(), 2).is_err());
        assert!(basis(Domain::sphere(4).unwrap(), 1).is_err());
        assert!(basis(Domain::circle(), 0).is_err());
    }
}
