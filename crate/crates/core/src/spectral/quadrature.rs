use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// A point on one of the supported domains, in angular coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DomainPoint {
    /// Unit circle, angle `theta`.
    Circle { theta: f64 },
    /// Unit sphere S^2, colatitude `theta` and longitude `phi`.
    Sphere { theta: f64, phi: f64 },
    /// Unit disk in polar coordinates.
    Disk { r: f64, theta: f64 },
}

impl DomainPoint {
    /// Cartesian embedding in R^2 or R^3.
    pub fn cartesian(&self) -> Vec<f64> {
        match *self {
            DomainPoint::Circle { theta } => vec![theta.cos(), theta.sin()],
            DomainPoint::Sphere { theta, phi } => vec![
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ],
            DomainPoint::Disk { r, theta } => vec![r * theta.cos(), r * theta.sin()],
        }
    }

    /// Inverse of [`DomainPoint::cartesian`] for a point of the same kind.
    pub fn from_cartesian_like(&self, x: &[f64]) -> DomainPoint {
        match self {
            DomainPoint::Circle { .. } => DomainPoint::Circle { theta: x[1].atan2(x[0]) },
            DomainPoint::Sphere { .. } => {
                let rho = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                DomainPoint::Sphere {
                    theta: (x[2] / rho).clamp(-1.0, 1.0).acos(),
                    phi: x[1].atan2(x[0]),
                }
            }
            DomainPoint::Disk { .. } => DomainPoint::Disk {
                r: x[0].hypot(x[1]),
                theta: x[1].atan2(x[0]),
            },
        }
    }
}

/// Nodes and weights of a product quadrature rule.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub points: Vec<DomainPoint>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    /// Trapezoid rule on the circle; exact for trigonometric polynomials of
    /// degree below `m`.
    pub fn circle(m: usize) -> Self {
        let h = 2.0 * PI / m as f64;
        Quadrature {
            points: (0..m).map(|i| DomainPoint::Circle { theta: i as f64 * h }).collect(),
            weights: vec![h; m],
        }
    }

    /// Gauss-Legendre in `cos(theta)` times uniform longitudes on S^2.
    pub fn sphere(n_theta: usize, n_phi: usize) -> Self {
        let (x, w) = gauss_legendre(n_theta);
        let h = 2.0 * PI / n_phi as f64;
        let mut points = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for (xi, wi) in x.iter().zip(&w) {
            let theta = xi.clamp(-1.0, 1.0).acos();
            for j in 0..n_phi {
                points.push(DomainPoint::Sphere { theta, phi: j as f64 * h });
                weights.push(wi * h);
            }
        }
        Quadrature { points, weights }
    }

    /// Gauss-Legendre in `r` (weight `r dr`) times trapezoid in angle on the disk.
    pub fn disk(n_r: usize, n_theta: usize) -> Self {
        let (x, w) = gauss_legendre(n_r);
        let h = 2.0 * PI / n_theta as f64;
        let mut points = Vec::with_capacity(n_r * n_theta);
        let mut weights = Vec::with_capacity(n_r * n_theta);
        for (xi, wi) in x.iter().zip(&w) {
            let r = 0.5 * (xi + 1.0);
            for j in 0..n_theta {
                points.push(DomainPoint::Disk { r, theta: j as f64 * h });
                weights.push(0.5 * wi * r * h);
            }
        }
        Quadrature { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&DomainPoint) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        for deg in 0..=13 {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "deg {deg}");
        }
    }

    #[test]
    fn areas() {
        assert!((Quadrature::circle(16).integrate(|_| 1.0) - 2.0 * PI).abs() < 1e-13);
        assert!((Quadrature::sphere(8, 16).integrate(|_| 1.0) - 4.0 * PI).abs() < 1e-13);
        assert!((Quadrature::disk(8, 16).integrate(|_| 1.0) - PI).abs() < 1e-13);
    }

    #[test]
    fn cartesian_round_trip() {
        let p = DomainPoint::Sphere { theta: 0.7, phi: 2.1 };
        let q = p.from_cartesian_like(&p.cartesian());
        match q {
            DomainPoint::Sphere { theta, phi } => {
                assert!((theta - 0.7).abs() < 1e-14 && (phi - 2.1).abs() < 1e-14)
            }
            _ => unreachable!(),
        }
    }
}
