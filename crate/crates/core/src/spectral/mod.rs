//! Distinct eigenvalues of `-Δ` on round spheres and (Neumann) balls, with
//! multiplicities and L²-orthonormal eigenfunction bases.

pub mod bessel;
pub mod quadrature;

mod basis;

pub use basis::{basis, basis_for, BasisFunction, BasisKind};
pub use quadrature::{DomainPoint, Quadrature};

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Sphere,
    Ball,
}

/// `S^{N-1}` or `B^N`, identified by the ambient dimension `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Domain {
    pub kind: DomainKind,
    #[serde(rename = "dim")]
    pub ambient_dim: usize,
}

impl Domain {
    pub fn sphere(ambient_dim: usize) -> Result<Self> {
        if ambient_dim < 2 {
            return Err(Error::DomainArgument(format!(
                "sphere needs ambient dimension >= 2, got {ambient_dim}"
            )));
        }
        Ok(Domain { kind: DomainKind::Sphere, ambient_dim })
    }

    pub fn ball(ambient_dim: usize) -> Result<Self> {
        if !(2..=3).contains(&ambient_dim) {
            return Err(Error::DomainArgument(format!(
                "ball supported only for N in {{2,3}}, got {ambient_dim}"
            )));
        }
        Ok(Domain { kind: DomainKind::Ball, ambient_dim })
    }

    pub fn circle() -> Self {
        Domain { kind: DomainKind::Sphere, ambient_dim: 2 }
    }

    pub fn sphere2() -> Self {
        Domain { kind: DomainKind::Sphere, ambient_dim: 3 }
    }

    pub fn disk() -> Self {
        Domain { kind: DomainKind::Ball, ambient_dim: 2 }
    }

    pub fn is_sphere(&self) -> bool {
        self.kind == DomainKind::Sphere
    }

    /// Volume (length/area) of the domain; used for the constant mode.
    pub fn measure(&self) -> f64 {
        use std::f64::consts::PI;
        match (self.kind, self.ambient_dim) {
            (DomainKind::Sphere, 2) => 2.0 * PI,
            (DomainKind::Sphere, 3) => 4.0 * PI,
            (DomainKind::Ball, 2) => PI,
            (DomainKind::Ball, 3) => 4.0 * PI / 3.0,
            (DomainKind::Sphere, n) => {
                // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)
                let half = n as f64 / 2.0;
                2.0 * PI.powf(half) / gamma(half)
            }
            (DomainKind::Ball, n) => unreachable!("ball of dimension {n}"),
        }
    }

    /// All distinct eigenvalues `β <= cutoff`.
    pub fn spectrum_upto(&self, cutoff: f64) -> Result<Vec<LaplaceEigenvalue>> {
        match self.kind {
            DomainKind::Ball => ball_neumann_spectrum(self.ambient_dim, cutoff),
            DomainKind::Sphere => {
                if cutoff.is_nan() || cutoff < 0.0 {
                    return Err(Error::DomainArgument(format!("cutoff must be >= 0, got {cutoff}")));
                }
                let n = self.ambient_dim as f64;
                let mut count = 1;
                while {
                    let l = count as f64;
                    l * (l + n - 2.0) <= cutoff
                } {
                    count += 1;
                }
                sphere_spectrum(self.ambient_dim, count)
            }
        }
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            DomainKind::Sphere => write!(f, "S^{}", self.ambient_dim - 1),
            DomainKind::Ball => write!(f, "B^{}", self.ambient_dim),
        }
    }
}

fn gamma(x: f64) -> f64 {
    // half-integers and integers only
    let mut g = if (x - x.round()).abs() < 1e-12 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut t = if (x - x.round()).abs() < 1e-12 { 1.0 } else { 0.5 };
    while t + 0.5 < x {
        g *= t;
        t += 1.0;
    }
    g
}

/// One distinct eigenvalue of `-Δ` with its multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceEigenvalue {
    /// 1-based rank among distinct eigenvalues.
    #[serde(rename = "k")]
    pub index: usize,
    #[serde(rename = "beta", serialize_with = "serialize_12_digits")]
    pub value: f64,
    pub multiplicity: usize,
    /// Degree of the angular harmonic (`k - 1` on the sphere).
    #[serde(rename = "l")]
    pub angular_degree: usize,
    /// Position among the radial roots for fixed `l`; ball only.
    pub radial_index: Option<usize>,
}

impl LaplaceEigenvalue {
    pub fn is_radial(&self) -> bool {
        self.angular_degree == 0
    }
}

fn serialize_12_digits<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig(*x, 12))
}

/// Round to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

fn binomial(n: i64, k: i64) -> u128 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Dimension of the space of degree-`l` spherical harmonics on `S^{n-1}`:
/// `C(n+l-1, l) - C(n+l-3, l-2)`.
pub fn harmonic_dimension(n: usize, l: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::DomainArgument(format!("harmonic_dimension needs N >= 2, got {n}")));
    }
    let (n, l) = (n as i64, l as i64);
    Ok((binomial(n + l - 1, l) - binomial(n + l - 3, l - 2)) as usize)
}

/// The first `count` distinct eigenvalues of the Laplace-Beltrami operator on
/// `S^{n-1}`: `β_k = (k-1)(k-1+n-2)`.
pub fn sphere_spectrum(n: usize, count: usize) -> Result<Vec<LaplaceEigenvalue>> {
    if n < 2 {
        return Err(Error::DomainArgument(format!("sphere needs N >= 2, got {n}")));
    }
    if count == 0 {
        return Err(Error::DomainArgument("count must be positive".into()));
    }
    (1..=count)
        .map(|k| {
            let l = k - 1;
            Ok(LaplaceEigenvalue {
                index: k,
                value: (l * (l + n - 2)) as f64,
                multiplicity: harmonic_dimension(n, l)?,
                angular_degree: l,
                radial_index: None,
            })
        })
        .collect()
}

/// All distinct Neumann eigenvalues `β <= cutoff` of `-Δ` on the unit ball
/// `B^n`, `n ∈ {2, 3}`. Numerically coincident roots from different `l` are
/// kept as separate entries.
pub fn ball_neumann_spectrum(n: usize, cutoff: f64) -> Result<Vec<LaplaceEigenvalue>> {
    if !(2..=3).contains(&n) {
        return Err(Error::DomainArgument(format!("ball supported only for N in {{2,3}}, got {n}")));
    }
    if !(cutoff > 0.0) {
        return Err(Error::DomainArgument(format!("cutoff must be > 0, got {cutoff}")));
    }
    let x_max = cutoff.sqrt();
    let mut out = vec![LaplaceEigenvalue {
        index: 0,
        value: 0.0,
        multiplicity: 1,
        angular_degree: 0,
        radial_index: Some(1),
    }];
    for l in 0.. {
        let roots = bessel::neumann_roots(n, l, x_max);
        if roots.is_empty() && l > 0 {
            // for l >= 1 the first root increases with l
            break;
        }
        let m = harmonic_dimension(n, l)?;
        let offset = if l == 0 { 2 } else { 1 };
        for (i, x) in roots.into_iter().enumerate() {
            let beta = x * x;
            if beta <= cutoff {
                out.push(LaplaceEigenvalue {
                    index: 0,
                    value: beta,
                    multiplicity: m,
                    angular_degree: l,
                    radial_index: Some(i + offset),
                });
            }
        }
    }
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    for (i, e) in out.iter_mut().enumerate() {
        e.index = i + 1;
    }
    Ok(out)
}

/// Root `x` with `β = x²` for a ball eigenvalue.
pub(crate) fn ball_root(e: &LaplaceEigenvalue) -> f64 {
    e.value.sqrt()
}
