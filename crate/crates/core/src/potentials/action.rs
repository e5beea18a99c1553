use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Number of group elements sampled by the symmetry checks.
pub const GROUP_SAMPLES: usize = 64;

/// Rotation groups acting on coordinate planes of `R^p`. Planes are 0-based
/// pairs of coordinate indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupKind {
    Trivial,
    So2 { plane: (usize, usize) },
    Cyclic { n: usize, plane: (usize, usize) },
    Product(Vec<GroupKind>),
}

impl GroupKind {
    fn factors(&self) -> Vec<GroupKind> {
        match self {
            GroupKind::Product(fs) => fs.iter().flat_map(|f| f.factors()).collect(),
            GroupKind::Trivial => vec![],
            other => vec![other.clone()],
        }
    }

    /// Parse `trivial`, `so2(i,j)`, `cyclic(n;i,j)` or factors joined by `x`,
    /// with 1-based coordinate indices.
    pub fn parse(src: &str) -> Result<Self> {
        let parts: Vec<&str> = src.split(" x ").map(str::trim).collect();
        if parts.len() > 1 {
            return Ok(GroupKind::Product(parts.iter().map(|s| Self::parse(s)).collect::<Result<_>>()?));
        }
        let s = src.trim().to_ascii_lowercase();
        let bad = || Error::Config(format!("cannot parse group action {src:?}"));
        if s == "trivial" {
            return Ok(GroupKind::Trivial);
        }
        let (head, rest) = s.split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let plane = |text: &str| -> Result<(usize, usize)> {
            let (a, b) = text.split_once(',').ok_or_else(bad)?;
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a == 0 || b == 0 {
                return Err(Error::Config("coordinate indices are 1-based".into()));
            }
            Ok((a - 1, b - 1))
        };
        match head.trim() {
            "so2" => Ok(GroupKind::So2 { plane: plane(args)? }),
            "cyclic" => {
                let (n, pl) = args.split_once(';').ok_or_else(bad)?;
                let n: usize = n.trim().parse().map_err(|_| bad())?;
                Ok(GroupKind::Cyclic { n, plane: plane(pl)? })
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Trivial => write!(f, "trivial"),
            GroupKind::So2 { plane } => write!(f, "so2({},{})", plane.0 + 1, plane.1 + 1),
            GroupKind::Cyclic { n, plane } => write!(f, "cyclic({n};{},{})", plane.0 + 1, plane.1 + 1),
            GroupKind::Product(fs) => {
                if fs.is_empty() {
                    return write!(f, "trivial");
                }
                let s: Vec<String> = fs.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", s.join(" x "))
            }
        }
    }
}

/// Orthogonal action of `Γ` on `R^p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAction {
    pub kind: GroupKind,
    pub p: usize,
}

impl GroupAction {
    pub fn new(kind: GroupKind, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::Config("p must be at least 1".into()));
        }
        let mut used = vec![false; p];
        for f in kind.factors() {
            let (plane, n) = match f {
                GroupKind::So2 { plane } => (plane, None),
                GroupKind::Cyclic { n, plane } => (plane, Some(n)),
                _ => unreachable!(),
            };
            if n == Some(0) {
                return Err(Error::Config("cyclic group order must be positive".into()));
            }
            let (i, j) = plane;
            if i >= p || j >= p || i == j {
                return Err(Error::Config(format!("invalid rotation plane ({},{}) for p = {p}", i + 1, j + 1)));
            }
            if used[i] || used[j] {
                return Err(Error::Config("product factors must act on disjoint planes".into()));
            }
            used[i] = true;
            used[j] = true;
        }
        Ok(GroupAction { kind, p })
    }

    pub fn trivial(p: usize) -> Self {
        GroupAction { kind: GroupKind::Trivial, p }
    }

    pub fn so2(p: usize, plane: (usize, usize)) -> Result<Self> {
        Self::new(GroupKind::So2 { plane }, p)
    }

    /// Dimension `d_Γ` of the group.
    pub fn dimension(&self) -> usize {
        self.kind.factors().iter().filter(|f| matches!(f, GroupKind::So2 { .. })).count()
    }

    fn rotation(&self, plane: (usize, usize), angle: f64) -> DMatrix<f64> {
        let mut m = DMatrix::identity(self.p, self.p);
        let (c, s) = (angle.cos(), angle.sin());
        let (i, j) = plane;
        m[(i, i)] = c;
        m[(j, j)] = c;
        m[(i, j)] = -s;
        m[(j, i)] = s;
        m
    }

    /// Infinitesimal generators of the continuous factors.
    pub fn generators(&self) -> Vec<DMatrix<f64>> {
        self.kind
            .factors()
            .iter()
            .filter_map(|f| match f {
                GroupKind::So2 { plane: (i, j) } => {
                    let mut g = DMatrix::zeros(self.p, self.p);
                    g[(*i, *j)] = -1.0;
                    g[(*j, *i)] = 1.0;
                    Some(g)
                }
                _ => None,
            })
            .collect()
    }

    /// Group element from one parameter per factor: an angle for `SO(2)`, an
    /// integer power of the generating rotation for `Z_n`.
    pub fn element(&self, params: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::identity(self.p, self.p);
        for (f, &t) in self.kind.factors().iter().zip(params) {
            let r = match f {
                GroupKind::So2 { plane } => self.rotation(*plane, t),
                GroupKind::Cyclic { n, plane } => self.rotation(*plane, 2.0 * PI * t.round() / *n as f64),
                _ => unreachable!(),
            };
            m = r * m;
        }
        m
    }

    pub fn factor_count(&self) -> usize {
        self.kind.factors().len()
    }

    /// Deterministic sample of group elements; the first is the identity.
    pub fn sample_elements(&self, count: usize) -> Vec<DMatrix<f64>> {
        let factors = self.kind.factors();
        (0..count)
            .map(|i| {
                let params: Vec<f64> = factors
                    .iter()
                    .enumerate()
                    .map(|(fi, f)| match f {
                        GroupKind::So2 { .. } => 2.0 * PI * ((i * (2 * fi + 1)) % count) as f64 / count as f64,
                        GroupKind::Cyclic { n, .. } => ((i * (fi + 1)) % n) as f64,
                        _ => 0.0,
                    })
                    .collect();
                self.element(&params)
            })
            .collect()
    }

    /// Largest deviation of `gᵀg` from the identity over the sampled elements.
    pub fn orthogonality_defect(&self) -> f64 {
        self.sample_elements(GROUP_SAMPLES)
            .iter()
            .map(|g| (g.transpose() * g - DMatrix::identity(self.p, self.p)).amax())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for GroupAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(GroupAction::trivial(1).dimension(), 0);
        assert_eq!(GroupAction::so2(2, (0, 1)).unwrap().dimension(), 1);
        let prod = GroupKind::Product(vec![
            GroupKind::So2 { plane: (0, 1) },
            GroupKind::Cyclic { n: 3, plane: (2, 3) },
        ]);
        assert_eq!(GroupAction::new(prod, 4).unwrap().dimension(), 1);
    }

    #[test]
    fn samples_are_orthogonal() {
        let prod = GroupKind::Product(vec![GroupKind::So2 { plane: (0, 1) }, GroupKind::So2 { plane: (2, 3) }]);
        let a = GroupAction::new(prod, 5).unwrap();
        assert!(a.orthogonality_defect() < 1e-12);
        assert_eq!(a.sample_elements(4)[0], DMatrix::identity(5, 5));
    }

    #[test]
    fn generator_is_derivative_of_element() {
        let a = GroupAction::so2(3, (0, 2)).unwrap();
        let h = 1e-6;
        let fd = (a.element(&[h]) - a.element(&[-h])) / (2.0 * h);
        assert!((fd - &a.generators()[0]).amax() < 1e-9);
    }

    #[test]
    fn parse_round_trip() {
        for s in ["trivial", "so2(1,2)", "cyclic(4;2,3)", "so2(1,2) x cyclic(3;3,4)"] {
            assert_eq!(GroupKind::parse(s).unwrap().to_string(), s);
        }
        assert!(GroupKind::parse("so2(0,1)").is_err());
        assert!(GroupAction::new(GroupKind::parse("so2(1,2) x so2(2,3)").unwrap(), 3).is_err());
        assert!(GroupAction::new(GroupKind::parse("so2(1,4)").unwrap(), 3).is_err());
    }
}
