//! Brouwer degree of continuous maps `R^n -> R^n`, `n <= 3`, on boxes and balls.
//!
//! * 1-D: endpoint signs.
//! * 2-D: winding number of the boundary image, with adaptive subdivision
//!   until consecutive image points subtend less than a quarter turn.
//! * n-D: signed count of preimages of a small random regular value, found
//!   by multistart Newton. Three independent values must agree.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default number of boundary samples for the winding-number method.
pub const DEFAULT_BOUNDARY_RESOLUTION: usize = 64;
/// Default multistart grid per axis for [`degree_nd`].
pub const DEFAULT_GRID_RESOLUTION: usize = 9;

const MAX_BOUNDARY_POINTS: usize = 1 << 20;
const REPETITIONS: u64 = 3;

/// Bounded region on which a degree is taken.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Box { center: Vec<f64>, half_width: f64 },
    Ball { center: Vec<f64>, radius: f64 },
}

impl Region {
    pub fn cube(dim: usize, half_width: f64) -> Self {
        Region::Box { center: vec![0.0; dim], half_width }
    }

    pub fn unit_ball(dim: usize) -> Self {
        Region::Ball { center: vec![0.0; dim], radius: 1.0 }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Box { center, .. } | Region::Ball { center, .. } => center.len(),
        }
    }

    fn center(&self) -> &[f64] {
        match self {
            Region::Box { center, .. } | Region::Ball { center, .. } => center,
        }
    }

    fn size(&self) -> f64 {
        match self {
            Region::Box { half_width, .. } => *half_width,
            Region::Ball { radius, .. } => *radius,
        }
    }

    fn contains(&self, x: &[f64], slack: f64) -> bool {
        let c = self.center();
        match self {
            Region::Box { half_width, .. } => {
                x.iter().zip(c).all(|(xi, ci)| (xi - ci).abs() < half_width - slack)
            }
            Region::Ball { radius, .. } => {
                let r2: f64 = x.iter().zip(c).map(|(xi, ci)| (xi - ci).powi(2)).sum();
                r2.sqrt() < radius - slack
            }
        }
    }

    /// Counter-clockwise boundary point for `t ∈ [0, 1)`; 2-D only.
    fn boundary_2d(&self, t: f64) -> [f64; 2] {
        let c = self.center();
        match self {
            Region::Ball { radius, .. } => {
                let a = 2.0 * PI * t;
                [c[0] + radius * a.cos(), c[1] + radius * a.sin()]
            }
            Region::Box { half_width: h, .. } => {
                let s = 4.0 * t.rem_euclid(1.0);
                let side = (s.floor() as usize).min(3);
                let f = 2.0 * (s - side as f64) - 1.0;
                let (x, y) = match side {
                    0 => (f, -1.0),
                    1 => (1.0, f),
                    2 => (-f, 1.0),
                    _ => (-1.0, -f),
                };
                [c[0] + h * x, c[1] + h * y]
            }
        }
    }

    /// Sample points on the boundary, roughly `res` per axis per face.
    fn boundary_samples(&self, res: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        let c = self.center().to_vec();
        let res = res.max(2);
        match self {
            Region::Box { half_width: h, .. } => {
                let ticks: Vec<f64> = (0..res).map(|i| -1.0 + 2.0 * i as f64 / (res - 1) as f64).collect();
                let mut out = Vec::new();
                for axis in 0..n {
                    for side in [-1.0, 1.0] {
                        let others = n - 1;
                        let count = res.pow(others as u32);
                        for idx in 0..count {
                            let mut x = c.clone();
                            x[axis] += side * h;
                            let mut rem = idx;
                            for d in (0..n).filter(|&d| d != axis) {
                                x[d] += h * ticks[rem % res];
                                rem /= res;
                            }
                            out.push(x);
                        }
                    }
                }
                out
            }
            Region::Ball { radius, .. } => match n {
                1 => vec![vec![c[0] - radius], vec![c[0] + radius]],
                2 => (0..4 * res)
                    .map(|i| {
                        let a = 2.0 * PI * i as f64 / (4 * res) as f64;
                        vec![c[0] + radius * a.cos(), c[1] + radius * a.sin()]
                    })
                    .collect(),
                _ => {
                    let mut out = Vec::new();
                    for i in 0..=res {
                        let th = PI * i as f64 / res as f64;
                        for j in 0..2 * res {
                            let ph = PI * j as f64 / res as f64;
                            out.push(vec![
                                c[0] + radius * th.sin() * ph.cos(),
                                c[1] + radius * th.sin() * ph.sin(),
                                c[2] + radius * th.cos(),
                            ]);
                        }
                    }
                    out
                }
            },
        }
    }

    /// Multistart grid of interior points.
    fn interior_grid(&self, res: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        let c = self.center();
        let h = self.size();
        let ticks: Vec<f64> = (0..res).map(|i| -1.0 + (2.0 * i as f64 + 1.0) / res as f64).collect();
        let mut out = Vec::new();
        for idx in 0..res.pow(n as u32) {
            let mut rem = idx;
            let x: Vec<f64> = (0..n)
                .map(|d| {
                    let t = ticks[rem % res];
                    rem /= res;
                    c[d] + h * t
                })
                .collect();
            if self.contains(&x, 0.0) {
                out.push(x);
            }
        }
        out
    }
}

fn sign(x: f64) -> i32 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Degree of `f` on `[a, b]`: `(sign f(b) - sign f(a)) / 2`.
pub fn degree_1d(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<i32> {
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("empty interval [{a}, {b}]")));
    }
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 || fb == 0.0 || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::Admissibility(format!(
            "f vanishes at an endpoint: f({a}) = {fa}, f({b}) = {fb}"
        )));
    }
    Ok((sign(fb) - sign(fa)) / 2)
}

/// Winding number of `f` along the positively oriented boundary of a 2-D region.
pub fn degree_2d(f: impl Fn(&[f64]) -> Vec<f64>, region: &Region) -> Result<i32> {
    degree_2d_with(f, region, DEFAULT_BOUNDARY_RESOLUTION)
}

pub fn degree_2d_with(
    f: impl Fn(&[f64]) -> Vec<f64>,
    region: &Region,
    boundary_resolution: usize,
) -> Result<i32> {
    if region.dim() != 2 {
        return Err(Error::InvalidArgument("degree_2d needs a 2-D region".into()));
    }
    let image = |t: f64| -> Result<[f64; 2]> {
        let x = region.boundary_2d(t);
        let w = f(&x);
        if w.len() != 2 || !w[0].is_finite() || !w[1].is_finite() {
            return Err(Error::InvalidArgument("map must return two finite values".into()));
        }
        if w[0] == 0.0 && w[1] == 0.0 {
            return Err(Error::Admissibility(format!("f vanishes on the boundary at {x:?}")));
        }
        Ok([w[0], w[1]])
    };
    let n0 = boundary_resolution.max(8);
    // Stack of pending segments (t0, w0, t1, w1); processed left to right.
    let mut pending: Vec<(f64, [f64; 2], f64, [f64; 2])> = Vec::new();
    let mut prev_t = 0.0;
    let mut prev_w = image(0.0)?;
    let first_w = prev_w;
    for i in 1..=n0 {
        let t = i as f64 / n0 as f64;
        let w = if i == n0 { first_w } else { image(t)? };
        pending.push((prev_t, prev_w, t, w));
        prev_t = t;
        prev_w = w;
    }
    pending.reverse();
    let mut total = 0.0;
    let mut evaluations = n0;
    while let Some((t0, w0, t1, w1)) = pending.pop() {
        let cross = w0[0] * w1[1] - w0[1] * w1[0];
        let dot = w0[0] * w1[0] + w0[1] * w1[1];
        let angle = cross.atan2(dot);
        if angle.abs() < PI / 2.0 {
            total += angle;
            continue;
        }
        if t1 - t0 < 1e-13 || evaluations > MAX_BOUNDARY_POINTS {
            return Err(Error::Inconclusive(
                "boundary image angle condition not certified after refinement".into(),
            ));
        }
        let tm = 0.5 * (t0 + t1);
        let wm = image(tm)?;
        evaluations += 1;
        pending.push((tm, wm, t1, w1));
        pending.push((t0, w0, tm, wm));
    }
    let turns = total / (2.0 * PI);
    let d = turns.round();
    if (turns - d).abs() > 1e-6 {
        return Err(Error::Inconclusive(format!("non-integral winding {turns}")));
    }
    Ok(d as i32)
}

fn jacobian_fd(f: &impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> DMatrix<f64> {
    let n = x.len();
    let mut j = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for c in 0..n {
        let orig = xp[c];
        xp[c] = orig + h;
        let fp = f(&xp);
        xp[c] = orig - h;
        let fm = f(&xp);
        xp[c] = orig;
        for r in 0..n {
            j[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    j
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Degree via signed preimage count of a random regular value near 0.
pub fn degree_nd(
    f: impl Fn(&[f64]) -> Vec<f64> + Sync,
    region: &Region,
    grid_resolution: usize,
    seed: u64,
) -> Result<i32> {
    let n = region.dim();
    if !(1..=3).contains(&n) {
        return Err(Error::Unsupported(format!("degree in dimension {n} (only 1..=3)")));
    }
    let samples = region.boundary_samples(4 * grid_resolution.max(4));
    let mut min_b = f64::INFINITY;
    let mut max_b = 0.0_f64;
    for x in &samples {
        let v = norm(&f(x));
        min_b = min_b.min(v);
        max_b = max_b.max(v);
    }
    if !(min_b > 1e-12 * max_b.max(1e-300)) {
        return Err(Error::Admissibility(format!("|f| = {min_b:.3e} on the sampled boundary")));
    }
    let scale = region.size();
    let fd_step = 1e-6 * scale;
    let starts = region.interior_grid(grid_resolution.max(2));

    let mut results = Vec::new();
    for rep in 0..REPETITIONS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9).wrapping_add(rep));
        let mut y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ny = norm(&y).max(1e-3);
        let mag = 0.01 * min_b * rng.gen_range(0.5..1.0);
        y.iter_mut().for_each(|v| *v *= mag / ny);

        let g = |x: &[f64]| -> Vec<f64> { f(x).iter().zip(&y).map(|(a, b)| a - b).collect() };
        let tol = 1e-11 * max_b.max(1.0);
        let mut roots: Vec<Vec<f64>> = Vec::new();
        for x0 in &starts {
            if let Some(r) = newton_root(&g, x0, fd_step, tol, 60) {
                if region.contains(&r, 0.0)
                    && !roots.iter().any(|q| norm(&sub(q, &r)) < 1e-7 * scale)
                {
                    roots.push(r);
                }
            }
        }
        let mut total = 0;
        for r in &roots {
            let jac = jacobian_fd(&g, r, fd_step);
            let sv = jac.clone().svd(false, false).singular_values;
            let smax = sv.max();
            let smin = sv.min();
            if !(smin > 1e-8 * smax.max(1e-300)) {
                return Err(Error::Inconclusive(format!(
                    "ill-conditioned jacobian at preimage {r:?} (cond > 1e8)"
                )));
            }
            total += sign(jac.determinant());
        }
        results.push(total);
    }
    if results.iter().any(|&d| d != results[0]) {
        return Err(Error::Inconclusive(format!("regular-value repetitions disagree: {results:?}")));
    }
    Ok(results[0])
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn newton_root(
    g: &impl Fn(&[f64]) -> Vec<f64>,
    x0: &[f64],
    h: f64,
    tol: f64,
    max_iter: usize,
) -> Option<Vec<f64>> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut gx = g(&x);
    let mut r = norm(&gx);
    for _ in 0..max_iter {
        if r < tol {
            return Some(x);
        }
        let jac = jacobian_fd(g, &x, h);
        let rhs = nalgebra::DVector::from_iterator(n, gx.iter().map(|v| -v));
        let step = jac.lu().solve(&rhs)?;
        // backtracking on |g|
        let mut t = 1.0;
        loop {
            let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            let gn = g(&xn);
            let rn = norm(&gn);
            if rn < r || t < 1e-4 {
                x = xn;
                gx = gn;
                r = rn;
                break;
            }
            t *= 0.5;
        }
        if !x.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    (r < tol).then_some(x)
}

/// Degree of `f` on `region`, dispatching on dimension.
pub fn degree(f: impl Fn(&[f64]) -> Vec<f64> + Sync, region: &Region, seed: u64) -> Result<i32> {
    match region.dim() {
        1 => {
            let c = region.center()[0];
            let h = region.size();
            degree_1d(|x| f(&[x])[0], c - h, c + h)
        }
        2 => degree_2d(f, region),
        3 => degree_nd(f, region, DEFAULT_GRID_RESOLUTION, seed),
        n => Err(Error::Unsupported(format!("degree in dimension {n} (only 1..=3)"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_examples() {
        assert_eq!(degree_1d(|x| x, -1.0, 1.0).unwrap(), 1);
        assert_eq!(degree_1d(|x| 0.5 * x - x.powi(3), -2.0, 2.0).unwrap(), -1);
        assert_eq!(degree_1d(|x| x * x, -1.0, 2.0).unwrap(), 0);
        assert!(matches!(degree_1d(|x| x, 0.0, 1.0), Err(Error::Admissibility(_))));
    }

    #[test]
    fn two_dimensional_examples() {
        let disk = Region::unit_ball(2);
        assert_eq!(degree_2d(|x| x.to_vec(), &disk).unwrap(), 1);
        let z2 = |x: &[f64]| vec![x[0] * x[0] - x[1] * x[1], 2.0 * x[0] * x[1]];
        assert_eq!(degree_2d(z2, &disk).unwrap(), 2);
        assert_eq!(degree_2d(|x| vec![-x[0], -x[1]], &disk).unwrap(), 1);
        let conj = |x: &[f64]| vec![x[0], -x[1]];
        assert_eq!(degree_2d(conj, &Region::cube(2, 1.0)).unwrap(), -1);
    }

    #[test]
    fn two_dimensional_boundary_zero_is_rejected() {
        let r = Region::cube(2, 1.0);
        let f = |x: &[f64]| vec![x[0] - 1.0, x[1]];
        assert!(matches!(degree_2d(f, &r), Err(Error::Admissibility(_))));
    }

    #[test]
    fn three_dimensional_examples() {
        let cube = Region::cube(3, 1.0);
        assert_eq!(degree_nd(|x| x.to_vec(), &cube, 5, 0).unwrap(), 1);
        assert_eq!(degree_nd(|x| x.iter().map(|v| -v).collect(), &cube, 5, 0).unwrap(), -1);
        let pitch = |x: &[f64]| vec![x[0] - x[0].powi(3), x[1], x[2]];
        assert_eq!(degree_nd(pitch, &Region::cube(3, 2.0), 9, 0).unwrap(), -1);
    }

    #[test]
    fn nd_rejects_dimension_four() {
        let r = Region::cube(4, 1.0);
        assert!(matches!(degree_nd(|x| x.to_vec(), &r, 3, 0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn nd_agrees_with_1d() {
        let r = Region::cube(1, 2.0);
        let f = |x: &[f64]| vec![0.5 * x[0] - x[0].powi(3)];
        assert_eq!(degree_nd(f, &r, 20, 3).unwrap(), -1);
    }
}
