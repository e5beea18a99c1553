//! Bessel functions of the first kind for integer and half-integer orders,
//! and the roots of the Neumann condition on the unit ball.
//!
//! Small arguments use the ascending series. Larger arguments use Miller's
//! backward recurrence (integer order) or upward recurrence of the spherical
//! Bessel functions from `sin`/`cos` (half-integer order).

use std::f64::consts::PI;

/// Below this argument the ascending series loses fewer than ~3 digits.
const SERIES_LIMIT: f64 = 10.0;

/// Grid step used to bracket roots.
pub const BRACKET_STEP: f64 = 0.1;

/// Bisection stops once the bracket is narrower than this.
pub const ROOT_TOL: f64 = 1e-12;

fn is_integer(nu: f64) -> bool {
    (nu - nu.round()).abs() < 1e-12
}

fn is_half_integer(nu: f64) -> bool {
    is_integer(nu - 0.5)
}

/// Gamma function restricted to positive integers and half-integers.
fn gamma_int_or_half(z: f64) -> f64 {
    debug_assert!(z > 0.0 && (is_integer(z) || is_half_integer(z)));
    let (mut g, mut t) = if is_integer(z) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while t + 0.5 < z {
        g *= t;
        t += 1.0;
    }
    g
}

fn series(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    let mut term = half.powf(nu) / gamma_int_or_half(nu + 1.0);
    let mut sum = term;
    let q = half * half;
    for k in 1..400 {
        let kf = k as f64;
        term *= -q / (kf * (kf + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Miller backward recurrence for integer orders, normalised by
/// `J_0 + 2 sum J_{2k} = 1`.
fn miller(n: usize, x: f64) -> f64 {
    let start = 2 * ((n.max(x as usize) + 40) / 2);
    let mut next = 0.0_f64;
    let mut cur = 1e-30_f64;
    let mut result = 0.0;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        // `cur` now holds J_{k-1} up to scale
        if k - 1 == n {
            result = cur;
        }
        if k - 1 > 0 && (k - 1) % 2 == 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            result *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += cur;
    result / norm
}

/// Spherical Bessel j_l(x) by upward recurrence; stable when x > l.
fn spherical_upward(l: usize, x: f64) -> f64 {
    let j0 = x.sin() / x;
    if l == 0 {
        return j0;
    }
    let mut prev = j0;
    let mut cur = x.sin() / (x * x) - x.cos() / x;
    for k in 1..l {
        let nxt = (2 * k + 1) as f64 / x * cur - prev;
        prev = cur;
        cur = nxt;
    }
    cur
}

/// J_nu(x) for x >= 0 and nu an integer >= 0 or a half-integer >= -1/2.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    assert!(x >= 0.0, "bessel_j: negative argument");
    assert!(
        (is_integer(nu) && nu > -0.5) || (is_half_integer(nu) && nu > -1.0),
        "bessel_j: order {nu} not supported"
    );
    if x <= SERIES_LIMIT || x < nu + 1.0 {
        return series(nu, x);
    }
    if is_integer(nu) {
        miller(nu.round() as usize, x)
    } else if nu < 0.0 {
        // J_{-1/2}(x) = sqrt(2/(pi x)) cos x
        (2.0 / (PI * x)).sqrt() * x.cos()
    } else {
        let l = (nu - 0.5).round() as usize;
        (2.0 * x / PI).sqrt() * spherical_upward(l, x)
    }
}

/// dJ_nu/dx.
pub fn bessel_j_prime(nu: f64, x: f64) -> f64 {
    if nu == 0.0 {
        return -bessel_j(1.0, x);
    }
    0.5 * (bessel_j(nu - 1.0, x) - bessel_j(nu + 1.0, x))
}

/// Radial Neumann condition on the unit ball `B^n`:
/// `d/dr [ r^{(2-n)/2} J_{l+(n-2)/2}(x r) ]` at `r = 1`.
pub fn neumann_condition(n: usize, l: usize, x: f64) -> f64 {
    let shift = (n as f64 - 2.0) / 2.0;
    let nu = l as f64 + shift;
    -shift * bessel_j(nu, x) + x * bessel_j_prime(nu, x)
}

/// Positive roots of the Neumann condition below `x_max`, bracketed on a
/// grid of [`BRACKET_STEP`] and refined by bisection to [`ROOT_TOL`].
pub fn neumann_roots(n: usize, l: usize, x_max: f64) -> Vec<f64> {
    let f = |x: f64| neumann_condition(n, l, x);
    let mut roots = Vec::new();
    let mut a = BRACKET_STEP;
    let mut fa = f(a);
    while a < x_max {
        let b = a + BRACKET_STEP;
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            roots.push(bisect(&f, a, b, fa));
        }
        a = b;
        fa = fb;
    }
    roots.retain(|&r| r <= x_max);
    roots
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    while b - a > ROOT_TOL {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt, trapezoid on a
    /// periodic integrand.
    fn bessel_integral(n: usize, x: f64) -> f64 {
        let m = 2000;
        let h = PI / m as f64;
        let mut s = 0.0;
        for i in 0..=m {
            let t = i as f64 * h;
            let w = if i == 0 || i == m { 0.5 } else { 1.0 };
            s += w * (n as f64 * t - x * t.sin()).cos();
        }
        s * h / PI
    }

    #[test]
    fn series_and_recurrence_agree_with_integral() {
        for n in 0..6 {
            for &x in &[0.3, 2.0, 7.5, 9.9, 10.1, 14.0, 25.0, 40.0] {
                let a = bessel_j(n as f64, x);
                let b = bessel_integral(n, x);
                assert!((a - b).abs() < 1e-12, "n={n} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn half_integer_orders_match_closed_forms() {
        for &x in &[0.5, 3.0, 9.0, 12.0, 30.0] {
            let j_half = (2.0 / (PI * x)).sqrt() * x.sin();
            assert!((bessel_j(0.5, x) - j_half).abs() < 1e-13);
            let j_3half = (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos());
            assert!((bessel_j(1.5, x) - j_3half).abs() < 1e-13);
        }
    }

    #[test]
    fn known_disk_neumann_roots() {
        let r1 = neumann_roots(2, 1, 10.0);
        assert!((r1[0] - 1.841_183_781_340_66).abs() < 1e-10);
        let r2 = neumann_roots(2, 2, 10.0);
        assert!((r2[0] - 3.054_236_928_227_14).abs() < 1e-10);
        let r0 = neumann_roots(2, 0, 10.0);
        assert!((r0[0] - 3.831_705_970_207_51).abs() < 1e-10);
    }

    #[test]
    fn ball3_roots_match_spherical_bessel() {
        // l = 0: j_0' = -j_1, first zero of j_1 is 4.493409457909064
        let r0 = neumann_roots(3, 0, 6.0);
        assert!((r0[0] - 4.493_409_457_909_064).abs() < 1e-10);
        let r1 = neumann_roots(3, 1, 3.0);
        assert!((r1[0] - 2.081_575_977_818_101).abs() < 1e-9, "{}", r1[0]);
    }

    #[test]
    fn derivative_matches_central_difference() {
        for &nu in &[0.0, 1.0, 2.0, 0.5, 1.5] {
            for &x in &[1.0, 5.0, 11.0, 17.0] {
                let h = 1e-5;
                let fd = (bessel_j(nu, x + h) - bessel_j(nu, x - h)) / (2.0 * h);
                assert!((fd - bessel_j_prime(nu, x)).abs() < 1e-8);
            }
        }
    }
}
