//! Test-only oracles, kept independent of the library code paths they check.
#![allow(dead_code)]

/// Shooting solve of `C'' = m`, `C(X0) = C'(X0) = 0`, `C(0) = C0` for the unknown depth X0.
///
/// For a trial depth the ODE is integrated backwards from X0 to 0 with RK4 as the
/// first-order system (C, C'); the depth is then bisected on the mismatch `C(0) − C0`.
pub fn shoot_steady_depth(c0: f64, m: f64) -> f64 {
    let surface = |x0: f64| -> f64 {
        let n = 200;
        let h = -x0 / n as f64;
        let (mut c, mut dc) = (0.0f64, 0.0f64);
        let f = |_c: f64, dc: f64| (dc, m);
        for _ in 0..n {
            let (k1c, k1d) = f(c, dc);
            let (k2c, k2d) = f(c + 0.5 * h * k1c, dc + 0.5 * h * k1d);
            let (k3c, k3d) = f(c + 0.5 * h * k2c, dc + 0.5 * h * k2d);
            let (k4c, k4d) = f(c + h * k3c, dc + h * k3d);
            c += h / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
            dc += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        }
        c
    };
    if c0 == 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while surface(hi) < c0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if surface(mid) < c0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Small-time behaviour of the sealed-face concentration, valid while the
/// disturbance from x = 0 has not reached the free boundary.
pub fn small_time_surface(t: f64) -> f64 {
    0.5 - 2.0 * (t / std::f64::consts::PI).sqrt()
}

/// Trapezoid integral over (t, y) pairs.
pub fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}
