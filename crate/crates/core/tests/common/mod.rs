//! Shared test support: an independent volume-quadrature oracle for
//! Dirichlet integrals of homogeneous functions.
//!
//! The library computes ∫_{B₁}∇(r^α f)·∇(r^β g) through exact radial factors
//! and distributional eigen-identities on the sphere. The oracle here shares
//! none of that: it evaluates U(x) = |x|^α f(θ) pointwise from closures,
//! takes centered finite differences in polar coordinates, and integrates
//! with the midpoint rule on a polar product grid. Grid lines are aligned
//! with the equator so the difference stencils never straddle the kinks of
//! the special profiles.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Midpoint cells in the radial and angular directions (n = 1).
const MR: usize = 360;
const MTH: usize = 1024;

/// ∫_{B₁ ⊂ ℝ²} ∇(r^α f(θ)) · ∇(r^β g(θ)) dx by finite differences on a
/// polar midpoint grid.
pub fn volume_dirichlet_2d(
    alpha: f64,
    f: &dyn Fn(f64) -> f64,
    beta: f64,
    g: &dyn Fn(f64) -> f64,
) -> f64 {
    let dr = 1.0 / MR as f64;
    let dth = 2.0 * PI / MTH as f64;
    let hr = dr / 4.0;
    let hth = dth / 4.0;
    let u = |r: f64, th: f64| r.powf(alpha) * f(th);
    let v = |r: f64, th: f64| r.powf(beta) * g(th);
    let mut total = 0.0;
    for i in 0..MR {
        let r = (i as f64 + 0.5) * dr;
        for j in 0..MTH {
            let th = (j as f64 + 0.5) * dth;
            let ur = (u(r + hr, th) - u(r - hr, th)) / (2.0 * hr);
            let ut = (u(r, th + hth) - u(r, th - hth)) / (2.0 * hth * r);
            let vr = (v(r + hr, th) - v(r - hr, th)) / (2.0 * hr);
            let vt = (v(r, th + hth) - v(r, th - hth)) / (2.0 * hth * r);
            total += (ur * vr + ut * vt) * r * dr * dth;
        }
    }
    total
}

/// ∫_{∂B₁ ⊂ ℝ²} f g dθ by a 4096-node trapezoid rule (independent of the
/// library's Gauss rules; exact for smooth periodic integrands).
pub fn boundary_inner_2d(f: &dyn Fn(f64) -> f64, g: &dyn Fn(f64) -> f64) -> f64 {
    let m = 4096;
    let dth = 2.0 * PI / m as f64;
    (0..m)
        .map(|j| {
            let th = (j as f64 + 0.5) * dth;
            f(th) * g(th) * dth
        })
        .sum()
}

/// Weiss energy W_{3/2}(r^α f) by the oracle quadratures alone.
pub fn oracle_weiss_2d(alpha: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    volume_dirichlet_2d(alpha, f, alpha, f) - 1.5 * boundary_inner_2d(f, f)
}

/// ∫_{B₁ ⊂ ℝ³} ∇(r^α f(ϑ, a)) · ∇(r^β g(ϑ, a)) dx on a 3-d polar midpoint
/// grid, again with equator-aligned cells and in-cell difference stencils.
pub fn volume_dirichlet_3d(
    alpha: f64,
    f: &dyn Fn(f64, f64) -> f64,
    beta: f64,
    g: &dyn Fn(f64, f64) -> f64,
) -> f64 {
    let (mr, mp, ma) = (110, 220, 440);
    let dr = 1.0 / mr as f64;
    let dp = PI / mp as f64;
    let da = 2.0 * PI / ma as f64;
    let hr = dr / 4.0;
    let hp = dp / 4.0;
    let ha = da / 4.0;
    let u = |r: f64, p: f64, a: f64| r.powf(alpha) * f(p, a);
    let v = |r: f64, p: f64, a: f64| r.powf(beta) * g(p, a);
    let mut total = 0.0;
    for i in 0..mr {
        let r = (i as f64 + 0.5) * dr;
        for j in 0..mp {
            let p = (j as f64 + 0.5) * dp;
            let sp = p.sin();
            for k in 0..ma {
                let a = (k as f64 + 0.5) * da;
                let ur = (u(r + hr, p, a) - u(r - hr, p, a)) / (2.0 * hr);
                let up = (u(r, p + hp, a) - u(r, p - hp, a)) / (2.0 * hp * r);
                let ua = (u(r, p, a + ha) - u(r, p, a - ha)) / (2.0 * ha * r * sp);
                let vr = (v(r + hr, p, a) - v(r - hr, p, a)) / (2.0 * hr);
                let vp = (v(r, p + hp, a) - v(r, p - hp, a)) / (2.0 * hp * r);
                let va = (v(r, p, a + ha) - v(r, p, a - ha)) / (2.0 * ha * r * sp);
                total += (ur * vr + up * vp + ua * va) * r * r * sp * dr * dp * da;
            }
        }
    }
    total
}

/// Evaluate a band-limited circle trace directly from its coefficients in
/// the convention 1/√(2π), cos(mθ)/√π, sin(mθ)/√π.
pub fn circle_closure(coeffs: Vec<f64>) -> impl Fn(f64) -> f64 {
    move |th: f64| {
        let mut value = coeffs[0] / (2.0 * PI).sqrt();
        let inv = 1.0 / PI.sqrt();
        for m in 1..=(coeffs.len() - 1) / 2 {
            let (s, c) = (m as f64 * th).sin_cos();
            value += coeffs[2 * m - 1] * c * inv;
            if 2 * m < coeffs.len() {
                value += coeffs[2 * m] * s * inv;
            }
        }
        value
    }
}
