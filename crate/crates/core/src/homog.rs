//! Homogeneous extensions r^α c(θ), their Weiss energies, and the special
//! profiles h_e and u₀ of the thin obstacle problem.
//!
//! For a λ-homogeneous function w = r^λ c(θ),
//!
//! ```text
//! ∫_{B₁} |∇w|² dx = (λ²⟨c,c⟩ + ⟨∇_θc,∇_θc⟩) / (n + 2λ - 1),
//! ```
//!
//! so every volume integral in the Weiss energy
//! W_λ(u) = ∫_{B₁}|∇u|² - λ∫_{∂B₁}u² reduces to sphere forms with an exact
//! radial factor. Radial integrals are never done numerically here; the
//! 1/(α+β+n-1) factor is used as-is, which removes a discretisation axis.
//!
//! The two special profiles:
//!
//! - `h_e(θ) = Re((x'·e + i|x_{n+1}|)^{3/2})` restricted to the sphere, the
//!   3/2-homogeneous solution profile. It satisfies
//!   -Δ_S h_e = λ(3/2) h_e + 3|θ'·e|^{1/2} H^{n-1}|_{ring ∩ {θ'·e ≤ 0}},
//!   and the contact measure is supported where h_e vanishes, which gives
//!   W_{3/2}(r^{3/2}h_e) = 0 identically.
//! - `u₀(θ) = |θ_{n+1}|`, whose 1-homogeneous extension is |x_{n+1}|;
//!   -Δ_S u₀ = λ(1) u₀ - 2 H^{n-1}|_{ring}.
//!
//! Dirichlet pairings against these profiles go through the distributional
//! identities above (see [`crate::spharm::sphere_dirichlet`]), so the energy
//! ledgers downstream close to rounding error instead of quadrature error.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::spharm::{
    self, lambda_of, sphere_dirichlet, sphere_inner, EigenBasis, SpecialTables, Trace, TraceKind,
};
use crate::{Error, Result};

/// A single homogeneous block r^α · trace(θ).
#[derive(Debug, Clone)]
pub struct HomogeneousFn {
    pub alpha: f64,
    pub trace: Trace,
}

impl HomogeneousFn {
    pub fn new(alpha: f64, trace: Trace) -> Self {
        HomogeneousFn { alpha, trace }
    }
}

/// Finite sum of homogeneous blocks Σ r^{α_i} c_i(θ).
#[derive(Debug, Clone, Default)]
pub struct PiecewiseHomogeneousFn {
    pub terms: Vec<HomogeneousFn>,
}

impl PiecewiseHomogeneousFn {
    pub fn single(alpha: f64, trace: Trace) -> Self {
        PiecewiseHomogeneousFn {
            terms: vec![HomogeneousFn::new(alpha, trace)],
        }
    }

    /// Restriction to ∂B₁: the sum of the traces.
    pub fn boundary_trace(&self) -> Trace {
        let parts: Vec<(f64, &Trace)> = self.terms.iter().map(|t| (1.0, &t.trace)).collect();
        Trace::combination(&parts)
    }

    pub fn scaled(&self, s: f64) -> Self {
        PiecewiseHomogeneousFn {
            terms: self
                .terms
                .iter()
                .map(|t| HomogeneousFn::new(t.alpha, t.trace.scaled(s)))
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Special profiles
// ---------------------------------------------------------------------------

/// Re(ξ^{3/2}) for ξ = s + i w in the closed upper half plane, with the zero
/// set {w = 0, s ≤ 0} exact.
pub fn half_plane_profile_value(s: f64, w: f64) -> f64 {
    if w == 0.0 && s <= 0.0 {
        return 0.0;
    }
    let rho = (s * s + w * w).sqrt();
    let phi = w.atan2(s);
    rho.powf(1.5) * (1.5 * phi).cos()
}

/// Trace of h_e on the sphere for a unit vector e in the equatorial plane.
///
/// For n = 1 and e = +x₁ this is cos(3θ/2) on [0, π], evenly reflected;
/// it vanishes on the equatorial half {x'·e ≤ 0}.
pub fn he_trace(e: &[f64], basis: &Arc<EigenBasis>) -> Result<Trace> {
    let n = basis.ambient_n;
    if e.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "direction has {} components for ambient n = {n}",
            e.len()
        )));
    }
    let norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitDirection(norm));
    }
    let e_az = match n {
        1 => {
            if e[0] > 0.0 {
                0.0
            } else {
                PI
            }
        }
        _ => e[1].atan2(e[0]),
    };
    Ok(he_trace_az(e_az, basis))
}

/// Same as [`he_trace`], direction given by its azimuth in the equator plane.
pub fn he_trace_az(e_az: f64, basis: &Arc<EigenBasis>) -> Trace {
    let ring = Arc::new(move |az: f64| {
        let s = (az - e_az).cos();
        if s <= 0.0 {
            0.0
        } else {
            s.powf(1.5)
        }
    });
    Trace::from_closure(
        basis,
        move |n, angles| match n {
            1 => {
                let s = (angles[0] - e_az).cos();
                let w = angles[0].sin().abs();
                half_plane_profile_value(s, w)
            }
            _ => {
                let s = angles[0].sin() * (angles[1] - e_az).cos();
                let w = angles[0].cos().abs();
                half_plane_profile_value(s, w)
            }
        },
        ring,
        TraceKind::HalfPlaneProfile {
            e_az,
            amplitude: 1.0,
        },
    )
}

/// Trace of u₀(θ) = |θ_{n+1}|: vanishes on the equator, equals 1 at the poles,
/// and is orthogonal to every degree-1 mode.
pub fn u0_trace(basis: &Arc<EigenBasis>) -> Trace {
    Trace::from_closure(
        basis,
        |n, angles| match n {
            1 => angles[0].sin().abs(),
            _ => angles[0].cos().abs(),
        },
        Arc::new(|_| 0.0),
        TraceKind::EquatorDistance { amplitude: 1.0 },
    )
}

/// Inner products against the special profiles, cached per basis.
pub(crate) fn special_tables(basis: &Arc<EigenBasis>) -> &SpecialTables {
    if basis.special.get().is_none() {
        let u0 = u0_trace(basis);
        let tables = SpecialTables {
            u0_mean: u0.coefficients()[basis.const_index()],
        };
        let _ = basis.special.set(tables);
    }
    basis.special.get().unwrap()
}

// ---------------------------------------------------------------------------
// Energies
// ---------------------------------------------------------------------------

/// ∫_{B₁} ∇(r^α f) · ∇(r^β g) dx = (αβ⟨f,g⟩ + ⟨∇_θf,∇_θg⟩)/(α+β+n-1).
pub fn mixed_dirichlet(p: &HomogeneousFn, q: &HomogeneousFn) -> Result<f64> {
    let n = p.trace.ambient_n() as f64;
    let denom = p.alpha + q.alpha + n - 1.0;
    if denom <= 1e-12 {
        return Err(Error::DegenerateDenominator(denom));
    }
    Ok((p.alpha * q.alpha * sphere_inner(&p.trace, &q.trace)
        + sphere_dirichlet(&p.trace, &q.trace))
        / denom)
}

/// Weiss energy W_λ(1, ·) of a piecewise-homogeneous function: the bilinear
/// sum of mixed Dirichlet blocks minus λ times the boundary mass.
pub fn weiss(pw: &PiecewiseHomogeneousFn, lambda: f64) -> f64 {
    if pw.terms.is_empty() {
        return 0.0;
    }
    let mut dirichlet = 0.0;
    for i in 0..pw.terms.len() {
        for j in i..pw.terms.len() {
            let factor = if i == j { 1.0 } else { 2.0 };
            let block = mixed_dirichlet(&pw.terms[i], &pw.terms[j])
                .expect("homogeneities must keep the radial exponent positive");
            dirichlet += factor * block;
        }
    }
    let trace = pw.boundary_trace();
    dirichlet - lambda * sphere_inner(&trace, &trace)
}

/// The Weiss cross form B(p, q) = ∫∇p·∇q − (3/2)∫_{∂B₁} pq, so that
/// W_{3/2}(p + q) = W_{3/2}(p) + W_{3/2}(q) + 2B(p, q).
pub fn weiss_cross(p: &HomogeneousFn, q: &HomogeneousFn) -> f64 {
    let block = mixed_dirichlet(p, q).expect("radial exponent must be positive");
    block - 1.5 * sphere_inner(&p.trace, &q.trace)
}

/// W_{3/2} of the 3/2-homogeneous extension through the eigen-sum
/// (1/(n+2)) Σ (λ_k − λ(3/2)) c_k², truncated at the basis cutoff.
pub fn weiss_spectral(c: &Trace) -> f64 {
    let n = c.ambient_n() as f64;
    let lam32 = lambda_of(1.5, c.ambient_n());
    let coeffs = c.coefficients();
    let sum: f64 = c
        .basis()
        .modes
        .iter()
        .map(|m| (m.eigenvalue - lam32) * coeffs[m.index] * coeffs[m.index])
        .sum();
    sum / (n + 2.0)
}

/// The two closed forms for the trace of a (3/2+t)-homogeneous solution:
/// W_{3/2}(r^{3/2+t}c) = t‖c‖² and W_{3/2}(r^{3/2}c) = (1 + t/(n+2))·t‖c‖².
///
/// Being a solution trace is only checked through the necessary eigenvalue
/// relation ‖∇_θc‖² = λ(3/2+t)‖c‖² (plus equator admissibility elsewhere);
/// the global PDE itself is not re-verified here.
pub fn weiss_shift_identities(t: f64, c: &Trace) -> Result<(f64, f64)> {
    let n = c.ambient_n();
    let mass = sphere_inner(c, c);
    let dirichlet = sphere_dirichlet(c, c);
    let lam = lambda_of(1.5 + t, n);
    let residual = (dirichlet - lam * mass).abs();
    let tol = 1e-6 * (1.0 + lam.abs() * mass.abs());
    if residual > tol {
        return Err(Error::EigenResidual { residual, tol });
    }
    let shifted = t * mass;
    Ok((shifted, (1.0 + t / (n as f64 + 2.0)) * shifted))
}

/// Almgren quotient r·D(r)/H(r) of a homogeneous extension, with D(r) by
/// radial Gauss–Legendre quadrature of the exact angular forms. Constant in
/// r and equal to α exactly for r^α c(θ).
pub fn almgren_quotient(h: &HomogeneousFn, r: f64) -> f64 {
    let n = h.trace.ambient_n() as f64;
    let alpha = h.alpha;
    let mass = sphere_inner(&h.trace, &h.trace);
    let dir = sphere_dirichlet(&h.trace, &h.trace);
    let angular = alpha * alpha * mass + dir;
    // D(r) = ∫_0^r s^{2α+n-2} ds · angular, by 64-node quadrature
    let (xs, ws) = spharm::gauss_legendre_on(64, 0.0, r);
    let radial: f64 = xs
        .iter()
        .zip(&ws)
        .map(|(s, w)| w * s.powf(2.0 * alpha + n - 2.0))
        .sum();
    let d = radial * angular;
    let hmass = r.powf(n + 2.0 * alpha) * mass;
    r * d / hmass
}

// ---------------------------------------------------------------------------
// Manifest serialization
// ---------------------------------------------------------------------------

/// Serialize a piecewise-homogeneous function as a manifest of
/// (alpha, trace-file) records next to the trace files themselves.
pub fn save_piecewise(pw: &PiecewiseHomogeneousFn, dir: &Path, stem: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut manifest = String::new();
    for (i, term) in pw.terms.iter().enumerate() {
        let fname = format!("{stem}_term{i}.trace");
        spharm::save_trace(&term.trace, &dir.join(&fname))?;
        manifest.push_str(&format!("alpha={:.17e} trace={fname}\n", term.alpha));
    }
    let path = dir.join(format!("{stem}.manifest"));
    std::fs::write(&path, manifest)?;
    Ok(path)
}

/// Read a manifest written by [`save_piecewise`].
pub fn load_piecewise(manifest: &Path) -> Result<PiecewiseHomogeneousFn> {
    let dir = manifest.parent().unwrap_or(Path::new("."));
    let text = std::fs::read_to_string(manifest)?;
    let mut terms = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut alpha = None;
        let mut tracefile = None;
        for field in line.split_whitespace() {
            if let Some(v) = field.strip_prefix("alpha=") {
                alpha = Some(
                    v.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?,
                );
            } else if let Some(v) = field.strip_prefix("trace=") {
                tracefile = Some(v.to_string());
            }
        }
        let (alpha, tracefile) = match (alpha, tracefile) {
            (Some(a), Some(t)) => (a, t),
            _ => {
                return Err(Error::Parse(format!(
                    "line {}: expected `alpha=.. trace=..`",
                    lineno + 1
                )))
            }
        };
        let (trace, _) = spharm::load_trace(&dir.join(tracefile))?;
        terms.push(HomogeneousFn::new(alpha, trace));
    }
    Ok(PiecewiseHomogeneousFn { terms })
}
