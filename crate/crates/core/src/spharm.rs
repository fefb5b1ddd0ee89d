//! Eigenfunctions and quadrature on the unit sphere of ℝ^{n+1}, n ∈ {1, 2}.
//!
//! The spherical Laplacian on ∂B₁ ⊂ ℝ^{n+1} has eigenvalues λ(α) = α(α+n-1)
//! for integer degrees α, with the circle harmonics (n = 1) and the real
//! spherical harmonics (n = 2) as an orthonormal eigenbasis of L²(∂B₁).
//! Everything downstream — Weiss energies, the trace decomposition, the
//! frequency-gap certificate — is expressed through this basis.
//!
//! Conventions (fixed once, documented here because signs are not canonical):
//!
//! - the equator is {x_{n+1} = 0}; for n = 1 the two equatorial points are
//!   the angles 0 and π of the parametrisation (cos θ, sin θ);
//! - for n = 2 a point is (sin ϑ cos a, sin ϑ sin a, cos ϑ) with polar angle
//!   ϑ ∈ [0, π] and azimuth a ∈ [0, 2π);
//! - n = 1 modes are 1/√(2π), cos(mθ)/√π, sin(mθ)/√π;
//! - n = 2 modes are the real spherical harmonics with the Condon–Shortley
//!   phase folded into the sectoral recurrence.
//!
//! Quadrature is a composite Gauss–Legendre rule split at the equator
//! (n = 1: on [0, π] and [π, 2π]; n = 2: in the polar angle on [0, π/2] and
//! [π/2, π], times a uniform azimuth rule). The split matters: the special
//! profiles of the thin obstacle problem (|θ_{n+1}| and the half-plane
//! profile h_e) are smooth on each closed hemisphere but kink across the
//! equator, and the products entering the energy ledgers must be integrated
//! to near machine precision. Within each piece the integrands are analytic,
//! so the composite rule is spectrally accurate for them, and it remains
//! exact for polynomial mode products up to degree 2K.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use crate::{Error, Result};

/// λ(α) = α(α + n - 1), the spherical eigenvalue of homogeneity α.
pub fn lambda_of(alpha: f64, n: usize) -> f64 {
    alpha * (alpha + n as f64 - 1.0)
}

// ---------------------------------------------------------------------------
// Gauss–Legendre nodes
// ---------------------------------------------------------------------------

/// Nodes and weights of the q-point Gauss–Legendre rule on [-1, 1],
/// by Newton iteration on P_q with the Chebyshev initial guess.
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(q >= 1);
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q {
        let mut x = (PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        // Newton: P_q(x) -> 0; derivative via the standard identity.
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(q, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(q, x);
        nodes[q - 1 - i] = x;
        weights[q - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_and_derivative(q: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if q == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=q {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = q as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule mapped onto [a, b].
pub fn gauss_legendre_on(q: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(q);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

// ---------------------------------------------------------------------------
// Quadrature on the sphere
// ---------------------------------------------------------------------------

/// A quadrature node on ∂B₁.
#[derive(Debug, Clone, Copy)]
pub struct QuadNode {
    /// n = 1: [θ, 0]; n = 2: [ϑ, a] (polar, azimuth).
    pub angles: [f64; 2],
    pub weight: f64,
    /// Index of the node mirrored across the equator {x_{n+1} = 0}.
    pub mirror: usize,
}

#[derive(Debug, Clone)]
pub struct Quadrature {
    pub ambient_n: usize,
    pub nodes: Vec<QuadNode>,
}

impl Quadrature {
    /// Cartesian coordinates of a node direction (third entry unused for n=1).
    pub fn coords(n: usize, angles: [f64; 2]) -> [f64; 3] {
        match n {
            1 => [angles[0].cos(), angles[0].sin(), 0.0],
            2 => {
                let (sp, cp) = angles[0].sin_cos();
                let (sa, ca) = angles[1].sin_cos();
                [sp * ca, sp * sa, cp]
            }
            _ => unreachable!(),
        }
    }

    fn build(n: usize, cutoff: usize) -> Quadrature {
        let k = cutoff;
        match n {
            1 => {
                // Composite Gauss–Legendre on [0, π] and its mirror on [π, 2π].
                let q = (2 * k + 28).max(48);
                let (theta, w) = gauss_legendre_on(q, 0.0, PI);
                let mut nodes = Vec::with_capacity(2 * q);
                for i in 0..q {
                    nodes.push(QuadNode {
                        angles: [theta[i], 0.0],
                        weight: w[i],
                        mirror: q + i,
                    });
                }
                for i in 0..q {
                    nodes.push(QuadNode {
                        angles: [2.0 * PI - theta[i], 0.0],
                        weight: w[i],
                        mirror: i,
                    });
                }
                Quadrature { ambient_n: 1, nodes }
            }
            2 => {
                // Polar Gauss–Legendre per hemisphere × uniform azimuth.
                let qp = (k + 26).max(32);
                let m = (8 * k).max(16).next_multiple_of(4);
                let (pol, wp) = gauss_legendre_on(qp, 0.0, 0.5 * PI);
                let waz = 2.0 * PI / m as f64;
                let mut nodes = Vec::with_capacity(2 * qp * m);
                // upper hemisphere block, then lower; same (i, j) layout.
                for hemi in 0..2 {
                    for i in 0..qp {
                        let th = if hemi == 0 { pol[i] } else { PI - pol[i] };
                        for j in 0..m {
                            let a = waz * j as f64;
                            let idx = nodes.len();
                            let mirror = if hemi == 0 {
                                idx + qp * m
                            } else {
                                idx - qp * m
                            };
                            nodes.push(QuadNode {
                                angles: [th, a],
                                weight: wp[i] * th.sin() * waz,
                                mirror,
                            });
                        }
                    }
                }
                Quadrature { ambient_n: 2, nodes }
            }
            _ => unreachable!(),
        }
    }
}

// ---------------------------------------------------------------------------
// Eigenmodes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ModeShape {
    /// n = 1: 1/√(2π).
    CircleConst,
    /// n = 1: cos(mθ)/√π.
    CircleCos(usize),
    /// n = 1: sin(mθ)/√π.
    CircleSin(usize),
    /// n = 2: zonal harmonic of degree l.
    SphereZonal(usize),
    /// n = 2: √2 · P̄_l^m(cos ϑ) cos(m a).
    SphereCos(usize, usize),
    /// n = 2: √2 · P̄_l^m(cos ϑ) sin(m a).
    SphereSin(usize, usize),
}

/// One normalized eigenfunction of -Δ_S.
#[derive(Debug, Clone)]
pub struct EigenMode {
    pub index: usize,
    /// Integer degree α of the eigenvalue λ = α(α+n-1).
    pub degree: usize,
    pub eigenvalue: f64,
    /// Even across the equator {x_{n+1} = 0}?
    pub even: bool,
    shape: ModeShape,
}

impl EigenMode {
    /// Evaluate the mode at a sphere point given by its angles.
    pub fn eval(&self, n: usize, angles: [f64; 2]) -> f64 {
        match self.shape {
            ModeShape::CircleConst => 1.0 / (2.0 * PI).sqrt(),
            ModeShape::CircleCos(m) => (m as f64 * angles[0]).cos() / PI.sqrt(),
            ModeShape::CircleSin(m) => (m as f64 * angles[0]).sin() / PI.sqrt(),
            ModeShape::SphereZonal(l) => {
                debug_assert_eq!(n, 2);
                normalized_assoc_legendre(l, 0, angles[0].cos())
            }
            ModeShape::SphereCos(l, m) => {
                let p = normalized_assoc_legendre(l, m, angles[0].cos());
                std::f64::consts::SQRT_2 * p * (m as f64 * angles[1]).cos()
            }
            ModeShape::SphereSin(l, m) => {
                let p = normalized_assoc_legendre(l, m, angles[0].cos());
                std::f64::consts::SQRT_2 * p * (m as f64 * angles[1]).sin()
            }
        }
    }
}

/// P̄_l^m(t): associated Legendre function normalized so that the real
/// spherical harmonics built from it have unit L²(S²) norm.
fn normalized_assoc_legendre(l: usize, m: usize, t: f64) -> f64 {
    debug_assert!(m <= l);
    let u = (1.0 - t * t).max(0.0).sqrt();
    // sectoral seed P̄_m^m
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=m {
        pmm *= -u * ((2.0 * k as f64 + 1.0) / (2.0 * k as f64)).sqrt();
    }
    if l == m {
        return pmm;
    }
    let mut p_prev = pmm;
    let mut p = t * ((2 * m + 3) as f64).sqrt() * pmm;
    if l == m + 1 {
        return p;
    }
    for ll in (m + 2)..=l {
        let lf = ll as f64;
        let mf = m as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = ((2.0 * lf + 1.0) * ((lf - 1.0) * (lf - 1.0) - mf * mf)
            / ((2.0 * lf - 3.0) * (lf * lf - mf * mf)))
            .sqrt();
        let p_next = a * t * p - b * p_prev;
        p_prev = p;
        p = p_next;
    }
    p
}

// ---------------------------------------------------------------------------
// The basis
// ---------------------------------------------------------------------------

/// Inner products against the special thin-obstacle profiles, filled lazily
/// by the `homog` module for the canonical direction e = +x₁.
#[derive(Debug, Clone, Default)]
pub(crate) struct SpecialTables {
    /// Coefficient of u₀ on the constant mode (> 0).
    pub u0_mean: f64,
}

/// Truncated eigenbasis of the spherical Laplacian together with its
/// quadrature and equator-ring rules.
#[derive(Debug)]
pub struct EigenBasis {
    pub ambient_n: usize,
    pub cutoff_degree: usize,
    pub modes: Vec<EigenMode>,
    pub quad: Quadrature,
    /// Azimuths of the canonical equator ring (n = 1: the two points 0, π).
    ring_azimuths: Vec<f64>,
    ring_weight: f64,
    pub(crate) special: OnceLock<SpecialTables>,
}

/// Build the truncated eigenbasis on the sphere of ℝ^{n+1}.
///
/// For n = 1 the modes are the circle harmonics of degree ≤ K, for n = 2 the
/// real spherical harmonics of degree ≤ K; eigenvalues are α(α+n-1).
pub fn build_basis(n: usize, cutoff_degree: usize) -> Result<Arc<EigenBasis>> {
    if n != 1 && n != 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    if cutoff_degree < 2 {
        return Err(Error::CutoffTooSmall(cutoff_degree));
    }
    let k = cutoff_degree;
    let mut modes = Vec::new();
    match n {
        1 => {
            modes.push(EigenMode {
                index: 0,
                degree: 0,
                eigenvalue: 0.0,
                even: true,
                shape: ModeShape::CircleConst,
            });
            for m in 1..=k {
                modes.push(EigenMode {
                    index: modes.len(),
                    degree: m,
                    eigenvalue: (m * m) as f64,
                    even: true,
                    shape: ModeShape::CircleCos(m),
                });
                modes.push(EigenMode {
                    index: modes.len(),
                    degree: m,
                    eigenvalue: (m * m) as f64,
                    even: false,
                    shape: ModeShape::CircleSin(m),
                });
            }
        }
        2 => {
            for l in 0..=k {
                let lam = (l * (l + 1)) as f64;
                modes.push(EigenMode {
                    index: modes.len(),
                    degree: l,
                    eigenvalue: lam,
                    even: l % 2 == 0,
                    shape: ModeShape::SphereZonal(l),
                });
                for m in 1..=l {
                    let even = (l + m) % 2 == 0;
                    modes.push(EigenMode {
                        index: modes.len(),
                        degree: l,
                        eigenvalue: lam,
                        even,
                        shape: ModeShape::SphereCos(l, m),
                    });
                    modes.push(EigenMode {
                        index: modes.len(),
                        degree: l,
                        eigenvalue: lam,
                        even,
                        shape: ModeShape::SphereSin(l, m),
                    });
                }
            }
        }
        _ => unreachable!(),
    }
    let quad = Quadrature::build(n, k);
    let (ring_azimuths, ring_weight) = match n {
        1 => (vec![0.0, PI], 1.0),
        2 => {
            let m = (8 * k).max(64);
            (
                (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect(),
                2.0 * PI / m as f64,
            )
        }
        _ => unreachable!(),
    };
    Ok(Arc::new(EigenBasis {
        ambient_n: n,
        cutoff_degree: k,
        modes,
        quad,
        ring_azimuths,
        ring_weight,
        special: OnceLock::new(),
    }))
}

impl EigenBasis {
    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    /// Fill `out` with the values of every mode at the given angles.
    pub fn mode_values_at(&self, angles: [f64; 2], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.modes.len());
        match self.ambient_n {
            1 => {
                let theta = angles[0];
                out[0] = 1.0 / (2.0 * PI).sqrt();
                let inv = 1.0 / PI.sqrt();
                for m in 1..=self.cutoff_degree {
                    let (s, c) = (m as f64 * theta).sin_cos();
                    out[2 * m - 1] = c * inv;
                    out[2 * m] = s * inv;
                }
            }
            2 => {
                let t = angles[0].cos();
                let az = angles[1];
                let k = self.cutoff_degree;
                // P̄ tables per order m, then multiply the azimuth factors.
                let mut idx_of = vec![0usize; 0];
                idx_of.reserve(0);
                let mut base = 0usize;
                let mut starts = Vec::with_capacity(k + 1);
                for l in 0..=k {
                    starts.push(base);
                    base += 2 * l + 1;
                }
                for m in 0..=k {
                    // P̄_l^m for l = m..=k via the normalized recurrence.
                    let u = (1.0 - t * t).max(0.0).sqrt();
                    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
                    for kk in 1..=m {
                        pmm *= -u * ((2.0 * kk as f64 + 1.0) / (2.0 * kk as f64)).sqrt();
                    }
                    let (smaz, cmaz) = (m as f64 * az).sin_cos();
                    let mut p_prev = 0.0;
                    let mut p = pmm;
                    for l in m..=k {
                        if l > m {
                            let lf = l as f64;
                            let mf = m as f64;
                            let p_next = if l == m + 1 {
                                t * ((2 * m + 3) as f64).sqrt() * p
                            } else {
                                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                                let b = ((2.0 * lf + 1.0)
                                    * ((lf - 1.0) * (lf - 1.0) - mf * mf)
                                    / ((2.0 * lf - 3.0) * (lf * lf - mf * mf)))
                                    .sqrt();
                                a * t * p - b * p_prev
                            };
                            p_prev = p;
                            p = p_next;
                        }
                        let start = starts[l];
                        if m == 0 {
                            out[start] = p;
                        } else {
                            let v = std::f64::consts::SQRT_2 * p;
                            out[start + 2 * m - 1] = v * cmaz;
                            out[start + 2 * m] = v * smaz;
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
    }

    /// Index of the constant mode.
    pub fn const_index(&self) -> usize {
        0
    }

    /// Indices of the degree-1 modes lying in the equatorial plane
    /// (the even linear functions x₁, …, x_n restricted to the sphere).
    pub fn equatorial_degree1(&self) -> Vec<usize> {
        match self.ambient_n {
            1 => vec![1],
            2 => vec![2, 3],
            _ => unreachable!(),
        }
    }

    /// All mode indices of a given degree.
    pub fn degree_indices(&self, degree: usize) -> Vec<usize> {
        self.modes
            .iter()
            .filter(|m| m.degree == degree)
            .map(|m| m.index)
            .collect()
    }

    pub(crate) fn check_compatible(&self, other: &EigenBasis) -> Result<()> {
        if self.ambient_n != other.ambient_n
            || self.cutoff_degree != other.cutoff_degree
            || self.quad.nodes.len() != other.quad.nodes.len()
        {
            return Err(Error::DimensionMismatch(format!(
                "n {} vs {}, K {} vs {}",
                self.ambient_n, other.ambient_n, self.cutoff_degree, other.cutoff_degree
            )));
        }
        Ok(())
    }

    /// Azimuths of the canonical equator ring nodes.
    pub fn ring_azimuths(&self) -> &[f64] {
        &self.ring_azimuths
    }

    /// ∫_{equator ring} g dH^{n-1} over the full ring (n = 1: the sum over
    /// the two equatorial points).
    pub fn full_ring_integral(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.ring_azimuths
            .iter()
            .map(|&a| g(a) * self.ring_weight)
            .sum()
    }

    /// ∫_{ring ∩ {θ'·e < 0}} g(a) |cos(a - e_az)|^{1/2} da.
    ///
    /// For n = 1 the half ring is the single point opposite e and the weight
    /// is 1. For n = 2 the |cos|^{1/2} factor has square-root zeros at the
    /// two ends of the half circle; a dyadically graded composite
    /// Gauss–Legendre rule resolves them to near machine precision.
    pub fn half_ring_weighted_integral(&self, e_az: f64, g: impl Fn(f64) -> f64) -> f64 {
        match self.ambient_n {
            1 => g(e_az + PI),
            2 => {
                let mut total = 0.0;
                // Two symmetric quarters: [π/2, π] graded toward π/2, and
                // [π, 3π/2] graded toward 3π/2, both offset by e_az.
                let levels = 40;
                let p = 12;
                let (gx, gw) = gauss_legendre(p);
                let mut add_cell = |lo: f64, hi: f64| {
                    let mid = 0.5 * (lo + hi);
                    let half = 0.5 * (hi - lo);
                    for i in 0..p {
                        let s = mid + half * gx[i];
                        let w = half * gw[i];
                        total += w * g(e_az + s) * s.cos().abs().sqrt();
                    }
                };
                for quarter in 0..2 {
                    // distances from the singular endpoint, halving each level
                    let len = 0.5 * PI;
                    let mut hi = len;
                    for _ in 0..levels {
                        let lo = 0.5 * hi;
                        let (a, b) = if quarter == 0 {
                            (0.5 * PI + lo, 0.5 * PI + hi)
                        } else {
                            (1.5 * PI - hi, 1.5 * PI - lo)
                        };
                        add_cell(a, b);
                        hi = lo;
                    }
                    // closing sliver at the singular end; its exact mass is
                    // O(hi^{3/2}) which is below f64 resolution at 40 levels
                    let (a, b) = if quarter == 0 {
                        (0.5 * PI, 0.5 * PI + hi)
                    } else {
                        (1.5 * PI - hi, 1.5 * PI)
                    };
                    add_cell(a, b);
                }
                total
            }
            _ => unreachable!(),
        }
    }
}

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

type EquatorFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Structural information used to evaluate Dirichlet pairings exactly.
#[derive(Clone)]
pub enum TraceKind {
    /// Sampled data; spectral quantities use the basis-truncated projection.
    Generic,
    /// Exactly representable in the basis.
    BandLimited,
    /// amplitude · Re((x'·e + i|x_{n+1}|)^{3/2}) restricted to the sphere.
    /// Off the equator -Δ_S h_e = λ(3/2) h_e; the contact measure
    /// 3|θ'·e|^{1/2} H^{n-1} on the half ring {θ'·e ≤ 0} carries the rest.
    HalfPlaneProfile { e_az: f64, amplitude: f64 },
    /// amplitude · |θ_{n+1}|; -Δ_S u₀ = λ(1) u₀ - 2 H^{n-1}|_{ring}.
    EquatorDistance { amplitude: f64 },
    /// -Δ_S c = λ c away from the equator, with any contact measure
    /// supported where c vanishes (profiles of homogeneous solutions).
    EigenSolution { lambda: f64 },
    /// Linear combination of structured traces (used for decomposition
    /// remainders so their energies expand through the closed rules).
    Combination(Vec<(f64, Trace)>),
}

impl std::fmt::Debug for TraceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TraceKind::Generic => write!(f, "Generic"),
            TraceKind::BandLimited => write!(f, "BandLimited"),
            TraceKind::HalfPlaneProfile { e_az, amplitude } => {
                write!(f, "HalfPlaneProfile(e_az={e_az}, amp={amplitude})")
            }
            TraceKind::EquatorDistance { amplitude } => {
                write!(f, "EquatorDistance(amp={amplitude})")
            }
            TraceKind::EigenSolution { lambda } => write!(f, "EigenSolution(λ={lambda})"),
            TraceKind::Combination(parts) => write!(f, "Combination({} parts)", parts.len()),
        }
    }
}

/// An even function on ∂B₁ held as quadrature samples plus (lazily) its
/// eigen-coefficients and its values on the equator ring.
pub struct Trace {
    basis: Arc<EigenBasis>,
    samples: Vec<f64>,
    ring_values: Vec<f64>,
    equator_fn: Option<EquatorFn>,
    kind: TraceKind,
    coeffs: OnceLock<Vec<f64>>,
}

impl Clone for Trace {
    fn clone(&self) -> Self {
        let coeffs = OnceLock::new();
        if let Some(c) = self.coeffs.get() {
            let _ = coeffs.set(c.clone());
        }
        Trace {
            basis: self.basis.clone(),
            samples: self.samples.clone(),
            ring_values: self.ring_values.clone(),
            equator_fn: self.equator_fn.clone(),
            kind: self.kind.clone(),
            coeffs,
        }
    }
}

impl std::fmt::Debug for Trace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Trace")
            .field("n", &self.basis.ambient_n)
            .field("kind", &self.kind)
            .field("samples", &self.samples.len())
            .finish()
    }
}

impl Trace {
    pub fn basis(&self) -> &Arc<EigenBasis> {
        &self.basis
    }

    pub fn ambient_n(&self) -> usize {
        self.basis.ambient_n
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn kind(&self) -> &TraceKind {
        &self.kind
    }

    /// Values at the canonical equator ring nodes.
    pub fn ring_values(&self) -> &[f64] {
        &self.ring_values
    }

    /// Build from a closure over sphere angles. The closure must already be
    /// even across the equator; `ring` gives the equator values by azimuth.
    pub(crate) fn from_closure(
        basis: &Arc<EigenBasis>,
        f: impl Fn(usize, [f64; 2]) -> f64,
        ring: EquatorFn,
        kind: TraceKind,
    ) -> Trace {
        let n = basis.ambient_n;
        let samples = basis
            .quad
            .nodes
            .iter()
            .map(|node| f(n, node.angles))
            .collect();
        let ring_values = basis.ring_azimuths.iter().map(|&a| ring(a)).collect();
        Trace {
            basis: basis.clone(),
            samples,
            ring_values,
            equator_fn: Some(ring),
            kind,
            coeffs: OnceLock::new(),
        }
    }

    /// Build a trace from raw samples at the quadrature nodes.
    ///
    /// Evenness is enforced by symmetrising across the equator rather than
    /// assumed; the returned scalar is the largest correction applied.
    /// Ring values come from the truncated projection, so sampled data is
    /// treated as band-limited for equator evaluation.
    pub fn from_node_samples(basis: &Arc<EigenBasis>, raw: &[f64]) -> Result<(Trace, f64)> {
        if raw.len() != basis.quad.nodes.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for {} quadrature nodes",
                raw.len(),
                basis.quad.nodes.len()
            )));
        }
        let mut samples = vec![0.0; raw.len()];
        let mut asym = 0.0f64;
        for (i, node) in basis.quad.nodes.iter().enumerate() {
            let v = 0.5 * (raw[i] + raw[node.mirror]);
            asym = asym.max((raw[i] - raw[node.mirror]).abs() * 0.5);
            samples[i] = v;
        }
        let mut t = Trace {
            basis: basis.clone(),
            samples,
            ring_values: Vec::new(),
            equator_fn: None,
            kind: TraceKind::Generic,
            coeffs: OnceLock::new(),
        };
        let coeffs = project_samples(basis, &t.samples);
        let ring: Vec<f64> = basis
            .ring_azimuths
            .iter()
            .map(|&a| synth_at_equator(basis, &coeffs, a))
            .collect();
        let _ = t.coeffs.set(coeffs);
        t.ring_values = ring;
        Ok((t, asym))
    }

    /// Eigen-coefficients in the basis (computed once, then cached).
    pub fn coefficients(&self) -> &[f64] {
        self.coeffs
            .get_or_init(|| project_samples(&self.basis, &self.samples))
    }

    /// Value on the equator at the given azimuth (n = 1: azimuth 0 ↦ θ = 0,
    /// azimuth π ↦ θ = π).
    pub fn equator_value(&self, az: f64) -> f64 {
        if let Some(f) = &self.equator_fn {
            return f(az);
        }
        match &self.kind {
            TraceKind::Combination(parts) => parts
                .iter()
                .map(|(a, t)| a * t.equator_value(az))
                .sum(),
            _ => synth_at_equator(&self.basis, self.coefficients(), az),
        }
    }

    /// Admissibility flag: no equator value below -1e-10.
    pub fn admissible(&self) -> bool {
        self.min_ring_value() >= -crate::epi::ADMISSIBILITY_TOL
    }

    pub fn min_ring_value(&self) -> f64 {
        self.ring_values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Scale by a constant, preserving the structural kind.
    pub fn scaled(&self, s: f64) -> Trace {
        let mut out = self.clone();
        for v in &mut out.samples {
            *v *= s;
        }
        for v in &mut out.ring_values {
            *v *= s;
        }
        if let Some(c) = self.coeffs.get() {
            let scaled: Vec<f64> = c.iter().map(|v| v * s).collect();
            out.coeffs = OnceLock::new();
            let _ = out.coeffs.set(scaled);
        }
        if let Some(f) = &self.equator_fn {
            let f = f.clone();
            out.equator_fn = Some(Arc::new(move |az| s * f(az)));
        }
        out.kind = match &self.kind {
            TraceKind::Generic => TraceKind::Generic,
            TraceKind::BandLimited => TraceKind::BandLimited,
            TraceKind::HalfPlaneProfile { e_az, amplitude } => TraceKind::HalfPlaneProfile {
                e_az: *e_az,
                amplitude: amplitude * s,
            },
            TraceKind::EquatorDistance { amplitude } => TraceKind::EquatorDistance {
                amplitude: amplitude * s,
            },
            TraceKind::EigenSolution { lambda } => TraceKind::EigenSolution { lambda: *lambda },
            TraceKind::Combination(parts) => {
                TraceKind::Combination(parts.iter().map(|(a, t)| (a * s, t.clone())).collect())
            }
        };
        out
    }

    /// Linear combination Σ aᵢ tᵢ with the structure of every part retained
    /// for the Dirichlet-form dispatch.
    pub fn combination(parts: &[(f64, &Trace)]) -> Trace {
        assert!(!parts.is_empty());
        let basis = parts[0].1.basis.clone();
        let mut samples = vec![0.0; basis.quad.nodes.len()];
        let mut ring = vec![0.0; basis.ring_azimuths.len()];
        for (a, t) in parts {
            for (s, v) in samples.iter_mut().zip(&t.samples) {
                *s += a * v;
            }
            for (r, v) in ring.iter_mut().zip(&t.ring_values) {
                *r += a * v;
            }
        }
        let owned: Vec<(f64, Trace)> = parts.iter().map(|(a, t)| (*a, (*t).clone())).collect();
        let eq_parts: Vec<(f64, Trace)> = owned.clone();
        let equator_fn: EquatorFn =
            Arc::new(move |az| eq_parts.iter().map(|(a, t)| a * t.equator_value(az)).sum());
        Trace {
            basis,
            samples,
            ring_values: ring,
            equator_fn: Some(equator_fn),
            kind: TraceKind::Combination(owned),
            coeffs: OnceLock::new(),
        }
    }
}

fn project_samples(basis: &EigenBasis, samples: &[f64]) -> Vec<f64> {
    let nmodes = basis.modes.len();
    let mut coeffs = vec![0.0; nmodes];
    let mut values = vec![0.0; nmodes];
    for (node, &s) in basis.quad.nodes.iter().zip(samples) {
        basis.mode_values_at(node.angles, &mut values);
        let ws = node.weight * s;
        for (c, v) in coeffs.iter_mut().zip(&values) {
            *c += ws * v;
        }
    }
    coeffs
}

fn synth_at_equator(basis: &EigenBasis, coeffs: &[f64], az: f64) -> f64 {
    let angles = match basis.ambient_n {
        1 => {
            // only the two equatorial points exist; snap to the nearer one
            let theta = if (az.rem_euclid(2.0 * PI) - PI).abs() < 0.5 * PI {
                PI
            } else {
                0.0
            };
            [theta, 0.0]
        }
        2 => [0.5 * PI, az],
        _ => unreachable!(),
    };
    let mut values = vec![0.0; basis.modes.len()];
    basis.mode_values_at(angles, &mut values);
    coeffs.iter().zip(&values).map(|(c, v)| c * v).sum()
}

// ---------------------------------------------------------------------------
// Projection / synthesis / forms
// ---------------------------------------------------------------------------

/// Coefficients ⟨c, φ_k⟩_{L²(∂B₁)} for every mode of the basis.
pub fn project(c: &Trace, basis: &Arc<EigenBasis>) -> Result<Vec<f64>> {
    c.basis.check_compatible(basis)?;
    Ok(c.coefficients().to_vec())
}

/// Pointwise sum Σ c_k φ_k as a band-limited trace.
pub fn synthesize(coeffs: &[f64], basis: &Arc<EigenBasis>) -> Result<Trace> {
    if coeffs.len() > basis.modes.len() {
        return Err(Error::LengthMismatch {
            got: coeffs.len(),
            max: basis.modes.len(),
        });
    }
    let mut full = coeffs.to_vec();
    full.resize(basis.modes.len(), 0.0);
    let mut samples = vec![0.0; basis.quad.nodes.len()];
    let mut values = vec![0.0; basis.modes.len()];
    for (i, node) in basis.quad.nodes.iter().enumerate() {
        basis.mode_values_at(node.angles, &mut values);
        samples[i] = full.iter().zip(&values).map(|(c, v)| c * v).sum();
    }
    let ring: Vec<f64> = basis
        .ring_azimuths
        .iter()
        .map(|&a| synth_at_equator(basis, &full, a))
        .collect();
    let basis_cl = basis.clone();
    let full_cl = full.clone();
    let equator_fn: EquatorFn = Arc::new(move |az| synth_at_equator(&basis_cl, &full_cl, az));
    let t = Trace {
        basis: basis.clone(),
        samples,
        ring_values: ring,
        equator_fn: Some(equator_fn),
        kind: TraceKind::BandLimited,
        coeffs: OnceLock::new(),
    };
    let _ = t.coeffs.set(full);
    Ok(t)
}

/// Quadrature value of ∫_{∂B₁} f g dH^n.
pub fn sphere_inner(f: &Trace, g: &Trace) -> f64 {
    debug_assert_eq!(f.basis.ambient_n, g.basis.ambient_n);
    f.basis
        .quad
        .nodes
        .iter()
        .zip(f.samples.iter().zip(&g.samples))
        .map(|(node, (a, b))| node.weight * a * b)
        .sum()
}

/// ∫_{∂B₁} ∇_θ f · ∇_θ g dH^n.
///
/// The pairing is dispatched on the structure of the traces. For the special
/// profiles the distributional identity −Δ_S f = λ f + m (with the contact
/// measure m on the equator) turns the form into λ⟨f, g⟩ plus an explicit
/// ring integral, which is exact; band-limited pairs use Σ λ_k f_k g_k.
pub fn sphere_dirichlet(f: &Trace, g: &Trace) -> f64 {
    let n = f.basis.ambient_n;
    match (&f.kind, &g.kind) {
        (TraceKind::Combination(parts), _) => {
            parts.iter().map(|(a, t)| a * sphere_dirichlet(t, g)).sum()
        }
        (_, TraceKind::Combination(parts)) => {
            parts.iter().map(|(a, t)| a * sphere_dirichlet(f, t)).sum()
        }
        (TraceKind::HalfPlaneProfile { e_az, amplitude }, _) => {
            lambda_of(1.5, n) * sphere_inner(f, g)
                + 3.0 * amplitude
                    * f.basis
                        .half_ring_weighted_integral(*e_az, |az| g.equator_value(az))
        }
        (_, TraceKind::HalfPlaneProfile { .. }) => sphere_dirichlet(g, f),
        (TraceKind::EquatorDistance { amplitude }, _) => {
            lambda_of(1.0, n) * sphere_inner(f, g)
                - 2.0 * amplitude * f.basis.full_ring_integral(|az| g.equator_value(az))
        }
        (_, TraceKind::EquatorDistance { .. }) => sphere_dirichlet(g, f),
        (TraceKind::EigenSolution { lambda }, _) if ring_pairing_vanishes(f, g) => {
            lambda * sphere_inner(f, g)
        }
        (_, TraceKind::EigenSolution { lambda }) if ring_pairing_vanishes(g, f) => {
            lambda * sphere_inner(f, g)
        }
        _ => spectral_dirichlet(f, g),
    }
}

/// The contact measure of an eigen-solution profile lives where the profile
/// vanishes on the ring; the λ-rule is valid against g iff g vanishes there.
fn ring_pairing_vanishes(f: &Trace, g: &Trace) -> bool {
    f.ring_values
        .iter()
        .zip(&g.ring_values)
        .all(|(&fv, &gv)| fv.abs() > 1e-12 || gv.abs() < 1e-12)
}

fn spectral_dirichlet(f: &Trace, g: &Trace) -> f64 {
    let fc = f.coefficients();
    let gc = g.coefficients();
    f.basis
        .modes
        .iter()
        .map(|m| m.eigenvalue * fc[m.index] * gc[m.index])
        .sum()
}

// ---------------------------------------------------------------------------
// Trace file round-trip
// ---------------------------------------------------------------------------

/// Write a trace to a column file: one-line header `ambient_n,K`, then one
/// row per quadrature node with the node angle(s), weight and value.
pub fn save_trace(t: &Trace, path: &std::path::Path) -> Result<()> {
    use std::io::Write;
    let mut out = String::new();
    out.push_str(&format!(
        "{},{}\n",
        t.basis.ambient_n, t.basis.cutoff_degree
    ));
    for (node, v) in t.basis.quad.nodes.iter().zip(&t.samples) {
        match t.basis.ambient_n {
            1 => out.push_str(&format!(
                "{:.17e},{:.17e},{:.17e}\n",
                node.angles[0], node.weight, v
            )),
            _ => out.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{:.17e}\n",
                node.angles[0], node.angles[1], node.weight, v
            )),
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// Read a trace written by [`save_trace`]. The basis is rebuilt from the
/// header; node angles are cross-checked against the file.
pub fn load_trace(path: &std::path::Path) -> Result<(Trace, f64)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty trace file".into()))?;
    let mut it = header.split(',');
    let n: usize = it
        .next()
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Parse("bad header".into()))?;
    let k: usize = it
        .next()
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Parse("bad header".into()))?;
    let basis = build_basis(n, k)?;
    let mut raw = Vec::with_capacity(basis.quad.nodes.len());
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", i + 2)))?;
        let expected_cols = n + 2;
        if cols.len() != expected_cols {
            return Err(Error::Parse(format!(
                "line {}: {} columns, expected {expected_cols}",
                i + 2,
                cols.len()
            )));
        }
        let (angle_cols, value) = match n {
            1 => (&cols[..1], cols[2]),
            _ => (&cols[..2], cols[3]),
        };
        let node = basis
            .quad
            .nodes
            .get(i)
            .ok_or_else(|| Error::Parse("more rows than quadrature nodes".into()))?;
        for (a, b) in angle_cols.iter().zip(node.angles.iter()) {
            if (a - b).abs() > 1e-9 {
                return Err(Error::Parse(format!(
                    "node angle mismatch at row {}: {a} vs {b}",
                    i + 2
                )));
            }
        }
        raw.push(value);
    }
    if raw.len() != basis.quad.nodes.len() {
        return Err(Error::Parse(format!(
            "{} rows for {} quadrature nodes",
            raw.len(),
            basis.quad.nodes.len()
        )));
    }
    Trace::from_node_samples(&basis, &raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn circle_basis_mode_count_and_eigenvalues() {
        let b = build_basis(1, 4).unwrap();
        assert_eq!(b.num_modes(), 9);
        let eig: Vec<f64> = b.modes.iter().map(|m| m.eigenvalue).collect();
        assert_eq!(eig, vec![0.0, 1.0, 1.0, 4.0, 4.0, 9.0, 9.0, 16.0, 16.0]);
    }

    #[test]
    fn sphere_basis_mode_count_and_eigenvalues() {
        let b = build_basis(2, 2).unwrap();
        assert_eq!(b.num_modes(), 9);
        let eig: Vec<f64> = b.modes.iter().map(|m| m.eigenvalue).collect();
        assert_eq!(eig, vec![0.0, 2.0, 2.0, 2.0, 6.0, 6.0, 6.0, 6.0, 6.0]);
    }

    #[test]
    fn cutoff_and_dimension_preconditions() {
        assert!(matches!(build_basis(1, 0), Err(Error::CutoffTooSmall(0))));
        assert!(matches!(
            build_basis(3, 8),
            Err(Error::UnsupportedDimension(3))
        ));
    }

    #[test]
    fn lambda_of_values() {
        assert_abs_diff_eq!(lambda_of(1.5, 1), 2.25);
        for n in 1..=2 {
            assert_abs_diff_eq!(lambda_of(1.5, n), 1.5 * n as f64 + 0.75);
            assert_abs_diff_eq!(lambda_of(1.0, n), n as f64);
            assert_abs_diff_eq!(lambda_of(0.0, n), 0.0);
        }
    }

    fn gram_defect(b: &Arc<EigenBasis>) -> f64 {
        let m = b.num_modes();
        let mut gram = vec![0.0; m * m];
        let mut values = vec![0.0; m];
        for node in &b.quad.nodes {
            b.mode_values_at(node.angles, &mut values);
            for i in 0..m {
                let wv = node.weight * values[i];
                for j in i..m {
                    gram[i * m + j] += wv * values[j];
                }
            }
        }
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in i..m {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[i * m + j] - target).abs());
            }
        }
        worst
    }

    #[test]
    fn gram_matrix_is_identity_n1() {
        let b = build_basis(1, 24).unwrap();
        assert!(gram_defect(&b) < 1e-10, "defect {}", gram_defect(&b));
    }

    #[test]
    fn gram_matrix_is_identity_n2() {
        let b = build_basis(2, 8).unwrap();
        assert!(gram_defect(&b) < 1e-10, "defect {}", gram_defect(&b));
    }

    #[test]
    fn gram_spot_checks_n2_large_cutoff() {
        let b = build_basis(2, 24).unwrap();
        let m = b.num_modes();
        let mut values = vec![0.0; m];
        // sampled pairs, including the highest degrees
        let pairs = [
            (0usize, 0usize),
            (m - 1, m - 1),
            (m - 1, m - 2),
            (m / 2, m / 2),
            (m / 2, m / 3),
            (1, m - 1),
        ];
        let mut sums = [0.0f64; 6];
        for node in &b.quad.nodes {
            b.mode_values_at(node.angles, &mut values);
            for (s, (i, j)) in sums.iter_mut().zip(pairs.iter()) {
                *s += node.weight * values[*i] * values[*j];
            }
        }
        for (s, (i, j)) in sums.iter().zip(pairs.iter()) {
            let target = if i == j { 1.0 } else { 0.0 };
            assert!(
                (s - target).abs() < 1e-10,
                "pair ({i},{j}): {s} vs {target}"
            );
        }
    }

    /// Discrete spherical Laplacian by high-order differences of the mode's
    /// own evaluation rule.
    fn discrete_laplacian(b: &EigenBasis, mode: &EigenMode, angles: [f64; 2]) -> f64 {
        let n = b.ambient_n;
        let scale = 1.0 / (mode.degree.max(1) as f64);
        let d = 0.02 * scale;
        let f = |th: f64, az: f64| mode.eval(n, [th, az]);
        let d2 = |g: &dyn Fn(f64) -> f64, x: f64| {
            (-g(x + 2.0 * d) + 16.0 * g(x + d) - 30.0 * g(x) + 16.0 * g(x - d) - g(x - 2.0 * d))
                / (12.0 * d * d)
        };
        let d1 = |g: &dyn Fn(f64) -> f64, x: f64| {
            (g(x - 2.0 * d) - 8.0 * g(x - d) + 8.0 * g(x + d) - g(x + 2.0 * d)) / (12.0 * d)
        };
        match n {
            1 => d2(&|t| f(t, 0.0), angles[0]),
            2 => {
                let (th, az) = (angles[0], angles[1]);
                let ft = |t: f64| f(t, az);
                let fa = |a: f64| f(th, a);
                d2(&ft, th) + (th.cos() / th.sin()) * d1(&ft, th)
                    + d2(&fa, az) / (th.sin() * th.sin())
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn modes_satisfy_eigen_equation_n1() {
        let b = build_basis(1, 24).unwrap();
        for mode in &b.modes {
            let mut worst = 0.0f64;
            for node in b.quad.nodes.iter().step_by(7) {
                let lap = discrete_laplacian(&b, mode, node.angles);
                worst = worst.max((lap + mode.eigenvalue * mode.eval(1, node.angles)).abs());
            }
            assert!(worst < 1e-6, "mode {} residual {}", mode.index, worst);
        }
    }

    #[test]
    fn modes_satisfy_eigen_equation_n2() {
        let b = build_basis(2, 8).unwrap();
        for mode in &b.modes {
            let mut worst = 0.0f64;
            for node in b.quad.nodes.iter().step_by(41) {
                // keep away from the poles where 1/sin² amplifies stencil noise
                if node.angles[0].cos().abs() > 0.9 {
                    continue;
                }
                let lap = discrete_laplacian(&b, mode, node.angles);
                worst = worst.max((lap + mode.eigenvalue * mode.eval(2, node.angles)).abs());
            }
            assert!(worst < 1e-6, "mode {} residual {}", mode.index, worst);
        }
    }

    #[test]
    fn project_unit_mode_gives_unit_vector() {
        for (n, k) in [(1usize, 8usize), (2, 5)] {
            let b = build_basis(n, k).unwrap();
            let slot = 3;
            let mut coeffs = vec![0.0; b.num_modes()];
            coeffs[slot] = 1.0;
            let t = synthesize(&coeffs, &b).unwrap();
            let p = project(&t, &b).unwrap();
            for (i, v) in p.iter().enumerate() {
                let target = if i == slot { 1.0 } else { 0.0 };
                assert!((v - target).abs() < 1e-10, "n={n} slot {i}: {v}");
            }
        }
    }

    #[test]
    fn project_constant_trace() {
        let b = build_basis(1, 8).unwrap();
        let mut coeffs = vec![0.0; b.num_modes()];
        coeffs[0] = (2.0 * PI).sqrt(); // c ≡ 1
        let t = synthesize(&coeffs, &b).unwrap();
        assert!(t.samples().iter().all(|v| (v - 1.0).abs() < 1e-12));
        let p = project(&t, &b).unwrap();
        assert_abs_diff_eq!(p[0], (2.0 * PI).sqrt(), epsilon = 1e-10);
        assert!(p[1..].iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn synthesize_zero_and_roundtrip() {
        let b = build_basis(1, 12).unwrap();
        let z = synthesize(&vec![0.0; 5], &b).unwrap();
        assert!(z.samples().iter().all(|v| *v == 0.0));

        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let coeffs: Vec<f64> = (0..b.num_modes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let t = synthesize(&coeffs, &b).unwrap();
            let p = project(&t, &b).unwrap();
            for (a, c) in p.iter().zip(&coeffs) {
                assert!((a - c).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn roundtrip_n2() {
        use rand::{Rng, SeedableRng};
        let b = build_basis(2, 6).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let coeffs: Vec<f64> = (0..b.num_modes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let t = synthesize(&coeffs, &b).unwrap();
            let p = project(&t, &b).unwrap();
            for (a, c) in p.iter().zip(&coeffs) {
                assert!((a - c).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn inner_and_dirichlet_on_modes() {
        for (n, k) in [(1usize, 10usize), (2, 6)] {
            let b = build_basis(n, k).unwrap();
            for slot in [0usize, 1, b.num_modes() - 1] {
                let mut coeffs = vec![0.0; b.num_modes()];
                coeffs[slot] = 1.0;
                let t = synthesize(&coeffs, &b).unwrap();
                assert_abs_diff_eq!(sphere_inner(&t, &t), 1.0, epsilon = 1e-10);
                assert_abs_diff_eq!(
                    sphere_dirichlet(&t, &t),
                    b.modes[slot].eigenvalue,
                    epsilon = 1e-9
                );
            }
            // distinct eigenspaces are orthogonal in both forms
            let mut c1 = vec![0.0; b.num_modes()];
            let mut c2 = vec![0.0; b.num_modes()];
            c1[1] = 1.0;
            c2[b.num_modes() - 1] = 1.0;
            let t1 = synthesize(&c1, &b).unwrap();
            let t2 = synthesize(&c2, &b).unwrap();
            assert_abs_diff_eq!(sphere_inner(&t1, &t2), 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(sphere_dirichlet(&t1, &t2), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn parseval_for_band_limited_traces() {
        use rand::{Rng, SeedableRng};
        let b = build_basis(1, 24).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let coeffs: Vec<f64> = (0..b.num_modes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let t = synthesize(&coeffs, &b).unwrap();
            let sum_sq: f64 = coeffs.iter().map(|c| c * c).sum();
            assert_abs_diff_eq!(sphere_inner(&t, &t), sum_sq, epsilon = 1e-8);
        }
    }

    #[test]
    fn symmetrization_enforces_evenness() {
        let b = build_basis(1, 8).unwrap();
        // raw samples of an uneven function: cos θ + 0.3 sin θ
        let raw: Vec<f64> = b
            .quad
            .nodes
            .iter()
            .map(|nd| nd.angles[0].cos() + 0.3 * nd.angles[0].sin())
            .collect();
        let (t, asym) = Trace::from_node_samples(&b, &raw).unwrap();
        assert!(asym > 0.2);
        for (i, node) in b.quad.nodes.iter().enumerate() {
            assert_abs_diff_eq!(t.samples()[i], t.samples()[node.mirror], epsilon = 1e-12);
        }
        // the odd part is gone, the even part survives
        let p = project(&t, &b).unwrap();
        assert_abs_diff_eq!(p[1], PI.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(p[2], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_file_roundtrip() {
        let dir = std::env::temp_dir().join("thin_obstacle_trace_io");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.trace");
        for (n, k) in [(1usize, 6usize), (2, 3)] {
            let b = build_basis(n, k).unwrap();
            let mut coeffs = vec![0.0; b.num_modes()];
            coeffs[0] = 0.7;
            // an even mode of degree 2 keeps the saved trace symmetric
            let even_slot = b
                .modes
                .iter()
                .find(|m| m.degree == 2 && m.even)
                .unwrap()
                .index;
            coeffs[even_slot] = -0.25;
            let t = synthesize(&coeffs, &b).unwrap();
            save_trace(&t, &path).unwrap();
            let (back, asym) = load_trace(&path).unwrap();
            assert!(asym < 1e-15);
            for (a, c) in back.samples().iter().zip(t.samples()) {
                assert!((a - c).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn half_ring_rule_matches_reference_value() {
        // ∫_{π/2}^{3π/2} |cos a|^{1/2} da = B(3/4, 1/2) = 2.39628046947118441
        let b = build_basis(2, 4).unwrap();
        let v = b.half_ring_weighted_integral(0.0, |_| 1.0);
        assert_abs_diff_eq!(v, 2.396_280_469_471_184_4, epsilon = 1e-12);
        // and against a shifted direction
        let v2 = b.half_ring_weighted_integral(1.234, |_| 1.0);
        assert_abs_diff_eq!(v2, v, epsilon = 1e-12);
    }
}
