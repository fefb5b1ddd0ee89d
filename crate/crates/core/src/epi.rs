//! Trace decomposition, explicit competitor, and the epiperimetric
//! inequality verifier for negative Weiss energies W_{3/2}.
//!
//! Every even admissible trace splits as
//!
//! ```text
//! c(θ) = C·h_e(θ) + c₀·u₀(θ) + φ(θ),        C ≥ 0,
//! ```
//!
//! where e is the direction of the degree-1 projection of c, C·h_e matches
//! that projection, c₀·u₀ matches the residual mean, and φ carries only
//! eigenmodes of degree ≥ 2. The competitor to the 3/2-homogeneous
//! extension z = r^{3/2}c is
//!
//! ```text
//! ζ(r,θ) = C·r^{3/2}h_e(θ) + c₀·r·u₀(θ) + r^{3/2}φ(θ),
//! ```
//!
//! which shares the trace of z on ∂B₁ and its values on the equatorial
//! slice (u₀ vanishes there). The verifier evaluates
//!
//! ```text
//! W_{3/2}(ζ) - (1+ε)·W_{3/2}(z) = I + J + K + L,      ε = 1/(2n+3),
//! ```
//!
//! with I the u₀ self-block, J = -ε·W_{3/2}(r^{3/2}φ) ≤ 0, K the u₀-φ cross
//! block and L the h_e-φ cross block. At ε = 1/(2n+3) both I and K vanish
//! identically — in this implementation they cancel in exact arithmetic no
//! matter what the underlying quadrature returns, because every pairing
//! against h_e and u₀ goes through their distributional eigen-identities.
//! L reduces to the equatorial integral
//! -6Cε/(n+2) · ∫_{ring ∩ {θ'·e<0}} φ |θ'·e|^{1/2}, which is ≤ 0 whenever c
//! is admissible, since φ = c on that half of the equator.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;

use crate::homog::{
    he_trace_az, special_tables, u0_trace, weiss, weiss_cross, HomogeneousFn,
    PiecewiseHomogeneousFn,
};
use crate::spharm::{synthesize, EigenBasis, Trace};
use crate::{Error, Result};

/// Equator values below -ADMISSIBILITY_TOL reject a trace; anything in
/// [-ADMISSIBILITY_TOL, 0) is treated as quadrature noise and clamped.
pub const ADMISSIBILITY_TOL: f64 = 1e-10;

/// Tolerance on the ledger identity W_ζ - (1+ε)W_z = I+J+K+L.
pub const LEDGER_TOL: f64 = 1e-8;

/// |W_ζ - (1+ε)W_z| below this counts as the equality case.
pub const EQUALITY_TOL: f64 = 1e-9;

/// Slack added to the inequality check to absorb rounding.
pub const PASS_SLACK: f64 = 1e-9;

/// The dimensional constant ε = 1/(2n+3).
pub fn epsilon_for(n: usize) -> f64 {
    1.0 / (2.0 * n as f64 + 3.0)
}

/// The decomposition c = C·h_e + c₀·u₀ + φ.
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Unit direction in the equatorial plane (n components meaningful).
    pub e: [f64; 2],
    pub e_az: f64,
    /// C ≥ 0, the h_e amplitude.
    pub c_he: f64,
    /// c₀, the u₀ amplitude.
    pub c_u0: f64,
    /// Remainder, orthogonal to degrees 0 and 1.
    pub phi: Trace,
    /// h_e for this direction, unit amplitude.
    pub he: Trace,
    /// u₀, unit amplitude.
    pub u0: Trace,
}

impl Decomposition {
    /// L²(∂B₁) norm of the remainder.
    pub fn phi_norm(&self) -> f64 {
        crate::spharm::sphere_inner(&self.phi, &self.phi).max(0.0).sqrt()
    }

    /// C·h_e + c₀·u₀ + φ, which reproduces the input trace.
    pub fn reconstruct(&self) -> Trace {
        Trace::combination(&[
            (self.c_he, &self.he),
            (self.c_u0, &self.u0),
            (1.0, &self.phi),
        ])
    }
}

fn project_onto(c: &Trace, indices: &[usize]) -> Vec<f64> {
    let basis = c.basis();
    let mut vals = vec![0.0; basis.num_modes()];
    let mut out = vec![0.0; indices.len()];
    for (node, &s) in basis.quad.nodes.iter().zip(c.samples()) {
        basis.mode_values_at(node.angles, &mut vals);
        for (o, &idx) in out.iter_mut().zip(indices) {
            *o += node.weight * s * vals[idx];
        }
    }
    out
}

/// Decompose an even admissible trace as C·h_e + c₀·u₀ + φ.
///
/// The direction e is the unit direction of the degree-1 projection of c
/// (with a fixed tie-break toward +x₁ when that projection vanishes, in
/// which case C = 0 and h_e does not enter). For n = 2 the direction is
/// polished by a few fixed-point steps so that the discrete degree-1
/// projection of h_e aligns with that of c to machine precision; this keeps
/// φ orthogonal to the low modes at the 1e-10 level.
///
/// A trace made of raw samples carries no structure beyond its basis
/// projection, so it is band-limited first; the decomposition (and every
/// energy downstream) then refers to that projection.
pub fn decompose(c: &Trace) -> Result<Decomposition> {
    if matches!(c.kind(), crate::spharm::TraceKind::Generic) {
        let projected = synthesize(c.coefficients(), c.basis())?;
        return decompose(&projected);
    }
    let basis = c.basis().clone();
    let n = basis.ambient_n;
    let min = c.min_ring_value();
    if min < -ADMISSIBILITY_TOL {
        return Err(Error::InadmissibleTrace { min });
    }
    let tables = special_tables(&basis);
    let u0_mean = tables.u0_mean;
    let deg1 = basis.equatorial_degree1();
    let coeffs = c.coefficients().to_vec();
    let v: Vec<f64> = deg1.iter().map(|&i| coeffs[i]).collect();
    let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();

    let (e_az, c_he, he) = if vnorm < 1e-13 {
        (0.0, 0.0, he_trace_az(0.0, &basis))
    } else {
        let mut e_az = match n {
            1 => {
                if v[0] >= 0.0 {
                    0.0
                } else {
                    PI
                }
            }
            _ => v[1].atan2(v[0]),
        };
        let mut he = he_trace_az(e_az, &basis);
        if n == 2 {
            let target = v[1].atan2(v[0]);
            for _ in 0..12 {
                let w = project_onto(&he, &deg1);
                let misalign = angle_diff(target, w[1].atan2(w[0]));
                if misalign.abs() < 1e-14 {
                    break;
                }
                e_az += misalign;
                he = he_trace_az(e_az, &basis);
            }
        }
        let w = project_onto(&he, &deg1);
        let wnorm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        (e_az, vnorm / wnorm, he)
    };

    let u0 = u0_trace(&basis);
    let he_mean = project_onto(&he, &[basis.const_index()])[0];
    let c_u0 = (coeffs[basis.const_index()] - c_he * he_mean) / u0_mean;
    let phi = Trace::combination(&[(1.0, c), (-c_he, &he), (-c_u0, &u0)]);
    Ok(Decomposition {
        e: [e_az.cos(), e_az.sin()],
        e_az,
        c_he,
        c_u0,
        phi,
        he,
        u0,
    })
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let mut d = a - b;
    while d > PI {
        d -= 2.0 * PI;
    }
    while d < -PI {
        d += 2.0 * PI;
    }
    d
}

/// The explicit competitor ζ = C·r^{3/2}h_e + c₀·r·u₀ + r^{3/2}φ.
///
/// Blocks with vanishing amplitude are dropped, so `competitor` of a pure
/// u₀ trace is the single term (1, u₀).
pub fn competitor(d: &Decomposition) -> PiecewiseHomogeneousFn {
    let mut terms = Vec::new();
    if d.c_he.abs() > 1e-14 {
        terms.push(HomogeneousFn::new(1.5, d.he.scaled(d.c_he)));
    }
    if d.c_u0.abs() > 1e-14 {
        terms.push(HomogeneousFn::new(1.0, d.u0.scaled(d.c_u0)));
    }
    let phi_sup = d.phi.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if phi_sup > 1e-12 {
        terms.push(HomogeneousFn::new(1.5, d.phi.clone()));
    }
    PiecewiseHomogeneousFn { terms }
}

/// Verifier record for one trace.
#[derive(Debug, Clone)]
pub struct EpiReport {
    pub n: usize,
    pub eps: f64,
    pub w_z: f64,
    pub w_zeta: f64,
    pub term_i: f64,
    pub term_j: f64,
    pub term_k: f64,
    pub term_l: f64,
    pub passed: bool,
    pub equality: bool,
}

impl EpiReport {
    /// Defect of the ledger identity W_ζ - (1+ε)W_z = I+J+K+L.
    pub fn ledger_residual(&self) -> f64 {
        self.w_zeta
            - (1.0 + self.eps) * self.w_z
            - (self.term_i + self.term_j + self.term_k + self.term_l)
    }
}

/// Run the epiperimetric check at the dimensional constant ε = 1/(2n+3).
pub fn check(c: &Trace) -> Result<EpiReport> {
    Ok(check_detailed(c, None)?.0)
}

/// Epiperimetric check with an explicit ε (the sharpness probe); returns the
/// decomposition along with the report.
pub fn check_detailed(c: &Trace, eps_override: Option<f64>) -> Result<(EpiReport, Decomposition)> {
    let d = decompose(c)?;
    let n = c.ambient_n();
    let eps = eps_override.unwrap_or_else(|| epsilon_for(n));

    let he_block = HomogeneousFn::new(1.5, d.he.scaled(d.c_he));
    let u0_z = HomogeneousFn::new(1.5, d.u0.scaled(d.c_u0));
    let u0_zeta = HomogeneousFn::new(1.0, d.u0.scaled(d.c_u0));
    let phi_block = HomogeneousFn::new(1.5, d.phi.clone());

    let z = PiecewiseHomogeneousFn {
        terms: vec![he_block.clone(), u0_z, phi_block.clone()],
    };
    let zeta = PiecewiseHomogeneousFn {
        terms: vec![he_block, u0_zeta, phi_block],
    };
    let w_z = weiss(&z, 1.5);
    let w_zeta = weiss(&zeta, 1.5);

    // ledger terms from unit-amplitude blocks
    let u0_unit_1 = HomogeneousFn::new(1.0, d.u0.clone());
    let u0_unit_32 = HomogeneousFn::new(1.5, d.u0.clone());
    let he_unit = HomogeneousFn::new(1.5, d.he.clone());
    let phi_32 = HomogeneousFn::new(1.5, d.phi.clone());

    let w_1_u0 = weiss(&PiecewiseHomogeneousFn::single(1.0, d.u0.clone()), 1.5);
    let w_32_u0 = weiss(&PiecewiseHomogeneousFn::single(1.5, d.u0.clone()), 1.5);
    let term_i = d.c_u0 * d.c_u0 * (w_1_u0 - (1.0 + eps) * w_32_u0);

    let w_phi = weiss(&PiecewiseHomogeneousFn::single(1.5, d.phi.clone()), 1.5);
    let term_j = -eps * w_phi;

    let x_u0_phi_1 = weiss_cross(&u0_unit_1, &phi_32);
    let x_u0_phi_32 = weiss_cross(&u0_unit_32, &phi_32);
    let term_k = 2.0 * d.c_u0 * (x_u0_phi_1 - (1.0 + eps) * x_u0_phi_32);

    let x_he_phi = weiss_cross(&he_unit, &phi_32);
    let term_l = -2.0 * d.c_he * eps * x_he_phi;

    let diff = w_zeta - (1.0 + eps) * w_z;
    let report = EpiReport {
        n,
        eps,
        w_z,
        w_zeta,
        term_i,
        term_j,
        term_k,
        term_l,
        passed: diff <= PASS_SLACK,
        equality: diff.abs() <= EQUALITY_TOL,
    };
    Ok((report, d))
}

/// Equality case: true iff |W_ζ - (1+ε)W_z| ≤ 1e-9, in which case J = 0
/// forces the remainder to vanish; the implication is asserted.
pub fn equality_case(r: &EpiReport, d: &Decomposition) -> bool {
    let eq = (r.w_zeta - (1.0 + r.eps) * r.w_z).abs() <= EQUALITY_TOL;
    if eq {
        let phi = d.phi_norm();
        assert!(
            phi <= 1e-6,
            "equality case with nonvanishing remainder: ‖φ‖ = {phi:.3e}"
        );
    }
    eq
}

/// One step of the frequency-gap chain for the trace of a (3/2+t)-homogeneous
/// solution, t < 0.
#[derive(Debug, Clone, Copy)]
pub struct GapChain {
    /// W_{3/2}(r^{3/2+t}c) = t‖c‖².
    pub lhs: f64,
    /// (1+ε)·W_{3/2}(r^{3/2}c) = (1+ε)(1+t/(n+2))·t‖c‖².
    pub rhs: f64,
    /// (1+ε)(1+t/(n+2)); the chain is consistent iff this is ≤ 1.
    pub factor: f64,
    /// factor ≤ 1, equivalently t ≤ -1/2.
    pub admissible: bool,
}

/// Evaluate both sides of W(r^{3/2+t}c) ≤ (1+ε)(1+t/(n+2))·W(r^{3/2+t}c).
/// Since the energy is negative for t < 0, the inequality collapses to the
/// scalar condition (1+ε)(1+t/(n+2)) ≤ 1, i.e. t ≤ -1/2.
pub fn gap_chain(t: f64, c: &Trace, n: usize) -> Result<GapChain> {
    if t >= 0.0 {
        return Err(Error::NonNegativeShift(t));
    }
    if n != c.ambient_n() {
        return Err(Error::DimensionMismatch(format!(
            "gap chain for n = {n} on a trace with ambient n = {}",
            c.ambient_n()
        )));
    }
    let (w_shift, w_32) = crate::homog::weiss_shift_identities(t, c)?;
    let factor = chain_factor(t, n);
    Ok(GapChain {
        lhs: w_shift,
        rhs: (1.0 + epsilon_for(n)) * w_32,
        factor,
        admissible: factor <= 1.0 + 1e-12,
    })
}

/// (1+ε)(1+t/(n+2)) with ε = 1/(2n+3); equals 1 exactly at t = -1/2.
pub fn chain_factor(t: f64, n: usize) -> f64 {
    (1.0 + epsilon_for(n)) * (1.0 + t / (n as f64 + 2.0))
}

/// Draw a random admissible band-limited even trace: Gaussian coefficients
/// on the even modes up to `max_degree` with a mild spectral decay, lifted
/// by a constant when needed so the equator values stay positive.
pub fn random_admissible_trace(
    basis: &Arc<EigenBasis>,
    rng: &mut impl Rng,
    max_degree: usize,
) -> Trace {
    let mut coeffs = vec![0.0; basis.num_modes()];
    for mode in &basis.modes {
        if mode.even && mode.degree <= max_degree {
            let scale = 1.0 / (1.0 + mode.eigenvalue).sqrt();
            coeffs[mode.index] = scale * rng.gen_range(-1.0..1.0);
        }
    }
    let t = synthesize(&coeffs, basis).expect("coefficient count matches basis");
    let min = t.min_ring_value();
    let margin = 0.01;
    if min < margin {
        // raise the constant mode so the equator clears zero
        let const_value = 1.0 / surface_area(basis.ambient_n).sqrt();
        coeffs[basis.const_index()] += (margin - min) / const_value;
        return synthesize(&coeffs, basis).expect("coefficient count matches basis");
    }
    t
}

fn surface_area(n: usize) -> f64 {
    match n {
        1 => 2.0 * PI,
        2 => 4.0 * PI,
        _ => unreachable!(),
    }
}
