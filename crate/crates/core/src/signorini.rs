//! Discrete thin obstacle problem on the half-grid \[-1,1\] × \[0,1\].
//!
//! The continuous problem minimises ∫|∇v|² over functions that are even in
//! x₂, equal to g on the outer boundary and nonnegative on the slice
//! {x₂ = 0}. Even symmetry is encoded structurally: only the upper half is
//! stored, and the vertical second difference on the equator row uses the
//! reflected stencil 2(u_{i,1} - u_{i,0}). The discrete Euler–Lagrange
//! system is then
//!
//! ```text
//! interior:        u_E + u_W + u_N + u_S - 4u = 0
//! equator, free:   u_E + u_W + 2u_N - 4u = 0,  u > 0
//! equator, contact: u = 0,  ρ = u_E + u_W + 2u_N ≤ 0
//! ```
//!
//! i.e. the discrete Laplacian is ≤ 0 on the contact set (the measure term)
//! and the complementarity product u·ρ vanishes. The solver is projected
//! relaxation: a Gauss–Seidel/SOR sweep whose equator updates are clamped at
//! zero. Per-node updates decrease the energy for any ω ∈ (0, 2), so the
//! energy is non-increasing sweep by sweep and the iteration converges to
//! the unique constrained minimiser.

use std::f64::consts::PI;
use std::path::Path;

use crate::{Error, Result};

/// Threshold below which an equator value counts as contact; the projection
/// writes exact zeros, so ten machine epsilons is generous.
pub const CONTACT_THRESHOLD: f64 = 10.0 * f64::EPSILON;

/// Discrete solution on the half-grid, row-major with x fastest.
#[derive(Debug, Clone)]
pub struct GridSolution {
    pub h: f64,
    /// Columns: x = -1 + i·h, i = 0..nx-1.
    pub nx: usize,
    /// Rows: y = j·h, j = 0..ny-1.
    pub ny: usize,
    pub values: Vec<f64>,
    pub tol: f64,
    pub sweeps: usize,
    pub residual: f64,
    pub converged: bool,
}

impl GridSolution {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn x_of(&self, i: usize) -> f64 {
        -1.0 + i as f64 * self.h
    }

    pub fn y_of(&self, j: usize) -> f64 {
        j as f64 * self.h
    }

    /// Bilinear sample with even reflection across the equator.
    pub fn value_at(&self, x: f64, y: f64) -> f64 {
        let y = y.abs();
        let fx = ((x + 1.0) / self.h).clamp(0.0, (self.nx - 1) as f64);
        let fy = (y / self.h).clamp(0.0, (self.ny - 1) as f64);
        let i = (fx as usize).min(self.nx - 2);
        let j = (fy as usize).min(self.ny - 2);
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let v00 = self.at(i, j);
        let v10 = self.at(i + 1, j);
        let v01 = self.at(i, j + 1);
        let v11 = self.at(i + 1, j + 1);
        v00 * (1.0 - tx) * (1.0 - ty)
            + v10 * tx * (1.0 - ty)
            + v01 * (1.0 - tx) * ty
            + v11 * tx * ty
    }

    /// Is the equator node in column i in contact?
    pub fn in_contact(&self, i: usize) -> bool {
        self.at(i, 0) <= CONTACT_THRESHOLD
    }

    /// Reflected stencil sum ρ_i = u_W + u_E + 2u_N - 4u at an equator node.
    fn equator_stencil(&self, i: usize) -> f64 {
        self.at(i - 1, 0) + self.at(i + 1, 0) + 2.0 * self.at(i, 1) - 4.0 * self.at(i, 0)
    }

    /// Discrete gradient at a node: centered differences, one-sided at the
    /// equator row and the outer boundary.
    pub fn grad_at_node(&self, i: usize, j: usize) -> (f64, f64) {
        let ux = if i == 0 {
            (self.at(1, j) - self.at(0, j)) / self.h
        } else if i == self.nx - 1 {
            (self.at(i, j) - self.at(i - 1, j)) / self.h
        } else {
            (self.at(i + 1, j) - self.at(i - 1, j)) / (2.0 * self.h)
        };
        let uy = if j == 0 {
            (self.at(i, 1) - self.at(i, 0)) / self.h
        } else if j == self.ny - 1 {
            (self.at(i, j) - self.at(i, j - 1)) / self.h
        } else {
            (self.at(i, j + 1) - self.at(i, j - 1)) / (2.0 * self.h)
        };
        (ux, uy)
    }

    /// Full-domain Dirichlet energy Σ(Δu)² over edges, with the lower half
    /// counted through the even reflection.
    pub fn dirichlet_energy(&self) -> f64 {
        let mut e = 0.0;
        for j in 0..self.ny {
            let row_weight = if j == 0 { 1.0 } else { 2.0 };
            for i in 0..self.nx - 1 {
                let d = self.at(i + 1, j) - self.at(i, j);
                e += row_weight * d * d;
            }
        }
        for j in 0..self.ny - 1 {
            for i in 0..self.nx {
                let d = self.at(i, j + 1) - self.at(i, j);
                e += 2.0 * d * d;
            }
        }
        e
    }

    /// Max-norm KKT residual: stencil defect at free nodes plus the positive
    /// part of the stencil at contact nodes.
    pub fn kkt_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 1..self.ny - 1 {
            for i in 1..self.nx - 1 {
                let r = self.at(i - 1, j) + self.at(i + 1, j) + self.at(i, j - 1)
                    + self.at(i, j + 1)
                    - 4.0 * self.at(i, j);
                worst = worst.max(r.abs());
            }
        }
        for i in 1..self.nx - 1 {
            let r = self.equator_stencil(i);
            if self.in_contact(i) {
                worst = worst.max(r.max(0.0));
            } else {
                worst = worst.max(r.abs());
            }
        }
        worst
    }

    pub fn sup_error_against(&self, exact: impl Fn(f64, f64) -> f64) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.ny {
            for i in 0..self.nx {
                worst = worst.max((self.at(i, j) - exact(self.x_of(i), self.y_of(j))).abs());
            }
        }
        worst
    }
}

/// Parameters of the projected relaxation.
#[derive(Debug, Clone, Copy)]
pub struct SolveParams {
    pub h: f64,
    pub tol: f64,
    pub max_sweeps: usize,
    /// Relaxation factor ω ∈ (0, 2); 1.0 is Gauss–Seidel.
    pub omega: f64,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            h: 1.0 / 128.0,
            tol: 1e-10,
            max_sweeps: 200_000,
            omega: 1.5,
        }
    }
}

/// Near-optimal SOR factor for spacing h.
pub fn omega_optimal(h: f64) -> f64 {
    2.0 / (1.0 + (PI * h).sin())
}

fn validate_spacing(h: f64) -> Result<usize> {
    let denom = (1.0 / h).round();
    if !(64.0..=512.0).contains(&denom) || (1.0 / h - denom).abs() > 1e-9 {
        return Err(Error::BadSpacing {
            denom: denom.max(0.0) as usize,
        });
    }
    Ok(denom as usize)
}

/// Projected SOR iteration state.
pub struct Solver {
    grid: GridSolution,
    omega: f64,
}

impl Solver {
    /// Set up the grid with boundary data g on the left, right and top
    /// edges. The equator corners must respect the constraint (tiny
    /// negatives are clamped, genuine ones rejected).
    pub fn new(g: &dyn Fn(f64, f64) -> f64, params: SolveParams) -> Result<Solver> {
        let denom = validate_spacing(params.h)?;
        if !(params.omega > 0.0 && params.omega < 2.0) {
            return Err(Error::BadConfig(format!(
                "omega {} outside (0, 2)",
                params.omega
            )));
        }
        let nx = 2 * denom + 1;
        let ny = denom + 1;
        let h = params.h;
        let mut values = vec![0.0; nx * ny];
        let corners = [g(-1.0, 0.0), g(1.0, 0.0)];
        for c in corners {
            if c < -1e-12 {
                return Err(Error::BadBoundaryData(c));
            }
        }
        for j in 0..ny {
            let y = j as f64 * h;
            values[j * nx] = g(-1.0, y);
            values[j * nx + nx - 1] = g(1.0, y);
        }
        for i in 0..nx {
            let x = -1.0 + i as f64 * h;
            values[(ny - 1) * nx + i] = g(x, 1.0);
        }
        // clamp quadrature-level negatives at the pinned equator corners
        values[0] = values[0].max(0.0);
        values[nx - 1] = values[nx - 1].max(0.0);
        Ok(Solver {
            grid: GridSolution {
                h,
                nx,
                ny,
                values,
                tol: params.tol,
                sweeps: 0,
                residual: f64::INFINITY,
                converged: false,
            },
            omega: params.omega,
        })
    }

    /// One projected SOR sweep in lexicographic order, equator row first.
    pub fn sweep(&mut self) {
        let nx = self.grid.nx;
        let ny = self.grid.ny;
        let om = self.omega;
        let v = &mut self.grid.values;
        for i in 1..nx - 1 {
            let gs = 0.25 * (v[i - 1] + v[i + 1] + 2.0 * v[nx + i]);
            let unconstrained = (1.0 - om) * v[i] + om * gs;
            v[i] = unconstrained.max(0.0);
        }
        for j in 1..ny - 1 {
            let row = j * nx;
            for i in 1..nx - 1 {
                let gs = 0.25
                    * (v[row + i - 1] + v[row + i + 1] + v[row - nx + i] + v[row + nx + i]);
                v[row + i] = (1.0 - om) * v[row + i] + om * gs;
            }
        }
        self.grid.sweeps += 1;
    }

    pub fn grid(&self) -> &GridSolution {
        &self.grid
    }

    /// Seed the interior with a bilinear resample of another solution
    /// (typically a coarser run of the same data); boundary rows keep the
    /// Dirichlet values. The fixed point is unchanged, the sweep count of a
    /// refinement ladder drops substantially.
    pub fn warm_start(&mut self, source: &GridSolution) {
        let nx = self.grid.nx;
        for j in 0..self.grid.ny - 1 {
            for i in 1..nx - 1 {
                let v = source.value_at(self.grid.x_of(i), self.grid.y_of(j));
                self.grid.values[j * nx + i] = if j == 0 { v.max(0.0) } else { v };
            }
        }
    }

    /// Current state as a solution record (residual refreshed).
    pub fn snapshot(&mut self) -> GridSolution {
        self.grid.residual = self.grid.kkt_residual();
        self.grid.converged = self.grid.residual <= self.grid.tol;
        self.grid.clone()
    }

    /// Iterate until the KKT residual drops below tol.
    pub fn run(&mut self, max_sweeps: usize) -> Result<GridSolution> {
        let check_every = 16;
        loop {
            for _ in 0..check_every {
                self.sweep();
                if self.grid.sweeps >= max_sweeps {
                    break;
                }
            }
            let res = self.grid.kkt_residual();
            if res <= self.grid.tol {
                self.grid.residual = res;
                self.grid.converged = true;
                return Ok(self.grid.clone());
            }
            if self.grid.sweeps >= max_sweeps {
                return Err(Error::NotConverged {
                    residual: res,
                    sweeps: self.grid.sweeps,
                });
            }
        }
    }
}

/// Solve the discrete thin obstacle problem with boundary data g.
pub fn solve(g: &dyn Fn(f64, f64) -> f64, params: SolveParams) -> Result<GridSolution> {
    let mut solver = Solver::new(g, params)?;
    solver.run(params.max_sweeps)
}

/// Free boundary: interior equator positions where the contact state
/// changes, reported at the midpoint of the bracketing node pair. The
/// pinned corner columns belong to ∂B₁, not to the slice.
pub fn free_boundary(s: &GridSolution) -> Vec<f64> {
    let mut points = Vec::new();
    for i in 1..s.nx - 2 {
        if s.in_contact(i) != s.in_contact(i + 1) {
            points.push(s.x_of(i) + 0.5 * s.h);
        }
    }
    points
}

/// Defect measures of the three Euler–Lagrange families.
#[derive(Debug, Clone, Copy)]
pub struct Residuals {
    /// max |stencil| over non-contact nodes (interior and free equator).
    pub harmonic: f64,
    /// max |u · ρ/(2h)| over equator nodes — the complementarity product
    /// against the discrete one-sided normal derivative.
    pub complementarity: f64,
    /// positive part of the stencil at contact nodes (the measure must be ≤ 0).
    pub sign: f64,
}

pub fn residuals(s: &GridSolution) -> Residuals {
    let mut harmonic = 0.0f64;
    let mut complementarity = 0.0f64;
    let mut sign = 0.0f64;
    for j in 1..s.ny - 1 {
        for i in 1..s.nx - 1 {
            let r = s.at(i - 1, j) + s.at(i + 1, j) + s.at(i, j - 1) + s.at(i, j + 1)
                - 4.0 * s.at(i, j);
            harmonic = harmonic.max(r.abs());
        }
    }
    for i in 1..s.nx - 1 {
        let rho = s.equator_stencil(i);
        complementarity = complementarity.max((s.at(i, 0) * rho / (2.0 * s.h)).abs());
        if s.in_contact(i) {
            sign = sign.max(rho.max(0.0));
        } else {
            harmonic = harmonic.max(rho.abs());
        }
    }
    Residuals {
        harmonic,
        complementarity,
        sign,
    }
}

// ---------------------------------------------------------------------------
// Grid file round-trip
// ---------------------------------------------------------------------------

/// Text grid file: a `key=value` header line, then ny rows of nx values.
pub fn save_grid(s: &GridSolution, path: &Path) -> Result<()> {
    use std::io::Write;
    let mut out = String::with_capacity(s.values.len() * 26);
    out.push_str(&format!(
        "h={:.17e} nx={} ny={} tol={:.17e} sweeps={}\n",
        s.h, s.nx, s.ny, s.tol, s.sweeps
    ));
    for j in 0..s.ny {
        let mut first = true;
        for i in 0..s.nx {
            if !first {
                out.push(' ');
            }
            out.push_str(&format!("{:.17e}", s.at(i, j)));
            first = false;
        }
        out.push('\n');
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

pub fn load_grid(path: &Path) -> Result<GridSolution> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty grid file".into()))?;
    let mut h = None;
    let mut nx = None;
    let mut ny = None;
    let mut tol = 1e-10;
    let mut sweeps = 0usize;
    for field in header.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header field `{field}`")))?;
        match k {
            "h" => h = v.parse::<f64>().ok(),
            "nx" => nx = v.parse::<usize>().ok(),
            "ny" => ny = v.parse::<usize>().ok(),
            "tol" => tol = v.parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?,
            "sweeps" => sweeps = v.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?,
            _ => {}
        }
    }
    let (h, nx, ny) = match (h, nx, ny) {
        (Some(h), Some(nx), Some(ny)) => (h, nx, ny),
        _ => return Err(Error::Parse("grid header needs h, nx, ny".into())),
    };
    let mut values = Vec::with_capacity(nx * ny);
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        for tok in line.split_whitespace() {
            values.push(
                tok.parse::<f64>()
                    .map_err(|e| Error::Parse(e.to_string()))?,
            );
        }
    }
    if values.len() != nx * ny {
        return Err(Error::Parse(format!(
            "{} values for {nx}×{ny} grid",
            values.len()
        )));
    }
    let mut g = GridSolution {
        h,
        nx,
        ny,
        values,
        tol,
        sweeps,
        residual: f64::INFINITY,
        converged: false,
    };
    g.residual = g.kkt_residual();
    g.converged = g.residual <= g.tol;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homog::half_plane_profile_value;

    fn he_plane(x: f64, y: f64) -> f64 {
        half_plane_profile_value(x, y.abs())
    }

    fn params(denom: usize, tol: f64) -> SolveParams {
        SolveParams {
            h: 1.0 / denom as f64,
            tol,
            max_sweeps: 400_000,
            omega: omega_optimal(1.0 / denom as f64),
        }
    }

    #[test]
    fn harmonic_affine_is_reproduced_exactly() {
        // 1 + x is discrete harmonic and positive on the equator interior:
        // the constraint is inactive and the linear data is grid-exact.
        let s = solve(&|x, _| 1.0 + x, params(64, 1e-13)).unwrap();
        assert!(s.converged);
        let err = s.sup_error_against(|x, _| 1.0 + x);
        assert!(err < 1e-10, "sup error {err}");
        assert!((1..s.nx - 1).all(|i| !s.in_contact(i)));
        assert!(free_boundary(&s).is_empty());
    }

    #[test]
    fn negative_absolute_value_is_grid_exact() {
        // -|x₂| restricted to the half grid is -y: linear, contact everywhere,
        // and the solution is exact up to the iteration tolerance.
        let s = solve(&|_, y| -y, params(64, 1e-13)).unwrap();
        let err = s.sup_error_against(|_, y| -y);
        assert!(err < 1e-10, "sup error {err}");
        assert!((1..s.nx - 1).all(|i| s.in_contact(i)));
        assert!(free_boundary(&s).is_empty());
        // the equator stencil is -2h < 0: strictly inside the measure sign
        let r = residuals(&s);
        assert!(r.sign <= 1e-12);
        assert!(r.complementarity <= 1e-12);
    }

    #[test]
    fn he_solution_and_free_boundary() {
        let s = solve(&he_plane, params(64, 1e-12)).unwrap();
        let err = s.sup_error_against(he_plane);
        assert!(err < 3.0 * s.h, "sup error {err} at h = {}", s.h);
        // contact occupies the x ≤ O(h) half of the equator
        let fb = free_boundary(&s);
        assert_eq!(fb.len(), 1, "free boundary: {fb:?}");
        assert!(fb[0].abs() <= 2.0 * s.h, "Γ at {}", fb[0]);
        let r = residuals(&s);
        assert!(r.harmonic <= 1e-12);
        assert!(r.sign <= 1e-12);
        assert!(r.complementarity <= 1e-10);
    }

    #[test]
    fn unconverged_run_reports_state() {
        let mut solver = Solver::new(&he_plane, params(64, 1e-12)).unwrap();
        solver.sweep();
        let snap = solver.snapshot();
        assert!(!snap.converged);
        assert!(snap.residual > 1e-12);
        assert_eq!(snap.sweeps, 1);
        // and the strict driver errors out under a sweep budget
        let mut solver = Solver::new(&he_plane, params(64, 1e-12)).unwrap();
        assert!(matches!(
            solver.run(1),
            Err(Error::NotConverged { sweeps: 1, .. })
        ));
    }

    #[test]
    fn energy_is_monotone_across_sweeps() {
        for omega in [1.0, 1.5, 1.9] {
            let mut p = params(64, 1e-12);
            p.omega = omega;
            let mut solver = Solver::new(&he_plane, p).unwrap();
            let mut prev = solver.grid().dirichlet_energy();
            for _ in 0..200 {
                solver.sweep();
                let e = solver.grid().dirichlet_energy();
                assert!(
                    e <= prev + 1e-12,
                    "energy rose from {prev} to {e} at ω = {omega}"
                );
                prev = e;
            }
        }
    }

    #[test]
    fn comparison_principle_on_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..5 {
            let a = rng.gen_range(0.2..0.8);
            let b = rng.gen_range(-0.5..0.5);
            let c = rng.gen_range(0.0..0.6);
            let g1 = move |x: f64, y: f64| a + b * x + c * (x * x - y * y);
            let bump = rng.gen_range(0.0..0.7);
            let g2 = move |x: f64, y: f64| g1(x, y) + bump * (2.0 - x * x);
            let lift = |g: &dyn Fn(f64, f64) -> f64| {
                // make the corners admissible by a constant shift
                let m = g(-1.0, 0.0).min(g(1.0, 0.0)).min(0.0);
                let g = move |x: f64, y: f64| g(x, y) - m;
                solve(&g, params(64, 1e-11)).unwrap()
            };
            let s1 = lift(&g1);
            let s2 = lift(&g2);
            for (v1, v2) in s1.values.iter().zip(&s2.values) {
                assert!(*v1 <= v2 + 1e-9, "{v1} > {v2}");
            }
        }
    }

    #[test]
    fn warm_start_reaches_the_same_fixed_point_faster() {
        let cold = solve(&he_plane, params(128, 1e-12)).unwrap();
        let coarse = solve(&he_plane, params(64, 1e-12)).unwrap();
        let mut solver = Solver::new(&he_plane, params(128, 1e-12)).unwrap();
        solver.warm_start(&coarse);
        let warm = solver.run(400_000).unwrap();
        assert!(warm.sweeps < cold.sweeps / 2, "{} vs {}", warm.sweeps, cold.sweeps);
        for (a, b) in warm.values.iter().zip(&cold.values) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn mesh_refinement_halves_the_error() {
        let mut errors = Vec::new();
        for denom in [64usize, 128, 256] {
            let s = solve(&he_plane, params(denom, 1e-12)).unwrap();
            errors.push(s.sup_error_against(he_plane));
        }
        assert!(
            errors[0] / errors[1] >= 2.0,
            "ratio {} at 1/64→1/128",
            errors[0] / errors[1]
        );
        assert!(
            errors[1] / errors[2] >= 2.0,
            "ratio {} at 1/128→1/256",
            errors[1] / errors[2]
        );
    }

    #[test]
    fn spacing_and_boundary_preconditions() {
        assert!(matches!(
            solve(&he_plane, SolveParams {
                h: 1.0 / 32.0,
                ..Default::default()
            }),
            Err(Error::BadSpacing { .. })
        ));
        assert!(matches!(
            solve(&|_, _| -1.0, params(64, 1e-10)),
            Err(Error::BadBoundaryData(_))
        ));
    }

    #[test]
    fn grid_file_roundtrip() {
        let s = solve(&he_plane, params(64, 1e-10)).unwrap();
        let dir = std::env::temp_dir().join("thin_obstacle_grid_io");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("he.grid");
        save_grid(&s, &path).unwrap();
        let back = load_grid(&path).unwrap();
        assert_eq!(back.nx, s.nx);
        assert_eq!(back.ny, s.ny);
        assert_eq!(back.sweeps, s.sweeps);
        for (a, b) in back.values.iter().zip(&s.values) {
            assert_eq!(a, b, "17-digit round trip must be exact");
        }
    }
}
