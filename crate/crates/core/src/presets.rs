//! Named boundary-data presets for the solver and the diagnostics suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::homog::half_plane_profile_value;
use crate::{Error, Result};

/// A boundary-data preset: a closed form g(x, y), even in y, used both as
/// Dirichlet data on the outer boundary and (where known) as the exact
/// reference solution.
#[derive(Debug, Clone)]
pub enum Preset {
    /// Re((x·e + i|y|)^{3/2}) with e = sign·x₁.
    He { sign: f64 },
    /// -|x₂|: the 1-homogeneous solution with full contact.
    AbsX2,
    /// 1 + x: harmonic, positive on the equator, constraint inactive.
    HarmonicAffine,
    /// Seeded random admissible boundary data with a nonempty contact set:
    /// a shifted half-plane profile plus small even harmonic polynomials.
    RandomTrace { seed: u64 },
}

impl Preset {
    pub fn name(&self) -> String {
        match self {
            Preset::He { sign } if *sign >= 0.0 => "he".into(),
            Preset::He { .. } => "he(-)".into(),
            Preset::AbsX2 => "abs-x2".into(),
            Preset::HarmonicAffine => "harmonic-affine".into(),
            Preset::RandomTrace { seed } => format!("random-trace[{seed}]"),
        }
    }

    /// Evaluate the boundary data (and reference field) at a point.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Preset::He { sign } => half_plane_profile_value(sign * x, y.abs()),
            Preset::AbsX2 => -y.abs(),
            Preset::HarmonicAffine => 1.0 + x,
            Preset::RandomTrace { seed } => {
                let p = RandomBoundary::from_seed(*seed);
                p.eval(x, y)
            }
        }
    }

    /// Closure form, with random presets expanded once.
    pub fn boundary_fn(&self) -> Box<dyn Fn(f64, f64) -> f64 + Send + Sync> {
        match self {
            Preset::He { sign } => {
                let s = *sign;
                Box::new(move |x, y| half_plane_profile_value(s * x, y.abs()))
            }
            Preset::AbsX2 => Box::new(|_, y| -y.abs()),
            Preset::HarmonicAffine => Box::new(|x, _| 1.0 + x),
            Preset::RandomTrace { seed } => {
                let p = RandomBoundary::from_seed(*seed);
                Box::new(move |x, y| p.eval(x, y))
            }
        }
    }

    /// Does the preset have a known exact solution on the half grid?
    pub fn exact_solution(&self) -> Option<Box<dyn Fn(f64, f64) -> f64 + Send + Sync>> {
        match self {
            Preset::He { .. } | Preset::AbsX2 | Preset::HarmonicAffine => {
                Some(self.boundary_fn())
            }
            Preset::RandomTrace { .. } => None,
        }
    }
}

/// Deterministic random admissible boundary data.
///
/// g = amp·h_e(±(x - c), y) + Σ small even harmonic polynomials + lift,
/// with the lift chosen so the equator corners stay admissible while the
/// profile keeps a contact segment in the interior.
#[derive(Debug, Clone)]
struct RandomBoundary {
    sign: f64,
    shift: f64,
    amp: f64,
    quad: f64,
    cubic: f64,
    lift: f64,
}

impl RandomBoundary {
    fn from_seed(seed: u64) -> RandomBoundary {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let shift = rng.gen_range(-0.35..0.35);
        let amp = rng.gen_range(0.6..1.6);
        let quad = amp * rng.gen_range(-0.12..0.12);
        let cubic = amp * rng.gen_range(-0.08..0.08);
        let mut p = RandomBoundary {
            sign,
            shift,
            amp,
            quad,
            cubic,
            lift: 0.0,
        };
        // keep the pinned equator corners admissible
        let corner = p.eval(-1.0, 0.0).min(p.eval(1.0, 0.0));
        if corner < 0.0 {
            p.lift = -corner;
        }
        p
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        let he = half_plane_profile_value(self.sign * (x - self.shift), y.abs());
        // Re((x-c+iy)²) and Re((x-c+iy)³): harmonic, even in y
        let dx = x - self.shift;
        let re2 = dx * dx - y * y;
        let re3 = dx * dx * dx - 3.0 * dx * y * y;
        self.amp * he + self.quad * re2 + self.cubic * re3 + self.lift
    }
}

/// Registered preset names with one-line descriptions, in stable order.
pub fn list_presets() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "he",
            "3/2-homogeneous half-plane profile Re((x'·e + i|x_{n+1}|)^{3/2}), e = +x1 (use he:- for -x1)",
        ),
        ("abs-x2", "-|x2|, the 1-homogeneous full-contact solution"),
        ("harmonic-affine", "1 + x1: harmonic with inactive constraint"),
        (
            "random-trace",
            "seeded admissible boundary data with an interior contact segment (random-trace:SEED)",
        ),
        ("file", "boundary data loaded from a saved grid file (file:PATH)"),
    ]
}

/// Parse `name` or `name:arg` into a preset.
pub fn parse_preset(spec: &str) -> Result<Preset> {
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    match name {
        "he" => Ok(Preset::He {
            sign: match arg {
                Some("-") | Some("-1") => -1.0,
                _ => 1.0,
            },
        }),
        "abs-x2" => Ok(Preset::AbsX2),
        "harmonic-affine" => Ok(Preset::HarmonicAffine),
        "random-trace" => {
            let seed = arg
                .map(|a| {
                    a.parse::<u64>()
                        .map_err(|_| Error::Parse(format!("bad seed `{a}`")))
                })
                .transpose()?
                .unwrap_or(1);
            Ok(Preset::RandomTrace { seed })
        }
        _ => Err(Error::UnknownPreset(spec.to_string())),
    }
}
