//! Ground functions `g: R^2 -> R`.
//!
//! A [`Ground`] is an immutable height field together with what is known
//! about its Lipschitz constant. Analytic builtins carry their exact constant;
//! gridded heightmaps carry the exact constant of their bilinear interpolant;
//! sums carry the (possibly loose) sum of their parts.
//!
//! Grounds are built either directly through the constructors below or from a
//! textual descriptor via [`parse_ground`]. Every parseable ground prints back
//! to its canonical descriptor through `Display`.

mod bumps;
mod grid;
mod parse;

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use bumps::{Bump, Bumps};
pub use grid::{load_grid, GridError, GridGround};
pub use parse::{describe_kinds, parse_ground, ParseError, ParseErrorKind};

/// A ground function with its metadata.
#[derive(Clone, Debug, PartialEq)]
pub enum Ground {
    /// `g = 0`.
    Flat,
    /// `g = sx*x + sy*y`.
    Plane { sx: f64, sy: f64 },
    /// Conical hill of the given apex height over the disc of the given
    /// radius; coincides with the xy-plane outside it.
    Cone { height: f64, radius: f64 },
    /// `g = -slope*|y|`: two half-planes meeting in a crest along the x-axis.
    Ridge { slope: f64 },
    /// Four quadrants, alternately at `high` (first and third) and `low`.
    /// The only discontinuous builtin.
    Cliff { low: f64, high: f64 },
    /// `g = amplitude * cos(2*pi*rho / wavelength)` with `rho = |(x, y)|`.
    Radial { amplitude: f64, wavelength: f64 },
    /// Sum of Gaussian bumps.
    Bumps(Bumps),
    /// Upper McShane envelope `min_i (z_i + slope*|P - p_i|)` of a set of
    /// anchor points: the highest ground of the given Lipschitz constant that
    /// passes through all anchors.
    Envelope(Envelope),
    /// Bilinear heightmap.
    Grid(GridGround),
    /// Pointwise sum of two or more grounds.
    Sum(Vec<Ground>),
}

/// Anchor set of an [`Ground::Envelope`].
#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    pub slope: f64,
    pub anchors: Vec<[f64; 3]>,
}

impl Ground {
    pub fn plane(sx: f64, sy: f64) -> Self {
        Ground::Plane { sx, sy }
    }

    pub fn cone(height: f64, radius: f64) -> Self {
        assert!(radius > 0.0, "cone radius must be positive");
        Ground::Cone { height, radius }
    }

    pub fn ridge(slope: f64) -> Self {
        Ground::Ridge { slope }
    }

    pub fn cliff() -> Self {
        Ground::Cliff {
            low: 1.0,
            high: 2.0,
        }
    }

    pub fn radial(amplitude: f64, wavelength: f64) -> Self {
        assert!(wavelength > 0.0, "radial wavelength must be positive");
        Ground::Radial {
            amplitude,
            wavelength,
        }
    }

    /// Random Gaussian bumps rescaled so the derived Lipschitz bound equals
    /// `target`. See [`Bumps::with_target`].
    pub fn bumps(seed: u64, count: usize, sigma: f64, target: f64) -> Self {
        Ground::Bumps(Bumps::with_target(seed, count, sigma, target))
    }

    pub fn envelope(slope: f64, anchors: Vec<[f64; 3]>) -> Self {
        assert!(!anchors.is_empty(), "envelope needs at least one anchor");
        Ground::Envelope(Envelope { slope, anchors })
    }

    pub fn sum(parts: Vec<Ground>) -> Self {
        Ground::Sum(parts)
    }

    /// Ground height at `(x, y)`. Total for finite inputs and deterministic.
    pub fn height(&self, x: f64, y: f64) -> f64 {
        match self {
            Ground::Flat => 0.0,
            Ground::Plane { sx, sy } => sx * x + sy * y,
            Ground::Cone { height, radius } => {
                let rho = x.hypot(y);
                if rho >= *radius {
                    0.0
                } else {
                    height * (1.0 - rho / radius)
                }
            }
            Ground::Ridge { slope } => -slope * y.abs(),
            Ground::Cliff { low, high } => {
                let mut angle = y.atan2(x);
                if angle < 0.0 {
                    angle += TAU;
                }
                if angle < 0.5 * PI || (PI..1.5 * PI).contains(&angle) {
                    *high
                } else {
                    *low
                }
            }
            Ground::Radial {
                amplitude,
                wavelength,
            } => amplitude * (TAU * x.hypot(y) / wavelength).cos(),
            Ground::Bumps(b) => b.height(x, y),
            Ground::Envelope(e) => e
                .anchors
                .iter()
                .map(|&[ax, ay, az]| az + e.slope * (x - ax).hypot(y - ay))
                .fold(f64::INFINITY, f64::min),
            Ground::Grid(g) => g.height(x, y),
            Ground::Sum(parts) => parts.iter().map(|p| p.height(x, y)).sum(),
        }
    }

    /// Known upper bound on the Lipschitz constant, `None` when no bound has
    /// been derived (the cliff, or sums containing it).
    ///
    /// Exact for every single builtin and for grids; for sums this is the sum
    /// of the parts' bounds.
    pub fn lipschitz_bound(&self) -> Option<f64> {
        match self {
            Ground::Flat => Some(0.0),
            Ground::Plane { sx, sy } => Some(sx.hypot(*sy)),
            Ground::Cone { height, radius } => Some(height.abs() / radius),
            Ground::Ridge { slope } => Some(slope.abs()),
            Ground::Cliff { .. } => None,
            Ground::Radial {
                amplitude,
                wavelength,
            } => Some(TAU * amplitude.abs() / wavelength),
            Ground::Bumps(b) => Some(b.lipschitz_bound()),
            Ground::Envelope(e) => Some(e.slope.abs()),
            Ground::Grid(g) => Some(g.lipschitz_bound()),
            Ground::Sum(parts) => parts.iter().map(Ground::lipschitz_bound).sum(),
        }
    }

    pub fn is_continuous(&self) -> bool {
        match self {
            Ground::Cliff { low, high } => low == high,
            Ground::Sum(parts) => parts.iter().all(Ground::is_continuous),
            _ => true,
        }
    }

    /// Short kind tag, as used in descriptors.
    pub fn kind(&self) -> &'static str {
        match self {
            Ground::Flat => "flat",
            Ground::Plane { .. } => "plane",
            Ground::Cone { .. } => "cone",
            Ground::Ridge { .. } => "ridge",
            Ground::Cliff { .. } => "cliff",
            Ground::Radial { .. } => "radial",
            Ground::Bumps(_) => "bumps",
            Ground::Envelope(_) => "envelope",
            Ground::Grid(_) => "grid",
            Ground::Sum(_) => "sum",
        }
    }
}

impl fmt::Display for Ground {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ground::Flat => write!(f, "flat"),
            Ground::Plane { sx, sy } => write!(f, "plane:sx={sx},sy={sy}"),
            Ground::Cone { height, radius } => write!(f, "cone:height={height},radius={radius}"),
            Ground::Ridge { slope } => write!(f, "ridge:s={slope}"),
            Ground::Cliff { low, high } => write!(f, "cliff:low={low},high={high}"),
            Ground::Radial {
                amplitude,
                wavelength,
            } => write!(f, "radial:a={amplitude},w={wavelength}"),
            Ground::Bumps(b) => b.fmt(f),
            Ground::Envelope(e) => {
                write!(f, "envelope:s={}", e.slope)?;
                for (i, [x, y, z]) in e.anchors.iter().enumerate() {
                    let i = i + 1;
                    write!(f, ",x{i}={x},y{i}={y},z{i}={z}")?;
                }
                Ok(())
            }
            // Grids come from files and have no inline descriptor.
            Ground::Grid(g) => write!(
                f,
                "grid:x0={},y0={},dx={},dy={},nx={},ny={}",
                g.origin[0], g.origin[1], g.spacing[0], g.spacing[1], g.dims[0], g.dims[1]
            ),
            Ground::Sum(parts) => {
                write!(f, "sum(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Axis-aligned sampling region `[x_min, x_max] x [y_min, y_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn square(half_width: f64) -> Self {
        Region {
            x_min: -half_width,
            x_max: half_width,
            y_min: -half_width,
            y_max: half_width,
        }
    }

    fn is_degenerate(&self) -> bool {
        !(self.x_max > self.x_min && self.y_max > self.y_min)
    }

    fn clamp(&self, x: f64, y: f64) -> (f64, f64) {
        (
            x.clamp(self.x_min, self.x_max),
            y.clamp(self.y_min, self.y_max),
        )
    }
}

/// Seed of the default sampling schedule used by [`estimate_lipschitz`].
pub const DEFAULT_LIPSCHITZ_SEED: u64 = 0x7ab1_e7a8;

/// Empirical lower bound on the Lipschitz constant of `ground` over `region`.
///
/// Each of the `n` samples draws a base point `P` and returns the largest
/// difference quotient over a small batch of partners: one step along the
/// finite-difference gradient direction at `P` (this catches the steepest
/// local slope) and one partner at a random direction and log-uniform
/// distance (this catches kinks and long-range rises). All partners are
/// clamped into the region. Every quotient is a true `|g(P)-g(Q)|/|P-Q|`, so
/// the result never exceeds the true constant beyond rounding. The schedule is
/// a fixed function of `seed`, which makes the estimate nondecreasing in `n`.
///
/// Returns `0.0` when `n < 2` or the region is degenerate.
pub fn estimate_lipschitz(ground: &Ground, region: Region, n: usize, seed: u64) -> f64 {
    if n < 2 || region.is_degenerate() {
        return 0.0;
    }
    let diag = (region.x_max - region.x_min).hypot(region.y_max - region.y_min);
    let min_step = 1e-5 * diag;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0_f64;
    let quotient = |p: (f64, f64), gp: f64, q: (f64, f64)| -> f64 {
        let dist = (q.0 - p.0).hypot(q.1 - p.1);
        if dist > 0.0 {
            (ground.height(q.0, q.1) - gp).abs() / dist
        } else {
            0.0
        }
    };
    for _ in 0..n {
        let p = (
            lerp(region.x_min, region.x_max, unit(&mut rng)),
            lerp(region.y_min, region.y_max, unit(&mut rng)),
        );
        let gp = ground.height(p.0, p.1);

        // Steepest-direction partner.
        let h = min_step * 10.0;
        let gx = ground.height(p.0 + h, p.1) - ground.height(p.0 - h, p.1);
        let gy = ground.height(p.0, p.1 + h) - ground.height(p.0, p.1 - h);
        let norm = gx.hypot(gy);
        if norm > 0.0 {
            for dir in [1.0, -1.0] {
                let q = region.clamp(p.0 + dir * h * gx / norm, p.1 + dir * h * gy / norm);
                best = best.max(quotient(p, gp, q));
            }
        }

        // Random partner.
        let angle = TAU * unit(&mut rng);
        let dist = min_step * (diag / min_step).powf(unit(&mut rng));
        let q = region.clamp(p.0 + dist * angle.cos(), p.1 + dist * angle.sin());
        best = best.max(quotient(p, gp, q));
    }
    best
}

fn lerp(a: f64, b: f64, s: f64) -> f64 {
    a + (b - a) * s
}

/// Uniform `[0, 1)` from the top 53 bits of a ChaCha8 output word.
///
/// Built on `next_u64` directly so the stream is stable across `rand`
/// releases.
pub(crate) fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
