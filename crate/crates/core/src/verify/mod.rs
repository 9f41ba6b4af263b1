//! Numerical checks of the geometric facts behind the turning procedure.
//!
//! - [`frame_slopes`]: for three mutually orthogonal unit vectors the squared
//!   sines of their angles with the horizontal sum to one, so one of them has
//!   slope at least `1/sqrt(2)`.
//! - [`critical_constant`]: the smallest Lipschitz constant at which an equal
//!   hovering position can stop being unique, by direct minimization.
//! - [`uniqueness_scan`], [`d_monotone_check`]: dense scans of the two root
//!   finding problems of the solver.
//! - [`coplanar_rotation`]: a rotation of a rectangle of leg points about the
//!   origin whose lift to the ground is coplanar.

pub mod suites;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, TAU};

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{vector_slope, Frame, PlacedTable, TableSpec, Vec3};
use crate::ground::Ground;
use crate::solver::{bisect, count_sign_changes, diagonal_gap, SeatedDiagonal, SolveError};

/// Accepted deviation from orthonormality of a frame.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-12;
/// Residual accepted for a coplanar rotation.
pub const COPLANAR_TOLERANCE: f64 = 1e-9;
/// A triple-product scan whose values all stay within this is treated as
/// identically zero.
pub const COPLANAR_ZERO: f64 = 1e-12;
/// Scan points used by [`coplanar_rotation`] before bisecting.
pub const COPLANAR_SCAN: usize = 2048;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("frame is not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),
    #[error("no sign change of the coplanarity residual (min |residual| = {min_abs:e} at alpha = {argmin})")]
    NoCoplanarRoot { min_abs: f64, argmin: f64 },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Angles `beta_i` in `[0, pi/2]` of three orthonormal vectors with the
/// horizontal plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameAngles {
    pub beta: [f64; 3],
}

impl FrameAngles {
    /// `sin^2 beta_1 + sin^2 beta_2 + sin^2 beta_3`.
    pub fn sin_squared_sum(&self) -> f64 {
        self.beta.iter().map(|b| b.sin().powi(2)).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameSlopes {
    pub angles: FrameAngles,
    /// `tan beta_i`; infinite for a vertical vector.
    pub slopes: [f64; 3],
}

/// Angles and slopes of an orthonormal triple.
pub fn frame_slopes(frame: [Vec3; 3]) -> Result<FrameSlopes, VerifyError> {
    let mut dev = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((frame[i].dot(&frame[j]) - target).abs());
        }
    }
    if dev > ORTHONORMAL_TOLERANCE || dev.is_nan() {
        return Err(VerifyError::NotOrthonormal(dev));
    }
    let beta = frame.map(|v| v.z.abs().min(1.0).asin());
    Ok(FrameSlopes {
        angles: FrameAngles { beta },
        slopes: frame.map(|v| vector_slope(&v)),
    })
}

/// The three cube edges at a vertex of a cube standing on a corner, so that
/// its main diagonal is vertical. Each has slope `1/sqrt(2)`.
pub fn tripod() -> [Vec3; 3] {
    let z = 1.0 / 3.0_f64.sqrt();
    let rho = (2.0_f64 / 3.0).sqrt();
    [0.0, TAU / 3.0, 2.0 * TAU / 3.0].map(|a: f64| Vec3::new(rho * a.cos(), rho * a.sin(), z))
}

/// Minimizer of the largest of the three critical slopes.
#[derive(Clone, Copy, Debug)]
pub struct CriticalConstant {
    pub k: f64,
    pub incline: f64,
    pub tilt: f64,
    /// Slopes of `AB`, `BC` and the tangent of `B`'s rotation circle about
    /// `AC` at the minimizer.
    pub slopes: [f64; 3],
    /// Smallest objective over the plain grid, before refinement.
    pub grid_min: f64,
}

/// Slopes of `AB`, `BC` and the tangent at `B` for a table whose diagonal is
/// inclined by `incline` and tilted by `tilt` about it.
pub fn critical_slopes(spec: &TableSpec, incline: f64, tilt: f64) -> [f64; 3] {
    let u = Frame::diagonal(0.0, incline);
    let t = PlacedTable::from_frame(Vec3::zeros(), Frame::tilted(u, 0.0, tilt), spec);
    let ab = t.b - t.a;
    let bc = t.c - t.b;
    let tangent = u.cross(&(t.b - t.center()));
    [vector_slope(&ab), vector_slope(&bc), vector_slope(&tangent)]
}

fn critical_objective(spec: &TableSpec, incline: f64, tilt: f64) -> f64 {
    critical_slopes(spec, incline, tilt)
        .iter()
        .fold(0.0, |m, s| m.max(*s))
}

/// `min over (phi, theta) of max(slope AB, slope BC, slope tangent B)` over
/// `[-pi/4, pi/4] x [-pi/2, pi/2]` for side ratio `spec.ratio()`.
///
/// Grid search on `grid x grid` points, then repeated zoomed grids around the
/// incumbent. The objective is a maximum of three terms and not smooth where
/// they cross, which is where the minimum sits.
pub fn critical_constant(spec: &TableSpec, grid: usize) -> CriticalConstant {
    let grid = grid.max(2);
    let at = |i: usize, lo: f64, hi: f64| lo + (hi - lo) * i as f64 / (grid - 1) as f64;
    let (grid_min, mut phi, mut theta) = (0..grid)
        .into_par_iter()
        .map(|i| {
            let phi = at(i, -FRAC_PI_4, FRAC_PI_4);
            (0..grid)
                .map(|j| {
                    let theta = at(j, -FRAC_PI_2, FRAC_PI_2);
                    (critical_objective(spec, phi, theta), phi, theta)
                })
                .fold((f64::INFINITY, 0.0, 0.0), min_triple)
        })
        .reduce(|| (f64::INFINITY, 0.0, 0.0), min_triple);

    let mut best = grid_min;
    let mut half = [FRAC_PI_2 / (grid - 1) as f64, PI / (grid - 1) as f64].map(|h| 2.0 * h);
    const ZOOM: usize = 21;
    for _ in 0..40 {
        let (f, p, t) = (0..ZOOM)
            .flat_map(|i| (0..ZOOM).map(move |j| (i, j)))
            .map(|(i, j)| {
                let p = (phi - half[0] + 2.0 * half[0] * i as f64 / (ZOOM - 1) as f64)
                    .clamp(-FRAC_PI_4, FRAC_PI_4);
                let t = (theta - half[1] + 2.0 * half[1] * j as f64 / (ZOOM - 1) as f64)
                    .clamp(-FRAC_PI_2, FRAC_PI_2);
                (critical_objective(spec, p, t), p, t)
            })
            .fold((best, phi, theta), min_triple);
        best = f;
        phi = p;
        theta = t;
        half = half.map(|h| h * 0.25);
        if half[0] < 1e-15 {
            break;
        }
    }
    CriticalConstant {
        k: best,
        incline: phi,
        tilt: theta,
        slopes: critical_slopes(spec, phi, theta),
        grid_min,
    }
}

fn min_triple(a: (f64, f64, f64), b: (f64, f64, f64)) -> (f64, f64, f64) {
    if b.0 < a.0 {
        b
    } else {
        a
    }
}

/// Tilt angles `theta_i`, `i = 0..n`, spread uniformly over `[-pi/2, pi/2]`.
fn tilt_grid(n: usize) -> impl Iterator<Item = f64> {
    let n = n.max(2);
    (0..n).map(move |i| -FRAC_PI_2 + PI * i as f64 / (n - 1) as f64)
}

/// Sign changes of the hover imbalance over an `n`-point tilt grid with the
/// diagonal seated at `gamma`.
pub fn uniqueness_scan(
    ground: &Ground,
    spec: &TableSpec,
    gamma: f64,
    n: usize,
) -> Result<usize, VerifyError> {
    let seat = SeatedDiagonal::new(ground, gamma)?;
    Ok(count_sign_changes(
        tilt_grid(n).map(|th| seat.imbalance(th, spec, ground)),
    ))
}

/// Whether `D(t)` is strictly increasing on `n` uniform points of `[0, 1]`.
pub fn d_monotone_check(ground: &Ground, gamma: f64, n: usize) -> bool {
    let n = n.max(2);
    let values: Vec<f64> = (0..n)
        .map(|i| diagonal_gap(i as f64 / (n - 1) as f64, gamma, ground))
        .collect();
    values.windows(2).all(|w| w[1] > w[0])
}

/// Leg points of the table in the horizontal plane, rotated by `alpha`.
pub fn leg_points(spec: &TableSpec, alpha: f64) -> [(f64, f64); 4] {
    let beta = spec.half_angle();
    [alpha, alpha + beta, alpha + PI, alpha + beta + PI].map(|a| (a.cos(), a.sin()))
}

/// Scalar triple product `(P2 - P1) . ((P3 - P1) x (P4 - P1))` of the leg
/// points lifted to the ground; zero iff the lifted points are coplanar.
pub fn coplanar_residual(ground: &Ground, spec: &TableSpec, alpha: f64) -> f64 {
    let p = leg_points(spec, alpha).map(|(x, y)| Vec3::new(x, y, ground.height(x, y)));
    (p[1] - p[0]).dot(&(p[2] - p[0]).cross(&(p[3] - p[0])))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoplanarRotation {
    pub alpha: f64,
    pub residual: f64,
    /// Every scanned residual was within [`COPLANAR_ZERO`]; `alpha` is 0.
    pub identically_zero: bool,
}

/// Range scanned for a coplanar rotation: a quarter-turn maps the square's
/// leg set to itself with an odd relabeling, which flips the residual's sign,
/// so `[0, pi/2]` holds a root; other rectangles use the full turn.
pub fn coplanar_range(spec: &TableSpec) -> f64 {
    if spec.ratio() == 1.0 {
        FRAC_PI_2
    } else {
        TAU
    }
}

/// Smallest rotation in the scanned range whose lifted leg points are
/// coplanar, by scan and bisection.
pub fn coplanar_rotation(
    ground: &Ground,
    spec: &TableSpec,
) -> Result<CoplanarRotation, VerifyError> {
    let range = coplanar_range(spec);
    let n = COPLANAR_SCAN;
    let alphas: Vec<f64> = (0..=n).map(|i| range * i as f64 / n as f64).collect();
    let values: Vec<f64> = alphas
        .par_iter()
        .map(|&a| coplanar_residual(ground, spec, a))
        .collect();
    if values.iter().all(|v| v.abs() <= COPLANAR_ZERO) {
        return Ok(CoplanarRotation {
            alpha: 0.0,
            residual: values[0],
            identically_zero: true,
        });
    }
    for i in 0..n {
        if values[i] == 0.0 {
            return Ok(CoplanarRotation {
                alpha: alphas[i],
                residual: 0.0,
                identically_zero: false,
            });
        }
        if values[i] * values[i + 1] < 0.0 {
            let f = |a: f64| Ok::<_, VerifyError>(coplanar_residual(ground, spec, a));
            let root = bisect(f, alphas[i], alphas[i + 1], values[i], values[i + 1])?;
            return Ok(CoplanarRotation {
                alpha: root.x,
                residual: root.value,
                identically_zero: false,
            });
        }
    }
    let (min_abs, argmin) = values
        .iter()
        .zip(&alphas)
        .fold((f64::INFINITY, 0.0), |b, (v, a)| {
            if v.abs() < b.0 {
                (v.abs(), *a)
            } else {
                b
            }
        });
    Err(VerifyError::NoCoplanarRoot { min_abs, argmin })
}

/// Critical slope `1/sqrt(2)` and its angle with the horizontal in degrees.
pub fn critical_angle_degrees() -> f64 {
    FRAC_1_SQRT_2.atan().to_degrees()
}
