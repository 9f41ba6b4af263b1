//! Balancing by turning.
//!
//! For every azimuth `gamma` the table is brought into its equal hovering
//! position: `A` and `C` are seated on the ground with the diagonal along
//! `gamma` ([`place_diagonal`]), then the table is tilted about `AC` until `B`
//! and `D` hover at the same signed height `h` ([`equal_hover`]). On grounds
//! with Lipschitz constant at most `1/sqrt(2)` both steps have unique answers
//! and `h(gamma)` is continuous and `pi`-periodic. It takes both signs over a
//! half-turn, so a sign-change search over `[0, pi)` followed by bisection
//! gives a pose with all four feet on the ground ([`balance_by_turning`]).
//!
//! All root finding is bisection on guaranteed sign changes.

mod bisect;
mod brute;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{Frame, GeometryError, PlacedTable, Pose, TableSpec, Vec3};
use crate::ground::Ground;

pub use bisect::{bisect, count_sign_changes, Root, MAX_ITERATIONS, PARAM_TOLERANCE};
pub use brute::{brute_force_balance, BruteForceResult, Orientation};

/// Accepted `|D(t*) - 4|` for a seated diagonal.
pub const DIAGONAL_TOLERANCE: f64 = 1e-12;
/// Accepted `|vert(B) - vert(D)|` at an equal hovering position.
pub const HOVER_TOLERANCE: f64 = 1e-10;
/// Largest per-vertex vertical residual of a solved pose.
pub const BALANCE_TOLERANCE: f64 = 1e-9;
/// Every sampled `|h|` at or below this means the ground balances the table at
/// every azimuth.
pub const EVERYWHERE_TOLERANCE: f64 = 1e-11;
/// Default number of azimuth samples over the half-turn.
pub const DEFAULT_SWEEP_SAMPLES: usize = 256;
/// Tilt samples used to bracket the first sign change of the hover imbalance.
pub const TILT_SCAN_SAMPLES: usize = 65;
/// Lipschitz constants up to this value guarantee unique hovering positions.
/// The slack admits descriptors that round `1/sqrt(2)` to seven digits.
pub const CRITICAL_LIPSCHITZ: f64 = FRAC_1_SQRT_2 + 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("ground is discontinuous; turning needs a continuous ground")]
    Discontinuous,
    #[error("diagonal bisection did not converge at azimuth {azimuth}: |D(t) - 4| = {residual:e} at t = {t}")]
    DiagonalNotConverged { azimuth: f64, t: f64, residual: f64 },
    #[error("hover imbalance has no sign change over the tilt range at azimuth {azimuth} (min |imbalance| = {min_abs:e})")]
    NoHoverSignChange { azimuth: f64, min_abs: f64 },
    #[error("hover bisection did not converge at azimuth {azimuth}: |imbalance| = {residual:e}")]
    HoverNotConverged { azimuth: f64, residual: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Signed vertical distance `z - g(x, y)` of a point above the ground.
pub fn vertical_distance(p: &Vec3, ground: &Ground) -> f64 {
    p.z - ground.height(p.x, p.y)
}

/// `D(t) = 4t^2 + (g(t u) - g(-t u))^2` with `u = (cos gamma, sin gamma)`:
/// the squared distance between the ground points above `t u` and `-t u`.
pub fn diagonal_gap(t: f64, gamma: f64, ground: &Ground) -> f64 {
    let (s, c) = gamma.sin_cos();
    let dz = ground.height(t * c, t * s) - ground.height(-t * c, -t * s);
    4.0 * t * t + dz * dz
}

/// Parameter `t* in (0, 1]` with `D(t*) = 4`.
///
/// `D(0) = 0` and `D(1) >= 4`, so a root exists on continuous grounds; it is
/// unique when the Lipschitz constant is at most 1.
pub fn place_diagonal(ground: &Ground, gamma: f64) -> Result<f64, SolveError> {
    if !ground.is_continuous() {
        return Err(SolveError::Discontinuous);
    }
    let f = |t: f64| Ok::<_, SolveError>(diagonal_gap(t, gamma, ground) - 4.0);
    let f1 = f(1.0)?;
    if f1 == 0.0 {
        return Ok(1.0);
    }
    let root = bisect(f, 0.0, 1.0, -4.0, f1)?;
    if root.value.abs() > DIAGONAL_TOLERANCE {
        return Err(SolveError::DiagonalNotConverged {
            azimuth: gamma,
            t: root.x,
            residual: root.value.abs(),
        });
    }
    Ok(root.x)
}

/// A diagonal seated on the ground, ready to be tilted.
#[derive(Clone, Copy, Debug)]
pub struct SeatedDiagonal {
    pub azimuth: f64,
    pub diag_param: f64,
    a: Vec3,
    c: Vec3,
    u: Vec3,
}

impl SeatedDiagonal {
    pub fn new(ground: &Ground, gamma: f64) -> Result<Self, SolveError> {
        let t = place_diagonal(ground, gamma)?;
        let (s, c) = gamma.sin_cos();
        let (x, y) = (t * c, t * s);
        let a = Vec3::new(x, y, ground.height(x, y));
        let cc = Vec3::new(-x, -y, ground.height(-x, -y));
        Ok(SeatedDiagonal {
            azimuth: gamma,
            diag_param: t,
            a,
            c: cc,
            u: (a - cc).normalize(),
        })
    }

    pub fn incline(&self) -> f64 {
        self.u.z.clamp(-1.0, 1.0).asin()
    }

    pub fn center(&self) -> Vec3 {
        0.5 * (self.a + self.c)
    }

    pub fn table(&self, tilt: f64, spec: &TableSpec) -> PlacedTable {
        let frame = Frame::tilted(self.u, self.azimuth, tilt);
        let mut table = PlacedTable::from_frame(self.center(), frame, spec);
        table.a = self.a;
        table.c = self.c;
        table
    }

    /// `vert(B) - vert(D)` at the given tilt.
    pub fn imbalance(&self, tilt: f64, spec: &TableSpec, ground: &Ground) -> f64 {
        let t = self.table(tilt, spec);
        vertical_distance(&t.b, ground) - vertical_distance(&t.d, ground)
    }

    pub fn pose(&self, tilt: f64) -> Pose {
        Pose {
            azimuth: self.azimuth,
            diag_param: self.diag_param,
            tilt,
        }
    }
}

/// `vert(B(theta)) - vert(D(theta))` with the diagonal seated at `gamma`.
pub fn hover_imbalance(
    theta: f64,
    gamma: f64,
    spec: &TableSpec,
    ground: &Ground,
) -> Result<f64, SolveError> {
    Ok(SeatedDiagonal::new(ground, gamma)?.imbalance(theta, spec, ground))
}

/// An equal hovering position.
#[derive(Clone, Copy, Debug)]
pub struct HoverState {
    pub pose: Pose,
    pub table: PlacedTable,
    /// Common vertical distance of `B` and `D` (reported as `vert(B)`).
    pub hover: f64,
    pub center_z: f64,
    /// `vert(B) - vert(D)` at the returned tilt.
    pub imbalance: f64,
    /// Sign changes seen by the coarse tilt scan; above 1 the hovering
    /// position is not unique and the first one was returned.
    pub sign_changes: usize,
}

impl HoverState {
    pub fn incline(&self) -> f64 {
        self.table.incline()
    }
}

/// Equal hovering position at azimuth `gamma`.
///
/// The tilt range `[-pi/2, pi/2]` is scanned on [`TILT_SCAN_SAMPLES`] points
/// and the first sign change of the imbalance is bisected. On grounds with
/// Lipschitz constant at most `1/sqrt(2)` there is exactly one.
pub fn equal_hover(
    ground: &Ground,
    spec: &TableSpec,
    gamma: f64,
) -> Result<HoverState, SolveError> {
    let seat = SeatedDiagonal::new(ground, gamma)?;
    equal_hover_seated(&seat, ground, spec)
}

fn equal_hover_seated(
    seat: &SeatedDiagonal,
    ground: &Ground,
    spec: &TableSpec,
) -> Result<HoverState, SolveError> {
    let n = TILT_SCAN_SAMPLES;
    let thetas: Vec<f64> = (0..n)
        .map(|i| -FRAC_PI_2 + PI * (i as f64 / (n - 1) as f64))
        .collect();
    let values: Vec<f64> = thetas
        .iter()
        .map(|&th| seat.imbalance(th, spec, ground))
        .collect();
    let sign_changes = count_sign_changes(values.iter().copied());

    let mut root = None;
    for i in 0..n {
        if values[i] == 0.0 {
            root = Some(thetas[i]);
            break;
        }
        if i + 1 < n && values[i] * values[i + 1] < 0.0 {
            let f = |th: f64| Ok::<_, SolveError>(seat.imbalance(th, spec, ground));
            let r = bisect(f, thetas[i], thetas[i + 1], values[i], values[i + 1])?;
            root = Some(r.x);
            break;
        }
    }
    let Some(theta) = root else {
        let min_abs = values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        return Err(SolveError::NoHoverSignChange {
            azimuth: seat.azimuth,
            min_abs,
        });
    };

    let table = seat.table(theta, spec);
    let vb = vertical_distance(&table.b, ground);
    let vd = vertical_distance(&table.d, ground);
    let imbalance = vb - vd;
    if imbalance.abs() > HOVER_TOLERANCE {
        return Err(SolveError::HoverNotConverged {
            azimuth: seat.azimuth,
            residual: imbalance.abs(),
        });
    }
    Ok(HoverState {
        pose: seat.pose(theta),
        table,
        hover: vb,
        center_z: table.center().z,
        imbalance,
        sign_changes: sign_changes.max(1),
    })
}

/// Hover distance `h(gamma)` of the equal hovering position at `gamma`.
pub fn hover_gap(gamma: f64, ground: &Ground, spec: &TableSpec) -> Result<f64, SolveError> {
    Ok(equal_hover(ground, spec, gamma)?.hover)
}

/// One row of an azimuth sweep.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub gamma: f64,
    pub diag_param: f64,
    pub incline: f64,
    pub tilt: f64,
    pub hover: f64,
    pub center_z: f64,
    /// Set when this azimuth could not be solved; the numeric fields that
    /// depend on the failed step are NaN.
    pub error: Option<SolveError>,
}

/// Equal hovering positions at `gamma_i = i*pi/n`, `i = 0..n`.
///
/// Rows are computed in parallel and returned in index order; the output is
/// identical to a sequential evaluation.
pub fn sweep(ground: &Ground, spec: &TableSpec, n: usize) -> Vec<SweepRow> {
    (0..n)
        .into_par_iter()
        .map(|i| sweep_row(ground, spec, PI * i as f64 / n as f64))
        .collect()
}

fn sweep_row(ground: &Ground, spec: &TableSpec, gamma: f64) -> SweepRow {
    let nan = f64::NAN;
    let seat = match SeatedDiagonal::new(ground, gamma) {
        Ok(s) => s,
        Err(e) => {
            return SweepRow {
                gamma,
                diag_param: nan,
                incline: nan,
                tilt: nan,
                hover: nan,
                center_z: nan,
                error: Some(e),
            }
        }
    };
    match equal_hover_seated(&seat, ground, spec) {
        Ok(h) => SweepRow {
            gamma,
            diag_param: seat.diag_param,
            incline: seat.incline(),
            tilt: h.pose.tilt,
            hover: h.hover,
            center_z: h.center_z,
            error: None,
        },
        Err(e) => SweepRow {
            gamma,
            diag_param: seat.diag_param,
            incline: seat.incline(),
            tilt: nan,
            hover: nan,
            center_z: seat.center().z,
            error: Some(e),
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BalanceStatus {
    /// A balancing azimuth was found by sign-change search and bisection.
    Solved,
    /// `h(gamma)` vanished at every sample: the table balances at any azimuth;
    /// the pose at `gamma = 0` is returned.
    BalancedEverywhere,
    /// No sign change of `h` could be bracketed and resolved.
    NoSignChange,
    /// The ground is discontinuous.
    PreconditionFailed,
}

impl BalanceStatus {
    pub fn is_balanced(self) -> bool {
        matches!(
            self,
            BalanceStatus::Solved | BalanceStatus::BalancedEverywhere
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BalanceStatus::Solved => "solved",
            BalanceStatus::BalancedEverywhere => "balanced_everywhere",
            BalanceStatus::NoSignChange => "no_sign_change",
            BalanceStatus::PreconditionFailed => "precondition_failed",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BalanceReport {
    pub status: BalanceStatus,
    /// Balanced pose; for failures, the pose of the sample with the smallest
    /// `|h|` when one exists.
    pub pose: Option<Pose>,
    pub table: Option<PlacedTable>,
    /// Vertical distances of `A, B, C, D`.
    pub residuals: [f64; 4],
    pub center_z: f64,
    pub sweep_samples: usize,
    /// Halvings spent on the azimuth bisection of the returned root.
    pub bisection_iters: usize,
    /// Smallest sampled `|h|` and the azimuth where it occurred.
    pub min_abs_hover: f64,
    pub argmin_gamma: f64,
    pub warnings: Vec<String>,
}

impl BalanceReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    fn failed(status: BalanceStatus, samples: usize, warnings: Vec<String>) -> Self {
        BalanceReport {
            status,
            pose: None,
            table: None,
            residuals: [f64::NAN; 4],
            center_z: f64::NAN,
            sweep_samples: samples,
            bisection_iters: 0,
            min_abs_hover: f64::NAN,
            argmin_gamma: f64::NAN,
            warnings,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BalanceOptions {
    pub sweep_samples: usize,
}

impl Default for BalanceOptions {
    fn default() -> Self {
        BalanceOptions {
            sweep_samples: DEFAULT_SWEEP_SAMPLES,
        }
    }
}

/// Vertical residuals of the four feet.
pub fn residuals(table: &PlacedTable, ground: &Ground) -> [f64; 4] {
    table.vertices().map(|v| vertical_distance(&v, ground))
}

fn max_abs(r: &[f64; 4]) -> f64 {
    r.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Balances the table by turning it with the default options.
pub fn balance_by_turning(ground: &Ground, spec: &TableSpec) -> BalanceReport {
    balance_with(ground, spec, &BalanceOptions::default())
}

/// Hypothesis warnings for a ground.
pub fn hypothesis_warnings(ground: &Ground) -> Vec<String> {
    match ground.lipschitz_bound() {
        None => vec!["Lipschitz bound unknown: hovering positions may be non-unique".into()],
        Some(k) if k > 1.0 => vec![format!(
            "Lipschitz bound {k} > 1: seating and hovering sign changes are not guaranteed"
        )],
        Some(k) if k > CRITICAL_LIPSCHITZ => vec![format!(
            "Lipschitz bound {k} > 1/sqrt(2): hovering positions may be non-unique; first roots are used"
        )],
        _ => Vec::new(),
    }
}

struct Samples {
    gammas: Vec<f64>,
    states: Vec<Result<HoverState, SolveError>>,
}

fn sample_half_turn(ground: &Ground, spec: &TableSpec, n: usize) -> Samples {
    let gammas: Vec<f64> = (0..n).map(|i| PI * i as f64 / n as f64).collect();
    let states = gammas
        .par_iter()
        .map(|&g| equal_hover(ground, spec, g))
        .collect();
    Samples { gammas, states }
}

/// A resolved balancing position.
#[derive(Clone, Copy, Debug)]
pub struct Balanced {
    pub state: HoverState,
    pub residuals: [f64; 4],
    pub bisection_iters: usize,
}

/// Walks the sampled half-turn in increasing azimuth and yields every
/// balancing position: samples with `|h|` at most [`HOVER_TOLERANCE`], and
/// bisected sign changes between consecutive samples (including the wrap
/// from the last sample to `pi`). Brackets whose bisection does not reach
/// [`BALANCE_TOLERANCE`] (jumps of `h`) are skipped.
fn balancing_positions<'a>(
    ground: &'a Ground,
    spec: &'a TableSpec,
    samples: &'a Samples,
    warnings: &'a mut Vec<String>,
) -> impl Iterator<Item = Balanced> + 'a {
    let n = samples.gammas.len();
    let mut end_state: Option<Result<HoverState, SolveError>> = None;
    (0..n).flat_map(move |i| {
        let mut found = Vec::new();
        let Ok(si) = &samples.states[i] else {
            return found;
        };
        if si.hover.abs() <= HOVER_TOLERANCE {
            let r = residuals(&si.table, ground);
            if max_abs(&r) <= BALANCE_TOLERANCE {
                found.push(Balanced {
                    state: *si,
                    residuals: r,
                    bisection_iters: 0,
                });
                return found;
            }
        }
        let (g1, next) = if i + 1 < n {
            (samples.gammas[i + 1], samples.states[i + 1].clone())
        } else {
            let s = end_state
                .get_or_insert_with(|| equal_hover(ground, spec, PI))
                .clone();
            (PI, s)
        };
        let Ok(sj) = next else {
            return found;
        };
        if si.hover * sj.hover >= 0.0 || sj.hover.abs() <= HOVER_TOLERANCE {
            return found;
        }
        let f = |g: f64| equal_hover(ground, spec, g).map(|s| s.hover);
        match bisect(f, samples.gammas[i], g1, si.hover, sj.hover) {
            Ok(root) => match equal_hover(ground, spec, root.x) {
                Ok(state) => {
                    let r = residuals(&state.table, ground);
                    if max_abs(&r) <= BALANCE_TOLERANCE {
                        found.push(Balanced {
                            state,
                            residuals: r,
                            bisection_iters: root.iterations,
                        });
                    } else {
                        warnings.push(format!(
                            "sign change of h in [{}, {g1}] is a jump (|residual| {:e}); skipped",
                            samples.gammas[i],
                            max_abs(&r)
                        ));
                    }
                }
                Err(e) => warnings.push(format!("bisection endpoint failed: {e}")),
            },
            Err(e) => warnings.push(format!("azimuth bisection failed: {e}")),
        }
        found
    })
}

/// Balances the table by turning it on the spot.
///
/// Samples `h` on `sweep_samples` azimuths over `[0, pi)`; if all vanish the
/// ground balances everywhere and the pose at `gamma = 0` is returned.
/// Otherwise the smallest azimuth holding a zero sample or a bisectable sign
/// change wins.
pub fn balance_with(ground: &Ground, spec: &TableSpec, opts: &BalanceOptions) -> BalanceReport {
    let n = opts.sweep_samples.max(2);
    let mut warnings = hypothesis_warnings(ground);
    if !ground.is_continuous() {
        return BalanceReport::failed(BalanceStatus::PreconditionFailed, 0, warnings);
    }
    let samples = sample_half_turn(ground, spec, n);
    let failures = samples.states.iter().filter(|s| s.is_err()).count();
    if failures > 0 {
        warnings.push(format!("{failures} of {n} azimuth samples failed"));
    }
    if samples
        .states
        .iter()
        .any(|s| matches!(s, Ok(h) if h.sign_changes > 1))
    {
        warnings.push("multiple equal hovering positions detected; first root in tilt used".into());
    }

    let (min_abs_hover, argmin_gamma, argmin_state) = samples
        .states
        .iter()
        .zip(&samples.gammas)
        .filter_map(|(s, &g)| s.as_ref().ok().map(|h| (h.hover.abs(), g, *h)))
        .fold((f64::INFINITY, f64::NAN, None), |best, (a, g, h)| {
            if a < best.0 {
                (a, g, Some(h))
            } else {
                best
            }
        });

    let everywhere = failures == 0 && min_abs_hover.is_finite() && {
        samples
            .states
            .iter()
            .all(|s| matches!(s, Ok(h) if h.hover.abs() <= EVERYWHERE_TOLERANCE))
    };
    let found = if everywhere {
        samples.states[0].clone().ok().map(|state| Balanced {
            residuals: residuals(&state.table, ground),
            state,
            bisection_iters: 0,
        })
    } else {
        let mut w = Vec::new();
        let first = balancing_positions(ground, spec, &samples, &mut w).next();
        for msg in &w {
            log::warn!("{msg}");
        }
        warnings.extend(w);
        first
    };

    match found {
        Some(b) => BalanceReport {
            status: if everywhere {
                BalanceStatus::BalancedEverywhere
            } else {
                BalanceStatus::Solved
            },
            pose: Some(b.state.pose),
            table: Some(b.state.table),
            residuals: b.residuals,
            center_z: b.state.center_z,
            sweep_samples: n,
            bisection_iters: b.bisection_iters,
            min_abs_hover,
            argmin_gamma,
            warnings,
        },
        None => BalanceReport {
            status: BalanceStatus::NoSignChange,
            pose: argmin_state.map(|h| h.pose),
            table: argmin_state.map(|h| h.table),
            residuals: argmin_state.map_or([f64::NAN; 4], |h| residuals(&h.table, ground)),
            center_z: argmin_state.map_or(f64::NAN, |h| h.center_z),
            sweep_samples: n,
            bisection_iters: 0,
            min_abs_hover,
            argmin_gamma,
            warnings,
        },
    }
}

/// Every balancing position the turning procedure finds over a half-turn,
/// in increasing azimuth.
pub fn all_balancing_positions(ground: &Ground, spec: &TableSpec, samples: usize) -> Vec<Balanced> {
    if !ground.is_continuous() {
        return Vec::new();
    }
    let s = sample_half_turn(ground, spec, samples.max(2));
    let mut warnings = Vec::new();
    balancing_positions(ground, spec, &s, &mut warnings).collect()
}
