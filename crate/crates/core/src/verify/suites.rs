//! Named verification suites shared by the command line and the test suite.
//!
//! Each suite returns one [`Check`] per assertion. Informational lines
//! (`recorded`) always pass; they document behavior outside the hypotheses.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;

use nalgebra::{Quaternion, UnitQuaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::*;
use crate::collision::{self, certify_top, check_real_table, check_table, min_leg_length};
use crate::geometry::TableSpec;
use crate::ground::Ground;
use crate::solver::balance_by_turning;

pub const SUITES: [&str; 6] = [
    "frames",
    "critical-k",
    "uniqueness",
    "d-monotone",
    "coplanar",
    "sharpness",
];
pub const DEFAULT_SEED: u64 = 2024;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }

    fn recorded(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Check::new(name, true, format!("recorded: {}", detail.into()))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown suite '{0}' (expected one of: frames, critical-k, uniqueness, d-monotone, coplanar, sharpness)")]
pub struct UnknownSuite(pub String);

/// Runs the named suite.
pub fn run_suite(name: &str, seed: u64) -> Result<Vec<Check>, UnknownSuite> {
    Ok(match name {
        "frames" => frames(seed, 100_000),
        "critical-k" => critical_k(256),
        "uniqueness" => uniqueness(seed, 100),
        "d-monotone" => d_monotone(),
        "coplanar" => coplanar(seed, 20),
        "sharpness" => sharpness(),
        other => return Err(UnknownSuite(other.to_string())),
    })
}

/// Uniformly random rotation applied to the standard basis.
pub fn random_frame(rng: &mut ChaCha8Rng) -> [Vec3; 3] {
    let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let r = UnitQuaternion::from_quaternion(Quaternion::new(q[0], q[1], q[2], q[3]));
    [r * Vec3::x(), r * Vec3::y(), r * Vec3::z()]
}

/// Bumps ground number `i` of the random family used by the suites: eight
/// bumps of width 0.5 rescaled to Lipschitz bound `target`.
pub fn random_bumps(seed: u64, i: u64, target: f64) -> Ground {
    Ground::bumps(seed.wrapping_mul(1_000_003).wrapping_add(i), 8, 0.5, target)
}

pub fn frames(seed: u64, count: usize) -> Vec<Check> {
    let mut out = Vec::new();
    let basis = frame_slopes([Vec3::x(), Vec3::y(), Vec3::z()]).unwrap();
    out.push(Check::new(
        "standard basis",
        basis.angles.beta == [0.0, 0.0, FRAC_PI_2] && basis.angles.sin_squared_sum() == 1.0,
        format!("beta = {:?}", basis.angles.beta),
    ));
    let t = frame_slopes(tripod()).unwrap();
    let worst = t
        .slopes
        .iter()
        .map(|s| (s - FRAC_1_SQRT_2).abs())
        .fold(0.0, f64::max);
    out.push(Check::new(
        "tripod slopes",
        worst <= 1e-12,
        format!(
            "slopes {:?}, max |slope - 1/sqrt(2)| = {worst:.3e}, angle {:.2} deg",
            t.slopes,
            critical_angle_degrees()
        ),
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    let mut failures = 0;
    for _ in 0..count {
        match frame_slopes(random_frame(&mut rng)) {
            Ok(s) => worst = worst.max((s.angles.sin_squared_sum() - 1.0).abs()),
            Err(_) => failures += 1,
        }
    }
    out.push(Check::new(
        "frame identity",
        failures == 0 && worst <= 1e-12,
        format!("{count} random frames, max |sum sin^2 - 1| = {worst:.3e}, {failures} rejected"),
    ));
    out
}

pub fn critical_k(grid: usize) -> Vec<Check> {
    let mut out = Vec::new();
    for r in [0.25, 0.5, 0.75, 1.0] {
        let spec = TableSpec::new(r, 0.0).unwrap();
        let c = critical_constant(&spec, grid);
        out.push(Check::new(
            format!("k* r={r}"),
            (c.k - FRAC_1_SQRT_2).abs() <= 1e-4,
            format!(
                "k* = {:.7} (1/sqrt(2) = {FRAC_1_SQRT_2:.7}, error {:.2e}), angle {:.2} deg",
                c.k,
                (c.k - FRAC_1_SQRT_2).abs(),
                c.k.atan().to_degrees()
            ),
        ));
        let spread = c
            .slopes
            .iter()
            .map(|s| (s - FRAC_1_SQRT_2).abs())
            .fold(0.0, f64::max);
        out.push(Check::new(
            format!("tripod r={r}"),
            spread <= 1e-3 && c.incline.abs() <= FRAC_PI_4,
            format!(
                "slopes {:.7?} at phi = {:.6}, theta = {:.6}",
                c.slopes, c.incline, c.tilt
            ),
        ));
        out.push(Check::new(
            format!("lower bound r={r}"),
            c.grid_min >= FRAC_1_SQRT_2 - 1e-9,
            format!("min over {grid}x{grid} grid = {:.10}", c.grid_min),
        ));
    }
    out
}

pub fn uniqueness(seed: u64, cases: usize) -> Vec<Check> {
    let mut out = Vec::new();
    let square = TableSpec::square(0.0);
    let flat: Vec<usize> = [0.0, 0.5, 1.0, 2.0, 3.0]
        .iter()
        .map(|&g| uniqueness_scan(&Ground::Flat, &square, g, 10_000).unwrap_or(0))
        .collect();
    out.push(Check::new(
        "flat",
        flat.iter().all(|&c| c == 1),
        format!("sign changes {flat:?}"),
    ));

    let counts: Vec<Result<usize, VerifyError>> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64) << 16);
            let ground = random_bumps(seed, i as u64, 0.70);
            let ratio = if i % 2 == 0 {
                1.0
            } else {
                0.25 + 0.75 * rng.random::<f64>()
            };
            let spec = TableSpec::new(ratio, 0.0).unwrap();
            let gamma = PI * rng.random::<f64>();
            uniqueness_scan(&ground, &spec, gamma, 10_000)
        })
        .collect();
    let ones = counts.iter().filter(|c| matches!(c, Ok(1))).count();
    out.push(Check::new(
        "bumps k<=0.70",
        ones == cases,
        format!("{ones}/{cases} cases with exactly one sign change"),
    ));

    let steep: Vec<usize> = (0..20)
        .map(|i| {
            let ground = random_bumps(seed, 10_000 + i, 0.95);
            uniqueness_scan(&ground, &square, PI * i as f64 / 20.0, 10_000).unwrap_or(0)
        })
        .collect();
    out.push(Check::recorded(
        "bumps k=0.95",
        format!("max sign changes {}", steep.iter().max().unwrap()),
    ));
    out
}

pub fn d_monotone() -> Vec<Check> {
    let grounds = [
        Ground::Flat,
        Ground::plane(0.5, 0.0),
        Ground::plane(1.0, 0.0),
        Ground::plane(0.6, -0.8),
        Ground::cone(FRAC_1_SQRT_2, 1.0),
        Ground::ridge(0.9),
        Ground::radial(0.2, 3.0),
        Ground::bumps(1, 8, 0.5, 0.7),
        Ground::bumps(2, 8, 0.3, 1.0),
    ];
    let mut out = Vec::new();
    for g in &grounds {
        let ok = (0..16).all(|i| d_monotone_check(g, PI * i as f64 / 16.0, 1000));
        out.push(Check::new(
            format!("D monotone on {g}"),
            ok,
            "16 azimuths, 1000 points each",
        ));
    }
    let closed = [
        (Ground::Flat, 4.0),
        (Ground::plane(0.5, 0.0), 5.0),
        (Ground::plane(1.0, 0.0), 8.0),
    ];
    for (g, d1) in closed {
        let d = diagonal_gap(1.0, 0.0, &g);
        out.push(Check::new(
            format!("D(1) on {g}"),
            (d - d1).abs() <= 1e-12,
            format!("D(1) = {d}, expected {d1}"),
        ));
    }
    out
}

/// Whether `alpha` lies in a sign-change interval of a dense scan of the
/// coplanarity residual (exact zeros count as intervals of width zero).
pub fn dense_scan_agrees(ground: &Ground, spec: &TableSpec, alpha: f64, n: usize) -> bool {
    let range = coplanar_range(spec);
    let step = range / n as f64;
    let values: Vec<f64> = (0..=n)
        .map(|i| coplanar_residual(ground, spec, step * i as f64))
        .collect();
    (0..n).any(|i| {
        let (a, b) = (step * i as f64, step * (i + 1) as f64);
        let brackets = values[i] * values[i + 1] <= 0.0;
        brackets && alpha >= a - 1e-12 && alpha <= b + 1e-12
    })
}

pub fn coplanar(seed: u64, cases: usize) -> Vec<Check> {
    let mut out = Vec::new();
    let square = TableSpec::square(0.0);
    match coplanar_rotation(&Ground::plane(0.5, 0.0), &square) {
        Ok(r) => out.push(Check::new(
            "plane",
            r.identically_zero && r.alpha == 0.0,
            format!(
                "identically zero: {}, alpha = {}",
                r.identically_zero, r.alpha
            ),
        )),
        Err(e) => out.push(Check::new("plane", false, e.to_string())),
    }

    let mut grounds = vec![(Ground::bumps(3, 8, 0.5, 0.7), square)];
    for i in 0..cases as u64 {
        let ratio = [1.0, 0.5, 0.75, 0.3][i as usize % 4];
        grounds.push((
            random_bumps(seed, 20_000 + i, 0.7),
            TableSpec::new(ratio, 0.0).unwrap(),
        ));
    }
    let results: Vec<(bool, String)> = grounds
        .par_iter()
        .map(|(g, spec)| match coplanar_rotation(g, spec) {
            Ok(r) => {
                let agree = dense_scan_agrees(g, spec, r.alpha, 10_000);
                (
                    r.residual.abs() <= COPLANAR_TOLERANCE && agree,
                    format!(
                        "r={} alpha* = {:.12}, |residual| = {:.2e}, dense scan agrees: {agree}",
                        spec.ratio(),
                        r.alpha,
                        r.residual.abs()
                    ),
                )
            }
            Err(e) => (false, e.to_string()),
        })
        .collect();
    let (first, rest) = results.split_first().unwrap();
    out.push(Check::new("bumps seed=3", first.0, first.1.clone()));
    let good = rest.iter().filter(|r| r.0).count();
    let worst = rest
        .iter()
        .find(|r| !r.0)
        .map_or(String::new(), |r| format!("; first failure: {}", r.1));
    out.push(Check::new(
        format!("{cases} bumps grounds"),
        good == rest.len(),
        format!(
            "{good}/{} coplanar rotations found and confirmed{worst}",
            rest.len()
        ),
    ));

    let cliff = match coplanar_rotation(&Ground::cliff(), &square) {
        Ok(r) => format!("alpha = {}, residual {:.2e}", r.alpha, r.residual),
        Err(e) => e.to_string(),
    };
    out.push(Check::recorded("cliff", cliff));
    out
}

/// A critically tilted balanced table and the highest `1/sqrt(2)`-Lipschitz
/// ground through its feet.
///
/// The long side `AD` is horizontal and the short side `AB` rises with slope
/// `1/sqrt(2)`. With legs of length exactly half the long side, the top's
/// point above the midpoint of `AD` lies on the certificate cones of both `A`
/// and `D`, and the ground (the lower envelope of the feet's cones) touches
/// it there. Shorter legs put that point below the ground.
pub fn sharpness_witness(spec: &TableSpec) -> (Ground, PlacedTable) {
    let long = spec.long_side();
    let short = spec.short_side();
    let rise = 1.0 / 3.0_f64.sqrt();
    let ex = Vec3::x();
    let ey = Vec3::new(0.0, (1.0 - rise * rise).sqrt(), rise);
    let a = -0.5 * long * ex - 0.5 * short * ey;
    let b = -0.5 * long * ex + 0.5 * short * ey;
    let u = a.normalize();
    let (cb, sb) = spec.cos_sin();
    let e2 = (b - cb * u) / sb;
    let frame = Frame {
        u,
        e2,
        n: u.cross(&e2),
    };
    let table = PlacedTable::from_frame(Vec3::zeros(), frame, spec);
    let anchors = table.vertices().map(|v| [v.x, v.y, v.z]).to_vec();
    (Ground::envelope(FRAC_1_SQRT_2, anchors), table)
}

pub fn sharpness() -> Vec<Check> {
    let mut out = Vec::new();
    let cone = Ground::cone(FRAC_1_SQRT_2, 1.0);
    for r in [0.5, 0.75, 1.0] {
        let l = min_leg_length(r).unwrap();
        let at = |leg: f64| TableSpec::new(r, leg).unwrap();

        let report = balance_by_turning(&cone, &at(l));
        match check_real_table(&cone, &at(l), &report) {
            Ok(c) => out.push(Check::new(
                format!("cone r={r} L=min"),
                c.pass && c.certificate_pass,
                format!(
                    "L = {l:.7}, top clearance {:.3e}, leg clearance {:.3e}, certificate {}",
                    c.min_top_clearance, c.min_leg_clearance, c.certificate_pass
                ),
            )),
            Err(e) => out.push(Check::new(
                format!("cone r={r} L=min"),
                false,
                e.to_string(),
            )),
        }
        let short = l - 0.01;
        let report = balance_by_turning(&cone, &at(short));
        let shorter = check_real_table(&cone, &at(short), &report);
        if r == 1.0 {
            out.push(match shorter {
                Ok(c) => Check::new(
                    format!("cone r={r} L=min-0.01"),
                    !c.pass && (c.min_top_clearance + 0.01).abs() <= 1e-6,
                    format!(
                        "fails: {}, top clearance {:.7}",
                        !c.pass, c.min_top_clearance
                    ),
                ),
                Err(e) => Check::new(format!("cone r={r} L=min-0.01"), false, e.to_string()),
            });
        } else {
            // The cone's apex is only 1/sqrt(2) high, which legs of
            // min_leg_length(r) - 0.01 still clear for r < 1.
            out.push(Check::recorded(
                format!("cone r={r} L=min-0.01"),
                match shorter {
                    Ok(c) => format!("pass {}, top clearance {:.5}", c.pass, c.min_top_clearance),
                    Err(e) => e.to_string(),
                },
            ));
        }

        let (ground, table) = sharpness_witness(&at(l));
        let tight = check_table(&ground, &at(l), &table);
        out.push(match tight {
            Ok(c) => Check::new(
                format!("tilted r={r} L=min"),
                c.pass && c.certificate_pass && c.min_top_clearance.abs() <= 1e-6,
                format!(
                    "top clearance {:.3e}, certificate {}",
                    c.min_top_clearance, c.certificate_pass
                ),
            ),
            Err(e) => Check::new(format!("tilted r={r} L=min"), false, e.to_string()),
        });
        let loose = check_table(&ground, &at(short), &table);
        let cert = certify_top(&table, &at(short), collision::DEFAULT_BOUNDARY_SAMPLES);
        out.push(match (loose, cert) {
            (Ok(c), Ok(cert)) => Check::new(
                format!("tilted r={r} L=min-0.01"),
                !c.pass && !cert && c.min_top_clearance < 0.0,
                format!(
                    "fails: {}, top clearance {:.3e}, certificate {cert}",
                    !c.pass, c.min_top_clearance
                ),
            ),
            (Err(e), _) | (_, Err(e)) => {
                Check::new(format!("tilted r={r} L=min-0.01"), false, e.to_string())
            }
        });
    }
    out
}
