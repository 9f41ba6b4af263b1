//! Clearance of the real table: legs plus solid top.
//!
//! Two independent checks are provided. Sampled clearance measures the
//! vertical distance of leg and top points to the actual ground. The cone
//! certificate is ground-free: a point lying in the upward cone of slope
//! `1/sqrt(2)` over some foot cannot be below any ground of Lipschitz constant
//! at most `1/sqrt(2)` through that foot.

use std::f64::consts::FRAC_1_SQRT_2;

use thiserror::Error;

use crate::geometry::{top_corners, upward_normal, GeometryError, PlacedTable, TableSpec, Vec3};
use crate::ground::Ground;
use crate::solver::{vertical_distance, BalanceReport};

/// Clearance at or above this counts as "not below the ground"; grazing
/// contact passes.
pub const CLEARANCE_TOLERANCE: f64 = -1e-9;
/// Slope of the certificate cones.
pub const CONE_SLOPE: f64 = FRAC_1_SQRT_2;
pub const DEFAULT_BOUNDARY_SAMPLES: usize = 4096;
pub const DEFAULT_LEG_SAMPLES: usize = 257;
/// Odd, so the sampled top includes its center.
pub const DEFAULT_TOP_GRID: usize = 129;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CollisionError {
    #[error("balance report carries no balanced table")]
    NotBalanced,
    #[error("side ratio {0} outside (0, 1]")]
    Ratio(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Copy, Debug)]
pub struct ClearanceReport {
    pub min_leg_clearance: f64,
    pub min_top_clearance: f64,
    pub certificate_pass: bool,
    /// Lowest sampled point of the real table relative to the ground.
    pub worst_point: Vec3,
    pub samples: usize,
    /// Sampled clearances are all at or above [`CLEARANCE_TOLERANCE`].
    pub pass: bool,
}

/// Shortest legs that guarantee a collision-free balanced table of side
/// ratio `r`: `1/sqrt(1 + r^2)`.
pub fn min_leg_length(r: f64) -> Result<f64, CollisionError> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(CollisionError::Ratio(r));
    }
    Ok(1.0 / (1.0 + r * r).sqrt())
}

fn min_over<'a>(points: impl Iterator<Item = Vec3> + 'a, ground: &'a Ground) -> (f64, Vec3, usize) {
    let mut best = (f64::INFINITY, Vec3::zeros(), 0);
    for p in points {
        let d = vertical_distance(&p, ground);
        if d < best.0 {
            best.0 = d;
            best.1 = p;
        }
        best.2 += 1;
    }
    best
}

fn leg_points(table: &PlacedTable, spec: &TableSpec, n: usize) -> Result<Vec<Vec3>, GeometryError> {
    let top = top_corners(table, spec)?;
    let n = n.max(2);
    let mut pts = Vec::with_capacity(4 * n);
    for (foot, head) in table.vertices().iter().zip(top.iter()) {
        for i in 0..n {
            let s = i as f64 / (n - 1) as f64;
            pts.push(foot + s * (head - foot));
        }
    }
    Ok(pts)
}

/// Bilinear grid over the top `A'B'C'D'`, `grid x grid` points including the
/// corners.
fn top_points(
    table: &PlacedTable,
    spec: &TableSpec,
    grid: usize,
) -> Result<Vec<Vec3>, GeometryError> {
    let [a, b, _, d] = top_corners(table, spec)?;
    let grid = grid.max(2);
    let ab = b - a;
    let ad = d - a;
    let mut pts = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        let s = i as f64 / (grid - 1) as f64;
        for j in 0..grid {
            let t = j as f64 / (grid - 1) as f64;
            pts.push(a + s * ab + t * ad);
        }
    }
    Ok(pts)
}

/// `m` points spaced uniformly by arc length along the top's perimeter.
fn boundary_points(
    table: &PlacedTable,
    spec: &TableSpec,
    m: usize,
) -> Result<Vec<Vec3>, GeometryError> {
    let corners = top_corners(table, spec)?;
    let sides: Vec<(Vec3, Vec3)> = (0..4).map(|i| (corners[i], corners[(i + 1) % 4])).collect();
    let lengths: Vec<f64> = sides.iter().map(|(p, q)| (q - p).norm()).collect();
    let perimeter: f64 = lengths.iter().sum();
    let m = m.max(4);
    let mut pts = Vec::with_capacity(m);
    for k in 0..m {
        let mut s = perimeter * k as f64 / m as f64;
        for (side, len) in sides.iter().zip(&lengths) {
            if s <= *len || std::ptr::eq(side, sides.last().unwrap()) {
                pts.push(side.0 + (s / len).min(1.0) * (side.1 - side.0));
                break;
            }
            s -= len;
        }
    }
    Ok(pts)
}

/// Smallest vertical distance over `n` uniform samples on each leg.
pub fn leg_clearance(
    table: &PlacedTable,
    spec: &TableSpec,
    ground: &Ground,
    n: usize,
) -> Result<f64, CollisionError> {
    let pts = leg_points(table, spec, n)?;
    Ok(min_over(pts.into_iter(), ground).0)
}

/// Whether `p` lies in the upward cone of slope `1/sqrt(2)` over one of the
/// table's feet.
pub fn cone_certificate(p: &Vec3, table: &PlacedTable) -> bool {
    table.vertices().iter().any(|v| {
        let rise = p.z - v.z;
        let run = (p.x - v.x).hypot(p.y - v.y);
        rise >= CONE_SLOPE * run - 1e-12
    })
}

/// Whether the whole solid top is covered by the feet's certificate cones.
///
/// Checks `m` points along the perimeter of the top and a
/// `ceil(sqrt(m)) | 1`-square grid over its interior. The perimeter alone
/// suffices once the union of cone sections is simply connected, which holds
/// from the critical leg length on; below it the sections can leave a hole
/// in the middle of the top that only the interior grid sees.
pub fn certify_top(
    table: &PlacedTable,
    spec: &TableSpec,
    m: usize,
) -> Result<bool, CollisionError> {
    let boundary = boundary_points(table, spec, m)?;
    if !boundary.iter().all(|p| cone_certificate(p, table)) {
        return Ok(false);
    }
    let side = ((m as f64).sqrt().ceil() as usize) | 1;
    let interior = top_points(table, spec, side.max(3))?;
    Ok(interior.iter().all(|p| cone_certificate(p, table)))
}

/// Smallest vertical distance over a `grid x grid` sample of the solid top.
pub fn top_clearance(
    table: &PlacedTable,
    spec: &TableSpec,
    ground: &Ground,
    grid: usize,
) -> Result<f64, CollisionError> {
    let pts = top_points(table, spec, grid)?;
    Ok(min_over(pts.into_iter(), ground).0)
}

/// Full real-table check of a balanced pose with default sampling densities.
pub fn check_real_table(
    ground: &Ground,
    spec: &TableSpec,
    report: &BalanceReport,
) -> Result<ClearanceReport, CollisionError> {
    let table = match (&report.table, report.status.is_balanced()) {
        (Some(t), true) => t,
        _ => return Err(CollisionError::NotBalanced),
    };
    check_table(ground, spec, table)
}

/// Real-table check of an arbitrary placed table.
pub fn check_table(
    ground: &Ground,
    spec: &TableSpec,
    table: &PlacedTable,
) -> Result<ClearanceReport, CollisionError> {
    upward_normal(table)?;
    let legs = leg_points(table, spec, DEFAULT_LEG_SAMPLES)?;
    let top = top_points(table, spec, DEFAULT_TOP_GRID)?;
    let (leg_min, leg_worst, leg_n) = min_over(legs.into_iter(), ground);
    let (top_min, top_worst, top_n) = min_over(top.into_iter(), ground);
    let certificate_pass = certify_top(table, spec, DEFAULT_BOUNDARY_SAMPLES)?;
    Ok(ClearanceReport {
        min_leg_clearance: leg_min,
        min_top_clearance: top_min,
        certificate_pass,
        worst_point: if leg_min <= top_min {
            leg_worst
        } else {
            top_worst
        },
        samples: leg_n + top_n,
        pass: leg_min >= CLEARANCE_TOLERANCE && top_min >= CLEARANCE_TOLERANCE,
    })
}

#[cfg(test)]
#[allow(clippy::approx_constant)] // 0.7071068 is the seven-digit value users type.
mod tests {
    use super::*;
    use crate::geometry::{place_vertices, Pose};
    use std::f64::consts::FRAC_PI_2;

    fn horizontal_square(leg: f64) -> (PlacedTable, TableSpec) {
        let spec = TableSpec::square(leg);
        let pose = Pose {
            azimuth: 0.0,
            diag_param: 1.0,
            tilt: 0.0,
        };
        (place_vertices(&spec, &pose, &Ground::Flat).unwrap(), spec)
    }

    #[test]
    fn min_leg_values() {
        assert!((min_leg_length(1.0).unwrap() - 0.7071068).abs() < 1e-7);
        assert!((min_leg_length(0.5).unwrap() - 0.8944272).abs() < 1e-7);
        assert!(min_leg_length(0.0).is_err());
        assert!(min_leg_length(1.5).is_err());
        let mut last = 1.0;
        for i in 1..=100 {
            let v = min_leg_length(i as f64 / 100.0).unwrap();
            assert!(v < last && v >= FRAC_1_SQRT_2 - 1e-16);
            last = v;
        }
    }

    #[test]
    fn cone_membership() {
        let (t, _) = horizontal_square(0.0);
        assert!(cone_certificate(&(t.a + Vec3::new(0.0, 0.0, 1.0)), &t));
        assert!(cone_certificate(
            &(t.a + Vec3::new(1.0, 0.0, FRAC_1_SQRT_2)),
            &t
        ));
        // Beyond A along +x: no other foot is closer.
        assert!(!cone_certificate(&(t.a + Vec3::new(1.0, 0.0, 0.5)), &t));
    }

    #[test]
    fn top_certificate_horizontal_square() {
        let (t, spec) = horizontal_square(FRAC_1_SQRT_2);
        assert!(certify_top(&t, &spec, 4096).unwrap());
        let (t, spec) = horizontal_square(0.6);
        assert!(!certify_top(&t, &spec, 4096).unwrap());
        // The uncovered spot is the top's center.
        let center = t.center() + Vec3::new(0.0, 0.0, 0.6);
        assert!(!cone_certificate(&center, &t));
        let (t, spec) = horizontal_square(0.8);
        assert!(certify_top(&t, &spec, 4096).unwrap());
    }

    #[test]
    fn flat_clearances() {
        let (t, spec) = horizontal_square(0.5);
        assert_eq!(leg_clearance(&t, &spec, &Ground::Flat, 16).unwrap(), 0.0);
        assert!((top_clearance(&t, &spec, &Ground::Flat, 9).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn vertical_table_rejected() {
        let spec = TableSpec::square(0.5);
        let pose = Pose {
            azimuth: 0.0,
            diag_param: 1.0,
            tilt: -FRAC_PI_2,
        };
        let t = place_vertices(&spec, &pose, &Ground::Flat).unwrap();
        assert!(leg_clearance(&t, &spec, &Ground::Flat, 4).is_err());
        assert!(top_clearance(&t, &spec, &Ground::Flat, 4).is_err());
        assert!(certify_top(&t, &spec, 16).is_err());
    }

    #[test]
    fn boundary_sampling_covers_perimeter() {
        let (t, spec) = horizontal_square(0.0);
        let pts = boundary_points(&t, &spec, 400).unwrap();
        assert_eq!(pts.len(), 400);
        // Every sample lies on one of the four sides |x| + |y| = 1.
        for p in pts {
            assert!((p.x.abs() + p.y.abs() - 1.0).abs() < 1e-12);
        }
    }
}
