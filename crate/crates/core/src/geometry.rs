//! Rigid placement of the table.
//!
//! Conventions:
//! - The mathematical table is a rectangle with diagonals of length 2, so all
//!   four vertices sit at distance 1 from the center `M`.
//! - A pose is `(azimuth, diag_param, tilt)`. The vertex `A` sits on the ground
//!   above `diag_param * (cos azimuth, sin azimuth)`, `C` above the antipodal
//!   point, and `M` is the midpoint of `AC` (hence on the z-axis).
//! - `u = (A - C)/|A - C|`, `w` is the horizontal projection of `u` rotated by
//!   +90 degrees, `v = u x w`. Tilting by `theta` about `AC` turns the in-plane
//!   direction `e2 = -sin(theta) v + cos(theta) w`; `theta = -pi/2` stands the
//!   table up with `B` above `AC`.
//! - `B = M + cos(beta) u + sin(beta) e2` with `beta = 2 atan(r)`, `D` is its
//!   antipode, and the plane normal `n = u x e2` makes `A, B, C, D`
//!   counterclockwise when seen from `+n`. For `|theta| < pi/2`, `n_z > 0`.
//!
//! Tables with a diagonal other than 2 are handled by scaling the ground: a
//! table of diagonal `d` on ground `g` behaves like the canonical table on
//! `(x, y) -> (2/d) g(d x / 2, d y / 2)`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::Vector3;
use thiserror::Error;

use crate::ground::Ground;

pub type Vec3 = Vector3<f64>;

/// Allowed deviation of `4t^2 + (z_A - z_C)^2` from 4 for a seated diagonal.
pub const SEAT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("side ratio {0} outside (0, 1]")]
    Ratio(f64),
    #[error("leg length {0} must be finite and >= 0")]
    LegLength(f64),
    #[error("pose does not seat the diagonal: 4t^2 + dz^2 = {0}, expected 4")]
    Unseated(f64),
    #[error("segment length {0} differs from the diagonal length 2")]
    DiagonalLength(f64),
    #[error("points coincide")]
    CoincidentPoints,
    #[error("table plane is vertical; the real table is undefined here")]
    VerticalPlane,
}

/// Rectangle shape (short side / long side) and leg length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableSpec {
    ratio: f64,
    leg_length: f64,
}

impl TableSpec {
    pub fn new(ratio: f64, leg_length: f64) -> Result<Self, GeometryError> {
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(GeometryError::Ratio(ratio));
        }
        if !(leg_length >= 0.0 && leg_length.is_finite()) {
            return Err(GeometryError::LegLength(leg_length));
        }
        Ok(TableSpec { ratio, leg_length })
    }

    pub fn square(leg_length: f64) -> Self {
        Self::new(1.0, leg_length).expect("valid leg length")
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn leg_length(&self) -> f64 {
        self.leg_length
    }

    pub fn with_leg_length(&self, leg_length: f64) -> Result<Self, GeometryError> {
        Self::new(self.ratio, leg_length)
    }

    /// Angle `beta` between `MA` and `MB`.
    pub fn half_angle(&self) -> f64 {
        2.0 * self.ratio.atan()
    }

    pub fn short_side(&self) -> f64 {
        2.0 * (0.5 * self.half_angle()).sin()
    }

    pub fn long_side(&self) -> f64 {
        2.0 * (0.5 * self.half_angle()).cos()
    }

    /// `(cos beta, sin beta)` computed rationally from `r`.
    pub(crate) fn cos_sin(&self) -> (f64, f64) {
        let r2 = self.ratio * self.ratio;
        ((1.0 - r2) / (1.0 + r2), 2.0 * self.ratio / (1.0 + r2))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub azimuth: f64,
    pub diag_param: f64,
    pub tilt: f64,
}

/// Orthonormal frame of a placed table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    /// Along `C -> A`.
    pub u: Vec3,
    /// In-plane, perpendicular to `u`, towards `B`'s side.
    pub e2: Vec3,
    /// Plane normal `u x e2`.
    pub n: Vec3,
}

impl Frame {
    /// Frame of a table whose diagonal points along `u`, whose diagonal
    /// projects onto azimuth `azimuth`, tilted by `tilt` about the diagonal.
    pub fn tilted(u: Vec3, azimuth: f64, tilt: f64) -> Self {
        let w = Vec3::new(-azimuth.sin(), azimuth.cos(), 0.0);
        let v = u.cross(&w);
        let (s, c) = tilt.sin_cos();
        let e2 = -s * v + c * w;
        Frame {
            u,
            e2,
            n: u.cross(&e2),
        }
    }

    /// Unit diagonal direction at the given azimuth and incline.
    pub fn diagonal(azimuth: f64, incline: f64) -> Vec3 {
        let (sg, cg) = azimuth.sin_cos();
        let (sp, cp) = incline.sin_cos();
        Vec3::new(cp * cg, cp * sg, sp)
    }
}

/// The four leg tips of a placed table plus its frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlacedTable {
    pub a: Vec3,
    pub b: Vec3,
    pub c: Vec3,
    pub d: Vec3,
    pub frame: Frame,
}

impl PlacedTable {
    /// Table with center `center` in the given frame.
    pub fn from_frame(center: Vec3, frame: Frame, spec: &TableSpec) -> Self {
        let (cb, sb) = spec.cos_sin();
        let mb = cb * frame.u + sb * frame.e2;
        PlacedTable {
            a: center + frame.u,
            b: center + mb,
            c: center - frame.u,
            d: center - mb,
            frame,
        }
    }

    pub fn vertices(&self) -> [Vec3; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn center(&self) -> Vec3 {
        0.5 * (self.a + self.c)
    }

    /// Largest vertex displacement between two tables after matching their
    /// labels by the best of the eight symmetries of a square labeling
    /// (rotations and reflections of `A, B, C, D`).
    pub fn distance_up_to_relabeling(&self, other: &PlacedTable) -> f64 {
        let p = self.vertices();
        let q = other.vertices();
        let mut best = f64::INFINITY;
        for shift in 0..4 {
            for reflect in [false, true] {
                let worst = (0..4)
                    .map(|i| {
                        let j = if reflect {
                            (4 + shift - i) % 4
                        } else {
                            (shift + i) % 4
                        };
                        (p[i] - q[j]).norm()
                    })
                    .fold(0.0, f64::max);
                best = best.min(worst);
            }
        }
        best
    }

    /// Tilt of the diagonal `AC` against the horizontal.
    pub fn incline(&self) -> f64 {
        self.frame.u.z.clamp(-1.0, 1.0).asin()
    }

    /// Recovers the pose of this table, assuming its center is on the z-axis.
    ///
    /// Returns `None` when the table plane is vertical or tilted past it, where
    /// no pose in the canonical tilt range describes it.
    pub fn pose(&self) -> Option<Pose> {
        let azimuth = self.a.y.atan2(self.a.x).rem_euclid(std::f64::consts::TAU);
        let diag_param = self.a.x.hypot(self.a.y);
        let w = Vec3::new(-azimuth.sin(), azimuth.cos(), 0.0);
        let v = self.frame.u.cross(&w);
        let tilt = (-self.frame.e2.dot(&v)).atan2(self.frame.e2.dot(&w));
        (tilt.abs() <= FRAC_PI_2).then_some(Pose {
            azimuth,
            diag_param,
            tilt,
        })
    }
}

/// Places the table for `pose` on `ground`.
///
/// `A` and `C` are put exactly on the ground; the pose must seat the diagonal,
/// i.e. `|AC| = 2` within [`SEAT_TOLERANCE`] on the squared length.
pub fn place_vertices(
    spec: &TableSpec,
    pose: &Pose,
    ground: &Ground,
) -> Result<PlacedTable, GeometryError> {
    let (s, c) = pose.azimuth.sin_cos();
    let (x, y) = (pose.diag_param * c, pose.diag_param * s);
    let a = Vec3::new(x, y, ground.height(x, y));
    let cc = Vec3::new(-x, -y, ground.height(-x, -y));
    let gap = (a - cc).norm_squared();
    if (gap - 4.0).abs() > SEAT_TOLERANCE {
        return Err(GeometryError::Unseated(gap));
    }
    let u = (a - cc).normalize();
    let frame = Frame::tilted(u, pose.azimuth, pose.tilt);
    let mut table = PlacedTable::from_frame(0.5 * (a + cc), frame, spec);
    // Keep the seated tips bit-exact on the ground.
    table.a = a;
    table.c = cc;
    Ok(table)
}

/// Incline `phi = asin((z_A - z_C)/2)` of a diagonal of length 2.
pub fn incline(a: &Vec3, c: &Vec3) -> Result<f64, GeometryError> {
    let len = (a - c).norm();
    if (len - 2.0).abs() > SEAT_TOLERANCE {
        return Err(GeometryError::DiagonalLength(len));
    }
    Ok((0.5 * (a.z - c.z)).clamp(-1.0, 1.0).asin())
}

/// Slope of the segment `PQ`: rise over horizontal run, `inf` if vertical.
pub fn segment_slope(p: &Vec3, q: &Vec3) -> Result<f64, GeometryError> {
    if p == q {
        return Err(GeometryError::CoincidentPoints);
    }
    Ok(vector_slope(&(q - p)))
}

/// Slope of a direction vector.
pub fn vector_slope(v: &Vec3) -> f64 {
    let run = v.x.hypot(v.y);
    if run == 0.0 {
        f64::INFINITY
    } else {
        v.z.abs() / run
    }
}

/// Corners `A', B', C', D'` of the table top: each leg tip moved by the leg
/// length along the upward plane normal.
pub fn top_corners(table: &PlacedTable, spec: &TableSpec) -> Result<[Vec3; 4], GeometryError> {
    let n = upward_normal(table)?;
    let l = spec.leg_length() * n;
    Ok(table.vertices().map(|v| v + l))
}

pub(crate) fn upward_normal(table: &PlacedTable) -> Result<Vec3, GeometryError> {
    let n = table.frame.n;
    if n.z.abs() < 1e-12 {
        return Err(GeometryError::VerticalPlane);
    }
    Ok(if n.z > 0.0 { n } else { -n })
}
