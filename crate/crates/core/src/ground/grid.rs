//! Gridded heightmaps with bilinear interpolation.

use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("cannot read grid file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed header (line 1): {0}")]
    Header(String),
    #[error("grid needs nx >= 2 and ny >= 2, got nx={nx}, ny={ny}")]
    Dims { nx: usize, ny: usize },
    #[error("grid spacing must be positive, got dx={dx}, dy={dy}")]
    Spacing { dx: f64, dy: f64 },
    #[error("line {line}: {msg}")]
    Row { line: usize, msg: String },
    #[error("expected {expected} height rows, found {found}")]
    RowCount { expected: usize, found: usize },
}

/// Heights sampled on a regular lattice `origin + (i*dx, j*dy)`.
///
/// Inside the lattice the surface is bilinear per cell. Outside it the query
/// point is clamped to the nearest point of the lattice rectangle, which keeps
/// the ground continuous and does not raise its Lipschitz constant.
#[derive(Clone, Debug, PartialEq)]
pub struct GridGround {
    pub origin: [f64; 2],
    pub spacing: [f64; 2],
    pub dims: [usize; 2],
    /// Row-major, `heights[j * nx + i]` is the height at column `i`, row `j`.
    heights: Vec<f64>,
    lipschitz: f64,
}

impl GridGround {
    pub fn new(
        origin: [f64; 2],
        spacing: [f64; 2],
        dims: [usize; 2],
        heights: Vec<f64>,
    ) -> Result<Self, GridError> {
        let [nx, ny] = dims;
        if nx < 2 || ny < 2 {
            return Err(GridError::Dims { nx, ny });
        }
        let [dx, dy] = spacing;
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(GridError::Spacing { dx, dy });
        }
        if !origin.iter().all(|v| v.is_finite()) {
            return Err(GridError::Header("non-finite origin".into()));
        }
        if heights.len() != nx * ny {
            return Err(GridError::RowCount {
                expected: ny,
                found: heights.len() / nx,
            });
        }
        if let Some(pos) = heights.iter().position(|h| !h.is_finite()) {
            return Err(GridError::Row {
                line: pos / nx + 2,
                msg: "non-finite height".into(),
            });
        }
        let mut grid = GridGround {
            origin,
            spacing,
            dims,
            heights,
            lipschitz: 0.0,
        };
        grid.lipschitz = grid.max_corner_gradient();
        Ok(grid)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.heights[j * self.dims[0] + i]
    }

    pub fn height(&self, x: f64, y: f64) -> f64 {
        let (i, s) = locate(x, self.origin[0], self.spacing[0], self.dims[0]);
        let (j, t) = locate(y, self.origin[1], self.spacing[1], self.dims[1]);
        let h00 = self.at(i, j);
        let h10 = self.at(i + 1, j);
        let h01 = self.at(i, j + 1);
        let h11 = self.at(i + 1, j + 1);
        let bottom = h00 + (h10 - h00) * s;
        let top = h01 + (h11 - h01) * s;
        bottom + (top - bottom) * t
    }

    /// Exact Lipschitz constant of the interpolant.
    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz
    }

    // The gradient of a bilinear patch is affine in position, so its norm is
    // convex and peaks at one of the four cell corners.
    fn max_corner_gradient(&self) -> f64 {
        let [nx, ny] = self.dims;
        let [dx, dy] = self.spacing;
        let mut best = 0.0_f64;
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let h00 = self.at(i, j);
                let h10 = self.at(i + 1, j);
                let h01 = self.at(i, j + 1);
                let h11 = self.at(i + 1, j + 1);
                let gx = [(h10 - h00) / dx, (h11 - h01) / dx];
                let gy = [(h01 - h00) / dy, (h11 - h10) / dy];
                for a in gx {
                    for b in gy {
                        best = best.max(a.hypot(b));
                    }
                }
            }
        }
        best
    }
}

/// Cell index and in-cell fraction for one axis, clamped to the lattice.
fn locate(v: f64, origin: f64, step: f64, n: usize) -> (usize, f64) {
    let u = ((v - origin) / step).clamp(0.0, (n - 1) as f64);
    let cell = (u.floor() as usize).min(n - 2);
    (cell, u - cell as f64)
}

/// Reads a grid file.
///
/// Line 1 is `x0 y0 dx dy nx ny`; then `ny` lines of `nx` heights each, the
/// first line holding row `y0`. Blank trailing lines are ignored; CRLF is
/// accepted.
pub fn load_grid(path: impl AsRef<Path>) -> Result<super::Ground, GridError> {
    let text = fs::read_to_string(path)?;
    parse_grid(&text).map(super::Ground::Grid)
}

pub(crate) fn parse_grid(text: &str) -> Result<GridGround, GridError> {
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r'));
    let header = lines
        .next()
        .ok_or_else(|| GridError::Header("empty file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(GridError::Header(format!(
            "expected 6 fields `x0 y0 dx dy nx ny`, found {}",
            fields.len()
        )));
    }
    let real = |s: &str| -> Result<f64, GridError> {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| GridError::Header(format!("bad real `{s}`")))
    };
    let count = |s: &str| -> Result<usize, GridError> {
        s.parse::<usize>()
            .map_err(|_| GridError::Header(format!("bad count `{s}`")))
    };
    let origin = [real(fields[0])?, real(fields[1])?];
    let spacing = [real(fields[2])?, real(fields[3])?];
    let dims = [count(fields[4])?, count(fields[5])?];
    if dims[0] < 2 || dims[1] < 2 {
        return Err(GridError::Dims {
            nx: dims[0],
            ny: dims[1],
        });
    }

    let mut heights = Vec::with_capacity(dims[0] * dims[1]);
    let mut rows = 0;
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        if line.trim().is_empty() {
            continue;
        }
        if rows == dims[1] {
            return Err(GridError::Row {
                line: lineno,
                msg: format!("more than ny={} rows", dims[1]),
            });
        }
        let before = heights.len();
        for tok in line.split_whitespace() {
            let h = tok.parse::<f64>().map_err(|_| GridError::Row {
                line: lineno,
                msg: format!("bad height `{tok}`"),
            })?;
            if !h.is_finite() {
                return Err(GridError::Row {
                    line: lineno,
                    msg: "non-finite height".into(),
                });
            }
            heights.push(h);
        }
        if heights.len() - before != dims[0] {
            return Err(GridError::Row {
                line: lineno,
                msg: format!(
                    "expected {} heights, found {}",
                    dims[0],
                    heights.len() - before
                ),
            });
        }
        rows += 1;
    }
    if rows != dims[1] {
        return Err(GridError::RowCount {
            expected: dims[1],
            found: rows,
        });
    }
    GridGround::new(origin, spacing, dims, heights)
}
