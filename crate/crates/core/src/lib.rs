//! Balancing a rectangular table on uneven ground by turning it on the spot.
//!
//! The core pieces are:
//!
//! - [`ground`]: height fields `g: R^2 -> R` with Lipschitz bounds, a
//!   descriptor parser and gridded heightmaps.
//! - [`geometry`]: poses, frames and vertex placement of the table.
//! - [`solver`]: the turning procedure (seat a diagonal, tilt to equal
//!   hovering, sweep the azimuth) and a brute-force orientation search.
//! - [`collision`]: clearance checks for the real table with legs and top.
//! - [`verify`]: numerical checks of the geometric facts the procedure
//!   relies on.
//! - [`report`]: deterministic JSON and CSV output.
//!
//! ```
//! use tableturn::{ground::Ground, geometry::TableSpec, solver};
//!
//! let ground = Ground::bumps(7, 8, 0.5, 0.7);
//! let spec = TableSpec::new(0.5, 1.0).unwrap();
//! let report = solver::balance_by_turning(&ground, &spec);
//! assert!(report.status.is_balanced());
//! assert!(report.max_residual() <= 1e-9);
//! ```

pub mod collision;
pub mod geometry;
pub mod ground;
pub mod report;
pub mod solver;
pub mod verify;
