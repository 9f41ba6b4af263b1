//! Exhaustive orientation search.
//!
//! Works on any ground, continuous or not: orientations `(azimuth, incline,
//! tilt)` are sampled on a grid, the center height is chosen per orientation
//! to zero the mean vertical residual, and the best grid points are refined
//! with restarted Nelder-Mead. The objective is the largest absolute residual
//! after that offset, so zero means all four feet are on the ground.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;

use crate::geometry::{Frame, PlacedTable, TableSpec, Vec3};
use crate::ground::Ground;

/// Orientation of a table centered on the z-axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Orientation {
    pub azimuth: f64,
    pub incline: f64,
    pub tilt: f64,
}

impl Orientation {
    fn from_array(x: [f64; 3]) -> Self {
        Orientation {
            azimuth: x[0],
            incline: x[1],
            tilt: x[2],
        }
    }

    pub fn frame(&self) -> Frame {
        Frame::tilted(
            Frame::diagonal(self.azimuth, self.incline),
            self.azimuth,
            self.tilt,
        )
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BruteForceResult {
    pub orientation: Orientation,
    /// Table at the best orientation, lifted by the mean-zeroing offset.
    pub table: PlacedTable,
    pub objective: f64,
    pub evaluations: usize,
}

struct Objective<'a> {
    ground: &'a Ground,
    spec: &'a TableSpec,
}

impl Objective<'_> {
    /// Center height and objective at an orientation.
    fn eval(&self, o: &Orientation) -> (f64, f64) {
        let t = PlacedTable::from_frame(Vec3::zeros(), o.frame(), self.spec);
        let d = t.vertices().map(|v| v.z - self.ground.height(v.x, v.y));
        let mean = 0.25 * (d[0] + d[1] + d[2] + d[3]);
        let obj = d.iter().fold(0.0_f64, |m, di| m.max((di - mean).abs()));
        (-mean, obj)
    }

    fn value(&self, x: [f64; 3]) -> f64 {
        self.eval(&Orientation::from_array(x)).1
    }
}

/// Grid values over `[-half, half]`, odd count, ordered `0, +h, -h, +2h, ...`.
fn centered_axis(count: usize, half: f64) -> Vec<f64> {
    let m = count / 2;
    let step = if m == 0 { 0.0 } else { half / m as f64 };
    let mut v = vec![0.0];
    for k in 1..=m {
        v.push(k as f64 * step);
        v.push(-(k as f64) * step);
    }
    v
}

/// Best orientation found within `budget` objective evaluations.
///
/// Roughly half the budget goes to the grid (azimuth over `[0, 2pi)`, incline
/// and tilt over `[-pi/2, pi/2]`); the rest refines up to 24 well-separated grid minima. The
/// first grid point is the horizontal table at azimuth 0 and an exact zero
/// there ends the search immediately.
pub fn brute_force_balance(ground: &Ground, spec: &TableSpec, budget: usize) -> BruteForceResult {
    let objective = Objective { ground, spec };
    let budget = budget.max(1);
    let per_axis = (((budget / 2) as f64).cbrt().floor() as usize).max(1);
    let odd = if per_axis.is_multiple_of(2) {
        per_axis - 1
    } else {
        per_axis
    }
    .max(1);
    let azimuths: Vec<f64> = (0..per_axis)
        .map(|i| TAU * i as f64 / per_axis as f64)
        .collect();
    let inclines = centered_axis(odd, FRAC_PI_2);
    let tilts = centered_axis(odd, FRAC_PI_2);

    let first = [0.0, 0.0, 0.0];
    if objective.value(first) == 0.0 {
        return finish(&objective, first, 1);
    }

    let grid: Vec<(f64, [f64; 3])> = azimuths
        .par_iter()
        .flat_map_iter(|&g| {
            let objective = &objective;
            let tilts = &tilts;
            inclines.iter().flat_map(move |&p| {
                tilts.iter().map(move |&t| {
                    let x = [g, p, t];
                    (objective.value(x), x)
                })
            })
        })
        .collect();
    let mut evaluations = 1 + grid.len();

    let mut ranked: Vec<usize> = (0..grid.len()).collect();
    ranked.sort_by(|&i, &j| grid[i].0.total_cmp(&grid[j].0).then(i.cmp(&j)));

    let step = [
        TAU / per_axis as f64,
        PI / odd.max(2) as f64,
        PI / odd.max(2) as f64,
    ];
    let starts = distinct_starts(&grid, &ranked, step, MAX_STARTS);
    let remaining = budget.saturating_sub(evaluations);
    let per_start = remaining / starts.len().max(1);

    let mut best = grid[ranked[0]];
    if per_start >= 8 {
        let refined: Vec<(f64, [f64; 3], usize)> = starts
            .par_iter()
            .map(|&i| {
                let (x, f, used) =
                    nelder_mead_restarts(|x| objective.value(x), grid[i].1, step, per_start);
                (f, x, used)
            })
            .collect();
        for (f, x, used) in refined {
            evaluations += used;
            if f < best.0 {
                best = (f, x);
            }
        }
    }
    finish(&objective, best.1, evaluations)
}

const MAX_STARTS: usize = 24;

/// Best grid points, skipping any within two grid steps of one already taken
/// so that the refinements explore separate basins.
fn distinct_starts(
    grid: &[(f64, [f64; 3])],
    ranked: &[usize],
    step: [f64; 3],
    count: usize,
) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::with_capacity(count);
    for &i in ranked {
        if chosen.len() == count {
            break;
        }
        let x = grid[i].1;
        let close = chosen.iter().any(|&j| {
            let y = grid[j].1;
            let da = (x[0] - y[0]).rem_euclid(TAU);
            da.min(TAU - da) <= 2.0 * step[0] + 1e-12
                && (x[1] - y[1]).abs() <= 2.0 * step[1] + 1e-12
                && (x[2] - y[2]).abs() <= 2.0 * step[2] + 1e-12
        });
        if !close {
            chosen.push(i);
        }
    }
    chosen
}

fn finish(objective: &Objective, x: [f64; 3], evaluations: usize) -> BruteForceResult {
    let mut o = Orientation::from_array(x);
    o.azimuth = o.azimuth.rem_euclid(TAU);
    let (lift, obj) = objective.eval(&o);
    let table = PlacedTable::from_frame(Vec3::new(0.0, 0.0, lift), o.frame(), objective.spec);
    BruteForceResult {
        orientation: o,
        table,
        objective: obj,
        evaluations,
    }
}

/// Nelder-Mead with restarts around the incumbent until the budget is spent
/// or a restart stops improving.
fn nelder_mead_restarts(
    f: impl Fn([f64; 3]) -> f64,
    x0: [f64; 3],
    step: [f64; 3],
    budget: usize,
) -> ([f64; 3], f64, usize) {
    let mut x = x0;
    let mut fx = f(x);
    let mut used = 1;
    let mut scale = 1.0;
    let mut stalls = 0;
    while used + 4 < budget && stalls < 3 && fx > 0.0 {
        let s = step.map(|v| v * scale);
        let (nx, nf, n) = nelder_mead(&f, x, s, budget - used);
        used += n;
        if nf < fx {
            if nf > 0.5 * fx {
                stalls += 1;
            } else {
                stalls = 0;
            }
            x = nx;
            fx = nf;
        } else {
            stalls += 1;
        }
        scale = (scale * 0.1).max(1e-9);
    }
    (x, fx, used)
}

fn nelder_mead(
    f: &impl Fn([f64; 3]) -> f64,
    x0: [f64; 3],
    step: [f64; 3],
    budget: usize,
) -> ([f64; 3], f64, usize) {
    const N: usize = 3;
    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(N + 1);
    simplex.push((x0, f(x0)));
    for k in 0..N {
        let mut x = x0;
        x[k] += step[k];
        simplex.push((x, f(x)));
    }
    let mut used = N + 1;
    let lerp = |a: &[f64; 3], b: &[f64; 3], t: f64| -> [f64; 3] {
        std::array::from_fn(|i| a[i] + t * (b[i] - a[i]))
    };

    while used + 2 <= budget {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[N].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| {
                (0..N)
                    .map(|i| (x[i] - simplex[0].0[i]).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if simplex[0].1 == 0.0 || (spread <= 1e-16 && size <= 1e-13) || size <= 1e-15 {
            break;
        }
        let centroid: [f64; 3] =
            std::array::from_fn(|i| simplex[..N].iter().map(|(x, _)| x[i]).sum::<f64>() / N as f64);
        let worst = simplex[N];

        let xr = lerp(&centroid, &worst.0, -1.0);
        let fr = f(xr);
        used += 1;
        if fr < simplex[0].1 {
            let xe = lerp(&centroid, &worst.0, -2.0);
            let fe = f(xe);
            used += 1;
            simplex[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[N - 1].1 {
            simplex[N] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = lerp(&centroid, &xr, 0.5);
                (xc, f(xc))
            } else {
                let xc = lerp(&centroid, &worst.0, 0.5);
                (xc, f(xc))
            };
            used += 1;
            if fc < worst.1.min(fr) {
                simplex[N] = (xc, fc);
            } else {
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    let x = lerp(&best, &v.0, 0.5);
                    *v = (x, f(x));
                }
                used += N;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    (simplex[0].0, simplex[0].1, used)
}
