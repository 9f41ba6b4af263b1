//! Sign-change bisection.

/// Hard cap on halvings. On an interval of length <= 4 this reaches the
/// spacing of adjacent doubles well before the cap.
pub const MAX_ITERATIONS: usize = 64;

/// Bracket width below which a root counts as converged.
pub const PARAM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
    /// Final bracket width.
    pub width: f64,
}

/// Bisects `f` on `[lo, hi]` given endpoint values of opposite sign (either
/// may be zero).
///
/// Halves until the bracket stops shrinking in floating point, `f` hits an
/// exact zero, or [`MAX_ITERATIONS`] is reached; returns whichever visited
/// point has the smallest `|f|`. Errors from `f` abort the search.
pub fn bisect<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
    mut f_hi: f64,
) -> Result<Root, E> {
    debug_assert!(lo <= hi);
    debug_assert!(f_lo * f_hi <= 0.0, "no sign change: {f_lo} {f_hi}");
    let mut iterations = 0;
    if f_lo != 0.0 && f_hi != 0.0 {
        while iterations < MAX_ITERATIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = f(mid)?;
            iterations += 1;
            if fm == 0.0 {
                return Ok(Root {
                    x: mid,
                    value: 0.0,
                    iterations,
                    width: hi - lo,
                });
            }
            if (fm < 0.0) == (f_lo < 0.0) {
                lo = mid;
                f_lo = fm;
            } else {
                hi = mid;
                f_hi = fm;
            }
        }
    }
    let (x, value) = if f_lo.abs() <= f_hi.abs() {
        (lo, f_lo)
    } else {
        (hi, f_hi)
    };
    Ok(Root {
        x,
        value,
        iterations,
        width: hi - lo,
    })
}

/// Number of strict sign changes in a sequence, skipping exact zeros.
pub fn count_sign_changes(values: impl IntoIterator<Item = f64>) -> usize {
    let mut last = 0.0;
    let mut changes = 0;
    for v in values {
        if v == 0.0 || v.is_nan() {
            continue;
        }
        if last != 0.0 && (v < 0.0) != (last < 0.0) {
            changes += 1;
        }
        last = v;
    }
    changes
}
