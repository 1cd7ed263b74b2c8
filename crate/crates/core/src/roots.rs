//! Bracketed bisection for monotone scalar equations.
//!
//! Both the numeric inverse gradient of a user utility and the optimal price
//! of a step reduce to solving `f(x) = target` for a strictly decreasing `f`.
//! Bisection is slow but converges unconditionally once a sign change is
//! bracketed, which is all the oracle needs.

use crate::error::{Error, Result};

/// Stopping rule for [`solve_decreasing`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    /// Accept `x` once `|f(x) - target| <= residual`.
    pub residual: f64,
    /// Maximum number of bisection halvings.
    pub max_iterations: usize,
    /// Maximum number of bracket doublings during the expansion search.
    pub max_expansions: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            residual: 1e-12,
            max_iterations: 400,
            max_expansions: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Grow `[guess - width, guess + width]` geometrically until `f - target`
/// changes sign across it.
pub fn expand_bracket<F>(
    f: &F,
    target: f64,
    guess: f64,
    width: f64,
    tol: &Tolerance,
    coordinate: usize,
) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let mut half = if width > 0.0 { width } else { 1.0 };
    for _ in 0..tol.max_expansions {
        let lo = guess - half;
        let hi = guess + half;
        let (flo, fhi) = (f(lo) - target, f(hi) - target);
        if !(flo.is_finite() && fhi.is_finite()) {
            return Err(Error::RootNotFound {
                coordinate,
                reason: "function is not finite on the bracket",
                lo,
                hi,
                residual: f64::NAN,
                iterations: 0,
            });
        }
        // Decreasing: f(lo) >= target >= f(hi).
        if flo >= 0.0 && fhi <= 0.0 {
            return Ok((lo, hi));
        }
        half *= 2.0;
    }
    Err(Error::RootNotFound {
        coordinate,
        reason: "no sign change found by the bracket expansion search",
        lo: guess - half,
        hi: guess + half,
        residual: f64::NAN,
        iterations: 0,
    })
}

/// Solve `f(x) = target` for strictly decreasing `f` by bisection on
/// `[lo, hi]`, which must satisfy `f(lo) >= target >= f(hi)`.
///
/// The iteration stops at the residual tolerance or when the bracket can no
/// longer be split in `f64`; in the latter case the better endpoint is
/// returned if its residual is within a thousand times the tolerance
/// (bisection cannot do better at that point) and an error otherwise.
pub fn bisect_decreasing<F>(
    f: &F,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    tol: &Tolerance,
    coordinate: usize,
) -> Result<Root>
where
    F: Fn(f64) -> f64,
{
    let mut flo = f(lo) - target;
    let mut fhi = f(hi) - target;
    if flo < 0.0 || fhi > 0.0 {
        return Err(Error::RootNotFound {
            coordinate,
            reason: "initial interval does not bracket the target",
            lo,
            hi,
            residual: flo.abs().min(fhi.abs()),
            iterations: 0,
        });
    }
    for iterations in 0..tol.max_iterations {
        if flo.abs() <= tol.residual {
            return Ok(Root { x: lo, residual: flo.abs(), iterations });
        }
        if fhi.abs() <= tol.residual {
            return Ok(Root { x: hi, residual: fhi.abs(), iterations });
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            let (x, residual) = if flo.abs() <= fhi.abs() { (lo, flo.abs()) } else { (hi, fhi.abs()) };
            if residual <= 1e3 * tol.residual {
                return Ok(Root { x, residual, iterations });
            }
            return Err(Error::RootNotFound {
                coordinate,
                reason: "bracket collapsed before reaching the residual tolerance",
                lo,
                hi,
                residual,
                iterations,
            });
        }
        let fmid = f(mid) - target;
        if fmid == 0.0 {
            return Ok(Root { x: mid, residual: 0.0, iterations });
        }
        if fmid > 0.0 {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
            fhi = fmid;
        }
    }
    let (x, residual) = if flo.abs() <= fhi.abs() { (lo, flo.abs()) } else { (hi, fhi.abs()) };
    Err(Error::RootNotFound {
        coordinate,
        reason: "iteration limit reached",
        lo: x,
        hi,
        residual,
        iterations: tol.max_iterations,
    })
}

/// Expansion search from `guess`, then bisection.
pub fn solve_decreasing<F>(f: F, target: f64, guess: f64, width: f64, tol: &Tolerance, coordinate: usize) -> Result<Root>
where
    F: Fn(f64) -> f64,
{
    let (lo, hi) = expand_bracket(&f, target, guess, width, tol, coordinate)?;
    bisect_decreasing(&f, target, lo, hi, tol, coordinate)
}
