//! Retarded-time solving: the unique parameter `s` at which the past light
//! cone of a field point meets a timelike worldline.
//!
//! The predicate "`r(s)` lies in the chronological past of `x`" is monotone in
//! `s` for any timelike worldline, so the solver brackets its switching point by
//! geometric expansion and then refines `g(s) = (x - r(s))·(x - r(s))` with
//! Newton steps, falling back to bisection whenever a step leaves the bracket.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spacetime::{Event, FourVector};
use crate::worldline::{Separation, Worldline};

/// Relative tolerance on `|k·k|`, scaled by `max(|k|², …)`.
pub const INTERVAL_TOL: f64 = 1e-13;

const MAX_ITER: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetardedSolution {
    pub s_ret: f64,
    /// `k = x - r(s_ret)`, lightlike and future-pointing.
    pub k: FourVector,
    /// `-k·ṙ(s_ret)`, positive.
    pub rho: f64,
}

/// Solves from the worldline's own inertial estimate.
pub fn solve_retarded<W: Worldline + ?Sized>(w: &W, x: &Event) -> Result<RetardedSolution> {
    let guess = w.retarded_guess(x);
    let width = initial_width(w, x, guess);
    solve_retarded_near(w, x, guess, width)
}

fn initial_width<W: Worldline + ?Sized>(w: &W, x: &Event, guess: f64) -> f64 {
    let sep = w.separation(x, guess);
    let v = w.velocity(guess);
    let speed = (-v.square()).sqrt();
    // spatial distance in the instantaneous rest frame, in parameter units
    let tau = sep.rho / speed;
    let dist = (sep.interval + tau * tau).max(0.0).sqrt();
    (dist / speed).max(1e-3 * (1.0 + guess.abs()))
}

/// Solves starting from `guess` with an initial bracket half-width `width`.
pub fn solve_retarded_near<W: Worldline + ?Sized>(
    w: &W,
    x: &Event,
    guess: f64,
    width: f64,
) -> Result<RetardedSolution> {
    let (lo_bound, hi_bound) = w.admissible_range();
    let guess = guess.clamp(lo_bound, hi_bound);
    let mut width = if width > 0.0 && width.is_finite() { width } else { 1.0 };

    let at_guess = w.separation(x, guess);
    if !at_guess.interval.is_finite() || !at_guess.rho.is_finite() {
        return Err(Error::NonFinite);
    }
    if at_guess.k.max_abs() == 0.0 {
        return Err(Error::OnWorldline);
    }

    // bracket [lo, hi]: lo in the past of x, hi not
    let (mut lo, mut lo_sep, mut hi, mut hi_sep);
    if at_guess.is_past() {
        lo = guess;
        lo_sep = at_guess;
        loop {
            let s = (guess + width).min(hi_bound);
            let sep = w.separation(x, s);
            if !sep.is_past() {
                hi = s;
                hi_sep = sep;
                break;
            }
            lo = s;
            lo_sep = sep;
            if s >= hi_bound {
                return Err(Error::Horizon);
            }
            width *= 2.0;
        }
    } else {
        hi = guess;
        hi_sep = at_guess;
        loop {
            let s = (guess - width).max(lo_bound);
            let sep = w.separation(x, s);
            if sep.is_past() {
                lo = s;
                lo_sep = sep;
                break;
            }
            hi = s;
            hi_sep = sep;
            if s <= lo_bound {
                return Err(Error::Horizon);
            }
            width *= 2.0;
        }
    }

    // Newton from the past side converges monotonically for the concave g of
    // inertial and hyperbolic motion; the bracket guards everything else.
    let mut s = lo;
    let mut sep = lo_sep;
    if hi_sep.rho > 0.0 && hi_sep.interval.abs() < lo_sep.interval.abs() {
        s = hi;
        sep = hi_sep;
    }
    for _ in 0..MAX_ITER {
        let scale = sep.k.max_abs().powi(2).max(f64::MIN_POSITIVE);
        if sep.rho > 0.0 && sep.interval.abs() <= INTERVAL_TOL * scale {
            return finish(s, sep);
        }
        if sep.k.max_abs() < 1e-300 {
            return Err(Error::OnWorldline);
        }
        if hi - lo <= 4.0 * f64::EPSILON * s.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        // g'(s) = 2 rho
        let newton = if sep.rho > 0.0 { s - sep.interval / (2.0 * sep.rho) } else { f64::NAN };
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if next == s {
            break;
        }
        s = next;
        sep = w.separation(x, s);
        if !sep.interval.is_finite() || !sep.rho.is_finite() {
            return Err(Error::NonFinite);
        }
        if sep.is_past() {
            lo = s;
            lo_sep = sep;
        } else {
            hi = s;
            hi_sep = sep;
        }
    }
    // bracket collapsed to round-off: take the better endpoint if it is acceptable
    let best = [(lo, lo_sep), (hi, hi_sep)]
        .into_iter()
        .filter(|(_, sp)| sp.rho > 0.0)
        .min_by(|a, b| a.1.interval.abs().total_cmp(&b.1.interval.abs()));
    match best {
        Some((_, sp)) if sp.k.max_abs() < 1e-300 => Err(Error::OnWorldline),
        Some((s, sp)) if sp.interval.abs() <= 1e-12 * sp.k.max_abs().powi(2).max(1.0) => finish(s, sp),
        Some((_, sp)) => Err(Error::NoConvergence { residual: sp.interval }),
        None => Err(Error::NoConvergence { residual: f64::NAN }),
    }
}

fn finish(s: f64, sep: Separation) -> Result<RetardedSolution> {
    if sep.k.max_abs() == 0.0 {
        return Err(Error::OnWorldline);
    }
    Ok(RetardedSolution { s_ret: s, k: sep.k, rho: sep.rho })
}
