use crate::{Error, Result, Scalar};

/// Cap on doubling/halving steps while bracketing.
const BRACKET_STEPS: usize = 2100;

/// Returns `sup { t >= 0 : f(t) <= level }` for a nondecreasing `f` with
/// `f(0) <= level`.
///
/// The root is bracketed geometrically (doubling or halving from `guess`) so
/// that the refinement runs on an interval `[t, 2t]`. For a continuous, strictly
/// increasing `f` this is the inverse `f^{-1}(level)`.
pub fn sup_below<T, F>(f: F, level: T, guess: T, max_iter: usize) -> Result<T>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    if level.is_nan() || level < T::zero() {
        return Err(Error::Domain { what: "sup_below", value: level.as_f64() });
    }
    if level.is_infinite() {
        return Err(Error::Convergence { what: "sup_below (infinite level)", iterations: 0 });
    }
    let two = T::lit(2.0);
    let mut start = if guess > T::zero() && guess.is_finite() { guess } else { T::one() };

    // Bracket lo < root <= hi with f(lo) <= level < f(hi).
    let (mut lo, mut hi);
    if f(start) <= level {
        let mut steps = 0;
        loop {
            let next = start * two;
            if !next.is_finite() || steps >= BRACKET_STEPS {
                return Err(Error::Convergence { what: "sup_below bracket", iterations: steps });
            }
            if f(next) > level {
                lo = start;
                hi = next;
                break;
            }
            start = next;
            steps += 1;
        }
    } else {
        let mut steps = 0;
        loop {
            let next = start / two;
            if next <= T::zero() || steps >= BRACKET_STEPS {
                // Root is below the smallest representable positive step.
                return Ok(T::zero());
            }
            if f(next) <= level {
                lo = next;
                hi = start;
                break;
            }
            start = next;
            steps += 1;
        }
    }

    // Illinois steps on f - level; every third step bisects.
    let (mut g_lo, mut g_hi) = (f(lo) - level, f(hi) - level);
    let mut last_kept = 0i8;
    for it in 0..max_iter {
        let width = hi - lo;
        let mid = lo + width / two;
        if mid <= lo || mid >= hi || width <= T::lit(2.0) * T::epsilon() * hi {
            return Ok(lo);
        }
        let secant = lo - g_lo * width / (g_hi - g_lo);
        let x = if it % 3 == 2 || !(secant > lo && secant < hi) { mid } else { secant };
        let gx = f(x) - level;
        if gx <= T::zero() {
            lo = x;
            g_lo = gx;
            if last_kept == 1 {
                g_hi = g_hi / two;
            }
            last_kept = 1;
        } else {
            hi = x;
            g_hi = gx;
            if last_kept == -1 {
                g_lo = g_lo / two;
            }
            last_kept = -1;
        }
    }
    if (hi - lo) <= T::lit(64.0) * T::epsilon() * hi {
        Ok(lo)
    } else {
        Err(Error::Convergence { what: "sup_below", iterations: max_iter })
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]` (`f(lo)` and `f(hi)` of
/// opposite signs). Returns the midpoint of the final bracket and the number
/// of iterations used.
pub fn bisect_sign_change<T, F>(f: F, mut lo: T, mut hi: T, rel_tol: T, max_iter: usize) -> Result<(T, usize)>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let two = T::lit(2.0);
    let f_lo = f(lo);
    let lo_negative = f_lo < T::zero();
    for it in 0..max_iter {
        let mid = lo + (hi - lo) / two;
        if (hi - lo) <= rel_tol * hi.abs().max(lo.abs()) || mid <= lo || mid >= hi {
            return Ok((mid, it));
        }
        let fm = f(mid);
        if (fm < T::zero()) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence { what: "bisection", iterations: max_iter })
}
