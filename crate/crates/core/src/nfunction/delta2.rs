use serde::Serialize;

use super::{NFunction, ProbeGrid};
use crate::Scalar;

/// Finite-range Δ₂ certificate.
///
/// `satisfied` refers only to `probe_range`: the growth ratio
/// `r(t) = t g(t) / G(t)` is sampled on log-spaced probes and judged bounded
/// when its maximum over the upper half of the range (in `log t`) does not
/// exceed its maximum over the lower half. `threshold` is the `T` beyond
/// which `G(2t) <= k G(t)` was verified; it is the left end of the probe
/// range, which stands in for `T = 0` when the range reaches toward zero.
#[derive(Clone, Debug, Serialize)]
pub struct Delta2Report<T> {
    pub satisfied: bool,
    /// `max G(2t)/G(t)` over probes `t >= threshold`.
    pub k: T,
    pub threshold: T,
    /// `max t g(t)/G(t)` over probes `t >= t0`.
    pub p_bound: T,
    pub t0: T,
    pub probe_range: (T, T),
    pub probes: usize,
}

/// Ratio-criterion scan on `probes`; `tol` is the relative slack allowed
/// between the two half-range maxima of `t g(t)/G(t)`.
pub fn delta2_check<T: Scalar>(g: &NFunction<T>, probes: &ProbeGrid<T>, tol: T) -> Delta2Report<T> {
    let pts = probes.points();
    let mid = (probes.t_min * probes.t_max).sqrt();
    let mut lower_max = T::zero();
    let mut upper_max = T::zero();
    let mut k = T::zero();
    let mut overflow = false;
    let mut used = 0;
    for &t in &pts {
        let big = g.at(t);
        if big == T::zero() {
            continue;
        }
        let doubled = g.at(t + t);
        if !big.is_finite() || !doubled.is_finite() {
            overflow = true;
            break;
        }
        used += 1;
        k = k.max(doubled / big);
        let r = t * g.density_at(t) / big;
        if t <= mid {
            lower_max = lower_max.max(r);
        } else {
            upper_max = upper_max.max(r);
        }
    }
    let p_bound = lower_max.max(upper_max);
    let bounded = upper_max <= lower_max * (T::one() + tol);
    let satisfied = !overflow && used > 1 && bounded && p_bound.is_finite();
    Delta2Report {
        satisfied,
        k: if overflow { T::infinity() } else { k },
        threshold: probes.t_min,
        p_bound: if overflow { T::infinity() } else { p_bound },
        t0: probes.t_min,
        probe_range: (probes.t_min, probes.t_max),
        probes: used,
    }
}
