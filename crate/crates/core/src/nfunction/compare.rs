use serde::Serialize;

use super::{log_space, NFunction, ProbeGrid};
use crate::Scalar;

/// How `G1` relates to `G2` at infinity, judged on the tail of a probe range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `G1 ~ G2`.
    Equivalent,
    /// `G2 ≺ G1`: `G2(x) <= G1(c x)` on the tail.
    Dominates,
    /// `G1 ≺ G2`.
    DominatedBy,
    /// `G1 ≺≺ G2`: `G1(t)/G2(λt)` decays on the tail for every tested `λ`.
    StrictlySlower,
    /// `G2 ≺≺ G1`.
    StrictlyFaster,
    IncomparableOnRange,
}

/// Constants certifying a relation at every tail probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Witness<T> {
    /// `lower(x) <= upper(c x)` for probes `x >= t`.
    Domination { c: T, t: T },
    /// `G1(a x) <= G2(x) <= G1(b x)` for probes `x >= x0`.
    Equivalence { a: T, b: T, x0: T },
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonVerdict<T> {
    pub relation: Relation,
    pub witness: Option<Witness<T>>,
    /// Smallest grid `c` with `G2(x) <= G1(c x)` on the tail.
    pub g1_dominates_g2: Option<T>,
    /// Smallest grid `c` with `G1(x) <= G2(c x)` on the tail.
    pub g2_dominates_g1: Option<T>,
    pub g1_strictly_slower: bool,
    pub g2_strictly_slower: bool,
    pub probe_range: (T, T),
    /// Left end of the tail on which the verdict was formed.
    pub tail_start: T,
}

const DILATIONS: [f64; 3] = [0.1, 1.0, 10.0];
const DECAY: f64 = 0.9;

/// Compares growth at infinity on the upper half (in `log t`) of `probes`.
///
/// Domination constants are searched on the grid `c = 2^{j/8}`,
/// `|j| <= 160`. Strictly slower growth is declared when, for each
/// `λ ∈ {0.1, 1, 10}`, the ratio `G1(t)/G2(λt)` is nonincreasing along the
/// tail and loses at least 10% between its ends. A strict relation in either
/// direction takes precedence over finite-range domination constants.
pub fn compare<T: Scalar>(g1: &NFunction<T>, g2: &NFunction<T>, probes: &ProbeGrid<T>) -> ComparisonVerdict<T> {
    let tail_start = (probes.t_min * probes.t_max).sqrt();
    let tail = log_space(tail_start, probes.t_max, probes.per_decade);

    let c12 = min_constant(&tail, |x| g2.at(x), |x| g1.at(x));
    let c21 = min_constant(&tail, |x| g1.at(x), |x| g2.at(x));
    let slower12 = decays(&tail, g1, g2);
    let slower21 = decays(&tail, g2, g1);

    let (relation, witness) = if slower12 && !slower21 {
        (Relation::StrictlySlower, c21.map(|c| Witness::Domination { c, t: tail_start }))
    } else if slower21 && !slower12 {
        (Relation::StrictlyFaster, c12.map(|c| Witness::Domination { c, t: tail_start }))
    } else {
        match (c12, c21) {
            (Some(b), Some(_)) => {
                let a = max_lower_constant(&tail, g1, g2).unwrap_or(T::zero());
                (Relation::Equivalent, Some(Witness::Equivalence { a, b, x0: tail_start }))
            }
            (Some(c), None) => (Relation::Dominates, Some(Witness::Domination { c, t: tail_start })),
            (None, Some(c)) => (Relation::DominatedBy, Some(Witness::Domination { c, t: tail_start })),
            (None, None) => (Relation::IncomparableOnRange, None),
        }
    };
    ComparisonVerdict {
        relation,
        witness,
        g1_dominates_g2: c12,
        g2_dominates_g1: c21,
        g1_strictly_slower: slower12,
        g2_strictly_slower: slower21,
        probe_range: (probes.t_min, probes.t_max),
        tail_start,
    }
}

fn grid_constant<T: Scalar>(j: i32) -> T {
    T::lit(2f64.powf(j as f64 / 8.0))
}

/// Smallest `c = 2^{j/8}` with `lower(x) <= upper(c x)` at every tail probe.
fn min_constant<T: Scalar>(tail: &[T], lower: impl Fn(T) -> T, upper: impl Fn(T) -> T) -> Option<T> {
    let slack = T::one() + T::lit(1e-12);
    let lows: Vec<T> = tail.iter().map(|&x| lower(x)).collect();
    (-160..=160).map(grid_constant::<T>).find(|&c| {
        tail.iter().zip(&lows).all(|(&x, &lo)| lo.is_finite() && lo <= upper(c * x) * slack)
    })
}

/// Largest `a = 2^{j/8}` with `G1(a x) <= G2(x)` at every tail probe.
fn max_lower_constant<T: Scalar>(tail: &[T], g1: &NFunction<T>, g2: &NFunction<T>) -> Option<T> {
    let slack = T::one() + T::lit(1e-12);
    let highs: Vec<T> = tail.iter().map(|&x| g2.at(x)).collect();
    (-160..=160)
        .rev()
        .map(grid_constant::<T>)
        .find(|&a| tail.iter().zip(&highs).all(|(&x, &hi)| g1.at(a * x) <= hi * slack))
}

/// Whether `slow(t)/fast(λt)` decays along the tail for every tested `λ`.
fn decays<T: Scalar>(tail: &[T], slow: &NFunction<T>, fast: &NFunction<T>) -> bool {
    DILATIONS.iter().all(|&lambda| {
        let lambda = T::lit(lambda);
        let ratios: Option<Vec<T>> = tail
            .iter()
            .map(|&t| {
                let num = slow.at(t);
                let den = fast.at(lambda * t);
                if !num.is_finite() {
                    None
                } else if den.is_infinite() {
                    Some(T::zero())
                } else if den > T::zero() {
                    Some(num / den)
                } else {
                    None
                }
            })
            .collect();
        let Some(r) = ratios else { return false };
        let monotone = r.windows(2).all(|w| w[1] <= w[0] * (T::one() + T::lit(1e-12)));
        let first = r[0];
        let last = r[r.len() - 1];
        monotone && first > T::zero() && last <= first * T::lit(DECAY)
    })
}
