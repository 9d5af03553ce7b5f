use std::cell::RefCell;

use serde::Serialize;

use super::NFunction;
use crate::numeric::gauss_kronrod;
use crate::{Error, Result, Scalar};

/// Table panels per decade of `τ`.
const PANELS_PER_DECADE: usize = 8;
const TAU_LO: f64 = 1e-10;
const TAU_HI: f64 = 1e16;
const TAU_HI_EXTENDED: f64 = 1e40;
/// Beyond the table, panels keep being added up to this `τ`.
const TAU_CEILING: f64 = 1e300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailBehaviour {
    /// `∫₁^∞ G⁻¹(τ) τ^{-(N+1)/N} dτ = ∞`
    Diverges,
    /// The tail integral is finite; the conjugate is an extended Young function.
    Converges,
}

/// Local power-law exponents of `h(τ) = G⁻¹(τ) τ^{-(N+1)/N}` at both ends.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SobolevIntegrability<T> {
    pub dimension: usize,
    /// `h(τ) ~ τ^β` as `τ → 0`; the integral at zero is finite iff `β > -1`.
    pub near_zero_exponent: T,
    pub near_zero_finite: bool,
    /// `h(τ) ~ τ^γ` as `τ → ∞`.
    pub tail_exponent: T,
    pub tail: TailBehaviour,
}

/// Estimates the behaviour of the Sobolev integrand at `0` and `∞`.
pub fn sobolev_integrability<T: Scalar>(g: &NFunction<T>, n: usize) -> Result<SobolevIntegrability<T>> {
    if n < 2 {
        return Err(Error::Domain { what: "sobolev dimension", value: n as f64 });
    }
    let h = Integrand::new(g, n);
    let slope = |a: f64, b: f64| -> Result<T> {
        let (a, b) = (T::lit(a), T::lit(b));
        let (ha, hb) = (h.at(a)?, h.at(b)?);
        Ok((hb / ha).ln() / (b / a).ln())
    };
    let beta = slope(1e-12, 1e-10)?;
    let gamma = slope(1e14, 1e16)?;
    let margin = T::lit(1e-3);
    Ok(SobolevIntegrability {
        dimension: n,
        near_zero_exponent: beta,
        near_zero_finite: beta > -T::one() + margin,
        tail_exponent: gamma,
        tail: if gamma >= -T::one() - margin { TailBehaviour::Diverges } else { TailBehaviour::Converges },
    })
}

/// The Sobolev conjugate `G_*` with `G_*⁻¹(t) = ∫₀ᵗ G⁻¹(τ) τ^{-(N+1)/N} dτ`.
#[derive(Clone, Debug)]
pub struct SobolevConjugate<T: Scalar> {
    pub function: NFunction<T>,
    /// `M = ∫₀^∞`, present in the extended case; `G_*(s) = +∞` for `s >= M`.
    pub asymptote: Option<T>,
    pub integrability: SobolevIntegrability<T>,
}

/// Builds `G_*` for dimension `n >= 2`.
///
/// `G_*⁻¹` is tabulated on geometric panels in `τ`; each panel is integrated
/// with Gauss–Kronrod after the substitution `τ = σ^N`, and the piece below
/// the first node uses the local power law of the integrand. Values of `G_*`
/// are obtained by inverting the table with a safeguarded Newton iteration.
pub fn sobolev_conjugate<T: Scalar>(g: &NFunction<T>, n: usize) -> Result<SobolevConjugate<T>> {
    let integrability = sobolev_integrability(g, n)?;
    if !integrability.near_zero_finite {
        return Err(Error::SobolevUndefinedNearZero { exponent: integrability.near_zero_exponent.as_f64() });
    }
    let extended = integrability.tail == TailBehaviour::Converges;
    let tau_hi = if extended { TAU_HI_EXTENDED } else { TAU_HI };
    let h = Integrand::new(g, n);

    let decades = (tau_hi / TAU_LO).log10().round() as usize;
    let panels = decades * PANELS_PER_DECADE;
    let ratio = T::lit(10f64.powf(1.0 / PANELS_PER_DECADE as f64));
    let mut tau = Vec::with_capacity(panels + 1);
    tau.push(T::lit(TAU_LO));
    for k in 0..panels {
        tau.push(tau[k] * ratio);
    }
    let beta = integrability.near_zero_exponent;
    let head = h.at(tau[0])? * tau[0] / (beta + T::one());
    let mut cum = Vec::with_capacity(tau.len());
    cum.push(head);
    for k in 0..panels {
        let piece = h.panel(tau[k], tau[k + 1])?;
        cum.push(cum[k] + piece);
    }
    let asymptote = if extended {
        let gamma = integrability.tail_exponent;
        let last = *tau.last().unwrap();
        let tail = h.at(last)? * last / (-gamma - T::one());
        Some(*cum.last().unwrap() + tail)
    } else {
        None
    };
    let table = InverseTable { h, tau, cum, head_exponent: beta + T::one(), asymptote };
    let label = format!("sobolev_{n}({})", g.label());
    Ok(SobolevConjugate { function: NFunction::from_sobolev_table(table, label), asymptote, integrability })
}

/// `h(τ) = G⁻¹(τ) τ^{-(N+1)/N}`.
#[derive(Clone, Debug)]
struct Integrand<T: Scalar> {
    g: NFunction<T>,
    n: T,
    exponent: T,
}

impl<T: Scalar> Integrand<T> {
    fn new(g: &NFunction<T>, n: usize) -> Self {
        let nn = T::from_usize_lossy(n);
        Self { g: g.clone(), n: nn, exponent: (nn + T::one()) / nn }
    }

    fn at(&self, tau: T) -> Result<T> {
        Ok(self.g.inverse(tau)? / tau.powf(self.exponent))
    }

    /// `∫_a^b h(τ) dτ = ∫ N G⁻¹(σ^N) σ^{-2} dσ` over `σ ∈ [a^{1/N}, b^{1/N}]`.
    fn panel(&self, a: T, b: T) -> Result<T> {
        let inv_n = T::one() / self.n;
        let (sa, sb) = (a.powf(inv_n), b.powf(inv_n));
        let failure = RefCell::new(None);
        let f = |s: T| match self.g.inverse(s.powf(self.n)) {
            Ok(x) => self.n * x / (s * s),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                T::zero()
            }
        };
        let (value, _) = gauss_kronrod(&f, sa, sb);
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(value),
        }
    }
}

/// Cumulative table `τ_k ↦ S_k = G_*⁻¹(τ_k)`.
#[derive(Clone, Debug)]
pub(crate) struct InverseTable<T: Scalar> {
    h: Integrand<T>,
    tau: Vec<T>,
    cum: Vec<T>,
    /// `S(τ) ≈ S_0 (τ/τ_0)^{head_exponent}` below the first node.
    head_exponent: T,
    asymptote: Option<T>,
}

impl<T: Scalar> InverseTable<T> {
    /// `G_*(s)`.
    pub(crate) fn value(&self, s: T) -> T {
        if let Some(m) = self.asymptote {
            if s >= m {
                return T::infinity();
            }
        }
        if s <= self.cum[0] {
            return self.tau[0] * (s / self.cum[0]).powf(T::one() / self.head_exponent);
        }
        let last = self.cum.len() - 1;
        if s <= self.cum[last] {
            let k = self.cum.partition_point(|c| *c <= s).saturating_sub(1).min(last - 1);
            return self.solve_panel(self.tau[k], self.tau[k + 1], s - self.cum[k]).unwrap_or(T::nan());
        }
        self.beyond(s)
    }

    /// `g_*(s) = 1 / h(G_*(s))`.
    pub(crate) fn density(&self, s: T) -> T {
        let t = self.value(s);
        if !t.is_finite() {
            return T::infinity();
        }
        match self.h.at(t) {
            Ok(hv) if hv > T::zero() => T::one() / hv,
            _ => T::infinity(),
        }
    }

    fn beyond(&self, s: T) -> T {
        let ratio = self.tau[1] / self.tau[0];
        let mut a = *self.tau.last().unwrap();
        let mut acc = *self.cum.last().unwrap();
        let ceiling = T::lit(TAU_CEILING);
        while a < ceiling {
            let b = a * ratio;
            let Ok(piece) = self.h.panel(a, b) else { return T::nan() };
            if acc + piece >= s {
                return self.solve_panel(a, b, s - acc).unwrap_or(T::nan());
            }
            acc = acc + piece;
            a = b;
        }
        T::infinity()
    }

    /// Finds `τ ∈ [a, b]` with `∫_a^τ h = r` by Newton steps safeguarded by
    /// bisection.
    fn solve_panel(&self, a: T, b: T, r: T) -> Result<T> {
        let (mut lo, mut hi) = (a, b);
        let total = self.h.panel(a, b)?;
        let mut x = if total > T::zero() { a + (b - a) * (r / total).min(T::one()) } else { a };
        for _ in 0..100 {
            let fx = self.h.panel(a, x)? - r;
            if fx > T::zero() {
                hi = x;
            } else {
                lo = x;
            }
            let dx = fx / self.h.at(x)?;
            let mut next = x - dx;
            if !(next > lo && next < hi) {
                next = lo + (hi - lo) / T::lit(2.0);
            }
            if (next - x).abs() <= T::lit(4.0) * T::epsilon() * x || hi - lo <= T::lit(4.0) * T::epsilon() * hi {
                return Ok(next);
            }
            x = next;
        }
        Err(Error::Convergence { what: "sobolev conjugate inversion", iterations: 100 })
    }
}
