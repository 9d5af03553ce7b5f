//! N-functions and their calculus.
//!
//! An [`NFunction`] is represented through its right-continuous density `g`;
//! the function itself is `G(t) = ∫₀ᵗ g`. Built-in families carry closed-form
//! primitives, arbitrary densities fall back to adaptive quadrature, and the
//! derived constructions (conjugate, composition, nonnegative combinations,
//! dilation, Sobolev conjugate) are closed under the same interface.
//!
//! Every function in this module is pure; values are cheap to clone and safe
//! to share between threads.

mod compare;
mod delta2;
mod sobolev;
mod spec;

use std::fmt;
use std::sync::Arc;

pub use compare::{compare, ComparisonVerdict, Relation, Witness};
pub use delta2::{delta2_check, Delta2Report};
pub use sobolev::{
    sobolev_conjugate, sobolev_integrability, SobolevConjugate, SobolevIntegrability, TailBehaviour,
};
pub use spec::NFunctionSpec;

use crate::numeric::{integrate_adaptive, sup_below};
use crate::{Error, Result, Scalar};

/// Bisection budget for inversions (after geometric bracketing).
pub(crate) const INVERSION_ITERS: usize = 200;

pub type ScalarMap<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Log-spaced probe points in `[t_min, t_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeGrid<T> {
    pub t_min: T,
    pub t_max: T,
    pub per_decade: usize,
}

impl<T: Scalar> ProbeGrid<T> {
    pub fn new(t_min: T, t_max: T, per_decade: usize) -> Self {
        Self { t_min, t_max, per_decade }
    }

    pub fn points(&self) -> Vec<T> {
        log_space(self.t_min, self.t_max, self.per_decade)
    }
}

impl<T: Scalar> Default for ProbeGrid<T> {
    fn default() -> Self {
        Self { t_min: T::lit(1e-3), t_max: T::lit(1e3), per_decade: 256 }
    }
}

/// Log-spaced points from `lo` to `hi` inclusive.
pub fn log_space<T: Scalar>(lo: T, hi: T, per_decade: usize) -> Vec<T> {
    assert!(lo > T::zero() && hi >= lo, "log_space needs 0 < lo <= hi");
    let decades = (hi / lo).log10();
    let n = ((decades * T::from_usize_lossy(per_decade.max(1))).ceil().to_usize().unwrap_or(0)).max(1);
    let step = decades / T::from_usize_lossy(n);
    let ten = T::lit(10.0);
    let mut out: Vec<T> = (0..=n).map(|k| lo * ten.powf(step * T::from_usize_lossy(k))).collect();
    out[0] = lo;
    out[n] = hi;
    out
}

#[derive(Clone)]
enum Kind<T: Scalar> {
    /// `coef · t^alpha`
    Power { coef: T, alpha: T },
    /// `e^t − t − 1`
    ExpMinus,
    /// `e^{t^p} − 1`
    ExpPower { p: T },
    /// `(1+t) ln(1+t) − t`
    LLog,
    /// `t^alpha (ln t + 1)` for `t ≥ 1`, continued by `t^{alpha+1}` below 1.
    PowerLog { alpha: T },
    /// Piecewise-linear density through `(t_k, g_k)`, extrapolated linearly.
    Tabulated { t: Vec<T>, g: Vec<T>, cum: Vec<T> },
    Density { density: ScalarMap<T>, primitive: Option<ScalarMap<T>> },
    Conjugate(NFunction<T>),
    Compose { outer: NFunction<T>, inner: NFunction<T> },
    Combination(Vec<(T, NFunction<T>)>),
    Dilation { base: NFunction<T>, factor: T },
    Sobolev(Arc<sobolev::InverseTable<T>>),
}

/// Monotone tabulation `t_k ↦ G(t_k)` on a geometric grid, used to bracket
/// inversions.
#[derive(Clone, Debug)]
struct Tabulation<T> {
    t: Vec<T>,
    values: Vec<T>,
}

struct Inner<T: Scalar> {
    kind: Kind<T>,
    label: String,
    cache: Option<Tabulation<T>>,
}

/// A Young function `G(t) = ∫₀ᵗ g(τ) dτ` with nondecreasing density `g`.
#[derive(Clone)]
pub struct NFunction<T: Scalar> {
    inner: Arc<Inner<T>>,
}

impl<T: Scalar> fmt::Debug for NFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NFunction").field("label", &self.inner.label).finish()
    }
}

impl<T: Scalar> fmt::Display for NFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.inner.label)
    }
}

impl<T: Scalar> NFunction<T> {
    fn from_kind(kind: Kind<T>, label: String) -> Self {
        Self { inner: Arc::new(Inner { kind, label, cache: None }) }
    }

    /// `t^alpha / alpha`, density `t^{alpha-1}`.
    pub fn power(alpha: T) -> Result<Self> {
        Self::scaled_power(T::one() / alpha, alpha)
    }

    /// `coef · t^alpha`.
    pub fn scaled_power(coef: T, alpha: T) -> Result<Self> {
        if !(alpha > T::one()) || !(coef > T::zero()) || !alpha.is_finite() || !coef.is_finite() {
            return Err(Error::InvalidNFunction(format!(
                "power needs alpha > 1 and coef > 0 (alpha={alpha}, coef={coef})"
            )));
        }
        Ok(Self::from_kind(Kind::Power { coef, alpha }, format!("{coef}*t^{alpha}")))
    }

    /// `e^t − t − 1`.
    pub fn exp_minus() -> Self {
        Self::from_kind(Kind::ExpMinus, "exp(t)-t-1".into())
    }

    /// `e^{t^p} − 1` for `p > 1`.
    pub fn exp_power(p: T) -> Result<Self> {
        if !(p > T::one()) {
            return Err(Error::InvalidNFunction(format!("exp_power needs p > 1 (p={p})")));
        }
        Ok(Self::from_kind(Kind::ExpPower { p }, format!("exp(t^{p})-1")))
    }

    /// `(1+t) ln(1+t) − t`.
    pub fn llog() -> Self {
        Self::from_kind(Kind::LLog, "(1+t)log(1+t)-t".into())
    }

    /// `t^alpha (ln t + 1)` on `[1, ∞)`.
    ///
    /// The closed form is negative near zero, so below `t = 1` it is continued
    /// by `t^{alpha+1}`, which matches value and slope at 1. The ratio
    /// `t g(t) / G(t)` is then `alpha + 1` on `(0, 1]` and
    /// `alpha + 1/(ln t + 1)` beyond.
    pub fn power_log(alpha: T) -> Result<Self> {
        if !(alpha > T::one()) {
            return Err(Error::InvalidNFunction(format!("power_log needs alpha > 1 (alpha={alpha})")));
        }
        Ok(Self::from_kind(Kind::PowerLog { alpha }, format!("t^{alpha}(ln t+1)")))
    }

    /// Piecewise-linear density through `nodes = [(t, g(t))]`.
    ///
    /// The first node must be `(0, 0)`, abscissae strictly increasing, values
    /// nondecreasing and positive after the origin, and the last segment must
    /// have positive slope (it is extrapolated linearly so `g → ∞`).
    pub fn tabulated(nodes: &[(T, T)]) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidNFunction("tabulated density needs at least two nodes".into()));
        }
        if nodes[0].0 != T::zero() || nodes[0].1 != T::zero() {
            return Err(Error::InvalidNFunction("tabulated density must start at (0, 0)".into()));
        }
        for w in nodes.windows(2) {
            let ((t0, g0), (t1, g1)) = (w[0], w[1]);
            if !(t1 > t0) || !(g1 >= g0) || !(g1 > T::zero()) || !t1.is_finite() || !g1.is_finite() {
                return Err(Error::InvalidNFunction(format!(
                    "tabulated density must be increasing in t and nondecreasing, positive in g (at t={t1})"
                )));
            }
        }
        let m = nodes.len();
        if !(nodes[m - 1].1 > nodes[m - 2].1) {
            return Err(Error::InvalidNFunction("last tabulated segment must have positive slope".into()));
        }
        let t: Vec<T> = nodes.iter().map(|n| n.0).collect();
        let g: Vec<T> = nodes.iter().map(|n| n.1).collect();
        let mut cum = vec![T::zero(); m];
        for k in 1..m {
            cum[k] = cum[k - 1] + (t[k] - t[k - 1]) * (g[k] + g[k - 1]) * T::lit(0.5);
        }
        Ok(Self::from_kind(Kind::Tabulated { t, g, cum }, format!("tabulated[{m}]")))
    }

    /// N-function from a user-supplied density; `G` is computed by adaptive
    /// quadrature. The density is checked with [`NFunction::validate`].
    pub fn from_density(label: &str, density: impl Fn(T) -> T + Send + Sync + 'static) -> Result<Self> {
        let f = Self::from_kind(Kind::Density { density: Arc::new(density), primitive: None }, label.into());
        f.validate(&ProbeGrid::new(T::lit(1e-3), T::lit(1e3), 16))?;
        Ok(f)
    }

    /// Like [`NFunction::from_density`] with a closed-form primitive.
    pub fn from_density_and_primitive(
        label: &str,
        density: impl Fn(T) -> T + Send + Sync + 'static,
        primitive: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        let f = Self::from_kind(
            Kind::Density { density: Arc::new(density), primitive: Some(Arc::new(primitive)) },
            label.into(),
        );
        f.validate(&ProbeGrid::new(T::lit(1e-3), T::lit(1e3), 16))?;
        Ok(f)
    }

    /// The complementary function `G*(s) = ∫₀ˢ g*`, `g*(s) = sup{t : g(t) ≤ s}`.
    pub fn conjugate(&self) -> Self {
        Self::from_kind(Kind::Conjugate(self.clone()), format!("conj({})", self.inner.label))
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: &Self, inner: &Self) -> Self {
        Self::from_kind(
            Kind::Compose { outer: outer.clone(), inner: inner.clone() },
            format!("{}∘{}", outer.inner.label, inner.inner.label),
        )
    }

    /// `Σ aᵢ Gᵢ` with `aᵢ ≥ 0`, not all zero.
    pub fn linear_combination(terms: &[(T, Self)]) -> Result<Self> {
        if terms.is_empty() || terms.iter().any(|(a, _)| !(*a >= T::zero()) || !a.is_finite()) {
            return Err(Error::InvalidNFunction("combination needs nonnegative finite weights".into()));
        }
        if terms.iter().all(|(a, _)| *a == T::zero()) {
            return Err(Error::InvalidNFunction("combination has all weights zero".into()));
        }
        let label = terms.iter().map(|(a, g)| format!("{a}*{}", g.inner.label)).collect::<Vec<_>>().join("+");
        Ok(Self::from_kind(Kind::Combination(terms.to_vec()), label))
    }

    /// `t ↦ G(k t)` for `k > 0`.
    pub fn dilate(&self, factor: T) -> Result<Self> {
        if !(factor > T::zero()) || !factor.is_finite() {
            return Err(Error::InvalidNFunction(format!("dilation factor must be positive (got {factor})")));
        }
        Ok(Self::from_kind(
            Kind::Dilation { base: self.clone(), factor },
            format!("{}({factor}t)", self.inner.label),
        ))
    }

    pub(crate) fn from_sobolev_table(table: sobolev::InverseTable<T>, label: String) -> Self {
        Self::from_kind(Kind::Sobolev(Arc::new(table)), label)
    }

    /// Returns a copy carrying a tabulation of `G` on `nodes` geometric points
    /// of `[t_min, t_max]`, used to bracket [`NFunction::inverse`].
    pub fn with_cache(&self, t_min: T, t_max: T, nodes: usize) -> Self {
        let per_decade = ((T::from_usize_lossy(nodes.max(2)) / (t_max / t_min).log10()).ceil())
            .to_usize()
            .unwrap_or(8)
            .max(1);
        let t = log_space(t_min, t_max, per_decade);
        let values = t.iter().map(|&x| self.at(x)).collect();
        Self {
            inner: Arc::new(Inner {
                kind: self.inner.kind.clone(),
                label: self.inner.label.clone(),
                cache: Some(Tabulation { t, values }),
            }),
        }
    }

    pub fn label(&self) -> &str {
        &self.inner.label
    }

    pub fn has_closed_form(&self) -> bool {
        match &self.inner.kind {
            Kind::Density { primitive, .. } => primitive.is_some(),
            Kind::Conjugate(_) | Kind::Sobolev(_) => false,
            Kind::Compose { outer, inner } => outer.has_closed_form() && inner.has_closed_form(),
            Kind::Combination(terms) => terms.iter().all(|(_, g)| g.has_closed_form()),
            Kind::Dilation { base, .. } => base.has_closed_form(),
            _ => true,
        }
    }

    /// `G(t)` for `t ≥ 0`.
    pub fn eval(&self, t: T) -> Result<T> {
        check_arg("eval", t)?;
        Ok(self.at(t))
    }

    /// `g(t)` for `t ≥ 0`.
    pub fn density(&self, t: T) -> Result<T> {
        check_arg("density", t)?;
        Ok(self.density_at(t))
    }

    /// `G(|t|)`; `+∞` on overflow.
    pub fn at(&self, t: T) -> T {
        let t = t.abs();
        if t == T::zero() {
            return T::zero();
        }
        match &self.inner.kind {
            Kind::Power { coef, alpha } => *coef * t.powf(*alpha),
            Kind::ExpMinus => exp_minus_value(t),
            Kind::ExpPower { p } => t.powf(*p).exp_m1(),
            Kind::LLog => llog_value(t),
            Kind::PowerLog { alpha } => {
                if t < T::one() {
                    t.powf(*alpha + T::one())
                } else {
                    t.powf(*alpha) * (t.ln() + T::one())
                }
            }
            Kind::Tabulated { t: ts, g, cum } => {
                let (k, gt) = tabulated_density(ts, g, t);
                cum[k] + (t - ts[k]) * (g[k] + gt) * T::lit(0.5)
            }
            Kind::Density { density, primitive } => match primitive {
                Some(prim) => prim(t),
                None => {
                    let d = density.clone();
                    integrate_adaptive(move |x| d(x), T::zero(), t, T::zero(), T::lit(1e-12), 400).0
                }
            },
            Kind::Conjugate(base) => match base.conjugate_density(t) {
                // Equality case of Young's inequality: G*(s) = s·g*(s) − G(g*(s)).
                Ok(x) => (t * x - base.at(x)).max(T::zero()),
                Err(_) => T::infinity(),
            },
            Kind::Compose { outer, inner } => outer.at(inner.at(t)),
            Kind::Combination(terms) => terms.iter().map(|(a, g)| *a * g.at(t)).sum(),
            Kind::Dilation { base, factor } => base.at(*factor * t),
            Kind::Sobolev(table) => table.value(t),
        }
    }

    /// `g(|t|)`.
    pub fn density_at(&self, t: T) -> T {
        let t = t.abs();
        if let Kind::Density { density, .. } = &self.inner.kind {
            return density(t);
        }
        if t == T::zero() {
            return T::zero();
        }
        match &self.inner.kind {
            Kind::Power { coef, alpha } => *coef * *alpha * t.powf(*alpha - T::one()),
            Kind::ExpMinus => t.exp_m1(),
            Kind::ExpPower { p } => *p * t.powf(*p - T::one()) * t.powf(*p).exp(),
            Kind::LLog => t.ln_1p(),
            Kind::PowerLog { alpha } => {
                let a = *alpha;
                if t < T::one() {
                    (a + T::one()) * t.powf(a)
                } else {
                    a * t.powf(a - T::one()) * (t.ln() + T::one()) + t.powf(a - T::one())
                }
            }
            Kind::Tabulated { t: ts, g, .. } => tabulated_density(ts, g, t).1,
            Kind::Density { density, .. } => density(t),
            Kind::Conjugate(base) => base.conjugate_density(t).unwrap_or(T::infinity()),
            Kind::Compose { outer, inner } => outer.density_at(inner.at(t)) * inner.density_at(t),
            Kind::Combination(terms) => terms.iter().map(|(a, g)| *a * g.density_at(t)).sum(),
            Kind::Dilation { base, factor } => *factor * base.density_at(*factor * t),
            Kind::Sobolev(table) => table.density(t),
        }
    }

    /// Derivative `g'(t)` of the density (right derivative at kinks).
    ///
    /// Closed forms for the power, exponential and logarithmic families;
    /// other kinds use a one-sided difference quotient of `g`.
    pub fn density_slope(&self, t: T) -> T {
        let t = t.abs();
        match &self.inner.kind {
            Kind::Power { coef, alpha } => {
                let a = *alpha;
                if t == T::zero() {
                    return if a < T::lit(2.0) { T::infinity() } else if a == T::lit(2.0) { *coef * T::lit(2.0) } else { T::zero() };
                }
                *coef * a * (a - T::one()) * t.powf(a - T::lit(2.0))
            }
            Kind::ExpMinus => t.exp(),
            Kind::LLog => T::one() / (T::one() + t),
            Kind::ExpPower { p } => {
                let p = *p;
                if t == T::zero() {
                    return if p < T::lit(2.0) { T::infinity() } else if p == T::lit(2.0) { T::lit(2.0) } else { T::zero() };
                }
                let e = t.powf(p).exp();
                e * (p * (p - T::one()) * t.powf(p - T::lit(2.0)) + p * p * t.powf(T::lit(2.0) * p - T::lit(2.0)))
            }
            Kind::PowerLog { alpha } => {
                let a = *alpha;
                if t < T::one() {
                    (a + T::one()) * a * t.powf(a - T::one())
                } else {
                    t.powf(a - T::lit(2.0)) * (a * (a - T::one()) * (t.ln() + T::one()) + T::lit(2.0) * a - T::one())
                }
            }
            Kind::Dilation { base, factor } => *factor * *factor * base.density_slope(*factor * t),
            Kind::Combination(terms) => terms.iter().map(|(a, g)| *a * g.density_slope(t)).sum(),
            _ => {
                let h = T::lit(1e-6) * t.max(T::lit(1e-6));
                (self.density_at(t + h) - self.density_at(t)) / h
            }
        }
    }

    /// `G⁻¹(y)`: the `t` with `G(t) = y`, by bracketing and bisection.
    pub fn inverse(&self, y: T) -> Result<T> {
        check_arg("inverse", y)?;
        if y == T::zero() {
            return Ok(T::zero());
        }
        let guess = match &self.inner.cache {
            Some(tab) => {
                let k = tab.values.partition_point(|v| *v <= y);
                if k == 0 {
                    tab.t[0]
                } else {
                    tab.t[k - 1]
                }
            }
            None => T::one(),
        };
        sup_below(|t| self.at(t), y, guess, INVERSION_ITERS)
    }

    /// `g*(s) = sup{t ≥ 0 : g(t) ≤ s}`, the right-continuous inverse of `g`.
    pub fn conjugate_density(&self, s: T) -> Result<T> {
        check_arg("conjugate_density", s)?;
        if s == T::zero() {
            return Ok(T::zero());
        }
        let closed = match &self.inner.kind {
            Kind::Power { coef, alpha } => Some((s / (*coef * *alpha)).powf(T::one() / (*alpha - T::one()))),
            Kind::ExpMinus => Some(s.ln_1p()),
            Kind::LLog => Some(s.exp_m1()),
            _ => None,
        };
        match closed {
            Some(x) if x.is_finite() => Ok(x),
            Some(_) => Err(Error::Convergence { what: "conjugate density overflow", iterations: 0 }),
            None => sup_below(|t| self.density_at(t), s, T::one(), INVERSION_ITERS),
        }
    }

    /// `G(a) + G*(b) − ab`, nonnegative by Young's inequality.
    pub fn young_gap(&self, a: T, b: T) -> Result<T> {
        check_arg("young_gap", a)?;
        check_arg("young_gap", b)?;
        Ok(self.at(a) + self.conjugate().at(b) - a * b)
    }

    /// Checks the N-function axioms on the probe grid: `g(0) = 0`, `g > 0`
    /// and nondecreasing, `G` convex, `G(t)/t` strictly increasing across the
    /// probe range and `g` still growing on its upper half (finite-range
    /// stand-ins for `G(t)/t → 0` at zero and `→ ∞` at infinity).
    pub fn validate(&self, probes: &ProbeGrid<T>) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidNFunction(format!("{}: {msg}", self.inner.label)));
        let g0 = self.density_at(T::zero());
        if g0 != T::zero() {
            return fail(format!("g(0) = {g0} != 0"));
        }
        let pts = probes.points();
        let rtol = T::lit(1e-9);
        let mut prev_g = T::zero();
        let mut prev_ratio = T::zero();
        let mut values = Vec::with_capacity(pts.len());
        for &t in &pts {
            let g = self.density_at(t);
            if !(g > T::zero()) {
                return fail(format!("g({t}) = {g} is not positive"));
            }
            if g < prev_g * (T::one() - rtol) {
                return fail(format!("g decreases at t = {t}"));
            }
            prev_g = g;
            let big = self.at(t);
            if !big.is_finite() {
                break;
            }
            let ratio = big / t;
            if ratio < prev_ratio * (T::one() - rtol) {
                return fail(format!("G(t)/t decreases at t = {t}"));
            }
            prev_ratio = ratio;
            values.push((t, big));
        }
        for w in values.windows(3) {
            let ((a, ga), (b, gb), (c, gc)) = (w[0], w[1], w[2]);
            let left = (gb - ga) / (b - a);
            let right = (gc - gb) / (c - b);
            if left > right * (T::one() + T::lit(1e-6)) + T::lit(1e-12) {
                return fail(format!("convexity violated near t = {b}"));
            }
        }
        let mid = (probes.t_min * probes.t_max).sqrt();
        if !(self.density_at(probes.t_max) > self.density_at(mid) * (T::one() + T::lit(1e-6))) {
            return fail("g is not increasing on the upper probe range".into());
        }
        if let (Some(first), Some(last)) = (values.first(), values.last()) {
            let r0 = first.1 / first.0;
            let r1 = last.1 / last.0;
            if !(r1 > r0 * (T::one() + T::lit(1e-6))) {
                return fail("G(t)/t is not increasing over the probe range".into());
            }
        }
        Ok(())
    }
}

fn check_arg<T: Scalar>(what: &'static str, t: T) -> Result<()> {
    if t.is_nan() || t < T::zero() {
        Err(Error::Domain { what, value: t.as_f64() })
    } else {
        Ok(())
    }
}

fn exp_minus_value<T: Scalar>(t: T) -> T {
    if t < T::lit(1e-2) {
        let t2 = t * t;
        t2 * (T::lit(0.5)
            + t * (T::lit(1.0 / 6.0) + t * (T::lit(1.0 / 24.0) + t * (T::lit(1.0 / 120.0) + t * T::lit(1.0 / 720.0)))))
    } else {
        t.exp_m1() - t
    }
}

fn llog_value<T: Scalar>(t: T) -> T {
    if t < T::lit(1e-2) {
        // Σ_{k≥2} (−1)^k t^k / (k(k−1))
        let mut term = t * t;
        let mut acc = T::zero();
        let mut sign = T::one();
        for k in 2..12u32 {
            let kk = T::from_u32(k).unwrap();
            acc = acc + sign * term / (kk * (kk - T::one()));
            term = term * t;
            sign = -sign;
        }
        acc
    } else {
        (T::one() + t) * t.ln_1p() - t
    }
}

/// Returns the segment index `k` with `t_k ≤ t` and the interpolated density.
fn tabulated_density<T: Scalar>(ts: &[T], g: &[T], t: T) -> (usize, T) {
    let m = ts.len();
    let k = ts.partition_point(|x| *x <= t).saturating_sub(1).min(m - 2);
    let slope = (g[k + 1] - g[k]) / (ts[k + 1] - ts[k]);
    (k, g[k] + slope * (t - ts[k]))
}
