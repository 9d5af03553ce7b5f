use serde::Serialize;

use super::{integral_abs_product, luxemburg_norm, modular, orlicz_norm, Sampled};
use crate::nfunction::NFunction;
use crate::{Result, Scalar};

/// `∫|uv|` against the Young-modular bound and the four norm products.
#[derive(Clone, Debug, Serialize)]
pub struct HolderReport<T> {
    pub lhs: T,
    /// `ρ(u; G) + ρ(v; G*)`
    pub young_modular: T,
    /// `‖u‖_G ‖v‖_{G*}` (Orlicz norms)
    pub orlicz_orlicz: T,
    /// `2 ‖u‖_(G) ‖v‖_(G*)` (Luxemburg norms)
    pub twice_luxemburg_luxemburg: T,
    /// `‖u‖_G ‖v‖_(G*)`
    pub orlicz_luxemburg: T,
    /// `‖u‖_(G) ‖v‖_{G*}`
    pub luxemburg_orlicz: T,
    pub atol: T,
    pub pass: bool,
}

impl<T: Scalar> HolderReport<T> {
    pub fn norm_bounds(&self) -> [T; 4] {
        [self.orlicz_orlicz, self.twice_luxemburg_luxemburg, self.orlicz_luxemburg, self.luxemburg_orlicz]
    }
}

pub fn holder_check<T: Scalar, S: Sampled<T> + ?Sized>(u: &S, v: &S, g: &NFunction<T>, atol: T) -> Result<HolderReport<T>> {
    let lhs = integral_abs_product(u, v)?;
    let conj = g.conjugate();
    let young_modular = modular(u, g) + modular(v, &conj);
    let (lu, ou) = (luxemburg_norm(u, g).norm_value, orlicz_norm(u, g).norm_value);
    let (lv, ov) = (luxemburg_norm(v, &conj).norm_value, orlicz_norm(v, &conj).norm_value);
    let mut report = HolderReport {
        lhs,
        young_modular,
        orlicz_orlicz: ou * ov,
        twice_luxemburg_luxemburg: T::lit(2.0) * lu * lv,
        orlicz_luxemburg: ou * lv,
        luxemburg_orlicz: lu * ov,
        atol,
        pass: false,
    };
    report.pass = report.norm_bounds().iter().all(|&r| lhs <= r + atol) && lhs <= young_modular + atol;
    Ok(report)
}

/// `‖u‖_(G) <= ‖u‖_G <= 2 ‖u‖_(G)`.
#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport<T> {
    pub luxemburg: T,
    pub orlicz: T,
    pub lower_holds: bool,
    pub upper_holds: bool,
    pub pass: bool,
}

pub fn sandwich_check<T: Scalar, S: Sampled<T> + ?Sized>(u: &S, g: &NFunction<T>, atol: T) -> SandwichReport<T> {
    let luxemburg = luxemburg_norm(u, g).norm_value;
    let orlicz = orlicz_norm(u, g).norm_value;
    let lower_holds = luxemburg <= orlicz + atol;
    let upper_holds = orlicz <= T::lit(2.0) * luxemburg + atol;
    SandwichReport { luxemburg, orlicz, lower_holds, upper_holds, pass: lower_holds && upper_holds }
}

/// Relations between the modular and the norms: `ρ(u) <= ‖u‖_(G)` inside
/// the Luxemburg unit ball, `ρ(u) >= ‖u‖_(G)` outside it, and
/// `‖u‖_G <= ρ(u) + 1`.
#[derive(Clone, Debug, Serialize)]
pub struct ModularNormReport<T> {
    pub modular: T,
    pub luxemburg: T,
    pub orlicz: T,
    pub inside_unit_ball: bool,
    pub modular_vs_luxemburg_holds: bool,
    pub orlicz_bound_holds: bool,
    pub pass: bool,
}

pub fn modular_norm_inequalities<T: Scalar, S: Sampled<T> + ?Sized>(
    u: &S,
    g: &NFunction<T>,
    atol: T,
) -> ModularNormReport<T> {
    let rho = modular(u, g);
    let luxemburg = luxemburg_norm(u, g).norm_value;
    let orlicz = orlicz_norm(u, g).norm_value;
    let inside_unit_ball = luxemburg <= T::one();
    let modular_vs_luxemburg_holds = if inside_unit_ball { rho <= luxemburg + atol } else { rho >= luxemburg - atol };
    let orlicz_bound_holds = orlicz <= rho + T::one() + atol;
    ModularNormReport {
        modular: rho,
        luxemburg,
        orlicz,
        inside_unit_ball,
        modular_vs_luxemburg_holds,
        orlicz_bound_holds,
        pass: modular_vs_luxemburg_holds && orlicz_bound_holds,
    }
}
