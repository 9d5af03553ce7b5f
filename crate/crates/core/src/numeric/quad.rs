use crate::Scalar;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// Gauss weights for the embedded 7-point rule (nodes XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 7/15 panel on `[a, b]`: returns `(integral, error estimate)`.
pub fn gauss_kronrod<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let radius = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = radius * T::lit(XGK[j]);
        let s = f(center - dx) + f(center + dx);
        kronrod = kronrod + T::lit(WGK[j]) * s;
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * s;
        }
    }
    (kronrod * radius, ((kronrod - gauss) * radius).abs())
}

/// Globally adaptive Gauss–Kronrod quadrature.
///
/// Repeatedly bisects the panel with the largest error estimate until the
/// summed estimate drops below `max(abs_tol, rel_tol * |I|)` or `max_panels`
/// is reached. Returns `(integral, error estimate)`.
pub fn integrate_adaptive<T: Scalar, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
    max_panels: usize,
) -> (T, T) {
    if a == b {
        return (T::zero(), T::zero());
    }
    let mut panels: Vec<(T, T, T, T)> = Vec::with_capacity(64);
    let (i0, e0) = gauss_kronrod(&f, a, b);
    panels.push((a, b, i0, e0));
    loop {
        let total: T = panels.iter().map(|p| p.2).sum();
        let err: T = panels.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || panels.len() >= max_panels || !err.is_finite() {
            return (total, err);
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (k, p)| if p.3 > acc.1 { (k, p.3) } else { acc });
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let mid = T::lit(0.5) * (pa + pb);
        if mid <= pa || mid >= pb {
            // Panel cannot be refined further in this precision.
            panels.push((pa, pb, gauss_kronrod(&f, pa, pb).0, T::zero()));
            continue;
        }
        let (il, el) = gauss_kronrod(&f, pa, mid);
        let (ir, er) = gauss_kronrod(&f, mid, pb);
        panels.push((pa, mid, il, el));
        panels.push((mid, pb, ir, er));
    }
}
